use std::process::ExitCode;

use streamveil::cli::parse_args;
use streamveil::{emit_report, run_pipeline};

fn main() -> ExitCode {
    let cfg = match parse_args(std::env::args_os()) {
        Ok(cfg) => cfg,
        Err(e) => e.exit(),
    };
    let report = match run_pipeline(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    if let Err(e) = emit_report(&report, &cfg.out_dir) {
        eprintln!("error: {e}");
        return ExitCode::FAILURE;
    }
    print!("{}", report.summary());
    if !report.all_metrics_finite() {
        eprintln!("error: run produced non-finite metrics");
        return ExitCode::FAILURE;
    }
    ExitCode::SUCCESS
}
