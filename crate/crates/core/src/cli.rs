//! Command-line argument parsing.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;

use crate::ingest::{DatasetSource, Format};
use crate::perturb::StatsMode;
use crate::pipeline::{PipelineConfig, StreamSettings};

#[derive(Debug, Parser)]
#[command(
    name = "streamveil",
    version,
    about = "Perturb sensitive attributes of a data stream and measure windowed k-means fidelity"
)]
pub struct Args {
    /// Dataset file (dense ARFF or headed CSV).
    #[arg(long)]
    pub input: PathBuf,

    /// Input format; inferred from the file extension when omitted.
    #[arg(long)]
    pub format: Option<Format>,

    /// Sensitive numeric attribute(s) to perturb, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub sensitive: Vec<String>,

    /// Clusters per window.
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    pub k: u64,

    /// Clusters per window for the perturbed stream (defaults to --k).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub k_perturbed: Option<u64>,

    /// Tumbling window size in instances.
    #[arg(long, default_value_t = 3000, value_parser = clap::value_parser!(u64).range(1..))]
    pub window: u64,

    #[arg(long, default_value_t = 42)]
    pub seed: u64,

    /// `two-pass` (statistics over the whole stream) or `incremental`.
    #[arg(long, default_value = "two-pass")]
    pub stats_mode: StatsMode,

    /// Attributes whose values are already normalized, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub pre_normalized: Vec<String>,

    /// Only read the first N instances.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub limit: Option<u64>,

    /// Cluster per-window z-scored features instead of raw values.
    #[arg(long)]
    pub cluster_on_zscores: bool,

    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_iter: u64,

    /// k-means++ restarts per fit; the lowest-SSE run is kept.
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
    pub n_init: u64,

    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,

    /// Output directory for report.json, windows.csv and summary.txt.
    #[arg(long, default_value = "streamveil-report")]
    pub out: PathBuf,
}

impl Args {
    pub fn into_config(self) -> Result<PipelineConfig, clap::Error> {
        let format = match self.format.or_else(|| Format::from_path(&self.input)) {
            Some(f) => f,
            None => {
                return Err(clap::Error::raw(
                    clap::error::ErrorKind::MissingRequiredArgument,
                    "--format is required when the input extension is not .arff or .csv\n",
                ))
            }
        };
        if !(self.tol.is_finite() && self.tol >= 0.0) {
            return Err(clap::Error::raw(
                clap::error::ErrorKind::ValueValidation,
                "--tol must be non-negative\n",
            ));
        }
        let mut settings = StreamSettings::new(self.sensitive);
        settings.k = self.k as usize;
        settings.k_perturbed = self.k_perturbed.map(|k| k as usize);
        settings.window = self.window as usize;
        settings.seed = self.seed;
        settings.stats_mode = self.stats_mode;
        settings.pre_normalized = self.pre_normalized;
        settings.cluster_on_zscores = self.cluster_on_zscores;
        settings.max_iter = self.max_iter as usize;
        settings.n_init = self.n_init as usize;
        settings.tol = self.tol;
        Ok(PipelineConfig {
            source: DatasetSource::new(self.input, format),
            limit: self.limit.map(|l| l as usize),
            out_dir: self.out,
            settings,
        })
    }
}

/// Parses a full argv (program name first) into a pipeline configuration.
pub fn parse_args<I, S>(argv: I) -> Result<PipelineConfig, clap::Error>
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    Args::try_parse_from(argv)?.into_config()
}
