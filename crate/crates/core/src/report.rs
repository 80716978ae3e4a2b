//! Run reports and their on-disk forms.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::Format;
use crate::pipeline::StreamSettings;

pub const WINDOWS_CSV_HEADER: &str =
    "window_index,n,precision_orig,recall_orig,precision_pert,recall_pert,accuracy_pct,misclassification_pct";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowReport {
    pub window_index: usize,
    pub n: usize,
    pub precision_orig: f64,
    pub recall_orig: f64,
    pub precision_pert: f64,
    pub recall_pert: f64,
    pub accuracy_pct: f64,
    pub misclassification_pct: f64,
    /// Cluster Membership Matrix: original clusters by perturbed clusters.
    pub cmm: Vec<Vec<u64>>,
}

impl WindowReport {
    fn metrics(&self) -> [f64; 6] {
        [
            self.precision_orig,
            self.recall_orig,
            self.precision_pert,
            self.recall_pert,
            self.accuracy_pct,
            self.misclassification_pct,
        ]
    }
}

/// Window-size weighted means over all windows.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub precision_orig: f64,
    pub recall_orig: f64,
    pub precision_pert: f64,
    pub recall_pert: f64,
    pub accuracy_pct: f64,
    pub misclassification_pct: f64,
}

impl Aggregate {
    pub fn weighted(windows: &[WindowReport]) -> Self {
        let total: usize = windows.iter().map(|w| w.n).sum();
        if total == 0 {
            return Self::default();
        }
        let mut acc = [0.0; 6];
        for w in windows {
            for (a, m) in acc.iter_mut().zip(w.metrics()) {
                *a += m * w.n as f64;
            }
        }
        let t = total as f64;
        Self {
            precision_orig: acc[0] / t,
            recall_orig: acc[1] / t,
            precision_pert: acc[2] / t,
            recall_pert: acc[3] / t,
            accuracy_pct: acc[4] / t,
            misclassification_pct: acc[5] / t,
        }
    }

    fn metrics(&self) -> [f64; 6] {
        [
            self.precision_orig,
            self.recall_orig,
            self.precision_pert,
            self.recall_pert,
            self.accuracy_pct,
            self.misclassification_pct,
        ]
    }
}

/// Wall-clock seconds per stage.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub load_s: f64,
    pub stats_s: f64,
    pub perturb_s: f64,
    pub cluster_eval_s: f64,
    pub total_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceEcho {
    pub path: String,
    pub format: Format,
    pub limit: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub source: Option<SourceEcho>,
    pub instances: usize,
    pub settings: StreamSettings,
    pub per_window: Vec<WindowReport>,
    pub aggregate: Aggregate,
    pub timing: Timing,
}

impl RunReport {
    /// Copy with timing zeroed, for determinism comparisons.
    pub fn without_timing(&self) -> Self {
        Self {
            timing: Timing::default(),
            ..self.clone()
        }
    }

    pub fn all_metrics_finite(&self) -> bool {
        self.aggregate.metrics().iter().all(|m| m.is_finite())
            && self.per_window.iter().all(|w| w.metrics().iter().all(|m| m.is_finite()))
    }

    pub fn dataset_name(&self) -> String {
        self.source
            .as_ref()
            .and_then(|s| Path::new(&s.path).file_stem().map(|f| f.to_string_lossy().into_owned()))
            .unwrap_or_else(|| "in-memory stream".to_string())
    }

    pub fn windows_csv(&self) -> String {
        let mut out = String::from(WINDOWS_CSV_HEADER);
        out.push('\n');
        for w in &self.per_window {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                w.window_index,
                w.n,
                w.precision_orig,
                w.recall_orig,
                w.precision_pert,
                w.recall_pert,
                w.accuracy_pct,
                w.misclassification_pct
            );
        }
        out
    }

    pub fn summary(&self) -> String {
        let a = &self.aggregate;
        let mut out = String::new();
        let _ = writeln!(out, "Dataset\tAttributes Perturbed\t% Accuracy");
        let _ = writeln!(
            out,
            "{}\t{}\t{:.2} %",
            self.dataset_name(),
            self.settings.sensitive.join(", "),
            a.accuracy_pct
        );
        let _ = writeln!(out);
        let _ = writeln!(out, "instances: {}", self.instances);
        let _ = writeln!(out, "windows: {} (w = {})", self.per_window.len(), self.settings.window);
        let k_pert = self.settings.k_perturbed.unwrap_or(self.settings.k);
        let _ = writeln!(out, "k: {} original / {} perturbed, seed {}", self.settings.k, k_pert, self.settings.seed);
        let _ = writeln!(out, "misclassification: {:.2} %", a.misclassification_pct);
        let _ = writeln!(out, "precision: original {:.4}, perturbed {:.4}", a.precision_orig, a.precision_pert);
        let _ = writeln!(out, "recall: original {:.4}, perturbed {:.4}", a.recall_orig, a.recall_pert);
        let _ = writeln!(out, "elapsed: {:.3} s", self.timing.total_s);
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmittedFiles {
    pub report_json: PathBuf,
    pub windows_csv: PathBuf,
    pub summary_txt: PathBuf,
}

/// Writes `report.json`, `windows.csv` and `summary.txt` into `dir`.
pub fn emit_report(report: &RunReport, dir: &Path) -> Result<EmittedFiles> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let files = EmittedFiles {
        report_json: dir.join("report.json"),
        windows_csv: dir.join("windows.csv"),
        summary_txt: dir.join("summary.txt"),
    };
    let json = serde_json::to_string_pretty(report).map_err(|e| Error::Config(format!("serializing report: {e}")))?;
    let write = |path: &Path, contents: &str| fs::write(path, contents).map_err(|e| Error::io(path, e));
    write(&files.report_json, &json)?;
    write(&files.windows_csv, &report.windows_csv())?;
    write(&files.summary_txt, &report.summary())?;
    Ok(files)
}
