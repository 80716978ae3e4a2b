//! End-to-end run: perturb the stream, cluster original and perturbed
//! windows with identical parameters, and compare.

use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cluster::{feature_matrix, kmeans_assign, kmeans_fit, window_partition, zscore_columns, KMeansParams, Window};
use crate::error::{Error, Result};
use crate::eval::{
    best_matching, build_cmm, cmm_accuracy, contingency, misclassification, precision_measure, recall_measure,
};
use crate::ingest::DatasetSource;
use crate::perturb::{PerturbationConfig, Perturber, StatsMode};
use crate::report::{Aggregate, RunReport, SourceEcho, Timing, WindowReport};
use crate::scalar::Scalar;
use crate::schema::{Instance, Schema};
use crate::stats::StatsTable;

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "STREAMVEIL_THREADS";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StreamSettings {
    pub sensitive: Vec<String>,
    pub k: usize,
    /// Cluster count for the perturbed stream; defaults to `k`.
    pub k_perturbed: Option<usize>,
    pub window: usize,
    pub seed: u64,
    pub stats_mode: StatsMode,
    pub pre_normalized: Vec<String>,
    pub cluster_on_zscores: bool,
    pub max_iter: usize,
    pub n_init: usize,
    pub tol: f64,
}

impl StreamSettings {
    pub fn new<S: Into<String>>(sensitive: impl IntoIterator<Item = S>) -> Self {
        let km = KMeansParams::default();
        Self {
            sensitive: sensitive.into_iter().map(Into::into).collect(),
            k: km.k,
            k_perturbed: None,
            window: 3000,
            seed: km.seed,
            stats_mode: StatsMode::TwoPass,
            pre_normalized: Vec::new(),
            cluster_on_zscores: false,
            max_iter: km.max_iter,
            n_init: km.n_init,
            tol: km.tol,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.k_perturbed == Some(0) {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if self.window == 0 {
            return Err(Error::Config("window must be at least 1".into()));
        }
        if self.sensitive.is_empty() {
            return Err(Error::Config("at least one sensitive attribute is required".into()));
        }
        if self.max_iter == 0 || self.n_init == 0 {
            return Err(Error::Config("max_iter and n_init must be at least 1".into()));
        }
        if !(self.tol.is_finite() && self.tol >= 0.0) {
            return Err(Error::Config("tol must be non-negative".into()));
        }
        Ok(())
    }

    pub fn perturbation(&self) -> PerturbationConfig {
        PerturbationConfig::new(self.sensitive.iter().cloned())
            .with_mode(self.stats_mode)
            .with_pre_normalized(self.pre_normalized.iter().cloned())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub source: DatasetSource,
    pub limit: Option<usize>,
    pub out_dir: PathBuf,
    pub settings: StreamSettings,
}

impl PipelineConfig {
    pub fn new(source: DatasetSource, settings: StreamSettings) -> Self {
        Self {
            source,
            limit: None,
            out_dir: PathBuf::from("streamveil-report"),
            settings,
        }
    }
}

/// Worker count requested through [`THREADS_ENV`], if any.
pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&n| n > 0)
}

/// Loads the configured source and runs the pipeline over it.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<RunReport> {
    let started = Instant::now();
    let (schema, stream) = cfg
        .source
        .load::<f64>(cfg.limit)
        .map_err(|e| e.in_stage("load"))?;
    let load_s = started.elapsed().as_secs_f64();
    let mut report = run_stream(&schema, &stream, &cfg.settings, threads_from_env())?;
    report.source = Some(SourceEcho {
        path: cfg.source.path.display().to_string(),
        format: cfg.source.format,
        limit: cfg.limit,
    });
    report.timing.load_s = load_s;
    report.timing.total_s += load_s;
    Ok(report)
}

/// Runs the pipeline over an in-memory stream. `threads` of `None` lets the
/// pool size itself.
pub fn run_stream<T: Scalar>(
    schema: &Schema,
    stream: &[Instance<T>],
    settings: &StreamSettings,
    threads: Option<usize>,
) -> Result<RunReport> {
    settings.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| run_in_pool(schema, stream, settings))
}

fn run_in_pool<T: Scalar>(schema: &Schema, stream: &[Instance<T>], settings: &StreamSettings) -> Result<RunReport> {
    let started = Instant::now();
    if stream.is_empty() {
        return Err(Error::Config("empty stream".into()).in_stage("load"));
    }
    for inst in stream {
        schema.validate(inst).map_err(|e| e.in_stage("validate"))?;
    }
    let schema = schema
        .with_sensitive(&settings.sensitive)
        .map_err(|e| Error::Config(e.to_string()).in_stage("perturb"))?;
    let perturber = Perturber::new(&schema, &settings.perturbation()).map_err(|e| e.in_stage("perturb"))?;

    let mut timing = Timing::default();
    let t = Instant::now();
    let mut stats = match settings.stats_mode {
        StatsMode::TwoPass => StatsTable::from_instances(&schema, stream).map_err(|e| e.in_stage("statistics"))?,
        StatsMode::Incremental => StatsTable::new(&schema),
    };
    timing.stats_s = t.elapsed().as_secs_f64();

    let windows = window_partition(stream, settings.window)?;
    // Windows are processed a batch at a time so only one batch of perturbed
    // copies is alive at once.
    let batch = rayon::current_num_threads().max(1);
    let mut per_window = Vec::with_capacity(windows.len());
    for chunk in windows.chunks(batch) {
        let t = Instant::now();
        let perturbed: Vec<Vec<Instance<T>>> = match settings.stats_mode {
            StatsMode::TwoPass => chunk
                .par_iter()
                .map(|w| {
                    w.instances
                        .iter()
                        .map(|i| perturber.perturb_values(i, &stats))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<_>>(),
            StatsMode::Incremental => {
                let mut out = Vec::with_capacity(chunk.len());
                for w in chunk {
                    let mut p = Vec::with_capacity(w.len());
                    for inst in w.instances {
                        stats = stats.update(inst)?;
                        p.push(perturber.perturb_values(inst, &stats)?);
                    }
                    out.push(p);
                }
                Ok(out)
            }
        }
        .map_err(|e| e.in_stage("perturb"))?;
        timing.perturb_s += t.elapsed().as_secs_f64();

        let t = Instant::now();
        let reports = chunk
            .par_iter()
            .zip(perturbed.par_iter())
            .map(|(w, p)| evaluate_window(&schema, w, p, settings).map_err(|e| e.in_stage(format!("window {}", w.index))))
            .collect::<Result<Vec<_>>>()?;
        timing.cluster_eval_s += t.elapsed().as_secs_f64();
        per_window.extend(reports);
    }

    let aggregate = Aggregate::weighted(&per_window);
    timing.total_s = started.elapsed().as_secs_f64();
    Ok(RunReport {
        source: None,
        instances: stream.len(),
        settings: settings.clone(),
        per_window,
        aggregate,
        timing,
    })
}

/// Clusters one original window and its perturbed counterpart and compares
/// them. Windows shorter than `k` are clustered with as many clusters as
/// they have points.
pub fn evaluate_window<T: Scalar>(
    schema: &Schema,
    window: &Window<'_, T>,
    perturbed: &[Instance<T>],
    settings: &StreamSettings,
) -> Result<WindowReport> {
    let n = window.len();
    if perturbed.len() != n {
        return Err(Error::Eval("perturbed window is not aligned with the original".into()));
    }
    let k_orig = settings.k.min(n);
    let k_pert = settings.k_perturbed.unwrap_or(settings.k).min(n);

    let fit = |instances: &[Instance<T>], k: usize| -> Result<_> {
        let mut m = feature_matrix(instances, schema)?;
        if settings.cluster_on_zscores {
            zscore_columns(&mut m)?;
        }
        let params = KMeansParams {
            k,
            seed: settings.seed,
            max_iter: settings.max_iter,
            n_init: settings.n_init,
            tol: settings.tol,
        };
        let model = kmeans_fit(m.view(), &params)?;
        kmeans_assign(m.view(), &model)
    };
    let orig = fit(window.instances, k_orig)?;
    let pert = fit(perturbed, k_pert)?;

    let cmm = build_cmm(&orig, &pert, k_orig, k_pert)?;
    let matching = best_matching(&cmm);
    let accuracy_pct = cmm_accuracy(&cmm, &matching)?;
    let misclassification_pct = misclassification(&cmm, &matching)?;

    let labels: Vec<usize> = window.instances.iter().map(|i| schema.class_of(i)).collect();
    let classes = schema.class_domain().len();
    let ct_orig = contingency(&orig, &labels, k_orig, classes)?;
    let ct_pert = contingency(&pert, &labels, k_pert, classes)?;

    Ok(WindowReport {
        window_index: window.index,
        n,
        precision_orig: precision_measure::<T>(&ct_orig)?.lossy_f64(),
        recall_orig: recall_measure::<T>(&ct_orig)?.lossy_f64(),
        precision_pert: precision_measure::<T>(&ct_pert)?.lossy_f64(),
        recall_pert: recall_measure::<T>(&ct_pert)?.lossy_f64(),
        accuracy_pct,
        misclassification_pct,
        cmm: cmm.freq,
    })
}
