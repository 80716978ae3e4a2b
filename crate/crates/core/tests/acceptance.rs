//! Acceptance suite. Runs every criterion in sequence and prints one
//! PASS / FAIL / NOT RUN line per criterion; exits non-zero on any FAIL.
//!
//! A2 needs the real datasets. Point `STREAMVEIL_COVTYPE` at a Covertype
//! ARFF/CSV (attributes `Elevation`, `Slope`) and `STREAMVEIL_ELEC` at an
//! Electricity ARFF/CSV (attributes `nswprice`, `nswdemand`). Set
//! `STREAMVEIL_REQUIRE_DATASETS=1` to turn a missing dataset into a failure.

use std::alloc::{GlobalAlloc, Layout, System};
use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use streamveil::cluster::{kmeans_fit, kmeans_fit_traced, KMeansParams};
use streamveil::eval::{best_matching, cmm_accuracy, precision_measure, recall_measure, Cmm, ContingencyTable};
use streamveil::ingest::{synth_gaussian_stream, DatasetSource, Format, SynthParams};
use streamveil::perturb::{perturb_instance, perturb_stream, PerturbationConfig, StatsMode};
use streamveil::stats::{RunningStats, StatsTable};
use streamveil::{run_stream, AttributeDescriptor, Instance, RunReport, Schema, StreamSettings, Value};

struct Counting;

static CURRENT: AtomicUsize = AtomicUsize::new(0);
static PEAK: AtomicUsize = AtomicUsize::new(0);

unsafe impl GlobalAlloc for Counting {
    unsafe fn alloc(&self, layout: Layout) -> *mut u8 {
        let p = System.alloc(layout);
        if !p.is_null() {
            let now = CURRENT.fetch_add(layout.size(), Ordering::Relaxed) + layout.size();
            PEAK.fetch_max(now, Ordering::Relaxed);
        }
        p
    }

    unsafe fn dealloc(&self, ptr: *mut u8, layout: Layout) {
        System.dealloc(ptr, layout);
        CURRENT.fetch_sub(layout.size(), Ordering::Relaxed);
    }
}

#[global_allocator]
static ALLOC: Counting = Counting;

enum Outcome {
    Pass(String),
    Fail(String),
    NotRun(String),
}

type Criterion = fn() -> Outcome;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, &str, Criterion); 8] = [
        ("A1", "synthetic fidelity floor", a1_synthetic_fidelity),
        ("A2", "real-dataset accuracy band", a2_dataset_band),
        ("A3", "precision/recall hand oracle", a3_measure_fixtures),
        ("A4", "matching oracle", a4_matching_oracle),
        ("A5", "perturbation algebra", a5_perturbation_algebra),
        ("A6", "statistics correctness", a6_statistics),
        ("A7", "k-means sanity", a7_kmeans),
        ("A8", "throughput and memory gate", a8_throughput),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (id, name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| id.eq_ignore_ascii_case(f)) {
            continue;
        }
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Outcome::Fail(format!("panicked: {msg}"))
        });
        let secs = started.elapsed().as_secs_f64();
        let (tag, detail) = match outcome {
            Outcome::Pass(d) => ("PASS", d),
            Outcome::Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Outcome::NotRun(d) => ("NOT RUN", d),
        };
        println!("{id} {tag:<7} {name} [{secs:.2}s]: {detail}");
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

fn synth(num_clusters: usize, dims: usize, per_cluster: usize, seed: u64) -> (Schema, Vec<Instance<f64>>) {
    synth_gaussian_stream(&SynthParams {
        num_clusters,
        dims,
        per_cluster,
        separation: 10.0,
        spread: 1.0,
        seed,
    })
    .expect("synthetic stream")
}

// A1 -----------------------------------------------------------------------

/// Aggregate accuracy observed once for the fixed configuration below.
const A1_PINNED_ACCURACY: f64 = 100.0;

fn a1_synthetic_fidelity() -> Outcome {
    let started = Instant::now();
    let (schema, stream) = synth(5, 4, 3000, 42);
    let settings = StreamSettings::new(["x0"]);
    let report = run_stream(&schema, &stream, &settings, None).expect("pipeline");
    let secs = started.elapsed().as_secs_f64();
    let a = &report.aggregate;
    let detail = format!(
        "accuracy {:.4}% (pinned {A1_PINNED_ACCURACY}), precision_orig {:.4}, recall_orig {:.4}, {} windows, {secs:.2}s",
        a.accuracy_pct,
        a.precision_orig,
        a.recall_orig,
        report.per_window.len()
    );
    check(
        a.accuracy_pct >= 95.0
            && (a.accuracy_pct - A1_PINNED_ACCURACY).abs() <= 0.5
            && a.precision_orig >= 0.95
            && a.recall_orig >= 0.95
            && secs < 5.0,
        detail,
    )
}

// A2 -----------------------------------------------------------------------

fn dataset(var: &str) -> Option<DatasetSource> {
    let path = PathBuf::from(std::env::var_os(var)?);
    let format = Format::from_path(&path).unwrap_or(Format::Arff);
    Some(DatasetSource::new(path, format))
}

/// Aggregate accuracy with k = 5, and with k = number of classes.
fn accuracy_on(source: &DatasetSource, limit: Option<usize>, attribute: &str) -> Result<(f64, f64), String> {
    let (schema, stream) = source.load::<f64>(limit).map_err(|e| e.to_string())?;
    // Attribute names differ in case between distributions.
    let name = schema
        .attributes()
        .iter()
        .find(|a| a.name.eq_ignore_ascii_case(attribute))
        .map(|a| a.name.clone())
        .ok_or_else(|| format!("{} has no attribute {attribute}", source.path.display()))?;
    let mut settings = StreamSettings::new([name]);
    let five = run_stream(&schema, &stream, &settings, None).map_err(|e| e.to_string())?;
    settings.k = schema.class_domain().len();
    let per_class = run_stream(&schema, &stream, &settings, None).map_err(|e| e.to_string())?;
    Ok((five.aggregate.accuracy_pct, per_class.aggregate.accuracy_pct))
}

fn a2_dataset_band() -> Outcome {
    let require = std::env::var("STREAMVEIL_REQUIRE_DATASETS").is_ok_and(|v| v == "1");
    let (Some(cov), Some(elec)) = (dataset("STREAMVEIL_COVTYPE"), dataset("STREAMVEIL_ELEC")) else {
        let msg = "Covertype/Electricity files not available (set STREAMVEIL_COVTYPE and STREAMVEIL_ELEC); \
                   reference values 98.73% Elevation, 99.16% Slope, 99.97% Nswprice, 74.76% Nswdemand"
            .to_string();
        return if require { Outcome::Fail(msg) } else { Outcome::NotRun(msg) };
    };
    let run = || -> Result<[(f64, f64); 4], String> {
        Ok([
            accuracy_on(&cov, Some(65_000), "Elevation")?,
            accuracy_on(&cov, Some(65_000), "Slope")?,
            accuracy_on(&elec, None, "nswprice")?,
            accuracy_on(&elec, None, "nswdemand")?,
        ])
    };
    match run() {
        Err(e) => Outcome::Fail(e),
        Ok([(elevation, elevation_c), (slope, slope_c), (price, price_c), (demand, demand_c)]) => {
            let in_band = (elevation - 98.73).abs() <= 10.0 && (slope - 99.16).abs() <= 10.0;
            // "Materially higher": at least 5 points above the hard case.
            let ordered = [elevation, slope, price].iter().all(|&a| a >= demand + 5.0);
            check(
                in_band && ordered,
                format!(
                    "Elevation {elevation:.2}% (98.73), Slope {slope:.2}% (99.16), nswprice {price:.2}% (99.97), \
                     nswdemand {demand:.2}% (74.76); band {in_band}, ordering {ordered}; with k = class count: \
                     {elevation_c:.2}/{slope_c:.2}/{price_c:.2}/{demand_c:.2}%"
                ),
            )
        }
    }
}

// A3 -----------------------------------------------------------------------

fn a3_measure_fixtures() -> Outcome {
    let fixtures: [(Vec<Vec<u64>>, f64, f64); 3] = [
        (vec![vec![10, 0], vec![0, 10]], 1.0, 1.0),
        (vec![vec![5, 5], vec![5, 5]], 0.5, 0.5),
        (vec![vec![10, 0], vec![0, 0]], 1.0, 1.0),
    ];
    let mut lines = Vec::new();
    let mut ok = true;
    for (rows, p, r) in fixtures {
        let ct = ContingencyTable::from_rows(rows.clone());
        let got_p: f64 = precision_measure(&ct).unwrap();
        let got_r: f64 = recall_measure(&ct).unwrap();
        ok &= got_p == p && got_r == r;
        lines.push(format!("{rows:?} -> {got_p}/{got_r}"));
    }
    check(ok, lines.join("; "))
}

// A4 -----------------------------------------------------------------------

fn exhaustive_best(freq: &[Vec<u64>]) -> u64 {
    let k = freq.len();
    let mut perm: Vec<usize> = (0..k).collect();
    let mut best = 0;
    // Heap's algorithm over all k! column orders.
    let mut c = vec![0usize; k];
    let score = |p: &[usize]| (0..k).map(|i| freq[i][p[i]]).sum::<u64>();
    best = best.max(score(&perm));
    let mut i = 0;
    while i < k {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            best = best.max(score(&perm));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    best
}

fn a4_matching_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for case in 0..200 {
        let k = rng.gen_range(2..=6);
        let freq: Vec<Vec<u64>> = (0..k).map(|_| (0..k).map(|_| rng.gen_range(0..=20)).collect()).collect();
        let cmm = Cmm::from_rows(freq.clone());
        let m = best_matching(&cmm);
        let oracle = exhaustive_best(&freq);
        if m.matched_count != oracle {
            return Outcome::Fail(format!("case {case}: matching {} vs exhaustive {oracle}", m.matched_count));
        }
        if cmm.total() == 0 {
            continue;
        }
        let acc = cmm_accuracy(&cmm, &m).unwrap();
        let mut cols: Vec<usize> = (0..k).collect();
        cols.shuffle(&mut rng);
        let permuted = Cmm::from_rows(freq.iter().map(|r| cols.iter().map(|&j| r[j]).collect()).collect());
        let acc_p = cmm_accuracy(&permuted, &best_matching(&permuted)).unwrap();
        if acc != acc_p {
            return Outcome::Fail(format!("case {case}: accuracy {acc} changed to {acc_p} under column permutation"));
        }
    }
    Outcome::Pass("200 random CMMs (k 2..6) agree exactly with exhaustive search; accuracy column-permutation invariant".into())
}

// A5 -----------------------------------------------------------------------

fn random_schema(rng: &mut ChaCha8Rng) -> Schema {
    let numeric = rng.gen_range(2..=8);
    let mut attrs: Vec<AttributeDescriptor> =
        (0..numeric).map(|i| AttributeDescriptor::numeric(format!("n{i}"))).collect();
    if rng.gen_bool(0.5) {
        let at = rng.gen_range(0..=attrs.len());
        attrs.insert(at, AttributeDescriptor::nominal("tag", ["a", "b", "c"]));
    }
    attrs.push(AttributeDescriptor::class("class", ["p", "q"]));
    Schema::new(attrs).unwrap()
}

fn random_instance(rng: &mut ChaCha8Rng, schema: &Schema, seq: u64) -> Instance<f64> {
    let values = schema
        .attributes()
        .iter()
        .map(|a| {
            if a.is_numeric() {
                let scale = 10f64.powf(rng.gen_range(-2.0..4.0));
                Value::Numeric(rng.gen_range(-scale..scale))
            } else {
                Value::Nominal(rng.gen_range(0..a.domain.len() as u32))
            }
        })
        .collect();
    Instance::new(seq, values)
}

fn a5_perturbation_algebra() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for case in 0..1000u64 {
        let schema = random_schema(&mut rng);
        let background: Vec<_> = (0..20).map(|i| random_instance(&mut rng, &schema, i)).collect();
        let stats = StatsTable::from_instances(&schema, &background).unwrap();
        let inst = random_instance(&mut rng, &schema, case);
        let numeric = schema.numeric_indices();
        let count = rng.gen_range(1..=numeric.len().min(3));
        let sensitive: BTreeSet<String> = numeric
            .choose_multiple(&mut rng, count)
            .map(|&i| schema.attributes()[i].name.clone())
            .collect();
        let cfg = PerturbationConfig::new(sensitive.iter().cloned());
        let (out, rec) = perturb_instance(&inst, &schema, &stats, &cfg).unwrap();
        for (i, (a, (orig, pert))) in schema.attributes().iter().zip(inst.values.iter().zip(&out.values)).enumerate() {
            let bits = |v: &Value<f64>| match v {
                Value::Numeric(x) => x.to_bits(),
                Value::Nominal(t) => *t as u64,
            };
            if sensitive.contains(&a.name) {
                let (Value::Numeric(x), Value::Numeric(y)) = (orig, pert) else {
                    return Outcome::Fail(format!("case {case}: sensitive column {i} not numeric"));
                };
                if y.to_bits() != (rec.tuple_value * x).to_bits() || rec.perturbed[&a.name].to_bits() != y.to_bits() {
                    return Outcome::Fail(format!("case {case}: {y} != {} * {x}", rec.tuple_value));
                }
            } else if bits(orig) != bits(pert) || std::mem::discriminant(orig) != std::mem::discriminant(pert) {
                return Outcome::Fail(format!("case {case}: non-sensitive column {i} changed"));
            }
        }
    }

    let mut worst: f64 = 0.0;
    for trial in 0..20u64 {
        let schema = random_schema(&mut rng);
        let stream: Vec<_> = (0..rng.gen_range(50..500)).map(|i| random_instance(&mut rng, &schema, i)).collect();
        let name = schema.attributes()[schema.numeric_indices()[0]].name.clone();
        let cfg = PerturbationConfig::new([name]).with_mode(StatsMode::TwoPass);
        let (_, records) = perturb_stream(&stream, &schema, &cfg).unwrap();
        let mean = records.iter().map(|r| r.tuple_value).sum::<f64>() / records.len() as f64;
        worst = worst.max(mean.abs());
        if mean.abs() > 1e-9 {
            return Outcome::Fail(format!("stream {trial}: mean tuple value {mean:e}"));
        }
    }
    Outcome::Pass(format!(
        "1000 instances exact (bitwise) products, non-sensitive columns bit-identical; max |mean tuple value| {worst:.1e}"
    ))
}

// A6 -----------------------------------------------------------------------

fn a6_statistics() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for case in 0..100 {
        let n = rng.gen_range(1..=10_000);
        let magnitude = 10f64.powf(rng.gen_range(0.0..6.0));
        let center = rng.gen_range(-magnitude..magnitude);
        let xs: Vec<f64> = (0..n).map(|_| center + rng.gen_range(-magnitude..magnitude)).collect();

        // Oracle: two-pass batch mean and sample standard deviation.
        let mean = xs.iter().sum::<f64>() / n as f64;
        let sd = if n < 2 {
            0.0
        } else {
            (xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
        };
        // Relative to the data scale, so near-zero means are judged sensibly.
        let scale = mean.abs().max(sd).max(f64::MIN_POSITIVE);
        let rel = |got: f64, want: f64, s: f64| (got - want).abs() / s;

        let folded = RunningStats::from_slice(&xs).unwrap();
        let mut merged = RunningStats::new();
        for chunk in xs.chunks(rng.gen_range(1..=n)) {
            merged = merged.merge(RunningStats::from_slice(chunk).unwrap());
        }
        for (label, s) in [("fold", folded), ("merge", merged)] {
            let e_mean = rel(s.mean(), mean, scale);
            let e_sd = if sd > 0.0 { rel(s.stddev(), sd, sd) } else { s.stddev() };
            worst = worst.max(e_mean).max(e_sd);
            if s.count() != n as u64 || e_mean > 1e-9 || e_sd > 1e-9 {
                return Outcome::Fail(format!("case {case} ({label}, n={n}): mean err {e_mean:e}, sd err {e_sd:e}"));
            }
        }
    }
    Outcome::Pass(format!("100 sequences (n <= 10000, |x| <= 2e6): worst relative error {worst:.1e}"))
}

// A7 -----------------------------------------------------------------------

fn random_points(rng: &mut ChaCha8Rng, n: usize, dims: usize) -> Array2<f64> {
    Array2::from_shape_fn((n, dims), |_| rng.gen_range(0.0..10.0))
}

/// Minimal SSE over every assignment of points to at most `k` groups.
fn brute_force_sse(points: &Array2<f64>, k: usize) -> f64 {
    let n = points.nrows();
    let dims = points.ncols();
    let mut labels = vec![0usize; n];
    let mut best = f64::INFINITY;
    loop {
        let mut sse = 0.0;
        for c in 0..k {
            let members: Vec<usize> = (0..n).filter(|&i| labels[i] == c).collect();
            if members.is_empty() {
                continue;
            }
            for d in 0..dims {
                let m = members.iter().map(|&i| points[[i, d]]).sum::<f64>() / members.len() as f64;
                sse += members.iter().map(|&i| (points[[i, d]] - m).powi(2)).sum::<f64>();
            }
        }
        best = best.min(sse);
        // Next labeling in base-k counting order.
        let mut pos = 0;
        while pos < n {
            labels[pos] += 1;
            if labels[pos] < k {
                break;
            }
            labels[pos] = 0;
            pos += 1;
        }
        if pos == n {
            return best;
        }
    }
}

fn a7_kmeans() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..50 {
        let n = rng.gen_range(20..500);
        let dims = rng.gen_range(1..=6);
        let k = rng.gen_range(2..=8);
        let pts = random_points(&mut rng, n, dims);
        let params = KMeansParams { k, seed: case, ..KMeansParams::default() };
        let (_, trace) = kmeans_fit_traced(pts.view(), &params).unwrap();
        if let Some(w) = trace.windows(2).find(|w| w[1] > w[0] * (1.0 + 1e-12)) {
            return Outcome::Fail(format!("case {case}: SSE rose from {} to {}", w[0], w[1]));
        }
    }

    let mut matched = 0;
    for seed in 0..100u64 {
        let mut inst_rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let k = inst_rng.gen_range(1..=3);
        let n = inst_rng.gen_range(k.max(3)..=10);
        let pts = random_points(&mut inst_rng, n, 2);
        let optimum = brute_force_sse(&pts, k);
        let model = kmeans_fit(pts.view(), &KMeansParams { k, seed, ..KMeansParams::default() }).unwrap();
        let slack = 1e-9 * optimum.max(1.0);
        if model.sse < optimum - slack {
            return Outcome::Fail(format!("seed {seed}: SSE {} beat the optimum {optimum}", model.sse));
        }
        if model.sse <= optimum + slack {
            matched += 1;
        }
    }
    if matched < 90 {
        return Outcome::Fail(format!("brute-force optimum matched in {matched}/100 seeds"));
    }

    let (schema, stream) = synth(5, 4, 600, 77);
    let mut settings = StreamSettings::new(["x1"]);
    settings.window = 700;
    let runs: Vec<RunReport> = [Some(1), Some(1), Some(2), Some(4), None]
        .into_iter()
        .map(|t| run_stream(&schema, &stream, &settings, t).unwrap().without_timing())
        .collect();
    if runs.windows(2).any(|w| w[0] != w[1]) {
        return Outcome::Fail("reports differ across repeated runs / thread counts".into());
    }
    Outcome::Pass(format!(
        "SSE monotone on 50 instances; optimum matched {matched}/100, never beaten; identical reports for 1/1/2/4/auto threads"
    ))
}

// A8 -----------------------------------------------------------------------

fn peak_extra(schema: &Schema, stream: &[Instance<f64>], settings: &StreamSettings, threads: usize) -> (usize, f64) {
    let base = CURRENT.load(Ordering::SeqCst);
    PEAK.store(base, Ordering::SeqCst);
    let started = Instant::now();
    let report = run_stream(schema, stream, settings, Some(threads)).unwrap();
    let secs = started.elapsed().as_secs_f64();
    let peak = PEAK.load(Ordering::SeqCst);
    drop(report);
    (peak.saturating_sub(base), secs)
}

fn a8_throughput() -> Outcome {
    // 5 blobs x 13,000 = 65,000 instances, 10 numeric features.
    let (schema, stream) = synth(5, 10, 13_000, 8);
    let settings = StreamSettings::new(["x0"]);

    let started = Instant::now();
    let report = run_stream(&schema, &stream, &settings, None).unwrap();
    let secs = started.elapsed().as_secs_f64();
    if report.per_window.len() != 22 {
        return Outcome::Fail(format!("expected 22 windows, got {}", report.per_window.len()));
    }
    drop(report);

    let threads = 2;
    let (small, _) = peak_extra(&schema, &stream, &settings, threads);
    let (_, double) = synth(5, 10, 26_000, 8);
    let (large, _) = peak_extra(&schema, &double, &settings, threads);

    let input_bytes = stream.len() * (std::mem::size_of::<Instance<f64>>() + 11 * std::mem::size_of::<Value<f64>>());
    // One batch of `threads` windows: perturbed copies plus two feature
    // matrices each, with generous headroom for model state.
    let per_window = settings.window * (std::mem::size_of::<Instance<f64>>() + 11 * std::mem::size_of::<Value<f64>>() + 2 * 10 * 8);
    let bound = 4 * threads * per_window;
    let detail = format!(
        "65k x 10 in {secs:.2}s; peak working set {:.1} MiB at 65k, {:.1} MiB at 130k (input {:.1} MiB, bound {:.1} MiB)",
        small as f64 / 1048576.0,
        large as f64 / 1048576.0,
        input_bytes as f64 / 1048576.0,
        bound as f64 / 1048576.0
    );
    check(secs < 10.0 && small <= bound && large <= bound, detail)
}
