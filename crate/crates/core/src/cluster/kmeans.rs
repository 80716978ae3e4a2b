//! Lloyd's k-means with seeded greedy k-means++ initialization.

use ndarray::{Array2, ArrayView1, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const N_INIT: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KMeansParams {
    pub k: usize,
    pub seed: u64,
    pub max_iter: usize,
    /// Independent k-means++ initializations; the lowest-SSE run is kept.
    pub n_init: usize,
    /// Stop once no centroid moves farther than this (Euclidean).
    pub tol: f64,
}

impl Default for KMeansParams {
    fn default() -> Self {
        Self {
            k: 5,
            seed: 42,
            max_iter: 100,
            n_init: N_INIT,
            tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct KMeansModel<T> {
    pub k: usize,
    pub centroids: Array2<T>,
    pub seed: u64,
    pub iterations: usize,
    pub sse: T,
}

/// Cluster id per point, aligned with the input rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assignment {
    pub cluster_ids: Vec<usize>,
}

impl Assignment {
    pub fn len(&self) -> usize {
        self.cluster_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cluster_ids.is_empty()
    }
}

pub fn kmeans_fit<T: Scalar>(points: ArrayView2<'_, T>, params: &KMeansParams) -> Result<KMeansModel<T>> {
    kmeans_fit_traced(points, params).map(|(model, _)| model)
}

/// Fits a model and also returns the SSE observed after every assignment
/// step of the kept run, ending with the SSE of the returned model.
pub fn kmeans_fit_traced<T: Scalar>(
    points: ArrayView2<'_, T>,
    params: &KMeansParams,
) -> Result<(KMeansModel<T>, Vec<T>)> {
    let (n, dims) = points.dim();
    let k = params.k;
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    if params.max_iter == 0 {
        return Err(Error::Config("max_iter must be at least 1".into()));
    }
    if !(params.tol.is_finite() && params.tol >= 0.0) {
        return Err(Error::Config("tol must be non-negative".into()));
    }
    if n < k {
        return Err(Error::Cluster(format!("{n} points cannot form {k} clusters")));
    }
    if dims == 0 {
        return Err(Error::Cluster("points have no dimensions".into()));
    }
    if let Some(x) = points.iter().find(|x| !x.is_finite()) {
        return Err(Error::NonFinite(x.lossy_f64()));
    }
    if params.n_init == 0 {
        return Err(Error::Config("n_init must be at least 1".into()));
    }
    let tol = T::from_f64(params.tol).unwrap();

    // One generator drives every restart in sequence.
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut best: Option<(KMeansModel<T>, Vec<T>)> = None;
    for _ in 0..params.n_init {
        let run = lloyd(points, params, tol, &mut rng);
        if best.as_ref().is_none_or(|b| run.0.sse < b.0.sse) {
            best = Some(run);
        }
    }
    Ok(best.expect("n_init >= 1"))
}

fn lloyd<T: Scalar>(
    points: ArrayView2<'_, T>,
    params: &KMeansParams,
    tol: T,
    rng: &mut ChaCha8Rng,
) -> (KMeansModel<T>, Vec<T>) {
    let (n, dims) = points.dim();
    let k = params.k;
    let mut centroids = plus_plus(points, k, rng);
    let mut labels = vec![0usize; n];
    let mut dists = vec![T::zero(); n];
    let mut trace = Vec::new();
    let mut iterations = 0;

    while iterations < params.max_iter {
        trace.push(assign_into(points, centroids.view(), &mut labels, &mut dists));
        iterations += 1;

        let mut next = Array2::<T>::zeros((k, dims));
        let mut counts = vec![0usize; k];
        for (row, &c) in points.rows().into_iter().zip(&labels) {
            counts[c] += 1;
            let mut acc = next.row_mut(c);
            acc.zip_mut_with(&row, |a, &x| *a += x);
        }
        for (mut row, &count) in next.rows_mut().into_iter().zip(&counts) {
            if count > 0 {
                let denom = T::from_count(count);
                row.mapv_inplace(|v| v / denom);
            }
        }
        reseed_empty(points, &mut next, &counts, &dists);

        let shift = next
            .rows()
            .into_iter()
            .zip(centroids.rows())
            .map(|(a, b)| squared_distance(a, b))
            .fold(T::zero(), T::max)
            .sqrt();
        centroids = next;
        if shift <= tol {
            break;
        }
    }

    let sse = assign_into(points, centroids.view(), &mut labels, &mut dists);
    trace.push(sse);
    (
        KMeansModel {
            k,
            centroids,
            seed: params.seed,
            iterations,
            sse,
        },
        trace,
    )
}


/// Maps each point to its nearest centroid; ties go to the lowest index.
pub fn kmeans_assign<T: Scalar>(points: ArrayView2<'_, T>, model: &KMeansModel<T>) -> Result<Assignment> {
    if points.ncols() != model.centroids.ncols() {
        return Err(Error::Cluster(format!(
            "points have {} columns, centroids have {}",
            points.ncols(),
            model.centroids.ncols()
        )));
    }
    let mut labels = vec![0; points.nrows()];
    let mut dists = vec![T::zero(); points.nrows()];
    assign_into(points, model.centroids.view(), &mut labels, &mut dists);
    Ok(Assignment { cluster_ids: labels })
}

fn squared_distance<T: Scalar>(a: ArrayView1<'_, T>, b: ArrayView1<'_, T>) -> T {
    a.iter().zip(b.iter()).fold(T::zero(), |acc, (&x, &y)| {
        let d = x - y;
        acc + d * d
    })
}

fn nearest<T: Scalar>(point: ArrayView1<'_, T>, centroids: ArrayView2<'_, T>) -> (usize, T) {
    let mut best = (0, T::infinity());
    for (j, c) in centroids.rows().into_iter().enumerate() {
        let d = squared_distance(point, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn assign_into<T: Scalar>(points: ArrayView2<'_, T>, centroids: ArrayView2<'_, T>, labels: &mut [usize], dists: &mut [T]) -> T {
    let mut sse = T::zero();
    for (i, row) in points.rows().into_iter().enumerate() {
        let (j, d) = nearest(row, centroids);
        labels[i] = j;
        dists[i] = d;
        sse += d;
    }
    sse
}

/// Moves every empty cluster's centroid onto the point currently farthest
/// from its own centroid, using distinct points for distinct clusters.
fn reseed_empty<T: Scalar>(points: ArrayView2<'_, T>, centroids: &mut Array2<T>, counts: &[usize], dists: &[T]) {
    let empty: Vec<usize> = (0..counts.len()).filter(|&c| counts[c] == 0).collect();
    if empty.is_empty() {
        return;
    }
    let mut order: Vec<usize> = (0..dists.len()).collect();
    // Stable: equal distances keep ascending point index.
    order.sort_by(|&a, &b| dists[b].partial_cmp(&dists[a]).unwrap());
    for (&c, &p) in empty.iter().zip(&order) {
        centroids.row_mut(c).assign(&points.row(p));
    }
}

/// Greedy k-means++: each new center is the best (lowest potential) of a few
/// D²-sampled candidates.
fn plus_plus<T: Scalar>(points: ArrayView2<'_, T>, k: usize, rng: &mut ChaCha8Rng) -> Array2<T> {
    let n = points.nrows();
    let trials = 2 + (k as f64).ln().floor() as usize;
    let mut centers = Array2::zeros((k, points.ncols()));
    let first = rng.gen_range(0..n);
    centers.row_mut(0).assign(&points.row(first));
    let mut closest: Vec<f64> = points
        .rows()
        .into_iter()
        .map(|r| squared_distance(r, points.row(first)).lossy_f64())
        .collect();

    for c in 1..k {
        let potential: f64 = closest.iter().sum();
        if potential <= 0.0 {
            let idx = rng.gen_range(0..n);
            centers.row_mut(c).assign(&points.row(idx));
            continue;
        }
        let mut best: Option<(usize, f64, Vec<f64>)> = None;
        for _ in 0..trials {
            let target = rng.gen::<f64>() * potential;
            let candidate = sample_index(&closest, target);
            let updated: Vec<f64> = points
                .rows()
                .into_iter()
                .zip(&closest)
                .map(|(r, &d)| d.min(squared_distance(r, points.row(candidate)).lossy_f64()))
                .collect();
            let pot: f64 = updated.iter().sum();
            if best.as_ref().is_none_or(|b| pot < b.1) {
                best = Some((candidate, pot, updated));
            }
        }
        let (idx, _, updated) = best.expect("at least two trials");
        centers.row_mut(c).assign(&points.row(idx));
        closest = updated;
    }
    centers
}

fn sample_index(weights: &[f64], target: f64) -> usize {
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            last_positive = i;
            acc += w;
            if acc > target {
                return i;
            }
        }
    }
    last_positive
}
