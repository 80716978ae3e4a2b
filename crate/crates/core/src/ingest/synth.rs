//! Labeled Gaussian blob streams.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::schema::{AttributeDescriptor, Instance, Schema, Value};

const PLACEMENT_ATTEMPTS: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SynthParams {
    pub num_clusters: usize,
    pub dims: usize,
    pub per_cluster: usize,
    /// Minimum Euclidean distance between any two blob centers.
    pub separation: f64,
    /// Per-coordinate standard deviation of every blob.
    pub spread: f64,
    pub seed: u64,
}

/// Draws `n` centers uniformly in `[0, side]^dims`, each at least
/// `separation` from all earlier ones, retrying each center a bounded number
/// of times.
pub fn place_centers<R: Rng>(
    n: usize,
    dims: usize,
    separation: f64,
    side: f64,
    rng: &mut R,
    attempts: usize,
) -> Result<Vec<Vec<f64>>> {
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(n);
    'next: for _ in 0..n {
        for _ in 0..attempts {
            let c: Vec<f64> = (0..dims).map(|_| rng.gen::<f64>() * side).collect();
            let far_enough = centers.iter().all(|o| {
                o.iter().zip(&c).map(|(a, b)| (a - b).powi(2)).sum::<f64>() >= separation * separation
            });
            if far_enough {
                centers.push(c);
                continue 'next;
            }
        }
        return Err(Error::Config(format!(
            "could not place {n} centers {separation} apart in a cube of side {side}"
        )));
    }
    Ok(centers)
}

fn draw_centers(p: &SynthParams, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<f64>>> {
    let per_axis = (p.num_clusters as f64).powf(1.0 / p.dims as f64).ceil();
    let side = 2.0 * p.separation * per_axis;
    place_centers(p.num_clusters, p.dims, p.separation, side, rng, PLACEMENT_ATTEMPTS)
}

/// The blob centers [`synth_gaussian_stream`] generates for `p`.
pub fn synth_centers(p: &SynthParams) -> Result<Vec<Vec<f64>>> {
    draw_centers(p, &mut ChaCha8Rng::seed_from_u64(p.seed))
}

/// Isotropic Gaussian blobs interleaved round-robin; the class label of each
/// instance is its blob id (`c0`, `c1`, ...).
pub fn synth_gaussian_stream<T: Scalar>(p: &SynthParams) -> Result<(Schema, Vec<Instance<T>>)> {
    if p.num_clusters == 0 || p.dims == 0 || p.per_cluster == 0 {
        return Err(Error::Config("cluster count, dims and per-cluster size must be positive".into()));
    }
    if !(p.separation > 0.0 && p.separation.is_finite()) || !(p.spread > 0.0 && p.spread.is_finite()) {
        return Err(Error::Config("separation and spread must be positive and finite".into()));
    }
    let mut attrs: Vec<AttributeDescriptor> = (0..p.dims).map(|d| AttributeDescriptor::numeric(format!("x{d}"))).collect();
    attrs.push(AttributeDescriptor::class(
        "class",
        (0..p.num_clusters).map(|c| format!("c{c}")),
    ));
    let schema = Schema::new(attrs)?;

    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let centers = draw_centers(p, &mut rng)?;
    let noise = Normal::new(0.0, p.spread).map_err(|e| Error::Config(e.to_string()))?;

    let mut out = Vec::with_capacity(p.num_clusters * p.per_cluster);
    for _ in 0..p.per_cluster {
        for (c, center) in centers.iter().enumerate() {
            let mut values: Vec<Value<T>> = center
                .iter()
                .map(|&m| Value::Numeric(T::from_f64(m + noise.sample(&mut rng)).unwrap()))
                .collect();
            values.push(Value::Nominal(c as u32));
            out.push(Instance::new(out.len() as u64, values));
        }
    }
    Ok((schema, out))
}
