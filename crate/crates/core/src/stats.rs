//! Online per-attribute statistics and z-score normalization.
//!
//! [`RunningStats`] keeps a count, running mean and running sum of squared
//! deviations (Welford recurrence), so mean and sample standard deviation stay
//! accurate for long streams with large magnitudes. Values are immutable
//! snapshots: every update returns a new value.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::schema::{Instance, Schema};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunningStats<T> {
    n: u64,
    mean: T,
    ssd: T,
}

impl<T: Scalar> Default for RunningStats<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> RunningStats<T> {
    pub fn new() -> Self {
        Self {
            n: 0,
            mean: T::zero(),
            ssd: T::zero(),
        }
    }

    /// Folds `xs` into empty statistics.
    pub fn from_slice(xs: &[T]) -> Result<Self> {
        xs.iter().try_fold(Self::new(), |s, &x| s.update(x))
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> T {
        self.mean
    }

    /// Sum of squared deviations from the mean.
    pub fn ssd(&self) -> T {
        self.ssd
    }

    /// Sample variance (n - 1 denominator); zero below two observations.
    pub fn variance(&self) -> T {
        if self.n < 2 {
            return T::zero();
        }
        self.ssd / T::from_u64(self.n - 1).unwrap()
    }

    pub fn stddev(&self) -> T {
        self.variance().sqrt()
    }

    pub fn update(self, x: T) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::NonFinite(x.lossy_f64()));
        }
        let n = self.n + 1;
        let delta = x - self.mean;
        let mean = self.mean + delta / T::from_u64(n).unwrap();
        let ssd = self.ssd + delta * (x - mean);
        Ok(Self {
            n,
            mean,
            ssd: ssd.max(T::zero()),
        })
    }

    /// Combines statistics of two disjoint observation sets.
    pub fn merge(self, other: Self) -> Self {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let (na, nb, nt) = (
            T::from_u64(self.n).unwrap(),
            T::from_u64(other.n).unwrap(),
            T::from_u64(n).unwrap(),
        );
        let delta = other.mean - self.mean;
        // Weighted form is symmetric in (self, other).
        let mean = (na * self.mean + nb * other.mean) / nt;
        let ssd = self.ssd + other.ssd + delta * delta * na * nb / nt;
        Self { n, mean, ssd }
    }
}

/// Z-score of `x` against `stats`; 0 when the standard deviation is zero or
/// fewer than two observations were seen.
pub fn zscore<T: Scalar>(x: T, stats: &RunningStats<T>) -> Result<T> {
    if stats.count() == 0 {
        return Err(Error::EmptyStats);
    }
    let sd = stats.stddev();
    if sd <= T::zero() {
        return Ok(T::zero());
    }
    Ok((x - stats.mean()) / sd)
}

/// Running statistics for every numeric-feature attribute of a schema, keyed
/// by attribute position.
#[derive(Clone, Debug, PartialEq)]
pub struct StatsTable<T> {
    entries: Vec<(usize, RunningStats<T>)>,
}

impl<T: Scalar> StatsTable<T> {
    pub fn new(schema: &Schema) -> Self {
        Self {
            entries: schema
                .numeric_indices()
                .iter()
                .map(|&i| (i, RunningStats::new()))
                .collect(),
        }
    }

    /// Statistics over a whole batch.
    pub fn from_instances<'a, I>(schema: &Schema, instances: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a Instance<T>>,
    {
        let mut table = Self::new(schema);
        for inst in instances {
            table = table.update(inst)?;
        }
        Ok(table)
    }

    pub fn get(&self, attr: usize) -> Option<&RunningStats<T>> {
        self.entries
            .iter()
            .find(|(i, _)| *i == attr)
            .map(|(_, s)| s)
    }

    pub fn get_by_name(&self, schema: &Schema, name: &str) -> Option<&RunningStats<T>> {
        schema.index_of(name).and_then(|i| self.get(i))
    }

    pub fn entries(&self) -> &[(usize, RunningStats<T>)] {
        &self.entries
    }

    /// Folds the numeric values of `inst` into the table.
    pub fn update(mut self, inst: &Instance<T>) -> Result<Self> {
        for (attr, stats) in &mut self.entries {
            let x = inst.numeric(*attr).ok_or_else(|| Error::Instance {
                seq: inst.seq,
                message: format!("attribute {attr} is not numeric"),
            })?;
            *stats = stats.update(x).map_err(|e| Error::Instance {
                seq: inst.seq,
                message: e.to_string(),
            })?;
        }
        Ok(self)
    }

    pub fn merge(&self, other: &Self) -> Result<Self> {
        if self.entries.len() != other.entries.len()
            || self.entries.iter().zip(&other.entries).any(|(a, b)| a.0 != b.0)
        {
            return Err(Error::Config("merging statistics of different schemas".into()));
        }
        Ok(Self {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| (a.0, a.1.merge(b.1)))
                .collect(),
        })
    }
}
