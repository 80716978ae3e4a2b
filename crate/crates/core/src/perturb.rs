//! Tuple-value multiplicative perturbation of sensitive attributes.
//!
//! Each instance gets a tuple value: the mean of the z-scores of all its
//! numeric features (class and nominal columns excluded; attributes declared
//! pre-normalized contribute their raw value). Every sensitive attribute is
//! then replaced by `tuple_value * original`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::schema::{Instance, Schema, Value};
use crate::stats::{zscore, StatsTable};

/// Where Mean/Stddev come from when normalizing an instance.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StatsMode {
    /// Statistics frozen over the whole stream before perturbing.
    #[default]
    TwoPass,
    /// Statistics updated with each instance, before it is perturbed.
    Incremental,
}

impl std::str::FromStr for StatsMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two-pass" => Ok(StatsMode::TwoPass),
            "incremental" => Ok(StatsMode::Incremental),
            other => Err(Error::Config(format!("unknown stats mode `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerturbationConfig {
    pub sensitive: BTreeSet<String>,
    #[serde(default)]
    pub stats_mode: StatsMode,
    #[serde(default)]
    pub pre_normalized: BTreeSet<String>,
}

impl PerturbationConfig {
    pub fn new<S: Into<String>>(sensitive: impl IntoIterator<Item = S>) -> Self {
        Self {
            sensitive: sensitive.into_iter().map(Into::into).collect(),
            stats_mode: StatsMode::default(),
            pre_normalized: BTreeSet::new(),
        }
    }

    pub fn with_mode(mut self, mode: StatsMode) -> Self {
        self.stats_mode = mode;
        self
    }

    pub fn with_pre_normalized<S: Into<String>>(mut self, names: impl IntoIterator<Item = S>) -> Self {
        self.pre_normalized = names.into_iter().map(Into::into).collect();
        self
    }
}

/// Record of how one instance was perturbed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TupleValueRecord<T> {
    pub seq: u64,
    pub tuple_value: T,
    pub original: BTreeMap<String, T>,
    pub perturbed: BTreeMap<String, T>,
}

/// A [`PerturbationConfig`] resolved against a schema.
#[derive(Clone, Debug)]
pub struct Perturber<'s> {
    schema: &'s Schema,
    sensitive: Vec<usize>,
    // Parallel to schema.numeric_indices().
    pre_normalized: Vec<bool>,
}

impl<'s> Perturber<'s> {
    pub fn new(schema: &'s Schema, cfg: &PerturbationConfig) -> Result<Self> {
        if cfg.sensitive.is_empty() {
            return Err(Error::Config("no sensitive attribute given".into()));
        }
        let numeric_attr = |name: &str, what: &str| -> Result<usize> {
            match schema.index_of(name) {
                Some(i) if schema.attributes()[i].is_numeric() => Ok(i),
                Some(_) => Err(Error::Config(format!("{what} attribute `{name}` is not a numeric feature"))),
                None => Err(Error::Config(format!("{what} attribute `{name}` not in schema"))),
            }
        };
        let sensitive = cfg
            .sensitive
            .iter()
            .map(|n| numeric_attr(n, "sensitive"))
            .collect::<Result<Vec<_>>>()?;
        let pre: Vec<usize> = cfg
            .pre_normalized
            .iter()
            .map(|n| numeric_attr(n, "pre-normalized"))
            .collect::<Result<_>>()?;
        let pre_normalized = schema
            .numeric_indices()
            .iter()
            .map(|i| pre.contains(i))
            .collect();
        Ok(Self {
            schema,
            sensitive,
            pre_normalized,
        })
    }

    pub fn schema(&self) -> &Schema {
        self.schema
    }

    pub fn sensitive_indices(&self) -> &[usize] {
        &self.sensitive
    }

    pub fn tuple_value<T: Scalar>(&self, inst: &Instance<T>, stats: &StatsTable<T>) -> Result<T> {
        let numeric = self.schema.numeric_indices();
        if numeric.is_empty() {
            return Err(Error::Schema("no numeric attribute contributes to the tuple value".into()));
        }
        let mut sum = T::zero();
        for (&attr, &pre) in numeric.iter().zip(&self.pre_normalized) {
            let x = inst.numeric(attr).ok_or_else(|| Error::Instance {
                seq: inst.seq,
                message: format!("attribute `{}` is not numeric", self.schema.attributes()[attr].name),
            })?;
            if pre {
                sum += x;
                continue;
            }
            let s = stats.get(attr).ok_or_else(|| {
                Error::Config(format!(
                    "no statistics for attribute `{}`",
                    self.schema.attributes()[attr].name
                ))
            })?;
            sum += zscore(x, s)?;
        }
        Ok(sum / T::from_count(numeric.len()))
    }

    pub fn perturb<T: Scalar>(
        &self,
        inst: &Instance<T>,
        stats: &StatsTable<T>,
    ) -> Result<(Instance<T>, TupleValueRecord<T>)> {
        let tv = self.tuple_value(inst, stats)?;
        let mut out = inst.clone();
        let mut original = BTreeMap::new();
        let mut perturbed = BTreeMap::new();
        for &attr in &self.sensitive {
            let x = inst.numeric(attr).expect("sensitive attributes are numeric");
            let y = tv * x;
            out.values[attr] = Value::Numeric(y);
            let name = &self.schema.attributes()[attr].name;
            original.insert(name.clone(), x);
            perturbed.insert(name.clone(), y);
        }
        let record = TupleValueRecord {
            seq: inst.seq,
            tuple_value: tv,
            original,
            perturbed,
        };
        Ok((out, record))
    }

    /// Perturbed copy of `inst` without building a record.
    pub fn perturb_values<T: Scalar>(&self, inst: &Instance<T>, stats: &StatsTable<T>) -> Result<Instance<T>> {
        let tv = self.tuple_value(inst, stats)?;
        let mut out = inst.clone();
        for &attr in &self.sensitive {
            if let Value::Numeric(x) = inst.values[attr] {
                out.values[attr] = Value::Numeric(tv * x);
            }
        }
        Ok(out)
    }
}

pub fn tuple_value<T: Scalar>(
    inst: &Instance<T>,
    schema: &Schema,
    stats: &StatsTable<T>,
    pre_normalized: &BTreeSet<String>,
) -> Result<T> {
    // Sensitivity does not affect the tuple value; any numeric name resolves.
    let placeholder = &schema.attributes()[schema.numeric_indices()[0]].name;
    let cfg = PerturbationConfig::new([placeholder.clone()]).with_pre_normalized(pre_normalized.iter().cloned());
    Perturber::new(schema, &cfg)?.tuple_value(inst, stats)
}

pub fn perturb_instance<T: Scalar>(
    inst: &Instance<T>,
    schema: &Schema,
    stats: &StatsTable<T>,
    cfg: &PerturbationConfig,
) -> Result<(Instance<T>, TupleValueRecord<T>)> {
    Perturber::new(schema, cfg)?.perturb(inst, stats)
}

/// Perturbed instances in input order, paired with their records.
pub type PerturbedStream<T> = (Vec<Instance<T>>, Vec<TupleValueRecord<T>>);

/// Perturbs a whole stream, returning the perturbed instances in input order
/// together with one record per instance.
pub fn perturb_stream<T: Scalar>(
    stream: &[Instance<T>],
    schema: &Schema,
    cfg: &PerturbationConfig,
) -> Result<PerturbedStream<T>> {
    if stream.is_empty() {
        return Err(Error::Config("cannot perturb an empty stream".into()));
    }
    let perturber = Perturber::new(schema, cfg)?;
    for inst in stream {
        schema.validate(inst)?;
    }
    let mut out = Vec::with_capacity(stream.len());
    let mut records = Vec::with_capacity(stream.len());
    match cfg.stats_mode {
        StatsMode::TwoPass => {
            let stats = StatsTable::from_instances(schema, stream)?;
            for inst in stream {
                let (p, r) = perturber.perturb(inst, &stats)?;
                out.push(p);
                records.push(r);
            }
        }
        StatsMode::Incremental => {
            let mut stats = StatsTable::new(schema);
            for inst in stream {
                stats = stats.update(inst)?;
                let (p, r) = perturber.perturb(inst, &stats)?;
                out.push(p);
                records.push(r);
            }
        }
    }
    Ok((out, records))
}
