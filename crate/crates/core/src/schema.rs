//! Stream data model: attribute descriptors, schemas and instances.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Role {
    NumericFeature,
    NominalFeature,
    ClassLabel,
}

/// One column of a stream.
///
/// Nominal features and the class label carry their permitted tokens in
/// `domain`; values of those columns are stored as indices into it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AttributeDescriptor {
    pub name: String,
    pub role: Role,
    pub domain: Vec<String>,
    pub sensitive: bool,
}

impl AttributeDescriptor {
    pub fn numeric(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            role: Role::NumericFeature,
            domain: Vec::new(),
            sensitive: false,
        }
    }

    pub fn nominal<S: Into<String>>(name: impl Into<String>, domain: impl IntoIterator<Item = S>) -> Self {
        Self {
            name: name.into(),
            role: Role::NominalFeature,
            domain: domain.into_iter().map(Into::into).collect(),
            sensitive: false,
        }
    }

    pub fn class<S: Into<String>>(name: impl Into<String>, domain: impl IntoIterator<Item = S>) -> Self {
        Self {
            role: Role::ClassLabel,
            ..Self::nominal(name, domain)
        }
    }

    pub fn is_numeric(&self) -> bool {
        self.role == Role::NumericFeature
    }

    /// Index of `token` in the domain of a nominal or class attribute.
    pub fn token_index(&self, token: &str) -> Option<u32> {
        self.domain.iter().position(|d| d == token).map(|i| i as u32)
    }
}

/// Ordered attribute list with exactly one class label and at least one
/// numeric feature.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schema {
    attributes: Vec<AttributeDescriptor>,
    class_index: usize,
    numeric: Vec<usize>,
}

impl Schema {
    pub fn new(attributes: Vec<AttributeDescriptor>) -> Result<Self> {
        let mut seen = HashSet::new();
        for a in &attributes {
            if a.name.is_empty() {
                return Err(Error::Schema("attribute with empty name".into()));
            }
            if !seen.insert(a.name.as_str()) {
                return Err(Error::Schema(format!("duplicate attribute name `{}`", a.name)));
            }
            if a.sensitive && !a.is_numeric() {
                return Err(Error::Schema(format!(
                    "attribute `{}` is marked sensitive but is not a numeric feature",
                    a.name
                )));
            }
            if a.role != Role::NumericFeature && a.domain.is_empty() {
                return Err(Error::Schema(format!("nominal attribute `{}` has an empty domain", a.name)));
            }
        }
        let classes: Vec<usize> = attributes
            .iter()
            .enumerate()
            .filter(|(_, a)| a.role == Role::ClassLabel)
            .map(|(i, _)| i)
            .collect();
        let class_index = match classes.as_slice() {
            [i] => *i,
            [] => return Err(Error::Schema("no class-label attribute".into())),
            _ => return Err(Error::Schema("more than one class-label attribute".into())),
        };
        let numeric: Vec<usize> = attributes
            .iter()
            .enumerate()
            .filter(|(_, a)| a.is_numeric())
            .map(|(i, _)| i)
            .collect();
        if numeric.is_empty() {
            return Err(Error::Schema("no numeric-feature attribute".into()));
        }
        Ok(Self {
            attributes,
            class_index,
            numeric,
        })
    }

    pub fn attributes(&self) -> &[AttributeDescriptor] {
        &self.attributes
    }

    pub fn len(&self) -> usize {
        self.attributes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty()
    }

    pub fn class_index(&self) -> usize {
        self.class_index
    }

    pub fn class_domain(&self) -> &[String] {
        &self.attributes[self.class_index].domain
    }

    /// Positions of the numeric-feature attributes, in schema order.
    pub fn numeric_indices(&self) -> &[usize] {
        &self.numeric
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a.name == name)
    }

    /// Returns a copy with the named attributes flagged sensitive.
    pub fn with_sensitive<S: AsRef<str>>(&self, names: &[S]) -> Result<Self> {
        let mut attributes = self.attributes.clone();
        for a in &mut attributes {
            a.sensitive = false;
        }
        for name in names {
            let name = name.as_ref();
            let i = self
                .index_of(name)
                .ok_or_else(|| Error::Schema(format!("unknown attribute `{name}`")))?;
            attributes[i].sensitive = true;
        }
        Self::new(attributes)
    }

    /// Checks arity, kinds, finiteness and nominal domains of `inst`.
    pub fn validate<T: Scalar>(&self, inst: &Instance<T>) -> Result<()> {
        let fail = |message: String| Error::Instance {
            seq: inst.seq,
            message,
        };
        if inst.values.len() != self.attributes.len() {
            return Err(fail(format!(
                "expected {} values, found {}",
                self.attributes.len(),
                inst.values.len()
            )));
        }
        for (a, v) in self.attributes.iter().zip(&inst.values) {
            match (a.role, v) {
                (Role::NumericFeature, Value::Numeric(x)) => {
                    if !x.is_finite() {
                        return Err(fail(format!("non-finite value in `{}`", a.name)));
                    }
                }
                (Role::NominalFeature | Role::ClassLabel, Value::Nominal(i)) => {
                    if *i as usize >= a.domain.len() {
                        return Err(fail(format!("token index {i} outside the domain of `{}`", a.name)));
                    }
                }
                _ => return Err(fail(format!("value kind does not match attribute `{}`", a.name))),
            }
        }
        Ok(())
    }

    /// Class index of an instance already validated against this schema.
    pub fn class_of<T: Scalar>(&self, inst: &Instance<T>) -> usize {
        match inst.values[self.class_index] {
            Value::Nominal(i) => i as usize,
            Value::Numeric(_) => unreachable!("class attribute holds a nominal value"),
        }
    }

    /// Textual form of value `v` in column `attr`.
    pub fn render<T: Scalar>(&self, attr: usize, v: &Value<T>) -> String {
        match v {
            Value::Numeric(x) => x.to_string(),
            Value::Nominal(i) => self.attributes[attr].domain[*i as usize].clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Value<T> {
    Numeric(T),
    Nominal(u32),
}

impl<T: Copy> Value<T> {
    pub fn as_numeric(&self) -> Option<T> {
        match self {
            Value::Numeric(x) => Some(*x),
            Value::Nominal(_) => None,
        }
    }
}

/// A stream tuple, aligned with its schema.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance<T> {
    pub seq: u64,
    pub values: Vec<Value<T>>,
}

impl<T: Scalar> Instance<T> {
    pub fn new(seq: u64, values: Vec<Value<T>>) -> Self {
        Self { seq, values }
    }

    pub fn numeric(&self, attr: usize) -> Option<T> {
        self.values.get(attr).and_then(Value::as_numeric)
    }
}
