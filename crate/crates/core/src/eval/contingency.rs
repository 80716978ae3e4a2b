//! Cluster-by-class weights and the F1-based precision/recall measures.
//!
//! Precision averages, over non-empty clusters, the F1 of each cluster
//! against its majority class. Recall averages, over classes present in the
//! window, the best F1 any cluster achieves for that class.

use serde::{Deserialize, Serialize};

use crate::cluster::Assignment;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `c[i][j]`: number of instances in cluster `i` with class `j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContingencyTable {
    pub c: Vec<Vec<u64>>,
}

impl ContingencyTable {
    pub fn from_rows(c: Vec<Vec<u64>>) -> Self {
        Self { c }
    }

    pub fn clusters(&self) -> usize {
        self.c.len()
    }

    pub fn classes(&self) -> usize {
        self.c.first().map_or(0, Vec::len)
    }

    pub fn total(&self) -> u64 {
        self.c.iter().flatten().sum()
    }

    /// Total weight of cluster `i`.
    pub fn cluster_total(&self, i: usize) -> u64 {
        self.c[i].iter().sum()
    }

    /// Total weight of class `j`.
    pub fn class_total(&self, j: usize) -> u64 {
        self.c.iter().map(|r| r[j]).sum()
    }
}

pub fn contingency(assign: &Assignment, labels: &[usize], k: usize, classes: usize) -> Result<ContingencyTable> {
    if assign.len() != labels.len() {
        return Err(Error::Eval(format!(
            "{} assignments but {} labels",
            assign.len(),
            labels.len()
        )));
    }
    let mut c = vec![vec![0u64; classes]; k];
    for (&i, &j) in assign.cluster_ids.iter().zip(labels) {
        if j >= classes {
            return Err(Error::Eval(format!("label index {j} outside a domain of {classes}")));
        }
        if i >= k {
            return Err(Error::Eval(format!("cluster id {i} outside k = {k}")));
        }
        c[i][j] += 1;
    }
    Ok(ContingencyTable { c })
}

fn f1<T: Scalar>(precision: T, recall: T) -> T {
    let sum = precision + recall;
    if sum <= T::zero() {
        T::zero()
    } else {
        (T::one() + T::one()) * precision * recall / sum
    }
}

fn ratio<T: Scalar>(num: u64, den: u64) -> T {
    T::from_u64(num).unwrap() / T::from_u64(den).unwrap()
}

pub fn precision_measure<T: Scalar>(ct: &ContingencyTable) -> Result<T> {
    if ct.total() == 0 {
        return Err(Error::Eval("empty contingency table".into()));
    }
    let mut sum = T::zero();
    let mut found = 0usize;
    for (i, row) in ct.c.iter().enumerate() {
        let size = ct.cluster_total(i);
        if size == 0 {
            continue;
        }
        found += 1;
        // First maximum: ties resolve to the lowest class index.
        let (best_class, &best) = row
            .iter()
            .enumerate()
            .fold((0, &row[0]), |acc, (j, v)| if *v > *acc.1 { (j, v) } else { acc });
        sum += f1(ratio(best, size), ratio(best, ct.class_total(best_class)));
    }
    Ok(sum / T::from_count(found))
}

pub fn recall_measure<T: Scalar>(ct: &ContingencyTable) -> Result<T> {
    if ct.total() == 0 {
        return Err(Error::Eval("empty contingency table".into()));
    }
    let mut sum = T::zero();
    let mut present = 0usize;
    for j in 0..ct.classes() {
        let class_total = ct.class_total(j);
        if class_total == 0 {
            continue;
        }
        present += 1;
        let best = (0..ct.clusters())
            .filter(|&i| ct.c[i][j] > 0)
            .map(|i| f1(ratio::<T>(ct.c[i][j], ct.cluster_total(i)), ratio(ct.c[i][j], class_total)))
            .fold(T::zero(), T::max);
        sum += best;
    }
    Ok(sum / T::from_count(present))
}
