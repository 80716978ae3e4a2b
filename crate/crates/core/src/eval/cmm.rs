//! Cluster Membership Matrix between an original and a perturbed clustering.

use serde::{Deserialize, Serialize};

use crate::cluster::Assignment;
use crate::error::{Error, Result};
use crate::eval::matching::ClusterMatching;

/// `freq[i][j]` counts points in original cluster `i` and perturbed cluster `j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cmm {
    pub freq: Vec<Vec<u64>>,
}

impl Cmm {
    pub fn from_rows(freq: Vec<Vec<u64>>) -> Self {
        Self { freq }
    }

    pub fn rows(&self) -> usize {
        self.freq.len()
    }

    pub fn cols(&self) -> usize {
        self.freq.first().map_or(0, Vec::len)
    }

    pub fn total(&self) -> u64 {
        self.freq.iter().flatten().sum()
    }

    pub fn row_sums(&self) -> Vec<u64> {
        self.freq.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<u64> {
        (0..self.cols())
            .map(|j| self.freq.iter().map(|r| r[j]).sum())
            .collect()
    }
}

pub fn build_cmm(orig: &Assignment, pert: &Assignment, k_orig: usize, k_pert: usize) -> Result<Cmm> {
    if orig.len() != pert.len() {
        return Err(Error::Eval(format!(
            "assignments differ in length ({} vs {})",
            orig.len(),
            pert.len()
        )));
    }
    let mut freq = vec![vec![0u64; k_pert]; k_orig];
    for (&i, &j) in orig.cluster_ids.iter().zip(&pert.cluster_ids) {
        if i >= k_orig || j >= k_pert {
            return Err(Error::Eval(format!("cluster id ({i}, {j}) outside {k_orig}x{k_pert}")));
        }
        freq[i][j] += 1;
    }
    Ok(Cmm { freq })
}

/// Percentage of points falling on matched cluster pairs.
pub fn cmm_accuracy(cmm: &Cmm, matching: &ClusterMatching) -> Result<f64> {
    let total = cmm.total();
    if total == 0 {
        return Err(Error::Eval("empty cluster membership matrix".into()));
    }
    Ok(100.0 * matching.matched_count as f64 / total as f64)
}

pub fn misclassification(cmm: &Cmm, matching: &ClusterMatching) -> Result<f64> {
    cmm_accuracy(cmm, matching).map(|a| 100.0 - a)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::eval::best_matching;

    fn a(ids: &[usize]) -> Assignment {
        Assignment {
            cluster_ids: ids.to_vec(),
        }
    }

    #[test]
    fn build_examples() {
        let c = build_cmm(&a(&[0, 0, 1, 1]), &a(&[0, 0, 1, 1]), 2, 2).unwrap();
        assert_eq!(c.freq, vec![vec![2, 0], vec![0, 2]]);
        let c = build_cmm(&a(&[0, 0, 1, 1]), &a(&[1, 1, 0, 0]), 2, 2).unwrap();
        assert_eq!(c.freq, vec![vec![0, 2], vec![2, 0]]);
        let c = build_cmm(&a(&[0, 0, 1, 1, 1]), &a(&[0, 1, 1, 1, 0]), 2, 2).unwrap();
        assert_eq!(c.freq, vec![vec![1, 1], vec![1, 2]]);
        assert_eq!(c.total(), 5);
        assert_eq!(c.row_sums(), vec![2, 3]);
        assert_eq!(c.col_sums(), vec![2, 3]);
    }

    #[test]
    fn build_errors() {
        assert!(build_cmm(&a(&[0, 1]), &a(&[0]), 2, 2).is_err());
        assert!(build_cmm(&a(&[0, 2]), &a(&[0, 0]), 2, 2).is_err());
    }

    #[test]
    fn accuracy_examples() {
        let cases = [
            (vec![vec![2, 0], vec![0, 2]], 100.0),
            (vec![vec![8, 2], vec![1, 9]], 85.0),
            (vec![vec![1, 1], vec![1, 1]], 50.0),
        ];
        for (freq, expected) in cases {
            let cmm = Cmm::from_rows(freq);
            let m = best_matching(&cmm);
            assert_eq!(cmm_accuracy(&cmm, &m).unwrap(), expected);
            assert_eq!(misclassification(&cmm, &m).unwrap(), 100.0 - expected);
        }
    }

    #[test]
    fn empty_matrix_is_an_error() {
        let cmm = Cmm::from_rows(vec![vec![0, 0], vec![0, 0]]);
        let m = best_matching(&cmm);
        assert!(cmm_accuracy(&cmm, &m).is_err());
        assert!(misclassification(&cmm, &m).is_err());
    }

    #[test]
    fn rectangular_unmatched_mass_is_misclassified() {
        // three original clusters against two perturbed ones: row 2 cannot be matched
        let cmm = Cmm::from_rows(vec![vec![5, 0], vec![0, 5], vec![3, 2]]);
        let m = best_matching(&cmm);
        assert_eq!(m.matched_count, 10);
        assert_eq!(m.perm.iter().filter(|p| p.is_some()).count(), 2);
        assert!((misclassification(&cmm, &m).unwrap() - 100.0 * 5.0 / 15.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn margins_match_cluster_sizes(
            pairs in prop::collection::vec((0usize..4, 0usize..5), 1..200)
        ) {
            let orig = a(&pairs.iter().map(|p| p.0).collect::<Vec<_>>());
            let pert = a(&pairs.iter().map(|p| p.1).collect::<Vec<_>>());
            let cmm = build_cmm(&orig, &pert, 4, 5).unwrap();
            prop_assert_eq!(cmm.total(), pairs.len() as u64);
            for (i, &s) in cmm.row_sums().iter().enumerate() {
                prop_assert_eq!(s, orig.cluster_ids.iter().filter(|&&c| c == i).count() as u64);
            }
            for (j, &s) in cmm.col_sums().iter().enumerate() {
                prop_assert_eq!(s, pert.cluster_ids.iter().filter(|&&c| c == j).count() as u64);
            }
            let m = best_matching(&cmm);
            let acc = cmm_accuracy(&cmm, &m).unwrap();
            prop_assert!((0.0..=100.0).contains(&acc));
            prop_assert!((acc + misclassification(&cmm, &m).unwrap() - 100.0).abs() < 1e-9);
        }
    }
}

