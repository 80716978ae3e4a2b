//! Maximum-agreement cluster correspondence via the Hungarian method.

use serde::{Deserialize, Serialize};

use crate::eval::cmm::Cmm;

/// Injective map from original cluster index to perturbed cluster index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterMatching {
    pub perm: Vec<Option<usize>>,
    pub matched_count: u64,
}

/// Matching maximizing the summed frequency of matched pairs. With a
/// rectangular matrix every cluster on the smaller side is matched.
pub fn best_matching(cmm: &Cmm) -> ClusterMatching {
    let (rows, cols) = (cmm.rows(), cmm.cols());
    let mut perm = vec![None; rows];
    if rows == 0 || cols == 0 {
        return ClusterMatching { perm, matched_count: 0 };
    }
    if rows <= cols {
        let cost: Vec<Vec<i64>> = cmm
            .freq
            .iter()
            .map(|r| r.iter().map(|&f| -(f as i64)).collect())
            .collect();
        for (i, j) in min_cost_assignment(&cost).into_iter().enumerate() {
            perm[i] = Some(j);
        }
    } else {
        let cost: Vec<Vec<i64>> = (0..cols)
            .map(|j| cmm.freq.iter().map(|r| -(r[j] as i64)).collect())
            .collect();
        for (j, i) in min_cost_assignment(&cost).into_iter().enumerate() {
            perm[i] = Some(j);
        }
    }
    let matched_count = perm
        .iter()
        .enumerate()
        .filter_map(|(i, j)| j.map(|j| cmm.freq[i][j]))
        .sum();
    ClusterMatching { perm, matched_count }
}

/// Shortest-augmenting-path Hungarian algorithm with potentials, O(n²m).
/// `cost` is n×m with n ≤ m; returns the column assigned to each row.
fn min_cost_assignment(cost: &[Vec<i64>]) -> Vec<usize> {
    let n = cost.len();
    let m = cost[0].len();
    debug_assert!(n <= m);
    const INF: i64 = i64::MAX / 4;
    // 1-based with a virtual column 0.
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; m + 1];
    let mut row_of = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        let mut minv = vec![INF; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = INF;
            let mut j1 = 0;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut col_of = vec![0; n];
    for j in 1..=m {
        if row_of[j] != 0 {
            col_of[row_of[j] - 1] = j - 1;
        }
    }
    col_of
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn brute_force(freq: &[Vec<u64>]) -> u64 {
        fn go(freq: &[Vec<u64>], row: usize, used: &mut Vec<bool>) -> u64 {
            if row == freq.len() {
                return 0;
            }
            let mut best = 0;
            for j in 0..used.len() {
                if !used[j] {
                    used[j] = true;
                    best = best.max(freq[row][j] + go(freq, row + 1, used));
                    used[j] = false;
                }
            }
            best
        }
        go(freq, 0, &mut vec![false; freq[0].len()])
    }

    #[test]
    fn examples() {
        let m = best_matching(&Cmm::from_rows(vec![vec![2, 0], vec![0, 2]]));
        assert_eq!(m.perm, vec![Some(0), Some(1)]);
        assert_eq!(m.matched_count, 4);
        let m = best_matching(&Cmm::from_rows(vec![vec![0, 2], vec![2, 0]]));
        assert_eq!(m.perm, vec![Some(1), Some(0)]);
        assert_eq!(m.matched_count, 4);
        let m = best_matching(&Cmm::from_rows(vec![vec![8, 2], vec![1, 9]]));
        assert_eq!(m.perm, vec![Some(0), Some(1)]);
        assert_eq!(m.matched_count, 17);
    }

    #[test]
    fn wide_matrix() {
        let m = best_matching(&Cmm::from_rows(vec![vec![1, 0, 7], vec![0, 3, 6]]));
        assert_eq!(m.perm, vec![Some(2), Some(1)]);
        assert_eq!(m.matched_count, 10);
    }

    proptest! {
        #[test]
        fn agrees_with_exhaustive_search(
            k in 2usize..7,
            cells in prop::collection::vec(0u64..=20, 36),
        ) {
            let freq: Vec<Vec<u64>> = (0..k).map(|i| cells[i * k..(i + 1) * k].to_vec()).collect();
            let cmm = Cmm::from_rows(freq.clone());
            let m = best_matching(&cmm);
            prop_assert_eq!(m.matched_count, brute_force(&freq));
            let mut targets: Vec<usize> = m.perm.iter().map(|p| p.unwrap()).collect();
            targets.sort();
            targets.dedup();
            prop_assert_eq!(targets.len(), k);
        }

        #[test]
        fn rectangular_agrees_with_exhaustive_search(
            rows in 1usize..5,
            cols in 1usize..5,
            cells in prop::collection::vec(0u64..=20, 16),
        ) {
            let freq: Vec<Vec<u64>> = (0..rows).map(|i| cells[i * cols..(i + 1) * cols].to_vec()).collect();
            let m = best_matching(&Cmm::from_rows(freq.clone()));
            let expected = if rows <= cols {
                brute_force(&freq)
            } else {
                let t: Vec<Vec<u64>> = (0..cols).map(|j| freq.iter().map(|r| r[j]).collect()).collect();
                brute_force(&t)
            };
            prop_assert_eq!(m.matched_count, expected);
            prop_assert_eq!(m.perm.iter().filter(|p| p.is_some()).count(), rows.min(cols));
        }
    }
}
