use ndarray::Array2;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::schema::{Instance, Schema};
use crate::stats::{zscore, RunningStats};

/// A tumbling window borrowed from the stream.
#[derive(Clone, Copy, Debug)]
pub struct Window<'a, T> {
    pub index: usize,
    pub instances: &'a [Instance<T>],
}

impl<T> Window<'_, T> {
    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }
}

/// Consecutive non-overlapping windows of `w` instances; the last holds the
/// remainder.
pub fn window_partition<T>(stream: &[Instance<T>], w: usize) -> Result<Vec<Window<'_, T>>> {
    if w == 0 {
        return Err(Error::Config("window size must be at least 1".into()));
    }
    Ok(stream
        .chunks(w)
        .enumerate()
        .map(|(index, instances)| Window { index, instances })
        .collect())
}

/// Numeric-feature columns of the window, one row per instance.
pub fn feature_matrix<T: Scalar>(instances: &[Instance<T>], schema: &Schema) -> Result<Array2<T>> {
    if instances.is_empty() {
        return Err(Error::Cluster("empty window".into()));
    }
    let cols = schema.numeric_indices();
    let mut m = Array2::zeros((instances.len(), cols.len()));
    for (mut row, inst) in m.rows_mut().into_iter().zip(instances) {
        for (cell, &attr) in row.iter_mut().zip(cols) {
            *cell = inst.numeric(attr).ok_or_else(|| Error::Instance {
                seq: inst.seq,
                message: format!("attribute `{}` is not numeric", schema.attributes()[attr].name),
            })?;
        }
    }
    Ok(m)
}

/// Standardizes each column in place against its own sample statistics.
pub fn zscore_columns<T: Scalar>(m: &mut Array2<T>) -> Result<()> {
    for mut col in m.columns_mut() {
        let stats = col.iter().try_fold(RunningStats::new(), |s, &x| s.update(x))?;
        for x in col.iter_mut() {
            *x = zscore(*x, &stats)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::{AttributeDescriptor, Value};

    fn stream(n: usize) -> Vec<Instance<f64>> {
        (0..n)
            .map(|i| Instance::new(i as u64, vec![Value::Numeric(i as f64), Value::Nominal(0)]))
            .collect()
    }

    fn sizes(n: usize, w: usize) -> Vec<usize> {
        window_partition(&stream(n), w).unwrap().iter().map(|w| w.len()).collect()
    }

    #[test]
    fn partition_sizes() {
        assert_eq!(sizes(10, 3), vec![3, 3, 3, 1]);
        assert_eq!(sizes(3000, 3000), vec![3000]);
        let big = sizes(65_000, 3000);
        assert_eq!(big.len(), 22);
        assert_eq!(*big.last().unwrap(), 2000);
        assert!(big[..21].iter().all(|&s| s == 3000));
        assert_eq!(sizes(5, 100), vec![5]);
    }

    #[test]
    fn partition_preserves_order() {
        let s = stream(10);
        let ws = window_partition(&s, 4).unwrap();
        let seqs: Vec<u64> = ws.iter().flat_map(|w| w.instances.iter().map(|i| i.seq)).collect();
        assert_eq!(seqs, (0..10).collect::<Vec<_>>());
        assert_eq!(ws.iter().map(|w| w.index).collect::<Vec<_>>(), vec![0, 1, 2]);
    }

    #[test]
    fn zero_window_rejected() {
        assert!(window_partition(&stream(3), 0).is_err());
    }

    #[test]
    fn feature_matrix_projects_numeric_columns() {
        let schema = Schema::new(vec![
            AttributeDescriptor::numeric("numA"),
            AttributeDescriptor::nominal("day", ["mon", "tue"]),
            AttributeDescriptor::numeric("numB"),
            AttributeDescriptor::class("class", ["Up", "Down"]),
        ])
        .unwrap();
        let rows = vec![
            Instance::new(0, vec![Value::Numeric(1.0), Value::Nominal(1), Value::Numeric(2.0), Value::Nominal(0)]),
            Instance::new(1, vec![Value::Numeric(3.0), Value::Nominal(0), Value::Numeric(4.0), Value::Nominal(1)]),
        ];
        let m = feature_matrix(&rows, &schema).unwrap();
        assert_eq!(m.dim(), (2, 2));
        assert_eq!(m.row(0).to_vec(), vec![1.0, 2.0]);
        assert_eq!(m.row(1).to_vec(), vec![3.0, 4.0]);
        assert!(feature_matrix::<f64>(&[], &schema).is_err());
    }

    #[test]
    fn zscored_columns() {
        let mut m = ndarray::array![[1.0, 5.0], [3.0, 5.0]];
        zscore_columns(&mut m).unwrap();
        let r = 1.0 / 2f64.sqrt();
        assert!((m[[0, 0]] + r).abs() < 1e-15 && (m[[1, 0]] - r).abs() < 1e-15);
        assert_eq!(m.column(1).to_vec(), vec![0.0, 0.0]);
    }
}
