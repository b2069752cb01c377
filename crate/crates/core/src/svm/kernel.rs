use std::ops::Deref;
use std::rc::Rc;

use rayon::prelude::*;

use super::SvmError;

/// Training sets up to this size use a dense Gram matrix.
pub const DENSE_LIMIT: usize = 4096;

/// Row-cache budget for the lazy kernel, in bytes.
const CACHE_BYTES: usize = 256 << 20;

#[inline]
pub fn squared_distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// `exp(-gamma * ||x - y||^2)`.
pub fn rbf_kernel(x: &[f64], y: &[f64], gamma: f64) -> Result<f64, SvmError> {
    if x.len() != y.len() {
        return Err(SvmError::DimensionMismatch { expected: x.len(), found: y.len() });
    }
    Ok((-gamma * squared_distance(x, y)).exp())
}

/// Dense symmetric matrix of squared distances, reusable across `gamma`.
#[derive(Debug, Clone)]
pub struct PairwiseDistances {
    n: usize,
    data: Vec<f64>,
}

impl PairwiseDistances {
    pub fn compute(points: &[Vec<f64>]) -> Self {
        let n = points.len();
        let mut data = vec![0.0; n * n];
        data.par_chunks_mut(n.max(1)).enumerate().for_each(|(i, row)| {
            for (j, v) in row.iter_mut().enumerate() {
                *v = squared_distance(&points[i], &points[j]);
            }
        });
        Self { n, data }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn rbf_gram(&self, gamma: f64) -> Vec<f64> {
        self.data.par_iter().map(|d| (-gamma * d).exp()).collect()
    }
}

/// Where SMO gets kernel rows from.
pub enum KernelSource<'a> {
    /// Row-major `n × n` Gram matrix.
    Dense(&'a [f64]),
    /// Rows computed on demand from the points.
    Lazy { points: &'a [Vec<f64>], gamma: f64 },
}

impl KernelSource<'_> {
    pub(crate) fn rows(&self, n: usize) -> RowAccess<'_> {
        let capacity = (CACHE_BYTES / (8 * n.max(1))).max(2);
        RowAccess { source: self, n, slots: vec![None; n], order: std::collections::VecDeque::new(), capacity }
    }
}

pub(crate) enum Row<'a> {
    Borrowed(&'a [f64]),
    Shared(Rc<[f64]>),
}

impl Deref for Row<'_> {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        match self {
            Row::Borrowed(s) => s,
            Row::Shared(r) => r,
        }
    }
}

/// FIFO row cache over a [`KernelSource`].
pub(crate) struct RowAccess<'a> {
    source: &'a KernelSource<'a>,
    n: usize,
    slots: Vec<Option<Rc<[f64]>>>,
    order: std::collections::VecDeque<usize>,
    capacity: usize,
}

impl<'a> RowAccess<'a> {
    pub(crate) fn row(&mut self, i: usize) -> Row<'a> {
        match self.source {
            KernelSource::Dense(m) => Row::Borrowed(&m[i * self.n..(i + 1) * self.n]),
            KernelSource::Lazy { points, gamma } => {
                if let Some(r) = &self.slots[i] {
                    return Row::Shared(Rc::clone(r));
                }
                let row: Rc<[f64]> =
                    points.iter().map(|p| (-gamma * squared_distance(&points[i], p)).exp()).collect();
                if self.order.len() == self.capacity {
                    if let Some(old) = self.order.pop_front() {
                        self.slots[old] = None;
                    }
                }
                self.order.push_back(i);
                self.slots[i] = Some(Rc::clone(&row));
                Row::Shared(row)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn identical_points() {
        assert_eq!(rbf_kernel(&[1.0, 2.0], &[1.0, 2.0], 3.0).unwrap(), 1.0);
    }

    #[test]
    fn unit_distance() {
        let k = rbf_kernel(&[0.0, 0.0], &[1.0, 0.0], 1.0).unwrap();
        assert!((k - 0.367879441171442).abs() < 1e-12);
    }

    #[test]
    fn mismatch() {
        assert!(matches!(rbf_kernel(&[0.0], &[0.0, 1.0], 1.0), Err(SvmError::DimensionMismatch { .. })));
    }

    #[test]
    fn gram_is_symmetric_psd() {
        let mut rng = crate::rng::stream(1, &[]);
        for trial in 0..20 {
            let pts: Vec<Vec<f64>> = (0..10).map(|_| (0..3).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
            let gamma = rng.random_range(0.05..5.0);
            let gram = PairwiseDistances::compute(&pts).rbf_gram(gamma);
            let m = nalgebra::DMatrix::from_row_slice(10, 10, &gram);
            assert_eq!(m, m.transpose());
            let min = m.symmetric_eigen().eigenvalues.min();
            assert!(min >= -1e-9, "trial {trial}: min eigenvalue {min}");
            for v in &gram {
                assert!(*v > 0.0 && *v <= 1.0);
            }
        }
    }

    #[test]
    fn lazy_rows_match_dense() {
        let pts: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64 * 0.3, (i * i) as f64 * 0.1]).collect();
        let gram = PairwiseDistances::compute(&pts).rbf_gram(0.7);
        let dense = KernelSource::Dense(&gram);
        let lazy = KernelSource::Lazy { points: &pts, gamma: 0.7 };
        let mut a = dense.rows(5);
        let mut b = lazy.rows(5);
        for i in [0, 3, 3, 4, 1] {
            assert_eq!(&*a.row(i), &*b.row(i));
        }
    }
}
