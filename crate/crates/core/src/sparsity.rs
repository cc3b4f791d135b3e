//! Row-sparsity sets and their Euclidean projection.
//!
//! `S_k` is the set of `p x d` matrices with at most `k` nonzero rows. A row
//! is a feature (or, for kernel models, a training sample), so projecting onto
//! `S_k` keeps the `k` rows of largest Euclidean norm and zeroes the rest.

use std::cmp::Ordering;

use nalgebra::DMatrix;

use crate::error::{Result, VdaError};

/// The set of `p`-row matrices with at most `k` nonzero rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RowSparsitySet {
    k: usize,
    p: usize,
}

impl RowSparsitySet {
    pub fn new(k: usize, p: usize) -> Result<Self> {
        if k > p {
            return Err(VdaError::config(format!(
                "sparsity level k = {k} exceeds the row count p = {p}"
            )));
        }
        Ok(Self { k, p })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn project(&self, m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.check(m)?;
        Ok(project_after(m, 0, self.k).0)
    }

    pub fn distance(&self, m: &DMatrix<f64>) -> Result<f64> {
        self.check(m)?;
        Ok(project_after(m, 0, self.k).1.sqrt())
    }

    fn check(&self, m: &DMatrix<f64>) -> Result<()> {
        if m.nrows() != self.p {
            return Err(VdaError::shape(format!(
                "matrix has {} rows, sparsity set expects {}",
                m.nrows(),
                self.p
            )));
        }
        Ok(())
    }
}

/// Projects `m` onto the set of matrices with at most `k` nonzero rows.
///
/// When norms tie at the cut-off the row with the smaller index is kept.
pub fn project_rows(m: &DMatrix<f64>, k: usize) -> Result<DMatrix<f64>> {
    RowSparsitySet::new(k, m.nrows())?.project(m)
}

/// Frobenius distance from `m` to its projection onto `S_k`.
pub fn distance_to_set(m: &DMatrix<f64>, k: usize) -> Result<f64> {
    RowSparsitySet::new(k, m.nrows())?.distance(m)
}

/// Indices of rows whose Euclidean norm exceeds `threshold`, in increasing order.
pub fn support(m: &DMatrix<f64>, threshold: f64) -> Vec<usize> {
    m.row_iter()
        .enumerate()
        .filter(|(_, row)| row.norm() > threshold)
        .map(|(i, _)| i)
        .collect()
}

/// Indices of the `k` largest values in `norms` (ties to the lower index),
/// returned in increasing index order.
pub(crate) fn top_k(norms: &[f64], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..norms.len()).collect();
    if k < norms.len() && k > 0 {
        let rank = |a: &usize, b: &usize| -> Ordering {
            norms[*b].total_cmp(&norms[*a]).then(a.cmp(b))
        };
        order.select_nth_unstable_by(k - 1, rank);
    }
    order.truncate(k);
    order.sort_unstable();
    order
}

/// Projects rows `skip..` of `m` onto `S_k`, copying the first `skip` rows
/// (intercepts) unchanged. Returns the projection and the squared distance.
pub(crate) fn project_after(m: &DMatrix<f64>, skip: usize, k: usize) -> (DMatrix<f64>, f64) {
    let p = m.nrows() - skip;
    if k >= p {
        return (m.clone(), 0.0);
    }
    let norms: Vec<f64> = (0..p).map(|j| m.row(skip + j).norm_squared()).collect();
    let keep = top_k(&norms, k);
    let mut proj = DMatrix::zeros(m.nrows(), m.ncols());
    for r in 0..skip {
        proj.row_mut(r).copy_from(&m.row(r));
    }
    let mut dropped_rows = vec![true; p];
    for &j in &keep {
        proj.row_mut(skip + j).copy_from(&m.row(skip + j));
        dropped_rows[j] = false;
    }
    let dropped = norms
        .iter()
        .zip(&dropped_rows)
        .filter(|(_, &d)| d)
        .map(|(n, _)| n)
        .sum();
    (proj, dropped)
}
