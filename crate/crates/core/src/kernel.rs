//! Kernel VDA with radial basis functions.
//!
//! The kernel matrix `W` with entries `exp(-||x_i - x_j||^2 / gamma)` takes
//! the place of the design matrix, so each coefficient row belongs to a
//! training sample and the sparsity budget counts retained support points.
//! Inputs are expected to be standardized already.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, VdaError};
use crate::geometry::LabelCodec;
use crate::risk::CoefficientMatrix;
use crate::solver::{FitResult, Problem, SolverConfig};
use crate::sparsity;

/// Only the Gaussian (RBF) kernel is provided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    #[default]
    Rbf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub gamma: f64,
}

impl KernelSpec {
    pub fn rbf(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(VdaError::config(format!("kernel scale must be positive, got {gamma}")));
        }
        Ok(Self {
            kind: KernelKind::Rbf,
            gamma,
        })
    }

    pub fn eval_sq(&self, dist2: f64) -> f64 {
        match self.kind {
            KernelKind::Rbf => (-dist2 / self.gamma).exp(),
        }
    }
}

/// Median by linear interpolation (mean of the middle pair for even counts).
pub(crate) fn median(values: &mut [f64]) -> f64 {
    values.sort_unstable_by(f64::total_cmp);
    crate::model_selection::percentile_sorted(values, 0.5)
}

/// `1.3 *` the median squared distance between samples of different
/// classes; falls back to `1.3 *` the mean if the median is zero.
pub fn gamma_heuristic(x: &DMatrix<f64>, labels: &[usize]) -> Result<f64> {
    if x.nrows() != labels.len() {
        return Err(VdaError::shape(format!("{} rows but {} labels", x.nrows(), labels.len())));
    }
    let xt = x.transpose();
    let mut dists = Vec::new();
    for i in 0..labels.len() {
        for j in (i + 1)..labels.len() {
            if labels[i] != labels[j] {
                dists.push((xt.column(i) - xt.column(j)).norm_squared());
            }
        }
    }
    if dists.is_empty() {
        return Err(VdaError::input("scale heuristic needs samples from at least two classes"));
    }
    let mean = dists.iter().sum::<f64>() / dists.len() as f64;
    let med = median(&mut dists);
    let gamma = if med > 0.0 { 1.3 * med } else { 1.3 * mean };
    if gamma > 0.0 && gamma.is_finite() {
        Ok(gamma)
    } else {
        Err(VdaError::input("all cross-class samples coincide; the kernel scale is undefined"))
    }
}

/// Kernel matrix between the rows of `rows` and the rows of `cols`.
pub fn kernel_matrix(rows: &DMatrix<f64>, cols: &DMatrix<f64>, spec: &KernelSpec) -> Result<DMatrix<f64>> {
    if rows.ncols() != cols.ncols() {
        return Err(VdaError::shape(format!(
            "points have {} and {} features",
            rows.ncols(),
            cols.ncols()
        )));
    }
    let (n, m) = (rows.nrows(), cols.nrows());
    let rt = rows.transpose();
    let ct = cols.transpose();
    let mut w = DMatrix::zeros(n, m);
    if n == 0 {
        return Ok(w);
    }
    w.as_mut_slice()
        .par_chunks_mut(n)
        .enumerate()
        .for_each(|(j, column)| {
            let c = ct.column(j);
            for (i, entry) in column.iter_mut().enumerate() {
                let r = rt.column(i);
                let d2: f64 = r.iter().zip(c.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
                *entry = spec.eval_sq(d2);
            }
        });
    Ok(w)
}

/// A fitted kernel classifier holding only the support points it uses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelModel {
    pub spec: KernelSpec,
    /// Retained training points, one per row.
    pub support_points: DMatrix<f64>,
    /// Indices of the support points in the training set.
    pub support_indices: Vec<usize>,
    /// One coefficient row per support point, plus the intercept.
    pub coefficients: CoefficientMatrix,
}

impl KernelModel {
    /// Keeps the rows of `coefficients` with nonzero norm.
    pub fn from_coefficients(train: &DMatrix<f64>, coefficients: &CoefficientMatrix, spec: KernelSpec) -> Result<Self> {
        if coefficients.n_features() != train.nrows() {
            return Err(VdaError::shape(format!(
                "{} coefficient rows for {} training points",
                coefficients.n_features(),
                train.nrows()
            )));
        }
        let keep = sparsity::support(coefficients.slopes(), 0.0);
        let slopes = coefficients.slopes().select_rows(&keep);
        Ok(Self {
            spec,
            support_points: train.select_rows(&keep),
            support_indices: keep,
            coefficients: CoefficientMatrix::new(slopes, coefficients.intercept().cloned())?,
        })
    }

    pub fn n_support(&self) -> usize {
        self.support_indices.len()
    }

    /// `psi(x)` for every row of `x`.
    pub fn decision_values(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if x.ncols() != self.support_points.ncols() {
            return Err(VdaError::shape(format!(
                "model expects {} features, got {}",
                self.support_points.ncols(),
                x.ncols()
            )));
        }
        let w = kernel_matrix(x, &self.support_points, &self.spec)?;
        self.coefficients.predict(&w)
    }
}

/// Output of [`fit_kernel`].
#[derive(Debug, Clone)]
pub struct KernelFit {
    pub model: KernelModel,
    pub fit: FitResult,
}

/// Fits kernel VDA with at most `k_support` support points, warm-starting
/// from the ridge solution on the full kernel matrix.
pub fn fit_kernel(
    x: &DMatrix<f64>,
    labels: &[usize],
    codec: &LabelCodec,
    k_support: usize,
    config: &SolverConfig,
    spec: KernelSpec,
) -> Result<KernelFit> {
    let n = x.nrows();
    if k_support > n {
        return Err(VdaError::config(format!(
            "support budget {k_support} exceeds the {n} training samples"
        )));
    }
    let y = codec.encode_indices(labels)?;
    let w = kernel_matrix(x, x, &spec)?;
    let problem = Problem::new(&w, &y, config)?;
    let ridge = problem.ridge_init(None)?;
    let fit = if k_support == n {
        ridge
    } else {
        problem.fit(k_support, &ridge.coefficients)?
    };
    let model = KernelModel::from_coefficients(x, &fit.coefficients, spec)?;
    Ok(KernelFit { model, fit })
}

/// Nearest-vertex class indices for the rows of `x`.
pub fn predict_kernel(model: &KernelModel, codec: &LabelCodec, x: &DMatrix<f64>) -> Result<Vec<usize>> {
    codec.vertices().classify_rows(&model.decision_values(x)?)
}
