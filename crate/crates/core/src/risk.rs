//! ε-insensitive empirical risk and its quadratic majorizer.
//!
//! For coefficients `B` the risk is
//!
//! ```text
//! f(B) = (2n)^-1 * sum_i max(0, ||y_i - B'x_i|| - eps)^2
//! ```
//!
//! Around an anchor `B_m` it is majorized by the least-squares surrogate
//! `(2n)^-1 ||Z_m - XB||_F^2`, where row `i` of `Z_m` is the current
//! prediction pulled towards `y_i` by the fraction `w = (||r|| - eps) / ||r||`
//! whenever the residual leaves the dead zone.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Result, VdaError};
use crate::sparsity;

/// Coefficients of a linear VDA model: a `p x (c-1)` slope block and an
/// optional intercept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientMatrix {
    slopes: DMatrix<f64>,
    intercept: Option<DVector<f64>>,
}

impl CoefficientMatrix {
    pub fn new(slopes: DMatrix<f64>, intercept: Option<DVector<f64>>) -> Result<Self> {
        if let Some(b0) = &intercept {
            if b0.len() != slopes.ncols() {
                return Err(VdaError::shape(format!(
                    "intercept has length {}, slopes have {} columns",
                    b0.len(),
                    slopes.ncols()
                )));
            }
        }
        Ok(Self { slopes, intercept })
    }

    pub fn zeros(p: usize, dim: usize, intercept: bool) -> Self {
        Self {
            slopes: DMatrix::zeros(p, dim),
            intercept: intercept.then(|| DVector::zeros(dim)),
        }
    }

    pub fn slopes(&self) -> &DMatrix<f64> {
        &self.slopes
    }

    pub fn slopes_mut(&mut self) -> &mut DMatrix<f64> {
        &mut self.slopes
    }

    pub fn intercept(&self) -> Option<&DVector<f64>> {
        self.intercept.as_ref()
    }

    pub fn has_intercept(&self) -> bool {
        self.intercept.is_some()
    }

    pub fn n_features(&self) -> usize {
        self.slopes.nrows()
    }

    /// Output dimension, `c - 1`.
    pub fn dim(&self) -> usize {
        self.slopes.ncols()
    }

    /// `XB + 1 b0'`, one predicted point per row of `x`.
    pub fn predict(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if x.ncols() != self.n_features() {
            return Err(VdaError::shape(format!(
                "feature matrix has {} columns, model has {} features",
                x.ncols(),
                self.n_features()
            )));
        }
        let mut fitted = x * &self.slopes;
        if let Some(b0) = &self.intercept {
            for mut row in fitted.row_iter_mut() {
                row += b0.transpose();
            }
        }
        Ok(fitted)
    }

    /// The coefficients as one matrix, intercept (if any) in the first row.
    /// This pairs with a design matrix whose first column is all ones.
    pub fn stacked(&self) -> DMatrix<f64> {
        match &self.intercept {
            None => self.slopes.clone(),
            Some(b0) => {
                let mut m = DMatrix::zeros(self.slopes.nrows() + 1, self.dim());
                m.row_mut(0).copy_from(&b0.transpose());
                m.rows_mut(1, self.slopes.nrows()).copy_from(&self.slopes);
                m
            }
        }
    }

    /// Inverse of [`CoefficientMatrix::stacked`].
    pub fn from_stacked(m: &DMatrix<f64>, intercept: bool) -> Self {
        if intercept {
            Self {
                slopes: m.rows(1, m.nrows() - 1).into_owned(),
                intercept: Some(m.row(0).transpose()),
            }
        } else {
            Self {
                slopes: m.clone(),
                intercept: None,
            }
        }
    }
}

/// Shifted responses `Z_m` of the quadratic surrogate.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftedResponse {
    pub z: DMatrix<f64>,
    /// `true` where the residual norm exceeds ε.
    pub active: Vec<bool>,
}

/// Penalty weight, dead-zone radius and target sparsity of `f_rho`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenalizedObjective {
    pub rho: f64,
    pub epsilon: f64,
    pub k: usize,
}

impl PenalizedObjective {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho >= 0.0) {
            return Err(VdaError::config(format!("rho must be >= 0, got {}", self.rho)));
        }
        if !(self.epsilon > 0.0) {
            return Err(VdaError::config(format!(
                "epsilon must be > 0, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// Shifted responses and risk from predictions. Samples with residual norm
/// exactly ε fall in the inactive branch.
pub(crate) fn shift(fitted: &DMatrix<f64>, y: &DMatrix<f64>, epsilon: f64) -> (DMatrix<f64>, Vec<bool>, f64) {
    let n = fitted.nrows();
    let mut z = fitted.clone();
    let mut active = vec![false; n];
    let mut loss = 0.0;
    let d = fitted.ncols();
    for i in 0..n {
        let mut norm2 = 0.0;
        for j in 0..d {
            let r = y[(i, j)] - fitted[(i, j)];
            norm2 += r * r;
        }
        let norm = norm2.sqrt();
        if norm > epsilon {
            let w = (norm - epsilon) / norm;
            for j in 0..d {
                z[(i, j)] += w * (y[(i, j)] - fitted[(i, j)]);
            }
            active[i] = true;
            loss += (norm - epsilon) * (norm - epsilon);
        }
    }
    let risk = if n == 0 { 0.0 } else { loss / (2.0 * n as f64) };
    (z, active, risk)
}

fn check_data(b: &CoefficientMatrix, x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<()> {
    if x.nrows() != y.nrows() {
        return Err(VdaError::shape(format!(
            "{} feature rows but {} response rows",
            x.nrows(),
            y.nrows()
        )));
    }
    if y.ncols() != b.dim() {
        return Err(VdaError::shape(format!(
            "responses have {} columns, coefficients have {}",
            y.ncols(),
            b.dim()
        )));
    }
    if x.nrows() == 0 {
        return Err(VdaError::input("at least one sample is required"));
    }
    Ok(())
}

fn check_projection(b: &CoefficientMatrix, proj: &DMatrix<f64>) -> Result<()> {
    if proj.shape() != b.slopes().shape() {
        return Err(VdaError::shape(format!(
            "projection has shape {:?}, slopes have {:?}",
            proj.shape(),
            b.slopes().shape()
        )));
    }
    Ok(())
}

/// Empirical ε-insensitive risk `f(B)`.
pub fn risk_value(b: &CoefficientMatrix, x: &DMatrix<f64>, y: &DMatrix<f64>, epsilon: f64) -> Result<f64> {
    check_data(b, x, y)?;
    let fitted = b.predict(x)?;
    Ok(shift(&fitted, y, epsilon).2)
}

/// Builds `Z_m` at the anchor `b`.
pub fn shifted_response(
    b: &CoefficientMatrix,
    x: &DMatrix<f64>,
    y: &DMatrix<f64>,
    epsilon: f64,
) -> Result<ShiftedResponse> {
    check_data(b, x, y)?;
    let fitted = b.predict(x)?;
    let (z, active, _) = shift(&fitted, y, epsilon);
    Ok(ShiftedResponse { z, active })
}

/// `f(B) + (rho/2) ||slopes - P||_F^2`, where `proj` is a projection of the
/// slope block onto the sparsity set. The intercept is never penalized.
pub fn penalized_value(
    b: &CoefficientMatrix,
    x: &DMatrix<f64>,
    y: &DMatrix<f64>,
    obj: &PenalizedObjective,
    proj: &DMatrix<f64>,
) -> Result<f64> {
    obj.validate()?;
    check_projection(b, proj)?;
    let risk = risk_value(b, x, y, obj.epsilon)?;
    Ok(risk + 0.5 * obj.rho * (b.slopes() - proj).norm_squared())
}

/// Gradient of `f_rho` at `b`:
/// `-n^-1 X'(Z_m - XB) + rho (B - P)`, with no penalty term on the intercept.
pub fn penalized_gradient(
    b: &CoefficientMatrix,
    x: &DMatrix<f64>,
    y: &DMatrix<f64>,
    obj: &PenalizedObjective,
    proj: &DMatrix<f64>,
) -> Result<CoefficientMatrix> {
    obj.validate()?;
    check_data(b, x, y)?;
    check_projection(b, proj)?;
    let n = x.nrows() as f64;
    let fitted = b.predict(x)?;
    let (z, _, _) = shift(&fitted, y, obj.epsilon);
    let resid = z - fitted;
    let mut slopes = x.tr_mul(&resid) / -n;
    slopes += (b.slopes() - proj) * obj.rho;
    let intercept = b
        .has_intercept()
        .then(|| resid.row_sum().transpose() / -n);
    CoefficientMatrix::new(slopes, intercept)
}

/// Surrogate `g_rho(B | B_m) = (2n)^-1 ||Z_m - XB||^2 + (rho/2) ||P_m - B||^2`
/// built at `anchor`, where `P_m` projects the anchor's slopes onto `S_k`.
pub fn surrogate_value(
    b: &CoefficientMatrix,
    anchor: &CoefficientMatrix,
    x: &DMatrix<f64>,
    y: &DMatrix<f64>,
    obj: &PenalizedObjective,
) -> Result<f64> {
    obj.validate()?;
    check_data(b, x, y)?;
    check_data(anchor, x, y)?;
    let n = x.nrows() as f64;
    let shifted = shifted_response(anchor, x, y, obj.epsilon)?;
    let fitted = b.predict(x)?;
    let proj = sparsity::project_rows(anchor.slopes(), obj.k)?;
    let mut penalty = (&proj - b.slopes()).norm_squared();
    if let (Some(b0), Some(a0)) = (b.intercept(), anchor.intercept()) {
        // P_m leaves the anchor intercept in place, so the surrogate carries
        // a proximal term that vanishes at the anchor.
        penalty += (b0 - a0).norm_squared();
    }
    Ok((shifted.z - fitted).norm_squared() / (2.0 * n) + 0.5 * obj.rho * penalty)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_model(b: f64) -> CoefficientMatrix {
        CoefficientMatrix::new(DMatrix::from_element(1, 1, b), None).unwrap()
    }

    #[test]
    fn risk_inside_dead_zone_is_zero() {
        let x = DMatrix::from_element(1, 1, 1.0);
        let y = DMatrix::from_element(1, 1, 1.0);
        assert_eq!(risk_value(&scalar_model(0.5), &x, &y, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn risk_outside_dead_zone() {
        let x = DMatrix::from_element(1, 1, 1.0);
        let y = DMatrix::from_element(1, 1, 1.0);
        assert_eq!(risk_value(&scalar_model(-1.0), &x, &y, 1.0).unwrap(), 0.5);
    }

    #[test]
    fn shifted_response_examples() {
        let x = DMatrix::from_element(1, 1, 1.0);
        let y = DMatrix::from_element(1, 1, 1.0);
        let s = shifted_response(&scalar_model(0.5), &x, &y, 1.0).unwrap();
        assert_eq!(s.z[(0, 0)], 0.5);
        assert_eq!(s.active, vec![false]);
        let s = shifted_response(&scalar_model(-1.0), &x, &y, 1.0).unwrap();
        assert_eq!(s.z[(0, 0)], 0.0);
        assert_eq!(s.active, vec![true]);
        let s = shifted_response(&scalar_model(-1.0), &x, &y, 1e-12).unwrap();
        assert!((s.z[(0, 0)] - 1.0).abs() < 1e-11);
    }

    #[test]
    fn residual_on_the_boundary_is_inactive() {
        let x = DMatrix::from_element(1, 1, 1.0);
        let y = DMatrix::from_element(1, 1, 1.0);
        let s = shifted_response(&scalar_model(0.0), &x, &y, 1.0).unwrap();
        assert_eq!(s.active, vec![false]);
        assert_eq!(s.z[(0, 0)], 0.0);
    }

    #[test]
    fn penalty_of_dropped_row() {
        let b = CoefficientMatrix::new(DMatrix::from_column_slice(2, 1, &[3.0, 4.0]), None).unwrap();
        let x = DMatrix::zeros(1, 2);
        let y = DMatrix::from_element(1, 1, 0.5);
        let obj = PenalizedObjective { rho: 2.0, epsilon: 1.0, k: 1 };
        let proj = sparsity::project_rows(b.slopes(), 1).unwrap();
        assert_eq!(proj.as_slice(), &[0.0, 4.0]);
        assert_eq!(penalized_value(&b, &x, &y, &obj, &proj).unwrap(), 9.0);
        let free = PenalizedObjective { rho: 0.0, ..obj };
        assert_eq!(penalized_value(&b, &x, &y, &free, &proj).unwrap(), 0.0);
        let bad = PenalizedObjective { rho: -1.0, ..obj };
        assert!(matches!(
            penalized_value(&b, &x, &y, &bad, &proj),
            Err(VdaError::InvalidConfig(_))
        ));
    }

    #[test]
    fn gradient_vanishes_at_feasible_interpolant() {
        let x = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let b = CoefficientMatrix::new(
            DMatrix::from_row_slice(2, 1, &[0.9, -0.8]),
            Some(DVector::from_element(1, 0.0)),
        )
        .unwrap();
        let y = DMatrix::from_column_slice(2, 1, &[1.0, -1.0]);
        let obj = PenalizedObjective { rho: 5.0, epsilon: 0.5, k: 2 };
        let g = penalized_gradient(&b, &x, &y, &obj, b.slopes()).unwrap();
        assert_eq!(g.slopes().norm(), 0.0);
        assert_eq!(g.intercept().unwrap().norm(), 0.0);
    }

    #[test]
    fn stacked_round_trip() {
        let b = CoefficientMatrix::new(
            DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]),
            Some(DVector::from_vec(vec![-1.0, -2.0])),
        )
        .unwrap();
        let s = b.stacked();
        assert_eq!(s.row(0)[1], -2.0);
        assert_eq!(CoefficientMatrix::from_stacked(&s, true), b);
        assert!(CoefficientMatrix::new(DMatrix::zeros(2, 2), Some(DVector::zeros(3))).is_err());
    }

    #[test]
    fn shape_errors() {
        let b = CoefficientMatrix::zeros(3, 2, false);
        let x = DMatrix::zeros(4, 2);
        let y = DMatrix::zeros(4, 2);
        assert!(matches!(risk_value(&b, &x, &y, 1.0), Err(VdaError::Shape(_))));
    }
}
