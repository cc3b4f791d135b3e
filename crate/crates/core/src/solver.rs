//! Proximal distance fitting of sparse VDA models.
//!
//! For a fixed penalty `rho` the objective
//! `f_rho(B) = f(B) + (rho/2) dist(B, S_k)^2` is minimized by MM: each step
//! minimizes the quadratic surrogate
//! `(2n)^-1 ||Z_m - XB||^2 + (rho/2) ||P_m - B||^2`
//! built at the current anchor, optionally from a Nesterov-extrapolated
//! anchor. An outer loop raises `rho` geometrically until the iterate sits
//! on (or stops approaching) the sparsity set, then projects.
//!
//! Internally coefficients are "stacked": when an intercept is fitted it is
//! row 0 and the design matrix gains a leading column of ones.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Result, VdaError};
use crate::geometry;
use crate::risk::{self, CoefficientMatrix};
use crate::sparsity;

/// Inner update used to minimize the surrogate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    /// Exact surrogate minimizer via a thin SVD computed once per design.
    #[default]
    SvdDirect,
    /// One exact line-search gradient step on the surrogate.
    SteepestDescent,
}

/// Geometric annealing schedule `rho(t) = rho0 * multiplier^t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Annealing {
    pub rho0: f64,
    pub multiplier: f64,
}

impl Default for Annealing {
    fn default() -> Self {
        Self {
            rho0: 1.0,
            multiplier: 1.2,
        }
    }
}

impl Annealing {
    pub fn rho(&self, t: usize) -> f64 {
        self.rho0 * self.multiplier.powi(t as i32)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Dead-zone radius. `None` uses the largest non-overlapping radius.
    pub epsilon: Option<f64>,
    /// Gradient tolerance. `None` uses `1e-6 * sqrt(#coefficients)`.
    pub delta_g: Option<f64>,
    pub delta_d: f64,
    pub delta_q: f64,
    /// Optional relative-objective stop for inner loops; off by default.
    pub delta_f: Option<f64>,
    pub max_outer: usize,
    pub max_inner: usize,
    pub nesterov_threshold: usize,
    pub annealing: Annealing,
    pub kind: SolverKind,
    pub lambda_init: f64,
    pub intercept: bool,
    /// Refit on the selected support after the final projection.
    pub debias: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            epsilon: None,
            delta_g: None,
            delta_d: 1e-6,
            delta_q: 1e-6,
            delta_f: None,
            max_outer: 100,
            max_inner: 10_000,
            nesterov_threshold: 10,
            annealing: Annealing::default(),
            kind: SolverKind::SvdDirect,
            lambda_init: 1e-3,
            intercept: true,
            debias: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(VdaError::config(format!("{name} must be positive, got {v}")))
            }
        };
        if let Some(eps) = self.epsilon {
            positive("epsilon", eps)?;
        }
        if let Some(g) = self.delta_g {
            positive("delta_g", g)?;
        }
        if let Some(f) = self.delta_f {
            positive("delta_f", f)?;
        }
        positive("delta_d", self.delta_d)?;
        positive("delta_q", self.delta_q)?;
        positive("rho0", self.annealing.rho0)?;
        positive("lambda_init", self.lambda_init)?;
        if !(self.annealing.multiplier > 1.0) {
            return Err(VdaError::config(format!(
                "annealing multiplier must exceed 1, got {}",
                self.annealing.multiplier
            )));
        }
        if self.max_outer == 0 || self.max_inner == 0 || self.nesterov_threshold == 0 {
            return Err(VdaError::config("iteration caps must be at least 1"));
        }
        Ok(())
    }
}

/// Thin SVD `X = U diag(sigma) V'` truncated to numerical rank.
#[derive(Debug, Clone)]
pub struct SvdFactorization {
    pub u: DMatrix<f64>,
    pub sigma: DVector<f64>,
    pub v: DMatrix<f64>,
    pub rank: usize,
    n: usize,
}

impl SvdFactorization {
    pub fn n_samples(&self) -> usize {
        self.n
    }

    pub fn n_columns(&self) -> usize {
        self.v.nrows()
    }
}

#[derive(Clone, Copy)]
enum Route {
    Direct,
    Transposed,
    QrFirst,
    Jacobi,
}

/// Computes the thin SVD of `x`, keeping singular values above
/// `max(n, p) * machine_eps * sigma_max`.
///
/// The decomposition is checked by reconstruction. On rare, strongly
/// rank-deficient inputs the iterative SVD can return factors that do not
/// reproduce `x`; in that case it is retried with another tolerance, on
/// the transpose, after a QR reduction and finally with a one-sided Jacobi
/// SVD before giving up.
pub fn factorize(x: &DMatrix<f64>) -> Result<SvdFactorization> {
    let (n, p) = x.shape();
    if n == 0 || p == 0 {
        return Err(VdaError::input("cannot factorize an empty matrix"));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(VdaError::Factorization("matrix has non-finite entries".into()));
    }
    let tolerance = 1e-10 * n.max(p) as f64 * x.norm();
    let eps = f64::EPSILON;
    let attempts = [
        (Route::Direct, 5.0 * eps),
        (Route::Direct, eps),
        (Route::Transposed, 5.0 * eps),
        (Route::QrFirst, 5.0 * eps),
        (Route::QrFirst, eps),
        (Route::Jacobi, eps),
    ];
    let mut worst = 0.0f64;
    for (route, eps) in attempts {
        let Some(fact) = thin_svd(x, route, eps) else {
            continue;
        };
        let error = (&fact.u * DMatrix::from_diagonal(&fact.sigma) * fact.v.transpose() - x).norm();
        if error <= tolerance {
            return Ok(fact);
        }
        worst = worst.max(error);
    }
    Err(VdaError::Factorization(format!(
        "SVD did not reproduce the matrix (error {worst:.3e})"
    )))
}

fn full_svd(x: DMatrix<f64>, eps: f64) -> Option<(DMatrix<f64>, DVector<f64>, DMatrix<f64>)> {
    let svd = nalgebra::SVD::try_new(x, true, true, eps, 0)?;
    Some((svd.u?, svd.singular_values, svd.v_t?.transpose()))
}

fn thin_svd(x: &DMatrix<f64>, route: Route, eps: f64) -> Option<SvdFactorization> {
    let (n, p) = x.shape();
    let (u_full, values, v_full) = match route {
        Route::Direct => full_svd(x.clone(), eps)?,
        Route::Transposed => {
            let (u, s, v) = full_svd(x.transpose(), eps)?;
            (v, s, u)
        }
        // X = QR with R square, so the SVD runs on a small triangular factor.
        Route::QrFirst if n >= p => {
            let qr = x.clone().qr();
            let (u, s, v) = full_svd(qr.r(), eps)?;
            (qr.q() * u, s, v)
        }
        Route::QrFirst => {
            let qr = x.transpose().qr();
            let (u, s, v) = full_svd(qr.r().transpose(), eps)?;
            (u, s, qr.q() * v)
        }
        Route::Jacobi if n >= p => {
            let qr = x.clone().qr();
            let (u, s, v) = jacobi_svd(qr.r());
            (qr.q() * u, s, v)
        }
        Route::Jacobi => {
            let qr = x.transpose().qr();
            let (u, s, v) = jacobi_svd(qr.r());
            (v, s, qr.q() * u)
        }
    };

    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let sigma_max = order.first().map_or(0.0, |&i| values[i]);
    let cutoff = n.max(p) as f64 * f64::EPSILON * sigma_max;
    let kept: Vec<usize> = order.into_iter().filter(|&i| values[i] > cutoff).collect();
    let rank = kept.len();

    let mut u = DMatrix::zeros(n, rank);
    let mut v = DMatrix::zeros(p, rank);
    let mut sigma = DVector::zeros(rank);
    for (col, &i) in kept.iter().enumerate() {
        u.set_column(col, &u_full.column(i));
        v.set_column(col, &v_full.column(i));
        sigma[col] = values[i];
    }
    Some(SvdFactorization { u, sigma, v, rank, n })
}

/// One-sided Jacobi SVD of a square matrix, `a = U diag(s) V'`.
/// Slower than the bidiagonal route but reliable on rank-deficient input.
fn jacobi_svd(a: DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>, DMatrix<f64>) {
    let k = a.ncols();
    let mut w = a;
    let mut v = DMatrix::<f64>::identity(k, k);
    for _sweep in 0..100 {
        let mut rotated = false;
        for i in 0..k {
            for j in i + 1..k {
                let alpha = w.column(i).norm_squared();
                let beta = w.column(j).norm_squared();
                let gamma = w.column(i).dot(&w.column(j));
                if gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for m in [&mut w, &mut v] {
                    for r in 0..m.nrows() {
                        let (x, y) = (m[(r, i)], m[(r, j)]);
                        m[(r, i)] = c * x - s * y;
                        m[(r, j)] = s * x + c * y;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let sigma = DVector::from_fn(k, |j, _| w.column(j).norm());
    for j in 0..k {
        if sigma[j] > 0.0 {
            w.column_mut(j).unscale_mut(sigma[j]);
        }
    }
    (w, sigma, v)
}

/// Exact minimizer of the surrogate through the factorization:
///
/// `B = P + n^-1 V (n^-1 S^2 + rho I)^-1 [S U'Z - S^2 V'P]`
pub fn mm_svd_update(
    fact: &SvdFactorization,
    z: &DMatrix<f64>,
    proj: &DMatrix<f64>,
    rho: f64,
) -> Result<DMatrix<f64>> {
    if !(rho > 0.0) {
        return Err(VdaError::config(format!("rho must be positive, got {rho}")));
    }
    if z.nrows() != fact.n || proj.nrows() != fact.n_columns() || z.ncols() != proj.ncols() {
        return Err(VdaError::shape(format!(
            "Z is {:?} and P is {:?}, factorization is {} x {}",
            z.shape(),
            proj.shape(),
            fact.n,
            fact.n_columns()
        )));
    }
    Ok(svd_step(fact, z, proj, rho))
}

fn svd_step(fact: &SvdFactorization, z: &DMatrix<f64>, proj: &DMatrix<f64>, rho: f64) -> DMatrix<f64> {
    let n = fact.n as f64;
    let mut core = fact.u.tr_mul(z);
    let vp = fact.v.tr_mul(proj);
    for i in 0..fact.rank {
        let s = fact.sigma[i];
        let s2 = s * s;
        let scale = 1.0 / (s2 + n * rho);
        for j in 0..core.ncols() {
            core[(i, j)] = (s * core[(i, j)] - s2 * vp[(i, j)]) * scale;
        }
    }
    let mut b = proj.clone();
    b.gemm(1.0, &fact.v, &core, 1.0);
    b
}

/// One steepest-descent step on the surrogate anchored at `b`:
/// `B - gamma G` with `gamma = ||G||^2 / (n^-1 ||XG||^2 + rho ||G||^2)`.
///
/// A zero gradient returns `b` unchanged.
pub fn steepest_descent_update(
    b: &DMatrix<f64>,
    x: &DMatrix<f64>,
    z: &DMatrix<f64>,
    proj: &DMatrix<f64>,
    rho: f64,
) -> Result<DMatrix<f64>> {
    if x.ncols() != b.nrows() || x.nrows() != z.nrows() || proj.shape() != b.shape() || z.ncols() != b.ncols() {
        return Err(VdaError::shape("inconsistent shapes in steepest descent update"));
    }
    let fitted = x * b;
    let n = x.nrows() as f64;
    let grad = (x.tr_mul(&(z - &fitted))) / -n + (b - proj) * rho;
    Ok(descent_step(b, x, &grad, rho))
}

fn descent_step(b: &DMatrix<f64>, x: &DMatrix<f64>, grad: &DMatrix<f64>, rho: f64) -> DMatrix<f64> {
    let g2 = grad.norm_squared();
    if g2 == 0.0 {
        return b.clone();
    }
    let n = x.nrows() as f64;
    let xg = x * grad;
    let gamma = g2 / (xg.norm_squared() / n + rho * g2);
    b - grad * gamma
}

/// Output of a single fit.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub coefficients: CoefficientMatrix,
    pub k: usize,
    pub converged: bool,
    pub outer_iters: usize,
    pub inner_iters_total: usize,
    /// Distance to the sparsity set of the last iterate before projection.
    pub final_distance: f64,
    pub final_gradient_norm: f64,
    /// `q_t` for each outer iteration, measured before projection.
    pub distance_history: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct PathEntry {
    pub k: usize,
    pub fit: FitResult,
}

/// Fits over a decreasing grid of model sizes, each warm-started from the last.
#[derive(Debug, Clone)]
pub struct SolutionPath {
    pub entries: Vec<PathEntry>,
}

impl SolutionPath {
    pub fn get(&self, k: usize) -> Option<&FitResult> {
        self.entries.iter().find(|e| e.k == k).map(|e| &e.fit)
    }
}

#[derive(Debug, Clone, Copy)]
enum Penalty {
    /// Distance to the row-sparsity set with `k` rows.
    Sparse(usize),
    /// Squared Frobenius norm of every coefficient, intercept included.
    Ridge,
}

#[derive(Debug, Clone)]
struct Iterate {
    b: DMatrix<f64>,
    fitted: DMatrix<f64>,
    z: DMatrix<f64>,
    risk: f64,
    proj: DMatrix<f64>,
    dist2: f64,
}

impl Iterate {
    fn objective(&self, weight: f64) -> f64 {
        self.risk + 0.5 * weight * self.dist2
    }
}

struct InnerOutcome {
    iterate: Iterate,
    converged: bool,
    iters: usize,
    grad_norm: f64,
}

/// A design matrix and class responses prepared for repeated fitting.
///
/// The factorization (for [`SolverKind::SvdDirect`]) is computed once and
/// shared by every fit, so one `Problem` serves a whole solution path.
#[derive(Debug, Clone)]
pub struct Problem {
    design: DMatrix<f64>,
    y: DMatrix<f64>,
    n_features: usize,
    epsilon: f64,
    delta_g: f64,
    config: SolverConfig,
    fact: Option<SvdFactorization>,
}

impl Problem {
    /// `x` is `n x p` (features, or kernel columns), `y` holds the encoded
    /// class vertices row by row.
    pub fn new(x: &DMatrix<f64>, y: &DMatrix<f64>, config: &SolverConfig) -> Result<Self> {
        config.validate()?;
        let (n, p) = x.shape();
        if n == 0 {
            return Err(VdaError::input("at least one sample is required"));
        }
        if y.nrows() != n {
            return Err(VdaError::shape(format!("{n} feature rows but {} response rows", y.nrows())));
        }
        if y.ncols() == 0 {
            return Err(VdaError::InvalidClassCount(1));
        }
        let design = if config.intercept {
            let mut d = DMatrix::from_element(n, p + 1, 1.0);
            d.columns_mut(1, p).copy_from(x);
            d
        } else {
            x.clone()
        };
        if design.ncols() == 0 {
            return Err(VdaError::input("design matrix has no columns"));
        }
        let epsilon = match config.epsilon {
            Some(e) => e,
            None => geometry::max_epsilon(y.ncols() + 1)?,
        };
        let delta_g = config
            .delta_g
            .unwrap_or(1e-6 * ((design.ncols() * y.ncols()) as f64).sqrt());
        let fact = match config.kind {
            SolverKind::SvdDirect => Some(factorize(&design)?),
            SolverKind::SteepestDescent => None,
        };
        Ok(Self {
            design,
            y: y.clone(),
            n_features: p,
            epsilon,
            delta_g,
            config: config.clone(),
            fact,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.design.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn dim(&self) -> usize {
        self.y.ncols()
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn delta_g(&self) -> f64 {
        self.delta_g
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    fn offset(&self) -> usize {
        usize::from(self.config.intercept)
    }

    fn zero_start(&self) -> CoefficientMatrix {
        CoefficientMatrix::zeros(self.n_features, self.dim(), self.config.intercept)
    }

    fn stacked(&self, b: &CoefficientMatrix) -> Result<DMatrix<f64>> {
        if b.n_features() != self.n_features || b.dim() != self.dim() || b.has_intercept() != self.config.intercept {
            return Err(VdaError::shape(format!(
                "start has {} features x {} (intercept: {}), problem needs {} x {} (intercept: {})",
                b.n_features(),
                b.dim(),
                b.has_intercept(),
                self.n_features,
                self.dim(),
                self.config.intercept
            )));
        }
        Ok(b.stacked())
    }

    fn unstack(&self, b: &DMatrix<f64>) -> CoefficientMatrix {
        CoefficientMatrix::from_stacked(b, self.config.intercept)
    }

    fn complete(&self, b: DMatrix<f64>, fitted: DMatrix<f64>, penalty: Penalty) -> Iterate {
        let (z, _, risk) = risk::shift(&fitted, &self.y, self.epsilon);
        let (proj, dist2) = match penalty {
            Penalty::Sparse(k) => sparsity::project_after(&b, self.offset(), k),
            Penalty::Ridge => (DMatrix::zeros(b.nrows(), b.ncols()), b.norm_squared()),
        };
        Iterate { b, fitted, z, risk, proj, dist2 }
    }

    fn evaluate(&self, b: DMatrix<f64>, penalty: Penalty) -> Iterate {
        let fitted = &self.design * &b;
        self.complete(b, fitted, penalty)
    }

    fn gradient(&self, it: &Iterate, weight: f64) -> DMatrix<f64> {
        let n = self.n_samples() as f64;
        let mut g = self.design.tr_mul(&(&it.z - &it.fitted)) / -n;
        g += (&it.b - &it.proj) * weight;
        g
    }

    /// Minimizer of the surrogate anchored at `anchor`.
    fn mm_step(&self, anchor: &Iterate, weight: f64, grad: Option<&DMatrix<f64>>) -> DMatrix<f64> {
        match &self.fact {
            Some(fact) => svd_step(fact, &anchor.z, &anchor.proj, weight),
            None => match grad {
                Some(g) => descent_step(&anchor.b, &self.design, g, weight),
                None => descent_step(&anchor.b, &self.design, &self.gradient(anchor, weight), weight),
            },
        }
    }

    /// Accelerated MM iterations at a fixed penalty weight.
    ///
    /// An extrapolated anchor whose step fails to lower the objective is
    /// discarded: the step is retaken from the last accepted iterate and the
    /// momentum counter resets, so accepted iterates never increase `f_rho`.
    fn minimize(&self, start: Iterate, penalty: Penalty, weight: f64, cap: usize, momentum: &mut usize) -> InnerOutcome {
        let mut cur = start;
        let mut f_cur = cur.objective(weight);
        let mut anchor: Option<Iterate> = None;
        let mut grad_norm = f64::INFINITY;
        for m in 1..=cap {
            let grad = self.gradient(&cur, weight);
            grad_norm = grad.norm();
            if grad_norm < self.delta_g {
                return InnerOutcome { iterate: cur, converged: true, iters: m - 1, grad_norm };
            }
            let extrapolated = anchor.is_some();
            let step = match &anchor {
                Some(a) => self.mm_step(a, weight, None),
                None => self.mm_step(&cur, weight, Some(&grad)),
            };
            let mut next = self.evaluate(step, penalty);
            let mut f_next = next.objective(weight);
            let mut restarted = false;
            if extrapolated && f_next >= f_cur {
                next = self.evaluate(self.mm_step(&cur, weight, Some(&grad)), penalty);
                f_next = next.objective(weight);
                restarted = true;
            }
            if !restarted && f_next < f_cur && m >= self.config.nesterov_threshold {
                let i = *momentum as f64;
                let coef = (i - 1.0) / (i + 2.0);
                *momentum += 1;
                anchor = (coef > 0.0).then(|| self.extrapolate(&next, &cur, coef, penalty));
            } else {
                *momentum = 1;
                anchor = None;
            }
            let progress = (f_next - f_cur).abs();
            let scale = 1.0 + f_cur;
            cur = next;
            f_cur = f_next;
            if let Some(df) = self.config.delta_f {
                if progress <= df * scale {
                    let grad_norm = self.gradient(&cur, weight).norm();
                    return InnerOutcome { iterate: cur, converged: true, iters: m, grad_norm };
                }
            }
        }
        let grad_norm_final = self.gradient(&cur, weight).norm();
        let converged = grad_norm_final < self.delta_g;
        grad_norm = grad_norm.min(grad_norm_final);
        InnerOutcome { iterate: cur, converged, iters: cap, grad_norm }
    }

    /// `next + coef (next - prev)`; predictions are linear in `B` so no new
    /// product with the design is needed.
    fn extrapolate(&self, next: &Iterate, prev: &Iterate, coef: f64, penalty: Penalty) -> Iterate {
        let b = &next.b + (&next.b - &prev.b) * coef;
        let fitted = &next.fitted + (&next.fitted - &prev.fitted) * coef;
        self.complete(b, fitted, penalty)
    }

    /// Minimizes `f(B) + (lambda/2) ||B||_F^2` (intercept included) by MM,
    /// starting from `start` (zeros when `None`).
    pub fn ridge_init(&self, start: Option<&CoefficientMatrix>) -> Result<FitResult> {
        let b0 = match start {
            Some(b) => self.stacked(b)?,
            None => self.zero_start().stacked(),
        };
        let cap = self.config.max_inner.saturating_mul(self.config.max_outer);
        let mut momentum = 1;
        let out = self.minimize(
            self.evaluate(b0, Penalty::Ridge),
            Penalty::Ridge,
            self.config.lambda_init,
            cap,
            &mut momentum,
        );
        Ok(FitResult {
            coefficients: self.unstack(&out.iterate.b),
            k: self.n_features,
            converged: out.converged,
            outer_iters: 1,
            inner_iters_total: out.iters,
            final_distance: 0.0,
            final_gradient_norm: out.grad_norm,
            distance_history: vec![0.0],
        })
    }

    /// Proximal distance iteration for model size `k` from `start`.
    ///
    /// With `k >= p` the distance penalty vanishes and the ridge-regularized
    /// fit is returned instead.
    pub fn fit(&self, k: usize, start: &CoefficientMatrix) -> Result<FitResult> {
        if k > self.n_features {
            return Err(VdaError::config(format!(
                "model size k = {k} exceeds the number of features p = {}",
                self.n_features
            )));
        }
        let b0 = self.stacked(start)?;
        if k == self.n_features {
            return self.ridge_init(Some(start));
        }
        let penalty = Penalty::Sparse(k);
        let mut cur = self.evaluate(b0, penalty);
        let mut q_prev = cur.dist2.sqrt();
        let mut momentum = 1;
        let mut history = Vec::new();
        let mut inner_total = 0;
        let mut converged = false;
        let mut grad_norm = f64::NAN;
        let mut outer = 0;
        for t in 0..self.config.max_outer {
            outer = t + 1;
            let rho = self.config.annealing.rho(t);
            let out = self.minimize(cur, penalty, rho, self.config.max_inner, &mut momentum);
            cur = out.iterate;
            inner_total += out.iters;
            grad_norm = out.grad_norm;
            let q = cur.dist2.sqrt();
            history.push(q);
            if q < self.config.delta_d || (q - q_prev).abs() < self.config.delta_q * (1.0 + q_prev) {
                converged = true;
                break;
            }
            q_prev = q;
        }
        let final_distance = cur.dist2.sqrt();
        let mut coefficients = self.unstack(&cur.proj);
        if self.config.debias {
            coefficients = self.debias(&coefficients)?;
        }
        Ok(FitResult {
            coefficients,
            k,
            converged,
            outer_iters: outer,
            inner_iters_total: inner_total,
            final_distance,
            final_gradient_norm: grad_norm,
            distance_history: history,
        })
    }

    /// Ridge refit restricted to the support of `b`.
    fn debias(&self, b: &CoefficientMatrix) -> Result<CoefficientMatrix> {
        let active = sparsity::support(b.slopes(), 0.0);
        if active.is_empty() && !self.config.intercept {
            return Ok(b.clone());
        }
        let off = self.offset();
        let cols: Vec<usize> = active.iter().map(|&j| j + off).collect();
        let x_sub = self.design.select_columns(&cols);
        let sub = Problem::new(&x_sub, &self.y, &SolverConfig { debias: false, ..self.config.clone() })?;
        let mut start_slopes = DMatrix::zeros(active.len(), self.dim());
        for (r, &j) in active.iter().enumerate() {
            start_slopes.row_mut(r).copy_from(&b.slopes().row(j));
        }
        let start = CoefficientMatrix::new(start_slopes, b.intercept().cloned())?;
        let refit = sub.ridge_init(Some(&start))?.coefficients;
        let mut slopes = DMatrix::zeros(self.n_features, self.dim());
        for (r, &j) in active.iter().enumerate() {
            slopes.row_mut(j).copy_from(&refit.slopes().row(r));
        }
        CoefficientMatrix::new(slopes, refit.intercept().cloned())
    }

    /// Fits every size in `grid` (strictly decreasing, each `<= p`). The
    /// first fit starts from the ridge solution; later fits start from
    /// their predecessor.
    pub fn path(&self, grid: &[usize]) -> Result<SolutionPath> {
        validate_grid(grid, self.n_features)?;
        let ridge = self.ridge_init(None)?;
        let mut entries: Vec<PathEntry> = Vec::with_capacity(grid.len());
        for &k in grid {
            let start = entries.last().map_or(&ridge.coefficients, |e| &e.fit.coefficients);
            let fit = if k == self.n_features {
                ridge.clone()
            } else {
                self.fit(k, start)?
            };
            entries.push(PathEntry { k, fit });
        }
        Ok(SolutionPath { entries })
    }

    /// One un-accelerated MM step for `f_rho` with model size `k`.
    pub fn mm_map(&self, b: &CoefficientMatrix, k: usize, rho: f64) -> Result<CoefficientMatrix> {
        let it = self.evaluate(self.stacked(b)?, Penalty::Sparse(k));
        Ok(self.unstack(&self.mm_step(&it, rho, None)))
    }

    /// `f_rho(B)` for model size `k`.
    pub fn objective(&self, b: &CoefficientMatrix, k: usize, rho: f64) -> Result<f64> {
        Ok(self.evaluate(self.stacked(b)?, Penalty::Sparse(k)).objective(rho))
    }

    /// `||grad f_rho(B)||_F` for model size `k`.
    pub fn gradient_norm(&self, b: &CoefficientMatrix, k: usize, rho: f64) -> Result<f64> {
        let it = self.evaluate(self.stacked(b)?, Penalty::Sparse(k));
        Ok(self.gradient(&it, rho).norm())
    }

    /// Predicted points `XB (+ b0)` for the training design.
    pub fn fitted(&self, b: &CoefficientMatrix) -> Result<DMatrix<f64>> {
        Ok(&self.design * self.stacked(b)?)
    }
}

pub(crate) fn validate_grid(grid: &[usize], p: usize) -> Result<()> {
    if grid.is_empty() {
        return Err(VdaError::config("the model-size grid is empty"));
    }
    if let Some(&k) = grid.iter().find(|&&k| k > p) {
        return Err(VdaError::config(format!("grid value {k} exceeds the maximum model size {p}")));
    }
    if grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(VdaError::config("the model-size grid must be strictly decreasing"));
    }
    Ok(())
}

/// Ridge-regularized starting point for raw features `x` and encoded
/// responses `y`.
pub fn ridge_init(x: &DMatrix<f64>, y: &DMatrix<f64>, config: &SolverConfig) -> Result<FitResult> {
    Problem::new(x, y, config)?.ridge_init(None)
}

/// Fits a model with at most `k` active features starting from `start`.
pub fn proximal_distance_fit(
    x: &DMatrix<f64>,
    y: &DMatrix<f64>,
    k: usize,
    config: &SolverConfig,
    start: &CoefficientMatrix,
) -> Result<FitResult> {
    Problem::new(x, y, config)?.fit(k, start)
}

/// Warm-started fits over a strictly decreasing grid of model sizes.
pub fn solution_path(
    x: &DMatrix<f64>,
    y: &DMatrix<f64>,
    grid: &[usize],
    config: &SolverConfig,
) -> Result<SolutionPath> {
    Problem::new(x, y, config)?.path(grid)
}
