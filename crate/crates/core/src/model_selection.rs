//! Standardization, error metrics and repeated cross validation.
//!
//! [`run_cv`] holds out a stratified test subset once, then for every
//! replicate reshuffles the remaining samples into stratified folds. Each
//! fold standardizes with training statistics, fits a warm-started path over
//! the model-size grid and scores the training, validation and test subsets.
//! Fold-averaged validation error picks the replicate's optimal size.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;
use crate::error::{Result, VdaError};
use crate::geometry::VertexSet;
use crate::kernel::{self, KernelSpec};
use crate::risk::CoefficientMatrix;
use crate::solver::{self, Problem, SolverConfig};
use crate::sparsity;

/// Z-score transform with training means and sample standard deviations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: DVector<f64>,
    /// Sample standard deviations, with zero replaced by one.
    pub scale: DVector<f64>,
}

impl Standardizer {
    pub fn fit(x: &DMatrix<f64>) -> Result<Self> {
        let n = x.nrows();
        if n < 2 {
            return Err(VdaError::input("standardization needs at least two samples"));
        }
        let p = x.ncols();
        let mut mean = DVector::zeros(p);
        let mut scale = DVector::zeros(p);
        for j in 0..p {
            let col = x.column(j);
            let mu = col.sum() / n as f64;
            let var = col.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / (n - 1) as f64;
            mean[j] = mu;
            scale[j] = if var > 0.0 { var.sqrt() } else { 1.0 };
        }
        Ok(Self { mean, scale })
    }

    pub fn identity(p: usize) -> Self {
        Self {
            mean: DVector::zeros(p),
            scale: DVector::from_element(p, 1.0),
        }
    }

    pub fn n_features(&self) -> usize {
        self.mean.len()
    }

    pub fn apply(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if x.ncols() != self.n_features() {
            return Err(VdaError::shape(format!(
                "standardizer has {} features, data has {}",
                self.n_features(),
                x.ncols()
            )));
        }
        let mut out = x.clone();
        for (j, mut col) in out.column_iter_mut().enumerate() {
            let (mu, s) = (self.mean[j], self.scale[j]);
            col.apply(|v| *v = (*v - mu) / s);
        }
        Ok(out)
    }

    /// Coefficients acting on raw features that reproduce the predictions of
    /// `b`, which acts on standardized features. The result always carries an
    /// intercept.
    pub fn unstandardize(&self, b: &CoefficientMatrix) -> Result<CoefficientMatrix> {
        if b.n_features() != self.n_features() {
            return Err(VdaError::shape("coefficient rows do not match the standardizer"));
        }
        let mut slopes = b.slopes().clone();
        let mut intercept = b.intercept().cloned().unwrap_or_else(|| DVector::zeros(b.dim()));
        for j in 0..self.n_features() {
            let mut row = slopes.row_mut(j);
            row /= self.scale[j];
            for k in 0..b.dim() {
                intercept[k] -= self.mean[j] * row[k];
            }
        }
        CoefficientMatrix::new(slopes, Some(intercept))
    }
}

/// Fraction of mismatched labels.
pub fn classification_error(predictions: &[usize], truth: &[usize]) -> Result<f64> {
    if predictions.len() != truth.len() {
        return Err(VdaError::shape(format!(
            "{} predictions for {} labels",
            predictions.len(),
            truth.len()
        )));
    }
    if truth.is_empty() {
        return Err(VdaError::input("classification error of an empty set"));
    }
    let wrong = predictions.iter().zip(truth).filter(|(a, b)| a != b).count();
    Ok(wrong as f64 / truth.len() as f64)
}

/// The `q`-quantile of sorted data, interpolating linearly between order
/// statistics at position `q (n - 1)`.
pub fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub median: f64,
    pub upper: f64,
}

/// Median and equal-tailed interval at `level` (e.g. 0.95 gives the 2.5th
/// and 97.5th percentiles).
pub fn equal_tailed_interval(values: &[f64], level: f64) -> Result<Interval> {
    if values.is_empty() {
        return Err(VdaError::input("interval of an empty sample"));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(VdaError::config(format!("interval level must lie in (0, 1), got {level}")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    Ok(Interval {
        lower: percentile_sorted(&sorted, tail),
        median: percentile_sorted(&sorted, 0.5),
        upper: percentile_sorted(&sorted, 1.0 - tail),
    })
}

/// Support threshold used for positive and negative calls.
pub const SUPPORT_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecoveryMetrics {
    /// `||B - B0||^2 / (p ||B0||^2)` over slope rows.
    pub relative_mse: f64,
    pub true_positives: usize,
    pub false_positives: usize,
    pub true_negatives: usize,
    pub false_negatives: usize,
    pub accuracy: f64,
}

/// Compares an estimate on the raw feature scale with the true slopes and
/// scores its accuracy on `data`.
pub fn recovery_metrics(
    estimate: &CoefficientMatrix,
    truth: &DMatrix<f64>,
    data: &LabeledDataset,
) -> Result<RecoveryMetrics> {
    let p = truth.nrows();
    if estimate.slopes().shape() != truth.shape() || data.n_features() != p {
        return Err(VdaError::shape(format!(
            "estimate is {:?}, truth is {:?}, data has {} features",
            estimate.slopes().shape(),
            truth.shape(),
            data.n_features()
        )));
    }
    let norm2 = truth.norm_squared();
    if norm2 == 0.0 {
        return Err(VdaError::UndefinedMse);
    }
    let relative_mse = (estimate.slopes() - truth).norm_squared() / (p as f64 * norm2);

    let est: Vec<usize> = sparsity::support(estimate.slopes(), SUPPORT_THRESHOLD);
    let actual: Vec<usize> = sparsity::support(truth, SUPPORT_THRESHOLD);
    let mut calls = [0usize; 4];
    for j in 0..p {
        let called = est.binary_search(&j).is_ok();
        let real = actual.binary_search(&j).is_ok();
        calls[usize::from(called) * 2 + usize::from(real)] += 1;
    }
    let predictions = data.codec().vertices().classify_rows(&estimate.predict(data.x())?)?;
    let accuracy = 1.0 - classification_error(&predictions, data.labels())?;
    Ok(RecoveryMetrics {
        relative_mse,
        true_positives: calls[3],
        false_positives: calls[2],
        false_negatives: calls[1],
        true_negatives: calls[0],
        accuracy,
    })
}

/// How much of the data to hold out for testing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestSplit {
    Size(usize),
    Fraction(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvPlan {
    pub replicates: usize,
    pub folds: usize,
    pub test: TestSplit,
    /// Strictly decreasing model sizes (features, or support points in
    /// kernel mode).
    pub grid: Vec<usize>,
    pub seed: u64,
}

impl CvPlan {
    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(VdaError::config("at least one replicate is required"));
        }
        if self.folds < 2 {
            return Err(VdaError::config("at least two folds are required"));
        }
        if let TestSplit::Fraction(f) = self.test {
            if !(0.0..1.0).contains(&f) {
                return Err(VdaError::config(format!("test fraction must lie in [0, 1), got {f}")));
            }
        }
        if self.grid.is_empty() {
            return Err(VdaError::config("the model-size grid is empty"));
        }
        if self.grid.windows(2).any(|w| w[1] >= w[0]) {
            return Err(VdaError::config("the model-size grid must be strictly decreasing"));
        }
        Ok(())
    }
}

/// Linear VDA on features, or kernel VDA on support points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CvMode {
    Linear,
    /// `gamma: None` applies the scale heuristic to each training fold.
    Kernel { gamma: Option<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvRecord {
    pub replicate: usize,
    pub fold: usize,
    pub k: usize,
    pub train_error: f64,
    pub validation_error: f64,
    pub test_error: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateResult {
    pub replicate: usize,
    pub k_opt: usize,
    pub train_error: f64,
    pub validation_error: f64,
    pub test_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvSummary {
    pub train_error: Interval,
    pub validation_error: Interval,
    pub test_error: Interval,
    pub k_opt: Interval,
    /// `100 (1 - k_opt / size)` where size is the largest possible model.
    pub sparsity_percent: Interval,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub mode: CvMode,
    pub grid: Vec<usize>,
    /// Largest admissible model size: features, or training samples.
    pub max_size: usize,
    pub n_test: usize,
    pub n_cv: usize,
    pub records: Vec<CvRecord>,
    pub replicates: Vec<ReplicateResult>,
    pub summary: CvSummary,
    pub unconverged_fits: usize,
}

/// Picks `size` indices stratified by class. Class quotas are proportional,
/// with leftover slots going to the largest remainders (lower class first).
fn stratified_sample(labels: &[usize], n_classes: usize, size: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = labels.len();
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (i, &l) in labels.iter().enumerate() {
        by_class[l].push(i);
    }
    let mut quota: Vec<usize> = by_class.iter().map(|c| c.len() * size / n).collect();
    let mut rest: Vec<(usize, usize)> = by_class
        .iter()
        .enumerate()
        .map(|(l, c)| ((c.len() * size) % n, l))
        .collect();
    rest.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut left = size - quota.iter().sum::<usize>();
    for &(_, l) in &rest {
        if left == 0 {
            break;
        }
        if quota[l] < by_class[l].len() {
            quota[l] += 1;
            left -= 1;
        }
    }
    let mut chosen = Vec::with_capacity(size);
    for (members, q) in by_class.iter_mut().zip(quota) {
        members.shuffle(rng);
        chosen.extend_from_slice(&members[..q]);
    }
    chosen.sort_unstable();
    chosen
}

/// Assigns each of `labels` a fold in `0..folds`: classes are shuffled
/// separately and dealt round-robin, so per-class fold sizes differ by at
/// most one.
fn stratified_folds(labels: &[usize], n_classes: usize, folds: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (i, &l) in labels.iter().enumerate() {
        by_class[l].push(i);
    }
    let mut assignment = vec![0; labels.len()];
    let mut next = 0;
    for members in by_class.iter_mut() {
        members.shuffle(rng);
        for &i in members.iter() {
            assignment[i] = next % folds;
            next += 1;
        }
    }
    assignment
}

/// Test indices and cross-validation folds for one replicate.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub test: Vec<usize>,
    pub cv: Vec<usize>,
    /// `(train, validation)` index sets into the full dataset, per fold.
    pub folds: Vec<(Vec<usize>, Vec<usize>)>,
}

fn replicate_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Index sets used by `run_cv`; exposed so the partition can be audited.
pub fn partition(data: &LabeledDataset, plan: &CvPlan) -> Result<Vec<Partition>> {
    plan.validate()?;
    let n = data.n_samples();
    let n_test = match plan.test {
        TestSplit::Size(s) => s,
        TestSplit::Fraction(f) => (f * n as f64).round() as usize,
    };
    if n_test >= n {
        return Err(VdaError::config(format!("test subset of {n_test} leaves no data out of {n}")));
    }
    let c = data.n_classes();
    let test = stratified_sample(data.labels(), c, n_test, &mut replicate_rng(plan.seed, 0));
    let mut is_test = vec![false; n];
    for &i in &test {
        is_test[i] = true;
    }
    let cv: Vec<usize> = (0..n).filter(|&i| !is_test[i]).collect();
    let cv_labels: Vec<usize> = cv.iter().map(|&i| data.labels()[i]).collect();

    let mut counts = vec![0usize; c];
    for &l in &cv_labels {
        counts[l] += 1;
    }
    if let Some(l) = counts.iter().position(|&m| m < 2) {
        return Err(VdaError::Stratification(format!(
            "class `{}` has {} sample(s) outside the test subset; every training fold needs at least one",
            data.codec().name(l),
            counts[l]
        )));
    }

    (0..plan.replicates)
        .map(|r| {
            let mut rng = replicate_rng(plan.seed, r as u64 + 1);
            let assignment = stratified_folds(&cv_labels, c, plan.folds, &mut rng);
            let folds = (0..plan.folds)
                .map(|f| {
                    let (mut train, mut val) = (Vec::new(), Vec::new());
                    for (pos, &i) in cv.iter().enumerate() {
                        if assignment[pos] == f {
                            val.push(i);
                        } else {
                            train.push(i);
                        }
                    }
                    (train, val)
                })
                .collect::<Vec<_>>();
            if let Some((f, _)) = folds.iter().enumerate().find(|(_, (_, v))| v.is_empty()) {
                return Err(VdaError::Stratification(format!(
                    "fold {} is empty: {} folds for {} samples",
                    f + 1,
                    plan.folds,
                    cv.len()
                )));
            }
            Ok(Partition {
                test: test.clone(),
                cv: cv.clone(),
                folds,
            })
        })
        .collect()
}

fn errors_for(vertices: &VertexSet, predicted: &DMatrix<f64>, truth: &[usize]) -> Result<f64> {
    classification_error(&vertices.classify_rows(predicted)?, truth)
}

struct FoldOutcome {
    /// `(train, validation, test, converged)` per grid entry.
    rows: Vec<(f64, f64, f64, bool)>,
}

fn run_fold(
    data: &LabeledDataset,
    train: &[usize],
    val: &[usize],
    test: &[usize],
    grid: &[usize],
    config: &SolverConfig,
    mode: CvMode,
) -> Result<FoldOutcome> {
    let pick = |idx: &[usize]| -> (DMatrix<f64>, Vec<usize>) {
        (data.x().select_rows(idx), idx.iter().map(|&i| data.labels()[i]).collect())
    };
    let (x_tr, y_tr) = pick(train);
    let (x_va, y_va) = pick(val);
    let (x_te, y_te) = pick(test);
    let present: std::collections::BTreeSet<usize> = y_tr.iter().copied().collect();
    if present.len() != data.n_classes() {
        return Err(VdaError::Stratification("a class is absent from a training fold".into()));
    }
    let std = Standardizer::fit(&x_tr)?;
    let (s_tr, s_va, s_te) = (std.apply(&x_tr)?, std.apply(&x_va)?, std.apply(&x_te)?);
    let vertices = data.codec().vertices();
    let response = data.codec().encode_indices(&y_tr)?;

    let (design, eval): (DMatrix<f64>, Box<dyn Fn(&DMatrix<f64>) -> Result<[DMatrix<f64>; 2]>>) = match mode {
        CvMode::Linear => {
            let (va, te) = (s_va.clone(), s_te.clone());
            (s_tr.clone(), Box::new(move |_| Ok([va.clone(), te.clone()])))
        }
        CvMode::Kernel { gamma } => {
            let gamma = match gamma {
                Some(g) => g,
                None => kernel::gamma_heuristic(&s_tr, &y_tr)?,
            };
            let spec = KernelSpec::rbf(gamma)?;
            let w_tr = kernel::kernel_matrix(&s_tr, &s_tr, &spec)?;
            let w_va = kernel::kernel_matrix(&s_va, &s_tr, &spec)?;
            let w_te = kernel::kernel_matrix(&s_te, &s_tr, &spec)?;
            (w_tr, Box::new(move |_| Ok([w_va.clone(), w_te.clone()])))
        }
    };
    let [d_va, d_te] = eval(&design)?;
    let problem = Problem::new(&design, &response, config)?;
    let path = problem.path(grid)?;
    let mut rows = Vec::with_capacity(grid.len());
    for entry in &path.entries {
        let b = &entry.fit.coefficients;
        let tr = errors_for(vertices, &b.predict(&design)?, &y_tr)?;
        let va = errors_for(vertices, &b.predict(&d_va)?, &y_va)?;
        let te = if y_te.is_empty() {
            f64::NAN
        } else {
            errors_for(vertices, &b.predict(&d_te)?, &y_te)?
        };
        rows.push((tr, va, te, entry.fit.converged));
    }
    Ok(FoldOutcome { rows })
}

/// Repeated, stratified cross validation over a grid of model sizes.
///
/// Results depend only on the data, plan, configuration and mode; the order
/// in which folds run in parallel does not affect the report.
pub fn run_cv(data: &LabeledDataset, plan: &CvPlan, config: &SolverConfig, mode: CvMode) -> Result<CvReport> {
    config.validate()?;
    let parts = partition(data, plan)?;
    let first = &parts[0];
    let max_size = match mode {
        CvMode::Linear => data.n_features(),
        CvMode::Kernel { .. } => first.folds.iter().map(|(t, _)| t.len()).min().unwrap_or(0),
    };
    solver::validate_grid(&plan.grid, max_size)?;

    let jobs: Vec<(usize, usize)> = (0..plan.replicates)
        .flat_map(|r| (0..plan.folds).map(move |f| (r, f)))
        .collect();
    let outcomes: Vec<Result<FoldOutcome>> = jobs
        .par_iter()
        .map(|&(r, f)| {
            let (train, val) = &parts[r].folds[f];
            run_fold(data, train, val, &parts[r].test, &plan.grid, config, mode)
        })
        .collect();

    let mut records = Vec::with_capacity(jobs.len() * plan.grid.len());
    let mut unconverged = 0;
    let g = plan.grid.len();
    let mut sums = vec![[0.0f64; 3]; plan.replicates * g];
    for (&(r, f), outcome) in jobs.iter().zip(outcomes) {
        let outcome = outcome?;
        for (gi, &(tr, va, te, ok)) in outcome.rows.iter().enumerate() {
            unconverged += usize::from(!ok);
            let s = &mut sums[r * g + gi];
            s[0] += tr;
            s[1] += va;
            s[2] += te;
            records.push(CvRecord {
                replicate: r + 1,
                fold: f + 1,
                k: plan.grid[gi],
                train_error: tr,
                validation_error: va,
                test_error: te,
                converged: ok,
            });
        }
    }

    let folds = plan.folds as f64;
    let replicates: Vec<ReplicateResult> = (0..plan.replicates)
        .map(|r| {
            let avg = |gi: usize, m: usize| sums[r * g + gi][m] / folds;
            // the grid is decreasing, so scanning from its end finds the
            // smallest k among ties
            let best = (0..g)
                .rev()
                .min_by(|&a, &b| avg(a, 1).total_cmp(&avg(b, 1)))
                .expect("grid is nonempty");
            ReplicateResult {
                replicate: r + 1,
                k_opt: plan.grid[best],
                train_error: avg(best, 0),
                validation_error: avg(best, 1),
                test_error: avg(best, 2),
            }
        })
        .collect();

    let column = |f: &dyn Fn(&ReplicateResult) -> f64| -> Result<Interval> {
        let v: Vec<f64> = replicates.iter().map(f).collect();
        equal_tailed_interval(&v, 0.95)
    };
    let size = max_size.max(1) as f64;
    let summary = CvSummary {
        train_error: column(&|r| r.train_error)?,
        validation_error: column(&|r| r.validation_error)?,
        test_error: column(&|r| r.test_error)?,
        k_opt: column(&|r| r.k_opt as f64)?,
        sparsity_percent: column(&|r| 100.0 * (1.0 - r.k_opt as f64 / size))?,
    };
    Ok(CvReport {
        mode,
        grid: plan.grid.clone(),
        max_size,
        n_test: first.test.len(),
        n_cv: first.cv.len(),
        records,
        replicates,
        summary,
        unconverged_fits: unconverged,
    })
}

/// `p, p - 1, ..., 0` for up to 100 sizes; beyond that 50 distinct sizes
/// spaced evenly on a log scale from `p` down to 1, followed by 0.
pub fn default_grid(p: usize) -> Vec<usize> {
    if p <= 100 {
        return (0..=p).rev().collect();
    }
    let mut grid: Vec<usize> = (0..49)
        .map(|i| {
            let t = i as f64 / 48.0;
            ((p as f64).ln() * (1.0 - t)).exp().round() as usize
        })
        .collect();
    grid.dedup();
    grid.push(0);
    grid
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standardizer_examples() {
        let x = DMatrix::from_row_slice(2, 2, &[0.0, 5.0, 2.0, 5.0]);
        let s = Standardizer::fit(&x).unwrap();
        assert_eq!(s.mean.as_slice(), &[1.0, 5.0]);
        assert!((s.scale[0] - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(s.scale[1], 1.0);
        let z = s.apply(&x).unwrap();
        assert!((z[(0, 0)] + 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(z.column(1).iter().copied().collect::<Vec<_>>(), vec![0.0, 0.0]);
        assert!(Standardizer::fit(&DMatrix::zeros(1, 3)).is_err());
    }

    #[test]
    fn unstandardized_coefficients_predict_identically() {
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 10.0, 2.0, 30.0, 4.0, 20.0]);
        let s = Standardizer::fit(&x).unwrap();
        let b = CoefficientMatrix::new(
            DMatrix::from_row_slice(2, 1, &[0.5, -1.5]),
            Some(DVector::from_element(1, 0.25)),
        )
        .unwrap();
        let raw = s.unstandardize(&b).unwrap();
        let a = b.predict(&s.apply(&x).unwrap()).unwrap();
        let c = raw.predict(&x).unwrap();
        assert!((a - c).norm() < 1e-12);
    }

    #[test]
    fn error_rates() {
        assert_eq!(classification_error(&[1, 2, 3], &[1, 2, 3]).unwrap(), 0.0);
        assert_eq!(classification_error(&[0, 0], &[1, 1]).unwrap(), 1.0);
        assert_eq!(classification_error(&[0, 1, 1, 1], &[1, 1, 1, 1]).unwrap(), 0.25);
        assert!(classification_error(&[], &[]).is_err());
    }

    #[test]
    fn intervals() {
        let i = equal_tailed_interval(&[4.0], 0.95).unwrap();
        assert_eq!((i.lower, i.median, i.upper), (4.0, 4.0, 4.0));
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        let i = equal_tailed_interval(&v, 0.95).unwrap();
        assert!((i.lower - 3.475).abs() < 1e-12);
        assert_eq!(i.median, 50.5);
        assert!((i.upper - 97.525).abs() < 1e-12);
        assert!(equal_tailed_interval(&[], 0.95).is_err());
    }

    #[test]
    fn default_grids() {
        assert_eq!(default_grid(3), vec![3, 2, 1, 0]);
        let g = default_grid(2000);
        assert_eq!(g[0], 2000);
        assert_eq!(*g.last().unwrap(), 0);
        assert!(g.windows(2).all(|w| w[1] < w[0]));
        assert!(g.len() <= 50);
    }

    #[test]
    fn stratified_sample_is_proportional() {
        let labels: Vec<usize> = (0..100).map(|i| usize::from(i >= 70)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = stratified_sample(&labels, 2, 10, &mut rng);
        assert_eq!(s.len(), 10);
        assert_eq!(s.iter().filter(|&&i| labels[i] == 1).count(), 3);
    }
}
