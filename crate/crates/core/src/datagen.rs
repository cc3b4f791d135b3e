//! Seeded simulators for benchmark classification problems.
//!
//! Every generator is a pure function of its parameters and seed. Class names
//! are the 1-based class numbers, zero-padded to a common width so that
//! lexicographic order matches numeric order.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;
use crate::error::{Result, VdaError};
use crate::geometry::{LabelCodec, VertexSet};

/// Which simulator to run, with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "recipe", rename_all = "snake_case")]
pub enum Recipe {
    Clouds { sigma: f64 },
    Circles { classes: usize, p_bayes: f64 },
    Waveform,
    Tenclouds { features: usize, classes: usize, d: f64, sigma: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSpec {
    #[serde(flatten)]
    pub recipe: Recipe,
    pub n: usize,
    pub seed: u64,
}

/// Coefficients that generated the labels, when the recipe has them.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    /// `p x (c - 1)` slope block; there is no intercept.
    pub coefficients: DMatrix<f64>,
    /// Indices of the nonzero rows.
    pub support: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct SimOutput {
    pub dataset: LabeledDataset,
    pub ground_truth: Option<GroundTruth>,
}

pub fn generate(spec: &SimSpec) -> Result<SimOutput> {
    match spec.recipe {
        Recipe::Clouds { sigma } => gen_clouds(spec.n, sigma, spec.seed),
        Recipe::Circles { classes, p_bayes } => gen_circles(spec.n, classes, p_bayes, spec.seed),
        Recipe::Waveform => gen_waveform(spec.n, spec.seed),
        Recipe::Tenclouds {
            features,
            classes,
            d,
            sigma,
        } => gen_tenclouds(spec.n, features, classes, d, sigma, spec.seed),
    }
}

fn codec(c: usize) -> Result<LabelCodec> {
    let width = c.to_string().len();
    let names: Vec<String> = (1..=c).map(|j| format!("{j:0width$}")).collect();
    LabelCodec::new(&names)
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(VdaError::config("sample size must be at least 1"));
    }
    Ok(())
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(VdaError::config(format!("{name} must be positive, got {v}")))
    }
}

fn finish(x: DMatrix<f64>, labels: Vec<usize>, c: usize) -> Result<LabeledDataset> {
    LabeledDataset::from_indices(x, labels, codec(c)?)
}

/// Angles of the two cloud centres for each of the three classes.
const CLOUD_ANGLES: [[f64; 2]; 3] = [[0.0, PI], [PI / 3.0, 4.0 * PI / 3.0], [2.0 * PI / 3.0, 5.0 * PI / 3.0]];

/// Six Gaussian clouds on the unit circle, two per class, with covariance
/// `sigma^2 I`.
pub fn gen_clouds(n: usize, sigma: f64, seed: u64) -> Result<SimOutput> {
    check_n(n)?;
    positive("sigma", sigma)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = DMatrix::zeros(n, 2);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let class = rng.random_range(0..3);
        let theta = CLOUD_ANGLES[class][rng.random_range(0..2)];
        let e1: f64 = rng.sample(StandardNormal);
        let e2: f64 = rng.sample(StandardNormal);
        x[(i, 0)] = theta.cos() + sigma * e1;
        x[(i, 1)] = theta.sin() + sigma * e2;
        labels.push(class);
    }
    Ok(SimOutput {
        dataset: finish(x, labels, 3)?,
        ground_truth: None,
    })
}

/// Nested rings: a point uniform on the disk `x^2 + y^2 < c` belongs to
/// ring `r = ceil(x^2 + y^2)`, and keeps that class with probability
/// `p_bayes`, otherwise takes one of the other classes uniformly.
pub fn gen_circles(n: usize, c: usize, p_bayes: f64, seed: u64) -> Result<SimOutput> {
    check_n(n)?;
    if c < 2 {
        return Err(VdaError::InvalidClassCount(c));
    }
    if !(p_bayes > 0.0 && p_bayes <= 1.0) {
        return Err(VdaError::config(format!("p_bayes must lie in (0, 1], got {p_bayes}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cf = c as f64;
    let mut x = DMatrix::zeros(n, 2);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let u: f64 = rng.random();
        let angle = 2.0 * PI * rng.random::<f64>();
        let radius = (cf * u).sqrt();
        x[(i, 0)] = radius * angle.cos();
        x[(i, 1)] = radius * angle.sin();
        let s = x[(i, 0)] * x[(i, 0)] + x[(i, 1)] * x[(i, 1)];
        // ring index r in 1..=c, stored 0-based
        let ring = (s.ceil() as usize).clamp(1, c) - 1;
        let keep = p_bayes >= 1.0 || rng.random::<f64>() < p_bayes;
        let class = if keep {
            ring
        } else {
            let other = rng.random_range(0..c - 1);
            if other >= ring {
                other + 1
            } else {
                other
            }
        };
        labels.push(class);
    }
    Ok(SimOutput {
        dataset: finish(x, labels, c)?,
        ground_truth: None,
    })
}

/// Triangular waveform centred at 11: `max(6 - |j - 11|, 0)`.
pub fn h1(j: f64) -> f64 {
    (6.0 - (j - 11.0).abs()).max(0.0)
}

/// `h1` shifted to centre 15.
pub fn h2(j: f64) -> f64 {
    h1(j - 4.0)
}

/// `h1` shifted to centre 7.
pub fn h3(j: f64) -> f64 {
    h1(j + 4.0)
}

pub const WAVEFORM_FEATURES: usize = 21;

/// One waveform sample for class `class` (0-based), mixing weight `u` and
/// per-feature noise `noise`.
pub fn waveform_sample(class: usize, u: f64, noise: &[f64; WAVEFORM_FEATURES]) -> Result<[f64; WAVEFORM_FEATURES]> {
    let (ha, hb): (fn(f64) -> f64, fn(f64) -> f64) = match class {
        0 => (h1, h2),
        1 => (h1, h3),
        2 => (h2, h3),
        _ => return Err(VdaError::UnknownClass(class.to_string())),
    };
    let mut out = [0.0; WAVEFORM_FEATURES];
    for (j, v) in out.iter_mut().enumerate() {
        let jf = (j + 1) as f64;
        *v = u * ha(jf) + (1.0 - u) * hb(jf) + noise[j];
    }
    Ok(out)
}

/// Three classes of noisy convex combinations of two triangular waveforms
/// over 21 features.
pub fn gen_waveform(n: usize, seed: u64) -> Result<SimOutput> {
    check_n(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = DMatrix::zeros(n, WAVEFORM_FEATURES);
    let mut labels = Vec::with_capacity(n);
    let mut noise = [0.0; WAVEFORM_FEATURES];
    for i in 0..n {
        let class = rng.random_range(0..3);
        let u: f64 = rng.random();
        for e in noise.iter_mut() {
            *e = rng.sample(StandardNormal);
        }
        let row = waveform_sample(class, u, &noise)?;
        for (j, v) in row.iter().enumerate() {
            x[(i, j)] = *v;
        }
        labels.push(class);
    }
    Ok(SimOutput {
        dataset: finish(x, labels, 3)?,
        ground_truth: None,
    })
}

fn sgn(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `a_l` for classes `l = 1..=c`.
pub fn tenclouds_signs(c: usize) -> Vec<f64> {
    (1..=c)
        .map(|l| {
            let theta = PI / 3.0 + 2.0 * (l - 1) as f64 * PI / c as f64;
            if l % 2 == 0 {
                theta.cos()
            } else {
                theta.sin()
            }
        })
        .collect()
}

/// Sparse recovery benchmark with `c` causal features out of `p`.
///
/// Each sample draws a mixture component `l` uniformly, then
/// `x ~ N(mu_l, Sigma)` where the first `c` coordinates have mean
/// `d * sgn(a_l)` and variance `sigma`, and the rest have mean 0 and
/// variance `1 / sigma`. Row `j < c` of the true coefficients is
/// `sgn(a_j) v_j / c`; labels are the nearest vertex to `B0' x`.
pub fn gen_tenclouds(n: usize, p: usize, c: usize, d: f64, sigma: f64, seed: u64) -> Result<SimOutput> {
    check_n(n)?;
    if c < 2 {
        return Err(VdaError::InvalidClassCount(c));
    }
    if p < c {
        return Err(VdaError::config(format!("need at least as many features as classes (p = {p}, c = {c})")));
    }
    positive("d", d)?;
    positive("sigma", sigma)?;

    let vertices = VertexSet::new(c)?;
    let a = tenclouds_signs(c);
    let mut b0 = DMatrix::zeros(p, c - 1);
    for j in 0..c {
        let scale = sgn(a[j]) / c as f64;
        for k in 0..c - 1 {
            b0[(j, k)] = scale * vertices.matrix()[(j, k)];
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (sd_causal, sd_noise) = (sigma.sqrt(), (1.0 / sigma).sqrt());
    let mut x = DMatrix::zeros(n, p);
    for i in 0..n {
        let component = rng.random_range(0..c);
        let mean = d * sgn(a[component]);
        for j in 0..p {
            let e: f64 = rng.sample(StandardNormal);
            x[(i, j)] = if j < c { mean + sd_causal * e } else { sd_noise * e };
        }
    }
    let labels = vertices.classify_rows(&(&x * &b0))?;
    let support = (0..c).filter(|&j| a[j] != 0.0).collect();
    Ok(SimOutput {
        dataset: finish(x, labels, c)?,
        ground_truth: Some(GroundTruth {
            coefficients: b0,
            support,
        }),
    })
}
