#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sparse_vda::geometry::LabelCodec;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

/// Random labels that use every class at least once.
pub fn labels(rng: &mut ChaCha8Rng, n: usize, c: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (0..n).map(|i| if i < c { i } else { rng.random_range(0..c) }).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        out.swap(i, j);
    }
    out
}

pub fn codec(c: usize) -> LabelCodec {
    let names: Vec<String> = (0..c).map(|j| format!("class{j}")).collect();
    LabelCodec::new(&names).unwrap()
}

/// Design, encoded responses and labels for a small random problem.
pub fn problem(seed: u64, n: usize, p: usize, c: usize) -> (DMatrix<f64>, DMatrix<f64>, Vec<usize>) {
    let mut r = rng(seed);
    let x = uniform(&mut r, n, p);
    let y_idx = labels(&mut r, n, c);
    let y = codec(c).encode_indices(&y_idx).unwrap();
    (x, y, y_idx)
}

pub fn rel_err(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}
