mod common;

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use proptest::prelude::*;
use sparse_vda::dataset::LabeledDataset;
use sparse_vda::datagen::{gen_clouds, gen_waveform};
use sparse_vda::model_selection::{
    default_grid, equal_tailed_interval, partition, run_cv, CvMode, CvPlan, Standardizer, TestSplit,
};
use sparse_vda::solver::SolverConfig;

fn plan(folds: usize, replicates: usize, test: TestSplit, seed: u64) -> CvPlan {
    CvPlan { replicates, folds, test, grid: vec![0], seed }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn folds_partition_the_cv_subset(seed in any::<u64>(), n in 40usize..160, folds in 2usize..6, frac in 0.1f64..0.4) {
        let data = gen_clouds(n, 0.3, seed).unwrap().dataset;
        prop_assume!(data.class_counts().iter().all(|&c| c >= 2 * folds + 2));
        let plan = plan(folds, 3, TestSplit::Fraction(frac), seed);
        let parts = match partition(&data, &plan) {
            Ok(p) => p,
            Err(_) => return Ok(()),
        };
        prop_assert_eq!(parts.len(), 3);
        let test: BTreeSet<usize> = parts[0].test.iter().copied().collect();
        for part in &parts {
            // the test set is drawn once
            prop_assert_eq!(&part.test, &parts[0].test);
            let cv: BTreeSet<usize> = part.cv.iter().copied().collect();
            prop_assert!(cv.is_disjoint(&test));
            prop_assert_eq!(cv.len() + test.len(), n);
            let mut covered = BTreeSet::new();
            for (train, validation) in &part.folds {
                let tr: BTreeSet<usize> = train.iter().copied().collect();
                let va: BTreeSet<usize> = validation.iter().copied().collect();
                prop_assert!(tr.is_disjoint(&va));
                prop_assert!(tr.is_disjoint(&test) && va.is_disjoint(&test));
                prop_assert_eq!(tr.len() + va.len(), cv.len());
                prop_assert!(covered.is_disjoint(&va));
                covered.extend(va);
            }
            prop_assert_eq!(&covered, &cv);
            // per-class validation counts differ by at most one between folds
            for class in 0..data.n_classes() {
                let counts: Vec<usize> = part.folds.iter()
                    .map(|(_, v)| v.iter().filter(|&&i| data.labels()[i] == class).count())
                    .collect();
                prop_assert!(counts.iter().max().unwrap() - counts.iter().min().unwrap() <= 1);
            }
        }
    }

    #[test]
    fn standardizer_round_trips(seed in any::<u64>(), n in 2usize..20, p in 1usize..6) {
        let mut r = common::rng(seed);
        let x = common::uniform(&mut r, n, p) * 3.0 + DMatrix::from_element(n, p, 5.0);
        let s = Standardizer::fit(&x).unwrap();
        let z = s.apply(&x).unwrap();
        for j in 0..p {
            let mean = z.column(j).mean();
            prop_assert!(mean.abs() < 1e-10);
        }
        let b = sparse_vda::risk::CoefficientMatrix::new(common::uniform(&mut r, p, 2), Some(nalgebra::DVector::from_vec(vec![0.3, -0.1]))).unwrap();
        let raw = s.unstandardize(&b).unwrap();
        prop_assert!((raw.predict(&x).unwrap() - b.predict(&z).unwrap()).norm() < 1e-9);
    }

    #[test]
    fn interval_brackets_the_median(values in prop::collection::vec(-10.0f64..10.0, 1..40)) {
        let i = equal_tailed_interval(&values, 0.95).unwrap();
        prop_assert!(i.lower <= i.median && i.median <= i.upper);
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(i.lower >= min && i.upper <= max);
    }
}

#[test]
fn partition_does_not_depend_on_the_grid() {
    let data = gen_waveform(150, 2).unwrap().dataset;
    let mut a = plan(4, 2, TestSplit::Size(30), 5);
    let mut b = a.clone();
    a.grid = vec![21, 10, 0];
    b.grid = vec![3];
    assert_eq!(partition(&data, &a).unwrap(), partition(&data, &b).unwrap());
}

#[test]
fn every_size_is_scored_on_the_same_folds() {
    let data = gen_waveform(150, 2).unwrap().dataset;
    let plan = CvPlan { grid: vec![21, 6, 0], ..plan(3, 2, TestSplit::Size(30), 1) };
    let report = run_cv(&data, &plan, &SolverConfig::default(), CvMode::Linear).unwrap();
    assert_eq!(report.records.len(), 2 * 3 * 3);
    for chunk in report.records.chunks(3) {
        let (r, f) = (chunk[0].replicate, chunk[0].fold);
        assert!(chunk.iter().all(|rec| rec.replicate == r && rec.fold == f));
        let ks: Vec<usize> = chunk.iter().map(|rec| rec.k).collect();
        assert_eq!(ks, vec![21, 6, 0]);
    }
    for rep in &report.replicates {
        assert!(plan.grid.contains(&rep.k_opt));
    }
}

#[test]
fn test_rows_do_not_leak_into_training() {
    let data = gen_waveform(150, 3).unwrap().dataset;
    let plan = CvPlan { grid: vec![21, 5], ..plan(3, 2, TestSplit::Size(30), 4) };
    let test = partition(&data, &plan).unwrap()[0].test.clone();
    let mut x = data.x().clone();
    for &i in &test {
        for j in 0..x.ncols() {
            x[(i, j)] += 1e4;
        }
    }
    let shifted = LabeledDataset::from_indices(x, data.labels().to_vec(), data.codec().clone()).unwrap();
    let a = run_cv(&data, &plan, &SolverConfig::default(), CvMode::Linear).unwrap();
    let b = run_cv(&shifted, &plan, &SolverConfig::default(), CvMode::Linear).unwrap();
    for (ra, rb) in a.records.iter().zip(&b.records) {
        assert_eq!(ra.train_error, rb.train_error);
        assert_eq!(ra.validation_error, rb.validation_error);
    }
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let data = gen_clouds(120, 0.3, 8).unwrap().dataset;
    let plan = CvPlan { grid: vec![40, 10, 0], ..plan(3, 2, TestSplit::Size(40), 2) };
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_cv(&data, &plan, &SolverConfig::default(), CvMode::Kernel { gamma: None }).unwrap())
    };
    assert_eq!(run(1), run(3));
}

#[test]
fn too_few_samples_per_class() {
    let x = DMatrix::from_fn(9, 2, |i, j| (i * 3 + j) as f64);
    let data = LabeledDataset::new(x, &["a", "a", "a", "a", "b", "b", "b", "b", "c"]).unwrap();
    let plan = plan(2, 1, TestSplit::Size(2), 0);
    assert!(partition(&data, &plan).is_err());
}

#[test]
fn default_grid_shapes() {
    assert_eq!(default_grid(3), vec![3, 2, 1, 0]);
    let g = default_grid(1000);
    assert_eq!(g[0], 1000);
    assert_eq!(*g.last().unwrap(), 0);
    assert!(g.windows(2).all(|w| w[0] > w[1]));
}
