//! Sparse vertex discriminant analysis.
//!
//! Classes are encoded as the vertices of a regular simplex and a sample is
//! assigned to the vertex nearest its predicted point. Models are fit under
//! an epsilon-insensitive loss with a hard cap on the number of active
//! features (or, for kernel models, support points) by a proximal distance
//! algorithm.
//!
//! ```
//! use sparse_vda::datagen::gen_tenclouds;
//! use sparse_vda::model_selection::Standardizer;
//! use sparse_vda::solver::{solution_path, SolverConfig};
//!
//! let sim = gen_tenclouds(150, 8, 3, 3.0, 1.0, 7).unwrap();
//! let x = Standardizer::fit(sim.dataset.x()).unwrap().apply(sim.dataset.x()).unwrap();
//! let path = solution_path(&x, &sim.dataset.response(), &[8, 3], &SolverConfig::default()).unwrap();
//! let fit = path.get(3).unwrap();
//! assert!(sparse_vda::sparsity::support(fit.coefficients.slopes(), 0.0).len() <= 3);
//! ```
//!
//! A guide with longer examples lives in the `book/` directory.

pub mod cli;
pub mod datagen;
pub mod dataset;
pub mod error;
pub mod geometry;
pub mod kernel;
pub mod model;
pub mod model_selection;
pub mod risk;
pub mod solver;
pub mod sparsity;

pub use error::{Result, VdaError};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/encoding.md")]
    mod encoding {}
    #[doc = include_str!("../../../book/src/fitting.md")]
    mod fitting {}
    #[doc = include_str!("../../../book/src/kernels.md")]
    mod kernels {}
    #[doc = include_str!("../../../book/src/cross_validation.md")]
    mod cross_validation {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
