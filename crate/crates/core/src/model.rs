//! Fitted classifiers bundled with everything needed to predict from raw
//! features, and their JSON form.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Result, VdaError};
use crate::geometry::LabelCodec;
use crate::kernel::KernelModel;
use crate::model_selection::Standardizer;
use crate::risk::CoefficientMatrix;
use crate::solver::SolverConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Predictor {
    /// Coefficients acting on standardized features.
    Linear { coefficients: CoefficientMatrix },
    Kernel { model: KernelModel },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub version: String,
    pub class_names: Vec<String>,
    pub feature_names: Vec<String>,
    pub standardizer: Standardizer,
    pub epsilon: f64,
    /// Requested model size (features, or support points).
    pub k: usize,
    pub converged: bool,
    pub solver: SolverConfig,
    pub predictor: Predictor,
}

impl ModelFile {
    pub fn codec(&self) -> Result<LabelCodec> {
        LabelCodec::new(&self.class_names)
    }

    /// Points in vertex space for raw feature rows.
    pub fn decision_values(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let z = self.standardizer.apply(x)?;
        match &self.predictor {
            Predictor::Linear { coefficients } => coefficients.predict(&z),
            Predictor::Kernel { model } => model.decision_values(&z),
        }
    }

    /// Class indices for raw feature rows.
    pub fn predict(&self, x: &DMatrix<f64>) -> Result<Vec<usize>> {
        self.codec()?.vertices().classify_rows(&self.decision_values(x)?)
    }

    /// Class names for raw feature rows.
    pub fn predict_names(&self, x: &DMatrix<f64>) -> Result<Vec<String>> {
        Ok(self
            .predict(x)?
            .into_iter()
            .map(|j| self.class_names[j].clone())
            .collect())
    }

    /// Active feature names of a linear model; empty for kernel models.
    pub fn selected_features(&self) -> Vec<&str> {
        match &self.predictor {
            Predictor::Linear { coefficients } => crate::sparsity::support(coefficients.slopes(), 0.0)
                .into_iter()
                .map(|j| self.feature_names[j].as_str())
                .collect(),
            Predictor::Kernel { .. } => Vec::new(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: ModelFile = serde_json::from_str(text)?;
        model.check()?;
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    fn check(&self) -> Result<()> {
        let codec = self.codec()?;
        let p = self.feature_names.len();
        if self.standardizer.n_features() != p {
            return Err(VdaError::input("model file: standardizer and feature names disagree"));
        }
        let (dim, rows, expected) = match &self.predictor {
            Predictor::Linear { coefficients } => (coefficients.dim(), coefficients.n_features(), p),
            Predictor::Kernel { model } => {
                if model.support_points.ncols() != p || model.support_points.nrows() != model.support_indices.len() {
                    return Err(VdaError::input("model file: support points do not match the features"));
                }
                (model.coefficients.dim(), model.coefficients.n_features(), model.support_indices.len())
            }
        };
        if dim != codec.vertices().dim() || rows != expected {
            return Err(VdaError::input("model file: coefficient shape does not match classes or features"));
        }
        Ok(())
    }
}
