//! Binary soft-margin SVM with an RBF kernel.

mod cv;
mod kernel;
mod model_io;
mod normalize;
pub mod smo;


use std::collections::BTreeMap;

use crate::error::{Error, Result};

pub use cv::{
    cross_validate, default_c_grid, default_gamma_grid, grid_search, stratified_folds, CvResult,
    GridCell, GridResult,
};
pub use kernel::{gram, rbf, squared_distance, KernelParams, DEFAULT_GAMMA};
pub use model_io::MODEL_HEADER;
pub use normalize::{apply_normalization, fit_normalization, NormalizationParams};

pub const DEFAULT_C: f64 = 32.0;
pub const DEFAULT_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub c: f64,
    pub kernel: KernelParams,
    pub kkt_tolerance: f64,
    /// Iteration budget in passes of `n` pair updates; `None` means `10·n`.
    pub max_passes: Option<usize>,
    /// Drives fold assignment in cross-validation. The solver itself has no
    /// random choices.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            c: DEFAULT_C,
            kernel: KernelParams::default(),
            kkt_tolerance: DEFAULT_TOLERANCE,
            max_passes: None,
            seed: 42,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidConfig(format!("C must be positive, got {}", self.c)));
        }
        if !(self.kkt_tolerance > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "tolerance must be positive, got {}",
                self.kkt_tolerance
            )));
        }
        if self.max_passes == Some(0) {
            return Err(Error::InvalidConfig("max_passes must be positive".into()));
        }
        self.kernel.validate()
    }

    pub fn max_iterations(&self, n: usize) -> usize {
        self.max_passes.unwrap_or(10 * n).saturating_mul(n.max(1))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    /// Normalized training rows with `α > 0`.
    pub support_vectors: Vec<Vec<f64>>,
    /// `αᵢyᵢ` for each support vector.
    pub coefficients: Vec<f64>,
    pub bias: f64,
    pub c: f64,
    pub kernel: KernelParams,
    pub normalization: NormalizationParams,
    /// Fingerprint of the feature manifest the model was trained on; empty
    /// when the caller did not set one.
    pub fingerprint: String,
    /// Free-form key/value pairs persisted with the model.
    pub metadata: BTreeMap<String, String>,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub label: i8,
    pub decision: f64,
}

fn check_matrix(matrix: &[Vec<f64>], labels: &[i8]) -> Result<usize> {
    if matrix.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: matrix.len(),
            right: labels.len(),
        });
    }
    let dim = matrix.first().map_or(0, Vec::len);
    for (r, row) in matrix.iter().enumerate() {
        if row.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: row.len(),
            });
        }
        if let Some(column) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: r, column });
        }
    }
    if let Some(bad) = labels.iter().find(|&&l| l != 1 && l != -1) {
        return Err(Error::InvalidConfig(format!("labels must be -1 or +1, got {bad}")));
    }
    if !labels.contains(&1) || !labels.contains(&-1) {
        return Err(Error::SingleClass);
    }
    Ok(dim)
}

/// Trains on raw feature rows: fits min-max normalization, then solves the
/// dual on the normalized rows.
///
/// Rows are put in a canonical order before solving, so the learned decision
/// function does not depend on the order rows are given in.
pub fn train(matrix: &[Vec<f64>], labels: &[i8], config: &TrainConfig) -> Result<SvmModel> {
    config.validate()?;
    check_matrix(matrix, labels)?;
    let normalization = NormalizationParams::fit(matrix)?;
    let normalized = normalization.apply_all(matrix)?;
    train_normalized(&normalized, labels, config, normalization)
}

/// Trains on rows that are already normalized with `normalization`.
pub fn train_normalized(
    rows: &[Vec<f64>],
    labels: &[i8],
    config: &TrainConfig,
    normalization: NormalizationParams,
) -> Result<SvmModel> {
    config.validate()?;
    let dim = check_matrix(rows, labels)?;
    if dim != normalization.dimension() {
        return Err(Error::DimensionMismatch {
            expected: normalization.dimension(),
            actual: dim,
        });
    }
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_by(|&a, &b| {
        rows[a]
            .iter()
            .zip(&rows[b])
            .map(|(x, z)| x.total_cmp(z))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(labels[a].cmp(&labels[b]))
    });
    let rows: Vec<Vec<f64>> = order.iter().map(|&i| rows[i].clone()).collect();
    let y: Vec<f64> = order.iter().map(|&i| f64::from(labels[i])).collect();

    let source = smo::KernelSource::rbf(&rows, config.kernel.gamma);
    let sol = smo::solve(
        &source,
        &y,
        config.c,
        config.kkt_tolerance,
        config.max_iterations(rows.len()),
    );
    drop(source);

    let mut support_vectors = Vec::new();
    let mut coefficients = Vec::new();
    for (t, row) in rows.into_iter().enumerate() {
        if sol.alpha[t] > 0.0 {
            support_vectors.push(row);
            coefficients.push(sol.alpha[t] * y[t]);
        }
    }
    Ok(SvmModel {
        support_vectors,
        coefficients,
        bias: -sol.rho,
        c: config.c,
        kernel: config.kernel,
        normalization,
        fingerprint: String::new(),
        metadata: BTreeMap::new(),
        iterations: sol.iterations,
        converged: sol.converged,
    })
}

impl SvmModel {
    pub fn dimension(&self) -> usize {
        self.normalization.dimension()
    }

    pub fn with_fingerprint(mut self, fingerprint: impl Into<String>) -> Self {
        self.fingerprint = fingerprint.into();
        self
    }

    /// Decision value on a row that is already normalized.
    pub fn decision_normalized(&self, row: &[f64]) -> f64 {
        let g = self.kernel.gamma;
        self.support_vectors
            .iter()
            .zip(&self.coefficients)
            .map(|(sv, a)| a * (-g * squared_distance(sv, row)).exp())
            .sum::<f64>()
            + self.bias
    }

    /// Normalizes `row` with the training parameters and classifies it.
    pub fn predict(&self, row: &[f64]) -> Result<Prediction> {
        let x = self.normalization.apply(row)?;
        let decision = self.decision_normalized(&x);
        Ok(Prediction {
            label: if decision >= 0.0 { 1 } else { -1 },
            decision,
        })
    }

    pub fn predict_many(&self, matrix: &[Vec<f64>]) -> Result<Vec<Prediction>> {
        matrix.iter().map(|r| self.predict(r)).collect()
    }

    /// Fails unless `fingerprint` names the manifest the model was trained on.
    pub fn check_fingerprint(&self, fingerprint: &str) -> Result<()> {
        if self.fingerprint == fingerprint {
            Ok(())
        } else {
            Err(Error::FingerprintMismatch {
                model: self.fingerprint.clone(),
                features: fingerprint.to_string(),
            })
        }
    }
}

pub fn predict(model: &SvmModel, row: &[f64]) -> Result<Prediction> {
    model.predict(row)
}
