use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{train, TrainConfig};
use crate::error::{Error, Result};
use crate::experiments::metrics::{compute_metrics, MeanMetrics, Metrics};

/// Exponent step 2: `2^-5, 2^-3, …, 2^15`.
pub fn default_c_grid() -> Vec<f64> {
    (-5..=15).step_by(2).map(|e| 2f64.powi(e)).collect()
}

/// Exponent step 2: `2^-15, 2^-13, …, 2^3`.
pub fn default_gamma_grid() -> Vec<f64> {
    (-15..=3).step_by(2).map(|e| 2f64.powi(e)).collect()
}

/// Fold index for every row. Each class is shuffled with `seed` and dealt
/// round-robin, so every fold gets `⌊n_c/folds⌋` or one more of class `c`.
pub fn stratified_folds(labels: &[i8], folds: usize, seed: u64) -> Result<Vec<usize>> {
    if folds < 2 {
        return Err(Error::InvalidConfig(format!("need at least 2 folds, got {folds}")));
    }
    if let Some(bad) = labels.iter().find(|&&l| l != 1 && l != -1) {
        return Err(Error::InvalidConfig(format!("labels must be -1 or +1, got {bad}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0; labels.len()];
    let mut offset = 0;
    for class in [1i8, -1] {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.len() < folds {
            return Err(Error::ClassTooSmall {
                label: class,
                count: members.len(),
                folds,
            });
        }
        members.shuffle(&mut rng);
        for (k, &i) in members.iter().enumerate() {
            assignment[i] = (k + offset) % folds;
        }
        // Continue dealing where the previous class stopped, to even out fold sizes.
        offset = (offset + members.len()) % folds;
    }
    Ok(assignment)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    pub mean: MeanMetrics,
    pub folds: Vec<Metrics>,
}

fn run_folds(
    matrix: &[Vec<f64>],
    labels: &[i8],
    config: &TrainConfig,
    assignment: &[usize],
    folds: usize,
) -> Result<CvResult> {
    let mut per_fold = Vec::with_capacity(folds);
    for f in 0..folds {
        let (mut train_x, mut train_y, mut test_x, mut test_y) = (vec![], vec![], vec![], vec![]);
        for (i, &a) in assignment.iter().enumerate() {
            if a == f {
                test_x.push(matrix[i].clone());
                test_y.push(labels[i]);
            } else {
                train_x.push(matrix[i].clone());
                train_y.push(labels[i]);
            }
        }
        let model = train(&train_x, &train_y, config)?;
        let predicted: Vec<i8> = model.predict_many(&test_x)?.iter().map(|p| p.label).collect();
        per_fold.push(compute_metrics(&predicted, &test_y, 1)?);
    }
    Ok(CvResult {
        mean: MeanMetrics::of(&per_fold),
        folds: per_fold,
    })
}

/// Stratified k-fold cross-validation; normalization is refit on each
/// training split.
pub fn cross_validate(
    matrix: &[Vec<f64>],
    labels: &[i8],
    config: &TrainConfig,
    folds: usize,
) -> Result<CvResult> {
    config.validate()?;
    if matrix.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: matrix.len(),
            right: labels.len(),
        });
    }
    let assignment = stratified_folds(labels, folds, config.seed)?;
    run_folds(matrix, labels, config, &assignment, folds)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridCell {
    pub c: f64,
    pub gamma: f64,
    pub mean: MeanMetrics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    pub best_c: f64,
    pub best_gamma: f64,
    pub best: MeanMetrics,
    /// Every cell, in `C`-major grid order.
    pub cells: Vec<GridCell>,
}

/// Exhaustive search over `C × gamma` by mean CV accuracy. All cells share
/// the same folds. Ties go to the smaller `C`, then the smaller gamma.
pub fn grid_search(
    matrix: &[Vec<f64>],
    labels: &[i8],
    c_grid: &[f64],
    gamma_grid: &[f64],
    folds: usize,
    base: &TrainConfig,
) -> Result<GridResult> {
    if c_grid.is_empty() || gamma_grid.is_empty() {
        return Err(Error::InvalidConfig("grid search needs non-empty grids".into()));
    }
    if matrix.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: matrix.len(),
            right: labels.len(),
        });
    }
    let assignment = stratified_folds(labels, folds, base.seed)?;
    let pairs: Vec<(f64, f64)> = c_grid
        .iter()
        .flat_map(|&c| gamma_grid.iter().map(move |&g| (c, g)))
        .collect();
    let cells = pairs
        .par_iter()
        .map(|&(c, gamma)| {
            let mut config = base.clone();
            config.c = c;
            config.kernel.gamma = gamma;
            config.validate()?;
            let r = run_folds(matrix, labels, &config, &assignment, folds)?;
            Ok(GridCell { c, gamma, mean: r.mean })
        })
        .collect::<Result<Vec<_>>>()?;
    let best = cells
        .iter()
        .min_by(|a, b| {
            b.mean
                .accuracy
                .total_cmp(&a.mean.accuracy)
                .then(a.c.total_cmp(&b.c))
                .then(a.gamma.total_cmp(&b.gamma))
        })
        .expect("non-empty grid");
    Ok(GridResult {
        best_c: best.c,
        best_gamma: best.gamma,
        best: best.mean,
        cells,
    })
}
