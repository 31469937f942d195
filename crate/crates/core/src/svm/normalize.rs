use crate::error::{Error, Result};

/// Per-feature `[min, max]` observed on training rows.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizationParams {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl NormalizationParams {
    pub fn fit(matrix: &[Vec<f64>]) -> Result<Self> {
        let first = matrix
            .first()
            .ok_or_else(|| Error::InvalidConfig("cannot fit normalization on zero rows".into()))?;
        let mut min = first.clone();
        let mut max = first.clone();
        for row in &matrix[1..] {
            if row.len() != min.len() {
                return Err(Error::DimensionMismatch {
                    expected: min.len(),
                    actual: row.len(),
                });
            }
            for (k, &v) in row.iter().enumerate() {
                min[k] = min[k].min(v);
                max[k] = max[k].max(v);
            }
        }
        Ok(NormalizationParams { min, max })
    }

    pub fn dimension(&self) -> usize {
        self.min.len()
    }

    /// Maps into `[-1, 1]`; constant features go to 0 and values outside the
    /// training range are clipped.
    pub fn apply(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                actual: row.len(),
            });
        }
        Ok(row
            .iter()
            .zip(self.min.iter().zip(&self.max))
            .map(|(&x, (&lo, &hi))| {
                if hi > lo {
                    (-1.0 + 2.0 * (x - lo) / (hi - lo)).clamp(-1.0, 1.0)
                } else {
                    0.0
                }
            })
            .collect())
    }

    pub fn apply_all(&self, matrix: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        matrix.iter().map(|r| self.apply(r)).collect()
    }
}

pub fn fit_normalization(matrix: &[Vec<f64>]) -> Result<NormalizationParams> {
    NormalizationParams::fit(matrix)
}

pub fn apply_normalization(row: &[f64], params: &NormalizationParams) -> Result<Vec<f64>> {
    params.apply(row)
}
