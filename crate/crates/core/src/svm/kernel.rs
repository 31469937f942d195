use crate::error::{Error, Result};

pub const DEFAULT_GAMMA: f64 = 0.0078125;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    pub gamma: f64,
}

impl Default for KernelParams {
    fn default() -> Self {
        KernelParams { gamma: DEFAULT_GAMMA }
    }
}

impl KernelParams {
    pub fn validate(&self) -> Result<()> {
        if self.gamma > 0.0 && self.gamma.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("gamma must be positive, got {}", self.gamma)))
        }
    }
}

/// `‖x − z‖²`, summed term by term so that the result is symmetric in its
/// arguments bit for bit.
pub fn squared_distance(x: &[f64], z: &[f64]) -> f64 {
    x.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum()
}

pub fn rbf(x: &[f64], z: &[f64], gamma: f64) -> Result<f64> {
    if x.len() != z.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            actual: z.len(),
        });
    }
    Ok((-gamma * squared_distance(x, z)).exp())
}

/// Row-major Gram matrix of `rows`.
pub fn gram(rows: &[Vec<f64>], gamma: f64) -> Result<Vec<f64>> {
    let n = rows.len();
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let v = rbf(&rows[i], &rows[j], gamma)?;
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }
    Ok(k)
}
