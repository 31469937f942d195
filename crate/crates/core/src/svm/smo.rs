//! Dual solver: maximal-violating-pair SMO without shrinking.
//!
//! Works on the minimization form `f(α) = ½ αᵀQα − eᵀα` with
//! `Q_ij = y_i y_j K_ij`, subject to `0 ≤ α ≤ C` and `yᵀα = 0`.

use super::kernel::squared_distance;

/// Rows above this count are not cached as a full kernel matrix.
pub const FULL_CACHE_LIMIT: usize = 4096;

const TAU: f64 = 1e-12;

/// Kernel values used by the solver, either precomputed or on demand.
pub enum KernelSource<'a> {
    /// Row-major `n × n` kernel matrix.
    Full { n: usize, k: Vec<f64> },
    Rbf { rows: &'a [Vec<f64>], gamma: f64 },
}

impl<'a> KernelSource<'a> {
    pub fn rbf(rows: &'a [Vec<f64>], gamma: f64) -> Self {
        let n = rows.len();
        if n > FULL_CACHE_LIMIT {
            return KernelSource::Rbf { rows, gamma };
        }
        let mut k = vec![0.0; n * n];
        for i in 0..n {
            k[i * n + i] = 1.0;
            for j in 0..i {
                let v = (-gamma * squared_distance(&rows[i], &rows[j])).exp();
                k[i * n + j] = v;
                k[j * n + i] = v;
            }
        }
        KernelSource::Full { n, k }
    }

    pub fn len(&self) -> usize {
        match self {
            KernelSource::Full { n, .. } => *n,
            KernelSource::Rbf { rows, .. } => rows.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn fill_row(&self, i: usize, out: &mut Vec<f64>) {
        out.clear();
        match self {
            KernelSource::Full { n, k } => out.extend_from_slice(&k[i * n..(i + 1) * n]),
            KernelSource::Rbf { rows, gamma } => out.extend(rows.iter().enumerate().map(|(j, r)| {
                if j == i {
                    1.0
                } else {
                    (-gamma * squared_distance(&rows[i], r)).exp()
                }
            })),
        }
    }

    fn diag(&self, i: usize) -> f64 {
        match self {
            KernelSource::Full { n, k } => k[i * n + i],
            KernelSource::Rbf { .. } => 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DualSolution {
    pub alpha: Vec<f64>,
    /// Gradient of the minimization objective, `Qα − e`.
    pub gradient: Vec<f64>,
    /// Decision offset: `f(x) = Σ αᵢyᵢK(xᵢ,x) − rho`.
    pub rho: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Final `m(α) − M(α)`, the maximal KKT violation over violating pairs.
    pub max_violation: f64,
}

impl DualSolution {
    /// `Σα − ½ αᵀQα`, the maximized dual objective.
    pub fn objective(&self) -> f64 {
        // αᵀQα = αᵀ(G + e)
        -0.5 * self
            .alpha
            .iter()
            .zip(&self.gradient)
            .map(|(a, g)| a * (g - 1.0))
            .sum::<f64>()
    }
}

/// Solves the dual for labels `y ∈ {−1, +1}` (as floats).
///
/// Stops when the maximal violation drops to `tol` or after `max_iter` pair
/// updates, whichever comes first.
pub fn solve(kernel: &KernelSource<'_>, y: &[f64], c: f64, tol: f64, max_iter: usize) -> DualSolution {
    let n = y.len();
    debug_assert_eq!(kernel.len(), n);
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let (mut ki, mut kj) = (Vec::with_capacity(n), Vec::with_capacity(n));
    let mut iterations = 0;
    let mut violation;
    loop {
        let (i, j, gap) = select_pair(&alpha, &grad, y, c);
        violation = gap;
        if gap <= tol || iterations >= max_iter {
            break;
        }
        let (i, j) = (i.unwrap(), j.unwrap());
        iterations += 1;
        kernel.fill_row(i, &mut ki);
        kernel.fill_row(j, &mut kj);
        let (yi, yj) = (y[i], y[j]);
        let (qii, qjj, qij) = (kernel.diag(i), kernel.diag(j), yi * yj * ki[j]);
        let (old_i, old_j) = (alpha[i], alpha[j]);
        let (mut ai, mut aj) = (old_i, old_j);
        if yi != yj {
            let quad = (qii + qjj + 2.0 * qij).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            if diff > 0.0 {
                if ai > c {
                    ai = c;
                    aj = c - diff;
                }
            } else if aj > c {
                aj = c;
                ai = c + diff;
            }
        } else {
            let quad = (qii + qjj - 2.0 * qij).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > c {
                if ai > c {
                    ai = c;
                    aj = sum - c;
                }
            } else if aj < 0.0 {
                aj = 0.0;
                ai = sum;
            }
            if sum > c {
                if aj > c {
                    aj = c;
                    ai = sum - c;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = sum;
            }
        }
        alpha[i] = ai;
        alpha[j] = aj;
        let (di, dj) = (ai - old_i, aj - old_j);
        for t in 0..n {
            grad[t] += y[t] * (yi * ki[t] * di + yj * kj[t] * dj);
        }
    }
    let rho = compute_rho(&alpha, &grad, y, c);
    DualSolution {
        alpha,
        gradient: grad,
        rho,
        iterations,
        converged: violation <= tol,
        max_violation: violation,
    }
}

fn at_upper(a: f64, c: f64) -> bool {
    a >= c
}

fn at_lower(a: f64) -> bool {
    a <= 0.0
}

/// Maximal violating pair: `i` maximizes `−y G` over the up set, `j`
/// minimizes it over the low set. Ties go to the lower index.
fn select_pair(alpha: &[f64], grad: &[f64], y: &[f64], c: f64) -> (Option<usize>, Option<usize>, f64) {
    let (mut gmax, mut gmin) = (f64::NEG_INFINITY, f64::INFINITY);
    let (mut i, mut j) = (None, None);
    for t in 0..alpha.len() {
        let v = -y[t] * grad[t];
        let up = if y[t] > 0.0 { !at_upper(alpha[t], c) } else { !at_lower(alpha[t]) };
        let low = if y[t] > 0.0 { !at_lower(alpha[t]) } else { !at_upper(alpha[t], c) };
        if up && v > gmax {
            gmax = v;
            i = Some(t);
        }
        if low && v < gmin {
            gmin = v;
            j = Some(t);
        }
    }
    if i.is_none() || j.is_none() {
        return (i, j, 0.0);
    }
    (i, j, gmax - gmin)
}

/// Offset from free support vectors; midpoint of the feasible interval when
/// none are free.
fn compute_rho(alpha: &[f64], grad: &[f64], y: &[f64], c: f64) -> f64 {
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free, mut sum) = (0usize, 0.0);
    for t in 0..alpha.len() {
        let yg = y[t] * grad[t];
        if at_upper(alpha[t], c) {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if at_lower(alpha[t]) {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            sum += yg;
        }
    }
    if free > 0 {
        sum / free as f64
    } else {
        (ub + lb) / 2.0
    }
}
