//! Brute-force reference for the SVM dual.
//!
//! Accelerated projected gradient (FISTA with function-value restarts) on
//! `½ αᵀQα − eᵀα` over `{0 ≤ α ≤ C, yᵀα = 0}`. The projection onto that set
//! is exact up to bisection on the multiplier of the equality constraint.
//! Shares no code with the SMO solver.

#![allow(dead_code)]

/// Euclidean projection of `v` onto the feasible set.
pub fn project(v: &[f64], y: &[f64], c: f64) -> Vec<f64> {
    // Minimizer is clip(v − λy, 0, C) for the λ that makes yᵀα = 0. The
    // residual is non-increasing in λ.
    let at = |lambda: f64| -> f64 {
        v.iter()
            .zip(y)
            .map(|(vi, yi)| yi * (vi - lambda * yi).clamp(0.0, c))
            .sum()
    };
    let span = v.iter().fold(0.0f64, |m, x| m.max(x.abs())) + c + 1.0;
    let (mut lo, mut hi) = (-span, span);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if at(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lambda = 0.5 * (lo + hi);
    v.iter()
        .zip(y)
        .map(|(vi, yi)| (vi - lambda * yi).clamp(0.0, c))
        .collect()
}

/// `Q = diag(y) K diag(y)` from a row-major kernel matrix.
pub fn q_matrix(k: &[f64], y: &[f64]) -> Vec<f64> {
    let n = y.len();
    let mut q = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            q[i * n + j] = y[i] * y[j] * k[i * n + j];
        }
    }
    q
}

fn q_times(q: &[f64], a: &[f64]) -> Vec<f64> {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| q[i * n + j] * a[j]).sum())
        .collect()
}

/// Maximized dual objective `Σα − ½ αᵀQα`.
pub fn dual_objective(q: &[f64], a: &[f64]) -> f64 {
    let qa = q_times(q, a);
    a.iter().sum::<f64>() - 0.5 * a.iter().zip(&qa).map(|(x, y)| x * y).sum::<f64>()
}

/// Returns the oracle optimum `α`.
pub fn solve(k: &[f64], y: &[f64], c: f64, max_iter: usize) -> Vec<f64> {
    let n = y.len();
    let q = q_matrix(k, y);
    // Gershgorin bound on the largest eigenvalue.
    let lipschitz = (0..n)
        .map(|i| (0..n).map(|j| q[i * n + j].abs()).sum::<f64>())
        .fold(1e-12f64, f64::max);
    let step = 1.0 / lipschitz;
    let f = |a: &[f64]| -dual_objective(&q, a);

    let mut x = vec![0.0; n];
    let mut z = x.clone();
    let mut t = 1.0f64;
    let mut fx = f(&x);
    let mut checkpoint = fx;
    for it in 0..max_iter {
        if it % 2000 == 1999 {
            // Stalled: the objective no longer moves at the precision we compare to.
            if checkpoint - fx < 1e-12 * (1.0 + fx.abs()) {
                break;
            }
            checkpoint = fx;
        }
        let g = q_times(&q, &z);
        let v: Vec<f64> = z.iter().zip(&g).map(|(zi, gi)| zi - step * (gi - 1.0)).collect();
        let next = project(&v, y, c);
        let fnext = f(&next);
        if fnext > fx {
            // Restart momentum from the last iterate.
            z = x.clone();
            t = 1.0;
            continue;
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let moved: f64 = next.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        z = next
            .iter()
            .zip(&x)
            .map(|(a, b)| a + (t - 1.0) / t_next * (a - b))
            .collect();
        x = next;
        fx = fnext;
        t = t_next;
        if moved < 1e-14 {
            break;
        }
    }
    x
}
