//! Finite-difference weights on nonuniform nodes and a tridiagonal solver.

use crate::error::{Error, Result};

/// Fornberg's algorithm: weights `w[k][j]` such that
/// `f^(k)(z) ≈ Σ_j w[k][j] f(x_j)` for derivative orders `k = 0..=max_order`.
pub fn fornberg_weights(z: f64, x: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let m = x.len();
    let mut c = vec![vec![0.0; m]; max_order + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    for i in 1..m {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] *= c4 / c3;
        }
        c1 = c2;
    }
    c
}

/// Derivative of order `order` of sampled data at every node, using a stencil of
/// `width` nodes (odd), centered where possible and shifted inward near the ends.
pub fn derivative(x: &[f64], y: &[f64], order: usize, width: usize) -> Vec<f64> {
    let m = x.len();
    let width = width.min(m);
    let half = width / 2;
    (0..m)
        .map(|i| {
            let start = i.saturating_sub(half).min(m - width);
            let xs = &x[start..start + width];
            let w = fornberg_weights(x[i], xs, order);
            w[order]
                .iter()
                .zip(&y[start..start + width])
                .map(|(a, b)| a * b)
                .sum()
        })
        .collect()
}

/// Tridiagonal system `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]`.
/// `lower[0]` and `upper[n-1]` are ignored.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut denom = diag[0];
    if denom == 0.0 || !denom.is_finite() {
        return Err(Error::SingularSystem { row: 0 });
    }
    c[0] = if n > 1 { upper[0] / denom } else { 0.0 };
    d[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - lower[i] * c[i - 1];
        if denom == 0.0 || !denom.is_finite() {
            return Err(Error::SingularSystem { row: i });
        }
        if i + 1 < n {
            c[i] = upper[i] / denom;
        }
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_exact_on_polynomials() {
        let x = [0.1, 0.25, 0.3, 0.5, 0.62];
        let w = fornberg_weights(0.3, &x, 2);
        let f = |t: f64| 1.0 + 2.0 * t - t * t + 0.5 * t.powi(3);
        let d1: f64 = w[1].iter().zip(&x).map(|(a, &t)| a * f(t)).sum();
        let d2: f64 = w[2].iter().zip(&x).map(|(a, &t)| a * f(t)).sum();
        assert!((d1 - (2.0 - 0.6 + 1.5 * 0.09)).abs() < 1e-10);
        assert!((d2 - (-2.0 + 3.0 * 0.3)).abs() < 1e-9);
    }

    #[test]
    fn tridiagonal_matches_dense() {
        let lower = [0.0, 1.0, -0.5, 2.0];
        let diag = [4.0, 5.0, 3.0, 6.0];
        let upper = [1.0, 0.5, 1.0, 0.0];
        let x = [1.0, -2.0, 0.5, 3.0];
        let rhs: Vec<f64> = (0..4)
            .map(|i| {
                let mut s = diag[i] * x[i];
                if i > 0 {
                    s += lower[i] * x[i - 1];
                }
                if i < 3 {
                    s += upper[i] * x[i + 1];
                }
                s
            })
            .collect();
        let sol = solve_tridiagonal(&lower, &diag, &upper, &rhs).unwrap();
        for (a, b) in sol.iter().zip(&x) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn singular_system_is_reported() {
        let r = solve_tridiagonal(&[0.0, 0.0], &[0.0, 1.0], &[0.0, 0.0], &[1.0, 1.0]);
        assert_eq!(r, Err(Error::SingularSystem { row: 0 }));
    }
}
