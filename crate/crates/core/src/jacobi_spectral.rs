//! Linearization about an expander in the corotational sector.
//!
//! `L v = v'' + ((n−1)/ρ + ρ/2) v' − V v`, `V = (n−1) g'(h)/ρ²`, self-adjoint in
//! `L²(e^{ρ²/4} ρ^{n−1} dρ)`. With `w = ρ^{(n−1)/2} e^{ρ²/8} v`,
//! `−L` becomes `−w'' + W w`, `W = ρ²/16 + (n−1)(n−3)/(4ρ²) + n/4 + V`.

use rayon::prelude::*;
use serde::Serialize;

use crate::entropy_diagnostics::{decay_window, fit_trace, DecayFit, DECAY_WINDOW_LO};
use crate::error::{Error, Result};
use crate::profile_ode::{Profile, ShootingOptions, ShootingSweep, Target};
use crate::stencil::solve_tridiagonal;
use crate::weighted_geometry::{integrate, potential_f, PotentialParams, RadialGrid};

/// Eigenvalues with `|λ|` below this count as kernel candidates.
pub const KERNEL_TOL: f64 = 1e-3;
pub const MAX_EIGENPAIRS: usize = 20;
pub const MIN_KERNEL_SAMPLES: usize = 50;

#[derive(Debug, Clone)]
pub struct JacobiOperator {
    /// `None` for the scalar drift Laplacian.
    pub profile: Option<Profile>,
    pub potential: Vec<f64>,
    pub grid: RadialGrid,
    pub n: usize,
}

pub fn build_operator(p: &Profile) -> JacobiOperator {
    let nm1 = p.n as f64 - 1.0;
    let potential = p
        .grid
        .nodes()
        .iter()
        .zip(&p.h)
        .map(|(&r, &h)| nm1 * p.target.g_prime(h) / (r * r))
        .collect();
    JacobiOperator { profile: Some(p.clone()), potential, grid: p.grid.clone(), n: p.n }
}

/// `−Δ_f` on radial functions (`V = 0`).
pub fn scalar_operator(grid: &RadialGrid, n: usize) -> Result<JacobiOperator> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("dimension must be at least 2, got {n}")));
    }
    Ok(JacobiOperator { profile: None, potential: vec![0.0; grid.len()], grid: grid.clone(), n })
}

/// `ln(w/v) = (n−1)/2 · ln ρ + ρ²/8`.
fn log_liouville(r: f64, n: usize) -> f64 {
    0.5 * (n as f64 - 1.0) * r.ln() + 0.125 * r * r
}

impl JacobiOperator {
    /// Schrödinger potential `W` at every node.
    pub fn schrodinger_potential(&self) -> Vec<f64> {
        let nf = self.n as f64;
        self.grid
            .nodes()
            .iter()
            .zip(&self.potential)
            .map(|(&r, &v)| r * r / 16.0 + (nf - 1.0) * (nf - 3.0) / (4.0 * r * r) + nf / 4.0 + v)
            .collect()
    }

    /// `−L v` by 5-point differences on the raw grid.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let d1 = self.grid.derivative(v, 1, 5);
        let d2 = self.grid.derivative(v, 2, 5);
        let nm1 = self.n as f64 - 1.0;
        self.grid
            .nodes()
            .iter()
            .enumerate()
            .map(|(i, &r)| -(d2[i] + (nm1 / r + 0.5 * r) * d1[i]) + self.potential[i] * v[i])
            .collect()
    }

    /// `w = ρ^{(n−1)/2} e^{ρ²/8} v`.
    pub fn to_liouville(&self, v: &[f64]) -> Vec<f64> {
        self.grid.nodes().iter().zip(v).map(|(&r, &x)| x * log_liouville(r, self.n).exp()).collect()
    }

    pub fn from_liouville(&self, w: &[f64]) -> Vec<f64> {
        self.grid.nodes().iter().zip(w).map(|(&r, &x)| x * (-log_liouville(r, self.n)).exp()).collect()
    }
}

/// Symmetric tridiagonal form of `−d²/dρ² + W` on nodes `0..m−1`, with
/// `w = 0` at `ρ = 0` and at `ρ_M`. Unknowns are `√M_i w_i`, `M_i` the
/// finite-volume cell length.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricTridiagonal {
    pub diag: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Cell lengths of the interior nodes.
    pub mass: Vec<f64>,
}

impl SymmetricTridiagonal {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn is_symmetric(&self) -> bool {
        self.lower == self.upper
    }

    /// `T y`.
    pub fn apply(&self, y: &[f64]) -> Vec<f64> {
        let m = self.len();
        (0..m)
            .map(|i| {
                let mut s = self.diag[i] * y[i];
                if i > 0 {
                    s += self.lower[i - 1] * y[i - 1];
                }
                if i + 1 < m {
                    s += self.upper[i] * y[i + 1];
                }
                s
            })
            .collect()
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence).
    pub fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut d = 1.0;
        for i in 0..self.len() {
            let b2 = if i > 0 { self.lower[i - 1] * self.lower[i - 1] } else { 0.0 };
            d = self.diag[i] - x - if i > 0 { b2 / d } else { 0.0 };
            if d == 0.0 {
                d = -f64::EPSILON * (self.diag[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let m = self.len();
        (0..m).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), i| {
            let r = if i > 0 { self.lower[i - 1].abs() } else { 0.0 } + if i + 1 < m { self.upper[i].abs() } else { 0.0 };
            (lo.min(self.diag[i] - r), hi.max(self.diag[i] + r))
        })
    }

    /// The `k`-th smallest eigenvalue (0-based) by bisection.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Unit eigenvector for an accurate eigenvalue `lambda` by inverse iteration.
    pub fn eigenvector(&self, lambda: f64, index: usize) -> Result<Vec<f64>> {
        let m = self.len();
        let mut lower = vec![0.0; m];
        lower[1..].copy_from_slice(&self.lower);
        let mut upper = self.upper.clone();
        upper.push(0.0);
        let mut shift = lambda + 1e-12 * lambda.abs().max(1.0);
        let mut diag: Vec<f64> = self.diag.iter().map(|d| d - shift).collect();
        // Deterministic start that is not orthogonal to low modes.
        let mut y: Vec<f64> = (0..m).map(|i| 1.0 + 0.1 * ((i % 7) as f64)).collect();
        let mut change = f64::INFINITY;
        for _ in 0..8 {
            let mut x = match solve_tridiagonal(&lower, &diag, &upper, &y) {
                Ok(x) => x,
                Err(Error::SingularSystem { .. }) => {
                    shift += 1e-10 * lambda.abs().max(1.0);
                    diag = self.diag.iter().map(|d| d - shift).collect();
                    continue;
                }
                Err(e) => return Err(e),
            };
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if !(norm.is_finite() && norm > 0.0) {
                return Err(Error::EigenConvergence { index });
            }
            let dot: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
            let sign = if dot < 0.0 { -1.0 } else { 1.0 };
            x.iter_mut().for_each(|v| *v *= sign / norm);
            change = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            y = x;
            if change <= 1e-13 {
                break;
            }
        }
        if !(change <= 1e-9) {
            return Err(Error::EigenConvergence { index });
        }
        // Sign convention: positive near the origin.
        if let Some(&first) = y.iter().find(|v| v.abs() > 1e-8) {
            if first < 0.0 {
                y.iter_mut().for_each(|v| *v = -*v);
            }
        }
        Ok(y)
    }
}

pub fn symmetrize(op: &JacobiOperator) -> SymmetricTridiagonal {
    let x = op.grid.nodes();
    let m = x.len();
    let w = op.schrodinger_potential();
    // The origin acts as the left Dirichlet node: w ~ ρ^{(n−1)/2} there.
    let left = |i: usize| if i == 0 { 0.0 } else { x[i - 1] };
    let mass: Vec<f64> = (0..m - 1).map(|i| 0.5 * (x[i + 1] - left(i))).collect();
    let diag: Vec<f64> = (0..m - 1)
        .map(|i| (1.0 / (x[i] - left(i)) + 1.0 / (x[i + 1] - x[i])) / mass[i] + w[i])
        .collect();
    let off = |j: usize| -> f64 { -1.0 / ((x[j + 1] - x[j]) * (mass[j] * mass[j + 1]).sqrt()) };
    let lower: Vec<f64> = (0..m.saturating_sub(2)).map(off).collect();
    let upper: Vec<f64> = (0..m.saturating_sub(2)).map(off).collect();
    SymmetricTridiagonal { diag, lower, upper, mass }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<f64>,
    /// `v` on all grid nodes (zero at `ρ_M`), unit norm in `L²(e^{ρ²/4}ρ^{n−1}dρ)`.
    pub eigenvectors: Vec<Vec<f64>>,
    /// Rayleigh quotient of each returned `v`, from 7-point derivatives and quadrature.
    pub rayleigh: Vec<f64>,
    pub kernel_gap: f64,
    /// `(index, κ_∞)` for eigenvalues with `|λ| ≤ KERNEL_TOL`; NaN where the fit failed.
    pub traces: Vec<(usize, f64)>,
}

/// `∫ v² e^{ρ²/4} ρ^{n−1} dρ`, formed as `∫ w²`.
fn weighted_norm_sq(op: &JacobiOperator, v: &[f64]) -> f64 {
    let w = op.to_liouville(v);
    let sq: Vec<f64> = w.iter().map(|x| x * x).collect();
    integrate(op.grid.nodes(), &sq)
}

/// `∫(v'² + V v²) A / ∫ v² A`, `A = e^{ρ²/4} ρ^{n−1}`.
pub fn rayleigh_quotient(op: &JacobiOperator, v: &[f64]) -> f64 {
    let x = op.grid.nodes();
    let dv = op.grid.derivative(v, 1, 7);
    let num: Vec<f64> = (0..x.len())
        .map(|i| {
            let a = (2.0 * log_liouville(x[i], op.n)).exp();
            (dv[i] * dv[i] + op.potential[i] * v[i] * v[i]) * a
        })
        .collect();
    integrate(x, &num) / weighted_norm_sq(op, v)
}

pub fn spectrum(op: &JacobiOperator, k: usize) -> Result<SpectrumReport> {
    if k == 0 || k > MAX_EIGENPAIRS {
        return Err(Error::InvalidParameter(format!("eigenpair count must be in 1..={MAX_EIGENPAIRS}, got {k}")));
    }
    let t = symmetrize(op);
    if t.len() < k {
        return Err(Error::InvalidGrid(format!("{} interior nodes cannot carry {k} eigenpairs", t.len())));
    }
    let pairs: Vec<Result<(f64, Vec<f64>)>> = (0..k)
        .into_par_iter()
        .map(|j| {
            let lambda = t.eigenvalue(j);
            let y = t.eigenvector(lambda, j)?;
            let mut w = vec![0.0; op.grid.len()];
            for (i, (yi, mi)) in y.iter().zip(&t.mass).enumerate() {
                w[i] = yi / mi.sqrt();
            }
            let mut v = op.from_liouville(&w);
            let norm = weighted_norm_sq(op, &v).sqrt();
            v.iter_mut().for_each(|x| *x /= norm);
            Ok((lambda, v))
        })
        .collect();
    let mut eigenvalues = Vec::with_capacity(k);
    let mut eigenvectors = Vec::with_capacity(k);
    for p in pairs {
        let (l, v) = p?;
        eigenvalues.push(l);
        eigenvectors.push(v);
    }
    let rayleigh = eigenvectors.iter().map(|v| rayleigh_quotient(op, v)).collect();
    let kernel_gap = eigenvalues.iter().fold(f64::INFINITY, |m, l: &f64| m.min(l.abs()));
    let traces = eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, l)| l.abs() <= KERNEL_TOL)
        .map(|(i, _)| (i, eigenvector_trace(&op.grid, op.n, &eigenvectors[i]).map_or(f64::NAN, |f| f.trace)))
        .collect();
    Ok(SpectrumReport { eigenvalues, eigenvectors, rayleigh, kernel_gap, traces })
}

/// Number of eigenvalues below `lambda`.
pub fn count_below(op: &JacobiOperator, lambda: f64) -> usize {
    symmetrize(op).count_below(lambda)
}

/// Decay fit `lim f^{n/2} e^{f} v` of a grid function.
pub fn eigenvector_trace(grid: &RadialGrid, n: usize, v: &[f64]) -> Result<DecayFit> {
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let noise = 1e3 * f64::EPSILON * scale;
    let window = decay_window(grid, v, noise, DECAY_WINDOW_LO)?;
    fit_trace(grid, n, v, window, 1.0)
}

/// Trace of a near-kernel eigenvector.
pub fn kernel_trace(report: &SpectrumReport, grid: &RadialGrid, n: usize, index: usize) -> Result<f64> {
    let l = *report
        .eigenvalues
        .get(index)
        .ok_or_else(|| Error::InvalidParameter(format!("no eigenpair with index {index}")))?;
    if l.abs() > KERNEL_TOL {
        return Err(Error::InvalidParameter(format!("eigenvalue {l} is not within {KERNEL_TOL} of zero")));
    }
    Ok(eigenvector_trace(grid, n, &report.eigenvectors[index])?.trace)
}

/// `sup |v| f^{n/2} e^{(1−slack) f}` over the outer half of the resolved
/// range, i.e. nodes below the last one where `|w|` exceeds `1e3·ε·max|w|`.
/// Beyond that radius the stored tail is rounding noise of the eigensolve.
pub fn decay_envelope(grid: &RadialGrid, n: usize, v: &[f64], slack: f64) -> Result<f64> {
    let p = PotentialParams::unit(n)?;
    let x = grid.nodes();
    let w: Vec<f64> = x.iter().zip(v).map(|(&r, &y)| y * log_liouville(r, n).exp()).collect();
    let wmax = w.iter().fold(0.0f64, |m, y| m.max(y.abs()));
    let noise = 1e3 * f64::EPSILON * wmax;
    let Some(last) = w.iter().rposition(|y| y.abs() > noise) else {
        return Ok(0.0);
    };
    let start = grid.index_at_or_above(0.5 * x[last]);
    Ok((start..=last)
        .filter(|&i| v[i] != 0.0)
        .map(|i| {
            let f = potential_f(x[i], p);
            (v[i].abs().ln() + 0.5 * n as f64 * f.ln() + (1.0 - slack) * f).exp()
        })
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelSample {
    pub alpha: f64,
    /// Shooting slopes of the expanders found, ascending.
    pub slopes: Vec<f64>,
    /// Lowest eigenvalue per expander, same order.
    pub lowest: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelSweep {
    pub samples: Vec<KernelSample>,
    /// `(α_lo, α_hi, branch)` where the lowest eigenvalue of branch `branch`
    /// (ordered by slope) changes sign between neighbouring samples.
    pub crossings: Vec<(f64, f64, usize)>,
    /// `(a_lo, a_hi, α_lo, α_hi)`: sign changes of the lowest eigenvalue
    /// between expanders adjacent in shooting slope, pooled over all samples.
    /// A fold of `a ↦ α` shows up here even when it falls between two angles.
    pub slope_crossings: Vec<(f64, f64, f64, f64)>,
    /// `(α, slope, λ)` with `|λ| ≤ KERNEL_TOL`.
    pub near_kernel: Vec<(f64, f64, f64)>,
    pub failures: Vec<(f64, String)>,
}

#[derive(Debug, Clone, Copy)]
pub struct KernelSweepOptions {
    pub search: (f64, f64),
    pub shooting: ShootingOptions,
    pub shooting_samples: usize,
    pub bv_tol: f64,
}

/// Lowest Jacobi eigenvalue of every expander attaining each of `count`
/// evenly spaced angles in `alpha_range` (endpoints included).
pub fn kernel_sweep(
    alpha_range: (f64, f64),
    count: usize,
    n: usize,
    target: Target,
    grid: &RadialGrid,
    opts: KernelSweepOptions,
) -> Result<KernelSweep> {
    if count < MIN_KERNEL_SAMPLES {
        return Err(Error::InvalidParameter(format!("kernel sweep needs at least {MIN_KERNEL_SAMPLES} samples, got {count}")));
    }
    let (lo, hi) = alpha_range;
    if !(lo >= 0.0 && hi > lo) {
        return Err(Error::InvalidParameter(format!("invalid angle range ({lo}, {hi})")));
    }
    let sweep = ShootingSweep::new(opts.search.0, opts.search.1, opts.shooting_samples, n, target, grid, opts.shooting)?;
    let alphas: Vec<f64> = (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect();
    Ok(kernel_sweep_on(&sweep, &alphas, opts.bv_tol, KERNEL_TOL))
}

/// As [`kernel_sweep`], on an existing shooting sweep and explicit angles.
pub fn kernel_sweep_on(sweep: &ShootingSweep, alphas: &[f64], bv_tol: f64, kernel_tol: f64) -> KernelSweep {
    let rows: Vec<std::result::Result<KernelSample, String>> = alphas
        .par_iter()
        .map(|&alpha| {
            let set = sweep.solve(alpha, bv_tol).map_err(|e| e.to_string())?;
            let mut slopes = Vec::new();
            let mut lowest = Vec::new();
            for p in &set.profiles {
                let l = spectrum(&build_operator(p), 1).map_err(|e| e.to_string())?.eigenvalues[0];
                slopes.push(p.shoot_param);
                lowest.push(l);
            }
            Ok(KernelSample { alpha, slopes, lowest })
        })
        .collect();
    let mut samples = Vec::new();
    let mut failures = Vec::new();
    for (alpha, r) in alphas.iter().zip(rows) {
        match r {
            Ok(s) => samples.push(s),
            Err(e) => failures.push((*alpha, e)),
        }
    }
    let mut crossings = Vec::new();
    for w in samples.windows(2) {
        for (b, (l0, l1)) in w[0].lowest.iter().zip(&w[1].lowest).enumerate() {
            if l0.signum() != l1.signum() {
                crossings.push((w[0].alpha, w[1].alpha, b));
            }
        }
    }
    let mut pooled: Vec<(f64, f64, f64)> = samples
        .iter()
        .flat_map(|s| s.slopes.iter().zip(&s.lowest).map(move |(&a, &l)| (a, s.alpha, l)))
        .collect();
    pooled.sort_by(|p, q| p.0.total_cmp(&q.0));
    let slope_crossings = pooled
        .windows(2)
        .filter(|w| w[0].2.signum() != w[1].2.signum())
        .map(|w| (w[0].0, w[1].0, w[0].1, w[1].1))
        .collect();
    let near_kernel = pooled.iter().filter(|p| p.2.abs() <= kernel_tol).map(|&(a, alpha, l)| (alpha, a, l)).collect();
    KernelSweep { samples, crossings, slope_crossings, near_kernel, failures }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile_ode::shoot;

    fn grid() -> RadialGrid {
        RadialGrid::default_layout()
    }

    #[test]
    fn trivial_potentials() {
        let g = grid();
        let op = build_operator(&Profile::trivial(3, Target::Sphere, &g));
        for (&r, &v) in g.nodes().iter().zip(&op.potential) {
            assert_eq!(v, 2.0 / (r * r));
        }
        let w = op.schrodinger_potential();
        for (i, &r) in g.nodes().iter().enumerate() {
            let expect = r * r / 16.0 + 0.75 + 2.0 / (r * r);
            assert!((w[i] - expect).abs() <= 1e-12 * expect);
        }
        let mut half_pi = Profile::trivial(3, Target::Sphere, &g);
        half_pi.h.iter_mut().for_each(|h| *h = std::f64::consts::FRAC_PI_2);
        let op = build_operator(&half_pi);
        for (&r, &v) in g.nodes().iter().zip(&op.potential) {
            assert!((v + 2.0 / (r * r)).abs() <= 1e-15 / (r * r));
        }
    }

    #[test]
    fn symmetric_and_equivalent() {
        // Smooth bump on a uniform grid away from the origin.
        let g = RadialGrid::uniform(0.5, 12.0, 0.01).unwrap();
        let p = shoot(0.7, 3, Target::Sphere, &RadialGrid::default_layout(), ShootingOptions::default()).unwrap();
        let mut op = build_operator(&p);
        // Re-sample the potential on the test grid.
        op.potential = g.nodes().iter().map(|&r| 2.0 * (2.0 * r).cos() / (r * r)).collect();
        op.grid = g.clone();
        op.profile = None;
        let t = symmetrize(&op);
        assert!(t.is_symmetric());
        let x = g.nodes();
        let v: Vec<f64> = x.iter().map(|&r| (-(r - 3.0) * (r - 3.0)).exp() * (2.0 * r).sin()).collect();
        let lv = op.apply(&v);
        let w = op.to_liouville(&v);
        let y: Vec<f64> = (0..x.len() - 1).map(|i| w[i] * t.mass[i].sqrt()).collect();
        let ty = t.apply(&y);
        let lw = op.to_liouville(&lv);
        let mut err = 0.0f64;
        let mut scale = 0.0f64;
        for i in 10..x.len() - 10 {
            err = err.max((ty[i] / t.mass[i].sqrt() - lw[i]).abs());
            scale = scale.max(lw[i].abs());
        }
        assert!(err <= 1e-3 * scale, "err {err} scale {scale}");
    }

    #[test]
    fn scalar_ground_state() {
        for n in [3, 4] {
            let g = grid();
            let op = scalar_operator(&g, n).unwrap();
            let rep = spectrum(&op, 3).unwrap();
            let l0 = rep.eigenvalues[0];
            assert!((l0 - 0.5 * n as f64).abs() <= 5e-3 * 0.5 * n as f64, "n {n}: {l0}");
            // Eigenfunction ∝ e^{−ρ²/4}.
            let v = &rep.eigenvectors[0];
            let x = g.nodes();
            let i1 = g.nearest_index(1.0);
            let i3 = g.nearest_index(3.0);
            let ratio = v[i3] / v[i1];
            let expect = (-(x[i3] * x[i3] - x[i1] * x[i1]) / 4.0).exp();
            assert!((ratio / expect - 1.0).abs() < 1e-3, "n {n}: {}", ratio / expect - 1.0);
        }
    }

    #[test]
    fn equivariant_trivial_ladder() {
        let g = grid();
        let rep = spectrum(&build_operator(&Profile::trivial(3, Target::Sphere, &g)), 5).unwrap();
        // ℓ = 1 Hermite ladder (n+1)/2 + k.
        for (k, l) in rep.eigenvalues.iter().enumerate() {
            assert!((l - (2.0 + k as f64)).abs() < 2e-3 * (2.0 + k as f64), "{k}: {l}");
        }
        for (l, q) in rep.eigenvalues.iter().zip(&rep.rayleigh) {
            assert!((l - q).abs() < 1e-3 * l.abs());
        }
        for v in &rep.eigenvectors {
            let norm = weighted_norm_sq(&build_operator(&Profile::trivial(3, Target::Sphere, &g)), v);
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn synthetic_traces() {
        let g = grid();
        let n = 3;
        let model = |corr: bool| -> Vec<f64> {
            g.nodes()
                .iter()
                .map(|&r| {
                    let f = potential_f(r, PotentialParams::unit(n).unwrap());
                    let base = f.powf(-0.5 * n as f64) * (-f).exp();
                    if corr {
                        base * (1.0 + 1.0 / f)
                    } else {
                        base
                    }
                })
                .collect()
        };
        let t = eigenvector_trace(&g, n, &model(false)).unwrap().trace;
        assert!((t - 1.0).abs() < 1e-6, "{t}");
        let t = eigenvector_trace(&g, n, &model(true)).unwrap().trace;
        assert!((t - 1.0).abs() < 1e-3, "{t}");
    }

    #[test]
    fn hyperbolic_sweep_has_no_crossing() {
        let g = grid();
        let opts = KernelSweepOptions { search: (0.0, 1.0), shooting: ShootingOptions::default(), shooting_samples: 200, bv_tol: 1e-10 };
        let ks = kernel_sweep((0.0, 2.0), 50, 3, Target::Hyperbolic, &g, opts).unwrap();
        assert!(ks.failures.is_empty());
        assert!(ks.crossings.is_empty() && ks.slope_crossings.is_empty() && ks.near_kernel.is_empty());
        assert!(ks.samples.iter().all(|s| s.lowest.len() == 1));
        assert!(ks.samples[0].lowest[0] > 0.0);
        assert!(kernel_sweep((0.0, 2.0), 10, 3, Target::Hyperbolic, &g, opts).is_err());
    }

    #[test]
    fn rayleigh_and_norms() {
        let g = grid();
        let p = shoot(0.5, 3, Target::Sphere, &g, ShootingOptions::default()).unwrap();
        let op = build_operator(&p);
        let rep = spectrum(&op, 4).unwrap();
        assert!(rep.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        for (v, (l, q)) in rep.eigenvectors.iter().zip(rep.eigenvalues.iter().zip(&rep.rayleigh)) {
            assert!((weighted_norm_sq(&op, v) - 1.0).abs() <= 1e-10);
            assert!((l - q).abs() <= 1e-4 * l.abs().max(1.0), "{l} {q}");
            assert!(decay_envelope(&g, 3, v, 0.1).unwrap().is_finite());
        }
        assert!(spectrum(&op, 0).is_err() && spectrum(&op, 21).is_err());
    }
}
