//! Corotational expander profiles.
//!
//! Under `u(x) = (sin h(|x|)·x/|x|, cos h(|x|))` (sphere) or its hyperbolic
//! analogue, a self-similar expander reduces to
//!
//! ```text
//! h'' = −((n−1)/ρ + ρ/2) h' + (n−1) g(h)/ρ²,   h(0) = 0,  h'(0) = a,
//! ```
//!
//! with `g = sin·cos` or `sinh·cosh`. Profiles are built by shooting in `a`
//! from a Frobenius start at `ρ₀` with an embedded Dormand–Prince 5(4) pair,
//! and the boundary angle `α = lim h` is read off the far field
//! `h ≈ α + c₂/ρ² + c₄/ρ⁴`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::weighted_geometry::{potential_f, PotentialParams, RadialGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Sphere,
    Hyperbolic,
}

impl Target {
    pub fn curvature_sign(self) -> f64 {
        match self {
            Target::Sphere => 1.0,
            Target::Hyperbolic => -1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Target::Sphere => "sphere",
            Target::Hyperbolic => "hyperbolic",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sphere" => Some(Target::Sphere),
            "hyperbolic" => Some(Target::Hyperbolic),
            _ => None,
        }
    }

    /// `sin` or `sinh`.
    pub fn sn(self, x: f64) -> f64 {
        match self {
            Target::Sphere => x.sin(),
            Target::Hyperbolic => x.sinh(),
        }
    }

    /// `cos` or `cosh`.
    pub fn cs(self, x: f64) -> f64 {
        match self {
            Target::Sphere => x.cos(),
            Target::Hyperbolic => x.cosh(),
        }
    }

    /// Nonlinearity `g(h) = sn(h) cs(h)`.
    pub fn g(self, h: f64) -> f64 {
        0.5 * self.sn(2.0 * h)
    }

    /// `g'(h) = cs(2h)`.
    pub fn g_prime(self, h: f64) -> f64 {
        self.cs(2.0 * h)
    }

    /// Angular energy factor `q(h) = sn(h)²`; `q' = 2g`.
    pub fn q(self, h: f64) -> f64 {
        let s = self.sn(h);
        s * s
    }

    /// `g(b + d) − g(b)` without cancellation.
    pub fn g_diff(self, b: f64, d: f64) -> f64 {
        self.cs(2.0 * b + d) * self.sn(d)
    }

    /// `q(b + d) − q(b)` without cancellation.
    pub fn q_diff(self, b: f64, d: f64) -> f64 {
        self.sn(d) * self.sn(2.0 * b + d)
    }

    /// `g(b + d) − g(b) − d`, the part of the nonlinearity left after removing
    /// its linearization at the trivial map.
    pub fn g_diff_minus_linear(self, b: f64, d: f64) -> f64 {
        let s = self.sn(d);
        let m = self.sn(b + 0.5 * d);
        (s - d) - self.curvature_sign() * 2.0 * m * m * s
    }
}

/// `h''` from the reduced static equation.
pub fn profile_rhs(rho: f64, h: f64, dh: f64, n: usize, target: Target) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "profile_rhs needs rho > 0 (got {rho}); start from the series"
        )));
    }
    Ok(rhs_unchecked(rho, h, dh, n as f64 - 1.0, target))
}

#[inline]
fn rhs_unchecked(rho: f64, h: f64, dh: f64, nm1: f64, target: Target) -> f64 {
    -(nm1 / rho + 0.5 * rho) * dh + nm1 * target.g(h) / (rho * rho)
}

/// Cubic Frobenius coefficient: `h = aρ + c₃ρ³ + O(ρ⁵)` with
/// `c₃ = −(a/2 + σ(2/3)(n−1)a³) / (2(n+2))`, `σ` the curvature sign.
pub fn series_c3(a: f64, n: usize, target: Target) -> f64 {
    let nm1 = n as f64 - 1.0;
    -(0.5 * a + target.curvature_sign() * (2.0 / 3.0) * nm1 * a * a * a) / (2.0 * (n as f64 + 2.0))
}

/// Odd two-term series start `(h, h')` at `rho0`.
pub fn series_start(a: f64, n: usize, target: Target, rho0: f64) -> Result<(f64, f64)> {
    if !(rho0 > 0.0 && rho0 <= 1e-3) {
        return Err(Error::InvalidParameter(format!("series start needs 0 < rho0 <= 1e-3, got {rho0}")));
    }
    let c3 = series_c3(a, n, target);
    Ok((a * rho0 + c3 * rho0.powi(3), a + 3.0 * c3 * rho0 * rho0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingOptions {
    /// Local error tolerance of the embedded pair (absolute and relative).
    pub rk_tol: f64,
    /// `|h|` above which a hyperbolic profile is declared blown up.
    pub blowup: f64,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        Self { rk_tol: 1e-11, blowup: 50.0 }
    }
}

/// Far-field model `h ≈ α + c₂/ρ² + c₄/ρ⁴ + c₆/ρ⁶`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FarField {
    pub alpha: f64,
    pub c2: f64,
    pub c4: f64,
    pub c6: f64,
    pub condition: f64,
}

const FAR_COLUMNS: usize = 4;

pub const FIT_CONDITION_LIMIT: f64 = 1e8;

/// Least-squares fit of the far-field model (cubic in `x = 1/ρ²`) on the nodes of
/// `[lo·ρ_M, hi·ρ_M]`, columns normalized before the condition check.
pub fn fit_far_field(grid: &RadialGrid, h: &[f64], lo: f64, hi: f64) -> Result<FarField> {
    let rm = grid.rho_max();
    let idx: Vec<usize> = (0..grid.len())
        .filter(|&i| {
            let r = grid.nodes()[i];
            r >= lo * rm && r <= hi * rm
        })
        .collect();
    if idx.len() < FAR_COLUMNS {
        return Err(Error::InvalidParameter("far-field window holds too few nodes".into()));
    }
    if idx.iter().all(|&i| h[i] == 0.0) {
        return Ok(FarField { alpha: 0.0, c2: 0.0, c4: 0.0, c6: 0.0, condition: 1.0 });
    }
    let m = idx.len();
    let mut a = DMatrix::<f64>::zeros(m, FAR_COLUMNS);
    let mut b = DVector::<f64>::zeros(m);
    for (row, &i) in idx.iter().enumerate() {
        let x = 1.0 / (grid.nodes()[i] * grid.nodes()[i]);
        let mut v = 1.0;
        for j in 0..FAR_COLUMNS {
            a[(row, j)] = v;
            v *= x;
        }
        b[row] = h[i];
    }
    let scale: Vec<f64> = (0..FAR_COLUMNS).map(|j| a.column(j).norm()).collect();
    for j in 0..FAR_COLUMNS {
        let s = scale[j];
        a.column_mut(j).scale_mut(1.0 / s);
    }
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = smax / smin;
    if !(condition <= FIT_CONDITION_LIMIT) {
        return Err(Error::IllConditionedFit { condition });
    }
    let coef = svd
        .solve(&b, 0.0)
        .map_err(|_| Error::IllConditionedFit { condition })?;
    Ok(FarField {
        alpha: coef[0] / scale[0],
        c2: coef[1] / scale[1],
        c4: coef[2] / scale[2],
        c6: coef[3] / scale[3],
        condition,
    })
}

pub const FAR_WINDOW: (f64, f64) = (0.6, 0.9);

/// Far-field coefficients predicted by the ODE for boundary angle `alpha`:
/// `c₂ = −(n−1)g(α)`, `c₄ = c₂(6 − 2(n−1) − (n−1)g'(α))/2`.
pub fn far_field_coefficients(alpha: f64, n: usize, target: Target) -> (f64, f64) {
    let nm1 = n as f64 - 1.0;
    let c2 = -nm1 * target.g(alpha);
    let c4 = 0.5 * c2 * (6.0 - 2.0 * nm1 - nm1 * target.g_prime(alpha));
    (c2, c4)
}

/// An equivariant expander candidate sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub grid: RadialGrid,
    pub h: Vec<f64>,
    pub dh: Vec<f64>,
    pub n: usize,
    pub target: Target,
    pub shoot_param: f64,
    pub alpha_inf: f64,
    pub c2: f64,
    /// Only differences of profiles carry a trace; always `None` for a single profile.
    pub trace_coeff: Option<f64>,
}

impl Profile {
    /// The constant map `h ≡ 0`.
    pub fn trivial(n: usize, target: Target, grid: &RadialGrid) -> Self {
        Self {
            grid: grid.clone(),
            h: vec![0.0; grid.len()],
            dh: vec![0.0; grid.len()],
            n,
            target,
            shoot_param: 0.0,
            alpha_inf: 0.0,
            c2: 0.0,
            trace_coeff: None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.h.iter().all(|&v| v == 0.0)
    }

    /// Largest `|h'' − rhs|` over interior nodes, `h''` from a 7-point centered
    /// difference of `h'`, scaled by `1 + |(n−1)g(h)/ρ²|` so the singular
    /// terms near the origin are measured relatively.
    pub fn ode_residual(&self) -> f64 {
        let d2 = self.grid.derivative(&self.dh, 1, 7);
        let nm1 = self.n as f64 - 1.0;
        let x = self.grid.nodes();
        (3..x.len() - 3)
            .map(|i| {
                let r = x[i];
                let singular = nm1 * self.target.g(self.h[i]) / (r * r);
                (d2[i] - rhs_unchecked(r, self.h[i], self.dh[i], nm1, self.target)).abs() / (1.0 + singular.abs())
            })
            .fold(0.0, f64::max)
    }

    /// `sup_ρ √f · |∇u|` with `|∇u|² = h'² + (n−1) q(h)/ρ²`.
    pub fn gradient_bound(&self) -> f64 {
        let p = PotentialParams::unit(self.n).expect("profile dimension is valid");
        let nm1 = self.n as f64 - 1.0;
        self.grid
            .nodes()
            .iter()
            .zip(self.h.iter().zip(&self.dh))
            .map(|(&r, (&h, &dh))| {
                (potential_f(r, p) * (dh * dh + nm1 * self.target.q(h) / (r * r))).sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// Hyperbolic profiles with `a ≠ 0` should be monotone in `ρ`.
    pub fn is_monotone(&self) -> bool {
        let s = self.shoot_param.signum();
        self.h.windows(2).all(|w| s * (w[1] - w[0]) >= 0.0)
    }

    pub fn sup_distance(&self, other: &Profile) -> f64 {
        self.h.iter().zip(&other.h).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates the reduced ODE from the series start to `ρ_M`, recording
/// `(h, h')` at every grid node.
pub fn integrate_profile(
    a: f64,
    n: usize,
    target: Target,
    grid: &RadialGrid,
    opts: ShootingOptions,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let x = grid.nodes();
    let m = x.len();
    let nm1 = n as f64 - 1.0;
    let (h0, dh0) = series_start(a, n, target, grid.rho0())?;
    let mut h = Vec::with_capacity(m);
    let mut dh = Vec::with_capacity(m);
    h.push(h0);
    dh.push(dh0);
    if a == 0.0 {
        return Ok((vec![0.0; m], vec![0.0; m]));
    }
    let f = |r: f64, y: [f64; 2]| -> [f64; 2] { [y[1], rhs_unchecked(r, y[0], y[1], nm1, target)] };
    let tol = opts.rk_tol;
    let mut y = [h0, dh0];
    let mut r = x[0];
    let mut step = 0.1 * grid.spacing(0);
    let mut k = [[0.0f64; 2]; 7];
    k[0] = f(r, y);
    for &node in &x[1..] {
        while r < node {
            let last = node - r <= step * (1.0 + 1e-12);
            let hstep = if last { node - r } else { step };
            for s in 1..7 {
                let mut ys = y;
                for j in 0..s {
                    ys[0] += hstep * A[s][j] * k[j][0];
                    ys[1] += hstep * A[s][j] * k[j][1];
                }
                k[s] = f(r + C[s] * hstep, ys);
            }
            let mut y5 = y;
            let mut err = 0.0f64;
            for c in 0..2 {
                let mut s5 = 0.0;
                let mut s4 = 0.0;
                for s in 0..7 {
                    s5 += B5[s] * k[s][c];
                    s4 += B4[s] * k[s][c];
                }
                y5[c] += hstep * s5;
                let sc = tol * (1.0 + y[c].abs().max(y5[c].abs()));
                err = err.max((hstep * (s5 - s4)).abs() / sc);
            }
            if !err.is_finite() || !y5[0].is_finite() {
                err = f64::INFINITY;
            }
            if err <= 1.0 {
                r = if last { node } else { r + hstep };
                y = y5;
                k[0] = k[6];
                if target == Target::Hyperbolic && y[0].abs() > opts.blowup {
                    return Err(Error::BlowUp { rho: r, threshold: opts.blowup });
                }
                let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                if !last || grow < 1.0 {
                    step = hstep * grow;
                }
            } else {
                let shrink = if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.1, 0.9) } else { 0.1 };
                step = hstep * shrink;
                if step < 1e-14 * r.max(1e-300) {
                    return Err(Error::StepSizeUnderflow { rho: r, step });
                }
            }
        }
        h.push(y[0]);
        dh.push(y[1]);
    }
    Ok((h, dh))
}

/// Shoots with slope `a` and reads the boundary angle from the far field.
pub fn shoot(a: f64, n: usize, target: Target, grid: &RadialGrid, opts: ShootingOptions) -> Result<Profile> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("dimension n = {n} must be at least 3")));
    }
    let (h, dh) = integrate_profile(a, n, target, grid, opts)?;
    let mut p = Profile {
        grid: grid.clone(),
        h,
        dh,
        n,
        target,
        shoot_param: a,
        alpha_inf: 0.0,
        c2: 0.0,
        trace_coeff: None,
    };
    let (alpha, c2, _) = asymptotics(&p)?;
    p.alpha_inf = alpha;
    p.c2 = c2;
    Ok(p)
}

/// `(α, c₂, trace)` from the far-field fit on `[0.6, 0.9]·ρ_M`; the trace
/// belongs to differences of profiles and is absent here.
pub fn asymptotics(p: &Profile) -> Result<(f64, f64, Option<f64>)> {
    if p.grid.rho_max() < 20.0 {
        return Err(Error::InvalidParameter(format!(
            "far-field extraction needs rho_max >= 20, got {}",
            p.grid.rho_max()
        )));
    }
    let ff = fit_far_field(&p.grid, &p.h, FAR_WINDOW.0, FAR_WINDOW.1)?;
    Ok((ff.alpha, ff.c2, None))
}

/// Boundary angle as a function of the shooting slope, sampled on a sweep.
#[derive(Debug, Clone)]
pub struct ShootingSweep {
    pub n: usize,
    pub target: Target,
    pub grid: RadialGrid,
    pub opts: ShootingOptions,
    /// `(a, α_inf(a))`, or the failure message for that sample.
    pub samples: Vec<(f64, std::result::Result<f64, String>)>,
}

pub const MIN_SWEEP_SAMPLES: usize = 200;

impl ShootingSweep {
    /// Samples `[lo, hi]` at `count` evenly spaced slopes (evaluated in
    /// parallel, stored in slope order). `a = 0` is inserted when it lies inside.
    pub fn new(
        lo: f64,
        hi: f64,
        count: usize,
        n: usize,
        target: Target,
        grid: &RadialGrid,
        opts: ShootingOptions,
    ) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::InvalidParameter("search interval must be finite".into()));
        }
        let mut slopes: Vec<f64> = if hi > lo {
            let count = count.max(MIN_SWEEP_SAMPLES);
            (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect()
        } else {
            Vec::new()
        };
        if lo < 0.0 && hi > 0.0 && !slopes.contains(&0.0) {
            slopes.push(0.0);
            slopes.sort_by(f64::total_cmp);
        }
        let samples = slopes
            .par_iter()
            .map(|&a| (a, boundary_angle(a, n, target, grid, opts).map_err(|e| e.to_string())))
            .collect();
        Ok(Self { n, target, grid: grid.clone(), opts, samples })
    }

    /// Successful `(a, α)` pairs in slope order; hyperbolic escapes appear as `±∞`.
    pub fn successes(&self) -> Vec<(f64, f64)> {
        self.samples.iter().filter_map(|(a, r)| r.as_ref().ok().map(|&v| (*a, v))).collect()
    }

    /// Finite boundary angles strictly increasing in the slope.
    pub fn is_strictly_increasing(&self) -> bool {
        let finite: Vec<f64> = self.successes().into_iter().map(|(_, v)| v).filter(|v| v.is_finite()).collect();
        finite.windows(2).all(|w| w[1] > w[0])
    }

    pub fn failures(&self) -> Vec<(f64, String)> {
        self.samples.iter().filter_map(|(a, r)| r.as_ref().err().map(|e| (*a, e.clone()))).collect()
    }

    /// All profiles attaining `alpha`, found by bracketing sign changes of
    /// `α_inf(a) − alpha` between consecutive successful samples and bisecting
    /// to `bv_tol` in `a`.
    pub fn solve(&self, alpha: f64, bv_tol: f64) -> Result<BoundaryValueSolutionSet> {
        let ok = self.successes();
        let mut brackets = Vec::new();
        let mut exact = Vec::new();
        for (i, &(a, v)) in ok.iter().enumerate() {
            if v - alpha == 0.0 {
                exact.push(a);
                continue;
            }
            if let Some(&(b, w)) = ok.get(i + 1) {
                if w - alpha != 0.0 && (v - alpha).signum() != (w - alpha).signum() {
                    brackets.push(Bracket { a_lo: a, a_hi: b, f_lo: v - alpha, f_hi: w - alpha });
                }
            }
        }
        let roots: Vec<std::result::Result<Profile, String>> = brackets
            .par_iter()
            .map(|br| self.bisect(br, alpha, bv_tol).map_err(|e| e.to_string()))
            .collect();
        let mut profiles = Vec::new();
        let mut failures = self.failures();
        for a in exact {
            profiles.push(shoot(a, self.n, self.target, &self.grid, self.opts)?);
        }
        for (br, r) in brackets.iter().zip(roots) {
            match r {
                Ok(p) => profiles.push(p),
                Err(e) => failures.push((0.5 * (br.a_lo + br.a_hi), e)),
            }
        }
        profiles.sort_by(|p, q| p.shoot_param.total_cmp(&q.shoot_param));
        let mut distinct: Vec<Profile> = Vec::new();
        for p in profiles {
            if distinct.last().is_none_or(|q| q.sup_distance(&p) > 10.0 * bv_tol) {
                distinct.push(p);
            }
        }
        Ok(BoundaryValueSolutionSet { alpha_target: alpha, profiles: distinct, bracket_log: brackets, failures })
    }

    fn bisect(&self, br: &Bracket, alpha: f64, bv_tol: f64) -> Result<Profile> {
        let (mut lo, mut hi, mut flo) = (br.a_lo, br.a_hi, br.f_lo);
        // The reduction is odd in h: the constant map is the exact root for α = 0.
        if alpha == 0.0 && lo <= 0.0 && hi >= 0.0 {
            return shoot(0.0, self.n, self.target, &self.grid, self.opts);
        }
        let mut best: Option<Profile> = None;
        while hi - lo > bv_tol {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            let fm = match shoot(mid, self.n, self.target, &self.grid, self.opts) {
                Ok(p) => {
                    let fm = p.alpha_inf - alpha;
                    best = Some(p);
                    fm
                }
                Err(Error::BlowUp { .. }) if self.target == Target::Hyperbolic => mid.signum() * f64::INFINITY,
                Err(e) => return Err(e),
            };
            if fm == 0.0 {
                break;
            }
            if fm.signum() == flo.signum() {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        match best {
            Some(p) => Ok(p),
            None => {
                let a = if br.f_lo.is_finite() { br.a_lo } else { br.a_hi };
                shoot(a, self.n, self.target, &self.grid, self.opts)
            }
        }
    }
}

/// `α_inf(a)`; a hyperbolic shot that escapes counts as `α = ±∞` (sign of `a`).
pub fn boundary_angle(a: f64, n: usize, target: Target, grid: &RadialGrid, opts: ShootingOptions) -> Result<f64> {
    match shoot(a, n, target, grid, opts) {
        Ok(p) => Ok(p.alpha_inf),
        Err(Error::BlowUp { .. }) if target == Target::Hyperbolic => Ok(a.signum() * f64::INFINITY),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bracket {
    pub a_lo: f64,
    pub a_hi: f64,
    pub f_lo: f64,
    pub f_hi: f64,
}

#[derive(Debug, Clone)]
pub struct BoundaryValueSolutionSet {
    pub alpha_target: f64,
    pub profiles: Vec<Profile>,
    pub bracket_log: Vec<Bracket>,
    /// Slopes whose shots failed, with the reason.
    pub failures: Vec<(f64, String)>,
}

pub const DEFAULT_BV_TOL: f64 = 1e-10;

/// All expanders with boundary angle `alpha` whose slope lies in `search`.
pub fn solve_boundary_value(
    alpha: f64,
    n: usize,
    target: Target,
    search: (f64, f64),
    grid: &RadialGrid,
    opts: ShootingOptions,
    samples: usize,
    bv_tol: f64,
) -> Result<BoundaryValueSolutionSet> {
    if !(alpha >= 0.0) {
        return Err(Error::InvalidParameter(format!("boundary angle must be nonnegative, got {alpha}")));
    }
    let sweep = ShootingSweep::new(search.0, search.1, samples, n, target, grid, opts)?;
    sweep.solve(alpha, bv_tol)
}
