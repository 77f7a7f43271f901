//! Weighted diagnostics of equivariant maps: energy density, relative entropy
//! against an expander, its dissipation, the frequency function and the
//! Pohozaev identity, and the sharp decay of differences with their trace.
//!
//! All `e^{+f}`-weighted integrals are formed from pointwise differences
//! before weighting; the Gaussian weight of the entropy is
//! `e^{ρ²/4}/(4π)^{n/2}` at the normalized slice `t = 1`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow_pde::{obstruction, FlowState};
use crate::profile_ode::{Profile, Target};
use crate::stencil::fornberg_weights;
use crate::weighted_geometry::{integrate, potential_f, unit_sphere_area, CompensatedSum, PotentialParams, RadialGrid};

/// A sampled equivariant map: a background plus an optional exact offset.
pub trait RadialMap {
    fn grid(&self) -> &RadialGrid;
    fn dimension(&self) -> usize;
    fn target(&self) -> Target;
    fn boundary_angle(&self) -> f64;
    /// `(b, b')`.
    fn background(&self) -> (&[f64], &[f64]);
    /// Offset `δ` carried on top of the background, if any.
    fn offset(&self) -> Option<&[f64]>;
    fn angle(&self) -> Vec<f64>;
    fn slope(&self) -> Vec<f64>;
}

impl RadialMap for Profile {
    fn grid(&self) -> &RadialGrid {
        &self.grid
    }
    fn dimension(&self) -> usize {
        self.n
    }
    fn target(&self) -> Target {
        self.target
    }
    fn boundary_angle(&self) -> f64 {
        self.alpha_inf
    }
    fn background(&self) -> (&[f64], &[f64]) {
        (&self.h, &self.dh)
    }
    fn offset(&self) -> Option<&[f64]> {
        None
    }
    fn angle(&self) -> Vec<f64> {
        self.h.clone()
    }
    fn slope(&self) -> Vec<f64> {
        self.dh.clone()
    }
}

impl RadialMap for FlowState {
    fn grid(&self) -> &RadialGrid {
        &self.grid
    }
    fn dimension(&self) -> usize {
        self.n
    }
    fn target(&self) -> Target {
        self.target
    }
    fn boundary_angle(&self) -> f64 {
        self.alpha
    }
    fn background(&self) -> (&[f64], &[f64]) {
        (&self.base, &self.base_dh)
    }
    fn offset(&self) -> Option<&[f64]> {
        Some(&self.delta)
    }
    fn angle(&self) -> Vec<f64> {
        self.h()
    }
    fn slope(&self) -> Vec<f64> {
        FlowState::slope(self)
    }
}

fn interpolate(x: &[f64], y: &[f64], z: f64) -> f64 {
    let m = x.len();
    let i = x.partition_point(|&v| v < z);
    if i < m && x[i] == z {
        return y[i];
    }
    let start = i.saturating_sub(2).min(m - 4);
    let w = fornberg_weights(z, &x[start..start + 4], 0);
    w[0].iter().zip(&y[start..start + 4]).map(|(a, b)| a * b).sum()
}

/// `½(h'² + (n−1) q(h)/ρ²)`, interpolated between nodes.
pub fn energy_density<M: RadialMap + ?Sized>(map: &M, rho: f64) -> Result<f64> {
    let grid = map.grid();
    grid.check_range(rho)?;
    let h = interpolate(grid.nodes(), &map.angle(), rho);
    let dh = interpolate(grid.nodes(), &map.slope(), rho);
    Ok(0.5 * (dh * dh + (map.dimension() as f64 - 1.0) * map.target().q(h) / (rho * rho)))
}

/// `|∇u|² = h'² + (n−1)q(h)/ρ²` at every node.
pub fn gradient_squared<M: RadialMap + ?Sized>(map: &M) -> Vec<f64> {
    let nm1 = map.dimension() as f64 - 1.0;
    let t = map.target();
    map.grid()
        .nodes()
        .iter()
        .zip(map.angle().iter().zip(map.slope()))
        .map(|(&r, (&h, dh))| dh * dh + nm1 * t.q(h) / (r * r))
        .collect()
}

/// `ω_{n−1}/(4π)^{n/2}`.
fn entropy_constant(n: usize) -> f64 {
    unit_sphere_area(n) / (4.0 * std::f64::consts::PI).powf(0.5 * n as f64)
}

/// Gauss–Legendre 4 nodes and weights on `[−1, 1]`.
const GL4: [(f64, f64); 4] = [
    (-0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
    (-0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
];

/// `∫_{ρ₀}^{ρ_end} y e^{ρ²/4} ρ^{n−1} dρ` over nodes `0..=end`, returned as
/// cumulative values at scale `e^{ρ_end²/4}`. `y` is interpolated by local
/// cubics; the weight is evaluated exactly at Gauss points, since near the
/// outer radius it varies on the scale `2/ρ`.
fn prefix_weighted(x: &[f64], y: &[f64], end: usize, n: usize) -> (Vec<f64>, f64) {
    let shift = 0.25 * x[end] * x[end];
    let nm1 = n as f64 - 1.0;
    let len = x.len().min(y.len());
    let mut cum = vec![0.0; end + 1];
    let mut acc = CompensatedSum::new();
    for k in 0..end {
        let (a, b) = (x[k], x[k + 1]);
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        let start = k.saturating_sub(1).min(len.saturating_sub(4));
        let stop = (start + 4).min(len);
        let mut part = 0.0;
        for &(t, w) in &GL4 {
            let z = mid + half * t;
            let c = fornberg_weights(z, &x[start..stop], 0);
            let v: f64 = c[0].iter().zip(&y[start..stop]).map(|(p, q)| p * q).sum();
            part += w * v * (0.25 * z * z - shift + nm1 * z.ln()).exp();
        }
        acc.add(half * part);
        cum[k + 1] = acc.value();
    }
    (cum, shift)
}

fn scaled_value(mantissa: f64, shift: f64) -> Result<f64> {
    if mantissa == 0.0 {
        return Ok(0.0);
    }
    let ln = mantissa.abs().ln() + shift;
    if ln > 709.0 {
        return Err(Error::Overflow { log_magnitude: ln });
    }
    Ok(mantissa * shift.exp())
}

/// Noise level of a difference of two independently computed angle arrays.
pub fn difference_noise(a: &[f64], b: &[f64]) -> f64 {
    let scale = a.iter().chain(b).fold(1.0f64, |m, v| m.max(v.abs()));
    1e3 * f64::EPSILON * scale
}

/// `a − b` with its slope, and whether it is exact (the offset of a state
/// over this very background) or a subtraction of two computed arrays.
struct Difference {
    delta: Vec<f64>,
    ddelta: Vec<f64>,
    exact: bool,
}

fn difference<M: RadialMap + ?Sized>(a: &M, b: &Profile) -> Result<Difference> {
    if a.grid() != &b.grid {
        return Err(Error::GridMismatch);
    }
    if a.dimension() != b.n || a.target() != b.target {
        return Err(Error::InvalidParameter("maps differ in dimension or target".into()));
    }
    let (base, _) = a.background();
    if base == b.h.as_slice() {
        let delta = a.offset().map_or_else(|| vec![0.0; base.len()], |d| d.to_vec());
        let ddelta = b.grid.derivative(&delta, 1, 7);
        Ok(Difference { delta, ddelta, exact: true })
    } else {
        let h = a.angle();
        let dh = a.slope();
        Ok(Difference {
            delta: h.iter().zip(&b.h).map(|(x, y)| x - y).collect(),
            ddelta: dh.iter().zip(&b.dh).map(|(x, y)| x - y).collect(),
            exact: false,
        })
    }
}

/// `F(a) − F(background)` for the self-similar flow operator `F`, i.e. the
/// obstruction of a slice whose background is a steady state.
pub fn slice_obstruction<M: RadialMap + ?Sized>(map: &M) -> Vec<f64> {
    let grid = map.grid();
    let Some(delta) = map.offset() else {
        return vec![0.0; grid.len()];
    };
    let (base, _) = map.background();
    let d1 = grid.derivative(delta, 1, 7);
    let d2 = grid.derivative(delta, 2, 7);
    let nm1 = map.dimension() as f64 - 1.0;
    let t = map.target();
    let x = grid.nodes();
    let m = x.len();
    (0..m)
        .map(|i| {
            if i == 0 || i == m - 1 {
                return 0.0;
            }
            let r = x[i];
            d2[i] + (nm1 / r + 0.5 * r) * d1[i] - nm1 * t.g_diff(base[i], delta[i]) / (r * r)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryAudit {
    /// Sphere term `ω(a'+b') S(δ) G R^{n−1}` at the cutoff radius.
    pub boundary_term: f64,
    /// Same term at the inner radius.
    pub origin_term: f64,
    /// `|weighted entropy integrand|` at the cutoff radius.
    pub outer_integrand: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyReport {
    pub value: f64,
    pub value_ibp: f64,
    /// `2ω∫ o² G ρ^{n−1}` with `o` the slice obstruction.
    pub dissipation: f64,
    pub boundary_audit: BoundaryAudit,
    pub truncation_bound: f64,
    /// Radius where the integrals stop (noise floor of the difference, or `ρ_M`).
    pub cutoff_radius: f64,
}

impl EntropyReport {
    /// Routes within `max(1e-8, 10·truncation_bound)`; never true for an
    /// integrand that does not decay fast enough to be summable.
    pub fn routes_agree(&self) -> bool {
        self.truncation_bound.is_finite()
            && (self.value - self.value_ibp).abs() <= 1e-8f64.max(10.0 * self.truncation_bound)
    }
}

pub const ANGLE_MATCH_TOL: f64 = 1e-6;

/// Power-law envelope `|w| ≈ e^c ρ^p` fitted on `[R/2, R]`, integrated to infinity.
fn power_tail(x: &[f64], w: &[f64], end: usize) -> f64 {
    let r = x[end];
    let pts: Vec<(f64, f64)> = (0..=end)
        .filter(|&i| x[i] >= 0.5 * r && w[i] != 0.0)
        .map(|i| (x[i].ln(), w[i].abs().ln()))
        .collect();
    if pts.len() < 3 {
        return 0.0;
    }
    let k = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1));
    let (mx, my) = (sx / k, sy / k);
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + (p.0 - mx) * (p.1 - my), b + (p.0 - mx) * (p.0 - mx)));
    let p = sxy / sxx;
    // Shift the fit up to the envelope so it dominates every sample.
    let c = pts.iter().map(|q| q.1 - p * q.0).fold(f64::NEG_INFINITY, f64::max);
    if p >= -1.0 {
        return f64::INFINITY;
    }
    (c + (p + 1.0) * r.ln()).exp() / (-p - 1.0)
}

/// Relative entropy `E(a, b) = ω∫(|∇a|² − |∇b|²) e^{ρ²/4}(4π)^{−n/2} ρ^{n−1} dρ`
/// against an expander `b`, by the direct route and by integration by parts.
/// `t` only labels the slice: the quantity is scale invariant.
pub fn relative_entropy<M: RadialMap + ?Sized>(a: &M, b: &Profile, t: f64) -> Result<EntropyReport> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("time must be positive, got {t}")));
    }
    if (a.boundary_angle() - b.alpha_inf).abs() > ANGLE_MATCH_TOL {
        return Err(Error::BoundaryAngleMismatch { alpha_a: a.boundary_angle(), alpha_b: b.alpha_inf });
    }
    let d = difference(a, b)?;
    let grid = &b.grid;
    let x = grid.nodes();
    let m = x.len();
    let n = b.n;
    let nm1 = n as f64 - 1.0;
    let tg = b.target;

    let end = if d.exact {
        m - 1
    } else {
        let noise = difference_noise(&a.angle(), &b.h);
        let start = grid.index_at_or_above(2.0);
        (start..m).find(|&i| d.delta[i].abs() < noise).map_or(m - 1, |i| i.saturating_sub(1).max(start))
    };

    let ig: Vec<f64> = (0..m)
        .map(|i| {
            let r = x[i];
            d.ddelta[i] * (2.0 * b.dh[i] + d.ddelta[i]) + nm1 * tg.q_diff(b.h[i], d.delta[i]) / (r * r)
        })
        .collect();
    if ig[..=end].iter().all(|&v| v == 0.0) {
        return Ok(EntropyReport {
            value: 0.0,
            value_ibp: 0.0,
            dissipation: 0.0,
            boundary_audit: BoundaryAudit { boundary_term: 0.0, origin_term: 0.0, outer_integrand: 0.0 },
            truncation_bound: 0.0,
            cutoff_radius: x[end],
        });
    }
    let lw: Vec<f64> = x.iter().map(|&r| 0.25 * r * r + nm1 * r.ln()).collect();
    let shift = lw[end];
    let w: Vec<f64> = (0..=end).map(|i| ig[i] * (lw[i] - shift).exp()).collect();

    let half = x.partition_point(|&r| r < 0.5 * x[end]);
    let inner = w[..half.max(1)].iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let outer_idx = (half..=end).max_by(|&i, &j| w[i].abs().total_cmp(&w[j].abs())).unwrap_or(end);
    if !d.exact && w[outer_idx].abs() > 1e6 * inner {
        return Err(Error::FarFieldMismatch { rho: x[outer_idx], difference: d.delta[outer_idx] });
    }

    let k = entropy_constant(n);
    let value = k * scaled_value(integrate(&x[..=end], &w), shift)?;

    let o = slice_obstruction(a);
    let sgn = tg.curvature_sign();
    let bulk: Vec<f64> = (0..=end)
        .map(|i| {
            let sh = tg.sn(0.5 * d.delta[i]);
            let one_minus_c = 2.0 * sgn * sh * sh;
            (one_minus_c * ig[i] - o[i] * tg.sn(d.delta[i])) * (lw[i] - shift).exp()
        })
        .collect();
    let bterm = |i: usize| -> Result<f64> {
        let s = (2.0 * b.dh[i] + d.ddelta[i]) * tg.sn(d.delta[i]);
        Ok(k * scaled_value(s, lw[i])?)
    };
    let boundary_term = bterm(end)?;
    let origin_term = bterm(0)?;
    let value_ibp = k * scaled_value(integrate(&x[..=end], &bulk), shift)? + boundary_term - origin_term;

    let diss: Vec<f64> = (0..=end).map(|i| o[i] * o[i] * (lw[i] - shift).exp()).collect();
    let dissipation = 2.0 * k * scaled_value(integrate(&x[..=end], &diss), shift)?;

    let wk: Vec<f64> = w.iter().map(|v| k * v).collect();
    // An exact difference cut at ρ_M has nothing beyond the Dirichlet node.
    let tail = if end == m - 1 && d.exact { 0.0 } else { power_tail(x, &wk, end) };
    Ok(EntropyReport {
        value,
        value_ibp,
        dissipation,
        boundary_audit: BoundaryAudit {
            boundary_term,
            origin_term,
            outer_integrand: k * scaled_value(w[end].abs(), shift)?,
        },
        truncation_bound: if tail.is_finite() { scaled_value(tail, shift)? } else { f64::INFINITY },
        cutoff_radius: x[end],
    })
}

/// `2ω∫ o² e^{ρ²/4}(4π)^{−n/2} ρ^{n−1}` with `o = (h − h_prev)/Δs`.
pub fn dissipation(state: &FlowState, prev: &FlowState, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("time must be positive, got {t}")));
    }
    let o = obstruction(state, prev)?;
    let x = state.grid.nodes();
    let end = x.len() - 1;
    let sq: Vec<f64> = o.values.iter().map(|v| v * v).collect();
    let (cum, shift) = prefix_weighted(x, &sq, end, state.n);
    Ok(2.0 * entropy_constant(state.n) * scaled_value(cum[end], shift)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyReport {
    pub radii: Vec<f64>,
    pub frequency: Vec<f64>,
    /// Largest relative defect of the differentiated Pohozaev identity.
    pub pohozaev_residual: f64,
    pub strictly_increasing: bool,
    /// `min (y' − (R/2) y)/y` over the radii, `y` the angular energy on balls.
    pub gronwall_margin: f64,
}

/// `count` grid nodes spread evenly over `[1, 0.75 ρ_M]`.
pub fn default_radii(grid: &RadialGrid, count: usize) -> Vec<f64> {
    let (lo, hi) = (1.0, 0.75 * grid.rho_max());
    (0..count)
        .map(|k| grid.nodes()[grid.nearest_index(lo + (hi - lo) * k as f64 / (count.max(2) - 1) as f64)])
        .collect()
}

/// Frequency `N(R) = R² Y(R)/|B(0,R)|`, `Y = ∫_B|∇u|² dμ_f`, the Euclidean ball
/// average. Pohozaev residual checks
/// `∂_R(R^{2−n}Y) = R^{1−n}∫_B (r²/2)|∇u|² dμ_f + 2ωR h'(R)² e^{f(R)}`
/// with `∂_R` taken exactly on the quadrature (`Y' = ω|∇u|²R^{n−1}e^f`).
pub fn frequency(p: &Profile, radii: &[f64]) -> Result<FrequencyReport> {
    let grid = &p.grid;
    let x = grid.nodes();
    let n = p.n;
    let nf = n as f64;
    let nm1 = nf - 1.0;
    let grad = gradient_squared(p);
    let moment: Vec<f64> = grad.iter().zip(x).map(|(g, r)| 0.5 * r * r * g).collect();
    let angular: Vec<f64> = p.h.iter().map(|&h| nm1 * p.target.q(h)).collect();
    let mut frequency = Vec::with_capacity(radii.len());
    let mut residual = 0.0f64;
    let mut margin = f64::INFINITY;
    for &r in radii {
        grid.check_range(r)?;
        let i = grid.nearest_index(r);
        let r = x[i];
        // All at scale e^{shift}, shift = R²/4; the common factor ω cancels.
        let (y, _) = prefix_weighted(x, &grad, i, n);
        let (mo, _) = prefix_weighted(x, &moment, i, n);
        let (ya, _) = prefix_weighted(x, &angular, i, n);
        let (y, mo, ya) = (y[i], mo[i], ya[i]);
        let ball = r.powi(n as i32) / nf;
        let ball_scaled = ball * (-0.25 * r * r).exp();
        frequency.push(if y == 0.0 { 0.0 } else { r * r * y / ball_scaled });

        let lhs = (2.0 - nf) * r.powf(1.0 - nf) * y + r * grad[i];
        let rhs = r.powf(1.0 - nf) * mo + 2.0 * r * p.dh[i] * p.dh[i];
        if rhs != 0.0 || lhs != 0.0 {
            residual = residual.max((lhs - rhs).abs() / rhs.abs().max(lhs.abs()));
        }

        let dy = angular[i] * r.powf(nm1);
        if ya > 0.0 {
            margin = margin.min((dy - 0.5 * r * ya) / ya);
        }
    }
    let strictly_increasing = frequency.windows(2).all(|w| w[1] > w[0]);
    Ok(FrequencyReport {
        radii: radii.iter().map(|&r| x[grid.nearest_index(r)]).collect(),
        frequency,
        pohozaev_residual: residual,
        strictly_increasing,
        gronwall_margin: if margin.is_finite() { margin } else { 0.0 },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit {
    pub window: (f64, f64),
    /// `lim f^{n/2} e^{f} (h₂ − h₁)`.
    pub trace: f64,
    /// RMS defect of the log model over the window, with the fit weights.
    pub fit_residual: f64,
    /// Coefficients of `c₀ + c₁/f + c₂/f²`.
    pub coefficients: [f64; 3],
    /// Envelope exponent `θ` in `e^{−θ f}`.
    pub exponent: f64,
    pub points: usize,
}

pub const FIT_RESIDUAL_GATE: f64 = 0.05;
/// Lower end of the decay window.
pub const DECAY_WINDOW_LO: f64 = 4.0;
const MIN_WINDOW_POINTS: usize = 10;

/// Window of nodes in `[lo, min(0.8ρ_M, first noise crossing)]` with `|d| > noise`.
pub fn decay_window(grid: &RadialGrid, d: &[f64], noise: f64, lo: f64) -> Result<(usize, usize)> {
    let x = grid.nodes();
    let start = grid.index_at_or_above(lo);
    let cap = grid.index_at_or_above(0.8 * grid.rho_max()).min(x.len() - 1);
    let mut end = start;
    while end <= cap && d[end].abs() > noise {
        end += 1;
    }
    if end < start + MIN_WINDOW_POINTS {
        return Err(Error::EmptyWindow);
    }
    Ok((start, end - 1))
}

/// Fits `log(|d| f^{n/2} e^{θf}) = c₀ + c₁/f + c₂/f²` on nodes `start..=end`,
/// weighting each node by `|d|` (the inverse of its relative rounding error).
pub fn fit_trace(grid: &RadialGrid, n: usize, d: &[f64], window: (usize, usize), exponent: f64) -> Result<DecayFit> {
    let (start, end) = window;
    let x = grid.nodes();
    let p = PotentialParams::unit(n)?;
    let k = end + 1 - start;
    let dmax = d[start..=end].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut a = DMatrix::<f64>::zeros(k, 3);
    let mut b = DVector::<f64>::zeros(k);
    let mut rows = Vec::with_capacity(k);
    for (row, i) in (start..=end).enumerate() {
        let f = potential_f(x[i], p);
        let y = d[i].abs().ln() + 0.5 * n as f64 * f.ln() + exponent * f;
        let w = d[i].abs() / dmax;
        a[(row, 0)] = w;
        a[(row, 1)] = w / f;
        a[(row, 2)] = w / (f * f);
        b[row] = w * y;
        rows.push((f, y, w));
    }
    let c = a
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::InvalidParameter(format!("decay fit failed: {e}")))?;
    let (num, den) = rows.iter().fold((0.0, 0.0), |(a, b), &(f, y, w)| {
        (a + (w * (y - c[0] - c[1] / f - c[2] / (f * f))).powi(2), b + w * w)
    });
    let rms = (num / den).sqrt();
    let sign = d[start].signum();
    Ok(DecayFit {
        window: (x[start], x[end]),
        trace: sign * c[0].exp(),
        fit_residual: rms,
        coefficients: [c[0], c[1], c[2]],
        exponent,
        points: k,
    })
}

fn profile_pair(p1: &Profile, p2: &Profile) -> Result<(Vec<f64>, f64)> {
    if p1.grid != p2.grid {
        return Err(Error::GridMismatch);
    }
    if p1.n != p2.n || p1.target != p2.target {
        return Err(Error::InvalidParameter("profiles differ in dimension or target".into()));
    }
    let d: Vec<f64> = p2.h.iter().zip(&p1.h).map(|(a, b)| a - b).collect();
    Ok((d, difference_noise(&p1.h, &p2.h)))
}

/// Trace at infinity of `h₂ − h₁` with envelope exponent `θ` and window start `lo`.
pub fn decay_fit_with(p1: &Profile, p2: &Profile, lo: f64, exponent: f64) -> Result<DecayFit> {
    let (d, noise) = profile_pair(p1, p2)?;
    let window = decay_window(&p1.grid, &d, noise, lo)?;
    fit_trace(&p1.grid, p1.n, &d, window, exponent)
}

/// Trace at infinity of `h₂ − h₁` with the sharp envelope `f^{−n/2}e^{−f}`.
pub fn decay_fit(p1: &Profile, p2: &Profile) -> Result<DecayFit> {
    decay_fit_with(p1, p2, DECAY_WINDOW_LO, 1.0)
}

/// `sup √f |U'| / sup |U|` for `U = f^{n/2}e^{f}(h₁ − h₂)` on the part of the
/// decay window where the difference is at least `10³` times its noise level.
pub fn rescaled_difference_check(p1: &Profile, p2: &Profile) -> Result<f64> {
    let (d, noise) = profile_pair(p1, p2)?;
    let (start, end) = decay_window(&p1.grid, &d, 1e3 * noise, DECAY_WINDOW_LO)?;
    let x = p1.grid.nodes();
    let p = PotentialParams::unit(p1.n)?;
    let lo = start.saturating_sub(1);
    let hi = (end + 1).min(x.len() - 1);
    let u: Vec<f64> = (lo..=hi)
        .map(|i| {
            let f = potential_f(x[i], p);
            d[i] * (0.5 * p1.n as f64 * f.ln() + f).exp()
        })
        .collect();
    let du = crate::stencil::derivative(&x[lo..=hi], &u, 1, 3);
    let mut top = 0.0f64;
    let mut sup = 0.0f64;
    for i in start..=end {
        let j = i - lo;
        top = top.max(potential_f(x[i], p).sqrt() * du[j].abs());
        sup = sup.max(u[j].abs());
    }
    Ok(top / sup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow_pde::{init_perturbed, Stepper};
    use crate::profile_ode::{shoot, ShootingOptions};

    fn grid() -> RadialGrid {
        RadialGrid::default_layout()
    }

    #[test]
    fn energy_density_examples() {
        let g = grid();
        let z = Profile::trivial(3, Target::Sphere, &g);
        assert_eq!(energy_density(&z, 1.0).unwrap(), 0.0);
        let mut eq = z.clone();
        eq.h = vec![std::f64::consts::FRAC_PI_2; g.len()];
        assert!((energy_density(&eq, 1.0).unwrap() - 1.0).abs() < 1e-14);
        assert!(energy_density(&eq, 100.0).is_err());
    }

    #[test]
    fn energy_density_matches_embedded_map() {
        // Oracle: |∇u|²/2 of u(x) = (sin h(r) x/r, cos h(r)) by centered
        // differences in Cartesian coordinates at x = (r, 0, 0).
        let g = grid();
        let p = shoot(0.6, 3, Target::Sphere, &g, ShootingOptions::default()).unwrap();
        let hx = |r: f64| interpolate(g.nodes(), &p.h, r);
        let u = |x: [f64; 3]| -> [f64; 4] {
            let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
            let (s, c) = hx(r).sin_cos();
            [s * x[0] / r, s * x[1] / r, s * x[2] / r, c]
        };
        for r in [0.5, 1.3, 3.0] {
            let e = 1e-4;
            let mut sum = 0.0;
            for k in 0..3 {
                let mut xp = [r, 0.0, 0.0];
                let mut xm = [r, 0.0, 0.0];
                xp[k] += e;
                xm[k] -= e;
                let (up, um) = (u(xp), u(xm));
                for c in 0..4 {
                    let d = (up[c] - um[c]) / (2.0 * e);
                    sum += d * d;
                }
            }
            let got = energy_density(&p, r).unwrap();
            assert!((got - 0.5 * sum).abs() < 1e-6 * got.max(1.0), "{r}: {got} vs {}", 0.5 * sum);
        }
    }

    #[test]
    fn entropy_of_self_is_zero() {
        let g = grid();
        let p = shoot(0.3, 3, Target::Sphere, &g, ShootingOptions::default()).unwrap();
        let r = relative_entropy(&p, &p, 1.0).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.value_ibp, 0.0);
    }

    #[test]
    fn boundary_angle_mismatch_is_rejected() {
        let g = grid();
        let o = ShootingOptions::default();
        let p = shoot(0.3, 3, Target::Sphere, &g, o).unwrap();
        let q = shoot(0.4, 3, Target::Sphere, &g, o).unwrap();
        match relative_entropy(&p, &q, 1.0) {
            Err(Error::BoundaryAngleMismatch { alpha_a, alpha_b }) => {
                assert_eq!(alpha_a, p.alpha_inf);
                assert_eq!(alpha_b, q.alpha_inf);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn perturbed_flow_entropy_routes_agree_and_decrease() {
        let g = grid();
        let p = shoot(0.3, 3, Target::Sphere, &g, ShootingOptions::default()).unwrap();
        let st = init_perturbed(&p, 0.2, 1.5).unwrap();
        let stepper = Stepper::new(&g, 3, 0.05).unwrap();
        let next = stepper.step(&st).unwrap();
        let e0 = relative_entropy(&st, &p, 1.0).unwrap();
        let e1 = relative_entropy(&next, &p, 1.0).unwrap();
        assert!(e0.routes_agree(), "{e0:?}");
        assert!(e1.value < e0.value);
        assert!(dissipation(&next, &st, 1.0).unwrap() > 0.0);
    }

    #[test]
    fn trivial_frequency_vanishes() {
        let g = grid();
        let z = Profile::trivial(3, Target::Sphere, &g);
        let f = frequency(&z, &default_radii(&g, 20)).unwrap();
        assert!(f.frequency.iter().all(|&v| v == 0.0));
        assert!(f.pohozaev_residual <= 1e-12);
    }

    #[test]
    fn synthetic_trace_is_recovered() {
        let g = grid();
        let p1 = shoot(0.5, 3, Target::Sphere, &g, ShootingOptions::default()).unwrap();
        let pp = PotentialParams::unit(3).unwrap();
        let mut p2 = p1.clone();
        for (h, &r) in p2.h.iter_mut().zip(g.nodes()) {
            let f = potential_f(r, pp);
            *h += 2.0 * f.powf(-1.5) * (-f).exp();
        }
        let fit = decay_fit(&p1, &p2).unwrap();
        assert!((fit.trace - 2.0).abs() < 1e-6, "{fit:?}");
        assert!(fit.fit_residual <= 1e-6);
        assert!(rescaled_difference_check(&p1, &p2).unwrap() < 1e-3);
        assert_eq!(decay_fit(&p1, &p1), Err(Error::EmptyWindow));
    }
}
