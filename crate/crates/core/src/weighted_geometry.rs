//! Gaussian potential, radial grids and quadrature against the weights
//! `e^{±f} ρ^{n-1}`.
//!
//! The potential is `f(ρ, t) = ρ²/(4t) + n/2`. Integrals against `e^{+f}`
//! exceed the double range past `ρ ≈ 53`, so every weighted integral is
//! accumulated relative to the largest log-weight on the grid and reported as
//! a mantissa/log-scale pair.

use crate::error::{Error, Result};
use crate::stencil::fornberg_weights;

/// Ambient dimension and time at which the potential is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialParams {
    n: usize,
    t: f64,
}

impl PotentialParams {
    pub fn new(n: usize, t: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidParameter(format!("dimension n = {n} must be at least 3")));
        }
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::InvalidParameter(format!("time t = {t} must be positive")));
        }
        Ok(Self { n, t })
    }

    /// The time-one slice used by all self-similar quantities.
    pub fn unit(n: usize) -> Result<Self> {
        Self::new(n, 1.0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> f64 {
        self.t
    }
}

/// `f(ρ, t) = ρ²/(4t) + n/2`.
pub fn potential_f(rho: f64, p: PotentialParams) -> f64 {
    rho * rho / (4.0 * p.t) + 0.5 * p.n as f64
}

/// Area of the unit sphere `S^{n-1}`, `2 π^{n/2} / Γ(n/2)` with `Γ(n/2)`
/// built from `Γ(1) = 1`, `Γ(1/2) = √π` and `Γ(x+1) = x Γ(x)`.
pub fn unit_sphere_area(n: usize) -> f64 {
    let pi = std::f64::consts::PI;
    let (mut x, mut gamma) = if n % 2 == 0 { (1.0, 1.0) } else { (0.5, pi.sqrt()) };
    let target = 0.5 * n as f64;
    while x < target - 0.25 {
        gamma *= x;
        x += 1.0;
    }
    2.0 * pi.powf(target) / gamma
}

/// Neumaier's compensated summation.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Strictly increasing positive nodes `ρ₀ < … < ρ_M` in the self-similar radius.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    nodes: Vec<f64>,
}

pub const MAX_SPACING: f64 = 0.1;
pub const MIN_RHO_MAX: f64 = 10.0;

impl RadialGrid {
    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 5 {
            return Err(Error::InvalidGrid(format!("need at least 5 nodes, got {}", nodes.len())));
        }
        if !(nodes[0] > 0.0) {
            return Err(Error::InvalidGrid(format!("first node {} must be positive", nodes[0])));
        }
        for (i, w) in nodes.windows(2).enumerate() {
            if !(w[1] > w[0]) || !w[1].is_finite() {
                return Err(Error::InvalidGrid(format!("nodes not strictly increasing at index {}", i + 1)));
            }
            if w[1] - w[0] > MAX_SPACING * (1.0 + 1e-12) {
                return Err(Error::InvalidGrid(format!(
                    "spacing {} at index {} exceeds {MAX_SPACING}",
                    w[1] - w[0],
                    i
                )));
            }
        }
        let rho_max = *nodes.last().unwrap();
        if rho_max < MIN_RHO_MAX {
            return Err(Error::InvalidGrid(format!("rho_max = {rho_max} must be at least {MIN_RHO_MAX}")));
        }
        Ok(Self { nodes })
    }

    /// Geometric layout from `rho0` (ratio 1.05) until the spacing reaches the
    /// uniform spacing, then uniform up to `rho_max`; `count` nodes in total.
    pub fn layered(rho0: f64, rho_max: f64, count: usize) -> Result<Self> {
        const RATIO: f64 = 1.05;
        if !(rho0 > 0.0 && rho0 < 1.0 && rho_max > 1.0) {
            return Err(Error::InvalidGrid(format!("need 0 < rho0 < 1 < rho_max, got {rho0}, {rho_max}")));
        }
        let geometric = |h: f64| -> Vec<f64> {
            let mut v = vec![rho0];
            let mut x = rho0;
            while x * (RATIO - 1.0) < h && x < rho_max {
                x *= RATIO;
                v.push(x);
            }
            v
        };
        // Fixed point for the uniform spacing that yields the requested count.
        let mut h = rho_max / count as f64;
        for _ in 0..50 {
            let g = geometric(h);
            let switch = *g.last().unwrap();
            let remaining = count.saturating_sub(g.len()).max(1);
            let next = (rho_max - switch) / remaining as f64;
            if (next - h).abs() <= 1e-15 * h {
                break;
            }
            h = next;
        }
        let mut nodes = geometric(h);
        let switch = *nodes.last().unwrap();
        let m = ((rho_max - switch) / h).round().max(1.0) as usize;
        let step = (rho_max - switch) / m as f64;
        nodes.extend((1..=m).map(|j| if j == m { rho_max } else { switch + j as f64 * step }));
        Self::new(nodes)
    }

    /// Default layout: `ρ₀ = 1e-4`, `ρ_M = 40`, about 4000 nodes.
    pub fn default_layout() -> Self {
        Self::layered(1e-4, 40.0, 4000).expect("default grid parameters are valid")
    }

    /// Uniform nodes `rho0, rho0 + h, …` up to `rho_max`.
    pub fn uniform(rho0: f64, rho_max: f64, h: f64) -> Result<Self> {
        let m = ((rho_max - rho0) / h).round() as usize;
        Self::new((0..=m).map(|i| rho0 + i as f64 * h).collect())
    }

    /// Bisects every interval.
    pub fn refined(&self) -> Self {
        let mut nodes = Vec::with_capacity(2 * self.nodes.len() - 1);
        for w in self.nodes.windows(2) {
            nodes.push(w[0]);
            nodes.push(0.5 * (w[0] + w[1]));
        }
        nodes.push(self.rho_max());
        Self { nodes }
    }

    /// Appends uniform nodes with the last spacing until `rho_max` is reached.
    pub fn extended(&self, rho_max: f64) -> Result<Self> {
        let h = self.spacing(self.len() - 2);
        let mut nodes = self.nodes.clone();
        let last = self.rho_max();
        let m = ((rho_max - last) / h).round().max(0.0) as usize;
        nodes.extend((1..=m).map(|j| last + j as f64 * h));
        Self::new(nodes)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn rho0(&self) -> f64 {
        self.nodes[0]
    }

    pub fn rho_max(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    /// `ρ_{i+1} − ρ_i`.
    pub fn spacing(&self, i: usize) -> f64 {
        self.nodes[i + 1] - self.nodes[i]
    }

    pub fn max_spacing(&self) -> f64 {
        self.nodes.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    /// Index of the first node `≥ rho`.
    pub fn index_at_or_above(&self, rho: f64) -> usize {
        self.nodes.partition_point(|&x| x < rho).min(self.len() - 1)
    }

    /// Index of the node closest to `rho`.
    pub fn nearest_index(&self, rho: f64) -> usize {
        let i = self.index_at_or_above(rho);
        if i > 0 && (rho - self.nodes[i - 1]).abs() < (self.nodes[i] - rho).abs() {
            i - 1
        } else {
            i
        }
    }

    pub fn check_range(&self, rho: f64) -> Result<()> {
        if rho < self.rho0() || rho > self.rho_max() {
            return Err(Error::OutOfRange { rho, lo: self.rho0(), hi: self.rho_max() });
        }
        Ok(())
    }

    /// Centered finite-difference derivative of order `order` (stencil `width`).
    pub fn derivative(&self, values: &[f64], order: usize, width: usize) -> Vec<f64> {
        crate::stencil::derivative(&self.nodes, values, order, width)
    }
}

/// Samples whose true values are `values · e^{log_scale}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledIntegrand {
    values: Vec<f64>,
    log_scale: f64,
}

pub const MAX_SAMPLE: f64 = 1e300;

impl ScaledIntegrand {
    pub fn new(values: Vec<f64>, log_scale: f64) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite() || v.abs() > MAX_SAMPLE) {
            return Err(Error::NonFinite { index: i, rho: f64::NAN });
        }
        if log_scale.is_nan() {
            return Err(Error::InvalidParameter("log_scale is NaN".into()));
        }
        Ok(Self { values, log_scale })
    }

    pub fn unscaled(values: Vec<f64>) -> Result<Self> {
        Self::new(values, 0.0)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    pub fn scaled(&self, a: f64) -> Result<Self> {
        Self::new(self.values.iter().map(|v| a * v).collect(), self.log_scale)
    }
}

/// A real number `mantissa · e^{log_scale}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogScaled {
    pub mantissa: f64,
    pub log_scale: f64,
}

impl LogScaled {
    pub const ZERO: LogScaled = LogScaled { mantissa: 0.0, log_scale: f64::NEG_INFINITY };

    pub fn new(mantissa: f64, log_scale: f64) -> Self {
        if mantissa == 0.0 {
            Self::ZERO
        } else {
            Self { mantissa, log_scale }
        }
    }

    /// Plain value; `Overflow` if it is not representable.
    pub fn value(&self) -> Result<f64> {
        if self.mantissa == 0.0 {
            return Ok(0.0);
        }
        let v = self.mantissa * self.log_scale.exp();
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Overflow { log_magnitude: self.ln_abs() })
        }
    }

    pub fn ln_abs(&self) -> f64 {
        if self.mantissa == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.mantissa.abs().ln() + self.log_scale
        }
    }

    /// Value expressed at another log scale.
    pub fn at_scale(&self, log_scale: f64) -> f64 {
        if self.mantissa == 0.0 {
            0.0
        } else {
            self.mantissa * (self.log_scale - log_scale).exp()
        }
    }
}

/// Integrals of the local cubic interpolant over each interval
/// `[ρ_i, ρ_{i+1}]`, built on the four surrounding nodes (shifted inward at
/// the ends) and integrated with two-point Gauss–Legendre, which is exact
/// for cubics.
pub fn interval_integrals(x: &[f64], y: &[f64]) -> Vec<f64> {
    let m = x.len();
    if m < 4 {
        return x.windows(2).zip(y.windows(2)).map(|(a, b)| 0.5 * (a[1] - a[0]) * (b[0] + b[1])).collect();
    }
    let g = 0.5 / 3.0f64.sqrt();
    (0..m - 1)
        .map(|i| {
            let start = i.saturating_sub(1).min(m - 4);
            let xs = &x[start..start + 4];
            let ys = &y[start..start + 4];
            let (lo, hi) = (x[i], x[i + 1]);
            let mid = 0.5 * (lo + hi);
            let w = hi - lo;
            let mut s = 0.0;
            for z in [mid - g * w, mid + g * w] {
                let c = fornberg_weights(z, xs, 0);
                s += c[0].iter().zip(ys).map(|(a, b)| a * b).sum::<f64>();
            }
            0.5 * w * s
        })
        .collect()
}

/// `∫ y dρ` over the whole grid.
pub fn integrate(x: &[f64], y: &[f64]) -> f64 {
    interval_integrals(x, y).into_iter().collect::<CompensatedSum>().value()
}

/// Running integrals `∫_{ρ₀}^{ρ_i} y dρ` at every node.
pub fn cumulative_integral(x: &[f64], y: &[f64]) -> Vec<f64> {
    let mut acc = CompensatedSum::new();
    let mut out = Vec::with_capacity(x.len());
    out.push(0.0);
    for v in interval_integrals(x, y) {
        acc.add(v);
        out.push(acc.value());
    }
    out
}

/// Log of the radial weight `e^{sign·f(ρ)} ρ^{n-1}`.
pub fn log_weight(rho: f64, sign: f64, p: PotentialParams) -> f64 {
    sign * potential_f(rho, p) + (p.n as f64 - 1.0) * rho.ln()
}

/// `∫ ig(ρ) e^{sign·f(ρ)} ρ^{n-1} dρ` over the grid, accumulated relative to the
/// largest log-weight so no intermediate exceeds the double range.
pub fn weighted_integral(
    grid: &RadialGrid,
    ig: &ScaledIntegrand,
    weight_sign: f64,
    p: PotentialParams,
) -> Result<LogScaled> {
    if ig.values.len() != grid.len() {
        return Err(Error::GridMismatch);
    }
    if weight_sign != 1.0 && weight_sign != -1.0 {
        return Err(Error::InvalidParameter(format!("weight sign must be ±1, got {weight_sign}")));
    }
    let lw: Vec<f64> = grid.nodes().iter().map(|&r| log_weight(r, weight_sign, p)).collect();
    let shift = lw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let y: Vec<f64> = ig.values.iter().zip(&lw).map(|(v, l)| v * (l - shift).exp()).collect();
    let mantissa = integrate(grid.nodes(), &y);
    if !mantissa.is_finite() {
        return Err(Error::Overflow { log_magnitude: f64::INFINITY });
    }
    Ok(LogScaled::new(mantissa, shift + ig.log_scale))
}

/// Running weighted integrals `∫_{ρ₀}^{ρ_i} ig e^{sign·f} ρ^{n-1}` expressed at
/// the common scale `e^{log_scale}` (returned alongside).
pub fn cumulative_weighted_integral(
    grid: &RadialGrid,
    values: &[f64],
    weight_sign: f64,
    p: PotentialParams,
) -> (Vec<f64>, f64) {
    let lw: Vec<f64> = grid.nodes().iter().map(|&r| log_weight(r, weight_sign, p)).collect();
    let shift = lw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let y: Vec<f64> = values.iter().zip(&lw).map(|(v, l)| v * (l - shift).exp()).collect();
    (cumulative_integral(grid.nodes(), &y), shift)
}

/// Upper bound for `∫_{R}^{∞} e^{-f} ρ^{n-1} dρ` (log), valid for `R² > 2t(n-2)`.
pub fn log_gaussian_tail_bound(rho_max: f64, p: PotentialParams) -> f64 {
    let n = p.n as f64;
    let t = p.t;
    let r2 = rho_max * rho_max;
    let shrink = 1.0 - 2.0 * t * (n - 2.0) / r2;
    if shrink <= 0.0 {
        return f64::INFINITY;
    }
    (2.0 * t).ln() + (n - 2.0) * rho_max.ln() - r2 / (4.0 * t) - 0.5 * n - shrink.ln()
}

/// Weighted integral against `e^{-f}` together with a bound on the part of the
/// integral beyond `ρ_M`, assuming `|ig| ≤ sup|ig|` there.
pub fn gaussian_integral_with_tail(
    grid: &RadialGrid,
    ig: &ScaledIntegrand,
    p: PotentialParams,
) -> Result<(LogScaled, LogScaled)> {
    let value = weighted_integral(grid, ig, -1.0, p)?;
    let sup = ig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tail = if sup == 0.0 {
        LogScaled::ZERO
    } else {
        LogScaled::new(sup, ig.log_scale + log_gaussian_tail_bound(grid.rho_max(), p))
    };
    Ok((value, tail))
}

/// Drift Laplacian `Δ_f u = u'' + ((n-1)/ρ + ρ/(2t)) u'` in weighted flux form,
/// `(A u')' / A` with `A = ρ^{n-1} e^{f}`, at interior nodes (ends are zero).
pub fn drift_laplacian(grid: &RadialGrid, u: &[f64], p: PotentialParams) -> Vec<f64> {
    let x = grid.nodes();
    let m = x.len();
    let phi = |r: f64| log_weight(r, 1.0, p);
    // Harmonic mean of the weight over a cell, relative to e^{φ(ρ_i)}.
    let face = |a: f64, b: f64, pc: f64| -> f64 {
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        let inv: f64 = GL8.iter().map(|&(t, w)| 0.5 * w * (pc - phi(mid + half * t)).exp()).sum();
        1.0 / inv
    };
    let mut out = vec![0.0; m];
    for i in 1..m - 1 {
        let (hl, hr) = (x[i] - x[i - 1], x[i + 1] - x[i]);
        let pc = phi(x[i]);
        let al = face(x[i - 1], x[i], pc);
        let ar = face(x[i], x[i + 1], pc);
        out[i] = (ar * (u[i + 1] - u[i]) / hr - al * (u[i] - u[i - 1]) / hl) / (0.5 * (hl + hr));
    }
    out
}

const GL8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_2, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (-0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (0.960_289_856_497_536_2, 0.101_228_536_290_376_26),
];

/// Largest relative defect `|Δ_f f − f/t| / f` of the potential identity over
/// interior nodes, using [`drift_laplacian`].
pub fn check_potential_identity(grid: &RadialGrid, p: PotentialParams) -> f64 {
    let f: Vec<f64> = grid.nodes().iter().map(|&r| potential_f(r, p)).collect();
    let lap = drift_laplacian(grid, &f, p);
    (1..grid.len() - 1)
        .map(|i| (lap[i] - f[i] / p.t).abs() / f[i])
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: usize, t: f64) -> PotentialParams {
        PotentialParams::new(n, t).unwrap()
    }

    #[test]
    fn potential_examples() {
        assert_eq!(potential_f(0.0, p(3, 1.0)), 1.5);
        assert_eq!(potential_f(2.0, p(4, 1.0)), 3.0);
        assert_eq!(potential_f(2.0, p(4, 4.0)), 2.25);
    }

    #[test]
    fn params_reject_bad_inputs() {
        assert!(PotentialParams::new(3, 0.0).is_err());
        assert!(PotentialParams::new(3, -1.0).is_err());
        assert!(PotentialParams::new(2, 1.0).is_err());
    }

    #[test]
    fn sphere_areas() {
        let pi = std::f64::consts::PI;
        assert!((unit_sphere_area(3) - 4.0 * pi).abs() < 1e-13);
        assert!((unit_sphere_area(4) - 2.0 * pi * pi).abs() < 1e-13);
        assert!((unit_sphere_area(5) - 8.0 * pi * pi / 3.0).abs() < 1e-13);
        assert!((unit_sphere_area(2) - 2.0 * pi).abs() < 1e-13);
    }

    #[test]
    fn default_grid_layout() {
        let g = RadialGrid::default_layout();
        assert_eq!(g.rho0(), 1e-4);
        assert_eq!(g.rho_max(), 40.0);
        assert!(g.max_spacing() <= 0.1);
        assert!((g.len() as i64 - 4000).abs() < 10, "len {}", g.len());
    }

    #[test]
    fn grid_validation() {
        assert!(RadialGrid::new(vec![0.0, 1.0, 2.0, 3.0, 10.0]).is_err());
        assert!(RadialGrid::uniform(0.1, 9.0, 0.05).is_err());
        assert!(RadialGrid::uniform(0.1, 12.0, 0.2).is_err());
        let mut v: Vec<f64> = (1..=200).map(|i| i as f64 * 0.05).collect();
        v.swap(3, 4);
        assert!(RadialGrid::new(v).is_err());
    }

    #[test]
    fn compensated_sum_beats_naive() {
        let mut s = CompensatedSum::new();
        s.add(1e100);
        s.add(1.0);
        s.add(-1e100);
        assert_eq!(s.value(), 1.0);
    }

    #[test]
    fn zero_integrand() {
        let g = RadialGrid::uniform(0.01, 20.0, 0.01).unwrap();
        let ig = ScaledIntegrand::unscaled(vec![0.0; g.len()]).unwrap();
        let v = weighted_integral(&g, &ig, 1.0, p(3, 1.0)).unwrap();
        assert_eq!(v.mantissa, 0.0);
        assert_eq!(v.log_scale, f64::NEG_INFINITY);
    }

    #[test]
    fn quadrature_exact_for_cubics_on_nonuniform_grid() {
        let g = RadialGrid::layered(1e-3, 12.0, 400).unwrap();
        let y: Vec<f64> = g.nodes().iter().map(|&r| 1.0 - r + 0.3 * r * r - 0.01 * r.powi(3)).collect();
        let exact = |r: f64| r - r * r / 2.0 + 0.1 * r.powi(3) - 0.0025 * r.powi(4);
        let val = integrate(g.nodes(), &y);
        assert!((val - (exact(12.0) - exact(1e-3))).abs() < 1e-9);
    }

    #[test]
    fn plus_weight_beyond_double_range_is_log_scaled() {
        let g = RadialGrid::uniform(0.01, 60.0, 0.01).unwrap();
        let ig = ScaledIntegrand::unscaled(vec![1.0; g.len()]).unwrap();
        let v = weighted_integral(&g, &ig, 1.0, p(3, 1.0)).unwrap();
        assert!(v.value().is_err());
        // ∫^R e^{ρ²/4} ρ² ≈ 2R e^{R²/4 + 3/2} (1 + O(R^{-2})).
        let approx = (2.0f64 * 60.0).ln() + 900.0 + 1.5;
        assert!((v.ln_abs() - approx).abs() < 1e-2, "{} vs {approx}", v.ln_abs());
    }

    #[test]
    fn tail_bound_dominates_extension() {
        let pp = p(3, 1.0);
        let g = RadialGrid::uniform(0.01, 10.0, 0.01).unwrap();
        let ig = ScaledIntegrand::unscaled(vec![1.0; g.len()]).unwrap();
        let (v, tail) = gaussian_integral_with_tail(&g, &ig, pp).unwrap();
        let g2 = g.extended(20.0).unwrap();
        let ig2 = ScaledIntegrand::unscaled(vec![1.0; g2.len()]).unwrap();
        let (v2, _) = gaussian_integral_with_tail(&g2, &ig2, pp).unwrap();
        let diff = v2.value().unwrap() - v.value().unwrap();
        assert!(diff > 0.0);
        assert!(tail.value().unwrap() >= diff);
    }

    #[test]
    fn potential_identity_second_order() {
        let pp = p(3, 1.0);
        let r: Vec<f64> = [1e-2, 5e-3, 2.5e-3]
            .iter()
            .map(|&h| check_potential_identity(&RadialGrid::uniform(h, 10.0, h).unwrap(), pp))
            .collect();
        assert!(r[0] <= 1e-3, "residual {}", r[0]);
        let ratio = r[0] / r[1];
        assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
    }
}
