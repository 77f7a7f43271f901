//! Equivariant harmonic map heat flow in self-similar variables `(ρ, s)`,
//! `ρ = |x|/√t`, `s = log t`:
//!
//! ```text
//! ∂_s h = h'' + ((n−1)/ρ + ρ/2) h' − (n−1) g(h)/ρ².
//! ```
//!
//! A state is a static background `b` (zero, or an expander) plus an evolving
//! difference `δ`, stepped as `∂_s δ = F(b + δ) − F(b)`. Expanders are then
//! exact steady states and `δ` keeps full relative precision in the Gaussian
//! far field, which the weighted diagnostics rely on.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::profile_ode::{far_field_coefficients, fit_far_field, Profile, Target, FAR_WINDOW};
use crate::stencil::solve_tridiagonal;
use crate::weighted_geometry::{potential_f, PotentialParams, RadialGrid};

#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub grid: RadialGrid,
    /// Static background, a steady state of the continuous equation.
    pub base: Vec<f64>,
    /// `b'` of the background.
    pub base_dh: Vec<f64>,
    pub delta: Vec<f64>,
    pub s: f64,
    pub n: usize,
    pub target: Target,
    /// Boundary angle at infinity.
    pub alpha: f64,
    /// Dirichlet value of `h` at `ρ_M`.
    pub outer: f64,
}

impl FlowState {
    pub fn h(&self) -> Vec<f64> {
        self.base.iter().zip(&self.delta).map(|(b, d)| b + d).collect()
    }

    /// An expander as a (steady) flow state at log-time `s`.
    pub fn from_profile(p: &Profile, s: f64) -> Self {
        Self {
            grid: p.grid.clone(),
            base: p.h.clone(),
            base_dh: p.dh.clone(),
            delta: vec![0.0; p.h.len()],
            s,
            n: p.n,
            target: p.target,
            alpha: p.alpha_inf,
            outer: *p.h.last().expect("profile grid is nonempty"),
        }
    }

    /// `h' = b' + δ'`, the difference part from a 7-point stencil.
    pub fn slope(&self) -> Vec<f64> {
        let dd = self.grid.derivative(&self.delta, 1, 7);
        self.base_dh.iter().zip(dd).map(|(b, d)| b + d).collect()
    }

    /// Whether the state carries a nonzero background.
    pub fn has_background(&self) -> bool {
        self.base.iter().any(|&v| v != 0.0)
    }

    /// `|h(ρ₀)| ≤ 2|h'|ρ₀` with the one-sided slope at the origin.
    pub fn origin_consistent(&self) -> bool {
        let h = self.h();
        let x = self.grid.nodes();
        let slope = (h[1] - h[0]) / (x[1] - x[0]);
        h[0].abs() <= 2.0 * slope.abs() * x[0] + f64::MIN_POSITIVE
    }

    /// The state read as an expander candidate: `h'` from a 7-point stencil,
    /// boundary angle from the far-field fit.
    pub fn to_profile(&self) -> Result<Profile> {
        let h = self.h();
        let dh = self.slope();
        let ff = fit_far_field(&self.grid, &h, FAR_WINDOW.0, FAR_WINDOW.1)?;
        Ok(Profile {
            grid: self.grid.clone(),
            shoot_param: h[0] / self.grid.rho0(),
            h,
            dh,
            n: self.n,
            target: self.target,
            alpha_inf: ff.alpha,
            c2: ff.c2,
            trace_coeff: None,
        })
    }
}

fn check_alpha(alpha: f64, target: Target) -> Result<()> {
    let ok = match target {
        Target::Sphere => (0.0..=std::f64::consts::PI).contains(&alpha),
        Target::Hyperbolic => alpha >= 0.0 && alpha.is_finite(),
    };
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("boundary angle {alpha} outside the admissible range for {}", target.name())))
    }
}

/// Quintic smoothstep, 0 at the origin and 1 from `ρ = 1` on.
pub fn ramp(rho: f64) -> f64 {
    if rho >= 1.0 {
        1.0
    } else if rho <= 0.0 {
        0.0
    } else {
        rho * rho * rho * (10.0 + rho * (-15.0 + 6.0 * rho))
    }
}

/// Far-field corrected Dirichlet value `α + c₂/ρ_M² + c₄/ρ_M⁴`.
pub fn outer_value(alpha: f64, n: usize, target: Target, rho_max: f64) -> f64 {
    let (c2, c4) = far_field_coefficients(alpha, n, target);
    let x = 1.0 / (rho_max * rho_max);
    alpha + x * (c2 + x * c4)
}

/// Constant-angle data `α·ramp(ρ)` at `s = 0` over a zero background.
pub fn init_homogeneous(alpha: f64, n: usize, target: Target, grid: &RadialGrid) -> Result<FlowState> {
    check_alpha(alpha, target)?;
    if n < 3 {
        return Err(Error::InvalidParameter(format!("dimension n = {n} must be at least 3")));
    }
    Ok(FlowState {
        grid: grid.clone(),
        base: vec![0.0; grid.len()],
        base_dh: vec![0.0; grid.len()],
        delta: grid.nodes().iter().map(|&r| alpha * ramp(r)).collect(),
        s: 0.0,
        n,
        target,
        alpha,
        outer: outer_value(alpha, n, target, grid.rho_max()),
    })
}

/// Expander plus an odd Gaussian bump `amp·ρ·e^{−ρ²/w²}` at `s = 0`.
pub fn init_perturbed(background: &Profile, amp: f64, width: f64) -> Result<FlowState> {
    if !(width > 0.0 && amp.is_finite()) {
        return Err(Error::InvalidParameter(format!("bump needs width > 0 and finite amplitude (got {amp}, {width})")));
    }
    let mut st = FlowState::from_profile(background, 0.0);
    let last = st.delta.len() - 1;
    for (d, &r) in st.delta.iter_mut().zip(background.grid.nodes()) {
        *d = amp * r * (-(r * r) / (width * width)).exp();
    }
    st.delta[last] = 0.0;
    Ok(st)
}

/// `u_λ(x, t) = u(λx, λ²t)`: in self-similar variables only `s` moves, by `2 log λ`.
pub fn rescale(state: &FlowState, lambda: f64) -> Result<FlowState> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!("scale must be positive, got {lambda}")));
    }
    let mut out = state.clone();
    out.s += 2.0 * lambda.ln();
    Ok(out)
}

/// Three-point nonuniform discretization of
/// `L v = v'' + ((n−1)/ρ + ρ/2) v' − (n−1) v/ρ²` (interior rows).
#[derive(Debug, Clone)]
struct LinearOp {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
}

impl LinearOp {
    fn new(grid: &RadialGrid, n: usize) -> Self {
        let x = grid.nodes();
        let m = x.len();
        let nm1 = n as f64 - 1.0;
        let mut op = Self { lower: vec![0.0; m], diag: vec![0.0; m], upper: vec![0.0; m] };
        for i in 1..m - 1 {
            let (hl, hr) = (x[i] - x[i - 1], x[i + 1] - x[i]);
            let s = hl + hr;
            let p = nm1 / x[i] + 0.5 * x[i];
            op.lower[i] = 2.0 / (hl * s) - p * hr / (hl * s);
            op.diag[i] = -2.0 / (hl * hr) + p * (hr - hl) / (hl * hr) - nm1 / (x[i] * x[i]);
            op.upper[i] = 2.0 / (hr * s) + p * hl / (hr * s);
        }
        op
    }

    fn apply(&self, v: &[f64]) -> Vec<f64> {
        let m = v.len();
        let mut out = vec![0.0; m];
        for i in 1..m - 1 {
            out[i] = self.lower[i] * v[i - 1] + self.diag[i] * v[i] + self.upper[i] * v[i + 1];
        }
        out
    }
}

/// Explicit part `−(n−1)[g(b+δ) − g(b) − δ]/ρ²`.
fn nonlinear(state: &FlowState, delta: &[f64]) -> Vec<f64> {
    let nm1 = state.n as f64 - 1.0;
    let x = state.grid.nodes();
    let m = x.len();
    let mut out = vec![0.0; m];
    for i in 1..m - 1 {
        out[i] = -nm1 * state.target.g_diff_minus_linear(state.base[i], delta[i]) / (x[i] * x[i]);
    }
    out
}

pub const MAX_STEP: f64 = 0.1;

/// A reusable stepper: Crank–Nicolson on the linear part, Heun on the rest.
#[derive(Debug, Clone)]
pub struct Stepper {
    op: LinearOp,
    ds: f64,
}

impl Stepper {
    pub fn new(grid: &RadialGrid, n: usize, ds: f64) -> Result<Self> {
        if !(ds > 0.0 && ds <= MAX_STEP) {
            return Err(Error::InvalidParameter(format!("log-time step must lie in (0, {MAX_STEP}], got {ds}")));
        }
        Ok(Self { op: LinearOp::new(grid, n), ds })
    }

    pub fn ds(&self) -> f64 {
        self.ds
    }

    pub fn step(&self, state: &FlowState) -> Result<FlowState> {
        self.advance(state, self.ds, 0.5)
    }

    /// Two backward-Euler half steps; damps the grid-scale modes that
    /// Crank–Nicolson leaves undamped from rough data.
    pub fn damped_step(&self, state: &FlowState) -> Result<FlowState> {
        let mid = self.advance(state, 0.5 * self.ds, 1.0)?;
        self.advance(&mid, 0.5 * self.ds, 1.0)
    }

    fn advance(&self, state: &FlowState, ds: f64, theta: f64) -> Result<FlowState> {
        let m = state.delta.len();
        if self.op.diag.len() != m {
            return Err(Error::GridMismatch);
        }
        let x = state.grid.nodes();
        let (imp, exp) = (theta * ds, (1.0 - theta) * ds);
        let mut lower: Vec<f64> = self.op.lower.iter().map(|v| -imp * v).collect();
        let mut diag: Vec<f64> = self.op.diag.iter().map(|v| 1.0 - imp * v).collect();
        let mut upper: Vec<f64> = self.op.upper.iter().map(|v| -imp * v).collect();
        diag[0] = 1.0;
        upper[0] = -x[0] / x[1];
        lower[m - 1] = 0.0;
        diag[m - 1] = 1.0;
        upper[m - 1] = 0.0;
        let outer = state.outer - state.base[m - 1];

        let d0 = &state.delta;
        let ld0 = self.op.apply(d0);
        let n0 = nonlinear(state, d0);
        let explicit: Vec<f64> = (0..m).map(|i| d0[i] + exp * ld0[i]).collect();
        let mut rhs: Vec<f64> = (0..m).map(|i| explicit[i] + ds * n0[i]).collect();
        rhs[0] = 0.0;
        rhs[m - 1] = outer;
        let pred = solve_tridiagonal(&lower, &diag, &upper, &rhs)?;
        let n1 = nonlinear(state, &pred);
        let mut rhs: Vec<f64> = (0..m).map(|i| explicit[i] + 0.5 * ds * (n0[i] + n1[i])).collect();
        rhs[0] = 0.0;
        rhs[m - 1] = outer;
        let delta = solve_tridiagonal(&lower, &diag, &upper, &rhs)?;
        if let Some(i) = delta.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index: i, rho: x[i] });
        }
        Ok(FlowState { delta, s: state.s + ds, ..state.clone() })
    }
}

/// One IMEX step of size `ds ∈ (0, 0.1]`.
pub fn step(state: &FlowState, ds: f64) -> Result<FlowState> {
    Stepper::new(&state.grid, state.n, ds)?.step(state)
}

/// Samples of `∂_s h`, the equivariant scalar of `t∂_t u + (x/2)·∇u`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObstructionField {
    pub values: Vec<f64>,
    pub s: f64,
}

impl ObstructionField {
    pub fn sup(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `sup |o|·f^{n/2}e^{(1−slack)f}` over nodes with `f > lambda`.
    pub fn envelope_constant(&self, grid: &RadialGrid, n: usize, lambda: f64, slack: f64) -> f64 {
        let p = PotentialParams::unit(n).expect("flow dimension is valid");
        grid.nodes()
            .iter()
            .zip(&self.values)
            .filter_map(|(&r, &o)| {
                let f = potential_f(r, p);
                (f > lambda && o != 0.0)
                    .then(|| (o.abs().ln() + 0.5 * n as f64 * f.ln() + (1.0 - slack) * f).exp())
            })
            .fold(0.0, f64::max)
    }
}

fn same_setup(a: &FlowState, b: &FlowState) -> Result<()> {
    if a.grid != b.grid || a.n != b.n || a.target != b.target {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// `(h − h_prev)/Δs`, formed from the differences so no background cancels.
pub fn obstruction(state: &FlowState, prev: &FlowState) -> Result<ObstructionField> {
    same_setup(state, prev)?;
    let ds = state.s - prev.s;
    if !(ds > 0.0) {
        return Err(Error::InvalidParameter(format!("slices must be ordered in s (Δs = {ds})")));
    }
    let values = (0..state.delta.len())
        .map(|i| ((state.base[i] - prev.base[i]) + (state.delta[i] - prev.delta[i])) / ds)
        .collect();
    Ok(ObstructionField { values, s: 0.5 * (state.s + prev.s) })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlowDownTrace {
    /// `(s, ‖∂_s h‖_∞)` after every step.
    pub residuals: Vec<(f64, f64)>,
}

impl BlowDownTrace {
    pub fn final_residual(&self) -> f64 {
        self.residuals.last().map_or(0.0, |r| r.1)
    }

    /// Residual nonincreasing over the second half of the run, ignoring
    /// wiggles below `floor`.
    pub fn decreasing_tail(&self, floor: f64) -> bool {
        let k = self.residuals.len() / 2;
        self.residuals[k..].windows(2).all(|w| w[1].1 <= w[0].1 || w[1].1 <= floor)
    }
}

pub const BLOW_DOWN_TOL: f64 = 1e-5;

/// Steps to `s_end` and reads the last slice as an expander candidate.
pub fn blow_down(state0: &FlowState, s_end: f64, ds: f64) -> Result<(Profile, BlowDownTrace)> {
    if !(s_end >= 10.0) {
        return Err(Error::InvalidParameter(format!("blow-down needs s_end >= 10, got {s_end}")));
    }
    let (last, trace) = run(state0, s_end, ds, |_, _| Ok(()))?;
    if !(trace.final_residual() <= BLOW_DOWN_TOL) {
        return Err(Error::NotConverged { residual: trace.final_residual() });
    }
    Ok((last.to_profile()?, trace))
}

/// Leading steps of a run taken with [`Stepper::damped_step`].
pub const DAMPED_START_STEPS: usize = 2;

/// Steps from `state0` until `s_end`, calling `visit(prev, next)` after every step.
pub fn run<F>(state0: &FlowState, s_end: f64, ds: f64, mut visit: F) -> Result<(FlowState, BlowDownTrace)>
where
    F: FnMut(&FlowState, &FlowState) -> Result<()>,
{
    let stepper = Stepper::new(&state0.grid, state0.n, ds)?;
    let steps = ((s_end - state0.s) / ds).round().max(0.0) as usize;
    let mut cur = state0.clone();
    let mut residuals = Vec::with_capacity(steps);
    for k in 0..steps {
        let next = if k < DAMPED_START_STEPS { stepper.damped_step(&cur)? } else { stepper.step(&cur)? };
        residuals.push((next.s, obstruction(&next, &cur)?.sup()));
        visit(&cur, &next)?;
        cur = next;
    }
    Ok((cur, BlowDownTrace { residuals }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile_ode::{shoot, ShootingOptions};

    fn grid() -> RadialGrid {
        RadialGrid::default_layout()
    }

    #[test]
    fn ramp_properties() {
        let g = grid();
        let st = init_homogeneous(1.0, 3, Target::Sphere, &g).unwrap();
        for (&r, &h) in g.nodes().iter().zip(&st.delta) {
            if r >= 1.0 {
                assert_eq!(h, 1.0);
            }
        }
        let d = g.derivative(&st.delta, 1, 3);
        for (&r, &v) in g.nodes().iter().zip(&d) {
            if r <= 1.0 {
                assert!(v.abs() <= 2.0);
            }
        }
        let z = init_homogeneous(0.0, 3, Target::Sphere, &g).unwrap();
        assert!(z.delta.iter().all(|&v| v == 0.0));
        assert!(init_homogeneous(4.0, 3, Target::Sphere, &g).is_err());
    }

    #[test]
    fn zero_is_steady() {
        let g = grid();
        let z = init_homogeneous(0.0, 3, Target::Sphere, &g).unwrap();
        let next = step(&z, 0.05).unwrap();
        assert!(next.delta.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn profiles_are_steady() {
        let g = grid();
        for t in [Target::Sphere, Target::Hyperbolic] {
            let p = shoot(0.3, 3, t, &g, ShootingOptions::default()).unwrap();
            let st = FlowState::from_profile(&p, 0.0);
            let next = step(&st, 0.05).unwrap();
            let d = next.h().iter().zip(&st.h()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(d <= 1e-8 * 0.05, "{t:?}: {d}");
        }
    }

    #[test]
    fn rescale_shifts_log_time() {
        let g = grid();
        let st = init_homogeneous(0.3, 3, Target::Sphere, &g).unwrap();
        assert_eq!(rescale(&st, 1.0).unwrap(), st);
        let r = rescale(&st, std::f64::consts::E).unwrap();
        assert!((r.s - 2.0).abs() < 1e-15);
        assert_eq!(r.h(), st.h());
        assert!(rescale(&st, 0.0).is_err());
    }

    #[test]
    fn step_size_is_checked() {
        let g = grid();
        let st = init_homogeneous(0.3, 3, Target::Sphere, &g).unwrap();
        assert!(step(&st, 0.0).is_err());
        assert!(step(&st, 0.2).is_err());
    }

    #[test]
    fn comparison_principle_for_ordered_ramps() {
        let g = grid();
        let stepper = Stepper::new(&g, 3, 0.05).unwrap();
        let mut lo = init_homogeneous(0.2, 3, Target::Sphere, &g).unwrap();
        let mut hi = init_homogeneous(0.5, 3, Target::Sphere, &g).unwrap();
        for _ in 0..100 {
            lo = stepper.step(&lo).unwrap();
            hi = stepper.step(&hi).unwrap();
            assert!(lo.h().iter().zip(hi.h()).all(|(a, b)| *a <= b + 1e-14));
        }
    }

    #[test]
    fn obstruction_of_trivial_flow_vanishes() {
        let g = grid();
        let z = init_homogeneous(0.0, 3, Target::Sphere, &g).unwrap();
        let next = step(&z, 0.05).unwrap();
        assert_eq!(obstruction(&next, &z).unwrap().sup(), 0.0);
        assert!(obstruction(&z, &next).is_err());
    }
}
