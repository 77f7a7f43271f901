use std::collections::BTreeMap;
use std::path::Path;

use serde_json::json;
use sha2::{Digest, Sha256};

use super::config::{FlowInit, RunConfig};
use super::report::{read_profile, write_profile, Bundle, Cell};
use super::CliError;
use crate::entropy_diagnostics::{
    decay_fit, default_radii, dissipation, frequency, relative_entropy, DECAY_WINDOW_LO,
};
use crate::error::Error;
use crate::flow_pde::{init_homogeneous, init_perturbed, obstruction, run, FlowState, BLOW_DOWN_TOL};
use crate::jacobi_spectral::{build_operator, count_below, decay_envelope, kernel_sweep_on, spectrum};
use crate::profile_ode::{self, Profile, ShootingSweep, Target};
use crate::weighted_geometry::{potential_f, PotentialParams};

/// Per-step slack of the entropy monotonicity check.
pub const ENTROPY_SLACK: f64 = 1e-6;
/// Sup-distance between the end slice and the shooting expander.
pub const BLOW_DOWN_DISTANCE: f64 = 1e-4;
/// Relative gap allowed between an eigenvalue and its Rayleigh quotient.
pub const RAYLEIGH_TOL: f64 = 1e-4;
/// Eigenvalue threshold for the discreteness count.
pub const COUNT_LEVEL: f64 = 10.0;
const FREQUENCY_RADII: usize = 20;
const ENVELOPE_SLACK: f64 = 0.1;

fn conclude(checks: &BTreeMap<String, bool>) -> Result<(), CliError> {
    let failed: Vec<String> = checks.iter().filter(|(_, ok)| !**ok).map(|(k, _)| k.clone()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Validation(failed))
    }
}

fn check(checks: &mut BTreeMap<String, bool>, name: &str, ok: bool) {
    checks.insert(name.to_string(), ok);
}

fn evenly(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect(),
    }
}

pub fn shoot(cfg: &RunConfig) -> Result<(), CliError> {
    let mut b = Bundle::new(cfg, "shoot")?;
    let grid = cfg.grid()?;
    let p = b.time("shoot", || shoot_profile(cfg, &grid))?;
    write_profile(&b, "profile.csv", &p)?;
    let results = json!({
        "a": p.shoot_param,
        "alpha_inf": p.alpha_inf,
        "c2": p.c2,
        "residual": p.ode_residual(),
        "gradient_bound": p.gradient_bound(),
        "monotone": p.is_monotone(),
    });
    let mut checks = BTreeMap::new();
    check(&mut checks, "alpha_finite", p.alpha_inf.is_finite());
    check(&mut checks, "gradient_bound_finite", p.gradient_bound().is_finite());
    b.report("shoot.json", &results, &checks)?;
    b.finish()?;
    conclude(&checks)
}

fn shoot_profile(cfg: &RunConfig, grid: &crate::weighted_geometry::RadialGrid) -> Result<Profile, CliError> {
    Ok(profile_ode::shoot(cfg.shoot_a, cfg.n, cfg.target, grid, cfg.shooting())?)
}

pub fn sweep(cfg: &RunConfig) -> Result<(), CliError> {
    let mut b = Bundle::new(cfg, "sweep")?;
    let grid = cfg.grid()?;
    let (lo, hi) = cfg.a_range;
    let empty = hi <= lo;
    if empty {
        eprintln!("hmflow: warning: empty search interval [{lo}, {hi}]; tables are empty");
    }
    let sw = b.time("shooting", || {
        ShootingSweep::new(lo, hi, cfg.sweep_samples, cfg.n, cfg.target, &grid, cfg.shooting())
    })?;
    let rows: Vec<Vec<Cell>> = sw
        .samples
        .iter()
        .map(|(a, r)| match r {
            Ok(v) => vec![(*a).into(), (*v).into(), "ok".into()],
            Err(e) => vec![(*a).into(), Cell::Empty, e.clone().into()],
        })
        .collect();
    b.table("sweep.csv", &["a", "alpha_inf", "status"], &rows)?;

    let alphas = if empty { Vec::new() } else { evenly(cfg.alpha_range.0, cfg.alpha_range.1, cfg.alpha_count) };
    let sets = b.time("boundary_value", || {
        use rayon::prelude::*;
        alphas.par_iter().map(|&al| sw.solve(al, cfg.bv_tol)).collect::<Vec<_>>()
    });
    let mut sol_rows = Vec::new();
    let mut multiplicity = Vec::new();
    for (&al, set) in alphas.iter().zip(sets) {
        let set = set?;
        multiplicity.push((al, set.profiles.len()));
        if set.profiles.is_empty() {
            sol_rows.push(vec![al.into(), 0usize.into(), Cell::Empty, Cell::Empty, Cell::Empty]);
        }
        for (k, p) in set.profiles.iter().enumerate() {
            sol_rows.push(vec![al.into(), set.profiles.len().into(), k.into(), p.shoot_param.into(), p.c2.into()]);
        }
    }
    b.table("solutions.csv", &["alpha", "multiplicity", "root", "a", "c2"], &sol_rows)?;

    let ks = b.time("kernel", || kernel_sweep_on(&sw, &alphas, cfg.bv_tol, cfg.kernel_tol));
    let mut k_rows = Vec::new();
    for s in &ks.samples {
        for (a, l) in s.slopes.iter().zip(&s.lowest) {
            k_rows.push(vec![s.alpha.into(), (*a).into(), (*l).into()]);
        }
    }
    b.table("kernel.csv", &["alpha", "a", "lowest_eigenvalue"], &k_rows)?;

    let mut checks = BTreeMap::new();
    if let Some(&(_, m)) = multiplicity.iter().find(|(al, _)| *al == 0.0) {
        check(&mut checks, "alpha_zero_trivial", m == 1);
    }
    if cfg.target == Target::Hyperbolic && !empty {
        check(&mut checks, "shooting_monotone", sw.is_strictly_increasing());
        check(&mut checks, "unique_solutions", multiplicity.iter().all(|&(_, m)| m == 1));
        check(&mut checks, "no_kernel_crossing", ks.crossings.is_empty() && ks.slope_crossings.is_empty());
    }
    let results = json!({
        "samples": sw.samples.len(),
        "shooting_failures": sw.failures().len(),
        "strictly_increasing": sw.is_strictly_increasing(),
        "multiplicity": multiplicity,
        "kernel_crossings": ks.crossings,
        "slope_crossings": ks.slope_crossings,
        "near_kernel": ks.near_kernel,
        "kernel_failures": ks.failures,
    });
    b.report("sweep.json", &results, &checks)?;
    b.finish()?;
    conclude(&checks)
}

/// Expander with boundary angle `alpha` of smallest slope in the configured range.
fn background(cfg: &RunConfig, alpha: f64) -> Result<Option<Profile>, CliError> {
    let grid = cfg.grid()?;
    let (lo, hi) = cfg.a_range;
    if hi <= lo {
        return Ok(None);
    }
    let sw = ShootingSweep::new(lo.max(0.0), hi, cfg.sweep_samples, cfg.n, cfg.target, &grid, cfg.shooting())?;
    let set = sw.solve(alpha, cfg.bv_tol)?;
    Ok(set.profiles.into_iter().min_by(|p, q| p.shoot_param.abs().total_cmp(&q.shoot_param.abs())))
}

fn dump_slice(b: &Bundle, st: &FlowState) -> Result<(), CliError> {
    let rows: Vec<Vec<Cell>> = st
        .grid
        .nodes()
        .iter()
        .zip(st.h())
        .map(|(&r, h)| vec![r.into(), h.into()])
        .collect();
    b.table_with("last_good.csv", &[format!("slice s={:?}", st.s)], &["rho", "h"], &rows)
}

const FLOW_HEADER: [&str; 6] = [
    "s",
    "steady_residual",
    "entropy",
    "entropy_direct",
    "dissipation",
    "obstruction_envelope",
];

pub fn flow(cfg: &RunConfig) -> Result<(), CliError> {
    let mut b = Bundle::new(cfg, "flow")?;
    let grid = cfg.grid()?;
    let alpha = cfg.flow_alpha;
    let bg = b.time("background", || background(cfg, alpha))?;
    let st0 = match cfg.flow_init {
        FlowInit::Homogeneous => init_homogeneous(alpha, cfg.n, cfg.target, &grid)?,
        FlowInit::Perturbed => {
            let p = bg.as_ref().ok_or_else(|| {
                CliError::Solver(Error::InvalidParameter(format!("no expander with boundary angle {alpha} to perturb")))
            })?;
            init_perturbed(p, cfg.amp, cfg.width)?
        }
    };
    let pp = PotentialParams::unit(cfg.n)?;
    let lambda = potential_f(DECAY_WINDOW_LO, pp);
    let mut rows: Vec<Vec<Cell>> = Vec::new();
    let mut entropy: Vec<f64> = Vec::new();
    let mut last_good = st0.clone();
    let outcome = b.time("flow", || {
        run(&st0, cfg.s_end, cfg.ds, |prev, next| {
            let o = obstruction(next, prev)?;
            let (e, ed) = match &bg {
                Some(p) => match relative_entropy(next, p, 1.0) {
                    Ok(r) => (Some(r.value_ibp), Some(r.value)),
                    Err(Error::FarFieldMismatch { .. }) => (None, None),
                    Err(e) => return Err(e),
                },
                None => (None, None),
            };
            if let Some(v) = e {
                entropy.push(v);
            }
            rows.push(vec![
                next.s.into(),
                o.sup().into(),
                e.into(),
                ed.into(),
                dissipation(next, prev, 1.0)?.into(),
                o.envelope_constant(&grid, cfg.n, lambda, ENVELOPE_SLACK).into(),
            ]);
            last_good = next.clone();
            Ok(())
        })
    });
    b.table("flow.csv", &FLOW_HEADER, &rows)?;
    let (last, trace) = match outcome {
        Ok(v) => v,
        Err(e) => {
            dump_slice(&b, &last_good)?;
            b.finish()?;
            return Err(e.into());
        }
    };
    let end = last.to_profile()?;
    write_profile(&b, "final.csv", &end)?;

    let mut checks = BTreeMap::new();
    check(&mut checks, "entropy_nonincreasing", entropy.windows(2).all(|w| w[1] <= w[0] + ENTROPY_SLACK));
    check(&mut checks, "steady", trace.final_residual() <= BLOW_DOWN_TOL);
    let distance = bg.as_ref().map(|p| end.sup_distance(p));
    if let Some(d) = distance {
        check(&mut checks, "blow_down_matches_expander", d <= BLOW_DOWN_DISTANCE);
    }
    let results = json!({
        "alpha": alpha,
        "init": match cfg.flow_init { FlowInit::Homogeneous => "homogeneous", FlowInit::Perturbed => "perturbed" },
        "s_end": last.s,
        "steps": rows.len(),
        "final_residual": trace.final_residual(),
        "background_a": bg.as_ref().map(|p| p.shoot_param),
        "entropy_defined": !entropy.is_empty(),
        "blow_down_distance": distance,
        "end_alpha_inf": end.alpha_inf,
    });
    b.report("flow.json", &results, &checks)?;
    b.finish()?;
    conclude(&checks)
}

fn file_digest(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

pub fn diagnose(cfg: &RunConfig, files: &[std::path::PathBuf]) -> Result<(), CliError> {
    let digests: Vec<String> = files.iter().map(|p| file_digest(p)).collect::<Result<_, _>>()?;
    let mut b = Bundle::new(cfg, &format!("diagnose {}", digests.join(" ")))?;
    let profiles: Vec<Profile> = files.iter().map(|p| read_profile(p)).collect::<Result<_, _>>()?;
    let mut checks = BTreeMap::new();
    let mut results = serde_json::Map::new();

    let mut f_rows = Vec::new();
    let mut freq = Vec::new();
    for (k, p) in profiles.iter().enumerate() {
        let fr = b.time("frequency", || frequency(p, &default_radii(&p.grid, FREQUENCY_RADII)))?;
        for (r, v) in fr.radii.iter().zip(&fr.frequency) {
            f_rows.push(vec![k.into(), (*r).into(), (*v).into()]);
        }
        if !p.is_constant() {
            check(&mut checks, &format!("frequency_increasing_{k}"), fr.strictly_increasing);
        }
        freq.push(json!({ "report": fr, "gradient_bound": p.gradient_bound(), "alpha_inf": p.alpha_inf }));
    }
    b.table("frequency.csv", &["profile", "R", "frequency"], &f_rows)?;
    results.insert("profiles".into(), json!(freq));

    if let [p1, p2] = profiles.as_slice() {
        let e = b.time("entropy", || relative_entropy(p1, p2, 1.0));
        let e = match e {
            Ok(e) => e,
            Err(err) => {
                b.finish()?;
                return Err(err.into());
            }
        };
        check(&mut checks, "entropy_routes_agree", e.routes_agree());
        results.insert("entropy".into(), json!(e));
        let d_rows: Vec<Vec<Cell>> = p1
            .grid
            .nodes()
            .iter()
            .zip(p1.h.iter().zip(&p2.h))
            .map(|(&r, (a, c))| vec![r.into(), (c - a).into()])
            .collect();
        b.table("difference.csv", &["rho", "difference"], &d_rows)?;
        let decay = match decay_fit(p1, p2) {
            Ok(fit) => json!({ "window_empty": false, "fit": fit }),
            Err(Error::EmptyWindow) => json!({ "window_empty": true }),
            Err(e) => json!({ "window_empty": false, "error": e.to_string() }),
        };
        results.insert("decay".into(), decay);
    }
    b.report("diagnose.json", &results, &checks)?;
    b.finish()?;
    conclude(&checks)
}

fn spectrum_of(cfg: &RunConfig, p: &Profile, b: &mut Bundle) -> Result<BTreeMap<String, bool>, CliError> {
    let op = build_operator(p);
    let rep = b.time("spectrum", || spectrum(&op, cfg.k))?;
    let rows: Vec<Vec<Cell>> = rep
        .eigenvalues
        .iter()
        .zip(&rep.rayleigh)
        .enumerate()
        .map(|(k, (l, r))| vec![k.into(), (*l).into(), (*r).into()])
        .collect();
    b.table("spectrum.csv", &["index", "eigenvalue", "rayleigh"], &rows)?;
    let mut header = vec!["rho".to_string()];
    header.extend((0..rep.eigenvectors.len()).map(|k| format!("v{k}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let v_rows: Vec<Vec<Cell>> = p
        .grid
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, &r)| std::iter::once(r.into()).chain(rep.eigenvectors.iter().map(|v| v[i].into())).collect())
        .collect();
    b.table("eigenvectors.csv", &header, &v_rows)?;
    let envelopes: Vec<Option<f64>> =
        rep.eigenvectors.iter().map(|v| decay_envelope(&p.grid, p.n, v, ENVELOPE_SLACK).ok()).collect();
    let below = count_below(&op, COUNT_LEVEL);
    let mut checks = BTreeMap::new();
    check(
        &mut checks,
        "rayleigh_agrees",
        rep.eigenvalues.iter().zip(&rep.rayleigh).all(|(l, r)| (l - r).abs() <= RAYLEIGH_TOL * l.abs().max(1.0)),
    );
    check(&mut checks, "envelopes_finite", envelopes.iter().all(|e| e.is_some_and(f64::is_finite)));
    let results = json!({
        "a": p.shoot_param,
        "alpha_inf": p.alpha_inf,
        "eigenvalues": rep.eigenvalues,
        "rayleigh": rep.rayleigh,
        "kernel_gap": rep.kernel_gap,
        "traces": rep.traces,
        "count_below_10": below,
        "envelope_constants": envelopes,
    });
    b.report("spectrum.json", &results, &checks)?;
    Ok(checks)
}

pub fn spectrum_cmd(cfg: &RunConfig, profile: Option<&Path>) -> Result<(), CliError> {
    let command = match profile {
        Some(path) => format!("spectrum {}", file_digest(path)?),
        None => "spectrum".to_string(),
    };
    let mut b = Bundle::new(cfg, &command)?;
    let p = match profile {
        Some(path) => read_profile(path)?,
        None => {
            let grid = cfg.grid()?;
            b.time("shoot", || shoot_profile(cfg, &grid))?
        }
    };
    let checks = spectrum_of(cfg, &p, &mut b)?;
    b.finish()?;
    conclude(&checks)
}
