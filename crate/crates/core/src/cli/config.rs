//! Flat `key = value` configuration with `[section]` headers.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::profile_ode::Target;
use crate::weighted_geometry::RadialGrid;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("unknown config key `{key}`{}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    UnknownKey { key: String, line: Option<usize> },
    #[error("line {line}: expected `key = value` or `[section]`, got `{text}`")]
    Malformed { line: usize, text: String },
    #[error("key `{key}` outside any section (line {line})")]
    NoSection { key: String, line: usize },
    #[error("override `{0}` must look like section.key=value")]
    BadOverride(String),
    #[error("invalid value `{value}` for `{key}`: {reason}")]
    BadValue { key: String, value: String, reason: String },
    #[error("cannot read config {path}: {reason}")]
    Io { path: String, reason: String },
}

/// Every recognised key with its default value.
const DEFAULTS: &[(&str, &str)] = &[
    ("run.n", "3"),
    ("run.target", "sphere"),
    ("run.seed", "0"),
    ("run.out", "hmflow-out"),
    ("grid.rho0", "1e-4"),
    ("grid.rho_max", "40"),
    ("grid.nodes", "4000"),
    ("tolerances.rk_tol", "1e-11"),
    ("tolerances.bv_tol", "1e-10"),
    ("tolerances.kernel_tol", "1e-3"),
    ("tolerances.ds", "0.02"),
    ("shoot.a", "0.5"),
    ("sweep.a_min", "0"),
    ("sweep.a_max", "8"),
    ("sweep.samples", "200"),
    ("sweep.alpha_min", "0"),
    ("sweep.alpha_max", "1.6"),
    ("sweep.alpha_count", "50"),
    ("flow.alpha", "0.3"),
    ("flow.init", "homogeneous"),
    ("flow.s_end", "20"),
    ("flow.amp", "0.2"),
    ("flow.width", "1.5"),
    ("spectrum.k", "6"),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowInit {
    Homogeneous,
    Perturbed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    pub target: Target,
    pub seed: u64,
    pub out: PathBuf,
    pub rho0: f64,
    pub rho_max: f64,
    pub nodes: usize,
    pub rk_tol: f64,
    pub bv_tol: f64,
    pub kernel_tol: f64,
    pub ds: f64,
    pub shoot_a: f64,
    pub a_range: (f64, f64),
    pub sweep_samples: usize,
    pub alpha_range: (f64, f64),
    pub alpha_count: usize,
    pub flow_alpha: f64,
    pub flow_init: FlowInit,
    pub s_end: f64,
    pub amp: f64,
    pub width: f64,
    pub k: usize,
    /// Effective `section.key → value` after defaults and overrides.
    values: BTreeMap<String, String>,
}

fn parse_text(text: &str) -> Result<BTreeMap<String, (String, usize)>, ConfigError> {
    let mut out = BTreeMap::new();
    let mut section: Option<String> = None;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let t = raw.split('#').next().unwrap_or("").trim();
        if t.is_empty() {
            continue;
        }
        if let Some(name) = t.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            section = Some(name.trim().to_string());
            continue;
        }
        let Some((key, value)) = t.split_once('=') else {
            return Err(ConfigError::Malformed { line, text: raw.to_string() });
        };
        let key = key.trim();
        let Some(sec) = &section else {
            return Err(ConfigError::NoSection { key: key.to_string(), line });
        };
        let full = format!("{sec}.{key}");
        if !DEFAULTS.iter().any(|(d, _)| *d == full) {
            return Err(ConfigError::UnknownKey { key: full, line: Some(line) });
        }
        out.insert(full, (value.trim().to_string(), line));
    }
    Ok(out)
}

fn get<T: std::str::FromStr>(v: &BTreeMap<String, String>, key: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    let s = &v[key];
    s.parse::<T>()
        .map_err(|e| ConfigError::BadValue { key: key.into(), value: s.clone(), reason: e.to_string() })
}

fn positive(v: &BTreeMap<String, String>, key: &str) -> Result<f64, ConfigError> {
    let x: f64 = get(v, key)?;
    if !(x > 0.0 && x.is_finite()) {
        return Err(ConfigError::BadValue { key: key.into(), value: v[key].clone(), reason: "must be positive".into() });
    }
    Ok(x)
}

fn finite(v: &BTreeMap<String, String>, key: &str) -> Result<f64, ConfigError> {
    let x: f64 = get(v, key)?;
    if !x.is_finite() {
        return Err(ConfigError::BadValue { key: key.into(), value: v[key].clone(), reason: "must be finite".into() });
    }
    Ok(x)
}

impl RunConfig {
    /// Defaults, then `text`, then `overrides` (`section.key=value`).
    pub fn from_text(text: &str, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut values: BTreeMap<String, String> =
            DEFAULTS.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        for (k, (v, _)) in parse_text(text)? {
            values.insert(k, v);
        }
        for o in overrides {
            let (k, v) = o.split_once('=').ok_or_else(|| ConfigError::BadOverride(o.clone()))?;
            let k = k.trim();
            if !k.contains('.') {
                return Err(ConfigError::BadOverride(o.clone()));
            }
            if !values.contains_key(k) {
                return Err(ConfigError::UnknownKey { key: k.to_string(), line: None });
            }
            values.insert(k.to_string(), v.trim().to_string());
        }
        Self::from_values(values)
    }

    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, ConfigError> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p)
                .map_err(|e| ConfigError::Io { path: p.display().to_string(), reason: e.to_string() })?,
            None => String::new(),
        };
        Self::from_text(&text, overrides)
    }

    fn from_values(v: BTreeMap<String, String>) -> Result<Self, ConfigError> {
        let bad = |key: &str, reason: &str| ConfigError::BadValue { key: key.into(), value: v[key].clone(), reason: reason.into() };
        let n: usize = get(&v, "run.n")?;
        if n < 3 {
            return Err(bad("run.n", "dimension must be at least 3"));
        }
        let target = Target::parse(&v["run.target"]).ok_or_else(|| bad("run.target", "expected sphere or hyperbolic"))?;
        let rho0 = positive(&v, "grid.rho0")?;
        let rho_max = positive(&v, "grid.rho_max")?;
        if !(rho0 < 1.0 && rho_max > 1.0) {
            return Err(bad("grid.rho0", "need rho0 < 1 < rho_max"));
        }
        let nodes: usize = get(&v, "grid.nodes")?;
        let a_range = (finite(&v, "sweep.a_min")?, finite(&v, "sweep.a_max")?);
        if a_range.1 < a_range.0 {
            return Err(bad("sweep.a_max", "must not be below sweep.a_min"));
        }
        let alpha_range = (finite(&v, "sweep.alpha_min")?, finite(&v, "sweep.alpha_max")?);
        if !(alpha_range.0 >= 0.0 && alpha_range.1 >= alpha_range.0) {
            return Err(bad("sweep.alpha_max", "need 0 <= alpha_min <= alpha_max"));
        }
        let flow_init = match v["flow.init"].as_str() {
            "homogeneous" => FlowInit::Homogeneous,
            "perturbed" => FlowInit::Perturbed,
            _ => return Err(bad("flow.init", "expected homogeneous or perturbed")),
        };
        let ds = positive(&v, "tolerances.ds")?;
        let k: usize = get(&v, "spectrum.k")?;
        Ok(Self {
            n,
            target,
            seed: get(&v, "run.seed")?,
            out: PathBuf::from(&v["run.out"]),
            rho0,
            rho_max,
            nodes,
            rk_tol: positive(&v, "tolerances.rk_tol")?,
            bv_tol: positive(&v, "tolerances.bv_tol")?,
            kernel_tol: positive(&v, "tolerances.kernel_tol")?,
            ds,
            shoot_a: finite(&v, "shoot.a")?,
            a_range,
            sweep_samples: get(&v, "sweep.samples")?,
            alpha_range,
            alpha_count: get(&v, "sweep.alpha_count")?,
            flow_alpha: finite(&v, "flow.alpha")?,
            flow_init,
            s_end: positive(&v, "flow.s_end")?,
            amp: finite(&v, "flow.amp")?,
            width: positive(&v, "flow.width")?,
            k,
            values: v,
        })
    }

    pub fn set_out(&mut self, out: PathBuf) {
        self.values.insert("run.out".into(), out.display().to_string());
        self.out = out;
    }

    pub fn values(&self) -> &BTreeMap<String, String> {
        &self.values
    }

    /// Effective values minus `run.out`, so the output location does not
    /// change the manifest.
    pub fn manifest_values(&self) -> BTreeMap<String, String> {
        self.values.iter().filter(|(k, _)| *k != "run.out").map(|(k, v)| (k.clone(), v.clone())).collect()
    }

    /// Canonical `key = value` lines, sorted, without `run.out`.
    pub fn canonical(&self) -> String {
        self.manifest_values().iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    /// SHA-256 over the crate version, the command and the canonical config.
    pub fn manifest_hash(&self, command: &str) -> String {
        let mut h = Sha256::new();
        h.update(env!("CARGO_PKG_VERSION").as_bytes());
        h.update(b"\n");
        h.update(command.as_bytes());
        h.update(b"\n");
        h.update(self.canonical().as_bytes());
        hex::encode(h.finalize())
    }

    pub fn grid(&self) -> crate::Result<RadialGrid> {
        RadialGrid::layered(self.rho0, self.rho_max, self.nodes)
    }

    pub fn shooting(&self) -> crate::profile_ode::ShootingOptions {
        crate::profile_ode::ShootingOptions { rk_tol: self.rk_tol, ..Default::default() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let c = RunConfig::from_text("", &[]).unwrap();
        assert_eq!(c.n, 3);
        assert_eq!(c.target, Target::Sphere);
        let c = RunConfig::from_text("[run]\nn = 4 # dimension\ntarget = hyperbolic\n", &["grid.nodes=2000".into()]).unwrap();
        assert_eq!((c.n, c.target, c.nodes), (4, Target::Hyperbolic, 2000));
        assert_ne!(c.manifest_hash("shoot"), RunConfig::from_text("", &[]).unwrap().manifest_hash("shoot"));
        assert_eq!(c.manifest_hash("shoot"), c.clone().manifest_hash("shoot"));
    }

    #[test]
    fn errors_name_the_key() {
        let e = RunConfig::from_text("[run]\nbogus = 1\n", &[]).unwrap_err();
        assert!(e.to_string().contains("run.bogus"));
        let e = RunConfig::from_text("", &["grid.nope=3".into()]).unwrap_err();
        assert!(e.to_string().contains("grid.nope"));
        let e = RunConfig::from_text("[tolerances]\nrk_tol = -1\n", &[]).unwrap_err();
        assert!(e.to_string().contains("tolerances.rk_tol"));
        assert!(RunConfig::from_text("[run]\nn = 2\n", &[]).is_err());
        assert!(RunConfig::from_text("n = 3\n", &[]).is_err());
        assert!(RunConfig::from_text("[run]\njunk\n", &[]).is_err());
    }
}
