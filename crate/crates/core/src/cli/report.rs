//! CSV/JSON emission and the profile file format.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use super::config::RunConfig;
use super::CliError;
use crate::entropy_diagnostics::energy_density;
use crate::profile_ode::{Profile, Target};
use crate::weighted_geometry::{potential_f, PotentialParams, RadialGrid};

/// Shortest decimal that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

#[derive(Debug, Clone)]
pub enum Cell {
    F(f64),
    I(i64),
    S(String),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::F(x) => fmt_f64(*x),
            Cell::I(i) => i.to_string(),
            Cell::S(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::S(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::F(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::I(x as i64)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::F)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::S(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::S(s)
    }
}

/// Collects output files and stage timings for one command.
pub struct Bundle {
    pub dir: PathBuf,
    pub command: String,
    pub hash: String,
    manifest: Value,
    timings: BTreeMap<String, f64>,
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

impl Bundle {
    pub fn new(cfg: &RunConfig, command: &str) -> Result<Self, CliError> {
        let dir = cfg.out.clone();
        std::fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
        let hash = cfg.manifest_hash(command);
        let manifest = json!({
            "command": command,
            "version": env!("CARGO_PKG_VERSION"),
            "config": cfg.manifest_values(),
            "manifest_sha256": hash,
        });
        Ok(Self { dir, command: command.to_string(), hash, manifest, timings: BTreeMap::new() })
    }

    pub fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let t0 = std::time::Instant::now();
        let out = f();
        *self.timings.entry(stage.to_string()).or_insert(0.0) += t0.elapsed().as_secs_f64();
        out
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Comma-separated table: hash comment, header row, data rows.
    pub fn table(&self, name: &str, header: &[&str], rows: &[Vec<Cell>]) -> Result<(), CliError> {
        self.table_with(name, &[], header, rows)
    }

    pub fn table_with(&self, name: &str, comments: &[String], header: &[&str], rows: &[Vec<Cell>]) -> Result<(), CliError> {
        let mut s = format!("# manifest_sha256={}\n", self.hash);
        for c in comments {
            let _ = writeln!(s, "# {c}");
        }
        s.push_str(&header.join(","));
        s.push('\n');
        for r in rows {
            let line: Vec<String> = r.iter().map(Cell::render).collect();
            s.push_str(&line.join(","));
            s.push('\n');
        }
        let p = self.path(name);
        std::fs::write(&p, s).map_err(|e| io_err(&p, e))
    }

    /// `{manifest, results, checks}` as pretty JSON.
    pub fn report<R: Serialize>(&self, name: &str, results: &R, checks: &BTreeMap<String, bool>) -> Result<(), CliError> {
        let v = json!({ "manifest": self.manifest, "results": results, "checks": checks });
        self.json(name, &v)
    }

    pub fn json<T: Serialize>(&self, name: &str, v: &T) -> Result<(), CliError> {
        let p = self.path(name);
        let mut s = serde_json::to_string_pretty(v).map_err(|e| CliError::Io(e.to_string()))?;
        s.push('\n');
        std::fs::write(&p, s).map_err(|e| io_err(&p, e))
    }

    /// Writes `manifest.json` and `timings.json` (the only file that varies between identical runs).
    pub fn finish(&self) -> Result<(), CliError> {
        self.json("manifest.json", &self.manifest)?;
        self.json("timings.json", &json!({ "command": self.command, "seconds": self.timings }))
    }
}

const PROFILE_HEADER: [&str; 5] = ["rho", "h", "dh", "energy_density", "f"];

/// Profile as a table: `ρ, h, h', e(u), f` plus a metadata comment.
pub fn write_profile(bundle: &Bundle, name: &str, p: &Profile) -> Result<(), CliError> {
    let pp = PotentialParams::unit(p.n).map_err(CliError::Solver)?;
    let meta = format!(
        "profile n={} target={} shoot_param={} alpha_inf={} c2={}",
        p.n,
        p.target.name(),
        fmt_f64(p.shoot_param),
        fmt_f64(p.alpha_inf),
        fmt_f64(p.c2)
    );
    let rows: Vec<Vec<Cell>> = p
        .grid
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let e = energy_density(p, r).unwrap_or(f64::NAN);
            vec![r.into(), p.h[i].into(), p.dh[i].into(), e.into(), potential_f(r, pp).into()]
        })
        .collect();
    bundle.table_with(name, &[meta], &PROFILE_HEADER, &rows)
}

fn parse_err(path: &Path, msg: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("{}: {msg}", path.display()))
}

/// Reads a file written by [`write_profile`].
pub fn read_profile(path: &Path) -> Result<Profile, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| parse_err(path, e))?;
    let mut meta: BTreeMap<String, String> = BTreeMap::new();
    let mut header: Option<Vec<String>> = None;
    let (mut rho, mut h, mut dh) = (Vec::new(), Vec::new(), Vec::new());
    for (k, line) in text.lines().enumerate() {
        if let Some(c) = line.strip_prefix('#') {
            if let Some(rest) = c.trim().strip_prefix("profile ") {
                for kv in rest.split_whitespace() {
                    if let Some((a, b)) = kv.split_once('=') {
                        meta.insert(a.to_string(), b.to_string());
                    }
                }
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let Some(hdr) = &header else {
            header = Some(fields.iter().map(|s| s.trim().to_string()).collect());
            continue;
        };
        let col = |name: &str| -> Result<f64, CliError> {
            let j = hdr.iter().position(|c| c == name).ok_or_else(|| parse_err(path, format!("missing column {name}")))?;
            fields
                .get(j)
                .ok_or_else(|| parse_err(path, format!("line {}: too few fields", k + 1)))?
                .trim()
                .parse::<f64>()
                .map_err(|e| parse_err(path, format!("line {}: {e}", k + 1)))
        };
        rho.push(col("rho")?);
        h.push(col("h")?);
        dh.push(col("dh")?);
    }
    let field = |key: &str| -> Result<&String, CliError> {
        meta.get(key).ok_or_else(|| parse_err(path, format!("missing profile metadata `{key}`")))
    };
    let num = |key: &str| -> Result<f64, CliError> {
        field(key)?.parse::<f64>().map_err(|e| parse_err(path, format!("metadata `{key}`: {e}")))
    };
    let n: usize = field("n")?.parse().map_err(|e| parse_err(path, format!("metadata `n`: {e}")))?;
    let target = Target::parse(field("target")?).ok_or_else(|| parse_err(path, "unknown target"))?;
    let grid = RadialGrid::new(rho).map_err(|e| parse_err(path, e))?;
    Ok(Profile {
        grid,
        h,
        dh,
        n,
        target,
        shoot_param: num("shoot_param")?,
        alpha_inf: num("alpha_inf")?,
        c2: num("c2")?,
        trace_coeff: None,
    })
}
