//! Run configuration.
//!
//! The file is TOML-flavoured INI: optional top-level `seed` and
//! `output_dir`, then `[ensemble]`, `[medium]`, `[solver]`, `[analysis]` and
//! `[sweep]` tables of flat `key = value` pairs. Syntax is handled by the
//! `toml` crate; validation walks every key and reports all problems at once.

use std::collections::BTreeSet;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::analysis::AnalysisOptions;
use crate::direct::Retardation;
use crate::ensemble::{AtomParams, Geometry, DEFAULT_R_MIN};
use crate::spectrum::{MediumModel, OpticalBranch, DEFAULT_EDGE_TOL};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ConfigIssue {
    Parse { line: usize, message: String },
    Validation { key: String, message: String },
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigIssue::Parse { line, message } => write!(f, "line {line}: {message}"),
            ConfigIssue::Validation { key, message } => write!(f, "{key} {message}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub issues: Vec<ConfigIssue>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msgs: Vec<String> = self.issues.iter().map(ToString::to_string).collect();
        write!(f, "{}", msgs.join("; "))
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Direct,
    Averaged,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleSection {
    pub geometry: Geometry,
    pub params: AtomParams,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum FieldSpec {
    Zero,
    ConstantResonant {
        f0: Complex64,
        drive_omega: Option<f64>,
    },
    OscillatorBath {
        modes: usize,
        center: Option<f64>,
        width: f64,
        amplitude: f64,
    },
    /// Effective coupling supplied as a number.
    Direct {
        alpha: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MediumSection {
    pub field: FieldSpec,
    pub realizations: usize,
    pub alpha_t_max: f64,
    pub alpha_samples: usize,
    /// Inversion at which `Omega(s)` and `Gamma(s)` are evaluated for alpha;
    /// defaults to `s0`.
    pub alpha_eval_s: Option<f64>,
    pub spectrum: MediumModel,
    pub k_max: f64,
    pub k_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverSection {
    pub kind: SolverKind,
    pub retardation: Retardation,
    pub counter_rotating: bool,
    pub dt: f64,
    pub t_end: f64,
    pub output_dt: f64,
    pub max_ds: f64,
    /// Averaged solver: overrides the geometric `g`.
    pub g: Option<f64>,
    /// Averaged solver: overrides `4 |u0|^2`.
    pub w0: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisSection {
    pub options: AnalysisOptions,
    pub edge_tol: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SweepSection {
    pub g: Vec<f64>,
    pub alpha: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub seed: u64,
    pub output_dir: String,
    pub ensemble: EnsembleSection,
    pub medium: MediumSection,
    pub solver: SolverSection,
    pub analysis: AnalysisSection,
    pub sweep: SweepSection,
}

const SECTIONS: [&str; 5] = ["ensemble", "medium", "solver", "analysis", "sweep"];

/// Typed, key-tracking view of one table.
struct Reader<'a> {
    section: &'a str,
    table: Option<&'a Table>,
    used: BTreeSet<&'static str>,
}

impl<'a> Reader<'a> {
    fn new(section: &'a str, table: Option<&'a Table>) -> Self {
        Self { section, table, used: BTreeSet::new() }
    }

    fn key(&self, key: &str) -> String {
        if self.section.is_empty() {
            key.to_string()
        } else {
            format!("{}.{key}", self.section)
        }
    }

    fn raw(&mut self, key: &'static str) -> Option<&'a Value> {
        self.used.insert(key);
        self.table.and_then(|t| t.get(key))
    }

    fn issue(&self, issues: &mut Vec<ConfigIssue>, key: &str, message: impl Into<String>) {
        issues.push(ConfigIssue::Validation { key: self.key(key), message: message.into() });
    }

    fn opt_f64(&mut self, key: &'static str, issues: &mut Vec<ConfigIssue>) -> Option<f64> {
        match self.raw(key)? {
            Value::Float(x) if x.is_finite() => Some(*x),
            Value::Float(_) => {
                self.issue(issues, key, "must be finite");
                None
            }
            Value::Integer(i) => Some(*i as f64),
            other => {
                self.issue(issues, key, format!("expected a number, found {}", other.type_str()));
                None
            }
        }
    }

    fn f64(&mut self, key: &'static str, default: f64, issues: &mut Vec<ConfigIssue>) -> f64 {
        self.opt_f64(key, issues).unwrap_or(default)
    }

    fn f64_where(
        &mut self,
        key: &'static str,
        default: f64,
        ok: impl Fn(f64) -> bool,
        what: &str,
        issues: &mut Vec<ConfigIssue>,
    ) -> f64 {
        let v = self.f64(key, default, issues);
        if !ok(v) {
            self.issue(issues, key, what);
        }
        v
    }

    fn usize(&mut self, key: &'static str, default: usize, issues: &mut Vec<ConfigIssue>) -> usize {
        match self.raw(key) {
            None => default,
            Some(Value::Integer(i)) if *i >= 0 => *i as usize,
            Some(Value::Integer(_)) => {
                self.issue(issues, key, "must be >= 0");
                default
            }
            Some(other) => {
                self.issue(issues, key, format!("expected an integer, found {}", other.type_str()));
                default
            }
        }
    }

    fn bool(&mut self, key: &'static str, default: bool, issues: &mut Vec<ConfigIssue>) -> bool {
        match self.raw(key) {
            None => default,
            Some(Value::Boolean(b)) => *b,
            Some(other) => {
                self.issue(issues, key, format!("expected a boolean, found {}", other.type_str()));
                default
            }
        }
    }

    fn string(&mut self, key: &'static str, default: &str, issues: &mut Vec<ConfigIssue>) -> String {
        match self.raw(key) {
            None => default.to_string(),
            Some(Value::String(s)) => s.clone(),
            Some(other) => {
                self.issue(issues, key, format!("expected a string, found {}", other.type_str()));
                default.to_string()
            }
        }
    }

    fn choice<T: Copy>(
        &mut self,
        key: &'static str,
        default: T,
        options: &[(&str, T)],
        issues: &mut Vec<ConfigIssue>,
    ) -> T {
        let Some(raw) = self.raw(key) else { return default };
        let Value::String(s) = raw else {
            self.issue(issues, key, format!("expected a string, found {}", raw.type_str()));
            return default;
        };
        match options.iter().find(|(name, _)| name == s) {
            Some((_, v)) => *v,
            None => {
                let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
                self.issue(issues, key, format!("'{s}' is not one of {}", names.join(", ")));
                default
            }
        }
    }

    fn f64_list(&mut self, key: &'static str, issues: &mut Vec<ConfigIssue>) -> Vec<f64> {
        let Some(raw) = self.raw(key) else { return Vec::new() };
        let Value::Array(items) = raw else {
            self.issue(issues, key, "expected an array of numbers");
            return Vec::new();
        };
        let mut out = Vec::with_capacity(items.len());
        for item in items {
            match item {
                Value::Float(x) if x.is_finite() => out.push(*x),
                Value::Integer(i) => out.push(*i as f64),
                _ => {
                    self.issue(issues, key, "entries must be finite numbers");
                    return Vec::new();
                }
            }
        }
        out
    }

    fn positions(&mut self, key: &'static str, issues: &mut Vec<ConfigIssue>) -> Vec<[f64; 3]> {
        let Some(raw) = self.raw(key) else { return Vec::new() };
        let parsed = raw.as_array().and_then(|rows| {
            rows.iter()
                .map(|row| {
                    let r = row.as_array()?;
                    if r.len() != 3 {
                        return None;
                    }
                    let mut p = [0.0; 3];
                    for (k, v) in r.iter().enumerate() {
                        p[k] = match v {
                            Value::Float(x) if x.is_finite() => *x,
                            Value::Integer(i) => *i as f64,
                            _ => return None,
                        };
                    }
                    Some(p)
                })
                .collect::<Option<Vec<_>>>()
        });
        parsed.unwrap_or_else(|| {
            self.issue(issues, key, "expected an array of [x, y, z] number triples");
            Vec::new()
        })
    }

    fn finish(self, issues: &mut Vec<ConfigIssue>) {
        if let Some(t) = self.table {
            for k in t.keys() {
                if !self.used.contains(k.as_str()) {
                    if self.section.is_empty() && SECTIONS.contains(&k.as_str()) {
                        continue;
                    }
                    issues
                        .push(ConfigIssue::Validation { key: self.key(k), message: "is not a recognised key".into() });
                }
            }
        }
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

/// Parses and validates a configuration, filling documented defaults.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let root: Table = text.parse().map_err(|e: toml::de::Error| ConfigError {
        issues: vec![ConfigIssue::Parse {
            line: e.span().map_or(1, |s| line_of(text, s.start)),
            message: e.message().to_string(),
        }],
    })?;
    let mut issues = Vec::new();

    let section = |name: &str, issues: &mut Vec<ConfigIssue>| -> Option<&Table> {
        match root.get(name) {
            None => None,
            Some(Value::Table(t)) => Some(t),
            Some(_) => {
                issues.push(ConfigIssue::Validation { key: name.into(), message: "must be a [section]".into() });
                None
            }
        }
    };

    let mut top = Reader::new("", Some(&root));
    let seed = match top.raw("seed") {
        None => 0,
        Some(Value::Integer(i)) if *i >= 0 => *i as u64,
        Some(_) => {
            top.issue(&mut issues, "seed", "must be a nonnegative integer");
            0
        }
    };
    let output_dir = top.string("output_dir", "out", &mut issues);
    top.finish(&mut issues);

    let ensemble = read_ensemble(section("ensemble", &mut issues), &mut issues);
    let medium = read_medium(section("medium", &mut issues), &mut issues);
    let solver = read_solver(section("solver", &mut issues), &mut issues);
    let analysis = read_analysis(section("analysis", &mut issues), &mut issues);
    let sweep = read_sweep(section("sweep", &mut issues), &mut issues);

    if let (SolverKind::Direct, FieldSpec::Direct { .. }) = (solver.kind, &medium.field) {
        issues.push(ConfigIssue::Validation {
            key: "medium.mode".into(),
            message: "'direct' supplies only alpha and needs the averaged solver".into(),
        });
    }

    if issues.is_empty() {
        Ok(RunConfig { seed, output_dir, ensemble, medium, solver, analysis, sweep })
    } else {
        Err(ConfigError { issues })
    }
}

fn read_ensemble(table: Option<&Table>, issues: &mut Vec<ConfigIssue>) -> EnsembleSection {
    #[derive(Clone, Copy)]
    enum Kind {
        Chain,
        Cubic,
        Random,
        Explicit,
    }
    let mut r = Reader::new("ensemble", table);
    let kind = r.choice(
        "geometry",
        Kind::Chain,
        &[
            ("chain", Kind::Chain),
            ("cubic", Kind::Cubic),
            ("random_sphere", Kind::Random),
            ("explicit", Kind::Explicit),
        ],
        issues,
    );
    let n = r.usize("n_atoms", 1, issues);
    let n_side = r.usize("n_side", 2, issues);
    let spacing = r.f64("spacing", 1.0, issues);
    let radius = r.f64("radius", 1.0, issues);
    let positions = r.positions("positions", issues);
    let geometry = match kind {
        Kind::Chain => Geometry::Chain { n, spacing },
        Kind::Cubic => Geometry::Cubic { n_side, spacing },
        Kind::Random => Geometry::RandomSphere { n, radius },
        Kind::Explicit => Geometry::Explicit { positions },
    };
    match &geometry {
        Geometry::Chain { n, spacing } | Geometry::RandomSphere { n, radius: spacing } => {
            if *n < 1 {
                r.issue(issues, "n_atoms", "must be >= 1");
            }
            if *spacing <= 0.0 {
                let k = if matches!(kind, Kind::Chain) { "spacing" } else { "radius" };
                r.issue(issues, k, "must be positive");
            }
        }
        Geometry::Cubic { n_side, spacing } => {
            if *n_side < 1 {
                r.issue(issues, "n_side", "must be >= 1");
            }
            if *spacing <= 0.0 {
                r.issue(issues, "spacing", "must be positive");
            }
        }
        Geometry::Explicit { positions } => {
            if positions.is_empty() {
                r.issue(issues, "positions", "must list at least one atom");
            }
        }
    }

    let d = AtomParams::default();
    let r_min = r.f64_where("r_min", DEFAULT_R_MIN, |x| x > 0.0, "must be positive", issues);
    let omega0 = r.f64_where("omega0", 101.0, |x| x > 0.0, "must be positive", issues);
    let gamma1 = r.f64_where("gamma1", d.gamma1, |x| x >= 0.0, "must be >= 0", issues);
    let gamma_s = r.f64("gamma_s", d.gamma_s, issues);
    let u0 = Complex64::new(r.f64("u0_re", 0.0, issues), r.f64("u0_im", 0.0, issues));
    let s0 = r.f64_where("s0", d.s0, |x| (-1.0..=1.0).contains(&x), "out of [-1,1]", issues);
    let zeta = r.f64_where("zeta", s0.clamp(-1.0, 1.0), |x| (-1.0..=1.0).contains(&x), "out of [-1,1]", issues);
    if s0.abs() <= 1.0 && 4.0 * u0.norm_sqr() + s0 * s0 > 1.0 + 1e-12 {
        r.issue(issues, "u0", "places the initial state outside the Bloch sphere (4|u0|^2 + s0^2 > 1)");
    }
    r.finish(issues);
    EnsembleSection { geometry, params: AtomParams { omega0, gamma1, gamma_s, u0, s0, zeta, r_min } }
}

fn read_medium(table: Option<&Table>, issues: &mut Vec<ConfigIssue>) -> MediumSection {
    #[derive(Clone, Copy, PartialEq)]
    enum Mode {
        Zero,
        Constant,
        Bath,
        Direct,
    }
    let mut r = Reader::new("medium", table);
    let mode = r.choice(
        "mode",
        Mode::Zero,
        &[
            ("zero", Mode::Zero),
            ("constant_resonant", Mode::Constant),
            ("oscillator_bath", Mode::Bath),
            ("direct", Mode::Direct),
        ],
        issues,
    );
    let alpha = r.opt_f64("alpha", issues);
    let f0 = Complex64::new(r.f64("f0_re", 0.0, issues), r.f64("f0_im", 0.0, issues));
    let drive_omega = r.opt_f64("drive_omega", issues);
    let modes = r.usize("bath_modes", 64, issues);
    let center = r.opt_f64("bath_center", issues);
    let width = r.f64_where("bath_width", 10.0, |x| x >= 0.0, "must be >= 0", issues);
    let amplitude = r.f64_where("bath_amplitude", 0.01, |x| x >= 0.0, "must be >= 0", issues);
    let field = match mode {
        Mode::Zero => FieldSpec::Zero,
        Mode::Constant => FieldSpec::ConstantResonant { f0, drive_omega },
        Mode::Bath => {
            if modes == 0 {
                r.issue(issues, "bath_modes", "must be >= 1");
            }
            FieldSpec::OscillatorBath { modes, center, width, amplitude }
        }
        Mode::Direct => match alpha {
            Some(a) if a >= 0.0 => FieldSpec::Direct { alpha: a },
            Some(_) => {
                r.issue(issues, "alpha", "must be >= 0");
                FieldSpec::Direct { alpha: 0.0 }
            }
            None => {
                r.issue(issues, "alpha", "is required when mode = \"direct\"");
                FieldSpec::Direct { alpha: 0.0 }
            }
        },
    };
    if mode != Mode::Direct && alpha.is_some() {
        r.issue(issues, "alpha", "is only used with mode = \"direct\"");
    }
    let realizations = r.usize("realizations", 32, issues).max(1);
    let alpha_t_max = r.f64_where("alpha_t_max", 200.0, |x| x > 0.0, "must be positive", issues);
    let alpha_samples = r.usize("alpha_samples", 4001, issues);
    if alpha_samples < 100 {
        r.issue(issues, "alpha_samples", "must be >= 100");
    }
    let alpha_eval_s = r.opt_f64("alpha_eval_s", issues);
    if alpha_eval_s.is_some_and(|s| !(-1.0..=1.0).contains(&s)) {
        r.issue(issues, "alpha_eval_s", "out of [-1,1]");
    }

    let omega_t = r.f64_where("omega_t", 100.0, |x| x > 0.0, "must be positive", issues);
    let coupling_strength = r.f64_where("coupling_strength", 20.0, |x| x >= 0.0, "must be >= 0", issues);
    #[derive(Clone, Copy)]
    enum Branch {
        Flat,
        Cosine,
    }
    let branch = r.choice("branch", Branch::Flat, &[("flat", Branch::Flat), ("cosine", Branch::Cosine)], issues);
    let band_width = r.f64_where("band_width", 0.0, |x| x >= 0.0, "must be >= 0", issues);
    let lattice = r.f64_where("lattice", 1.0, |x| x > 0.0, "must be positive", issues);
    let light_speed = r.f64_where("light_speed", 1.0, |x| x > 0.0, "must be positive", issues);
    let k_max = r.f64_where("k_max", 4.0 * omega_t, |x| x > 0.0, "must be positive", issues);
    let k_points = r.usize("k_points", 401, issues);
    if k_points < 2 {
        r.issue(issues, "k_points", "must be >= 2");
    }
    let branch = match branch {
        Branch::Flat => OpticalBranch::Flat,
        Branch::Cosine => OpticalBranch::Cosine { width: band_width, lattice },
    };
    r.finish(issues);
    MediumSection {
        field,
        realizations,
        alpha_t_max,
        alpha_samples,
        alpha_eval_s,
        spectrum: MediumModel { omega_t, branch, coupling_strength, light_speed },
        k_max,
        k_points,
    }
}

fn read_solver(table: Option<&Table>, issues: &mut Vec<ConfigIssue>) -> SolverSection {
    let mut r = Reader::new("solver", table);
    let kind = r.choice(
        "kind",
        SolverKind::Averaged,
        &[("direct", SolverKind::Direct), ("averaged", SolverKind::Averaged)],
        issues,
    );
    let retardation = r.choice(
        "retardation",
        Retardation::Phase,
        &[("none", Retardation::None), ("phase", Retardation::Phase), ("full_dde", Retardation::FullDde)],
        issues,
    );
    let counter_rotating = r.bool("counter_rotating", false, issues);
    let positive = |x: f64| x > 0.0;
    let dt = r.f64_where("dt", 0.01, positive, "must be positive", issues);
    let t_end = r.f64_where("t_end", 100.0, positive, "must be positive", issues);
    let output_dt = r.f64_where("output_dt", 0.05, positive, "must be positive", issues);
    let max_ds = r.f64_where("max_ds", 0.01, positive, "must be positive", issues);
    let g = r.opt_f64("g", issues);
    let w0 = r.opt_f64("w0", issues);
    if w0.is_some_and(|w| !(0.0..=1.0).contains(&w)) {
        r.issue(issues, "w0", "out of [0,1]");
    }
    r.finish(issues);
    SolverSection { kind, retardation, counter_rotating, dt, t_end, output_dt, max_ds, g, w0 }
}

fn read_analysis(table: Option<&Table>, issues: &mut Vec<ConfigIssue>) -> AnalysisSection {
    let d = AnalysisOptions::default();
    let mut r = Reader::new("analysis", table);
    let unit = |x: f64| x > 0.0 && x < 1.0;
    let burst_threshold = r.f64_where("burst_threshold", d.burst_threshold, unit, "out of (0,1)", issues);
    let plateau_tol = r.f64_where("plateau_tol", d.plateau_tol, |x| x > 0.0, "must be positive", issues);
    let verdict_tol = r.f64_where("verdict_tol", d.verdict_tol, unit, "out of (0,1)", issues);
    let g_min = r.f64("g_min", d.g_min, issues);
    let alpha_ratio_max = r.f64_where("alpha_ratio_max", d.alpha_ratio_max, |x| x > 0.0, "must be positive", issues);
    let edge_tol = r.f64_where("edge_tol", DEFAULT_EDGE_TOL, |x| x >= 0.0, "must be >= 0", issues);
    r.finish(issues);
    AnalysisSection {
        options: AnalysisOptions { burst_threshold, plateau_tol, verdict_tol, g_min, alpha_ratio_max },
        edge_tol,
    }
}

fn read_sweep(table: Option<&Table>, issues: &mut Vec<ConfigIssue>) -> SweepSection {
    let mut r = Reader::new("sweep", table);
    let g = r.f64_list("g", issues);
    let alpha = r.f64_list("alpha", issues);
    if alpha.iter().any(|a| *a < 0.0) {
        r.issue(issues, "alpha", "entries must be >= 0");
    }
    r.finish(issues);
    SweepSection { g, alpha }
}

impl RunConfig {
    /// Canonical text form with every default spelled out. Parsing it gives
    /// back an identical configuration.
    pub fn to_canonical(&self) -> String {
        let mut root = Table::new();
        root.insert("seed".into(), Value::Integer(self.seed as i64));
        root.insert("output_dir".into(), Value::String(self.output_dir.clone()));

        let mut e = Table::new();
        let p = &self.ensemble.params;
        match &self.ensemble.geometry {
            Geometry::Chain { n, spacing } => {
                put_str(&mut e, "geometry", "chain");
                e.insert("n_atoms".into(), Value::Integer(*n as i64));
                put(&mut e, "spacing", *spacing);
            }
            Geometry::Cubic { n_side, spacing } => {
                put_str(&mut e, "geometry", "cubic");
                e.insert("n_side".into(), Value::Integer(*n_side as i64));
                put(&mut e, "spacing", *spacing);
            }
            Geometry::RandomSphere { n, radius } => {
                put_str(&mut e, "geometry", "random_sphere");
                e.insert("n_atoms".into(), Value::Integer(*n as i64));
                put(&mut e, "radius", *radius);
            }
            Geometry::Explicit { positions } => {
                put_str(&mut e, "geometry", "explicit");
                let rows =
                    positions.iter().map(|q| Value::Array(q.iter().map(|x| Value::Float(*x)).collect())).collect();
                e.insert("positions".into(), Value::Array(rows));
            }
        }
        for (k, v) in [
            ("r_min", p.r_min),
            ("omega0", p.omega0),
            ("gamma1", p.gamma1),
            ("gamma_s", p.gamma_s),
            ("u0_re", p.u0.re),
            ("u0_im", p.u0.im),
            ("s0", p.s0),
            ("zeta", p.zeta),
        ] {
            put(&mut e, k, v);
        }
        root.insert("ensemble".into(), Value::Table(e));

        let m = &self.medium;
        let mut t = Table::new();
        match &m.field {
            FieldSpec::Zero => put_str(&mut t, "mode", "zero"),
            FieldSpec::ConstantResonant { f0, drive_omega } => {
                put_str(&mut t, "mode", "constant_resonant");
                put(&mut t, "f0_re", f0.re);
                put(&mut t, "f0_im", f0.im);
                if let Some(w) = drive_omega {
                    put(&mut t, "drive_omega", *w);
                }
            }
            FieldSpec::OscillatorBath { modes, center, width, amplitude } => {
                put_str(&mut t, "mode", "oscillator_bath");
                t.insert("bath_modes".into(), Value::Integer(*modes as i64));
                if let Some(c) = center {
                    put(&mut t, "bath_center", *c);
                }
                put(&mut t, "bath_width", *width);
                put(&mut t, "bath_amplitude", *amplitude);
            }
            FieldSpec::Direct { alpha } => {
                put_str(&mut t, "mode", "direct");
                put(&mut t, "alpha", *alpha);
            }
        }
        t.insert("realizations".into(), Value::Integer(m.realizations as i64));
        put(&mut t, "alpha_t_max", m.alpha_t_max);
        t.insert("alpha_samples".into(), Value::Integer(m.alpha_samples as i64));
        if let Some(s) = m.alpha_eval_s {
            put(&mut t, "alpha_eval_s", s);
        }
        put(&mut t, "omega_t", m.spectrum.omega_t);
        put(&mut t, "coupling_strength", m.spectrum.coupling_strength);
        match m.spectrum.branch {
            OpticalBranch::Flat => put_str(&mut t, "branch", "flat"),
            OpticalBranch::Cosine { width, lattice } => {
                put_str(&mut t, "branch", "cosine");
                put(&mut t, "band_width", width);
                put(&mut t, "lattice", lattice);
            }
        }
        put(&mut t, "light_speed", m.spectrum.light_speed);
        put(&mut t, "k_max", m.k_max);
        t.insert("k_points".into(), Value::Integer(m.k_points as i64));
        root.insert("medium".into(), Value::Table(t));

        let s = &self.solver;
        let mut t = Table::new();
        put_str(
            &mut t,
            "kind",
            match s.kind {
                SolverKind::Direct => "direct",
                SolverKind::Averaged => "averaged",
            },
        );
        put_str(
            &mut t,
            "retardation",
            match s.retardation {
                Retardation::None => "none",
                Retardation::Phase => "phase",
                Retardation::FullDde => "full_dde",
            },
        );
        t.insert("counter_rotating".into(), Value::Boolean(s.counter_rotating));
        for (k, v) in [("dt", s.dt), ("t_end", s.t_end), ("output_dt", s.output_dt), ("max_ds", s.max_ds)] {
            put(&mut t, k, v);
        }
        if let Some(g) = s.g {
            put(&mut t, "g", g);
        }
        if let Some(w) = s.w0 {
            put(&mut t, "w0", w);
        }
        root.insert("solver".into(), Value::Table(t));

        let a = &self.analysis;
        let mut t = Table::new();
        for (k, v) in [
            ("burst_threshold", a.options.burst_threshold),
            ("plateau_tol", a.options.plateau_tol),
            ("verdict_tol", a.options.verdict_tol),
            ("g_min", a.options.g_min),
            ("alpha_ratio_max", a.options.alpha_ratio_max),
            ("edge_tol", a.edge_tol),
        ] {
            put(&mut t, k, v);
        }
        root.insert("analysis".into(), Value::Table(t));

        let mut t = Table::new();
        if !self.sweep.g.is_empty() {
            t.insert("g".into(), Value::Array(self.sweep.g.iter().map(|x| Value::Float(*x)).collect()));
        }
        if !self.sweep.alpha.is_empty() {
            t.insert("alpha".into(), Value::Array(self.sweep.alpha.iter().map(|x| Value::Float(*x)).collect()));
        }
        root.insert("sweep".into(), Value::Table(t));

        toml::to_string(&root).expect("configuration tables always serialize")
    }
}

fn put(t: &mut Table, k: &str, v: f64) {
    t.insert(k.into(), Value::Float(v));
}

fn put_str(t: &mut Table, k: &str, v: &str) {
    t.insert(k.into(), Value::String(v.into()));
}
