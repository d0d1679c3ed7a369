//! Subcommand orchestration and artifact emission.
//!
//! Every subcommand is a pure function of the configuration that returns its
//! artifacts in memory; `write_*` helpers put them on disk. Identical inputs
//! give byte-identical outputs.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{classify_regime, detect_bursts, stationary_excitation, BurstReport, Regime, StationaryReport};
use crate::averaged::{
    integrate_averaged, stationary_point, AveragedOptions, AveragedParams, FixedPoint, CLOSURE_LABEL,
};
use crate::config::{parse_config, ConfigError, ConfigIssue, FieldSpec, RunConfig, SolverKind};
use crate::coupling::{critical_alpha, effective_freq_atten, CouplingSummary};
use crate::direct::{integrate_direct, DirectOptions, Retardation};
use crate::ensemble::{build_geometry, AtomEnsemble};
use crate::error::Error;
use crate::field::{alpha_effective, AlphaEstimate, AlphaOptions, FieldModel};
use crate::series::TimeSeries;
use crate::spectrum::{
    classify_frequency, matter_branch, polariton_branches, uniform_grid, FrequencyClass, MediumModel,
};

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Numerical(Error),
    Io { path: PathBuf, message: String },
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "configuration error: {e}"),
            RunError::Numerical(e) => write!(f, "{e}"),
            RunError::Io { path, message } => write!(f, "{}: {message}", path.display()),
        }
    }
}

impl std::error::Error for RunError {}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        RunError::Numerical(e)
    }
}

impl RunError {
    fn config(key: &str, message: impl Into<String>) -> Self {
        RunError::Config(ConfigError {
            issues: vec![ConfigIssue::Validation { key: key.into(), message: message.into() }],
        })
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        RunError::Io { path: path.to_path_buf(), message: e.to_string() }
    }

    /// Input problems (including physically invalid parameters) exit with 2,
    /// failures during a computation with 3.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Io { .. } => EXIT_CONFIG,
            RunError::Numerical(
                Error::InvalidParameter(_) | Error::MinimumSeparationViolated { .. } | Error::DegenerateInitialState(_),
            ) => EXIT_CONFIG,
            RunError::Numerical(_) => EXIT_NUMERICAL,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let (kind, issues) = match self {
            RunError::Config(e) => ("ConfigError", serde_json::to_value(&e.issues).unwrap_or_default()),
            RunError::Numerical(e) => (e.kind(), serde_json::Value::Array(Vec::new())),
            RunError::Io { .. } => ("IoError", serde_json::Value::Array(Vec::new())),
        };
        serde_json::json!({
            "error": {
                "kind": kind,
                "message": self.to_string(),
                "exit_code": self.exit_code(),
                "issues": issues,
            }
        })
    }
}

pub fn read_text(path: &Path) -> Result<String, RunError> {
    fs::read_to_string(path).map_err(|e| RunError::io(path, e))
}

pub fn load_config(path: &Path) -> Result<RunConfig, RunError> {
    Ok(parse_config(&read_text(path)?)?)
}

pub fn write_text(path: &Path, text: &str) -> Result<(), RunError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| RunError::io(parent, e))?;
    }
    fs::write(path, text).map_err(|e| RunError::io(path, e))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

pub fn build_ensemble(cfg: &RunConfig) -> Result<AtomEnsemble, Error> {
    build_geometry(&cfg.ensemble.geometry, cfg.ensemble.params, cfg.seed)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingsReport {
    pub seed: u64,
    pub n_atoms: usize,
    pub min_separation: Option<f64>,
    #[serde(flatten)]
    pub summary: CouplingSummary,
}

pub fn couplings(cfg: &RunConfig) -> Result<CouplingsReport, RunError> {
    let ens = build_ensemble(cfg)?;
    Ok(CouplingsReport {
        seed: cfg.seed,
        n_atoms: ens.n_atoms(),
        min_separation: ens.pair_distances().min_offdiag(),
        summary: CouplingSummary::compute(&ens),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub seed: u64,
    pub model: MediumModel,
    pub gap_low: f64,
    pub gap_high: f64,
    pub gap_width: f64,
    pub omega0: f64,
    pub omega0_class: FrequencyClass,
    pub k_points: usize,
}

pub const SPECTRUM_CSV_HEADER: &str = "k,omega_minus,omega_plus,omega_matter";

/// Dispersion table (CSV) and its summary.
pub fn spectrum(cfg: &RunConfig) -> Result<(SpectrumReport, String), RunError> {
    let model = cfg.medium.spectrum;
    let grid = uniform_grid(cfg.medium.k_max, cfg.medium.k_points);
    let matter = matter_branch(&model, &grid)?;
    let bands = polariton_branches(&model, &grid)?;
    let mut csv = String::from(SPECTRUM_CSV_HEADER);
    csv.push('\n');
    for i in 0..grid.len() {
        csv.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e}\n",
            grid[i], bands.omega_minus[i], bands.omega_plus[i], matter[i]
        ));
    }
    let omega0 = cfg.ensemble.params.omega0;
    let report = SpectrumReport {
        seed: cfg.seed,
        model,
        gap_low: bands.gap_low,
        gap_high: bands.gap_high,
        gap_width: bands.gap_width(),
        omega0,
        omega0_class: classify_frequency(&bands, omega0, cfg.analysis.edge_tol),
        k_points: grid.len(),
    };
    Ok((report, csv))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaSource {
    Direct,
    ZeroField,
    Estimated,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaInfo {
    pub value: f64,
    pub source: AlphaSource,
    /// Inversion at which the effective frequency and attenuation were taken.
    pub eval_s: Option<f64>,
    pub estimate: Option<AlphaEstimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SolverMeta {
    Direct {
        retardation: Retardation,
        counter_rotating: bool,
        dt: f64,
        t_end: f64,
        output_every: usize,
        steps: usize,
        max_bloch_norm: f64,
        /// Collective coupling rate used after any rescaling to match `solver.g`.
        gamma_s: f64,
    },
    Averaged {
        closure: &'static str,
        dt: f64,
        t_end: f64,
        output_dt: f64,
        max_ds: f64,
        steps: usize,
        rejected_steps: usize,
        min_dt: f64,
        w0: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub seed: u64,
    pub solver: SolverMeta,
    pub couplings: CouplingSummary,
    /// Collective coupling driving the dynamics.
    pub g: f64,
    pub alpha: Option<AlphaInfo>,
    pub alpha_error: Option<String>,
    pub alpha_c: Option<f64>,
    pub regime: Option<Regime>,
    pub fixed_point: Option<FixedPoint>,
    pub fixed_point_error: Option<String>,
    pub bursts: BurstReport,
    pub stationary: Option<StationaryReport>,
    pub stationary_error: Option<String>,
    pub config: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutput {
    pub series: TimeSeries,
    pub summary: Summary,
}

impl SimulationOutput {
    pub fn csv(&self) -> String {
        self.series.to_csv()
    }

    pub fn summary_json(&self) -> String {
        to_json(&self.summary)
    }
}

fn eval_s(cfg: &RunConfig) -> f64 {
    cfg.medium.alpha_eval_s.unwrap_or(cfg.ensemble.params.s0)
}

/// Field seen by the atoms in the direct solver and entering the alpha estimate.
pub fn field_model(cfg: &RunConfig, g: f64, delta_l: f64) -> FieldModel {
    let (omega, _) = effective_freq_atten(cfg.ensemble.params.omega0, g, delta_l, eval_s(cfg));
    match &cfg.medium.field {
        FieldSpec::Zero | FieldSpec::Direct { .. } => FieldModel::zero(),
        FieldSpec::ConstantResonant { f0, drive_omega } => {
            FieldModel::constant_resonant(*f0, drive_omega.unwrap_or(omega))
        }
        FieldSpec::OscillatorBath { modes, center, width, amplitude } => {
            FieldModel::uniform_bath(*modes, center.unwrap_or(omega), *width, *amplitude, cfg.seed)
        }
    }
}

fn resolve_alpha(cfg: &RunConfig, g: f64, delta_l: f64) -> Result<AlphaInfo, Error> {
    match &cfg.medium.field {
        FieldSpec::Direct { alpha } => {
            Ok(AlphaInfo { value: *alpha, source: AlphaSource::Direct, eval_s: None, estimate: None })
        }
        FieldSpec::Zero => Ok(AlphaInfo { value: 0.0, source: AlphaSource::ZeroField, eval_s: None, estimate: None }),
        _ => {
            let s = eval_s(cfg);
            let (omega, gamma) = effective_freq_atten(cfg.ensemble.params.omega0, g, delta_l, s);
            let opts = AlphaOptions {
                t_max: cfg.medium.alpha_t_max,
                n_samples: cfg.medium.alpha_samples,
                realizations: cfg.medium.realizations,
                ..AlphaOptions::default()
            };
            let est = alpha_effective(&field_model(cfg, g, delta_l), omega, gamma, &opts)?;
            Ok(AlphaInfo { value: est.alpha, source: AlphaSource::Estimated, eval_s: Some(s), estimate: Some(est) })
        }
    }
}

/// Ensemble with `gamma_s` rescaled so the collective coupling equals `g`.
fn ensemble_with_g(ens: &AtomEnsemble, g: f64) -> Result<AtomEnsemble, RunError> {
    let current = CouplingSummary::compute(ens).g;
    if current == 0.0 {
        return Err(RunError::config(
            "solver.g",
            "cannot be imposed on the direct solver when the geometry gives g = 0",
        ));
    }
    Ok(ens.with_gamma_s(ens.params().gamma_s * g / current)?)
}

pub fn simulate(cfg: &RunConfig) -> Result<SimulationOutput, RunError> {
    let mut ens = build_ensemble(cfg)?;
    let p = *ens.params();
    let solver = &cfg.solver;
    let opts = &cfg.analysis.options;

    if solver.kind == SolverKind::Direct {
        if let Some(g) = solver.g {
            ens = ensemble_with_g(&ens, g)?;
        }
        if solver.w0.is_some() {
            return Err(RunError::config("solver.w0", "applies only to the averaged solver"));
        }
    }
    let couplings = CouplingSummary::compute(&ens);
    let g = match solver.kind {
        SolverKind::Averaged => solver.g.unwrap_or(couplings.g),
        SolverKind::Direct => couplings.g,
    };
    let w0 = solver.w0.unwrap_or(4.0 * p.u0.norm_sqr());
    let u0_mag = Complex64::new(0.5 * w0.sqrt(), 0.0);

    let alpha = resolve_alpha(cfg, g, couplings.delta_l);
    let (series, meta) = match solver.kind {
        SolverKind::Averaged => {
            let alpha = alpha.as_ref().map_err(|e| RunError::Numerical(e.clone()))?;
            let params = AveragedParams { g, alpha: alpha.value, gamma1: p.gamma1, zeta: p.zeta, w0, s0: p.s0 };
            let aopts = AveragedOptions {
                dt: solver.dt,
                t_end: solver.t_end,
                output_dt: solver.output_dt,
                max_ds: solver.max_ds,
            };
            let run = integrate_averaged(&params, &aopts)?;
            let meta = SolverMeta::Averaged {
                closure: CLOSURE_LABEL,
                dt: solver.dt,
                t_end: solver.t_end,
                output_dt: solver.output_dt,
                max_ds: solver.max_ds,
                steps: run.steps,
                rejected_steps: run.rejected_steps,
                min_dt: run.min_dt,
                w0,
            };
            (run.series, meta)
        }
        SolverKind::Direct => {
            let output_every = ((solver.output_dt / solver.dt).round() as usize).max(1);
            let dopts = DirectOptions {
                retardation: solver.retardation,
                dt: solver.dt,
                t_end: solver.t_end,
                output_every,
                counter_rotating: solver.counter_rotating,
            };
            let field = field_model(cfg, g, couplings.delta_l);
            let run = integrate_direct(&ens, &field, &dopts)?;
            let meta = SolverMeta::Direct {
                retardation: solver.retardation,
                counter_rotating: solver.counter_rotating,
                dt: solver.dt,
                t_end: solver.t_end,
                output_every,
                steps: run.steps,
                max_bloch_norm: run.max_bloch_norm,
                gamma_s: ens.params().gamma_s,
            };
            (run.series, meta)
        }
    };

    let alpha_c = critical_alpha(g, u0_mag, p.s0).ok();
    let (alpha, alpha_error) = match alpha {
        Ok(a) => (Some(a), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let regime = alpha.as_ref().map(|a| classify_regime(g, a.value, alpha_c.unwrap_or(f64::INFINITY), opts));
    let (fixed_point, fixed_point_error) = match &alpha {
        Some(a) => match stationary_point(g, a.value, p.gamma1, p.zeta) {
            Ok(fp) => (Some(fp), None),
            Err(e) => (None, Some(e.to_string())),
        },
        None => (None, Some("alpha unavailable".to_string())),
    };
    let bursts = detect_bursts(&series, opts.burst_threshold)?;
    let (stationary, stationary_error) = match stationary_excitation(&series, g, opts) {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    };

    let summary = Summary {
        seed: cfg.seed,
        solver: meta,
        couplings,
        g,
        alpha,
        alpha_error,
        alpha_c,
        regime,
        fixed_point,
        fixed_point_error,
        bursts,
        stationary,
        stationary_error,
        config: cfg.to_canonical(),
    };
    Ok(SimulationOutput { series, summary })
}

pub fn write_simulation(dir: &Path, out: &SimulationOutput) -> Result<(), RunError> {
    write_text(&dir.join("timeseries.csv"), &out.csv())?;
    write_text(&dir.join("summary.json"), &out.summary_json())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub g: Option<f64>,
    pub alpha: Option<f64>,
}

/// Grid points in config order: `g` outer, `alpha` inner.
pub fn sweep_points(cfg: &RunConfig) -> Result<Vec<SweepPoint>, RunError> {
    let sw = &cfg.sweep;
    if sw.g.is_empty() && sw.alpha.is_empty() {
        return Err(RunError::config("sweep", "needs at least one of g, alpha"));
    }
    if !sw.alpha.is_empty() && cfg.solver.kind == SolverKind::Direct {
        return Err(RunError::config("sweep.alpha", "requires the averaged solver"));
    }
    let gs: Vec<Option<f64>> = if sw.g.is_empty() { vec![None] } else { sw.g.iter().copied().map(Some).collect() };
    let alphas: Vec<Option<f64>> =
        if sw.alpha.is_empty() { vec![None] } else { sw.alpha.iter().copied().map(Some).collect() };
    Ok(gs.iter().flat_map(|&g| alphas.iter().map(move |&alpha| SweepPoint { g, alpha })).collect())
}

/// Standalone configuration equivalent to one sweep point.
pub fn point_config(cfg: &RunConfig, point: SweepPoint) -> RunConfig {
    let mut c = cfg.clone();
    c.sweep = Default::default();
    if let Some(g) = point.g {
        c.solver.g = Some(g);
    }
    if let Some(alpha) = point.alpha {
        c.medium.field = FieldSpec::Direct { alpha };
    }
    c
}

pub const AGGREGATE_CSV_HEADER: &str = "g,alpha,alpha_c,regime,eta_infinity,burst_count";

fn opt_num(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.16e}")).unwrap_or_default()
}

/// One aggregate row, read entirely from a run summary.
pub fn aggregate_row(summary: &Summary) -> String {
    let regime = summary
        .regime
        .and_then(|r| serde_json::to_value(r).ok())
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default();
    format!(
        "{},{},{},{},{},{}",
        opt_num(Some(summary.g)),
        opt_num(summary.alpha.as_ref().map(|a| a.value)),
        opt_num(summary.alpha_c),
        regime,
        opt_num(summary.stationary.as_ref().map(|s| s.eta_infinity)),
        summary.bursts.burst_count
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub runs: Vec<SimulationOutput>,
    pub aggregate_csv: String,
}

pub fn run_dir_name(index: usize) -> String {
    format!("run_{index:03}")
}

/// Runs every sweep point on `jobs` worker threads (all cores when `None`).
/// Results are collected and aggregated in config order.
pub fn sweep(cfg: &RunConfig, jobs: Option<usize>) -> Result<SweepOutput, RunError> {
    let points = sweep_points(cfg)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder.build().map_err(|e| RunError::config("jobs", e.to_string()))?;
    let results: Vec<Result<SimulationOutput, RunError>> =
        pool.install(|| points.par_iter().map(|p| simulate(&point_config(cfg, *p))).collect());
    let runs = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let mut aggregate_csv = String::from(AGGREGATE_CSV_HEADER);
    aggregate_csv.push('\n');
    for r in &runs {
        aggregate_csv.push_str(&aggregate_row(&r.summary));
        aggregate_csv.push('\n');
    }
    Ok(SweepOutput { runs, aggregate_csv })
}

pub fn write_sweep(dir: &Path, out: &SweepOutput) -> Result<(), RunError> {
    for (i, run) in out.runs.iter().enumerate() {
        write_simulation(&dir.join(run_dir_name(i)), run)?;
    }
    write_text(&dir.join("aggregate.csv"), &out.aggregate_csv)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub seed: u64,
    pub g: f64,
    pub samples: usize,
    pub bursts: BurstReport,
    pub stationary: Option<StationaryReport>,
    pub stationary_error: Option<String>,
}

/// Post-processes a CSV time series using `g` and thresholds from the config.
pub fn analyze(cfg: &RunConfig, csv: &str) -> Result<AnalysisReport, RunError> {
    let series = TimeSeries::from_csv(csv)?;
    let g = match cfg.solver.g {
        Some(g) => g,
        None => CouplingSummary::compute(&build_ensemble(cfg)?).g,
    };
    let opts = &cfg.analysis.options;
    let bursts = detect_bursts(&series, opts.burst_threshold)?;
    let (stationary, stationary_error) = match stationary_excitation(&series, g, opts) {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(AnalysisReport { seed: cfg.seed, g, samples: series.len(), bursts, stationary, stationary_error })
}
