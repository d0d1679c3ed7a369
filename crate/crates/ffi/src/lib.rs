//! C ABI for the `superrad` library.
//!
//! Objects are exposed as opaque handles created by `sr_*_new`/`sr_integrate_*`
//! and released with the matching `sr_*_free`. Every fallible call returns an
//! [`SrStatus`]; on failure a description is available from
//! [`sr_last_error_message`] on the same thread.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use superrad::averaged::{integrate_averaged, stationary_point, AveragedOptions, AveragedParams, RootKind};
use superrad::config::parse_config;
use superrad::coupling::{critical_alpha, CouplingSummary};
use superrad::direct::{integrate_direct, DirectOptions, Retardation};
use superrad::ensemble::{AtomEnsemble, AtomParams, DEFAULT_R_MIN};
use superrad::field::FieldModel;
use superrad::num_complex::Complex64;
use superrad::run::{self, RunError};
use superrad::{Error, TimeSeries};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    MinimumSeparationViolated = 3,
    DegenerateInitialState = 4,
    NonpositiveGamma = 5,
    StepSizeTooLarge = 6,
    HistoryUnderflow = 7,
    NoFixedPointInGainRegime = 8,
    EmptySeries = 9,
    NotStationary = 10,
    NonFinite = 11,
    ConfigError = 12,
    IndexOutOfRange = 13,
    Panic = 14,
}

impl From<&Error> for SrStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidParameter(_) => SrStatus::InvalidParameter,
            Error::MinimumSeparationViolated { .. } => SrStatus::MinimumSeparationViolated,
            Error::DegenerateInitialState(_) => SrStatus::DegenerateInitialState,
            Error::NonpositiveGamma(_) => SrStatus::NonpositiveGamma,
            Error::StepSizeTooLarge { .. } => SrStatus::StepSizeTooLarge,
            Error::HistoryUnderflow { .. } => SrStatus::HistoryUnderflow,
            Error::NoFixedPointInGainRegime => SrStatus::NoFixedPointInGainRegime,
            Error::EmptySeries => SrStatus::EmptySeries,
            Error::NotStationary { .. } => SrStatus::NotStationary,
            Error::NonFinite(_) => SrStatus::NonFinite,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let c = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: SrStatus, msg: impl Into<String>) -> SrStatus {
    set_error(msg);
    status
}

fn fail_with(e: &Error) -> SrStatus {
    fail(SrStatus::from(e), e.to_string())
}

fn fail_run(e: &RunError) -> SrStatus {
    match e {
        RunError::Numerical(err) => fail_with(err),
        _ => fail(SrStatus::ConfigError, e.to_string()),
    }
}

fn guard(f: impl FnOnce() -> SrStatus) -> SrStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(SrStatus::Panic, "internal panic"))
}

/// Message for the most recent failure on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sr_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Per-atom parameters. Frequencies in units of the radiative width, lengths
/// as `k0 r`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SrAtomParams {
    pub omega0: f64,
    pub gamma1: f64,
    pub gamma_s: f64,
    pub u0_re: f64,
    pub u0_im: f64,
    pub s0: f64,
    pub zeta: f64,
    pub r_min: f64,
}

impl From<SrAtomParams> for AtomParams {
    fn from(p: SrAtomParams) -> Self {
        AtomParams {
            omega0: p.omega0,
            gamma1: p.gamma1,
            gamma_s: p.gamma_s,
            u0: Complex64::new(p.u0_re, p.u0_im),
            s0: p.s0,
            zeta: p.zeta,
            r_min: p.r_min,
        }
    }
}

/// Library defaults for [`SrAtomParams`].
#[no_mangle]
pub extern "C" fn sr_atom_params_default() -> SrAtomParams {
    let d = AtomParams::default();
    SrAtomParams {
        omega0: d.omega0,
        gamma1: d.gamma1,
        gamma_s: d.gamma_s,
        u0_re: d.u0.re,
        u0_im: d.u0.im,
        s0: d.s0,
        zeta: d.zeta,
        r_min: DEFAULT_R_MIN,
    }
}

/// Opaque atom ensemble.
pub struct SrEnsemble(AtomEnsemble);

/// Builds an ensemble from `n` positions stored as `x0 y0 z0 x1 ...`.
#[no_mangle]
pub unsafe extern "C" fn sr_ensemble_new(
    positions: *const f64,
    n: usize,
    params: *const SrAtomParams,
    out: *mut *mut SrEnsemble,
) -> SrStatus {
    guard(|| {
        if positions.is_null() || params.is_null() || out.is_null() {
            return fail(SrStatus::NullPointer, "null argument");
        }
        let flat = std::slice::from_raw_parts(positions, 3 * n);
        let pos = flat.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
        match AtomEnsemble::new(pos, (*params).into()) {
            Ok(e) => {
                *out = Box::into_raw(Box::new(SrEnsemble(e)));
                SrStatus::Ok
            }
            Err(e) => fail_with(&e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn sr_ensemble_free(ensemble: *mut SrEnsemble) {
    if !ensemble.is_null() {
        drop(Box::from_raw(ensemble));
    }
}

#[no_mangle]
pub unsafe extern "C" fn sr_ensemble_len(ensemble: *const SrEnsemble) -> usize {
    ensemble.as_ref().map_or(0, |e| e.0.n_atoms())
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SrCouplings {
    pub g: f64,
    pub delta_l: f64,
    pub g_relative_spread: f64,
    /// Valid only when `has_alpha_c` is nonzero.
    pub alpha_c: f64,
    pub has_alpha_c: i32,
}

#[no_mangle]
pub unsafe extern "C" fn sr_ensemble_couplings(ensemble: *const SrEnsemble, out: *mut SrCouplings) -> SrStatus {
    guard(|| {
        let (Some(e), false) = (ensemble.as_ref(), out.is_null()) else {
            return fail(SrStatus::NullPointer, "null argument");
        };
        let c = CouplingSummary::compute(&e.0);
        *out = SrCouplings {
            g: c.g,
            delta_l: c.delta_l,
            g_relative_spread: c.g_relative_spread,
            alpha_c: c.alpha_c.unwrap_or(f64::NAN),
            has_alpha_c: c.alpha_c.is_some() as i32,
        };
        SrStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn sr_critical_alpha(g: f64, u0_re: f64, u0_im: f64, s0: f64, out: *mut f64) -> SrStatus {
    guard(|| {
        if out.is_null() {
            return fail(SrStatus::NullPointer, "null argument");
        }
        match critical_alpha(g, Complex64::new(u0_re, u0_im), s0) {
            Ok(a) => {
                *out = a;
                SrStatus::Ok
            }
            Err(e) => fail_with(&e),
        }
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SrFixedPoint {
    pub s_star: f64,
    pub w_star: f64,
    pub eta_infinity: f64,
    /// 0 gain clamped, 1 field dominated, 2 incoherent.
    pub kind: i32,
    pub stable: i32,
    pub regime_mismatch: i32,
}

#[no_mangle]
pub unsafe extern "C" fn sr_stationary_point(
    g: f64,
    alpha: f64,
    gamma1: f64,
    zeta: f64,
    out: *mut SrFixedPoint,
) -> SrStatus {
    guard(|| {
        if out.is_null() {
            return fail(SrStatus::NullPointer, "null argument");
        }
        match stationary_point(g, alpha, gamma1, zeta) {
            Ok(fp) => {
                *out = SrFixedPoint {
                    s_star: fp.s_star,
                    w_star: fp.w_star,
                    eta_infinity: fp.eta_infinity,
                    kind: match fp.kind {
                        RootKind::GainClamped => 0,
                        RootKind::FieldDominated => 1,
                        RootKind::Incoherent => 2,
                    },
                    stable: fp.stable as i32,
                    regime_mismatch: fp.regime_mismatch as i32,
                };
                SrStatus::Ok
            }
            Err(e) => fail_with(&e),
        }
    })
}

/// Opaque sampled trajectory.
pub struct SrSeries(TimeSeries);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SrSample {
    pub t: f64,
    pub s_mean: f64,
    pub w_mean: f64,
    pub eta: f64,
    pub intensity: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SrAveragedParams {
    pub g: f64,
    pub alpha: f64,
    pub gamma1: f64,
    pub zeta: f64,
    pub w0: f64,
    pub s0: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SrAveragedOptions {
    pub dt: f64,
    pub t_end: f64,
    pub output_dt: f64,
    pub max_ds: f64,
}

#[no_mangle]
pub extern "C" fn sr_averaged_options_default() -> SrAveragedOptions {
    let d = AveragedOptions::default();
    SrAveragedOptions { dt: d.dt, t_end: d.t_end, output_dt: d.output_dt, max_ds: d.max_ds }
}

fn emit_series(series: TimeSeries, out: *mut *mut SrSeries) -> SrStatus {
    unsafe { *out = Box::into_raw(Box::new(SrSeries(series))) };
    SrStatus::Ok
}

#[no_mangle]
pub unsafe extern "C" fn sr_integrate_averaged(
    params: *const SrAveragedParams,
    options: *const SrAveragedOptions,
    out: *mut *mut SrSeries,
) -> SrStatus {
    guard(|| {
        if params.is_null() || options.is_null() || out.is_null() {
            return fail(SrStatus::NullPointer, "null argument");
        }
        let p = &*params;
        let o = &*options;
        let params = AveragedParams { g: p.g, alpha: p.alpha, gamma1: p.gamma1, zeta: p.zeta, w0: p.w0, s0: p.s0 };
        let opts = AveragedOptions { dt: o.dt, t_end: o.t_end, output_dt: o.output_dt, max_ds: o.max_ds };
        match integrate_averaged(&params, &opts) {
            Ok(run) => emit_series(run.series, out),
            Err(e) => fail_with(&e),
        }
    })
}

/// Field-free integration of the coupled Bloch equations.
/// `retardation`: 0 none, 1 propagation phase, 2 full delay.
#[no_mangle]
pub unsafe extern "C" fn sr_integrate_direct(
    ensemble: *const SrEnsemble,
    retardation: i32,
    dt: f64,
    t_end: f64,
    output_every: usize,
    out: *mut *mut SrSeries,
) -> SrStatus {
    guard(|| {
        let (Some(e), false) = (ensemble.as_ref(), out.is_null()) else {
            return fail(SrStatus::NullPointer, "null argument");
        };
        let retardation = match retardation {
            0 => Retardation::None,
            1 => Retardation::Phase,
            2 => Retardation::FullDde,
            r => return fail(SrStatus::InvalidParameter, format!("unknown retardation mode {r}")),
        };
        let opts = DirectOptions { retardation, dt, t_end, output_every, counter_rotating: false };
        match integrate_direct(&e.0, &FieldModel::zero(), &opts) {
            Ok(run) => emit_series(run.series, out),
            Err(e) => fail_with(&e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn sr_series_len(series: *const SrSeries) -> usize {
    series.as_ref().map_or(0, |s| s.0.len())
}

#[no_mangle]
pub unsafe extern "C" fn sr_series_sample(series: *const SrSeries, index: usize, out: *mut SrSample) -> SrStatus {
    guard(|| {
        let (Some(s), false) = (series.as_ref(), out.is_null()) else {
            return fail(SrStatus::NullPointer, "null argument");
        };
        let Some(x) = s.0.samples().get(index) else {
            return fail(SrStatus::IndexOutOfRange, format!("index {index} >= length {}", s.0.len()));
        };
        *out = SrSample { t: x.t, s_mean: x.s_mean, w_mean: x.w_mean, eta: x.eta, intensity: x.intensity };
        SrStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn sr_series_free(series: *mut SrSeries) {
    if !series.is_null() {
        drop(Box::from_raw(series));
    }
}

unsafe fn str_arg<'a>(text: *const c_char) -> Result<&'a str, SrStatus> {
    if text.is_null() {
        return Err(fail(SrStatus::NullPointer, "null argument"));
    }
    CStr::from_ptr(text).to_str().map_err(|_| fail(SrStatus::ConfigError, "configuration is not valid UTF-8"))
}

fn emit_string(s: String, out: *mut *mut c_char) -> SrStatus {
    match CString::new(s) {
        Ok(c) => {
            unsafe { *out = c.into_raw() };
            SrStatus::Ok
        }
        Err(_) => fail(SrStatus::Panic, "output contained a NUL byte"),
    }
}

/// Runs `simulate` on configuration text. On success `*summary_json` and
/// `*timeseries_csv` receive strings to be released with [`sr_string_free`].
#[no_mangle]
pub unsafe extern "C" fn sr_simulate_config(
    config_text: *const c_char,
    summary_json: *mut *mut c_char,
    timeseries_csv: *mut *mut c_char,
) -> SrStatus {
    guard(|| {
        if summary_json.is_null() || timeseries_csv.is_null() {
            return fail(SrStatus::NullPointer, "null argument");
        }
        let text = match str_arg(config_text) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let cfg = match parse_config(text) {
            Ok(c) => c,
            Err(e) => return fail(SrStatus::ConfigError, e.to_string()),
        };
        match run::simulate(&cfg) {
            Ok(sim) => {
                let st = emit_string(sim.summary_json(), summary_json);
                if st != SrStatus::Ok {
                    return st;
                }
                emit_string(sim.csv(), timeseries_csv)
            }
            Err(e) => fail_run(&e),
        }
    })
}

/// Runs `couplings` on configuration text; `*json` is released with
/// [`sr_string_free`].
#[no_mangle]
pub unsafe extern "C" fn sr_couplings_config(config_text: *const c_char, json: *mut *mut c_char) -> SrStatus {
    guard(|| {
        if json.is_null() {
            return fail(SrStatus::NullPointer, "null argument");
        }
        let text = match str_arg(config_text) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let cfg = match parse_config(text) {
            Ok(c) => c,
            Err(e) => return fail(SrStatus::ConfigError, e.to_string()),
        };
        match run::couplings(&cfg) {
            Ok(r) => emit_string(run::to_json(&r), json),
            Err(e) => fail_run(&e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn sr_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
