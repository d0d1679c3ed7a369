//! Slow-variable (scale-separated) dynamics.
//!
//! The fast optical phase is averaged out, leaving the coherence intensity
//! `w` and the mean inversion `s`:
//!
//! ```text
//! dw/dt = -2 (1 - g s) w + 2 alpha s^2
//! ds/dt = -g w - alpha s - gamma1 (s - zeta)
//! ```
//!
//! This is a closure, not a derivation: the linear gain is exactly the
//! effective attenuation `1 - g s`, `alpha` enters through the lowest-order
//! source and drain terms, and for `alpha -> 0` the nontrivial fixed point
//! sits at `s = 1/g`. The pair conserves `w + s^2` up to the `-2 w` decay and
//! the `gamma1` relaxation, so `w` is normalized like `4 |u|^2` of the direct
//! solver.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coupling::critical_alpha;
use crate::error::{Error, Result};
use crate::ode::Rk4;
use crate::series::{excitation, Sample, TimeSeries};

pub const CLOSURE_LABEL: &str = "dw/dt = -2(1 - g s) w + 2 alpha s^2; ds/dt = -g w - alpha s - gamma1 (s - zeta)";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AveragedParams {
    pub g: f64,
    pub alpha: f64,
    pub gamma1: f64,
    pub zeta: f64,
    pub w0: f64,
    pub s0: f64,
}

impl AveragedParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !self.g.is_finite() {
            return bad("g must be finite".into());
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return bad(format!("alpha must be >= 0, got {}", self.alpha));
        }
        if !(self.gamma1.is_finite() && self.gamma1 >= 0.0) {
            return bad(format!("gamma1 must be >= 0, got {}", self.gamma1));
        }
        if !(-1.0..=1.0).contains(&self.zeta) {
            return bad(format!("zeta = {} out of [-1, 1]", self.zeta));
        }
        if !(self.w0.is_finite() && self.w0 >= 0.0) {
            return bad(format!("w0 must be >= 0, got {}", self.w0));
        }
        if !(-1.0..=1.0).contains(&self.s0) {
            return bad(format!("s0 = {} out of [-1, 1]", self.s0));
        }
        Ok(())
    }

    /// Right-hand side `(dw/dt, ds/dt)`.
    pub fn rhs(&self, w: f64, s: f64) -> (f64, f64) {
        let dw = -2.0 * (1.0 - self.g * s) * w + 2.0 * self.alpha * s * s;
        let ds = -self.g * w - self.alpha * s - self.gamma1 * (s - self.zeta);
        (dw, ds)
    }

    pub fn jacobian(&self, w: f64, s: f64) -> [[f64; 2]; 2] {
        [[-2.0 * (1.0 - self.g * s), 2.0 * self.g * w + 4.0 * self.alpha * s], [-self.g, -self.alpha - self.gamma1]]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AveragedOptions {
    /// Largest step; halved while a step changes `s` by more than `max_ds`.
    pub dt: f64,
    pub t_end: f64,
    /// Spacing of recorded samples.
    pub output_dt: f64,
    pub max_ds: f64,
}

impl Default for AveragedOptions {
    fn default() -> Self {
        Self { dt: 0.01, t_end: 1e4, output_dt: 0.05, max_ds: 0.01 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AveragedRun {
    pub series: TimeSeries,
    pub steps: usize,
    pub rejected_steps: usize,
    pub min_dt: f64,
}

const MAX_HALVINGS: u32 = 40;

pub fn integrate_averaged(params: &AveragedParams, opts: &AveragedOptions) -> Result<AveragedRun> {
    params.validate()?;
    for (name, v) in [("dt", opts.dt), ("t_end", opts.t_end), ("output_dt", opts.output_dt), ("max_ds", opts.max_ds)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
        }
    }
    let n_out = (opts.t_end / opts.output_dt).round().max(1.0) as usize;
    let sample = |t: f64, y: &[f64; 2]| Sample::new(t, y[1], y[0], y[0], params.g * y[0]);

    let mut series = TimeSeries::with_capacity(n_out + 1);
    let mut y = [params.w0, params.s0];
    let mut trial = [0.0; 2];
    let mut rk = Rk4::new(2);
    let rhs = |_: f64, y: &[f64], dy: &mut [f64]| {
        let (dw, ds) = params.rhs(y[0], y[1]);
        dy[0] = dw;
        dy[1] = ds;
    };
    let dt_floor = opts.dt / 2f64.powi(MAX_HALVINGS as i32);
    let (mut steps, mut rejected) = (0usize, 0usize);
    let mut h_cur = opts.dt;
    let mut min_dt = opts.dt;
    let mut t = 0.0;
    series.push(sample(0.0, &y));

    for k in 1..=n_out {
        let t_out = k as f64 * opts.output_dt;
        while t < t_out {
            let h = h_cur.min(t_out - t);
            trial.copy_from_slice(&y);
            rk.step(t, &mut trial, h, rhs);
            let ds = (trial[1] - y[1]).abs();
            if !(ds <= opts.max_ds) && h > dt_floor {
                h_cur = 0.5 * h;
                rejected += 1;
                continue;
            }
            if !(trial[0].is_finite() && trial[1].is_finite()) {
                return Err(Error::NonFinite(t + h));
            }
            y = trial;
            min_dt = min_dt.min(h);
            steps += 1;
            // snap onto the output time to avoid a sliver step
            t = if t_out - (t + h) <= 1e-12 * t_out { t_out } else { t + h };
            if ds < 0.25 * opts.max_ds {
                h_cur = (2.0 * h_cur).min(opts.dt);
            }
        }
        series.push(sample(t_out, &y));
    }
    Ok(AveragedRun { series, steps, rejected_steps: rejected, min_dt })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RootKind {
    /// Gain clamped near `s = 1/g`.
    GainClamped,
    /// `alpha` beyond its critical value: the medium field sets the state.
    FieldDominated,
    /// No coherence: `w = 0`, `s = zeta` (only possible for `alpha = 0`).
    Incoherent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub s_star: f64,
    pub w_star: f64,
    pub eta_infinity: f64,
    pub kind: RootKind,
    /// Critical coupling for an initial state `u0 = 0, s0 = zeta`.
    pub alpha_c: Option<f64>,
    /// `alpha` exceeds `alpha_c`: the burst picture does not apply.
    pub regime_mismatch: bool,
    pub eigenvalues: [Complex64; 2],
    pub stable: bool,
}

/// Nontrivial fixed point of the averaged equations for `g > 1`.
///
/// For `alpha > 0` the stationary `w = alpha s^2 / (1 - g s)` is substituted
/// into the `s` equation and the resulting scalar function is bracketed on
/// `[-1, 1/g]` and bisected.
pub fn stationary_point(g: f64, alpha: f64, gamma1: f64, zeta: f64) -> Result<FixedPoint> {
    if !(g.is_finite() && g > 1.0) {
        return Err(Error::InvalidParameter(format!("stationary point requires g > 1, got {g}")));
    }
    let params = AveragedParams { g, alpha, gamma1, zeta, w0: 0.0, s0: zeta };
    params.validate()?;
    let s_clamp = 1.0 / g;

    let (s_star, w_star, kind) = if alpha == 0.0 {
        if gamma1 > 0.0 && zeta > s_clamp {
            (s_clamp, gamma1 * (zeta - s_clamp) / g, RootKind::GainClamped)
        } else if gamma1 > 0.0 {
            (zeta, 0.0, RootKind::Incoherent)
        } else {
            return Err(Error::NoFixedPointInGainRegime);
        }
    } else {
        let f = |s: f64| {
            let w = alpha * s * s / (1.0 - g * s);
            -g * w - alpha * s - gamma1 * (s - zeta)
        };
        // f(-1) > 0 > f(s -> 1/g^-): w diverges to +inf at the clamp.
        let (mut lo, mut hi) = (-1.0f64, s_clamp);
        if !(f(lo) > 0.0) {
            return Err(Error::NoFixedPointInGainRegime);
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let s = if f(hi).abs() < f(lo).abs() && hi < s_clamp { hi } else { lo };
        let w = alpha * s * s / (1.0 - g * s);
        if !(w >= 0.0 && w.is_finite()) {
            return Err(Error::NoFixedPointInGainRegime);
        }
        (s, w, RootKind::GainClamped)
    };

    let alpha_c = critical_alpha(g, Complex64::new(0.0, 0.0), zeta).ok();
    let regime_mismatch = alpha_c.is_some_and(|ac| alpha > ac);
    let kind = if regime_mismatch && kind == RootKind::GainClamped { RootKind::FieldDominated } else { kind };
    let eigenvalues = eigenvalues_2x2(params.jacobian(w_star, s_star));
    let stable = eigenvalues.iter().all(|l| l.re <= 1e-12);
    Ok(FixedPoint {
        s_star,
        w_star,
        eta_infinity: excitation(s_star),
        kind,
        alpha_c,
        regime_mismatch,
        eigenvalues,
        stable,
    })
}

fn eigenvalues_2x2(m: [[f64; 2]; 2]) -> [Complex64; 2] {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = Complex64::new(0.25 * tr * tr - det, 0.0).sqrt();
    [0.5 * tr + disc, 0.5 * tr - disc]
}
