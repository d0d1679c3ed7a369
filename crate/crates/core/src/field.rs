//! Field produced by the host medium at the impurity sites and the effective
//! atom-matter coupling it induces.
//!
//! Every model returns the scalar `d* . D(t)` in units of `gamma2`. The same
//! field acts on all atoms.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathMode {
    pub frequency: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum FieldMode {
    Zero,
    /// `f0 exp(-i omega t)`.
    ConstantResonant {
        f0: Complex64,
        omega: f64,
    },
    /// Sum of modes with independent uniformly random phases.
    OscillatorBath {
        modes: Vec<BathMode>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldModel {
    pub mode: FieldMode,
    pub seed: u64,
}

impl FieldModel {
    pub fn zero() -> Self {
        Self { mode: FieldMode::Zero, seed: 0 }
    }

    pub fn constant_resonant(f0: Complex64, omega: f64) -> Self {
        Self { mode: FieldMode::ConstantResonant { f0, omega }, seed: 0 }
    }

    /// `n_modes` equally spaced modes over `[center - width/2, center + width/2]`
    /// sharing the total mean power `total_amplitude^2`.
    pub fn uniform_bath(n_modes: usize, center: f64, width: f64, total_amplitude: f64, seed: u64) -> Self {
        let amplitude = total_amplitude / (n_modes.max(1) as f64).sqrt();
        let modes = (0..n_modes)
            .map(|m| {
                let x = if n_modes > 1 { m as f64 / (n_modes - 1) as f64 - 0.5 } else { 0.0 };
                BathMode { frequency: center + width * x, amplitude }
            })
            .collect();
        Self { mode: FieldMode::OscillatorBath { modes }, seed }
    }

    /// Same model with every amplitude multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let mode = match &self.mode {
            FieldMode::Zero => FieldMode::Zero,
            FieldMode::ConstantResonant { f0, omega } => FieldMode::ConstantResonant { f0: f0 * c, omega: *omega },
            FieldMode::OscillatorBath { modes } => FieldMode::OscillatorBath {
                modes: modes.iter().map(|m| BathMode { frequency: m.frequency, amplitude: m.amplitude * c }).collect(),
            },
        };
        Self { mode, seed: self.seed }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.mode, FieldMode::Zero)
    }

    fn is_stochastic(&self) -> bool {
        matches!(self.mode, FieldMode::OscillatorBath { .. })
    }

    /// Frozen realization `index` (phases drawn from the bath sub-stream).
    pub fn realize(&self, index: u64) -> FieldRealization {
        let components = match &self.mode {
            FieldMode::Zero => Vec::new(),
            FieldMode::ConstantResonant { f0, omega } => vec![(*omega, *f0)],
            FieldMode::OscillatorBath { modes } => {
                let mut rng = stream_rng(self.seed, Stream::BathPhases, index);
                modes
                    .iter()
                    .map(|m| {
                        let phase = TAU * rng.random::<f64>();
                        (m.frequency, Complex64::from_polar(m.amplitude, -phase))
                    })
                    .collect()
            }
        };
        FieldRealization { components }
    }
}

/// Deterministic field trace: `sum_m c_m exp(-i omega_m t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldRealization {
    components: Vec<(f64, Complex64)>,
}

impl FieldRealization {
    pub fn sample(&self, t: f64) -> Complex64 {
        self.components.iter().map(|&(w, c)| c * Complex64::from_polar(1.0, -w * t)).sum()
    }

    pub fn components(&self) -> &[(f64, Complex64)] {
        &self.components
    }

    pub fn is_zero(&self) -> bool {
        self.components.is_empty()
    }
}

/// `d* . D(t)` for the first realization of `model`.
pub fn sample_field(model: &FieldModel, t: f64) -> Complex64 {
    model.realize(0).sample(t)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaEstimate {
    pub alpha: f64,
    /// Standard error over realizations (zero for deterministic fields).
    pub std_error: f64,
    pub realizations: usize,
    /// Grid size of the finer quadrature.
    pub n_samples: usize,
    /// Relative change between the last two grid doublings.
    pub relative_change: f64,
    pub converged: bool,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaOptions {
    pub t_max: f64,
    pub n_samples: usize,
    /// Realizations averaged for stochastic fields.
    pub realizations: usize,
    /// Accepted relative change under grid doubling.
    pub tolerance: f64,
    pub max_doublings: u32,
}

impl Default for AlphaOptions {
    fn default() -> Self {
        Self { t_max: 200.0, n_samples: 4001, realizations: 32, tolerance: 1e-4, max_doublings: 6 }
    }
}

/// Effective atom-matter coupling
/// `<< | e^{-Gamma t} int_0^t e^{(i Omega + Gamma) tau} d*.D(tau) dtau |^2 >>`,
/// time-averaged over `[t_max/2, t_max]` and averaged over realizations.
///
/// The cumulative integral uses the trapezoidal rule; the grid is doubled
/// until successive results agree within `tolerance`, and the two finest
/// results are Richardson-combined.
pub fn alpha_effective(model: &FieldModel, omega: f64, gamma: f64, opts: &AlphaOptions) -> Result<AlphaEstimate> {
    if !(gamma > 0.0) {
        return Err(Error::NonpositiveGamma(gamma));
    }
    if !(opts.t_max.is_finite() && opts.t_max > 0.0) {
        return Err(Error::InvalidParameter("t_max must be positive".into()));
    }
    if opts.n_samples < 100 {
        return Err(Error::InvalidParameter(format!("n_samples must be >= 100, got {}", opts.n_samples)));
    }
    let mut warnings = Vec::new();
    if gamma * opts.t_max < 20.0 {
        warnings.push(format!(
            "t_max = {} is not long compared with 1/Gamma = {}; the time average still carries the transient",
            opts.t_max,
            1.0 / gamma
        ));
    }
    if model.is_zero() {
        return Ok(AlphaEstimate {
            alpha: 0.0,
            std_error: 0.0,
            realizations: 1,
            n_samples: opts.n_samples,
            relative_change: 0.0,
            converged: true,
            warnings,
        });
    }

    let realizations = if model.is_stochastic() { opts.realizations.max(1) } else { 1 };
    let fields: Vec<FieldRealization> = (0..realizations as u64).map(|r| model.realize(r)).collect();
    let mean_over = |intervals: usize| -> (f64, Vec<f64>) {
        let vals: Vec<f64> =
            fields.par_iter().map(|f| filtered_power(f, omega, gamma, opts.t_max, intervals)).collect();
        (vals.iter().sum::<f64>() / vals.len() as f64, vals)
    };

    // even number of intervals so t_max/2 is a grid point
    let mut intervals = (opts.n_samples - 1).div_ceil(2) * 2;
    let (mut coarse, _) = mean_over(intervals);
    let mut relative_change = f64::INFINITY;
    let mut converged = false;
    let mut fine = coarse;
    let mut fine_vals = Vec::new();
    for _ in 0..=opts.max_doublings {
        intervals *= 2;
        let (m, vals) = mean_over(intervals);
        fine = m;
        fine_vals = vals;
        relative_change = if fine == 0.0 { 0.0 } else { ((fine - coarse) / fine).abs() };
        if relative_change < opts.tolerance {
            converged = true;
            break;
        }
        coarse = fine;
    }
    if !converged {
        warnings.push(format!("quadrature did not converge: relative change {relative_change:.3e}"));
    }
    let alpha = ((4.0 * fine - coarse) / 3.0).max(0.0);
    let std_error = if fine_vals.len() > 1 {
        let n = fine_vals.len() as f64;
        let var = fine_vals.iter().map(|v| (v - fine).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    Ok(AlphaEstimate { alpha, std_error, realizations, n_samples: intervals + 1, relative_change, converged, warnings })
}

/// Time-averaged `|y(t)|^2` for one realization on a grid of `intervals` steps.
fn filtered_power(field: &FieldRealization, omega: f64, gamma: f64, t_max: f64, intervals: usize) -> f64 {
    let h = t_max / intervals as f64;
    let decay = (-gamma * h).exp();
    let half = intervals / 2;
    let integrand = |t: f64| Complex64::from_polar(1.0, omega * t) * field.sample(t);

    let mut y = Complex64::new(0.0, 0.0);
    let mut f_prev = integrand(0.0);
    let mut acc = 0.0;
    for k in 1..=intervals {
        let f_next = integrand(k as f64 * h);
        y = decay * y + 0.5 * h * (decay * f_prev + f_next);
        f_prev = f_next;
        if k >= half {
            let w = if k == half || k == intervals { 0.5 } else { 1.0 };
            acc += w * y.norm_sqr();
        }
    }
    acc / (intervals - half) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_field() {
        assert_eq!(sample_field(&FieldModel::zero(), 3.0), Complex64::new(0.0, 0.0));
        let a = alpha_effective(&FieldModel::zero(), 10.0, 1.0, &AlphaOptions::default()).unwrap();
        assert_eq!(a.alpha, 0.0);
    }

    #[test]
    fn constant_drive_is_a_phasor() {
        let f0 = Complex64::new(0.3, -0.2);
        let m = FieldModel::constant_resonant(f0, 7.0);
        for t in [0.0, 0.5, 13.0] {
            let expected = f0 * Complex64::new(0.0, -7.0 * t).exp();
            assert!((sample_field(&m, t) - expected).norm() < 1e-15);
        }
    }

    #[test]
    fn bath_is_reproducible() {
        let m = FieldModel::uniform_bath(64, 100.0, 4.0, 0.1, 11);
        assert_eq!(sample_field(&m, 2.5), sample_field(&m, 2.5));
        let other = FieldModel { seed: 12, ..m.clone() };
        assert_ne!(sample_field(&m, 2.5), sample_field(&other, 2.5));
    }

    #[test]
    fn requires_positive_gamma() {
        let m = FieldModel::constant_resonant(Complex64::new(1.0, 0.0), 1.0);
        let o = AlphaOptions::default();
        assert!(matches!(alpha_effective(&m, 1.0, 0.0, &o), Err(Error::NonpositiveGamma(_))));
        assert!(matches!(alpha_effective(&m, 1.0, -2.0, &o), Err(Error::NonpositiveGamma(_))));
        let few = AlphaOptions { n_samples: 10, ..o };
        assert!(matches!(alpha_effective(&m, 1.0, 1.0, &few), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn short_window_warns() {
        let m = FieldModel::constant_resonant(Complex64::new(1.0, 0.0), 1.0);
        let o = AlphaOptions { t_max: 5.0, ..AlphaOptions::default() };
        let a = alpha_effective(&m, 1.0, 1.0, &o).unwrap();
        assert!(!a.warnings.is_empty());
    }

    #[test]
    fn resonant_drive_closed_form() {
        // y(t) = f0 (1 - e^{-G t}) / G exactly; average |y|^2 over [T/2, T].
        let f0 = Complex64::new(0.6, 0.8);
        let (gamma, t_max, omega) = (1.0f64, 40.0f64, 25.0);
        let m = FieldModel::constant_resonant(f0, omega);
        let opts = AlphaOptions { t_max, n_samples: 2001, ..AlphaOptions::default() };
        let a = alpha_effective(&m, omega, gamma, &opts).unwrap();
        let (t0, t1) = (t_max / 2.0, t_max);
        let prim = |t: f64| t + 2.0 * (-gamma * t).exp() / gamma - (-2.0 * gamma * t).exp() / (2.0 * gamma);
        let exact = f0.norm_sqr() / (gamma * gamma) * (prim(t1) - prim(t0)) / (t1 - t0);
        assert!(((a.alpha - exact) / exact).abs() < 1e-6, "{} vs {}", a.alpha, exact);
        assert!(((a.alpha - 1.0) / 1.0).abs() < 1e-6);
        assert!(a.converged);
    }

    #[test]
    fn quadratic_scaling() {
        let m = FieldModel::uniform_bath(16, 50.0, 2.0, 0.2, 5);
        let opts = AlphaOptions { t_max: 60.0, n_samples: 1001, realizations: 4, ..AlphaOptions::default() };
        let a = alpha_effective(&m, 50.0, 0.5, &opts).unwrap().alpha;
        let b = alpha_effective(&m.scaled(3.0), 50.0, 0.5, &opts).unwrap().alpha;
        assert!(a > 0.0);
        assert!(((b - 9.0 * a) / (9.0 * a)).abs() < 1e-10);
    }
}
