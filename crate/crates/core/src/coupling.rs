//! Collective coupling scalars of the impurity ensemble.
//!
//! `g_i = gamma_s * sum_{j != i} sin(k0 r_ij) / (k0 r_ij)` is the coherent
//! (dissipative) coupling and `delta_i = gamma_s * sum_{j != i} cos(k0 r_ij) / (k0 r_ij)`
//! the collective frequency shift. Both are the real and imaginary parts of
//! the same retarded kernel used by the direct solver.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ensemble::AtomEnsemble;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingSummary {
    pub g: f64,
    pub g_per_atom: Vec<f64>,
    /// `(max g_i - min g_i) / |g|`, zero for uniform sites.
    pub g_relative_spread: f64,
    pub delta_l: f64,
    pub delta_l_per_atom: Vec<f64>,
    /// Critical atom-matter coupling for the ensemble's initial state; `None`
    /// where it is undefined (`g <= 0` or `s0 = 0`).
    pub alpha_c: Option<f64>,
}

impl CouplingSummary {
    pub fn compute(ensemble: &AtomEnsemble) -> Self {
        let (g, g_per_atom) = coupling_g(ensemble);
        let (delta_l, delta_l_per_atom) = lamb_shift(ensemble);
        let p = ensemble.params();
        let alpha_c = critical_alpha(g, p.u0, p.s0).ok();
        Self { g, g_relative_spread: relative_spread(&g_per_atom, g), g_per_atom, delta_l, delta_l_per_atom, alpha_c }
    }
}

fn relative_spread(values: &[f64], mean: f64) -> f64 {
    if mean == 0.0 {
        return 0.0;
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (hi - lo) / mean.abs()
}

fn site_sums(ensemble: &AtomEnsemble, kernel: impl Fn(f64) -> f64) -> (f64, Vec<f64>) {
    let n = ensemble.n_atoms();
    let gamma_s = ensemble.params().gamma_s;
    let d = ensemble.pair_distances();
    let per_atom: Vec<f64> = (0..n)
        .map(|i| {
            let row = d.row(i);
            gamma_s * row.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &x)| kernel(x)).sum::<f64>()
        })
        .collect();
    let mean = per_atom.iter().sum::<f64>() / n as f64;
    (mean, per_atom)
}

/// Coherent coupling: (mean over sites, per-site values).
pub fn coupling_g(ensemble: &AtomEnsemble) -> (f64, Vec<f64>) {
    site_sums(ensemble, |x| x.sin() / x)
}

/// Collective shift in units of `gamma2`: (mean, per-site values).
pub fn lamb_shift(ensemble: &AtomEnsemble) -> (f64, Vec<f64>) {
    site_sums(ensemble, |x| x.cos() / x)
}

/// Effective frequency `omega0 + delta_l s` and attenuation `1 - g s`
/// (units of `gamma2`). The attenuation is negative in the gain regime.
pub fn effective_freq_atten(omega0: f64, g: f64, delta_l: f64, s: f64) -> (f64, f64) {
    (omega0 + delta_l * s, 1.0 - g * s)
}

/// Critical atom-matter coupling separating the burst and field-dominated
/// regimes: `[(1 - g s0)^2 + 4 g^2 |u0|^2] / (4 g^2 s0^2)`.
pub fn critical_alpha(g: f64, u0: Complex64, s0: f64) -> Result<f64> {
    if !(g.is_finite() && g > 0.0) {
        return Err(Error::InvalidParameter(format!("critical alpha needs g > 0, got {g}")));
    }
    if s0 == 0.0 {
        return Err(Error::DegenerateInitialState("critical alpha is singular at s0 = 0".into()));
    }
    let g2 = g * g;
    Ok(((1.0 - g * s0).powi(2) + 4.0 * g2 * u0.norm_sqr()) / (4.0 * g2 * s0 * s0))
}
