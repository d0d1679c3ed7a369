//! Polariton dispersion of the host medium.
//!
//! The photon branch `c k` couples to an optical matter branch `omega_m(k)`
//! with strength `omega_p`. Per wave number the squared polariton
//! frequencies are the eigenvalues of
//!
//! ```text
//! | c^2 k^2        omega_p c k            |
//! | omega_p c k    omega_m(k)^2 + omega_p^2 |
//! ```
//!
//! For a flat branch this opens the gap `(omega_T, sqrt(omega_T^2 + omega_p^2))`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_EDGE_TOL: f64 = 1e-6;

/// Model optical branch of the medium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OpticalBranch {
    Flat,
    /// `omega_T + width * (1 - cos(k a))`, `width >= 0`.
    Cosine {
        width: f64,
        lattice: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MediumModel {
    pub omega_t: f64,
    pub branch: OpticalBranch,
    /// Plasma-frequency analogue `omega_p`.
    pub coupling_strength: f64,
    /// Speed of light in the chosen units, so the photon branch is `c k`.
    pub light_speed: f64,
}

impl MediumModel {
    pub fn flat(omega_t: f64, coupling_strength: f64) -> Self {
        Self { omega_t, branch: OpticalBranch::Flat, coupling_strength, light_speed: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_t.is_finite() && self.omega_t > 0.0) {
            return Err(Error::InvalidParameter(format!("omega_t must be positive, got {}", self.omega_t)));
        }
        if !(self.coupling_strength.is_finite() && self.coupling_strength >= 0.0) {
            return Err(Error::InvalidParameter("coupling_strength must be >= 0".into()));
        }
        if !(self.light_speed.is_finite() && self.light_speed > 0.0) {
            return Err(Error::InvalidParameter("light_speed must be positive".into()));
        }
        if let OpticalBranch::Cosine { width, lattice } = self.branch {
            if !(width.is_finite() && width >= 0.0 && lattice.is_finite() && lattice > 0.0) {
                return Err(Error::InvalidParameter("cosine branch needs width >= 0 and lattice > 0".into()));
            }
        }
        Ok(())
    }

    pub fn matter_frequency(&self, k: f64) -> f64 {
        match self.branch {
            OpticalBranch::Flat => self.omega_t,
            OpticalBranch::Cosine { width, lattice } => self.omega_t + width * (1.0 - (k * lattice).cos()),
        }
    }

    /// Supremum of the matter branch over all wave numbers.
    pub fn matter_max(&self) -> f64 {
        match self.branch {
            OpticalBranch::Flat => self.omega_t,
            OpticalBranch::Cosine { width, .. } => self.omega_t + 2.0 * width,
        }
    }

    /// Polariton pair `(omega_minus, omega_plus)` at wave number `k`.
    pub fn polariton_pair(&self, k: f64) -> (f64, f64) {
        let ck = self.light_speed * k;
        let wm = self.matter_frequency(k);
        let wp2 = self.coupling_strength * self.coupling_strength;
        let a = ck * ck;
        let d = wm * wm + wp2;
        let trace = a + d;
        let det = a * wm * wm;
        let disc = ((a - d) * (a - d) + 4.0 * wp2 * a).sqrt();
        let upper = 0.5 * (trace + disc);
        let lower = if upper > 0.0 { det / upper } else { 0.0 };
        (lower.sqrt(), upper.sqrt())
    }
}

/// Sampled polariton branches plus the gap of the underlying model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolaritonBands {
    pub k: Vec<f64>,
    pub omega_minus: Vec<f64>,
    pub omega_plus: Vec<f64>,
    pub gap_low: f64,
    pub gap_high: f64,
}

impl PolaritonBands {
    /// Zero when the bands overlap.
    pub fn gap_width(&self) -> f64 {
        (self.gap_high - self.gap_low).max(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrequencyClass {
    InGap,
    InLowerContinuum,
    InUpperContinuum,
    AtEdge,
}

fn check_grid(k_grid: &[f64]) -> Result<()> {
    if k_grid.is_empty() {
        return Err(Error::InvalidParameter("k grid is empty".into()));
    }
    if k_grid.iter().any(|k| !k.is_finite() || *k < 0.0) {
        return Err(Error::InvalidParameter("k grid must be finite and nonnegative".into()));
    }
    Ok(())
}

/// Matter branch sampled on `k_grid`.
pub fn matter_branch(model: &MediumModel, k_grid: &[f64]) -> Result<Vec<f64>> {
    model.validate()?;
    check_grid(k_grid)?;
    Ok(k_grid.iter().map(|&k| model.matter_frequency(k)).collect())
}

pub fn polariton_branches(model: &MediumModel, k_grid: &[f64]) -> Result<PolaritonBands> {
    model.validate()?;
    check_grid(k_grid)?;
    let (omega_minus, omega_plus) = k_grid.iter().map(|&k| model.polariton_pair(k)).unzip();
    // The lower branch saturates at the top of the matter branch; the upper
    // branch is bounded below by its k = 0 value.
    let gap_low = model.matter_max();
    let gap_high = (model.omega_t * model.omega_t + model.coupling_strength * model.coupling_strength).sqrt();
    Ok(PolaritonBands { k: k_grid.to_vec(), omega_minus, omega_plus, gap_low, gap_high })
}

/// Places `omega0` relative to the gap; within `edge_tol` (relative) of an
/// edge counts as `AtEdge`.
pub fn classify_frequency(bands: &PolaritonBands, omega0: f64, edge_tol: f64) -> FrequencyClass {
    let near = |edge: f64| (omega0 - edge).abs() <= edge_tol * edge.abs().max(f64::MIN_POSITIVE);
    if near(bands.gap_low) || near(bands.gap_high) {
        FrequencyClass::AtEdge
    } else if omega0 < bands.gap_low {
        FrequencyClass::InLowerContinuum
    } else if omega0 > bands.gap_high {
        FrequencyClass::InUpperContinuum
    } else {
        FrequencyClass::InGap
    }
}

/// Uniform grid `0, dk, ..., k_max`.
pub fn uniform_grid(k_max: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        n => (0..n).map(|i| k_max * i as f64 / (n - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cosine(omega_t: f64, wp: f64) -> MediumModel {
        MediumModel {
            omega_t,
            branch: OpticalBranch::Cosine { width: 0.5, lattice: 0.3 },
            coupling_strength: wp,
            light_speed: 1.0,
        }
    }

    #[test]
    fn flat_and_cosine_branch_values() {
        let grid = uniform_grid(50.0, 11);
        let flat = matter_branch(&MediumModel::flat(100.0, 20.0), &grid).unwrap();
        assert!(flat.iter().all(|&w| w == 100.0));
        let c = matter_branch(&cosine(100.0, 20.0), &[0.0]).unwrap();
        assert_eq!(c, vec![100.0]);
    }

    #[test]
    fn empty_grid_rejected() {
        assert!(matches!(matter_branch(&MediumModel::flat(1.0, 0.0), &[]), Err(Error::InvalidParameter(_))));
        assert!(polariton_branches(&MediumModel::flat(1.0, 0.0), &[-1.0]).is_err());
    }

    #[test]
    fn decoupled_limit() {
        let grid = uniform_grid(300.0, 301);
        let m = MediumModel::flat(100.0, 0.0);
        let b = polariton_branches(&m, &grid).unwrap();
        for (i, &k) in grid.iter().enumerate() {
            let (lo, hi) = if k < 100.0 { (k, 100.0) } else { (100.0, k) };
            assert!((b.omega_minus[i] - lo).abs() < 1e-12, "k={k}");
            assert!((b.omega_plus[i] - hi).abs() < 1e-12, "k={k}");
        }
        assert_eq!(b.gap_width(), 0.0);
    }

    #[test]
    fn flat_gap_edges() {
        let b = polariton_branches(&MediumModel::flat(100.0, 20.0), &uniform_grid(500.0, 101)).unwrap();
        assert_eq!(b.gap_low, 100.0);
        assert!((b.gap_high - 10400f64.sqrt()).abs() < 1e-12);
        assert!((b.gap_high - 101.980).abs() < 1e-3);
    }

    #[test]
    fn classification() {
        let b = polariton_branches(&MediumModel::flat(100.0, 20.0), &[0.0]).unwrap();
        let mid = 0.5 * (b.gap_low + b.gap_high);
        assert_eq!(classify_frequency(&b, mid, DEFAULT_EDGE_TOL), FrequencyClass::InGap);
        assert_eq!(
            classify_frequency(&b, b.gap_low * (1.0 - 1e-3), DEFAULT_EDGE_TOL),
            FrequencyClass::InLowerContinuum
        );
        assert_eq!(classify_frequency(&b, b.gap_high, DEFAULT_EDGE_TOL), FrequencyClass::AtEdge);
        assert_eq!(classify_frequency(&b, 200.0, DEFAULT_EDGE_TOL), FrequencyClass::InUpperContinuum);
    }

    #[test]
    fn level_repulsion_cosine() {
        let m = cosine(10.0, 3.0);
        let grid = uniform_grid(40.0, 400);
        let b = polariton_branches(&m, &grid).unwrap();
        for (i, &k) in grid.iter().enumerate() {
            let wm = m.matter_frequency(k);
            assert!(b.omega_minus[i] <= k.min(wm) + 1e-12);
            assert!(b.omega_plus[i] >= k.max(wm) - 1e-12);
        }
    }

    #[test]
    fn branch_is_even() {
        let m = cosine(10.0, 3.0);
        for k in [0.1, 1.7, 22.0] {
            assert_eq!(m.matter_frequency(k), m.matter_frequency(-k));
        }
    }
}
