//! Impurity-atom configurations.
//!
//! Positions are dimensionless: every coordinate is `k0 * r`. Frequencies and
//! rates are in units of the transverse rate `gamma2`, and the dipole strength
//! enters only through `gamma_s = k0^3 d0^2 / gamma2`.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};

pub const DEFAULT_R_MIN: f64 = 1e-3;

/// Spatial arrangement of the impurity atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Geometry {
    /// `n` atoms on the x axis starting at the origin.
    Chain {
        n: usize,
        spacing: f64,
    },
    /// Simple cubic block of `n_side^3` atoms.
    Cubic {
        n_side: usize,
        spacing: f64,
    },
    /// `n` atoms uniform in a ball; positions depend only on the seed.
    RandomSphere {
        n: usize,
        radius: f64,
    },
    Explicit {
        positions: Vec<[f64; 3]>,
    },
}

/// Transition parameters and initial Bloch data shared by all atoms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomParams {
    pub omega0: f64,
    pub gamma1: f64,
    pub gamma_s: f64,
    pub u0: Complex64,
    pub s0: f64,
    pub zeta: f64,
    pub r_min: f64,
}

impl Default for AtomParams {
    fn default() -> Self {
        Self {
            omega0: 100.0,
            gamma1: 1e-3,
            gamma_s: 1.0,
            u0: Complex64::new(0.0, 0.0),
            s0: 1.0,
            zeta: 1.0,
            r_min: DEFAULT_R_MIN,
        }
    }
}

impl AtomParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.omega0.is_finite() && self.omega0 > 0.0) {
            return bad(format!("omega0 must be positive, got {}", self.omega0));
        }
        if !(self.gamma1.is_finite() && self.gamma1 >= 0.0) {
            return bad(format!("gamma1 must be >= 0, got {}", self.gamma1));
        }
        if !self.gamma_s.is_finite() {
            return bad("gamma_s must be finite".into());
        }
        if !(self.u0.re.is_finite() && self.u0.im.is_finite()) {
            return bad("u0 must be finite".into());
        }
        if !(-1.0..=1.0).contains(&self.s0) {
            return bad(format!("s0 = {} out of [-1, 1]", self.s0));
        }
        if 4.0 * self.u0.norm_sqr() + self.s0 * self.s0 > 1.0 + 1e-12 {
            return bad("initial state lies outside the Bloch sphere (4|u0|^2 + s0^2 > 1)".into());
        }
        if !(-1.0..=1.0).contains(&self.zeta) {
            return bad(format!("zeta = {} out of [-1, 1]", self.zeta));
        }
        if !(self.r_min.is_finite() && self.r_min > 0.0) {
            return bad(format!("r_min must be positive, got {}", self.r_min));
        }
        Ok(())
    }
}

/// Validated set of identical impurity atoms. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomEnsemble {
    positions: Vec<[f64; 3]>,
    params: AtomParams,
}

impl AtomEnsemble {
    /// Validates positions and parameters.
    pub fn new(positions: Vec<[f64; 3]>, params: AtomParams) -> Result<Self> {
        params.validate()?;
        if positions.is_empty() {
            return Err(Error::InvalidParameter("ensemble needs at least one atom".into()));
        }
        if positions.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("positions must be finite".into()));
        }
        for i in 0..positions.len() {
            for j in (i + 1)..positions.len() {
                let d = distance(&positions[i], &positions[j]);
                if d < params.r_min {
                    return Err(Error::MinimumSeparationViolated { i, j, distance: d, r_min: params.r_min });
                }
            }
        }
        Ok(Self { positions, params })
    }

    pub fn positions(&self) -> &[[f64; 3]] {
        &self.positions
    }

    pub fn params(&self) -> &AtomParams {
        &self.params
    }

    pub fn n_atoms(&self) -> usize {
        self.positions.len()
    }

    /// Same geometry with a different dipole strength.
    pub fn with_gamma_s(&self, gamma_s: f64) -> Result<Self> {
        let params = AtomParams { gamma_s, ..self.params };
        params.validate()?;
        Ok(Self { positions: self.positions.clone(), params })
    }

    pub fn with_params(&self, params: AtomParams) -> Result<Self> {
        Self::new(self.positions.clone(), params)
    }

    /// Atoms reordered so that new atom `k` is old atom `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n_atoms() {
            return Err(Error::InvalidParameter("permutation length mismatch".into()));
        }
        let mut seen = vec![false; perm.len()];
        for &p in perm {
            if p >= perm.len() || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidParameter("not a permutation".into()));
            }
        }
        let positions = perm.iter().map(|&p| self.positions[p]).collect();
        Ok(Self { positions, params: self.params })
    }

    /// Dense symmetric matrix of pairwise `k0 r_ij`.
    pub fn pair_distances(&self) -> DistanceMatrix {
        let n = self.n_atoms();
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = distance(&self.positions[i], &self.positions[j]);
                data[i * n + j] = d;
                data[j * n + i] = d;
            }
        }
        DistanceMatrix { n, data }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// Smallest off-diagonal entry, `None` for a single atom.
    pub fn min_offdiag(&self) -> Option<f64> {
        let mut best: Option<f64> = None;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let d = self.get(i, j);
                best = Some(best.map_or(d, |b| b.min(d)));
            }
        }
        best
    }
}

fn distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

const MAX_PLACEMENT_ATTEMPTS: usize = 100_000;

/// Builds an ensemble of the requested shape. `seed` is only consumed by
/// [`Geometry::RandomSphere`].
pub fn build_geometry(geometry: &Geometry, params: AtomParams, seed: u64) -> Result<AtomEnsemble> {
    let positive = |name: &str, v: f64| {
        if v.is_finite() && v > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
        }
    };
    let at_least_one = |n: usize| {
        if n >= 1 {
            Ok(())
        } else {
            Err(Error::InvalidParameter("number of atoms must be >= 1".into()))
        }
    };

    let positions = match geometry {
        Geometry::Chain { n, spacing } => {
            at_least_one(*n)?;
            positive("spacing", *spacing)?;
            (0..*n).map(|k| [k as f64 * spacing, 0.0, 0.0]).collect()
        }
        Geometry::Cubic { n_side, spacing } => {
            at_least_one(*n_side)?;
            positive("spacing", *spacing)?;
            let m = *n_side;
            let mut out = Vec::with_capacity(m * m * m);
            for x in 0..m {
                for y in 0..m {
                    for z in 0..m {
                        out.push([x as f64 * spacing, y as f64 * spacing, z as f64 * spacing]);
                    }
                }
            }
            out
        }
        Geometry::RandomSphere { n, radius } => {
            at_least_one(*n)?;
            positive("radius", *radius)?;
            params.validate()?;
            random_ball(*n, *radius, params.r_min, seed)?
        }
        Geometry::Explicit { positions } => positions.clone(),
    };
    AtomEnsemble::new(positions, params)
}

fn random_ball(n: usize, radius: f64, r_min: f64, seed: u64) -> Result<Vec<[f64; 3]>> {
    let mut rng = stream_rng(seed, Stream::Geometry, 0);
    let mut out: Vec<[f64; 3]> = Vec::with_capacity(n);
    let mut attempts = 0;
    while out.len() < n {
        attempts += 1;
        if attempts > MAX_PLACEMENT_ATTEMPTS {
            return Err(Error::InvalidParameter(format!(
                "could not place {n} atoms in a ball of radius {radius} with separation >= {r_min}"
            )));
        }
        let p = [
            radius * (2.0 * rng.random::<f64>() - 1.0),
            radius * (2.0 * rng.random::<f64>() - 1.0),
            radius * (2.0 * rng.random::<f64>() - 1.0),
        ];
        if p.iter().map(|x| x * x).sum::<f64>() > radius * radius {
            continue;
        }
        if out.iter().all(|q| distance(&p, q) >= r_min) {
            out.push(p);
        }
    }
    Ok(out)
}
