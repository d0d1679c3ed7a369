//! Semiclassical retarded Bloch dynamics of the impurity ensemble.
//!
//! In the frame rotating at `omega0`, with `u_i = <sigma_i^->` and
//! `s_i = <sigma_i^z>` (time in `1/gamma2`):
//!
//! ```text
//! du_i/dt = -u_i + s_i E_i
//! ds_i/dt = -gamma1 (s_i - zeta) - 4 Re[u_i^* E_i]
//! E_i     = f(t) + sum_{j != i} K_ij u_j(t - tau_ij)
//! K_ij    = -i gamma_s exp(i k0 r_ij) / (k0 r_ij)
//! ```
//!
//! `Re K_ij` is the sinc kernel of `g` and `-Im K_ij` the cosine kernel of the
//! collective shift, so a uniform mode `u_j = u` sees `s (g - i delta) u`,
//! i.e. gain `1 - g s` and frequency shift `delta s`. See `docs/equations.md`
//! for the factorization and the factor 4.

use std::collections::VecDeque;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ensemble::AtomEnsemble;
use crate::error::{Error, Result};
use crate::field::{FieldModel, FieldRealization};
use crate::ode::Rk4;
use crate::series::{Sample, TimeSeries};

/// Tolerated growth of `4|u_i|^2 + s_i^2` beyond its initial bound.
pub const BLOCH_SLACK: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Retardation {
    /// Instantaneous `1/r` coupling without the optical phase.
    None,
    /// Optical phase `exp(i k0 r)` kept, envelopes taken at equal times.
    #[default]
    Phase,
    /// Envelopes evaluated at the retarded time from a history buffer.
    FullDde,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectOptions {
    pub retardation: Retardation,
    pub dt: f64,
    pub t_end: f64,
    /// Record every `output_every`-th step (the final step is always kept).
    pub output_every: usize,
    /// Keep the fast counter-rotating pair terms (full DDE only).
    pub counter_rotating: bool,
}

impl Default for DirectOptions {
    fn default() -> Self {
        Self { retardation: Retardation::Phase, dt: 1e-3, t_end: 10.0, output_every: 10, counter_rotating: false }
    }
}

/// Per-atom Bloch data at one time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlochState {
    pub t: f64,
    pub u: Vec<Complex64>,
    pub s: Vec<f64>,
}

impl BlochState {
    fn from_flat(t: f64, y: &[f64]) -> Self {
        let u = y.chunks_exact(3).map(|c| Complex64::new(c[0], c[1])).collect();
        let s = y.chunks_exact(3).map(|c| c[2]).collect();
        Self { t, u, s }
    }

    /// Largest `4|u_i|^2 + s_i^2` over atoms.
    pub fn max_bloch_norm(&self) -> f64 {
        self.u.iter().zip(&self.s).map(|(u, s)| 4.0 * u.norm_sqr() + s * s).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectRun {
    pub series: TimeSeries,
    pub final_state: BlochState,
    /// Maximum of `4|u_i|^2 + s_i^2` over all steps and atoms.
    pub max_bloch_norm: f64,
    pub steps: usize,
}

struct Pair {
    j: usize,
    kernel: Complex64,
    delay: f64,
}

/// Retarded neighbour list per atom.
fn pair_table(ensemble: &AtomEnsemble, retardation: Retardation) -> Vec<Vec<Pair>> {
    let n = ensemble.n_atoms();
    let p = ensemble.params();
    let d = ensemble.pair_distances();
    (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let kr = d.get(i, j);
                    let phase = match retardation {
                        Retardation::None => Complex64::new(1.0, 0.0),
                        Retardation::Phase | Retardation::FullDde => Complex64::from_polar(1.0, kr),
                    };
                    Pair { j, kernel: Complex64::new(0.0, -p.gamma_s / kr) * phase, delay: kr / p.omega0 }
                })
                .collect()
        })
        .collect()
}

/// Uniform-grid history of the envelopes, constant `u0` before `t = 0`.
struct History {
    dt: f64,
    first: usize,
    frames: VecDeque<Vec<Complex64>>,
    capacity: usize,
    initial: Complex64,
}

impl History {
    fn new(dt: f64, max_delay: f64, initial: Complex64) -> Self {
        let capacity = (max_delay / dt).ceil() as usize + 8;
        Self { dt, first: 0, frames: VecDeque::with_capacity(capacity), capacity, initial }
    }

    fn push(&mut self, frame: Vec<Complex64>) {
        if self.frames.len() == self.capacity {
            self.frames.pop_front();
            self.first += 1;
        }
        self.frames.push_back(frame);
    }

    fn node(&self, k: isize, j: usize) -> Complex64 {
        if k < 0 {
            return self.initial;
        }
        let k = k as usize;
        debug_assert!(k >= self.first, "history request beyond buffer");
        self.frames[k - self.first][j]
    }

    /// Cubic Lagrange interpolation of atom `j` at time `t <= newest`.
    fn at(&self, t: f64, j: usize) -> Complex64 {
        if t <= 0.0 {
            return self.initial;
        }
        let newest = (self.first + self.frames.len() - 1) as isize;
        let x = t / self.dt;
        let m = x.floor() as isize;
        let start = (m - 1).min(newest - 3);
        let mut acc = Complex64::new(0.0, 0.0);
        for a in 0..4 {
            let xa = (start + a) as f64;
            let mut w = 1.0;
            for b in 0..4 {
                if a != b {
                    let xb = (start + b) as f64;
                    w *= (x - xb) / (xa - xb);
                }
            }
            acc += w * self.node(start + a, j);
        }
        acc
    }
}

/// Integrates the retarded Bloch equations with fixed-step RK4.
pub fn integrate_direct(ensemble: &AtomEnsemble, field: &FieldModel, opts: &DirectOptions) -> Result<DirectRun> {
    if !(opts.dt.is_finite() && opts.dt > 0.0) {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {}", opts.dt)));
    }
    if !(opts.t_end.is_finite() && opts.t_end > 0.0) {
        return Err(Error::InvalidParameter(format!("t_end must be positive, got {}", opts.t_end)));
    }
    if opts.output_every == 0 {
        return Err(Error::InvalidParameter("output_every must be >= 1".into()));
    }
    let n = ensemble.n_atoms();
    let p = *ensemble.params();
    let pairs = pair_table(ensemble, opts.retardation);
    let dde = opts.retardation == Retardation::FullDde;
    let counter_rotating = dde && opts.counter_rotating;
    let max_delay = pairs.iter().flatten().map(|q| q.delay).fold(0.0, f64::max);
    if dde {
        if let Some(min_delay) = pairs.iter().flatten().map(|q| q.delay).reduce(f64::min) {
            if min_delay < opts.dt {
                return Err(Error::HistoryUnderflow { delay: min_delay, dt: opts.dt });
            }
        }
    }
    let drive: FieldRealization = field.realize(0);
    let omega0 = p.omega0;
    let envelope_drive = |t: f64| {
        if drive.is_zero() {
            Complex64::new(0.0, 0.0)
        } else {
            drive.sample(t) * Complex64::from_polar(1.0, omega0 * t)
        }
    };

    let steps = (opts.t_end / opts.dt).round().max(1.0) as usize;
    let dt = opts.dt;
    let mut y: Vec<f64> = (0..n).flat_map(|_| [p.u0.re, p.u0.im, p.s0]).collect();
    let bound = (4.0 * p.u0.norm_sqr() + p.s0 * p.s0).max(1.0) + BLOCH_SLACK;
    let mut history = dde.then(|| {
        let mut h = History::new(dt, max_delay, p.u0);
        h.push(vec![p.u0; n]);
        h
    });
    let mut rk = Rk4::new(3 * n);
    let mut coupled = vec![Complex64::new(0.0, 0.0); n];
    let mut series = TimeSeries::with_capacity(steps / opts.output_every + 2);
    let mut max_norm = 0.0f64;
    let mut scratch = vec![Complex64::new(0.0, 0.0); n];

    let record = |t: f64, y: &[f64], coupled: &mut [Complex64], series: &mut TimeSeries, history: Option<&History>| {
        coupled_fields(t, y, &pairs, history, counter_rotating, omega0, coupled);
        series.push(sample_of(t, y, coupled));
    };

    record(0.0, &y, &mut coupled, &mut series, history.as_ref());
    for step in 0..steps {
        let t = step as f64 * dt;
        {
            let hist = history.as_ref();
            let pairs = &pairs;
            let scratch = &mut scratch;
            rk.step(t, &mut y, dt, |tt, yy, dy| {
                coupled_fields(tt, yy, pairs, hist, counter_rotating, omega0, scratch);
                let f = envelope_drive(tt);
                for i in 0..n {
                    let u = Complex64::new(yy[3 * i], yy[3 * i + 1]);
                    let s = yy[3 * i + 2];
                    let e = f + scratch[i];
                    let du = -u + s * e;
                    dy[3 * i] = du.re;
                    dy[3 * i + 1] = du.im;
                    dy[3 * i + 2] = -p.gamma1 * (s - p.zeta) - 4.0 * (u.conj() * e).re;
                }
            });
        }
        let t_next = (step + 1) as f64 * dt;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(t_next));
        }
        for c in y.chunks_exact(3) {
            let norm = 4.0 * (c[0] * c[0] + c[1] * c[1]) + c[2] * c[2];
            max_norm = max_norm.max(norm);
            if norm > bound {
                return Err(Error::StepSizeTooLarge { t: t_next, excess: norm - bound + BLOCH_SLACK });
            }
        }
        if let Some(h) = history.as_mut() {
            h.push(y.chunks_exact(3).map(|c| Complex64::new(c[0], c[1])).collect());
        }
        if (step + 1) % opts.output_every == 0 || step + 1 == steps {
            record(t_next, &y, &mut coupled, &mut series, history.as_ref());
        }
    }
    let final_state = BlochState::from_flat(steps as f64 * dt, &y);
    Ok(DirectRun { series, final_state, max_bloch_norm: max_norm, steps })
}

/// Pair fields `sum_j K_ij u_j(t - tau_ij)` (plus counter-rotating part).
fn coupled_fields(
    t: f64,
    y: &[f64],
    pairs: &[Vec<Pair>],
    history: Option<&History>,
    counter_rotating: bool,
    omega0: f64,
    out: &mut [Complex64],
) {
    let fast = counter_rotating.then(|| Complex64::from_polar(1.0, 2.0 * omega0 * t));
    for (i, row) in pairs.iter().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut acc_cr = Complex64::new(0.0, 0.0);
        for q in row {
            let uj = match history {
                Some(h) => h.at(t - q.delay, q.j),
                None => Complex64::new(y[3 * q.j], y[3 * q.j + 1]),
            };
            let term = q.kernel * uj;
            acc += term;
            if fast.is_some() {
                acc_cr += term.conj();
            }
        }
        out[i] = match fast {
            Some(phase) => acc + phase * acc_cr,
            None => acc,
        };
    }
}

fn sample_of(t: f64, y: &[f64], coupled: &[Complex64]) -> Sample {
    let n = coupled.len() as f64;
    let mut u_sum = Complex64::new(0.0, 0.0);
    let (mut s_sum, mut w_sum, mut emit) = (0.0, 0.0, 0.0);
    for (c, e) in y.chunks_exact(3).zip(coupled) {
        let u = Complex64::new(c[0], c[1]);
        u_sum += u;
        s_sum += c[2];
        w_sum += 4.0 * u.norm_sqr();
        emit += 4.0 * (u.conj() * e).re;
    }
    let u_bar = u_sum / n;
    Sample::new(t, s_sum / n, 4.0 * u_bar.norm_sqr(), w_sum / n, emit / n)
}
