//! Post-processing of trajectories: bursts, plateaus and regimes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{excitation, TimeSeries};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    /// Burst threshold as a fraction of the global intensity peak.
    pub burst_threshold: f64,
    /// Largest relative slope `|ds/dt| / max(|s|, 0.01)` accepted as a plateau.
    pub plateau_tol: f64,
    /// Excitation margin separating `localized`/`deexcited` from `partial`.
    pub verdict_tol: f64,
    pub g_min: f64,
    pub alpha_ratio_max: f64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self { burst_threshold: 0.1, plateau_tol: 1e-3, verdict_tol: 1e-3, g_min: 5.0, alpha_ratio_max: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Burst {
    pub start: f64,
    pub end: f64,
    pub peak_time: f64,
    pub peak_intensity: f64,
    /// Full width at half of this burst's own maximum.
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BurstReport {
    pub threshold_frac: f64,
    pub burst_count: usize,
    pub bursts: Vec<Burst>,
    /// Peak time of the first burst.
    pub delay_time: Option<f64>,
    /// From the start of the first burst to the end of the last.
    pub train_duration: Option<f64>,
    pub global_peak: f64,
    /// Fraction of the time span spent below threshold.
    pub quiescent_fraction: f64,
    /// Deepest intensity between consecutive bursts relative to the global
    /// peak, taking the shallowest such gap; `None` with fewer than two bursts.
    pub interburst_floor: Option<f64>,
}

/// Splits the intensity trace into bursts: maximal runs at or above
/// `threshold_frac` times the global peak.
pub fn detect_bursts(series: &TimeSeries, threshold_frac: f64) -> Result<BurstReport> {
    if series.is_empty() {
        return Err(Error::EmptySeries);
    }
    if !(threshold_frac > 0.0 && threshold_frac < 1.0) {
        return Err(Error::InvalidParameter(format!("threshold_frac must lie in (0, 1), got {threshold_frac}")));
    }
    let t: Vec<f64> = series.times().collect();
    let x: Vec<f64> = series.samples().iter().map(|s| s.intensity).collect();
    let peak = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = t[t.len() - 1] - t[0];

    if !(peak > 0.0) {
        return Ok(BurstReport {
            threshold_frac,
            burst_count: 0,
            bursts: Vec::new(),
            delay_time: None,
            train_duration: None,
            global_peak: peak.max(0.0),
            quiescent_fraction: 1.0,
            interburst_floor: None,
        });
    }
    let level = threshold_frac * peak;
    let above: Vec<bool> = x.iter().map(|&v| v >= level).collect();

    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    while i < x.len() {
        if above[i] {
            let start = i;
            while i + 1 < x.len() && above[i + 1] {
                i += 1;
            }
            runs.push((start, i));
        }
        i += 1;
    }

    let bursts: Vec<Burst> = runs
        .iter()
        .map(|&(a, b)| {
            let k = (a..=b).fold(a, |best, j| if x[j] > x[best] { j } else { best });
            Burst { start: t[a], end: t[b], peak_time: t[k], peak_intensity: x[k], width: half_width(&t, &x, k) }
        })
        .collect();

    let quiet: f64 = t.windows(2).zip(above.windows(2)).filter(|(_, a)| !a[0] && !a[1]).map(|(w, _)| w[1] - w[0]).sum();
    let quiescent_fraction = if span > 0.0 {
        quiet / span
    } else if above[0] {
        0.0
    } else {
        1.0
    };

    let interburst_floor = (runs.len() >= 2).then(|| {
        runs.windows(2).map(|r| x[r[0].1 + 1..r[1].0].iter().copied().fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
            / peak
    });

    Ok(BurstReport {
        threshold_frac,
        burst_count: bursts.len(),
        delay_time: bursts.first().map(|b| b.peak_time),
        train_duration: bursts.first().zip(bursts.last()).map(|(a, b)| b.end - a.start),
        bursts,
        global_peak: peak,
        quiescent_fraction,
        interburst_floor,
    })
}

fn half_width(t: &[f64], x: &[f64], k: usize) -> f64 {
    let half = 0.5 * x[k];
    let cross = |i: usize, j: usize| {
        // linear crossing of `half` between samples i (above) and j (below)
        let f = (x[i] - half) / (x[i] - x[j]);
        t[i] + f * (t[j] - t[i])
    };
    let mut l = k;
    while l > 0 && x[l - 1] >= half {
        l -= 1;
    }
    let left = if l > 0 { cross(l, l - 1) } else { t[0] };
    let mut r = k;
    while r + 1 < x.len() && x[r + 1] >= half {
        r += 1;
    }
    let right = if r + 1 < x.len() { cross(r, r + 1) } else { t[x.len() - 1] };
    right - left
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Localized,
    Partial,
    Deexcited,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryReport {
    pub s_infinity: f64,
    pub window_start: f64,
    pub window_end: f64,
    pub relative_slope: f64,
    pub eta_infinity: f64,
    /// `(1 + 1/g) / 2`, defined for `g > 1`.
    pub eta_predicted: Option<f64>,
    pub relative_deviation: Option<f64>,
    pub verdict: Verdict,
}

/// Plateau value of the mean inversion over the trailing 10% of the series.
pub fn stationary_excitation(series: &TimeSeries, g: f64, opts: &AnalysisOptions) -> Result<StationaryReport> {
    let samples = series.samples();
    if samples.is_empty() {
        return Err(Error::EmptySeries);
    }
    let (t0, t1) = (samples[0].t, samples[samples.len() - 1].t);
    let cut = t1 - 0.1 * (t1 - t0);
    let mut start = samples.iter().position(|s| s.t >= cut).unwrap_or(samples.len() - 1);
    if samples.len() - start < 2 && samples.len() >= 2 {
        start = samples.len() - 2;
    }
    let window = &samples[start..];
    let n = window.len() as f64;
    let s_inf = window.iter().map(|s| s.s_mean).sum::<f64>() / n;

    let slope = if window.len() >= 2 {
        let tm = window.iter().map(|s| s.t).sum::<f64>() / n;
        let (mut num, mut den) = (0.0, 0.0);
        for s in window {
            num += (s.t - tm) * (s.s_mean - s_inf);
            den += (s.t - tm) * (s.t - tm);
        }
        num / den
    } else {
        0.0
    };
    let relative_slope = slope.abs() / s_inf.abs().max(0.01);
    if !(relative_slope < opts.plateau_tol) {
        return Err(Error::NotStationary { slope: relative_slope, tolerance: opts.plateau_tol });
    }

    let eta = excitation(s_inf);
    let predicted = (g > 1.0).then(|| excitation(1.0 / g));
    let verdict = if eta >= 1.0 - opts.verdict_tol {
        Verdict::Localized
    } else if eta <= opts.verdict_tol {
        Verdict::Deexcited
    } else {
        Verdict::Partial
    };
    Ok(StationaryReport {
        s_infinity: s_inf,
        window_start: window[0].t,
        window_end: t1,
        relative_slope,
        eta_infinity: eta,
        eta_predicted: predicted,
        relative_deviation: predicted.map(|p| (eta - p) / p),
        verdict,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    LocalizedSingleAtom,
    CoherentBurst,
    FieldDominated,
    Intermediate,
}

/// Regime from the coherent coupling `g`, the atom-matter coupling `alpha`
/// and its critical value. Pass `f64::INFINITY` for `alpha_c` when it is
/// undefined.
pub fn classify_regime(g: f64, alpha: f64, alpha_c: f64, opts: &AnalysisOptions) -> Regime {
    if g.abs() <= 1e-12 {
        Regime::LocalizedSingleAtom
    } else if alpha > alpha_c {
        Regime::FieldDominated
    } else if g > opts.g_min && alpha < opts.alpha_ratio_max * alpha_c {
        Regime::CoherentBurst
    } else {
        Regime::Intermediate
    }
}
