//! Sampled trajectories shared by both solvers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One output sample.
///
/// `w_mean` is the squared transverse Bloch component of the mean dipole,
/// `4 |u_bar|^2`, so that `w_mean + s_mean^2 <= 1`. The averaged solver's
/// slow variable `w` is this same quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub s_mean: f64,
    pub w_mean: f64,
    /// Site average of `4 |u_i|^2`.
    pub w_incoherent: f64,
    pub eta: f64,
    /// Collective emission rate: the coherent drain of the mean inversion.
    pub intensity: f64,
}

impl Sample {
    pub fn new(t: f64, s_mean: f64, w_mean: f64, w_incoherent: f64, intensity: f64) -> Self {
        Self { t, s_mean, w_mean, w_incoherent, eta: excitation(s_mean), intensity }
    }
}

/// Excitation probability `(1 + s) / 2`.
pub fn excitation(s: f64) -> f64 {
    0.5 * (1.0 + s)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    samples: Vec<Sample>,
}

pub const CSV_HEADER: &str = "t,s_mean,w_mean,eta,intensity";

impl TimeSeries {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(n: usize) -> Self {
        Self { samples: Vec::with_capacity(n) }
    }

    /// Builds a series from samples; times must be strictly increasing.
    pub fn from_samples(samples: Vec<Sample>) -> Result<Self> {
        if samples.windows(2).any(|w| !(w[1].t > w[0].t)) {
            return Err(Error::InvalidParameter("sample times must be strictly increasing".into()));
        }
        Ok(Self { samples })
    }

    pub(crate) fn push(&mut self, sample: Sample) {
        debug_assert!(self.samples.last().is_none_or(|last| sample.t > last.t));
        self.samples.push(sample);
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.t)
    }

    /// Copy with every time shifted by `dt`.
    pub fn shifted(&self, dt: f64) -> Self {
        Self { samples: self.samples.iter().map(|s| Sample { t: s.t + dt, ..*s }).collect() }
    }

    /// CSV with header `t,s_mean,w_mean,eta,intensity`, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.samples.len() * 120 + 64);
        out.push_str(CSV_HEADER);
        out.push('\n');
        for s in &self.samples {
            use std::fmt::Write;
            let _ =
                writeln!(out, "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}", s.t, s.s_mean, s.w_mean, s.eta, s.intensity);
        }
        out
    }

    /// Parses the CSV written by [`TimeSeries::to_csv`]. Column order is
    /// taken from the header; `w_incoherent` is not stored and is set to
    /// `w_mean`.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(Error::EmptySeries)?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        let find = |name: &str| {
            cols.iter()
                .position(|c| *c == name)
                .ok_or_else(|| Error::InvalidParameter(format!("CSV header lacks column '{name}'")))
        };
        let (it, is, iw, ii) = (find("t")?, find("s_mean")?, find("w_mean")?, find("intensity")?);
        let mut samples = Vec::new();
        for (lineno, line) in lines {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != cols.len() {
                return Err(Error::InvalidParameter(format!(
                    "line {}: expected {} fields, found {}",
                    lineno + 1,
                    cols.len(),
                    fields.len()
                )));
            }
            let num = |k: usize| {
                fields[k]
                    .parse::<f64>()
                    .map_err(|e| Error::InvalidParameter(format!("line {}: column '{}': {e}", lineno + 1, cols[k])))
            };
            let w = num(iw)?;
            samples.push(Sample::new(num(it)?, num(is)?, w, w, num(ii)?));
        }
        if samples.is_empty() {
            return Err(Error::EmptySeries);
        }
        Self::from_samples(samples)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_exact() {
        let samples = vec![
            Sample::new(0.0, 1.0, 1e-6, 1e-6, 1e-5),
            Sample::new(0.1, 0.999_999_123_456_789, 1.234_567_890_123_456_7e-5, 1.234_567_890_123_456_7e-5, 0.1 / 3.0),
        ];
        let ts = TimeSeries::from_samples(samples).unwrap();
        let csv = ts.to_csv();
        assert!(csv.starts_with("t,s_mean,w_mean,eta,intensity\n"));
        let back = TimeSeries::from_csv(&csv).unwrap();
        assert_eq!(back, ts);
    }

    #[test]
    fn rejects_non_increasing_times() {
        let s = Sample::new(1.0, 0.0, 0.0, 0.0, 0.0);
        assert!(TimeSeries::from_samples(vec![s, s]).is_err());
    }

    #[test]
    fn malformed_csv() {
        assert_eq!(TimeSeries::from_csv(""), Err(Error::EmptySeries));
        assert!(TimeSeries::from_csv("t,s_mean\n0,1\n").is_err());
        assert!(TimeSeries::from_csv("t,s_mean,w_mean,eta,intensity\n0,1,0,1\n").is_err());
        assert!(TimeSeries::from_csv("t,s_mean,w_mean,eta,intensity\n0,x,0,1,0\n").is_err());
    }
}
