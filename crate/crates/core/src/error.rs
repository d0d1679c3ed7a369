use thiserror::Error;

/// Errors raised by the numerical modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("atoms {i} and {j} are {distance:.3e} apart (k0 r), below the minimum separation {r_min:.3e}")]
    MinimumSeparationViolated { i: usize, j: usize, distance: f64, r_min: f64 },

    #[error("degenerate initial state: {0}")]
    DegenerateInitialState(String),

    #[error("effective attenuation {0} is not positive; supply alpha directly in the gain regime")]
    NonpositiveGamma(f64),

    #[error("Bloch bound violated by {excess:.3e} at t = {t}; reduce dt")]
    StepSizeTooLarge { t: f64, excess: f64 },

    #[error("retardation delay {delay:.3e} is shorter than the step {dt:.3e}")]
    HistoryUnderflow { delay: f64, dt: f64 },

    #[error("no fixed point with w >= 0 in the gain regime")]
    NoFixedPointInGainRegime,

    #[error("time series is empty")]
    EmptySeries,

    #[error("series is not stationary: relative slope {slope:.3e} exceeds {tolerance:.3e}")]
    NotStationary { slope: f64, tolerance: f64 },

    #[error("non-finite value encountered at t = {0}")]
    NonFinite(f64),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::MinimumSeparationViolated { .. } => "MinimumSeparationViolated",
            Error::DegenerateInitialState(_) => "DegenerateInitialState",
            Error::NonpositiveGamma(_) => "NonpositiveGamma",
            Error::StepSizeTooLarge { .. } => "StepSizeTooLarge",
            Error::HistoryUnderflow { .. } => "HistoryUnderflow",
            Error::NoFixedPointInGainRegime => "NoFixedPointInGainRegime",
            Error::EmptySeries => "EmptySeries",
            Error::NotStationary { .. } => "NotStationary",
            Error::NonFinite(_) => "NonFinite",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
