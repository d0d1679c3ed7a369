//! Coherent emission of impurity atoms embedded in a polariton band-gap
//! medium.
//!
//! The crate computes geometric coupling constants of an atomic cluster, the
//! polariton spectrum of the host, the effective field coupling supplied by
//! the medium, and integrates either the full retarded Bloch equations or a
//! two-variable averaged model. Analysis routines turn the resulting time
//! series into burst statistics and stationary excitation levels.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub use num_complex;

pub mod analysis;
pub mod averaged;
pub mod config;
pub mod coupling;
pub mod direct;
pub mod ensemble;
pub mod error;
pub mod field;
mod ode;
pub mod rng;
pub mod run;
pub mod series;
pub mod spectrum;

pub use analysis::{
    classify_regime, detect_bursts, stationary_excitation, AnalysisOptions, Burst, BurstReport, Regime,
    StationaryReport, Verdict,
};
pub use averaged::{integrate_averaged, stationary_point, AveragedOptions, AveragedParams, AveragedRun, FixedPoint};
pub use config::{parse_config, RunConfig, SolverKind};
pub use coupling::{coupling_g, critical_alpha, effective_freq_atten, lamb_shift, CouplingSummary};
pub use direct::{integrate_direct, DirectOptions, DirectRun, Retardation};
pub use ensemble::{build_geometry, AtomEnsemble, AtomParams, Geometry};
pub use error::{Error, Result};
pub use field::{alpha_effective, sample_field, AlphaEstimate, AlphaOptions, FieldModel};
pub use series::{Sample, TimeSeries};
pub use spectrum::{
    classify_frequency, matter_branch, polariton_branches, FrequencyClass, MediumModel, PolaritonBands,
};
