//! Mermin–Klyshko Bell violation of N-qubit GHZ states under local
//! depolarization, dephasing and dissipation.
//!
//! Two independent evaluation paths are provided: closed-form correlation
//! functions ([`correlations`]) and dense density matrices
//! ([`channels_states`]). The [`optimizer`] maximizes the Bell value over all
//! measurement directions and [`threshold`] locates the largest noise that
//! still violates the local bound.

pub mod bell_operator;
pub mod channels_states;
pub mod cli;
pub mod correlations;
pub mod error;
pub mod observables;
pub mod optimizer;
pub mod threshold;
pub mod verify;

pub use bell_operator::{BellExpansion, Dyadic};
pub use channels_states::{DensityMatrix, NoiseKind, NoiseSpec};
pub use error::{Error, Result};
pub use observables::{ObservableSetting, SettingPair, SettingsTable};
pub use optimizer::{max_bell, OptimizationReport, OptimizerConfig};
pub use threshold::{analytic_pmax, numeric_pmax, ThresholdConfig, ThresholdResult};
