//! Reliability evaluation for cyber-physical systems.
//!
//! Components carry parametric failure models ([`failure_model`]) and are
//! composed into series, parallel and k-out-of-n blocks ([`composition`]).
//! A system architecture groups sensor, actuator, network and
//! computation-and-control blocks, optionally scaled by a data reliability
//! score ([`data_quality`]). [`catalog`] selects the best off-the-shelf parts
//! and [`montecarlo`] re-estimates any result by simulation.

pub mod catalog;
pub mod composition;
pub mod data_quality;
pub mod document;
pub mod error;
pub mod failure_model;
pub mod montecarlo;

pub use composition::{
    cc_reliability, cps_reliability, evaluate_block, evaluate_cps, k_of_n_reliability,
    parallel_reliability, series_reliability, Block, CombinedValue, CombinerMode, Component,
    ComponentKind, CpsArchitecture, CpsBreakdown, ModuleSlot, Window,
};
pub use error::{Error, Result};
pub use failure_model::{FailureModel, Mtbf};
pub use montecarlo::{SimulationConfig, SimulationEstimate};
