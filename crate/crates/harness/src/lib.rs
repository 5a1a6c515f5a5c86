//! Seeded ensembles, parameter sweeps and figure jobs on top of [`mg_core`].

pub mod config;
pub mod ensemble;
pub mod error;
pub mod figures;
pub mod output;
pub mod seeds;
pub mod sweep;
pub mod theory_runs;

pub use ensemble::{run_ensemble, EnsembleResult, SampleResult};
pub use error::HarnessError;
pub use sweep::{sweep, ResultRow, SweepSpec};

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/harness.md")]
mod book {}
