//! Robust pulse optimization: parameter sampling, worst-case fidelity, the
//! linearized max-min step and the trust-region loop.

mod grid;
mod optimize;
pub mod simplex;
mod step;

pub use grid::{sample_grid, SampleGrid, Uncertainty, UncertaintySpec};
pub use optimize::{
    scp_optimize, scp_optimize_with, worst_case, IterRecord, OptConfig, OptResult, SampleMap,
    SampleSet, Sequential, Termination,
};
pub use step::{maximin_step, Step};
