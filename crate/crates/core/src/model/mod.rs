//! Hamiltonians of the two-qubit single-cavity device: the effective
//! two-level cross-resonance model and the multi-level Duffing model.

mod multilevel;
mod params;
mod two_level;

pub use multilevel::{
    computational_projector, dress, duffing_hamiltonian, rotating_frame, BareDims, BareLabel,
    DressedBasis, RotatingFrame, COMPUTATIONAL_LABELS, MAX_DIM, RWA_THRESHOLD,
};
pub use params::{
    effective_params, EffectiveParams, ParamId, SystemParams, Warning, DISPERSIVE_THRESHOLD,
};
pub use two_level::{two_level_control, two_level_drift, two_level_projector};
