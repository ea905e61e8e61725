//! Dense complex linear algebra: operators, Hermitian eigendecomposition,
//! propagators and their exact derivatives.

mod eig;
mod operator;
mod propagator;

pub use eig::{eig_hermitian, HermitianEigen, HERMITIAN_TOL};

pub(crate) use operator::matmul_into;
pub use operator::{kron, pauli, Operator, StateVector};
pub use propagator::{
    divided_difference, propagator, propagator_with_derivatives, SpectralPropagator,
    DEGENERACY_GAP,
};
