use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Operator expected to be Hermitian was not (relative asymmetry given).
    NotHermitian { asymmetry: f64 },
    DimensionMismatch { expected: usize, found: usize, what: &'static str },
    /// A detuning that appears in a denominator vanished.
    ZeroDetuning(&'static str),
    /// The full Hilbert space would exceed the dense-matrix guard.
    DimensionTooLarge { dim: usize, max: usize },
    /// A computational dressed state could not be identified with its bare label.
    AmbiguousDressing { label: (usize, usize, usize), overlap: f64 },
    EigenNoConvergence,
    SimplexIterationLimit(usize),
    /// Linear program has no feasible point.
    Infeasible,
    /// Linear program objective is unbounded above.
    Unbounded,
    InvalidInput(String),
    /// Evaluation of a parameter sample failed; wraps the sample index.
    Sample { index: usize, source: alloc::boxed::Box<Error> },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NotHermitian { asymmetry } => {
                write!(f, "operator is not Hermitian (relative asymmetry {asymmetry:.3e})")
            }
            Error::DimensionMismatch { expected, found, what } => {
                write!(f, "dimension mismatch in {what}: expected {expected}, found {found}")
            }
            Error::ZeroDetuning(which) => write!(f, "zero detuning: {which}"),
            Error::DimensionTooLarge { dim, max } => {
                write!(f, "Hilbert-space dimension {dim} exceeds the limit of {max}")
            }
            Error::AmbiguousDressing { label, overlap } => write!(
                f,
                "dressed state for bare label |{},{},{}> is ambiguous (max overlap^2 = {overlap:.4})",
                label.0, label.1, label.2
            ),
            Error::EigenNoConvergence => write!(f, "Hermitian eigensolver failed to converge"),
            Error::SimplexIterationLimit(n) => {
                write!(f, "simplex solver hit its iteration cap ({n} pivots)")
            }
            Error::Infeasible => write!(f, "linear program is infeasible"),
            Error::Unbounded => write!(f, "linear program is unbounded"),
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::Sample { index, source } => write!(f, "sample {index}: {source}"),
        }
    }
}

impl core::error::Error for Error {}
