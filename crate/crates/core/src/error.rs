use thiserror::Error;

use crate::qmat::Qubit;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("qubit label {0:?} appears more than once in a layout")]
    DuplicateLabel(Qubit),
    #[error("layouts share qubit {0:?}")]
    OverlappingLayouts(Qubit),
    #[error("target layout is not a permutation of the source layout")]
    NotAPermutation,
    #[error("kept qubits are not a subset of the layout")]
    NotASubset,
    #[error("expected layout {expected}, found {found}")]
    WrongLayout { expected: String, found: String },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not Hermitian (max residual {0:e})")]
    NotHermitian(f64),
    #[error("trace is {0}, expected 1")]
    TraceNotOne(f64),
    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositive(f64),
    #[error("expectation value has imaginary residue {0:e}")]
    NonRealExpectation(f64),
    #[error("probability {0} outside [0, 1]")]
    ProbabilityOutOfRange(f64),
    #[error("parameter `{name}` = {value} outside {range}")]
    ParameterOutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("invalid probability table: {0}")]
    InvalidTable(String),
    #[error("detection threshold needs w_bell < 0 < w_mixed, got ({w_bell}, {w_mixed})")]
    ThresholdSign { w_bell: f64, w_mixed: f64 },
    #[error("invalid optical configuration: {0}")]
    InvalidConfiguration(String),
    #[error("projection kets overlap on mode {0}")]
    OverlappingArms(usize),
    #[error("projection ket is not normalized (norm² = {0})")]
    UnnormalizedKet(f64),
    #[error("no coincidence data (N = 0)")]
    NoData,
    #[error("{0}")]
    Invalid(String),
}

pub(crate) fn check_unit_interval(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::ParameterOutOfRange {
            name,
            value,
            range: "[0, 1]",
        })
    }
}
