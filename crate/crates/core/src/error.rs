use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {residual:.3e})")]
    NoConvergence { sweeps: usize, residual: f64 },

    #[error("expectation value has imaginary part {imag:.3e}")]
    ComplexExpectation { imag: f64 },

    #[error("basis label {label} out of range for {n_qubits} qubits")]
    LabelOutOfRange { label: usize, n_qubits: usize },

    #[error("parameter count mismatch: circuit has {expected} parameters, got {got}")]
    ParamCount { expected: usize, got: usize },

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no eigenvalue within {tol:.1e} of target {target}")]
    EmptySector { target: f64, tol: f64 },

    #[error("symmetry subspace has dimension {dim}; the construction requires the symmetry subspace to be of dimension greater than 1")]
    SectorTooSmall { dim: usize },

    #[error("assembled matrix is not unitary (max deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("operators do not commute (max |[H, O]| = {deviation:.3e})")]
    NonCommuting { deviation: f64 },

    #[error("parameter-shift rule needs RX/RY generators; gate {index} is {kind}")]
    UnsupportedShift { index: usize, kind: &'static str },

    #[error("training stopped after {iterations} iterations with mean error {best_error:.3e} (target {target:.3e})")]
    TrainingFailed {
        iterations: usize,
        best_error: f64,
        target: f64,
    },

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(field: &str, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.to_string(),
            message: message.into(),
        }
    }
}
