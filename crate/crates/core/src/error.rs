use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at offset {offset}; declared variables: {declared}")]
    UnknownIdentifier {
        name: String,
        offset: usize,
        declared: String,
    },

    #[error("invalid variable list: {0}")]
    InvalidVariables(String),

    /// An expression or model was evaluated outside its domain.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("metric is not positive definite at q = {0:?}")]
    MetricNotPositiveDefinite(Vec<f64>),

    #[error("tangent vectors do not span a 2-plane")]
    DegeneratePlane,

    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64, state: Vec<f64> },

    #[error("Newton iteration failed to converge after {iterations} iterations (residual {residual:e})")]
    NewtonDivergence { iterations: usize, residual: f64 },

    #[error("Jacobian is singular (smallest/largest singular value {ratio:e})")]
    SingularJacobian { ratio: f64 },

    #[error("trajectory did not return to the section within t = {limit}")]
    NoReturn { limit: f64 },

    #[error("trivial Floquet multipliers not identifiable (|λ-1| = {distance:e})")]
    DegenerateOrbit { distance: f64 },

    #[error("horizon too short: {renormalizations} renormalizations, at least 100 required")]
    HorizonTooShort { renormalizations: usize },

    #[error("closed-form curvature unavailable for the {0} family")]
    UnsupportedFamily(&'static str),

    #[error("Hamiltonian field is not regular at this point (g-form singular)")]
    NotRegular,

    #[error("Hamiltonian field is not monotone at this point (g-form not sign-definite)")]
    NotMonotone,

    #[error("Schwartzian derivative estimates did not converge (spread {spread:e})")]
    RichardsonFailed { spread: f64 },

    #[error("Hamiltonian field lies in the vertical distribution (dh/dp = 0)")]
    VerticalField,

    #[error("admissible subspace trivial for n=1")]
    TrivialAdmissible,

    #[error("reference form is indefinite or degenerate")]
    IndefiniteReference,

    #[error("energy c = {c} does not exceed U(q) = {potential}")]
    BelowPotential { c: f64, potential: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
