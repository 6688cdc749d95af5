use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error(
        "resonance iteration did not converge after {iterations} iterations \
         (last omega_r = {last} rad/s, residual = {residual} rad/s)"
    )]
    NoConvergence { iterations: usize, last: f64, residual: f64 },

    #[error("outside the cooling regime: eta = {eta} <= 1")]
    OutsideCoolingRegime { eta: f64 },

    #[error("lasing instability: eta = {eta} <= 1, the steady-state formulas do not apply")]
    LasingInstability { eta: f64 },

    #[error("distribution not normalizable: eta = {eta} <= 1")]
    NotNormalizable { eta: f64 },

    #[error(
        "step size underflow at t = {t} s (h = {step} s); the generator is too stiff for \
         explicit integration, fastest rate ~ {fastest_rate} rad/s"
    )]
    Stiffness { t: f64, step: f64, fastest_rate: f64 },

    #[error("steady state is not unique: null space dimension estimate {null_dim}")]
    NonUniqueSteadyState { null_dim: usize },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
