use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A sign or zero condition of the reaction term failed at a grid point.
    #[error("validation failed: {condition} at u = {at}")]
    Validation { condition: String, at: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge on [{a}, {b}]")]
    Quad { a: f64, b: f64 },

    #[error("operation requires kind {expected}, got {got}")]
    Kind { expected: &'static str, got: String },

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("trajectory did not terminate: {0}")]
    NoTermination(String),

    #[error("degenerate phase plane: {0}")]
    Degenerate(String),

    #[error("front moved inward at t = {t}: g' = {gprime}, h' = {hprime}")]
    Sign { t: f64, gprime: f64, hprime: f64 },

    #[error("blow-up at t = {t}: max u = {max_u}")]
    Blowup { t: f64, max_u: f64 },

    #[error("run is not spreading")]
    NotSpreading,

    #[error("verdicts are not monotone in sigma: {0}")]
    MonotoneViolation(String),

    #[error("run budget of {0} exhausted")]
    BudgetExhausted(usize),

    #[error("config error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Blowup { .. }
                | Error::MonotoneViolation(_)
                | Error::Quad { .. }
                | Error::NoTermination(_)
                | Error::Sign { .. }
                | Error::BudgetExhausted(_)
        )
    }
}
