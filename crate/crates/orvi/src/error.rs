use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {context}: {detail}")]
    Dimension { context: &'static str, detail: String },

    #[error("{what} did not converge")]
    NonConvergence { what: &'static str },

    #[error("unpaired complex root {re}{im:+}i")]
    UnpairedRoot { re: f64, im: f64 },

    #[error("singular system in {context}: eigenvalue {re}{im:+}i is shared")]
    SpectraOverlap { context: &'static str, re: f64, im: f64 },

    #[error("{context}: pair fails the PBH test at eigenvalue {re}{im:+}i (rank gap {gap})")]
    Pbh { context: &'static str, re: f64, im: f64, gap: usize },

    #[error("rank deficient ({context}): rank {rank} < required {required}")]
    Rank { context: String, rank: usize, required: usize },

    #[error("characteristic polynomial mismatch: coefficient {index} is {got}, expected {expected}")]
    PolynomialMismatch { index: usize, got: f64, expected: f64 },

    #[error("parameterization check failed: {0}")]
    Identity(String),

    #[error("no stabilizing gain found: {0}")]
    NoStabilizingGain(String),

    #[error("Riccati residual {residual:e} above bound {bound:e}")]
    RiccatiResidual { residual: f64, bound: f64 },

    #[error("simulation state became non-finite or exceeded the bound at t = {t}")]
    Diverged { t: f64 },

    #[error("sampling grid: {0}")]
    Grid(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid polynomial: {0}")]
    Polynomial(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn dim(context: &'static str, detail: impl Into<String>) -> Error {
    Error::Dimension { context, detail: detail.into() }
}
