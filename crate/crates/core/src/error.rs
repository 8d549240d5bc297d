use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("empty economy: at least one sector is required")]
    Empty,

    #[error("{what} must be finite (entry {index})")]
    NonFinite { what: &'static str, index: usize },

    #[error("input matrix A must be nonnegative: a[{row}][{col}] = {value}")]
    NegativeInput { row: usize, col: usize, value: f64 },

    #[error("direct labor L must be strictly positive: L[{index}] = {value}")]
    NonPositiveLabor { index: usize, value: f64 },

    #[error("input matrix is not productive: spectral radius {rho} >= 1")]
    NotProductive { rho: f64 },

    #[error("input matrix is decomposable: sector graph is not strongly connected")]
    Decomposable,

    #[error("I - A is numerically singular (spectral radius {rho})")]
    SingularSystem { rho: f64 },

    #[error("wage bundle must be nonnegative: b[{index}] = {value}")]
    NegativeBundle { index: usize, value: f64 },

    #[error("wage bundle must have at least one strictly positive element")]
    ZeroBundle,

    #[error("value of the wage bundle must be positive, got {0}")]
    NonPositiveValue(f64),

    #[error("power iteration did not converge within {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("price normalization p.b = {0} is degenerate")]
    DegenerateNormalization(f64),

    #[error("sector {sector} out of range for a {n}-sector economy")]
    InvalidSector { sector: usize, n: usize },

    #[error("new direct labor must be strictly positive, got {0}")]
    NonPositiveNewLabor(f64),

    #[error("technical change is not viable (cost drop {cost_drop})")]
    NotViable { cost_drop: f64 },

    #[error("wage bundle is not admissible: {reason}")]
    NotInB { reason: String },

    #[error("{name} must lie in the open interval (0, 1), got {value}")]
    InvalidFraction { name: &'static str, value: f64 },

    #[error("wage region is infeasible: the value hyperplane lies below the price hyperplane")]
    Infeasible,

    #[error("no admissible wage bundle after {proposals} proposals")]
    SamplingExhausted { proposals: usize },

    #[error("spectral-radius oracle supports n <= 6, got n = {n}")]
    OracleLimit { n: usize },

    #[error("{stage}: {source}")]
    Scenario {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Wraps an error with the pipeline stage that produced it.
    pub fn in_stage(self, stage: &'static str) -> Error {
        Error::Scenario {
            stage,
            source: Box::new(self),
        }
    }

    /// Innermost error, skipping scenario context.
    pub fn root(&self) -> &Error {
        match self {
            Error::Scenario { source, .. } => source.root(),
            other => other,
        }
    }
}
