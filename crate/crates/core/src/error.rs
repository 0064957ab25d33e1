use thiserror::Error;

/// Errors raised by the pricing and large-deviations toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("cumulant generating function overflows at lambda = {lambda}")]
    Overflow { lambda: f64 },

    #[error("indeterminate extended-real arithmetic: {0}")]
    Indeterminate(&'static str),

    #[error("matrix is not positive definite: pivot {pivot} is {value}")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("Gauss-Hermite quadrature did not converge up to {nodes} nodes")]
    QuadratureNonConvergence { nodes: usize },

    #[error("tail truncation failed: {0}")]
    TailTruncation(String),

    #[error("component {index} has no hedge representation (covariance block has {block} assets)")]
    MissingHedgeRepresentation { index: usize, block: usize },

    #[error("price {price} is outside the arbitrage-free interval ({lower}, {upper})")]
    PriceNotArbitrageFree {
        price: f64,
        lower: String,
        upper: String,
    },

    #[error("price {price} is too close to the arbitrage bound; optimal quantity exceeds 2^60")]
    NearBoundary { price: f64 },

    #[error("bisection stalled with residual {residual} after {iterations} iterations")]
    SolverStalled { residual: f64, iterations: usize },

    #[error("no scaling rule for this market: {0}")]
    MissingScaling(String),

    #[error("input is not convex: second difference {value} at grid index {index}")]
    NonConvex { index: usize, value: f64 },

    #[error("unsupported rate function: {0}")]
    UnsupportedRateFunction(String),

    #[error("Monte Carlo truncation cannot meet the variance budget: {0}")]
    VarianceBudget(String),

    #[error("Monte Carlo weights are degenerate: {0}")]
    DegenerateWeights(String),

    #[error("moment condition fails: {0}")]
    MomentCondition(String),
}

impl Error {
    /// Stable kebab-case identifier, used by the CLI when reporting domain errors.
    pub fn name(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "invalid-parameter",
            Error::Overflow { .. } => "overflow",
            Error::Indeterminate(_) => "indeterminate",
            Error::NotPositiveDefinite { .. } => "not-positive-definite",
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::QuadratureNonConvergence { .. } => "quadrature-non-convergence",
            Error::TailTruncation(_) => "tail-truncation",
            Error::MissingHedgeRepresentation { .. } => "missing-hedge-representation",
            Error::PriceNotArbitrageFree { .. } => "price-not-arbitrage-free",
            Error::NearBoundary { .. } => "near-boundary",
            Error::SolverStalled { .. } => "solver-stalled",
            Error::MissingScaling(_) => "missing-scaling",
            Error::NonConvex { .. } => "non-convex",
            Error::UnsupportedRateFunction(_) => "unsupported-rate-function",
            Error::VarianceBudget(_) => "variance-budget",
            Error::DegenerateWeights(_) => "degenerate-weights",
            Error::MomentCondition(_) => "moment-condition",
        }
    }

    pub(crate) fn invalid(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
