use thiserror::Error;

/// Crate-wide error type. Every fallible operation returns `Result<T, Error>`;
/// numerical non-convergence is reported with the achieved figure so callers
/// can decide whether to retry with a larger budget.
#[derive(Debug, Error)]
pub enum Error {
    #[error("evaluation point {x} outside measure domain [{lo}, {hi}]")]
    DomainViolation { x: f64, lo: f64, hi: f64 },

    #[error("operands live on different base measures")]
    MismatchedMeasures,

    #[error("invalid density specification: {0}")]
    InvalidDensity(String),

    #[error("invalid prior: {0}")]
    InvalidPrior(String),

    #[error("invalid subset: {0}")]
    InvalidSubset(String),

    #[error("invalid bracket set: {0}")]
    InvalidBracket(String),

    #[error("invalid cover: {0}")]
    InvalidCover(String),

    #[error("invalid mixing weights: {0}")]
    InvalidWeights(String),

    #[error("quadrature did not reach requested tolerance: achieved {achieved:.3e}, requested {requested:.3e}")]
    QuadratureNonConvergence { achieved: f64, requested: f64 },

    #[error("simplex maximization stopped at duality gap {gap:.3e} above tolerance {tol:.3e} (best value {best:.6})")]
    SimplexNonConvergence { best: f64, gap: f64, tol: f64 },

    #[error("Monte Carlo budget exhausted: standard error {achieved:.3e} above target {target:.3e}")]
    McBudgetExhausted { achieved: f64, target: f64 },

    #[error("every model in the support assigns zero likelihood to the data")]
    AllZeroLikelihood,

    #[error("reference density vanishes at observation {x}")]
    ZeroDensityAtObservation { x: f64 },

    #[error("posterior is degenerate: all restricted weights vanished")]
    DegeneratePosterior,

    #[error("restriction has zero prior mass")]
    ZeroMassRestriction,

    #[error("restriction of an improper prior has infinite mass")]
    InfiniteMassRestriction,

    #[error("operation requires a proper prior")]
    ProperPriorRequired,

    #[error("operation requires an improper prior")]
    ImproperPriorRequired,

    #[error("square-root mass sum diverges: partial sums still growing at truncation (last increment {increment:.3e})")]
    DivergentSqrtMassSum { increment: f64 },

    #[error("block masses must be sorted in decreasing order (violated at index {index})")]
    UnsortedMasses { index: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("subsequence selected no indices")]
    EmptySubsequence,

    #[error("candidate models are indistinguishable: {0}")]
    IndistinguishableCandidates(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
