use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Input lies outside the domain of a function (e.g. a gamma pole).
    #[error("domain error: {0}")]
    Domain(String),

    /// No vertical line separates the left and right pole families.
    #[error("contour cannot separate poles: {0}")]
    Contour(String),

    /// Quadrature did not reach the requested tolerance within its panel budget.
    #[error("convergence failure: requested relative error {requested:e}, achieved {achieved:e}")]
    Convergence { requested: f64, achieved: f64 },

    /// A multivariate evaluation would exceed its node budget.
    #[error("cost guard: {nodes} quadrature nodes exceeds budget of {budget}")]
    CostGuard { nodes: usize, budget: usize },

    /// Invalid scenario or parameter record.
    #[error("config error in `{field}`: {reason}")]
    Config { field: String, reason: String },

    /// API misuse (empty input and similar).
    #[error("usage error: {0}")]
    Usage(String),

    /// A computed quantity violated a mathematical bound.
    #[error("internal consistency error: {0}")]
    Consistency(String),

    /// The evaluation deadline passed.
    #[error("evaluation cancelled: deadline exceeded")]
    Cancelled,

    /// A failure inside a scenario run, located at one sweep point.
    #[error("scenario `{scenario}`, metric `{metric}`, x = {x}: {source}")]
    AtPoint {
        scenario: String,
        metric: String,
        x: f64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
