use std::fmt;

/// Errors surfaced by the toolkit. Infeasibility of a well-posed problem is
/// not an error; it is reported through solver/LP statuses.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter or input violated a documented invariant.
    InvalidInput(String),
    /// Adaptive quadrature did not reach the requested tolerance within
    /// its panel budget.
    Quadrature(String),
    /// The simplex method stalled (cycling or numerical breakdown) before
    /// reaching a certified status.
    SimplexStall { iterations: usize },
    /// The cutting-plane solver exceeded its row budget; constraint
    /// dropping is intentionally not implemented.
    CutBudget { rows: usize, cap: usize },
    /// No strictly interior point exists (or remains) for a polytope.
    EmptyInterior,
    /// A numeric routine produced a non-finite value.
    NonFinite(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::Quadrature(msg) => write!(f, "quadrature failure: {msg}"),
            Error::SimplexStall { iterations } => {
                write!(f, "simplex stalled after {iterations} iterations")
            }
            Error::CutBudget { rows, cap } => {
                write!(f, "cut budget exceeded: {rows} rows > cap {cap}")
            }
            Error::EmptyInterior => write!(f, "polytope has empty interior"),
            Error::NonFinite(msg) => write!(f, "non-finite value: {msg}"),
        }
    }
}

impl std::error::Error for Error {}
