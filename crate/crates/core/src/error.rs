use thiserror::Error;

/// Failure modes shared by every module.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument {0} is within tolerance of a pole")]
    AtPole(String),
    #[error("continuation needs more than {0} ladder steps")]
    LadderOverflow(usize),
    #[error("no convergence: {0}")]
    NonConvergent(String),
    #[error("argument on the branch cut of Log")]
    BranchViolation,
    #[error("product representation needs Im b^2 > 0")]
    WrongRegime,
    #[error("degenerate modulus: {0}")]
    Degenerate(String),
    #[error("evaluation budget exceeded ({0} evaluations)")]
    BudgetExceeded(usize),
    #[error("integrand does not decay at the window edge")]
    NoDecay,
    #[error("parameters outside the convergence strip: {0}")]
    OutOfStrip(String),
    #[error("regularization unstable under eta halving (change {0:e})")]
    UnstableEta(f64),
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("operator not positive (spectral floor {0:e})")]
    NotPositive(f64),
    #[error("weight unbounded on test states: {0}")]
    Unbounded(String),
    #[error("truncation leak: {0}")]
    TruncationLeak(String),
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
