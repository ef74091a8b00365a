use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("geometry rejected: {0}")]
    RejectGeometry(String),
    #[error("argument rejected: {0}")]
    RejectArgument(String),
    #[error("gram matrix numerically singular (condition {condition:.3e})")]
    SingularGram { condition: f64 },
    #[error("function vanishes on the contour (min modulus {min_modulus:.3e} at radius {radius})")]
    ZeroOnContour { radius: f64, min_modulus: f64 },
    #[error("newton refinement did not converge (best residual {best_residual:.3e})")]
    ConvergenceFail { best_residual: f64 },
    #[error("blaschke condition violated: partial green sum {partial_sum:.3e} after {terms} zeros")]
    BlaschkeDivergent { partial_sum: f64, terms: usize },
    #[error("period could not be cancelled (residual {residual:.3e})")]
    PeriodUnresolved { residual: f64 },
    #[error("interpolation constraints are linearly dependent")]
    SingularConstraints,
    #[error("linear solver failed: {0}")]
    SolverFail(String),
    #[error("division by a vanishing normal derivative ({0:.3e})")]
    DivideByZero(f64),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Short machine-readable tag used in CLI output.
    pub fn code(&self) -> &'static str {
        match self {
            Error::RejectGeometry(_) => "REJECT_GEOMETRY",
            Error::RejectArgument(_) => "REJECT_ARGUMENT",
            Error::SingularGram { .. } => "SINGULAR_GRAM",
            Error::ZeroOnContour { .. } => "ZERO_ON_CONTOUR",
            Error::ConvergenceFail { .. } => "CONVERGENCE_FAIL",
            Error::BlaschkeDivergent { .. } => "BLASCHKE_DIVERGENT",
            Error::PeriodUnresolved { .. } => "PERIOD_UNRESOLVED",
            Error::SingularConstraints => "SINGULAR_CONSTRAINTS",
            Error::SolverFail(_) => "SOLVER_FAIL",
            Error::DivideByZero(_) => "DIVIDE_BY_ZERO",
        }
    }
}
