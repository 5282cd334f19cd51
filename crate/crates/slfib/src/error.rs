use thiserror::Error;

/// Error tokens shared by every module. The `Display` form is the token the
/// command line prints on standard error.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SlError {
    #[error("degenerate-frame")]
    DegenerateFrame,
    #[error("out-of-domain: ({x}, {y})")]
    OutOfDomain { x: f64, y: f64 },
    #[error("oracle-diverged")]
    OracleDiverged,
    #[error("solver-diverged: residual {residual:e}")]
    SolverDiverged { residual: f64 },
    #[error("continuation-failed at a = {a:e}")]
    ContinuationFailed { a: f64 },
    #[error("incompatible-boundary")]
    IncompatibleBoundary,
    #[error("monodromy-defect: {defect:e}")]
    MonodromyDefect { defect: f64 },
    #[error("nonisolated-singularities")]
    NonisolatedSingularities,
    #[error("probe-too-close")]
    ProbeTooClose,
    #[error("circle-hits-zero")]
    CircleHitsZero,
    #[error("winding-unresolved")]
    WindingUnresolved,
    #[error("identical-fields")]
    IdenticalFields,
    #[error("bracket-failed")]
    BracketFailed,
    #[error("outside-total-space")]
    OutsideTotalSpace,
    #[error("invalid-input: {0}")]
    InvalidInput(String),
    #[error("io: {0}")]
    Io(String),
}

impl SlError {
    /// Short machine token, without the attached detail.
    pub fn token(&self) -> &'static str {
        match self {
            SlError::DegenerateFrame => "degenerate-frame",
            SlError::OutOfDomain { .. } => "out-of-domain",
            SlError::OracleDiverged => "oracle-diverged",
            SlError::SolverDiverged { .. } => "solver-diverged",
            SlError::ContinuationFailed { .. } => "continuation-failed",
            SlError::IncompatibleBoundary => "incompatible-boundary",
            SlError::MonodromyDefect { .. } => "monodromy-defect",
            SlError::NonisolatedSingularities => "nonisolated-singularities",
            SlError::ProbeTooClose => "probe-too-close",
            SlError::CircleHitsZero => "circle-hits-zero",
            SlError::WindingUnresolved => "winding-unresolved",
            SlError::IdenticalFields => "identical-fields",
            SlError::BracketFailed => "bracket-failed",
            SlError::OutsideTotalSpace => "outside-total-space",
            SlError::InvalidInput(_) => "invalid-input",
            SlError::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for SlError {
    fn from(e: std::io::Error) -> Self {
        SlError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, SlError>;
