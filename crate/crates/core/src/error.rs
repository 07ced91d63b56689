use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{0}")]
    Semantic(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DeformationError {
    #[error("noncriticality fails: |A(2pi)| = {a_two_pi:e} is below {tolerance:e}")]
    Critical { a_two_pi: f64, tolerance: f64 },
    #[error("piecewise-linear bound with {pieces} pieces and margin {margin} is not below A")]
    NotAdequate { pieces: usize, margin: f64 },
    #[error("invalid lower-bound parameters: {0}")]
    InvalidParameters(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CertifyError {
    #[error(transparent)]
    Deformation(#[from] DeformationError),
    #[error("strip [{lo}, {hi}] is not contained in the domain ({omega_lo}, {omega_hi})")]
    StripOutsideDomain { lo: f64, hi: f64, omega_lo: f64, omega_hi: f64 },
    #[error("declared accuracy {declared} is below the computed accuracy {computed}")]
    AccuracyTooSmall { declared: f64, computed: f64 },
    #[error("certificate does not establish existence; refinement refused")]
    NotCertified,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HbmError {
    #[error("Newton did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("Galerkin Jacobian is singular (condition estimate {condition:e})")]
    SingularJacobian { condition: f64 },
    #[error("seed has {got} components, system expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("order {order}: {source}")]
    AtOrder {
        order: usize,
        #[source]
        source: Box<HbmError>,
    },
    #[error("no real order-1 root to start from")]
    NoSeed,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RationalizeError {
    #[error("accuracy budget unreachable: convergents exhausted")]
    BudgetUnreachable,
    #[error("budget ratio must be at least 1, got {0}")]
    InvalidBudget(f64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ShootingError {
    #[error("solution escaped |x| <= {bound} at t = {t} (x = {x})")]
    Blowup { t: f64, x: f64, bound: f64 },
    #[error("step count {0} must be a power of two and at least 64")]
    InvalidSteps(usize),
    #[error("period-map fixed point not found after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("{harmonics} harmonics need at least {needed} samples, trajectory has {samples}")]
    TooManyHarmonics { harmonics: usize, needed: usize, samples: usize },
}

/// Umbrella error for the pipeline and CLI.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Certify(#[from] CertifyError),
    #[error(transparent)]
    Deformation(#[from] DeformationError),
    #[error(transparent)]
    Hbm(#[from] HbmError),
    #[error(transparent)]
    Rationalize(#[from] RationalizeError),
    #[error(transparent)]
    Shooting(#[from] ShootingError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable kind for the CLI error block.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse(ParseError::Syntax { .. }) => "parse_error",
            Error::Parse(ParseError::Semantic(_)) => "semantic_error",
            Error::Parse(ParseError::Io { .. }) | Error::Io(_) => "io_error",
            Error::Certify(CertifyError::Deformation(e)) | Error::Deformation(e) => match e {
                DeformationError::Critical { .. } => "critical",
                DeformationError::NotAdequate { .. } => "not_adequate",
                DeformationError::InvalidParameters(_) => "invalid_parameters",
            },
            Error::Certify(CertifyError::StripOutsideDomain { .. }) => "strip_outside_domain",
            Error::Certify(CertifyError::AccuracyTooSmall { .. }) => "accuracy_too_small",
            Error::Certify(CertifyError::NotCertified) => "not_certified",
            Error::Hbm(HbmError::SingularJacobian { .. }) => "singular_jacobian",
            Error::Hbm(HbmError::DimensionMismatch { .. }) => "dimension_mismatch",
            Error::Hbm(_) => "no_convergence",
            Error::Rationalize(_) => "budget_unreachable",
            Error::Shooting(ShootingError::Blowup { .. }) => "blowup",
            Error::Shooting(_) => "shooting_error",
        }
    }
}
