use thiserror::Error;

/// Errors raised by the library. Variants carry enough context to be turned
/// into machine-readable diagnostics by the command line front end.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("point is not on the model space (residual {0:e})")]
    OffSpace(f64),
    #[error("anchor is not on the interface (residual {0:e})")]
    OffSphere(f64),
    #[error("degenerate frame (Gram determinant {0:e})")]
    DegenerateFrame(f64),
    #[error("finite-difference step {0:e} is below 1e-7")]
    StepUnderflow(f64),
    #[error("value out of range: {0}")]
    OutOfRange(String),
    #[error("malformed partition: {0}")]
    MalformedPartition(String),
    #[error("point is the north pole")]
    NorthPole,
    #[error("point is not in the open northern hemisphere")]
    BelowEquator,
    #[error("no cell meets the target space")]
    EmptyRetainedSet,
    #[error("partition is not a cluster: {0}")]
    NotCluster(String),
    #[error("numeric degeneracy: {0}")]
    Degenerate(String),
    #[error("partition is not Möbius-flat (residual {residual:e}, |xi| {norm})")]
    Infeasible { residual: f64, norm: f64 },
    #[error("potential is not positive at a sample ({0:e})")]
    NonPositivePotential(f64),
    #[error("triple junction ({0},{1},{2}) is empty")]
    EmptyJunction(usize, usize, usize),
    #[error("junction could not be resolved: {0}")]
    UnresolvedJunction(String),
    #[error("constraint violated: {0}")]
    ConstraintViolation(String),
    #[error("admissible space is empty")]
    EmptyAdmissibleSpace,
    #[error("mesh is not closed: {0}")]
    OpenMesh(String),
    #[error("dense solve limited to {limit} unknowns, got {got}")]
    TooLarge { limit: usize, got: usize },
    #[error("V Ric^V is not positive definite (min eigenvalue {0:e})")]
    IndefiniteRicV(f64),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
