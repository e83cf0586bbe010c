use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("aspect ratio a^2 = {0} must be a positive rational")]
    InvalidAspect(String),

    #[error("spectral parameter {lambda} lies within {distance:e} of the Laplace eigenvalue {norm}")]
    SingularInput { lambda: f64, norm: f64, distance: f64 },

    #[error("scatterers coincide on the torus")]
    CoincidentScatterers,

    #[error("degenerate Gram matrix: c1 = {c1}, c2 = {c2} (need c1 > |c2|)")]
    DegenerateGram { c1: f64, c2: f64 },

    #[error("identity {name} violated: lhs = {lhs:e}, rhs = {rhs:e}")]
    IdentityViolation { name: &'static str, lhs: f64, rhs: f64 },

    #[error("lambda = {lambda} is within the margin {margin:e} of the Laplace eigenvalue {norm}; refine the gap")]
    NearSingularity { lambda: f64, norm: f64, margin: f64 },

    #[error("lambda = {lambda} lies outside the evaluator domain [{lo}, {hi}]")]
    OutOfDomain { lambda: f64, lo: f64, hi: f64 },

    #[error("unresolved near-double root in gap ({lo}, {hi}): roots {first} and {second}")]
    NearDoubleRoot { lo: f64, hi: f64, first: f64, second: f64 },

    #[error("root validation failed at lambda = {lambda}: {reason}")]
    RootValidation { lambda: f64, reason: String },

    #[error("norm table covers norms <= {cutoff} but {needed} is required")]
    TableTooSmall { cutoff: f64, needed: f64 },

    #[error("input sequence is not sorted at index {index}")]
    Unsorted { index: usize },

    #[error("base set does not weakly interlace with the Laplace spectrum (C = {constant})")]
    NotInterlacing { constant: usize },

    #[error("in gap ({lo}, {hi}): {source}")]
    InGap { lo: f64, hi: f64, source: Box<Error> },

    #[error("matrix is not unitary: |U U^* - I| = {defect:e}")]
    NotUnitary { defect: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),
}
