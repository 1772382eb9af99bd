use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },
    #[error("span is not Jordan-closed: product of basis elements {i} and {j} leaves it (residual {residual:.3e})")]
    NotJordanClosed { i: usize, j: usize, residual: f64 },
    #[error("identity is not in the span (residual {residual:.3e})")]
    MissingIdentity { residual: f64 },
    #[error("element is not in the algebra (residual {residual:.3e})")]
    NotMember { residual: f64 },
    #[error("element is not idempotent (deviation {deviation:.3e})")]
    NotIdempotent { deviation: f64 },
    #[error("algebra is not associative")]
    NotAssociative,
    #[error("invalid density matrix: {reason} ({value:.3e})")]
    InvalidState { reason: &'static str, value: f64 },
    #[error("conditioning on a null event (probability {probability:.3e})")]
    NullConditioning { probability: f64 },
    #[error("event is not an atom (trace {trace:.3e})")]
    NotAtom { trace: f64 },
    #[error("functional is not dominated by the state (violation {violation:.3e})")]
    NotDominated { violation: f64 },
    #[error("no representing element (residual {residual:.3e})")]
    NoRepresentingElement { residual: f64 },
    #[error("negative part carries state mass {mass:.3e}")]
    NegativePartNotNull { mass: f64 },
    #[error("no conditional expectation: compatibility fails (lhs {lhs}, rhs {rhs})")]
    NoConditionalExpectation { lhs: f64, rhs: f64 },
    #[error("conditional expectation residual {residual:.3e} exceeds tolerance")]
    Inconsistent { residual: f64 },
    #[error("expected {expected} images, got {found}")]
    ImageCount { expected: usize, found: usize },
    #[error("map is not unital (deviation {deviation:.3e})")]
    NotUnital { deviation: f64 },
    #[error("not a Jordan homomorphism on basis pair ({i}, {j}) (deviation {deviation:.3e})")]
    NotHomomorphism { i: usize, j: usize, deviation: f64 },
    #[error("observable is not injective")]
    NotInjective,
    #[error("state is not faithful on the algebra")]
    NotFaithful,
    #[error("invalid time grid: {0}")]
    InvalidTimeGrid(&'static str),
    #[error("time index {0} is out of range")]
    TimeIndex(usize),
    #[error("observables do not share one target algebra")]
    TargetMismatch,
    #[error("source algebras differ across time points")]
    SourceMismatch,
    #[error("kernel ({s}, {t}) fails sampled positivity (min eigenvalue {min_eigenvalue:.3e})")]
    KernelNotPositive { s: usize, t: usize, min_eigenvalue: f64 },
    #[error("map is singular or ill-conditioned (condition number {condition:.3e})")]
    Singular { condition: f64 },
    #[error("no principal logarithm: eigenvalue {re} + {im}i lies on the closed negative real axis")]
    NoPrincipalLogarithm { re: f64, im: f64 },
    #[error("algebra is not closed under commutators with H (residual {residual:.3e})")]
    NotCommutatorClosed { residual: f64 },
    #[error("precondition violated: {0}")]
    Precondition(&'static str),
    #[error("numerical failure: {0}")]
    Numerical(&'static str),
}
