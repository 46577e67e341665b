use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("closure exceeded the order cap of {cap}")]
    ClosureExceedsCap { cap: usize },
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("elements belong to different groups")]
    GroupMismatch,
    #[error("word uses generator {letter} but the group has {k} generators")]
    AlphabetMismatch { letter: usize, k: usize },
    #[error("marked groups have different generator counts ({0} vs {1})")]
    KMismatch(usize, usize),
    #[error("sequence did not stabilize at radius {0}")]
    NotStabilized(usize),
    #[error("eigensolver did not converge: {0}")]
    ConvergenceFailure(String),
    #[error("need at least 3 reports with finite gap, got {0}")]
    InsufficientData(usize),
    #[error("element is not self-adjoint (defect {0:e})")]
    NotSelfAdjoint(f64),
    #[error("support of the target leaves B(1, 2R) at element {0}")]
    SupportExceedsBall(usize),
    #[error("kernel sum of squares is not in the image of the group algebra (defect {0:e})")]
    NotInGroupAlgebra(f64),
    #[error("propagation {found} exceeds the bound {bound}")]
    PropagationExceeded { found: u64, bound: u64 },
    #[error("partial isomorphism does not reach radius {0}")]
    BallTooSmall(usize),
    #[error("entry ({0}, {1}) crosses blocks of a plain disjoint union")]
    NotWithinBlocks(usize, usize),
    #[error("cochain degree {0} is not supported (only 1 and 2)")]
    DegreeUnsupported(usize),
    #[error("linear algebra size {size} exceeds cap {cap}")]
    CapExceeded { size: usize, cap: usize },
    #[error("cochain is not a cocycle (defect {0:e})")]
    NotACocycle(f64),
    #[error("no coboundary solution (residual {0:e})")]
    NoSolution(f64),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
