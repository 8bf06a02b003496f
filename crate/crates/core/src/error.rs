use thiserror::Error;

/// Everything that can go wrong in fglab-core.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("modulus p^N = {p}^{n} does not fit the coefficient arithmetic")]
    ModulusTooLarge { p: u64, n: u32 },
    #[error("extension polynomial is not monic of positive degree")]
    NotMonic,
    #[error("ring is not local: {0}")]
    NotLocal(String),
    #[error("operands live in different coefficient rings")]
    RingMismatch,
    #[error("operands have different numbers of variables ({0} vs {1})")]
    ArityMismatch(usize, usize),
    #[error("element is not a unit")]
    NonUnit,
    #[error("constant term is not in the maximal ideal")]
    NonNilpotentConstantTerm,
    #[error("series has no Weierstrass degree (every coefficient lies in the maximal ideal)")]
    NoWeierstrassDegree,
    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),
    #[error("rational coefficient of {monomial} has denominator divisible by p")]
    IntegralityFailure { monomial: String },
    #[error("Weierstrass curve is singular over the residue field")]
    SingularCurve,
    #[error("Weierstrass degree {0} is not a power of p")]
    WdegNotPPower(usize),
    #[error("[p] has no Weierstrass degree: infinite height")]
    InfiniteHeight,
    #[error("group rank {rank} exceeds height {height}")]
    RankExceedsHeight { rank: usize, height: usize },
    #[error("group is not a p-group for p = {0}")]
    NotPGroup(u64),
    #[error("unsupported group shape: {0}")]
    UnsupportedShape(String),
    #[error("Weierstrass division leaves a nonzero remainder at degree {0}")]
    NonzeroRemainder(usize),
    #[error("series is not invariant under the kernel: residual at {0}")]
    NotInvariant(String),
    #[error("exact division failed: {0}")]
    DivisionFails(String),
    #[error("series is not a coordinate")]
    NotACoordinate,
    #[error("malformed input: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
