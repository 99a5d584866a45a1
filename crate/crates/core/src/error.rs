use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid pair ({u}, {v}): need 1 <= u < v")]
    PairOutOfRange { u: u64, v: u64 },
    #[error("pair ({u}, {v}) is not reduced (gcd = {gcd})")]
    NotReduced { u: u64, v: u64, gcd: u64 },
    #[error("invalid digit sequence: {0}")]
    InvalidDigits(&'static str),
    #[error("integer overflow while reconstructing a continued fraction")]
    Overflow,
    #[error("cost identically zero")]
    ZeroCost,
    #[error("invalid cost value {0}: costs must be finite and non-negative")]
    InvalidCost(f64),
    #[error("gauss map argument {0} outside (0, 1]")]
    GaussMapDomain(f64),
    #[error("moment order {0} exceeds the supported maximum of 12")]
    MomentOrder(u32),
    #[error("invalid bound n = {0}")]
    InvalidBound(u64),
    #[error("invalid discretization: {0}")]
    InvalidParams(String),
    #[error("Re(s) = {0} must exceed 1/2")]
    HalfPlane(f64),
    #[error("|omega| = {0} outside the perturbative range")]
    OmegaOutOfRange(f64),
    #[error("no spectral gap: |lambda1| = {lambda1}, |lambda2| = {lambda2}")]
    NoSpectralGap { lambda1: f64, lambda2: f64 },
    #[error("eigensolver failed to converge")]
    Eigensolver,
    #[error("derivative {which} unreliable: Richardson disagreement {disagreement:e}")]
    DerivativeQuality {
        which: &'static str,
        disagreement: f64,
    },
    #[error("operator not contracting: spectral radius {0}")]
    NotContracting(f64),
    #[error("digit enumeration of {0} tuples exceeds the 1e8 guard")]
    CombinatorialExplosion(f64),
    #[error("denominator law violated for digits {digits:?}: derivative denominator {delta}, reconstructed v {v}")]
    DenominatorLaw {
        digits: Vec<u64>,
        delta: u64,
        v: u64,
    },
    #[error("{0}")]
    Precondition(String),
}
