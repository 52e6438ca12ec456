use thiserror::Error;

/// Errors surfaced by the library. Numerical preconditions (degenerate
/// lattices, near-pole evaluation points, resonant recursion orders) are
/// reported, never silently worked around.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate lattice: |discriminant| {disc:.3e} below tolerance {tol:.3e}")]
    DegenerateLattice { disc: f64, tol: f64 },
    #[error("evaluation point too close to a lattice point (|z| = {dist:.3e})")]
    NearLatticePoint { dist: f64 },
    #[error("evaluation point too close to a pole (distance {dist:.3e})")]
    NearPole { dist: f64 },
    #[error("value {value} is not a root of the invariant cubic (residual {residual:.3e})")]
    NotARoot { value: String, residual: f64 },
    #[error("addition-formula arguments are degenerate: wp(x1) == wp(x2)")]
    DegenerateArguments,
    #[error("dispersion coefficient p must be nonzero")]
    ZeroDispersion,
    #[error("squared modulus M vanishes at the evaluation point")]
    ZeroModulus,
    #[error("leading-order balance is degenerate (double root at zero)")]
    DegenerateLeading,
    #[error("resonant recursion order {order}: coefficient system is singular")]
    ResonantIndex { order: usize },
    #[error("family has {have} terms, need at least {need}")]
    InsufficientTerms { have: usize, need: usize },
    #[error("invalid free constant: {0}")]
    InvalidFreeConstant(String),
    #[error("failed to invert wp at the prescribed value (best residual {residual:.3e})")]
    InversionFailure { residual: f64 },
    #[error("branch tracking failed: step crossed a pole or cut")]
    BranchCut,
    #[error("operation requires csi != 0")]
    CsiZeroRestriction,
    #[error("could not place the requested samples: {0}")]
    Unresolvable(String),
    #[error("period computation failed to produce a consistent basis")]
    PeriodBasis,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
