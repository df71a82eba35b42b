//! Restricted-weight combinatorics and affine dynamics for proper affine
//! actions of real reductive groups.
//!
//! The exact layer ([`root_system`], [`weights`], [`x0`]) works in rational
//! arithmetic. The numerical layer ([`rep`], [`dynamics`], [`group`]) works
//! in `f64` on explicit matrix realizations.

pub mod dynamics;
pub mod exact;
pub mod group;
pub mod linalg;
pub mod rep;
pub mod root_system;
pub mod weights;
pub mod x0;

pub use dynamics::{AffineContext, AffineElement, AffineMap, DynamicalSplit, MargulisData};
pub use exact::QVec;
pub use rep::{check_criterion, ConcreteRep, CriterionReport, GroupKind, RepKind};

/// Exact scalar used throughout the combinatorial layer.
pub type Rat = num_rational::Ratio<i64>;
/// Arbitrary-precision rational, available to the generic exact routines.
pub type BigRat = num_rational::BigRational;
/// Floating scalar of the numerical layer.
pub type Real = f64;
/// Dense real matrix.
pub type Mat = nalgebra::DMatrix<f64>;
/// Dense real vector.
pub type Vector = nalgebra::DVector<f64>;



pub use root_system::{Family, RootSystemData, WeylElement};
pub use weights::{RepClassification, WeightSet};
pub use x0::{TypePartition, X0Certificate};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unsupported root system {0}: {1}")]
    Unsupported(String, String),
    #[error("Weyl group too large: more than {cap} elements (reached {partial})")]
    TooLarge { cap: usize, partial: usize },
    #[error("highest weight is not dominant integral: {0}")]
    NotDominant(String),
    #[error("multiplicities unavailable for non-split")]
    NonSplit,
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("lemma violated: {0}")]
    LemmaViolated(String),
    #[error("criterion trivially fails: {0}")]
    TriviallyFails(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("not rho-regular: {0}")]
    NotRegular(String),
    #[error("near-degenerate: {0}")]
    NearDegenerate(String),
    #[error("indeterminate proximality (gap {0})")]
    IndeterminateProximality(f64),
    #[error("quasi-translation violation: {0}")]
    QuasiTranslation(String),
    #[error("floating-point precision exhausted: rounding floor {0:.3e}")]
    PrecisionExhausted(f64),
    #[error("degenerate pair: {0}")]
    DegeneratePair(String),
    #[error("transversality failed between generators {0} and {1}")]
    Transversality(usize, usize),
    #[error("increase power: measured contraction strengths {measured:?} exceed {threshold}")]
    IncreasePower { measured: Vec<f64>, threshold: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
