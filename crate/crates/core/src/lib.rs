//! Exact computation of fixed-point invariants for self-maps of pairs of
//! finite complexes.
//!
//! The library takes a pair (B, A) of finite complexes, either simplicial
//! (with a simplicial self-map given on vertices) or cellular (with the map
//! given on fundamental-group generators and higher cells), and computes:
//!
//! * Lefschetz numbers of the restriction to A and of the quotient B/A,
//!   over the rationals, both at chain level and on homology;
//! * Reidemeister traces valued in twisted-conjugacy classes of the
//!   abelianized fundamental groups, computed from equivariant cellular
//!   chain data on universal covers;
//! * Nielsen-type lower bounds for the fixed-point count of maps of pairs;
//! * a removability verdict combining the vanishing of the traces with
//!   dimension, codimension, and manifold hypotheses supplied by the caller.
//!
//! All arithmetic is exact: arbitrary-precision integers, rationals, and
//! group rings of finitely generated abelian groups. Twisted-conjugacy data
//! is computed on abelianizations; results are flagged whenever that might
//! be a coarsening of the honest (nonabelian) class set.
//!
//! Scalar types are generic through [`matrix::Matrix`]. The concrete
//! aliases used by the pipeline are exported at the crate root.

pub mod complexes;
pub mod covers;
pub mod error;
pub mod fundamental_group;
pub mod invariants;
pub mod matrix;
pub mod shadow_algebra;
pub mod snf;

/// Exact integer scalar used throughout the pipeline.
pub type Int = num_bigint::BigInt;
/// Exact rational scalar used for homology cross-checks.
pub type Rat = num_rational::BigRational;
/// Dense matrix over [`Int`].
pub type IntMatrix = matrix::Matrix<Int>;
/// Dense matrix over [`Rat`].
pub type RatMatrix = matrix::Matrix<Rat>;

pub use error::{CoreError, Diagnostic, Severity};

/// Convenience constructor for `Int` from a machine integer.
pub fn int(v: i64) -> Int {
    Int::from(v)
}

/// Convenience constructor for `Rat` from a machine integer.
pub fn rat(v: i64) -> Rat {
    Rat::from_integer(Int::from(v))
}

/// The value as an `i64`, when it fits.
pub fn int_to_i64(v: &Int) -> Option<i64> {
    num_traits::ToPrimitive::to_i64(v)
}
