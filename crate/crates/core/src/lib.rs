//! Exact algebraic machinery for subspace designs over GF(q): canonical
//! matrices and the subspace lattice, Grassmannian enumeration through
//! q-grid paths, joins and their decompositions, (N,t)-partitions with the
//! Latin-square combiner, large-set recursion with lazy lambda queries, and
//! the Kramer-Mesner orbit/solver pipeline.

pub mod data;
pub mod decomp;
pub mod design;
pub mod error;
pub mod field;
pub mod grassmann;
pub mod joins;
pub mod km;
pub mod partition;
pub mod subspace;
pub mod tables;

pub use error::{Error, Result};
pub use field::{Field, FieldElement, FieldSpec, PrimitivePolynomial};
pub use grassmann::{gaussian_binomial, GrassmannianIter, GridPath, PathStep};
pub use subspace::{MatGf, Subspace};

/// Arbitrary-precision nonnegative counts.
pub type BigCount = num_bigint::BigUint;
