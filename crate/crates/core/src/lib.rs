//! Capability of finite class-two groups of odd prime exponent.
//!
//! A `d`-generated such group is a quotient of the free class-two
//! exponent-`p` group by a subgroup of its commutator subgroup; that subgroup
//! is a subspace `X` of `V = F_p^(d choose 2)`. Capability reduces to the
//! linear condition `X = Z_X` (see [`engine`]), which this crate computes
//! exactly and cross-checks against collection in a class-three group
//! ([`oracle`]).

pub mod engine;
pub mod enumeration;
pub mod error;
pub mod field;
pub mod linalg;
pub mod oracle;
pub mod phi;
pub mod presentation;
pub mod suites;

pub use engine::{compute_y, compute_z, is_capable, reduce_special, CapabilityReport};
pub use enumeration::{census, count_subspaces, CensusConfig, CensusReport, SubspaceIterator};
pub use error::{Error, Result};
pub use field::{FpScalar, Prime};
pub use linalg::{FpMatrix, Subspace};
pub use oracle::{NilpotentProduct, NormalForm, Word};
pub use phi::{BasisIndex, PairIndex, PhiStructure, TripleIndex};
pub use presentation::{GroupInput, Presentation};
