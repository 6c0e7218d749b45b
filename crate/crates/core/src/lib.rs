//! Computational kernels for Fraïssé-style chain constructions over group
//! categories, together with the generic chain engine itself.
//!
//! # Layout
//!
//! * [`word`] — freely reduced words in free groups: reduction, roots,
//!   conjugacy, the three-squares scan.
//! * [`lattice`] — exact integer lattice algebra in ℤⁿ: Hermite/Smith normal
//!   forms, pure closures, direct complements, tuple amalgamation, torsion-free
//!   pushouts, automorphism extension.
//! * [`tower`] — groups built from a free base by iterated centralizer
//!   extensions and free factors: Britton reduction, decidable equality,
//!   discriminating retractions, ℤ[t]-exponentiation.
//! * [`amalgam`] — constructive amalgamation of towers: centralizer-extension
//!   amalgams, the interleaved limit-group amalgam, free-product joint
//!   embedding, and the product-of-squares obstruction demo.
//! * [`engine`] — the seeded, deterministic chain builder over pluggable
//!   category specifications, with locate/back-and-forth/homogeneity/axiom
//!   auditing utilities.
//!
//! All values are immutable and all operations pure, except for the explicit
//! exponentiation session [`ZtSession`]. Searches are verified before
//! anything is returned: a result is never emitted on heuristic grounds.

pub mod amalgam;
pub mod engine;
pub mod error;
pub mod lattice;
pub mod tower;
pub mod word;

pub use amalgam::{
    ap_failure_demo, ice_amalgamate, jep_product, limit_group_amalgam, ApFailureReport, Cocone,
    ConjugacyWitness, JepProduct, LimitAmalgam, Span,
};
pub use engine::{build_chain, check_axioms, extension_property_test, Category, ChainState};
pub use error::{Error, Result};
pub use lattice::{IntLattice, IntMatrix, TupleZ};
pub use tower::{Hom, Polynomial, Tower, TowerStep, ZtSession};
pub use word::{Alphabet, Word};
