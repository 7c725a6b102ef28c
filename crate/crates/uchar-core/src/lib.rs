//! Exact character theory of finite groups through the convolution algebra
//! of class functions: minimal idempotents, admissible pairs, Heisenberg
//! characters, finite Fourier decomposition, and a reduction process that
//! constructs an admissible pair behind every irreducible character of a
//! nilpotent group. Everything is computed in exact cyclotomic arithmetic
//! and cross-validated against an independent monomial-induction oracle.

pub mod admissible;
pub mod catalog;
pub mod conv;
pub mod cyclo;
pub mod dual;
pub mod fourier;
pub mod group;
pub mod oracle;
pub mod reduction;

pub use admissible::AdmissiblePair;
pub use conv::{ClassFunction, GFunction};
pub use cyclo::CycloNumber;
pub use dual::{DualGroup, MultChar};
pub use group::{FiniteGroup, Group, QuotientMap, Subgroup};
