//! Decides whether two finite algebras of the same type are independent, i.e.
//! whether some binary term `t(x, y)` satisfies `t ≈ x` in one and `t ≈ y` in
//! the other.
//!
//! Two routes are provided: a sweep of two-generated subalgebras of small
//! products `A^r × B^s`, valid when a Mal'cev or edge term is known, and the
//! general closure in `A^(A²) × B^(B²)` that also yields a witness term.

pub mod algebra;
pub mod catalog;
pub mod cli;
pub mod error;
pub mod format;
pub mod identities;
pub mod independence;
pub mod pairing;
pub mod relations;
pub mod subpower;
pub mod term;

pub use algebra::{Algebra, Elem, Signature, Symbol};
pub use error::{Error, Result};
pub use term::Term;
