//! Operator-space Grothendieck toolkit.
//!
//! Numerical machinery for bilinear forms on subspaces of matrix algebras:
//! Haagerup tensor norms and their balanced representations, jointly
//! completely bounded norm estimates, state certificates and decompositions
//! into completely bounded pieces, truncated Fock-space circular systems,
//! Schur multiplier splittings and maps into the operator Hilbert space.
//!
//! Everything is finite dimensional and dense. Randomized routines take an
//! explicit seed and are deterministic for a fixed seed.

pub mod error;
pub mod fock;
pub mod gtforms;
pub mod haagerup;
pub mod linalg;
pub mod lmi;
pub mod lp;
pub mod ohmaps;
pub mod opspace;
pub mod random;
pub mod schur;
pub mod suite;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, HermitianMatrix, C64};
