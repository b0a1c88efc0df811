//! Perron–Frobenius structure of nonnegative matrices viewed as positive
//! operators on the Banach lattice ℝⁿ.
//!
//! The crate computes certificates rather than bare numbers: invariant
//! coordinate ideals witnessing reducibility, the peripheral permutation
//! structure of an operator, LP witnesses for the super right/left
//! commutants, and ideal-triangularizing chains proving that the commutator
//! of a semi-commuting pair is nilpotent.

pub mod commutant;
pub mod digraph;
pub mod error;
pub mod lattice;
pub mod perron;
pub mod spectral;
pub mod triangularize;
pub mod verify;

pub use error::{Error, Result};
pub use lattice::{
    is_invariant_ideal, is_quasi_interior, support_of, CoordinateIdeal, PosMatrix, Tolerances,
    Vector,
};
