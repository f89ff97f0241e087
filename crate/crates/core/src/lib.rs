//! Computational harmonic analysis on dyadic grids.
//!
//! The crate realizes two-weight (Bloom) objects on the unit cube `[0,1)^n`
//! for `n ∈ {1, 2}`: Muckenhoupt characteristics, weighted mean oscillation
//! and vanishing-oscillation moduli, sparse families and sparse operators,
//! fractional maximal and Riesz-potential commutators, operator-norm
//! brackets between weighted Lebesgue spaces, and the two numerical
//! surrogates for compactness (tail-norm profiles and the separated-sequence
//! falsifier).
//!
//! Everything is piecewise constant on the finest dyadic cells, so every
//! average, oscillation and supremum over cubes is computed exactly on the
//! grid.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod dyadic;
pub mod error;
pub mod ops;
pub mod oscillation;
mod quad;
pub mod sparse;
pub mod symbols;
pub mod weights;

pub use dyadic::{CellBox, DyadicCube, Grid, GridFunction, LatticeSet, PrefixSum, ShiftedLattice};
pub use error::{Error, Result};
pub use weights::{BloomTriple, Weight, WeightSpec};
