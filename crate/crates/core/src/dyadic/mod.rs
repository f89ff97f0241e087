//! Dyadic grids on `[0,1)^n`, their one-third shifted lattices, and exact
//! integration of piecewise-constant functions.

mod function;
mod geometry;
pub mod io;
mod lattice;

pub use function::{GridFunction, PrefixSum};
pub use geometry::{CellBox, Grid};
pub use lattice::{DyadicCube, LatticeSet, ShiftedLattice};
