//! Fractional maximal functions, Riesz potentials and their commutators,
//! with the kernel and weight estimates used to bound them from below and
//! the pointwise sparse-domination check.

mod bounds;
mod domination;
mod kernel;
mod maximal;

pub use bounds::{
    inverse_nu_bound, inverse_nu_sweep, partner_cube, InverseNuBound, InverseNuSweep, PartnerCube,
};
pub use domination::{check_sparse_domination, DominationReport};
pub use kernel::{
    commutator_majorant, riesz_commutator, riesz_potential, KernelMatrix, MAX_KERNEL_CELLS,
};
pub(crate) use maximal::commutator_on_cube;
pub use maximal::{
    frac_maximal, frac_maximal_commutator, frac_maximal_commutator_with_argmax,
    frac_maximal_with_argmax, maximal_commutator, CellSup,
};
