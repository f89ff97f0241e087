use serde::Serialize;

use super::kernel::KernelMatrix;
use crate::dyadic::{GridFunction, LatticeSet};
use crate::error::{invalid, Result};
use crate::sparse::{augment_sparse, build_sparse_cz, SparseKind, SparseOperator};

/// Outcome of comparing the commutator majorant with the sparse sum.
#[derive(Debug, Clone, Serialize)]
pub struct DominationReport {
    /// `max LHS/RHS` over cells with `RHS > 0`.
    pub constant: f64,
    pub worst_cell: Option<usize>,
    /// Cells with `LHS > 0` and `RHS = 0`.
    pub violations: usize,
    /// Cubes per lattice after augmentation.
    pub family_sizes: Vec<usize>,
}

/// Checks `∫|b(x)−b(y)|K_α|f| ≤ C Σ_ℓ (T^α_{S_ℓ,b}|f| + (T^α_{S_ℓ,b})^*|f|)`
/// with `S_ℓ` the stopping family of `|f|` in lattice `ℓ`, augmented by the
/// oscillation stopping cubes of `b`.
pub fn check_sparse_domination(
    f: &GridFunction,
    b: &GridFunction,
    alpha: f64,
    lattices: &LatticeSet,
    ratio: f64,
) -> Result<DominationReport> {
    f.check_same_grid(b)?;
    if lattices.grid() != f.grid() {
        return Err(invalid("function and lattices live on different grids"));
    }
    let kernel = KernelMatrix::new(*f.grid(), alpha)?;
    let af = f.abs();
    let lhs = kernel.apply_majorant(af.values(), b.values());
    let mut rhs = vec![0.0; lhs.len()];
    let mut family_sizes = Vec::new();
    for lat in lattices.lattices() {
        let s = build_sparse_cz(&af, lat, ratio)?;
        let aug = augment_sparse(&s, b)?;
        family_sizes.push(aug.family.len());
        for kind in [SparseKind::Symbol, SparseKind::SymbolAdjoint] {
            let op = SparseOperator::new(&aug.family, kind, alpha, Some(b))?;
            for (r, v) in rhs.iter_mut().zip(op.apply(af.values())) {
                *r += v;
            }
        }
    }
    let scale = lhs.iter().fold(0.0f64, |m, v| m.max(*v));
    let mut constant: f64 = 0.0;
    let mut worst_cell = None;
    let mut violations = 0;
    for (i, (l, r)) in lhs.iter().zip(&rhs).enumerate() {
        if *r > 0.0 {
            let c = l / r;
            if c > constant {
                constant = c;
                worst_cell = Some(i);
            }
        } else if *l > 1e-14 * scale {
            violations += 1;
        }
    }
    Ok(DominationReport {
        constant,
        worst_cell,
        violations,
        family_sizes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::Grid;

    #[test]
    fn constant_symbol_is_trivially_dominated() {
        let g = Grid::new(1, 6).unwrap();
        let f = GridFunction::from_fn(g, |x| x[0]).unwrap();
        let r = check_sparse_domination(
            &f,
            &GridFunction::constant(g, 1.0),
            0.5,
            &LatticeSet::one_third(g),
            2.0,
        )
        .unwrap();
        assert_eq!(r.constant, 0.0);
        assert_eq!(r.violations, 0);
    }

    #[test]
    fn homogeneous_in_f() {
        let g = Grid::new(1, 7).unwrap();
        let mut v = vec![0.0; 128];
        v[70] = 1.0;
        let f = GridFunction::new(g, v).unwrap();
        let b = GridFunction::from_fn(g, |x| if x[0] < 0.5 { 0.0 } else { 1.0 }).unwrap();
        let l = LatticeSet::one_third(g);
        let a = check_sparse_domination(&f, &b, 0.5, &l, 2.0).unwrap();
        let f7 = f.map(|x| 7.0 * x).unwrap();
        let c = check_sparse_domination(&f7, &b, 0.5, &l, 2.0).unwrap();
        assert!(a.constant > 0.0 && a.constant.is_finite());
        assert!((a.constant - c.constant).abs() < 1e-9 * a.constant);
    }
}
