use super::SparseFamily;
use crate::dyadic::{DyadicCube, GridFunction, PrefixSum, ShiftedLattice};
use crate::error::{invalid, Result};

/// Calderón–Zygmund stopping family of `|f|` with ratio `Λ > 1`.
///
/// Starting from the roots of `lattice`, the children of a selected cube `Q`
/// are the maximal `R ⊊ Q` with `⟨|f|⟩_R > Λ⟨|f|⟩_Q`, and
/// `E_Q = Q \ ∪R`. The result is `(1 − 1/Λ)`-sparse.
pub fn build_sparse_cz(
    f: &GridFunction,
    lattice: &ShiftedLattice,
    ratio: f64,
) -> Result<SparseFamily> {
    if !(ratio > 1.0) || !ratio.is_finite() {
        return Err(invalid(format!(
            "stopping ratio must exceed 1, got {ratio}"
        )));
    }
    if f.grid() != lattice.grid() {
        return Err(invalid("function and lattice live on different grids"));
    }
    let grid = *f.grid();
    let table = PrefixSum::new(&f.abs());
    let mut members = Vec::new();
    let mut stack: Vec<DyadicCube> = lattice.roots();
    let mut taken = vec![false; grid.cell_count()];
    while let Some(q) = stack.pop() {
        let qb = lattice.box_unchecked(&q);
        let threshold = ratio * table.average(&qb);
        let mut selected = Vec::new();
        let mut pending = lattice.children(&q);
        while let Some(r) = pending.pop() {
            if table.average(&lattice.box_unchecked(&r)) > threshold {
                selected.push(r);
            } else {
                pending.extend(lattice.children(&r));
            }
        }
        for r in &selected {
            lattice
                .box_unchecked(r)
                .for_each_cell(&grid, |c| taken[c] = true);
        }
        let mut witness = Vec::with_capacity(qb.cell_count(&grid));
        qb.for_each_cell(&grid, |c| {
            if !taken[c] {
                witness.push(c);
            }
        });
        for r in &selected {
            lattice
                .box_unchecked(r)
                .for_each_cell(&grid, |c| taken[c] = false);
        }
        members.push((q, witness));
        stack.extend(selected);
    }
    SparseFamily::new(lattice.clone(), 1.0 - 1.0 / ratio, members)
}

/// A `1/2`-sparse family with cubes at every even level, independent of
/// any function.
///
/// Each member `Q` selects the first child of each of its children, so the
/// selected cubes sit two levels down and cover `2^-n` of `Q`; `E_Q` is the
/// rest. In one dimension the members at level `2m` form a Cantor-like set
/// of `2^m` cubes, so every scale is represented away from a single point.
pub fn spread_family(lattice: &ShiftedLattice) -> Result<SparseFamily> {
    let grid = *lattice.grid();
    let mut members = Vec::new();
    let mut stack: Vec<DyadicCube> = lattice.roots();
    while let Some(q) = stack.pop() {
        let qbox = lattice.cube_box(&q)?;
        let picked: Vec<DyadicCube> = lattice
            .children(&q)
            .iter()
            .filter_map(|c| lattice.children(c).first().copied())
            .collect();
        let mut inside = vec![false; grid.cell_count()];
        for c in &picked {
            for cell in lattice.cube_box(c)?.cells(&grid) {
                inside[cell] = true;
            }
        }
        let witness: Vec<usize> = qbox
            .cells(&grid)
            .into_iter()
            .filter(|&c| !inside[c])
            .collect();
        members.push((q, witness));
        stack.extend(picked);
    }
    SparseFamily::new(lattice.clone(), 0.5, members)
}

#[cfg(test)]
mod tests {
    use super::super::verify_sparse;
    use super::*;
    use crate::dyadic::Grid;

    #[test]
    fn spread_family_is_sparse_at_every_even_level() {
        let g = Grid::new(1, 8).unwrap();
        let lat = ShiftedLattice::new(g, 0).unwrap();
        let s = spread_family(&lat).unwrap();
        assert!(verify_sparse(&s).sparse);
        let levels: Vec<usize> = (0..=8)
            .map(|k| s.members().iter().filter(|m| m.cube.level == k).count())
            .collect();
        assert_eq!(levels, vec![1, 0, 2, 0, 4, 0, 8, 0, 16]);
    }

    #[test]
    fn constant_gives_root_only() {
        let g = Grid::new(1, 6).unwrap();
        let lat = ShiftedLattice::new(g, 0).unwrap();
        let s = build_sparse_cz(&GridFunction::constant(g, 1.0), &lat, 2.0).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.members()[0].witness.len(), 64);
        let z = build_sparse_cz(&GridFunction::constant(g, 0.0), &lat, 2.0).unwrap();
        assert_eq!(z.len(), 1);
    }

    #[test]
    fn spike_selects_a_chain() {
        let g = Grid::new(1, 6).unwrap();
        let lat = ShiftedLattice::new(g, 0).unwrap();
        let mut v = vec![0.0; 64];
        v[37] = 1.0;
        let s = build_sparse_cz(&GridFunction::new(g, v).unwrap(), &lat, 2.0).unwrap();
        // averages double per level, so every second level is selected
        assert_eq!(s.len(), 4);
        assert!(verify_sparse(&s).sparse);
        let s3 = build_sparse_cz(
            &GridFunction::new(g, {
                let mut v = vec![0.0; 64];
                v[37] = 1.0;
                v
            })
            .unwrap(),
            &lat,
            1.5,
        )
        .unwrap();
        assert_eq!(s3.len(), 7);
        assert!(verify_sparse(&s3).sparse);
        assert!(s3
            .members()
            .iter()
            .any(|m| m.cube.level == 6 && m.cube.index[0] == 37));
    }

    #[test]
    fn shifted_lattice_families_verify() {
        let g = Grid::new(2, 5).unwrap();
        let f =
            GridFunction::from_fn(g, |x| 1.0 / ((x[0] - 0.4).hypot(x[1] - 0.7) + 0.01)).unwrap();
        for shift in 0..9 {
            let lat = ShiftedLattice::new(g, shift).unwrap();
            let s = build_sparse_cz(&f, &lat, 2.0).unwrap();
            let v = verify_sparse(&s);
            assert!(v.sparse, "shift {shift}: {:?}", v.certificate);
            assert!(s.len() > 1);
        }
    }
}
