use rayon::prelude::*;

use crate::dyadic::{CellBox, GridFunction, LatticeSet};
use crate::error::{invalid, Result};

/// Per-cell supremum together with a cube attaining it.
#[derive(Debug, Clone)]
pub struct CellSup {
    pub values: Vec<f64>,
    pub argmax: Vec<CellBox>,
}

fn check_alpha(alpha: f64, n: usize, open_at_zero: bool) -> Result<()> {
    let ok = if open_at_zero {
        alpha > 0.0
    } else {
        alpha >= 0.0
    };
    if ok && alpha < n as f64 {
        Ok(())
    } else {
        Err(invalid(format!(
            "α = {alpha} is outside the admissible range for n = {n}"
        )))
    }
}

/// Max-merges per-cube cell values, one level of one lattice at a time
/// (cubes of a level are disjoint, so each pass writes each cell once).
fn sup_over_cubes<F>(lattices: &LatticeSet, n_cells: usize, per_cube: F) -> CellSup
where
    F: Fn(&CellBox) -> Vec<(usize, f64)> + Sync,
{
    let grid = *lattices.grid();
    let mut values = vec![f64::NEG_INFINITY; n_cells];
    let mut argmax = vec![CellBox::new([0, 0], 1); n_cells];
    for lat in lattices.lattices() {
        for level in 0..=grid.depth {
            let cubes = lat.cubes_at_level(level);
            let results: Vec<(CellBox, Vec<(usize, f64)>)> = cubes
                .par_iter()
                .map(|c| {
                    let q = lat.box_unchecked(c);
                    (q, per_cube(&q))
                })
                .collect();
            for (q, cells) in results {
                for (i, v) in cells {
                    if v > values[i] {
                        values[i] = v;
                        argmax[i] = q;
                    }
                }
            }
        }
    }
    CellSup { values, argmax }
}

/// `M_α f(x) = sup_{Q∋x} |Q|^{α/n} ⟨|f|⟩_Q` over the cubes of `lattices`,
/// with a maximizing cube per cell.
pub fn frac_maximal_with_argmax(
    f: &GridFunction,
    alpha: f64,
    lattices: &LatticeSet,
) -> Result<CellSup> {
    let grid = *f.grid();
    check_alpha(alpha, grid.n, false)?;
    if lattices.grid() != &grid {
        return Err(invalid("function and lattices live on different grids"));
    }
    let table = f.abs().prefix();
    Ok(sup_over_cubes(lattices, grid.cell_count(), |q| {
        let v = q.side_length(&grid).powf(alpha) * table.average(q);
        q.cells(&grid).into_iter().map(|i| (i, v)).collect()
    }))
}

pub fn frac_maximal(f: &GridFunction, alpha: f64, lattices: &LatticeSet) -> Result<GridFunction> {
    let s = frac_maximal_with_argmax(f, alpha, lattices)?;
    GridFunction::new(*f.grid(), s.values)
}

/// `M_α^b f(x) = sup_{Q∋x} |Q|^{α/n−1} ∫_Q |b(x) − b(y)||f(y)| dy`.
///
/// Per cube the cells are sorted by `b` so that every `x ∈ Q` is handled by
/// two prefix sums.
pub fn frac_maximal_commutator_with_argmax(
    f: &GridFunction,
    b: &GridFunction,
    alpha: f64,
    lattices: &LatticeSet,
) -> Result<CellSup> {
    let grid = *f.grid();
    check_alpha(alpha, grid.n, true)?;
    f.check_same_grid(b)?;
    if lattices.grid() != &grid {
        return Err(invalid("function and lattices live on different grids"));
    }
    let fv = f.values();
    let bv = b.values();
    Ok(sup_over_cubes(lattices, grid.cell_count(), |q| {
        commutator_on_cube(&q.cells(&grid), fv, bv, q.side_length(&grid).powf(alpha))
    }))
}

/// `side^α · (1/m) Σ_{y∈Q} |b(x) − b(y)||f(y)|` for every cell `x` of a cube
/// with cells `cells` (`m` of them), in `O(m log m)`.
pub(crate) fn commutator_on_cube(
    cells: &[usize],
    fv: &[f64],
    bv: &[f64],
    side_alpha: f64,
) -> Vec<(usize, f64)> {
    let m = cells.len();
    let center = cells.iter().map(|&i| bv[i]).sum::<f64>() / m as f64;
    let mut order: Vec<(f64, f64, usize)> = cells
        .iter()
        .map(|&i| (bv[i] - center, fv[i].abs(), i))
        .collect();
    order.sort_by(|a, c| a.0.total_cmp(&c.0));
    let f_tot: f64 = order.iter().map(|o| o.1).sum();
    let g_tot: f64 = order.iter().map(|o| o.0 * o.1).sum();
    let scale = side_alpha / m as f64;
    let mut out = Vec::with_capacity(m);
    let (mut f_lo, mut g_lo) = (0.0, 0.0);
    let mut k = 0;
    while k < m {
        let mut e = k;
        while e < m && order[e].0 == order[k].0 {
            e += 1;
        }
        let x = order[k].0;
        let (mut f_eq, mut g_eq) = (0.0, 0.0);
        for o in &order[k..e] {
            f_eq += o.1;
            g_eq += o.0 * o.1;
        }
        let below = x * f_lo - g_lo;
        let above = (g_tot - g_lo - g_eq) - x * (f_tot - f_lo - f_eq);
        let v = scale * (below + above).max(0.0);
        for o in &order[k..e] {
            out.push((o.2, v));
        }
        f_lo += f_eq;
        g_lo += g_eq;
        k = e;
    }
    out
}

pub fn frac_maximal_commutator(
    f: &GridFunction,
    b: &GridFunction,
    alpha: f64,
    lattices: &LatticeSet,
) -> Result<GridFunction> {
    let s = frac_maximal_commutator_with_argmax(f, b, alpha, lattices)?;
    GridFunction::new(*f.grid(), s.values)
}

/// `[b, M_α] f = b M_α f − M_α(b f)`.
pub fn maximal_commutator(
    f: &GridFunction,
    b: &GridFunction,
    alpha: f64,
    lattices: &LatticeSet,
) -> Result<GridFunction> {
    check_alpha(alpha, f.grid().n, true)?;
    f.check_same_grid(b)?;
    let mf = frac_maximal(f, alpha, lattices)?;
    let bf = f.zip_with(b, |x, y| x * y)?;
    let mbf = frac_maximal(&bf, alpha, lattices)?;
    let values = b
        .values()
        .iter()
        .zip(mf.values())
        .zip(mbf.values())
        .map(|((bi, m1), m2)| bi * m1 - m2)
        .collect();
    GridFunction::new(*f.grid(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::Grid;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(g: Grid, seed: u64) -> GridFunction {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        GridFunction::new(
            g,
            (0..g.cell_count())
                .map(|_| rng.random_range(-1.0..1.0))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn indicator_of_cube_has_maximal_one() {
        let g = Grid::new(1, 5).unwrap();
        let f = GridFunction::indicator(g, &CellBox::new([8, 0], 8));
        let m = frac_maximal(&f, 0.0, &LatticeSet::one_third(g)).unwrap();
        for i in 8..16 {
            assert!((m.values()[i] - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn constant_input_gives_largest_side() {
        let g = Grid::new(1, 5).unwrap();
        let m = frac_maximal(
            &GridFunction::constant(g, 1.0),
            0.5,
            &LatticeSet::standard(g),
        )
        .unwrap();
        assert!(m.values().iter().all(|v| (v - 1.0).abs() < 1e-14));
    }

    #[test]
    fn commutator_maximal_matches_exhaustive_oracle() {
        let g = Grid::new(2, 3).unwrap();
        let f = random(g, 1);
        let b = random(g, 2);
        let l = LatticeSet::one_third(g);
        let fast = frac_maximal_commutator(&f, &b, 0.6, &l).unwrap();
        let h = g.cell_volume();
        for x in 0..g.cell_count() {
            let mut best: f64 = 0.0;
            for (_, q) in l.all_cubes() {
                if !q.contains_cell(&g, x) {
                    continue;
                }
                let mut s = 0.0;
                q.for_each_cell(&g, |y| {
                    s += (b.values()[x] - b.values()[y]).abs() * f.values()[y].abs() * h
                });
                best = best.max(q.measure(&g).powf(0.3 - 1.0) * s);
            }
            assert!(
                (fast.values()[x] - best).abs() < 1e-12 * (1.0 + best),
                "cell {x}"
            );
        }
    }

    #[test]
    fn constant_symbol_commutators_vanish() {
        let g = Grid::new(1, 6).unwrap();
        let f = random(g, 3).abs();
        let b = GridFunction::constant(g, 2.0);
        let l = LatticeSet::one_third(g);
        assert!(frac_maximal_commutator(&f, &b, 0.5, &l)
            .unwrap()
            .values()
            .iter()
            .all(|v| *v == 0.0));
        assert!(maximal_commutator(&f, &b, 0.5, &l)
            .unwrap()
            .values()
            .iter()
            .all(|v| v.abs() < 1e-14));
    }
}
