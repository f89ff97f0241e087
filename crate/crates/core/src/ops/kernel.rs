use rayon::prelude::*;

use crate::dyadic::{Grid, GridFunction};
use crate::error::{invalid, Result};
use crate::quad::gauss_legendre;

/// Largest grid (in cells) a dense kernel is built for.
pub const MAX_KERNEL_CELLS: usize = 1 << 12;

/// Discretized `K_α(x,y) = |x − y|^{α−n}`: entry `(i,j)` is the exact (1D)
/// or quadrature (2D) integral of `K_α(x_i, ·)` over cell `j`, with `x_i`
/// the midpoint of cell `i`. The diagonal is the exact cell integral about
/// the midpoint. Entries depend only on the cell offset, so a table indexed
/// by `(|dx|, |dy|)` is stored.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    grid: Grid,
    alpha: f64,
    table: Vec<f64>,
}

impl KernelMatrix {
    pub fn new(grid: Grid, alpha: f64) -> Result<Self> {
        let n = grid.n as f64;
        if !(alpha > 0.0 && alpha < n) {
            return Err(invalid(format!("α = {alpha} must lie in (0, {n})")));
        }
        if grid.cell_count() > MAX_KERNEL_CELLS {
            return Err(invalid(format!(
                "dense kernel limited to {MAX_KERNEL_CELLS} cells, grid has {}",
                grid.cell_count()
            )));
        }
        let s = grid.side_cells();
        let h = grid.cell_width();
        let table = if grid.n == 1 {
            (0..s)
                .map(|d| {
                    if d == 0 {
                        2.0 * (h / 2.0).powf(alpha) / alpha
                    } else {
                        let d0 = (d as f64 - 0.5) * h;
                        let d1 = (d as f64 + 0.5) * h;
                        (d1.powf(alpha) - d0.powf(alpha)) / alpha
                    }
                })
                .collect()
        } else {
            let far = gauss_legendre(4);
            let mid = gauss_legendre(6);
            (0..s * s)
                .into_par_iter()
                .map(|k| {
                    let (dx, dy) = (k % s, k / s);
                    if dx == 0 && dy == 0 {
                        square_center_integral(alpha, h)
                    } else {
                        let (panels, rule) = match dx.max(dy) {
                            1 => (8, &mid),
                            2 | 3 => (2, &mid),
                            _ => (1, &far),
                        };
                        cell_integral_2d(alpha, dx as f64 * h, dy as f64 * h, h, panels, rule)
                    }
                })
                .collect()
        };
        Ok(Self { grid, alpha, table })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let a = self.grid.coords(i);
        let b = self.grid.coords(j);
        let s = self.grid.side_cells();
        self.table[a[0].abs_diff(b[0]) + s * a[1].abs_diff(b[1])]
    }

    /// Row-major dense matrix with entries `w(b_i, b_j) K_ij`.
    pub fn dense_with(&self, w: impl Fn(usize, usize) -> f64 + Sync) -> Vec<f64> {
        let n = self.grid.cell_count();
        let mut m = vec![0.0; n * n];
        m.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            for (j, v) in row.iter_mut().enumerate() {
                *v = w(i, j) * self.entry(i, j);
            }
        });
        m
    }

    pub fn dense(&self) -> Vec<f64> {
        self.dense_with(|_, _| 1.0)
    }

    fn apply_rows(&self, row: impl Fn(usize) -> f64 + Sync + Send) -> Vec<f64> {
        (0..self.grid.cell_count())
            .into_par_iter()
            .map(row)
            .collect()
    }

    /// `I_α f(x_i) = Σ_j K_ij f_j`.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let n = f.len();
        self.apply_rows(|i| (0..n).map(|j| self.entry(i, j) * f[j]).sum())
    }

    /// `[b, I_α] f(x_i) = Σ_j (b_i − b_j) K_ij f_j`.
    pub fn apply_commutator(&self, f: &[f64], b: &[f64]) -> Vec<f64> {
        let n = f.len();
        self.apply_rows(|i| {
            (0..n)
                .map(|j| (b[i] - b[j]) * self.entry(i, j) * f[j])
                .sum()
        })
    }

    /// `Σ_j |b_i − b_j| K_ij |f_j|`, the positive majorant of the commutator.
    pub fn apply_majorant(&self, f: &[f64], b: &[f64]) -> Vec<f64> {
        let n = f.len();
        self.apply_rows(|i| {
            (0..n)
                .map(|j| (b[i] - b[j]).abs() * self.entry(i, j) * f[j].abs())
                .sum()
        })
    }
}

/// `∫ |y|^{α−2}` over the square of side `h` centered at the origin:
/// `(8/α)(h/2)^α ∫_0^{π/4} cos^{−α}θ dθ`.
fn square_center_integral(alpha: f64, h: f64) -> f64 {
    let quarter = std::f64::consts::FRAC_PI_4;
    let angular: f64 = gauss_legendre(32)
        .iter()
        .map(|(t, w)| w * quarter * (t * quarter).cos().powf(-alpha))
        .sum();
    8.0 / alpha * (h / 2.0).powf(alpha) * angular
}

/// `∫ |y|^{α−2}` over the square of side `h` centered at `(cx, cy) ≠ 0`.
fn cell_integral_2d(
    alpha: f64,
    cx: f64,
    cy: f64,
    h: f64,
    panels: usize,
    rule: &[(f64, f64)],
) -> f64 {
    let ph = h / panels as f64;
    let mut acc = 0.0;
    for pi in 0..panels {
        for pj in 0..panels {
            let x0 = cx - h / 2.0 + pi as f64 * ph;
            let y0 = cy - h / 2.0 + pj as f64 * ph;
            for (u, wu) in rule {
                for (v, wv) in rule {
                    let r2 = (x0 + u * ph).powi(2) + (y0 + v * ph).powi(2);
                    acc += wu * wv * r2.powf((alpha - 2.0) / 2.0);
                }
            }
        }
    }
    acc * ph * ph
}

fn check(f: &GridFunction, alpha: f64) -> Result<KernelMatrix> {
    KernelMatrix::new(*f.grid(), alpha)
}

pub fn riesz_potential(f: &GridFunction, alpha: f64) -> Result<GridFunction> {
    let k = check(f, alpha)?;
    GridFunction::new(*f.grid(), k.apply(f.values()))
}

pub fn riesz_commutator(f: &GridFunction, b: &GridFunction, alpha: f64) -> Result<GridFunction> {
    f.check_same_grid(b)?;
    let k = check(f, alpha)?;
    GridFunction::new(*f.grid(), k.apply_commutator(f.values(), b.values()))
}

/// `∫ |b(x) − b(y)| K_α(x,y) |f(y)| dy` at each cell midpoint.
pub fn commutator_majorant(f: &GridFunction, b: &GridFunction, alpha: f64) -> Result<GridFunction> {
    f.check_same_grid(b)?;
    let k = check(f, alpha)?;
    GridFunction::new(*f.grid(), k.apply_majorant(f.values(), b.values()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_d_cell_indicator_at_midpoint() {
        let g = Grid::new(1, 6).unwrap();
        let h = g.cell_width();
        let mut v = vec![0.0; 64];
        v[20] = 1.0;
        let i = riesz_potential(&GridFunction::new(g, v).unwrap(), 0.5).unwrap();
        assert!((i.values()[20] - 2.0 * (h / 2.0).sqrt() / 0.5).abs() < 1e-14);
    }

    #[test]
    fn one_d_row_sum_is_exact_integral() {
        let g = Grid::new(1, 5).unwrap();
        let k = KernelMatrix::new(g, 0.3).unwrap();
        let x = g.midpoint(7)[0];
        let exact = (x.powf(0.3) + (1.0 - x).powf(0.3)) / 0.3;
        let row: f64 = (0..32).map(|j| k.entry(7, j)).sum();
        assert!((row - exact).abs() < 1e-13);
    }

    #[test]
    fn two_d_diagonal_closed_form() {
        let g = Grid::new(2, 4).unwrap();
        let k = KernelMatrix::new(g, 1.0).unwrap();
        let h = g.cell_width();
        // α = 1: ∫ |y|^{-1} over the square of side h is 4h·asinh(1)
        assert!((k.entry(5, 5) - 4.0 * h * 1f64.asinh()).abs() < 1e-12);
        assert!(k.entry(0, 1) > k.entry(0, 2));
        assert_eq!(k.entry(0, 17), k.entry(17, 0));
    }

    #[test]
    fn two_d_off_diagonal_against_fine_sum() {
        let alpha = 0.7;
        let h = 1.0 / 16.0;
        for (dx, dy) in [(1usize, 0usize), (1, 1), (2, 3), (6, 1)] {
            let q = cell_integral_2d(
                alpha,
                dx as f64 * h,
                dy as f64 * h,
                h,
                8,
                &gauss_legendre(6),
            );
            let m = 600;
            let mut acc = 0.0;
            for a in 0..m {
                for b in 0..m {
                    let x = dx as f64 * h - h / 2.0 + (a as f64 + 0.5) * h / m as f64;
                    let y = dy as f64 * h - h / 2.0 + (b as f64 + 0.5) * h / m as f64;
                    acc += x.hypot(y).powf(alpha - 2.0);
                }
            }
            let reference = acc * (h / m as f64).powi(2);
            assert!(
                (q - reference).abs() < 1e-5 * reference,
                "offset ({dx},{dy})"
            );
        }
    }

    #[test]
    fn constant_symbol_commutator_vanishes() {
        let g = Grid::new(1, 6).unwrap();
        let f = GridFunction::from_fn(g, |x| x[0].sin()).unwrap();
        let b = GridFunction::constant(g, 3.0);
        assert!(riesz_commutator(&f, &b, 0.5)
            .unwrap()
            .values()
            .iter()
            .all(|v| *v == 0.0));
        assert!(KernelMatrix::new(g, 1.0).is_err());
    }
}
