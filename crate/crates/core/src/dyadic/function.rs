use serde::{Deserialize, Serialize};

use super::geometry::{CellBox, Grid};
use crate::error::{domain, invalid, Result};

/// Piecewise-constant function on the finest cells of a [`Grid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.cell_count() {
            return Err(invalid(format!(
                "expected {} cell values, got {}",
                grid.cell_count(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("non-finite value at cell {i}")));
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Self {
            grid,
            values: vec![c; grid.cell_count()],
        }
    }

    /// Samples `f` at cell midpoints.
    pub fn from_fn(grid: Grid, f: impl Fn([f64; 2]) -> f64) -> Result<Self> {
        let values = (0..grid.cell_count())
            .map(|c| f(grid.midpoint(c)))
            .collect();
        Self::new(grid, values)
    }

    pub fn indicator(grid: Grid, b: &CellBox) -> Self {
        let mut values = vec![0.0; grid.cell_count()];
        b.for_each_cell(&grid, |c| values[c] = 1.0);
        Self { grid, values }
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn abs(&self) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| v.abs()).collect(),
        }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_same_grid(other)?;
        Self::new(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(domain(format!(
                "grid mismatch: {:?} vs {:?}",
                self.grid, other.grid
            )));
        }
        Ok(())
    }

    pub fn prefix(&self) -> PrefixSum {
        PrefixSum::new(self)
    }

    /// Integral over a box by direct summation of the covered cells.
    pub fn box_integral(&self, b: &CellBox) -> Result<f64> {
        self.grid.check_box(b)?;
        let mut s = 0.0;
        b.for_each_cell(&self.grid, |c| s += self.values[c]);
        Ok(s * self.grid.cell_volume())
    }

    pub fn box_average(&self, b: &CellBox) -> Result<f64> {
        Ok(self.box_integral(b)? / b.measure(&self.grid))
    }

    pub fn total_integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }
}

/// Double-double accumulator used by the prefix tables so that box sums
/// obtained by differencing keep full f64 accuracy.
#[derive(Debug, Clone, Copy, Default)]
struct Dd(f64, f64);

impl Dd {
    #[inline]
    fn two_sum(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        let bb = s - a;
        (s, (a - (s - bb)) + (b - bb))
    }

    #[inline]
    fn add(self, o: Dd) -> Dd {
        let (s, e) = Self::two_sum(self.0, o.0);
        let e = e + self.1 + o.1;
        let hi = s + e;
        Dd(hi, e - (hi - s))
    }

    #[inline]
    fn neg(self) -> Dd {
        Dd(-self.0, -self.1)
    }

    #[inline]
    fn value(self) -> f64 {
        self.0 + self.1
    }
}

/// Summed-area table of a [`GridFunction`]: O(1) integrals over any box.
#[derive(Debug, Clone)]
pub struct PrefixSum {
    grid: Grid,
    stride: usize,
    table: Vec<Dd>,
}

impl PrefixSum {
    pub fn new(f: &GridFunction) -> Self {
        let grid = *f.grid();
        let s = grid.side_cells();
        let stride = s + 1;
        if grid.n == 1 {
            let mut table = Vec::with_capacity(stride);
            let mut acc = Dd::default();
            table.push(acc);
            for &v in f.values() {
                acc = acc.add(Dd(v, 0.0));
                table.push(acc);
            }
            Self {
                grid,
                stride,
                table,
            }
        } else {
            let mut table = vec![Dd::default(); stride * stride];
            for y in 0..s {
                let mut row = Dd::default();
                for x in 0..s {
                    row = row.add(Dd(f.values()[y * s + x], 0.0));
                    table[(y + 1) * stride + x + 1] = table[y * stride + x + 1].add(row);
                }
            }
            Self {
                grid,
                stride,
                table,
            }
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Sum of cell values over the box (no volume factor).
    #[inline]
    pub fn box_sum(&self, b: &CellBox) -> f64 {
        let (x0, x1) = (b.origin[0], b.origin[0] + b.side);
        if self.grid.n == 1 {
            self.table[x1].add(self.table[x0].neg()).value()
        } else {
            let (y0, y1) = (b.origin[1], b.origin[1] + b.side);
            let t = |y: usize, x: usize| self.table[y * self.stride + x];
            t(y1, x1)
                .add(t(y0, x1).neg())
                .add(t(y1, x0).neg())
                .add(t(y0, x0))
                .value()
        }
    }

    /// `∫_Q f`, exact up to rounding of the final sum.
    #[inline]
    pub fn integral(&self, b: &CellBox) -> f64 {
        self.box_sum(b) * self.grid.cell_volume()
    }

    /// `⟨f⟩_Q`.
    #[inline]
    pub fn average(&self, b: &CellBox) -> f64 {
        self.box_sum(b) / b.cell_count(&self.grid) as f64
    }

    /// Checked variant of [`PrefixSum::integral`].
    pub fn cube_integral(&self, b: &CellBox) -> Result<f64> {
        self.grid.check_box(b)?;
        Ok(self.integral(b))
    }

    pub fn cube_average(&self, b: &CellBox) -> Result<f64> {
        self.grid.check_box(b)?;
        Ok(self.average(b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_mass() {
        let g = Grid::new(1, 5).unwrap();
        let f = GridFunction::constant(g, 1.0);
        let p = f.prefix();
        assert_eq!(p.cube_integral(&g.domain()).unwrap(), 1.0);
        assert_eq!(p.cube_integral(&CellBox::new([8, 0], 4)).unwrap(), 0.125);
    }

    #[test]
    fn half_indicator_average() {
        let g = Grid::new(2, 4).unwrap();
        let q = CellBox::new([4, 8], 8);
        let mut v = vec![0.0; g.cell_count()];
        CellBox::new([4, 8], 8).for_each_cell(&g, |c| {
            if g.coords(c)[0] < 8 {
                v[c] = 1.0
            }
        });
        let f = GridFunction::new(g, v).unwrap();
        assert_eq!(f.prefix().cube_average(&q).unwrap(), 0.5);
    }

    #[test]
    fn constant_average_everywhere() {
        let g = Grid::new(2, 3).unwrap();
        let f = GridFunction::constant(g, -2.5);
        let p = f.prefix();
        for side in [1, 2, 4, 8] {
            for y in (0..8).step_by(side) {
                for x in (0..8).step_by(side) {
                    assert_eq!(p.average(&CellBox::new([x, y], side)), -2.5);
                }
            }
        }
    }

    #[test]
    fn out_of_domain_is_error() {
        let g = Grid::new(1, 3).unwrap();
        let p = GridFunction::constant(g, 1.0).prefix();
        assert!(p.cube_integral(&CellBox::new([6, 0], 4)).is_err());
    }

    #[test]
    fn rejects_non_finite() {
        let g = Grid::new(1, 1).unwrap();
        assert!(GridFunction::new(g, vec![1.0, f64::NAN]).is_err());
    }
}
