use serde::{Deserialize, Serialize};

use crate::error::{domain, invalid, Result};

/// Uniform dyadic grid of `2^depth` cells per axis on `[0,1)^n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Grid {
    pub n: usize,
    pub depth: u32,
}

/// Largest grid depth accepted; keeps `2^(n·depth)` addressable.
pub const MAX_DEPTH: u32 = 24;

impl Grid {
    pub fn new(n: usize, depth: u32) -> Result<Self> {
        if n != 1 && n != 2 {
            return Err(invalid(format!("dimension must be 1 or 2, got {n}")));
        }
        if depth > MAX_DEPTH || (n as u32) * depth > 28 {
            return Err(invalid(format!("depth {depth} too large for n = {n}")));
        }
        Ok(Self { n, depth })
    }

    /// Cells per axis.
    #[inline]
    pub fn side_cells(&self) -> usize {
        1usize << self.depth
    }

    #[inline]
    pub fn cell_count(&self) -> usize {
        1usize << (self.depth as usize * self.n)
    }

    /// Side length of one cell, `2^-depth`.
    #[inline]
    pub fn cell_width(&self) -> f64 {
        (-(self.depth as f64)).exp2()
    }

    /// Lebesgue measure of one cell, `2^(-n·depth)`.
    #[inline]
    pub fn cell_volume(&self) -> f64 {
        (-((self.depth as usize * self.n) as f64)).exp2()
    }

    #[inline]
    pub fn coords(&self, cell: usize) -> [usize; 2] {
        if self.n == 1 {
            [cell, 0]
        } else {
            let s = self.side_cells();
            [cell % s, cell / s]
        }
    }

    #[inline]
    pub fn flat(&self, coords: [usize; 2]) -> usize {
        if self.n == 1 {
            coords[0]
        } else {
            coords[1] * self.side_cells() + coords[0]
        }
    }

    /// Midpoint of a cell in physical coordinates (second entry 0 for n = 1).
    pub fn midpoint(&self, cell: usize) -> [f64; 2] {
        let h = self.cell_width();
        let c = self.coords(cell);
        let mut m = [(c[0] as f64 + 0.5) * h, 0.0];
        if self.n == 2 {
            m[1] = (c[1] as f64 + 0.5) * h;
        }
        m
    }

    /// The whole domain as a box.
    pub fn domain(&self) -> CellBox {
        CellBox {
            origin: [0, 0],
            side: self.side_cells(),
        }
    }

    /// Checks that a box lies inside the domain.
    pub fn check_box(&self, b: &CellBox) -> Result<()> {
        let s = self.side_cells();
        let fits = b.side > 0
            && b.origin[0] + b.side <= s
            && (self.n == 1 && b.origin[1] == 0 || self.n == 2 && b.origin[1] + b.side <= s);
        if fits {
            Ok(())
        } else {
            Err(domain(format!(
                "box {b:?} is not inside the depth-{} grid",
                self.depth
            )))
        }
    }
}

/// Axis-aligned cube made of whole cells: `origin` is the lower corner in
/// cell coordinates and `side` the edge length in cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CellBox {
    pub origin: [usize; 2],
    pub side: usize,
}

impl CellBox {
    pub fn new(origin: [usize; 2], side: usize) -> Self {
        Self { origin, side }
    }

    /// Flat indices of the covered cells, row-major.
    pub fn cells(&self, grid: &Grid) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.cell_count(grid));
        self.for_each_cell(grid, |c| out.push(c));
        out
    }

    #[inline]
    pub fn for_each_cell(&self, grid: &Grid, mut f: impl FnMut(usize)) {
        if grid.n == 1 {
            for x in self.origin[0]..self.origin[0] + self.side {
                f(x);
            }
        } else {
            let s = grid.side_cells();
            for y in self.origin[1]..self.origin[1] + self.side {
                let row = y * s;
                for x in self.origin[0]..self.origin[0] + self.side {
                    f(row + x);
                }
            }
        }
    }

    #[inline]
    pub fn cell_count(&self, grid: &Grid) -> usize {
        self.side.pow(grid.n as u32)
    }

    /// Lebesgue measure `|Q|`.
    #[inline]
    pub fn measure(&self, grid: &Grid) -> f64 {
        self.cell_count(grid) as f64 * grid.cell_volume()
    }

    /// Physical side length `l_Q`.
    #[inline]
    pub fn side_length(&self, grid: &Grid) -> f64 {
        self.side as f64 * grid.cell_width()
    }

    #[inline]
    fn axis_range(&self, a: usize) -> (usize, usize) {
        (self.origin[a], self.origin[a] + self.side)
    }

    pub fn contains_cell(&self, grid: &Grid, cell: usize) -> bool {
        let c = grid.coords(cell);
        (0..grid.n).all(|a| {
            let (lo, hi) = self.axis_range(a);
            c[a] >= lo && c[a] < hi
        })
    }

    /// `other ⊆ self`.
    pub fn contains(&self, grid: &Grid, other: &CellBox) -> bool {
        (0..grid.n).all(|a| {
            let (lo, hi) = self.axis_range(a);
            let (olo, ohi) = other.axis_range(a);
            olo >= lo && ohi <= hi
        })
    }

    /// Interiors intersect.
    pub fn intersects(&self, grid: &Grid, other: &CellBox) -> bool {
        (0..grid.n).all(|a| {
            let (lo, hi) = self.axis_range(a);
            let (olo, ohi) = other.axis_range(a);
            olo < hi && lo < ohi
        })
    }

    /// Center in physical coordinates.
    pub fn center(&self, grid: &Grid) -> [f64; 2] {
        let h = grid.cell_width();
        let mut c = [0.0; 2];
        for (a, v) in c.iter_mut().enumerate().take(grid.n) {
            *v = (self.origin[a] as f64 + self.side as f64 / 2.0) * h;
        }
        c
    }

    /// Euclidean gap between the two closed boxes.
    pub fn distance(&self, grid: &Grid, other: &CellBox) -> f64 {
        let h = grid.cell_width();
        let mut d2 = 0.0;
        for a in 0..grid.n {
            let (lo, hi) = self.axis_range(a);
            let (olo, ohi) = other.axis_range(a);
            let gap = if ohi <= lo {
                lo - ohi
            } else { olo.saturating_sub(hi) };
            d2 += (gap as f64 * h).powi(2);
        }
        d2.sqrt()
    }
}
