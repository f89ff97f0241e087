use serde::{Deserialize, Serialize};

use super::geometry::{CellBox, Grid};
use crate::error::{domain, invalid, Result};

/// Address of a cube in one of the shifted dyadic lattices.
///
/// At `level = k` the cube has `2^(depth-k)` cells per side; `index` counts
/// cubes along each axis starting from the first one that lies entirely in
/// the domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicCube {
    pub shift: u16,
    pub level: u32,
    pub index: [u32; 2],
}

/// A dyadic lattice translated by `t ∈ {0, 1/3, 2/3}^n`, restricted to the
/// cubes lying entirely in `[0,1)^n`.
///
/// A global translation by `1/3` agrees with the classical alternating
/// `(-1)^k/3` shift modulo `2^-k`, so these are the one-third-trick lattices.
/// The translation is rounded to whole cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftedLattice {
    grid: Grid,
    shift_id: u16,
    shift: [f64; 2],
    offset: [usize; 2],
}

impl ShiftedLattice {
    /// `shift_id = a₀ + 3·a₁` encodes `t = (a₀/3, a₁/3)`.
    pub fn new(grid: Grid, shift_id: u16) -> Result<Self> {
        let count = 3u16.pow(grid.n as u32);
        if shift_id >= count {
            return Err(invalid(format!(
                "shift id {shift_id} out of range 0..{count}"
            )));
        }
        let digits = [shift_id % 3, shift_id / 3];
        let mut shift = [0.0; 2];
        let mut offset = [0; 2];
        for a in 0..grid.n {
            shift[a] = digits[a] as f64 / 3.0;
            offset[a] = (shift[a] * grid.side_cells() as f64).round() as usize;
        }
        Ok(Self {
            grid,
            shift_id,
            shift,
            offset,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn shift_id(&self) -> u16 {
        self.shift_id
    }

    pub fn shift(&self) -> [f64; 2] {
        self.shift
    }

    /// Translation in cells.
    pub fn offset(&self) -> [usize; 2] {
        self.offset
    }

    #[inline]
    fn side_at(&self, level: u32) -> usize {
        1usize << (self.grid.depth - level)
    }

    #[inline]
    fn residue(&self, level: u32, axis: usize) -> usize {
        self.offset[axis] % self.side_at(level)
    }

    /// Number of member cubes along each axis at `level`.
    pub fn counts_at(&self, level: u32) -> [usize; 2] {
        let s = self.side_at(level);
        let n_cells = self.grid.side_cells();
        let mut c = [1, 1];
        for (a, v) in c.iter_mut().enumerate().take(self.grid.n) {
            let r = self.residue(level, a);
            *v = (n_cells - r) / s;
        }
        c
    }

    pub fn is_member(&self, cube: &DyadicCube) -> bool {
        if cube.shift != self.shift_id || cube.level > self.grid.depth {
            return false;
        }
        let c = self.counts_at(cube.level);
        (0..self.grid.n).all(|a| (cube.index[a] as usize) < c[a])
            && (self.grid.n == 2 || cube.index[1] == 0)
    }

    /// Cells covered by a member cube.
    pub fn cube_box(&self, cube: &DyadicCube) -> Result<CellBox> {
        if !self.is_member(cube) {
            return Err(domain(format!(
                "{cube:?} is not a member of lattice {}",
                self.shift_id
            )));
        }
        Ok(self.box_unchecked(cube))
    }

    #[inline]
    pub(crate) fn box_unchecked(&self, cube: &DyadicCube) -> CellBox {
        let s = self.side_at(cube.level);
        let mut origin = [0, 0];
        for (a, o) in origin.iter_mut().enumerate().take(self.grid.n) {
            *o = self.residue(cube.level, a) + cube.index[a] as usize * s;
        }
        CellBox { origin, side: s }
    }

    /// The member cube of the given level containing `cell`, if any.
    pub fn cube_containing(&self, cell: usize, level: u32) -> Option<DyadicCube> {
        if level > self.grid.depth {
            return None;
        }
        let s = self.side_at(level);
        let coords = self.grid.coords(cell);
        let counts = self.counts_at(level);
        let mut index = [0u32; 2];
        for a in 0..self.grid.n {
            let r = self.residue(level, a);
            if coords[a] < r {
                return None;
            }
            let i = (coords[a] - r) / s;
            if i >= counts[a] {
                return None;
            }
            index[a] = i as u32;
        }
        Some(DyadicCube {
            shift: self.shift_id,
            level,
            index,
        })
    }

    /// Member cube with a given box, if the box is one.
    pub fn cube_of_box(&self, b: &CellBox) -> Option<DyadicCube> {
        if !b.side.is_power_of_two() || b.side > self.grid.side_cells() {
            return None;
        }
        let level = self.grid.depth - b.side.trailing_zeros();
        let cell = self.grid.flat(b.origin);
        let cube = self.cube_containing(cell, level)?;
        (self.box_unchecked(&cube) == *b).then_some(cube)
    }

    pub fn parent(&self, cube: &DyadicCube) -> Option<DyadicCube> {
        if cube.level == 0 {
            return None;
        }
        let b = self.box_unchecked(cube);
        self.cube_containing(self.grid.flat(b.origin), cube.level - 1)
    }

    pub fn children(&self, cube: &DyadicCube) -> Vec<DyadicCube> {
        if cube.level >= self.grid.depth {
            return Vec::new();
        }
        let b = self.box_unchecked(cube);
        let half = b.side / 2;
        let mut out = Vec::with_capacity(1 << self.grid.n);
        let ys: &[usize] = if self.grid.n == 2 { &[0, 1] } else { &[0] };
        for &dx in &[0usize, 1] {
            for &dy in ys {
                let origin = [b.origin[0] + dx * half, b.origin[1] + dy * half];
                let child = self
                    .cube_containing(self.grid.flat(origin), cube.level + 1)
                    .expect("children of a member cube are members");
                out.push(child);
            }
        }
        out
    }

    /// Member cubes at one level, index-lexicographic.
    pub fn cubes_at_level(&self, level: u32) -> Vec<DyadicCube> {
        let c = self.counts_at(level);
        let mut out = Vec::with_capacity(c[0] * c[1]);
        for i in 0..c[0] {
            for j in 0..c[1] {
                out.push(DyadicCube {
                    shift: self.shift_id,
                    level,
                    index: [i as u32, j as u32],
                });
            }
        }
        out
    }

    /// All member cubes passing `keep`, level-major then index-lexicographic.
    pub fn enumerate(
        &self,
        mut keep: impl FnMut(&DyadicCube, &CellBox) -> bool,
    ) -> Vec<(DyadicCube, CellBox)> {
        let mut out = Vec::new();
        for level in 0..=self.grid.depth {
            for cube in self.cubes_at_level(level) {
                let b = self.box_unchecked(&cube);
                if keep(&cube, &b) {
                    out.push((cube, b));
                }
            }
        }
        out
    }

    /// Maximal member cubes (those whose parent leaves the domain).
    pub fn roots(&self) -> Vec<DyadicCube> {
        let mut out = Vec::new();
        for level in 0..=self.grid.depth {
            for cube in self.cubes_at_level(level) {
                if self.parent(&cube).is_none() {
                    out.push(cube);
                }
            }
        }
        out
    }
}

/// The collection of shifted lattices over which suprema are taken.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeSet {
    grid: Grid,
    lattices: Vec<ShiftedLattice>,
}

impl LatticeSet {
    /// Only the unshifted dyadic lattice.
    pub fn standard(grid: Grid) -> Self {
        Self {
            grid,
            lattices: vec![ShiftedLattice::new(grid, 0).expect("shift 0 exists")],
        }
    }

    /// All `3^n` one-third shifts.
    pub fn one_third(grid: Grid) -> Self {
        let count = 3u16.pow(grid.n as u32);
        let lattices = (0..count)
            .map(|s| ShiftedLattice::new(grid, s).expect("valid shift"))
            .collect();
        Self { grid, lattices }
    }

    pub fn from_shifts(grid: Grid, shifts: &[u16]) -> Result<Self> {
        if shifts.is_empty() {
            return Err(invalid("lattice set needs at least one shift"));
        }
        let lattices = shifts
            .iter()
            .map(|&s| ShiftedLattice::new(grid, s))
            .collect::<Result<_>>()?;
        Ok(Self { grid, lattices })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn lattices(&self) -> &[ShiftedLattice] {
        &self.lattices
    }

    pub fn lattice(&self, shift: u16) -> Result<&ShiftedLattice> {
        self.lattices
            .iter()
            .find(|l| l.shift_id() == shift)
            .ok_or_else(|| domain(format!("shift {shift} is not in this lattice set")))
    }

    pub fn cube_box(&self, cube: &DyadicCube) -> Result<CellBox> {
        self.lattice(cube.shift)?.cube_box(cube)
    }

    /// Every admissible cube of every lattice, lattice-major.
    pub fn enumerate(
        &self,
        mut keep: impl FnMut(&DyadicCube, &CellBox) -> bool,
    ) -> Vec<(DyadicCube, CellBox)> {
        self.lattices
            .iter()
            .flat_map(|l| l.enumerate(&mut keep))
            .collect()
    }

    pub fn all_cubes(&self) -> Vec<(DyadicCube, CellBox)> {
        self.enumerate(|_, _| true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_of_dyadic_intervals() {
        let g = Grid::new(1, 2).unwrap();
        let lat = ShiftedLattice::new(g, 0).unwrap();
        assert_eq!(lat.enumerate(|_, _| true).len(), 7);
        let small = lat.enumerate(|_, b| b.side_length(&g) < 0.5);
        assert_eq!(small.len(), 4);
    }

    #[test]
    fn children_partition_parent() {
        for n in [1, 2] {
            let g = Grid::new(n, 5).unwrap();
            for s in 0..3u16.pow(n as u32) {
                let lat = ShiftedLattice::new(g, s).unwrap();
                for (cube, b) in lat.enumerate(|c, _| c.level < 5) {
                    let kids = lat.children(&cube);
                    assert_eq!(kids.len(), 1 << n);
                    let mut cells: Vec<usize> = kids
                        .iter()
                        .flat_map(|k| lat.box_unchecked(k).cells(&g))
                        .collect();
                    cells.sort_unstable();
                    let mut parent_cells = b.cells(&g);
                    parent_cells.sort_unstable();
                    assert_eq!(cells, parent_cells);
                    for k in &kids {
                        assert_eq!(lat.parent(k), Some(cube));
                    }
                }
            }
        }
    }

    #[test]
    fn members_nested_or_disjoint() {
        let g = Grid::new(1, 6).unwrap();
        for s in 0..3 {
            let lat = ShiftedLattice::new(g, s).unwrap();
            let all = lat.enumerate(|_, _| true);
            for (_, a) in &all {
                for (_, b) in &all {
                    if a.intersects(&g, b) {
                        assert!(a.contains(&g, b) || b.contains(&g, a));
                    }
                }
            }
        }
    }

    #[test]
    fn cube_of_box_round_trip() {
        let g = Grid::new(2, 4).unwrap();
        let set = LatticeSet::one_third(g);
        for l in set.lattices() {
            for (cube, b) in l.enumerate(|_, _| true) {
                assert_eq!(l.cube_of_box(&b), Some(cube));
            }
        }
    }

    #[test]
    fn roots_of_shifted_lattice_are_disjoint() {
        let g = Grid::new(1, 8).unwrap();
        let lat = ShiftedLattice::new(g, 1).unwrap();
        let roots: Vec<CellBox> = lat.roots().iter().map(|c| lat.box_unchecked(c)).collect();
        assert!(roots.len() > 1);
        for (i, a) in roots.iter().enumerate() {
            for b in &roots[i + 1..] {
                assert!(!a.intersects(&g, b));
            }
        }
    }
}
