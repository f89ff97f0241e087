use serde::Serialize;

use super::SparseFamily;
use crate::dyadic::{CellBox, DyadicCube, Grid};
use crate::error::{domain, invalid, Result};

/// Where a cube of `S` sits relative to a reference cube `Q_N` and a side
/// threshold `δ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TruncationClass {
    /// `Q ⊋ Q_N`
    Above,
    /// `Q ∩ Q_N = ∅`
    Outside,
    /// `Q ⊆ Q_N`, `l_Q < δ`
    Small,
    /// `Q ⊆ Q_N`, `l_Q ≥ δ`: the finite part
    Finite,
}

#[derive(Debug, Clone, Serialize)]
pub struct TruncationSetting {
    pub delta: f64,
    pub q_n: DyadicCube,
}

/// Member positions of `S` per class.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Truncation {
    pub finite: Vec<usize>,
    pub above: Vec<usize>,
    pub outside: Vec<usize>,
    pub small: Vec<usize>,
}

impl Truncation {
    /// Positions of every tail class (all but the finite part).
    pub fn tail(&self) -> Vec<usize> {
        let mut t: Vec<usize> = self
            .above
            .iter()
            .chain(&self.outside)
            .chain(&self.small)
            .copied()
            .collect();
        t.sort_unstable();
        t
    }

    pub fn total(&self) -> usize {
        self.finite.len() + self.above.len() + self.outside.len() + self.small.len()
    }
}

/// Class of the box `q` relative to `q_n`. Boxes from another lattice that
/// straddle `q_n` are grouped with the ones inside it.
pub fn classify(grid: &Grid, q: &CellBox, q_n: &CellBox, delta: f64) -> TruncationClass {
    if q.contains(grid, q_n) && q != q_n {
        TruncationClass::Above
    } else if !q.intersects(grid, q_n) {
        TruncationClass::Outside
    } else if q.side_length(grid) < delta {
        TruncationClass::Small
    } else {
        TruncationClass::Finite
    }
}

/// Splits `S` into the finite part and the three tails.
pub fn split_truncation(s: &SparseFamily, setting: &TruncationSetting) -> Result<Truncation> {
    let grid = *s.grid();
    let q_n = s.lattice().cube_box(&setting.q_n).map_err(|_| {
        domain(format!(
            "Q_N = {:?} is not a cube of lattice {}",
            setting.q_n,
            s.shift_id()
        ))
    })?;
    let n_side = q_n.side_length(&grid);
    if !(setting.delta > 0.0 && setting.delta < n_side) {
        return Err(invalid(format!(
            "δ = {} must lie in (0, {n_side})",
            setting.delta
        )));
    }
    let mut out = Truncation::default();
    for (k, m) in s.members().iter().enumerate() {
        match classify(&grid, &m.cube_box, &q_n, setting.delta) {
            TruncationClass::Above => out.above.push(k),
            TruncationClass::Outside => out.outside.push(k),
            TruncationClass::Small => out.small.push(k),
            TruncationClass::Finite => out.finite.push(k),
        }
    }
    Ok(out)
}
