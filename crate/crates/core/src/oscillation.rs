//! Weighted mean oscillation, `BMO_ν` norms, vanishing-oscillation moduli
//! and median values.

use rayon::prelude::*;
use serde::Serialize;

use crate::dyadic::{CellBox, DyadicCube, Grid, GridFunction, LatticeSet, ShiftedLattice};
use crate::error::{invalid, Result};
use crate::weights::Weight;

fn plain_average(b: &GridFunction, q: &CellBox) -> f64 {
    let v = b.values();
    let mut acc = 0.0;
    q.for_each_cell(b.grid(), |c| acc += v[c]);
    acc / q.cell_count(b.grid()) as f64
}

/// `(1/ν(Q)) ∫_Q |b − ⟨b⟩_Q|`, with `⟨b⟩_Q` the unweighted average.
pub fn mean_oscillation(b: &GridFunction, q: &CellBox, nu: &Weight) -> f64 {
    let grid = b.grid();
    let avg = plain_average(b, q);
    let v = b.values();
    let mut acc = 0.0;
    q.for_each_cell(grid, |c| acc += (v[c] - avg).abs());
    acc * grid.cell_volume() / nu.measure(q)
}

/// Unweighted `(1/|Q|) ∫_Q |b − ⟨b⟩_Q|`.
pub fn plain_oscillation(b: &GridFunction, q: &CellBox) -> f64 {
    let grid = b.grid();
    let avg = plain_average(b, q);
    let v = b.values();
    let mut acc = 0.0;
    q.for_each_cell(grid, |c| acc += (v[c] - avg).abs());
    acc / q.cell_count(grid) as f64
}

/// The two `L^p`-type oscillations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpVariant {
    /// `((1/λ₁(Q)) ∫_Q |b − ⟨b⟩_Q|^p λ₂)^{1/p}`
    Primal,
    /// `((1/λ₂′(Q)) ∫_Q |b − ⟨b⟩_Q|^{p′} λ₁′)^{1/p′}` with `λ′ = λ^{−1/(p−1)}`
    Dual,
}

/// Per-cube oscillation functional.
pub trait OscillationFunctional: Sync {
    fn eval(&self, b: &GridFunction, q: &CellBox) -> f64;
}

struct MeanOsc<'a>(&'a Weight);

impl OscillationFunctional for MeanOsc<'_> {
    fn eval(&self, b: &GridFunction, q: &CellBox) -> f64 {
        mean_oscillation(b, q, self.0)
    }
}

/// `L^r` oscillation of `b` against `density`, normalized by `normalizer(Q)`.
pub struct LpOsc {
    exponent: f64,
    density: Weight,
    normalizer: Weight,
}

impl LpOsc {
    pub fn new(lambda1: &Weight, lambda2: &Weight, p: f64, variant: LpVariant) -> Result<Self> {
        if !(p > 1.0) {
            return Err(invalid(format!("p must exceed 1, got {p}")));
        }
        lambda1.func().check_same_grid(lambda2.func())?;
        Ok(match variant {
            LpVariant::Primal => Self {
                exponent: p,
                density: lambda2.clone(),
                normalizer: lambda1.clone(),
            },
            LpVariant::Dual => {
                let e = -1.0 / (p - 1.0);
                Self {
                    exponent: p / (p - 1.0),
                    density: lambda1.power(e)?,
                    normalizer: lambda2.power(e)?,
                }
            }
        })
    }
}

impl OscillationFunctional for LpOsc {
    fn eval(&self, b: &GridFunction, q: &CellBox) -> f64 {
        let grid = b.grid();
        let avg = plain_average(b, q);
        let v = b.values();
        let d = self.density.values();
        let mut acc = 0.0;
        q.for_each_cell(grid, |c| {
            acc += (v[c] - avg).abs().powf(self.exponent) * d[c]
        });
        (acc * grid.cell_volume() / self.normalizer.measure(q)).powf(1.0 / self.exponent)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CubeOscillation {
    pub cube: DyadicCube,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OscillationReport {
    pub bmo_norm: f64,
    pub argmax: DyadicCube,
    pub table: Vec<CubeOscillation>,
}

fn oscillation_table(
    b: &GridFunction,
    lattices: &LatticeSet,
    f: &dyn OscillationFunctional,
) -> Vec<(DyadicCube, CellBox, f64)> {
    lattices
        .all_cubes()
        .into_par_iter()
        .map(|(cube, q)| {
            let v = f.eval(b, &q);
            (cube, q, v)
        })
        .collect()
}

/// `‖b‖_{BMO_ν}` as the maximum over every cube of `lattices`.
pub fn bmo_norm(b: &GridFunction, nu: &Weight, lattices: &LatticeSet) -> Result<OscillationReport> {
    b.check_same_grid(nu.func())?;
    let table = oscillation_table(b, lattices, &MeanOsc(nu));
    let (argmax, bmo_norm) = table
        .iter()
        .fold(None::<(DyadicCube, f64)>, |best, (c, _, v)| match best {
            Some((_, bv)) if bv >= *v => best,
            _ => Some((*c, *v)),
        })
        .ok_or_else(|| invalid("lattice set has no cubes"))?;
    let table = table
        .into_iter()
        .map(|(cube, _, value)| CubeOscillation { cube, value })
        .collect();
    Ok(OscillationReport {
        bmo_norm,
        argmax,
        table,
    })
}

/// One point of a modulus curve; `value` is `None` when no cube qualifies.
#[derive(Debug, Clone, Serialize)]
pub struct ScalePoint {
    pub level: u32,
    pub side: f64,
    pub value: Option<f64>,
}

/// The three vanishing-oscillation moduli.
///
/// `small_scale` and `large_scale` hold the sup of the oscillation over the
/// cubes of side `2^-k` for levels `k ≥ ⌈L/2⌉` and `k < ⌈L/2⌉`
/// respectively; single cells are left out since their oscillation is
/// identically zero. `far_away` at level `k` is the sup over cubes disjoint
/// from the central cube of side `2^-k`.
#[derive(Debug, Clone, Serialize)]
pub struct VmoModuli {
    pub small_scale: Vec<ScalePoint>,
    pub large_scale: Vec<ScalePoint>,
    pub far_away: Vec<ScalePoint>,
}

impl VmoModuli {
    /// Per-level suprema `s_k` for `k = 0..L−1`.
    pub fn level_sups(&self) -> Vec<f64> {
        self.large_scale
            .iter()
            .chain(&self.small_scale)
            .map(|p| p.value.unwrap_or(0.0))
            .collect()
    }
}

/// Central cube of side `2^-level` around `x0`, shifted to lie inside the
/// domain.
pub fn central_cube(grid: &Grid, x0: [f64; 2], level: u32) -> CellBox {
    let s = grid.side_cells();
    let side = s >> level;
    let mut origin = [0usize; 2];
    for i in 0..grid.n {
        let o = (x0[i] * s as f64 - side as f64 / 2.0).round();
        origin[i] = o.clamp(0.0, (s - side) as f64) as usize;
    }
    CellBox::new(origin, side)
}

fn moduli_from_table(grid: &Grid, table: &[(DyadicCube, CellBox, f64)], x0: [f64; 2]) -> VmoModuli {
    let depth = grid.depth;
    let split = depth.div_ceil(2);
    let mut per_level = vec![None::<f64>; depth as usize];
    for (c, _, v) in table {
        if c.level < depth {
            let e = &mut per_level[c.level as usize];
            *e = Some(e.map_or(*v, |x: f64| x.max(*v)));
        }
    }
    let point = |k: u32, value| ScalePoint {
        level: k,
        side: (-(k as f64)).exp2(),
        value,
    };
    let small_scale = (split..depth)
        .map(|k| point(k, per_level[k as usize]))
        .collect();
    let large_scale = (0..split)
        .map(|k| point(k, per_level[k as usize]))
        .collect();
    let far_away = (0..depth)
        .map(|k| {
            let center = central_cube(grid, x0, k);
            let v = table
                .iter()
                .filter(|(c, q, _)| c.level < depth && !q.intersects(grid, &center))
                .map(|(_, _, v)| *v)
                .fold(None, |a: Option<f64>, v| Some(a.map_or(v, |x| x.max(v))));
            point(k, v)
        })
        .collect();
    VmoModuli {
        small_scale,
        large_scale,
        far_away,
    }
}

fn domain_center(grid: &Grid) -> [f64; 2] {
    [0.5, if grid.n == 2 { 0.5 } else { 0.0 }]
}

/// Moduli of `Osc_ν`; `x0` defaults to the center of the domain.
pub fn vmo_moduli(
    b: &GridFunction,
    nu: &Weight,
    lattices: &LatticeSet,
    x0: Option<[f64; 2]>,
) -> Result<VmoModuli> {
    b.check_same_grid(nu.func())?;
    vmo_moduli_with(b, lattices, &MeanOsc(nu), x0)
}

/// Moduli of the `L^p` / `L^{p′}` oscillation.
pub fn vmo_moduli_lp(
    b: &GridFunction,
    lambda1: &Weight,
    lambda2: &Weight,
    p: f64,
    variant: LpVariant,
    lattices: &LatticeSet,
    x0: Option<[f64; 2]>,
) -> Result<VmoModuli> {
    b.check_same_grid(lambda1.func())?;
    vmo_moduli_with(b, lattices, &LpOsc::new(lambda1, lambda2, p, variant)?, x0)
}

pub fn vmo_moduli_with(
    b: &GridFunction,
    lattices: &LatticeSet,
    f: &dyn OscillationFunctional,
    x0: Option<[f64; 2]>,
) -> Result<VmoModuli> {
    let grid = b.grid();
    let x0 = x0.unwrap_or_else(|| domain_center(grid));
    if (0..grid.n).any(|i| !(0.0..=1.0).contains(&x0[i])) {
        return Err(invalid("central point must lie in the closed unit cube"));
    }
    let table = oscillation_table(b, lattices, f);
    Ok(moduli_from_table(grid, &table, x0))
}

/// Largest oscillation at one level of one lattice.
#[derive(Debug, Clone, Serialize)]
pub struct LevelSup {
    pub level: u32,
    pub value: f64,
    pub argmax: DyadicCube,
    #[serde(skip)]
    pub argmax_box: CellBox,
}

/// `Osc_ν` maximized per level over the cubes of `lattice`; first maximizer
/// in enumeration order wins ties.
pub fn level_sups(b: &GridFunction, nu: &Weight, lattice: &ShiftedLattice) -> Vec<LevelSup> {
    (0..=b.grid().depth)
        .filter_map(|k| {
            let cubes = lattice.cubes_at_level(k);
            let vals: Vec<_> = cubes
                .par_iter()
                .map(|c| {
                    let q = lattice.box_unchecked(c);
                    (mean_oscillation(b, &q, nu), q)
                })
                .collect();
            let mut best: Option<LevelSup> = None;
            for (c, (v, q)) in cubes.iter().zip(vals) {
                if best.as_ref().is_none_or(|s| v > s.value) {
                    best = Some(LevelSup {
                        level: k,
                        value: v,
                        argmax: *c,
                        argmax_box: q,
                    });
                }
            }
            best
        })
        .collect()
}

/// Smallest attained value `m` of `b` on `cells` with
/// `|{b > m}|, |{b < m}| ≤ |E|/2`.
pub fn median_value(b: &GridFunction, cells: &[usize]) -> Result<f64> {
    if cells.is_empty() {
        return Err(invalid("median of an empty set"));
    }
    let v = b.values();
    let mut vals: Vec<f64> = cells.iter().map(|&c| v[c]).collect();
    vals.sort_by(f64::total_cmp);
    let n = vals.len();
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j < n && vals[j] == vals[i] {
            j += 1;
        }
        // below = i, above = n − j
        if 2 * i <= n && 2 * (n - j) <= n {
            return Ok(vals[i]);
        }
        i = j;
    }
    unreachable!("a median always exists")
}
