use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::norms::{boyd_norm, signed_norm, NormBracket, PositiveOperator, Spaces};
use crate::dyadic::{CellBox, Grid, GridFunction, LatticeSet};
use crate::error::{invalid, Error, Result};
use crate::ops::{self, KernelMatrix};
use crate::sparse::{SparseFamily, SparseKind, SparseOperator};

/// `Σ_i w_i |b_i − x|` for every query `x`, by sorting the points once.
fn abs_diff_sums(points: &mut [(f64, f64)], queries: &[f64]) -> Vec<f64> {
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut cum_w = Vec::with_capacity(points.len() + 1);
    let mut cum_bw = Vec::with_capacity(points.len() + 1);
    cum_w.push(0.0);
    cum_bw.push(0.0);
    for (b, w) in points.iter() {
        cum_w.push(cum_w.last().unwrap() + w);
        cum_bw.push(cum_bw.last().unwrap() + b * w);
    }
    let (tw, tbw) = (*cum_w.last().unwrap(), *cum_bw.last().unwrap());
    queries
        .iter()
        .map(|&x| {
            let k = points.partition_point(|p| p.0 < x);
            let below = x * cum_w[k] - cum_bw[k];
            let above = (tbw - cum_bw[k]) - x * (tw - cum_w[k]);
            (below + above).max(0.0)
        })
        .collect()
}

/// `x ↦ sup_{Q∋x} side(Q)^α ⟨|f|⟩_Q` (or the commutator version
/// `side^α ⟨|b(x) − b||f|⟩_Q` when `b` is given) over an explicit cube list.
/// Cells covered by no cube map to 0.
#[derive(Debug, Clone)]
pub struct MaximalOperator {
    grid: Grid,
    cubes: Vec<CellBox>,
    cells: Vec<Vec<usize>>,
    scale: Vec<f64>,
    b: Option<Vec<f64>>,
}

impl MaximalOperator {
    pub fn new(
        grid: Grid,
        cubes: Vec<CellBox>,
        alpha: f64,
        b: Option<&GridFunction>,
    ) -> Result<Self> {
        if !(0.0..grid.n as f64).contains(&alpha) {
            return Err(invalid(format!("α = {alpha} must lie in [0, {})", grid.n)));
        }
        let cells = cubes.iter().map(|q| q.cells(&grid)).collect();
        let scale = cubes
            .iter()
            .map(|q| q.side_length(&grid).powf(alpha))
            .collect();
        let b = b.map(|b| b.values().to_vec());
        Ok(Self {
            grid,
            cubes,
            cells,
            scale,
            b,
        })
    }

    /// Every cube of `lattices`.
    pub fn over_lattices(
        lattices: &LatticeSet,
        alpha: f64,
        b: Option<&GridFunction>,
    ) -> Result<Self> {
        let cubes = lattices.all_cubes().into_iter().map(|(_, q)| q).collect();
        Self::new(*lattices.grid(), cubes, alpha, b)
    }

    pub fn cube_count(&self) -> usize {
        self.cubes.len()
    }

    fn cube_values(&self, k: usize, f: &[f64]) -> Vec<(usize, f64)> {
        let c = &self.cells[k];
        match &self.b {
            None => {
                let v = self.scale[k] * c.iter().map(|&i| f[i].abs()).sum::<f64>() / c.len() as f64;
                c.iter().map(|&i| (i, v)).collect()
            }
            Some(b) => ops::commutator_on_cube(c, f, b, self.scale[k]),
        }
    }

    /// Values and the maximizing cube (index into the list) per cell.
    fn evaluate(&self, f: &[f64]) -> (Vec<f64>, Vec<usize>) {
        let n = self.grid.cell_count();
        let per_cube: Vec<Vec<(usize, f64)>> = (0..self.cubes.len())
            .into_par_iter()
            .map(|k| self.cube_values(k, f))
            .collect();
        let mut val = vec![0.0; n];
        let mut arg = vec![usize::MAX; n];
        for (k, list) in per_cube.into_iter().enumerate() {
            for (i, v) in list {
                if arg[i] == usize::MAX || v > val[i] {
                    val[i] = v;
                    arg[i] = k;
                }
            }
        }
        (val, arg)
    }
}

impl PositiveOperator for MaximalOperator {
    fn dim(&self) -> usize {
        self.grid.cell_count()
    }

    fn apply(&self, f: &[f64]) -> Vec<f64> {
        self.evaluate(f).0
    }

    fn adjoint_at(&self, at: &[f64], g: &[f64]) -> Vec<f64> {
        let (_, arg) = self.evaluate(at);
        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); self.cubes.len()];
        for (i, &k) in arg.iter().enumerate() {
            if k != usize::MAX && g[i] != 0.0 {
                groups[k].push(i);
            }
        }
        let contrib: Vec<(usize, Vec<f64>)> = groups
            .par_iter()
            .enumerate()
            .filter(|(_, rows)| !rows.is_empty())
            .map(|(k, rows)| {
                let c = &self.cells[k];
                let s = self.scale[k] / c.len() as f64;
                let vals = match &self.b {
                    None => {
                        let t: f64 = rows.iter().map(|&i| g[i]).sum();
                        vec![s * t; c.len()]
                    }
                    Some(b) => {
                        let mut pts: Vec<(f64, f64)> = rows.iter().map(|&i| (b[i], g[i])).collect();
                        let q: Vec<f64> = c.iter().map(|&j| b[j]).collect();
                        abs_diff_sums(&mut pts, &q)
                            .into_iter()
                            .map(|v| s * v)
                            .collect()
                    }
                };
                (k, vals)
            })
            .collect();
        let mut out = vec![0.0; self.dim()];
        for (k, vals) in contrib {
            for (&j, v) in self.cells[k].iter().zip(vals) {
                out[j] += v;
            }
        }
        out
    }

    /// The sum over all cubes instead of the supremum.
    fn majorant(&self) -> Option<Vec<f64>> {
        let n = self.dim();
        let mut m = vec![0.0; n * n];
        for (k, c) in self.cells.iter().enumerate() {
            let s = self.scale[k] / c.len() as f64;
            for &i in c {
                let row = &mut m[i * n..(i + 1) * n];
                match &self.b {
                    None => c.iter().for_each(|&j| row[j] += s),
                    Some(b) => c.iter().for_each(|&j| row[j] += s * (b[i] - b[j]).abs()),
                }
            }
        }
        Some(m)
    }
}

impl PositiveOperator for SparseOperator {
    fn dim(&self) -> usize {
        self.cell_count()
    }
    fn apply(&self, f: &[f64]) -> Vec<f64> {
        SparseOperator::apply(self, f)
    }
    fn adjoint_at(&self, _at: &[f64], g: &[f64]) -> Vec<f64> {
        self.apply_transpose(g)
    }
    fn majorant(&self) -> Option<Vec<f64>> {
        Some(self.matrix())
    }
}

/// Positive part `K_α` of the Riesz potential, or the commutator majorant
/// `|b(x) − b(y)| K_α` when `b` is given.
pub struct KernelOperator {
    kernel: KernelMatrix,
    b: Option<Vec<f64>>,
}

impl KernelOperator {
    pub fn new(grid: Grid, alpha: f64, b: Option<&GridFunction>) -> Result<Self> {
        Ok(Self {
            kernel: KernelMatrix::new(grid, alpha)?,
            b: b.map(|b| b.values().to_vec()),
        })
    }
}

impl PositiveOperator for KernelOperator {
    fn dim(&self) -> usize {
        self.kernel.grid().cell_count()
    }
    fn apply(&self, f: &[f64]) -> Vec<f64> {
        match &self.b {
            None => self.kernel.apply(f),
            Some(b) => self.kernel.apply_majorant(f, b),
        }
    }
    fn adjoint_at(&self, _at: &[f64], g: &[f64]) -> Vec<f64> {
        // both kernels are symmetric
        self.apply(g)
    }
    fn majorant(&self) -> Option<Vec<f64>> {
        Some(match &self.b {
            None => self.kernel.dense(),
            Some(b) => self.kernel.dense_with(|i, j| (b[i] - b[j]).abs()),
        })
    }
}

/// Sum of positive operators.
pub struct SumOperator(pub Vec<Box<dyn PositiveOperator + Send>>);

impl PositiveOperator for SumOperator {
    fn dim(&self) -> usize {
        self.0.first().map_or(0, |o| o.dim())
    }
    fn apply(&self, f: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; f.len()];
        for o in &self.0 {
            out.iter_mut().zip(o.apply(f)).for_each(|(a, b)| *a += b);
        }
        out
    }
    fn adjoint_at(&self, at: &[f64], g: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; g.len()];
        for o in &self.0 {
            out.iter_mut()
                .zip(o.adjoint_at(at, g))
                .for_each(|(a, b)| *a += b);
        }
        out
    }
    fn majorant(&self) -> Option<Vec<f64>> {
        let mut acc: Option<Vec<f64>> = None;
        for o in &self.0 {
            let m = o.majorant()?;
            acc = Some(match acc {
                None => m,
                Some(mut a) => {
                    a.iter_mut().zip(m).for_each(|(x, y)| *x += y);
                    a
                }
            });
        }
        acc
    }
}

/// Operators addressable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OperatorName {
    #[serde(rename = "M_alpha")]
    MAlpha,
    #[serde(rename = "M_alpha_b")]
    MAlphaB,
    #[serde(rename = "bracket_b_M_alpha")]
    BracketBMAlpha,
    #[serde(rename = "I_alpha")]
    IAlpha,
    #[serde(rename = "bracket_b_I_alpha")]
    BracketBIAlpha,
    #[serde(rename = "T_S")]
    TS,
    #[serde(rename = "T_S_alpha")]
    TSAlpha,
    #[serde(rename = "T_S_b_alpha")]
    TSBAlpha,
    #[serde(rename = "T_S_b_alpha_star")]
    TSBAlphaStar,
}

impl OperatorName {
    pub const ALL: [OperatorName; 9] = [
        Self::MAlpha,
        Self::MAlphaB,
        Self::BracketBMAlpha,
        Self::IAlpha,
        Self::BracketBIAlpha,
        Self::TS,
        Self::TSAlpha,
        Self::TSBAlpha,
        Self::TSBAlphaStar,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::MAlpha => "M_alpha",
            Self::MAlphaB => "M_alpha_b",
            Self::BracketBMAlpha => "bracket_b_M_alpha",
            Self::IAlpha => "I_alpha",
            Self::BracketBIAlpha => "bracket_b_I_alpha",
            Self::TS => "T_S",
            Self::TSAlpha => "T_S_alpha",
            Self::TSBAlpha => "T_S_b_alpha",
            Self::TSBAlphaStar => "T_S_b_alpha_star",
        }
    }

    pub fn needs_symbol(&self) -> bool {
        matches!(
            self,
            Self::MAlphaB
                | Self::BracketBMAlpha
                | Self::BracketBIAlpha
                | Self::TSBAlpha
                | Self::TSBAlphaStar
        )
    }

    pub fn needs_family(&self) -> bool {
        matches!(
            self,
            Self::TS | Self::TSAlpha | Self::TSBAlpha | Self::TSBAlphaStar
        )
    }
}

impl fmt::Display for OperatorName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OperatorName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .find(|o| o.as_str() == s)
            .copied()
            .ok_or_else(|| Error::Unknown(format!("operator `{s}`")))
    }
}

/// Everything a named operator may need.
#[derive(Clone, Copy)]
pub struct OperatorInputs<'a> {
    pub alpha: f64,
    pub b: Option<&'a GridFunction>,
    pub lattices: &'a LatticeSet,
    pub family: Option<&'a SparseFamily>,
}

impl OperatorInputs<'_> {
    fn symbol(&self, name: OperatorName) -> Result<&GridFunction> {
        self.b
            .ok_or_else(|| invalid(format!("{name} needs a symbol b")))
    }

    fn family(&self, name: OperatorName) -> Result<&SparseFamily> {
        self.family
            .ok_or_else(|| invalid(format!("{name} needs a sparse family")))
    }
}

/// Evaluates a named operator on `f`.
pub fn apply_operator(
    name: OperatorName,
    f: &GridFunction,
    inp: &OperatorInputs,
) -> Result<GridFunction> {
    use OperatorName::*;
    let a = inp.alpha;
    match name {
        MAlpha => ops::frac_maximal(f, a, inp.lattices),
        MAlphaB => ops::frac_maximal_commutator(f, inp.symbol(name)?, a, inp.lattices),
        BracketBMAlpha => ops::maximal_commutator(f, inp.symbol(name)?, a, inp.lattices),
        IAlpha => ops::riesz_potential(f, a),
        BracketBIAlpha => ops::riesz_commutator(f, inp.symbol(name)?, a),
        TS => crate::sparse::apply_t_s(f, inp.family(name)?),
        TSAlpha => crate::sparse::apply_t_s_alpha(f, inp.family(name)?, a),
        TSBAlpha => {
            crate::sparse::apply_t_s_b_alpha(f, inp.symbol(name)?, inp.family(name)?, a, false)
        }
        TSBAlphaStar => {
            crate::sparse::apply_t_s_b_alpha(f, inp.symbol(name)?, inp.family(name)?, a, true)
        }
    }
}

/// The positive operator that the norm diagnostics iterate with.
pub fn positive_operator(
    name: OperatorName,
    inp: &OperatorInputs,
) -> Result<Box<dyn PositiveOperator + Send>> {
    use OperatorName::*;
    let grid = *inp.lattices.grid();
    let a = inp.alpha;
    Ok(match name {
        MAlpha => Box::new(MaximalOperator::over_lattices(inp.lattices, a, None)?),
        MAlphaB => Box::new(MaximalOperator::over_lattices(
            inp.lattices,
            a,
            Some(inp.symbol(name)?),
        )?),
        IAlpha => Box::new(KernelOperator::new(grid, a, None)?),
        TS | TSAlpha | TSBAlpha | TSBAlphaStar => {
            let kind = match name {
                TS => SparseKind::Plain,
                TSAlpha => SparseKind::Fractional,
                TSBAlpha => SparseKind::Symbol,
                _ => SparseKind::SymbolAdjoint,
            };
            Box::new(SparseOperator::new(inp.family(name)?, kind, a, inp.b)?)
        }
        BracketBIAlpha | BracketBMAlpha => {
            return Err(invalid(format!("{name} is not a positive operator")));
        }
    })
}

/// Seeded Gaussian starts used by the signed norm.
pub const SIGNED_STARTS: usize = 16;

/// `‖T‖_{L^p(λ₁^p)→L^q(λ₂^q)}` bracket for a named operator. `[b, I_α]` is
/// handled as a signed matrix with the majorant `|b(x) − b(y)|K_α` as its
/// upper end; `[b, M_α]` is rejected (use `M_alpha_b`, which dominates it).
pub fn operator_norm(
    name: OperatorName,
    inp: &OperatorInputs,
    spaces: &Spaces,
    seed: u64,
) -> Result<NormBracket> {
    match name {
        OperatorName::BracketBIAlpha => {
            let b = inp.symbol(name)?.values().to_vec();
            let k = KernelMatrix::new(*inp.lattices.grid(), inp.alpha)?;
            let m = k.dense_with(|i, j| b[i] - b[j]);
            signed_norm(&m, spaces, SIGNED_STARTS, seed)
        }
        OperatorName::BracketBMAlpha => Err(invalid(
            "[b, M_α] is neither linear nor positive; bracket M_alpha_b, which dominates it for b ≥ 0",
        )),
        _ => boyd_norm(positive_operator(name, inp)?.as_ref(), spaces),
    }
}
