use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::SparseFamily;
use crate::dyadic::GridFunction;
use crate::error::{invalid, Result};

/// Which sparse sum to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SparseKind {
    /// `Σ ⟨|f|⟩_Q χ_Q`
    Plain,
    /// `Σ |Q|^{α/n} ⟨|f|⟩_Q χ_Q`
    Fractional,
    /// `Σ |Q|^{α/n} |b(x) − ⟨b⟩_Q| ⟨f⟩_Q χ_Q(x)`
    Symbol,
    /// `Σ |Q|^{α/n} ⟨|b − ⟨b⟩_Q| f⟩_Q χ_Q(x)`, the transpose of `Symbol`
    SymbolAdjoint,
}

/// A sparse operator with per-cube data precomputed.
#[derive(Debug, Clone)]
pub struct SparseOperator {
    family: SparseFamily,
    kind: SparseKind,
    alpha: f64,
    b: Vec<f64>,
    scale: Vec<f64>,
    b_avg: Vec<f64>,
    cells: Vec<Vec<usize>>,
}

impl SparseOperator {
    pub fn new(
        family: &SparseFamily,
        kind: SparseKind,
        alpha: f64,
        b: Option<&GridFunction>,
    ) -> Result<Self> {
        let grid = *family.grid();
        let n = grid.n as f64;
        let alpha = if kind == SparseKind::Plain {
            0.0
        } else {
            alpha
        };
        if !(0.0..n).contains(&alpha) {
            return Err(invalid(format!("α = {alpha} must lie in [0, {n})")));
        }
        let needs_b = matches!(kind, SparseKind::Symbol | SparseKind::SymbolAdjoint);
        let b: Vec<f64> = match (needs_b, b) {
            (true, Some(b)) if b.grid() == &grid => b.values().to_vec(),
            (true, Some(_)) => return Err(invalid("symbol and family live on different grids")),
            (true, None) => return Err(invalid("this sparse operator needs a symbol b")),
            (false, _) => Vec::new(),
        };
        let cells: Vec<Vec<usize>> = family
            .members()
            .iter()
            .map(|m| m.cube_box.cells(&grid))
            .collect();
        let scale = family
            .members()
            .iter()
            .map(|m| m.cube_box.side_length(&grid).powf(alpha))
            .collect();
        let b_avg = if needs_b {
            cells
                .iter()
                .map(|c| c.iter().map(|&i| b[i]).sum::<f64>() / c.len() as f64)
                .collect()
        } else {
            Vec::new()
        };
        Ok(Self {
            family: family.clone(),
            kind,
            alpha,
            b,
            scale,
            b_avg,
            cells,
        })
    }

    pub fn kind(&self) -> SparseKind {
        self.kind
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn family(&self) -> &SparseFamily {
        &self.family
    }

    pub fn cell_count(&self) -> usize {
        self.family.grid().cell_count()
    }

    fn apply_kind(&self, kind: SparseKind, f: &[f64]) -> Vec<f64> {
        let coeffs: Vec<f64> = (0..self.cells.len())
            .into_par_iter()
            .map(|k| {
                let c = &self.cells[k];
                let sum: f64 = match kind {
                    SparseKind::Plain | SparseKind::Fractional => {
                        c.iter().map(|&i| f[i].abs()).sum()
                    }
                    SparseKind::Symbol => c.iter().map(|&i| f[i]).sum(),
                    SparseKind::SymbolAdjoint => c
                        .iter()
                        .map(|&i| (self.b[i] - self.b_avg[k]).abs() * f[i])
                        .sum(),
                };
                self.scale[k] * sum / c.len() as f64
            })
            .collect();
        let mut out = vec![0.0; f.len()];
        for (k, c) in self.cells.iter().enumerate() {
            let a = coeffs[k];
            if kind == SparseKind::Symbol {
                for &i in c {
                    out[i] += a * (self.b[i] - self.b_avg[k]).abs();
                }
            } else {
                for &i in c {
                    out[i] += a;
                }
            }
        }
        out
    }

    /// Applies the operator to raw cell values.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        self.apply_kind(self.kind, f)
    }

    /// Applies the transpose (for `f ≥ 0` in the unsigned variants).
    pub fn apply_transpose(&self, g: &[f64]) -> Vec<f64> {
        let k = match self.kind {
            SparseKind::Symbol => SparseKind::SymbolAdjoint,
            SparseKind::SymbolAdjoint => SparseKind::Symbol,
            k => k,
        };
        self.apply_kind(k, g)
    }

    /// Dense row-major kernel `K` with `(Tf)_i = Σ_j K_ij f_j` for `f ≥ 0`.
    pub fn matrix(&self) -> Vec<f64> {
        let n = self.cell_count();
        let mut m = vec![0.0; n * n];
        for (k, c) in self.cells.iter().enumerate() {
            let base = self.scale[k] / c.len() as f64;
            let dev = |i: usize| (self.b[i] - self.b_avg[k]).abs();
            for &i in c {
                let row_w = if self.kind == SparseKind::Symbol {
                    base * dev(i)
                } else {
                    base
                };
                let row = &mut m[i * n..(i + 1) * n];
                if self.kind == SparseKind::SymbolAdjoint {
                    for &j in c {
                        row[j] += row_w * dev(j);
                    }
                } else {
                    for &j in c {
                        row[j] += row_w;
                    }
                }
            }
        }
        m
    }
}

fn run(
    f: &GridFunction,
    s: &SparseFamily,
    kind: SparseKind,
    alpha: f64,
    b: Option<&GridFunction>,
) -> Result<GridFunction> {
    if f.grid() != s.grid() {
        return Err(invalid("function and family live on different grids"));
    }
    let op = SparseOperator::new(s, kind, alpha, b)?;
    GridFunction::new(*f.grid(), op.apply(f.values()))
}

/// `T_S f = Σ_{Q∈S} ⟨|f|⟩_Q χ_Q`.
pub fn apply_t_s(f: &GridFunction, s: &SparseFamily) -> Result<GridFunction> {
    run(f, s, SparseKind::Plain, 0.0, None)
}

/// `T_S^α f = Σ_{Q∈S} |Q|^{α/n} ⟨|f|⟩_Q χ_Q`.
pub fn apply_t_s_alpha(f: &GridFunction, s: &SparseFamily, alpha: f64) -> Result<GridFunction> {
    run(f, s, SparseKind::Fractional, alpha, None)
}

/// `T^α_{S,b} f`, or its adjoint `(T^α_{S,b})^* f` when `adjoint` is set.
pub fn apply_t_s_b_alpha(
    f: &GridFunction,
    b: &GridFunction,
    s: &SparseFamily,
    alpha: f64,
    adjoint: bool,
) -> Result<GridFunction> {
    let kind = if adjoint {
        SparseKind::SymbolAdjoint
    } else {
        SparseKind::Symbol
    };
    run(f, s, kind, alpha, Some(b))
}
