use serde::{Deserialize, Serialize};

use super::Weight;
use crate::dyadic::{Grid, GridFunction};
use crate::error::{invalid, Result};

/// Center of a power weight: a scalar (used on every axis) or a point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Center {
    Scalar(f64),
    Point(Vec<f64>),
}

impl Center {
    fn point(&self, n: usize) -> Result<[f64; 2]> {
        match self {
            Center::Scalar(c) => Ok([*c, if n == 2 { *c } else { 0.0 }]),
            Center::Point(v) if v.len() == n => Ok([v[0], if n == 2 { v[1] } else { 0.0 }]),
            Center::Point(v) => Err(invalid(format!(
                "center has {} coordinates, grid has {n}",
                v.len()
            ))),
        }
    }
}

/// Weight generators, e.g. `{"kind":"power","a":0.5,"center":0.3}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightSpec {
    Constant {
        c: f64,
    },
    /// `|x − center|^a`, averaged over each cell.
    Power {
        a: f64,
        center: Center,
    },
    /// Piecewise constant along the first axis: `values[i]` on the i-th
    /// piece cut at `breaks` (increasing, inside (0,1)).
    Step {
        breaks: Vec<f64>,
        values: Vec<f64>,
    },
    /// `ratio^k` on `[2^-(k+1), 2^-k)` along the first axis.
    Staircase {
        ratio: f64,
    },
    Product {
        factors: Vec<WeightSpec>,
    },
}

pub fn make_weight(grid: Grid, spec: &WeightSpec) -> Result<Weight> {
    Weight::new(weight_values(grid, spec)?)
}

fn weight_values(grid: Grid, spec: &WeightSpec) -> Result<GridFunction> {
    match spec {
        WeightSpec::Constant { c } => {
            if !(*c > 0.0 && c.is_finite()) {
                return Err(invalid(format!(
                    "constant weight must be positive, got {c}"
                )));
            }
            Ok(GridFunction::constant(grid, *c))
        }
        WeightSpec::Power { a, center } => power_weight(grid, *a, center.point(grid.n)?),
        WeightSpec::Step { breaks, values } => {
            if values.len() != breaks.len() + 1 {
                return Err(invalid("step weight needs one more value than breaks"));
            }
            if breaks.windows(2).any(|w| w[0] >= w[1]) {
                return Err(invalid("step breaks must be increasing"));
            }
            GridFunction::from_fn(grid, |x| {
                let piece = breaks.iter().take_while(|b| x[0] >= **b).count();
                values[piece]
            })
        }
        WeightSpec::Staircase { ratio } => {
            if !(*ratio > 0.0) {
                return Err(invalid("staircase ratio must be positive"));
            }
            GridFunction::from_fn(grid, |x| ratio.powi(-(x[0].log2().floor() as i32) - 1))
        }
        WeightSpec::Product { factors } => {
            let mut acc = GridFunction::constant(grid, 1.0);
            for f in factors {
                acc = acc.zip_with(&weight_values(grid, f)?, |a, b| a * b)?;
            }
            Ok(acc)
        }
    }
}

fn power_weight(grid: Grid, a: f64, c: [f64; 2]) -> Result<GridFunction> {
    if a == 0.0 {
        return Ok(GridFunction::constant(grid, 1.0));
    }
    let n = grid.n;
    let inside = (0..n).all(|i| (0.0..=1.0).contains(&c[i]));
    if inside && a <= -(n as f64) {
        return Err(invalid(format!(
            "|x − c|^{a} is not locally integrable in dimension {n} (need a > −{n})"
        )));
    }
    let h = grid.cell_width();
    let values = (0..grid.cell_count())
        .map(|cell| {
            let k = grid.coords(cell);
            let lo = [k[0] as f64 * h, k[1] as f64 * h];
            if n == 1 {
                power_average_1d(a, c[0], lo[0], lo[0] + h)
            } else {
                power_average_2d(a, c, lo, h, 0)
            }
        })
        .collect();
    GridFunction::new(grid, values)
}

/// Exact `(1/h)∫_{x0}^{x1} |x − c|^a dx`.
fn power_average_1d(a: f64, c: f64, x0: f64, x1: f64) -> f64 {
    let prim = |x: f64| {
        let d = x - c;
        if a == -1.0 {
            d.signum() * d.abs().ln()
        } else {
            d.signum() * d.abs().powf(a + 1.0) / (a + 1.0)
        }
    };
    if a == -1.0 && x0 < c && c < x1 {
        return f64::INFINITY;
    }
    (prim(x1) - prim(x0)) / (x1 - x0)
}

const GAUSS3: [(f64, f64); 3] = [
    (0.112_701_665_379_258_31, 5.0 / 18.0),
    (0.5, 8.0 / 18.0),
    (0.887_298_334_620_741_7, 5.0 / 18.0),
];

const MAX_REFINE: u32 = 6;

/// Cell average of `|x − c|^a` on the square `[lo, lo + h)²`: tensor Gauss
/// away from the singularity, recursive refinement near it, and the
/// equal-area disk integral on the innermost piece containing `c`.
fn power_average_2d(a: f64, c: [f64; 2], lo: [f64; 2], h: f64, depth: u32) -> f64 {
    let dx = (c[0] - (lo[0] + h).min(c[0]).max(lo[0])).abs();
    let dy = (c[1] - (lo[1] + h).min(c[1]).max(lo[1])).abs();
    let near = dx.hypot(dy) < h;
    if near && depth < MAX_REFINE {
        let s = h / 2.0;
        let mut acc = 0.0;
        for (ox, oy) in [(0.0, 0.0), (s, 0.0), (0.0, s), (s, s)] {
            acc += power_average_2d(a, c, [lo[0] + ox, lo[1] + oy], s, depth + 1);
        }
        return acc / 4.0;
    }
    let contains = c[0] >= lo[0] && c[0] < lo[0] + h && c[1] >= lo[1] && c[1] < lo[1] + h;
    if contains {
        // disk of area h²: ∫ r^a dA = 2π ρ^{a+2}/(a+2)
        let rho = h / std::f64::consts::PI.sqrt();
        return 2.0 * std::f64::consts::PI * rho.powf(a + 2.0) / (a + 2.0) / (h * h);
    }
    let mut acc = 0.0;
    for (u, wu) in GAUSS3 {
        for (v, wv) in GAUSS3 {
            let x = lo[0] + u * h - c[0];
            let y = lo[1] + v * h - c[1];
            acc += wu * wv * x.hypot(y).powf(a);
        }
    }
    acc
}
