//! Generators for symbols `b` and test functions `f`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dyadic::{Grid, GridFunction};
use crate::error::{invalid, Result};
use crate::weights::Center;

fn one() -> f64 {
    1.0
}

fn center_point(c: &Center, n: usize) -> Result<[f64; 2]> {
    match c {
        Center::Scalar(v) => Ok([*v, if n == 2 { *v } else { 0.0 }]),
        Center::Point(v) if v.len() == n => Ok([v[0], if n == 2 { v[1] } else { 0.0 }]),
        Center::Point(v) => Err(invalid(format!(
            "point has {} coordinates, grid has {n}",
            v.len()
        ))),
    }
}

fn dist(x: [f64; 2], c: [f64; 2], n: usize) -> f64 {
    (0..n).map(|i| (x[i] - c[i]).powi(2)).sum::<f64>().sqrt()
}

/// Grid function recipes, e.g. `{"kind":"bump","center":0.5,"radius":0.3}`.
/// Everything except `random` is sampled at cell midpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionSpec {
    Constant {
        c: f64,
    },
    /// `height · exp(1 − 1/(1 − (|x−c|/radius)²))` inside the ball, 0 outside.
    Bump {
        center: Center,
        radius: f64,
        #[serde(default = "one")]
        height: f64,
    },
    /// `1` on the left half of `[2^-k, 2^{1−k})` for `k = 1..L−1` (first
    /// axis), `0` elsewhere: mean oscillation `1/2` at every dyadic scale.
    Oscillator,
    /// `low` for `x₀ < at`, `high` otherwise.
    Step {
        at: f64,
        #[serde(default)]
        low: f64,
        #[serde(default = "one")]
        high: f64,
    },
    /// `log |x − c|`, with the distance floored at a quarter cell.
    Log {
        center: Center,
    },
    /// `Σ coeffs[k] x₀^k` (plus the same polynomial in `x₁` when `n = 2`).
    Polynomial {
        coeffs: Vec<f64>,
    },
    /// Independent uniform values on `[low, high)`.
    Random {
        seed: u64,
        #[serde(default)]
        low: f64,
        #[serde(default = "one")]
        high: f64,
    },
    /// `height` on the cells of the aligned cube of side `width` containing
    /// `at`, 0 elsewhere.
    Spike {
        at: Center,
        width: f64,
        #[serde(default = "one")]
        height: f64,
    },
}

pub fn make_function(grid: Grid, spec: &FunctionSpec) -> Result<GridFunction> {
    let n = grid.n;
    match spec {
        FunctionSpec::Constant { c } => Ok(GridFunction::constant(grid, *c)),
        FunctionSpec::Bump {
            center,
            radius,
            height,
        } => {
            if !(*radius > 0.0) {
                return Err(invalid("bump radius must be positive"));
            }
            let c = center_point(center, n)?;
            GridFunction::from_fn(grid, |x| {
                let t = dist(x, c, n) / radius;
                if t < 1.0 {
                    height * (1.0 - 1.0 / (1.0 - t * t)).exp()
                } else {
                    0.0
                }
            })
        }
        FunctionSpec::Oscillator => {
            let depth = grid.depth as i32;
            GridFunction::from_fn(grid, |x| {
                if (1..depth)
                    .any(|k| {
                        let lo = (-k as f64).exp2();
                        x[0] >= lo && x[0] < 1.5 * lo
                    }) { 1.0 } else { 0.0 }
            })
        }
        FunctionSpec::Step { at, low, high } => {
            GridFunction::from_fn(grid, |x| if x[0] < *at { *low } else { *high })
        }
        FunctionSpec::Log { center } => {
            let c = center_point(center, n)?;
            let floor = grid.cell_width() / 4.0;
            GridFunction::from_fn(grid, |x| dist(x, c, n).max(floor).ln())
        }
        FunctionSpec::Polynomial { coeffs } => {
            let p = |t: f64| coeffs.iter().rev().fold(0.0, |acc, a| acc * t + a);
            GridFunction::from_fn(grid, |x| if n == 2 { p(x[0]) + p(x[1]) } else { p(x[0]) })
        }
        FunctionSpec::Random { seed, low, high } => {
            if !(low < high) {
                return Err(invalid("random range must satisfy low < high"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            GridFunction::new(
                grid,
                (0..grid.cell_count())
                    .map(|_| rng.random_range(*low..*high))
                    .collect(),
            )
        }
        FunctionSpec::Spike { at, width, height } => {
            let c = center_point(at, n)?;
            let s = grid.side_cells();
            let cells = ((width * s as f64).round() as usize).max(1);
            if !cells.is_power_of_two() || cells > s {
                return Err(invalid(format!(
                    "spike width {width} is not a dyadic width on this grid"
                )));
            }
            let mut origin = [0usize; 2];
            for i in 0..n {
                let k = ((c[i] * s as f64).floor() as usize).min(s - 1);
                origin[i] = k / cells * cells;
            }
            let b = crate::dyadic::CellBox::new(origin, cells);
            let mut v = vec![0.0; grid.cell_count()];
            b.for_each_cell(&grid, |i| v[i] = *height);
            GridFunction::new(grid, v)
        }
    }
}
