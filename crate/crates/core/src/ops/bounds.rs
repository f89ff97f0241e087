use serde::Serialize;

use crate::dyadic::{CellBox, DyadicCube, Grid, LatticeSet};
use crate::error::{domain, invalid, Result};
use crate::weights::BloomTriple;

/// A cube of the same size as `B`, translated by `A·r` along the first axis
/// (`r` = half the side), and how small `K_α` gets between the two.
#[derive(Debug, Clone, Serialize)]
pub struct PartnerCube {
    pub partner: CellBox,
    /// Translation in cells; negative means towards the origin.
    pub shift_cells: i64,
    /// `min_{B×B̃} K_α · r^{n−α}` for the continuum cubes.
    pub continuum_min_ratio: f64,
    /// Same minimum over cell-midpoint pairs.
    pub grid_min_ratio: f64,
    /// `(A+2)^{α−n}` in 1D, `((A+2)² + 4(n−1))^{(α−n)/2}` in general,
    /// from the farthest pair of corners.
    pub bound: f64,
    /// Gap between the closed cubes.
    pub distance: f64,
}

pub fn partner_cube(grid: &Grid, b: &CellBox, a: f64, alpha: f64) -> Result<PartnerCube> {
    if !(a >= 4.0) {
        return Err(invalid(format!(
            "separation factor A = {a} must be at least 4"
        )));
    }
    let n = grid.n as f64;
    if !(alpha > 0.0 && alpha < n) {
        return Err(invalid(format!("α = {alpha} must lie in (0, {n})")));
    }
    grid.check_box(b)?;
    let s = grid.side_cells();
    let t = (a * b.side as f64 / 2.0).round() as usize;
    let (origin_x, shift_cells) = if b.origin[0] + t + b.side <= s {
        (b.origin[0] + t, t as i64)
    } else if b.origin[0] >= t {
        (b.origin[0] - t, -(t as i64))
    } else {
        return Err(domain(format!(
            "translating a cube of {} cells by {t} cells leaves the domain either way; use a smaller A or cube",
            b.side
        )));
    };
    let partner = CellBox::new([origin_x, b.origin[1]], b.side);
    let h = grid.cell_width();
    let r = b.side as f64 * h / 2.0;
    let exponent = alpha - n;
    // farthest points: corners along the shift, opposite corners across
    let along = (t + b.side) as f64 * h;
    let across = if grid.n == 2 { b.side as f64 * h } else { 0.0 };
    let continuum_min_ratio = (along.hypot(across) / r).powf(exponent);
    let along_mid = (t + b.side - 1) as f64 * h;
    let across_mid = if grid.n == 2 {
        (b.side - 1) as f64 * h
    } else {
        0.0
    };
    let grid_min_ratio = (along_mid.hypot(across_mid) / r).powf(exponent);
    let bound = ((a + 2.0).powi(2) + 4.0 * (n - 1.0)).sqrt().powf(exponent);
    let distance = b.distance(grid, &partner);
    Ok(PartnerCube {
        partner,
        shift_cells,
        continuum_min_ratio,
        grid_min_ratio,
        bound,
        distance,
    })
}

/// Two sides of `1/ν(Q) ≲ |Q|^{α/n} / (λ₁^p(Q)^{1/p} λ₂^{−q′}(Q)^{1/q′})`.
#[derive(Debug, Clone, Serialize)]
pub struct InverseNuBound {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

pub fn inverse_nu_bound(triple: &BloomTriple, q: &CellBox) -> InverseNuBound {
    let grid = triple.grid();
    let qd = triple.q_dual();
    let lhs = 1.0 / triple.nu.measure(q);
    let l1 = triple
        .lambda1
        .power_integral(triple.p, q)
        .powf(1.0 / triple.p);
    let l2 = triple.lambda2.power_integral(-qd, q).powf(1.0 / qd);
    let rhs = q.side_length(grid).powf(triple.alpha) / (l1 * l2);
    InverseNuBound {
        lhs,
        rhs,
        ratio: lhs / rhs,
    }
}

/// Largest ratio over every cube of `lattices`.
#[derive(Debug, Clone, Serialize)]
pub struct InverseNuSweep {
    pub max_ratio: f64,
    pub min_ratio: f64,
    pub argmax: DyadicCube,
}

pub fn inverse_nu_sweep(triple: &BloomTriple, lattices: &LatticeSet) -> Result<InverseNuSweep> {
    let mut out: Option<InverseNuSweep> = None;
    for (cube, q) in lattices.all_cubes() {
        let r = inverse_nu_bound(triple, &q).ratio;
        match &mut out {
            None => {
                out = Some(InverseNuSweep {
                    max_ratio: r,
                    min_ratio: r,
                    argmax: cube,
                })
            }
            Some(s) => {
                if r > s.max_ratio {
                    s.max_ratio = r;
                    s.argmax = cube;
                }
                s.min_ratio = s.min_ratio.min(r);
            }
        }
    }
    out.ok_or_else(|| invalid("lattice set has no cubes"))
}
