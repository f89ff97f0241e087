use serde::Serialize;

use super::Weight;
use crate::dyadic::{CellBox, DyadicCube, LatticeSet};
use crate::error::{invalid, Error, Result};

/// Supremum of a cube functional together with the cube attaining it.
#[derive(Debug, Clone, Serialize)]
pub struct Characteristic {
    pub value: f64,
    pub argmax: DyadicCube,
    #[serde(skip)]
    pub argmax_box: CellBox,
}

fn sup_over_cubes(lattices: &LatticeSet, f: impl Fn(&CellBox) -> f64) -> Result<Characteristic> {
    let mut best: Option<Characteristic> = None;
    for (cube, b) in lattices.all_cubes() {
        let v = f(&b);
        if best.as_ref().is_none_or(|c| v > c.value) {
            best = Some(Characteristic {
                value: v,
                argmax: cube,
                argmax_box: b,
            });
        }
    }
    best.ok_or_else(|| invalid("lattice set has no cubes"))
}

/// `[ω]_{A_p} = sup_Q ⟨ω⟩_Q ⟨ω^{1−p'}⟩_Q^{p−1}` over the cubes of `lattices`.
pub fn ap_characteristic(w: &Weight, p: f64, lattices: &LatticeSet) -> Result<Characteristic> {
    if !(p > 1.0) {
        return Err(invalid(format!("A_p needs p > 1, got {p}")));
    }
    let e = -1.0 / (p - 1.0);
    let w = w.clone().with_powers(&[e])?;
    sup_over_cubes(lattices, |b| {
        w.average(b) * w.power_average(e, b).powf(p - 1.0)
    })
}

/// `[ω]_{A_{p,q}} = sup_Q ⟨ω^q⟩_Q ⟨ω^{−p'}⟩_Q^{q/p'}`.
pub fn apq_characteristic(
    w: &Weight,
    p: f64,
    q: f64,
    lattices: &LatticeSet,
) -> Result<Characteristic> {
    if !(p > 1.0 && q >= p) {
        return Err(invalid(format!(
            "A_(p,q) needs 1 < p ≤ q, got p = {p}, q = {q}"
        )));
    }
    let pd = p / (p - 1.0);
    let w = w.clone().with_powers(&[q, -pd])?;
    sup_over_cubes(lattices, |b| {
        w.power_average(q, b) * w.power_average(-pd, b).powf(q / pd)
    })
}

/// Upper bound on the `C₂` constant accepted when choosing `σ`.
pub const SIGMA_C2_CAP: f64 = 100.0;

/// Fitted constants of `C₁(|E|/|B|)^p ≤ ω(E)/ω(B) ≤ C₂(|E|/|B|)^σ`.
#[derive(Debug, Clone, Serialize)]
pub struct DoublingFit {
    pub c1: f64,
    pub c2: f64,
    pub sigma: f64,
    pub pairs: usize,
}

/// Fits the two-sided doubling bounds over all pairs `E ⊆ B` of nested
/// cubes in one lattice. `σ` is the largest value on `{0.05, 0.10, …, 1}`
/// with `C₂(σ) ≤ 100`.
pub fn doubling_exponents(w: &Weight, p: f64, lattices: &LatticeSet) -> Result<DoublingFit> {
    let grid = *w.grid();
    let n = grid.n as f64;
    // (log t, log r) for every strict pair
    let mut samples = Vec::new();
    for lat in lattices.lattices() {
        for (cube, b) in lat.enumerate(|_, _| true) {
            let we = w.measure(&b);
            let mut anc = cube;
            while let Some(parent) = lat.parent(&anc) {
                let pb = lat.cube_box(&parent)?;
                let log_t = -n * (cube.level - parent.level) as f64 * std::f64::consts::LN_2;
                samples.push((log_t, (we / w.measure(&pb)).ln()));
                anc = parent;
            }
        }
    }
    let pairs = samples.len();
    if pairs == 0 {
        // only trivial pairs E = B, where both bounds hold with constant 1
        return Ok(DoublingFit {
            c1: 1.0,
            c2: 1.0,
            sigma: 1.0,
            pairs,
        });
    }
    let c1 = samples
        .iter()
        .map(|(lt, lr)| lr - p * lt)
        .fold(f64::INFINITY, f64::min)
        .min(0.0)
        .exp();
    for step in (1..=20).rev() {
        let sigma = step as f64 * 0.05;
        let c2 = samples
            .iter()
            .map(|(lt, lr)| lr - sigma * lt)
            .fold(f64::NEG_INFINITY, f64::max)
            .max(0.0)
            .exp();
        if c2 <= SIGMA_C2_CAP {
            return Ok(DoublingFit {
                c1,
                c2,
                sigma,
                pairs,
            });
        }
    }
    Err(Error::Precondition(format!(
        "no σ ≥ 0.05 keeps C₂ ≤ {SIGMA_C2_CAP}"
    )))
}

#[cfg(test)]
mod tests {
    use super::super::{make_weight, Center, WeightSpec};
    use super::*;
    use crate::dyadic::Grid;

    #[test]
    fn constant_weight_characteristics_are_one() {
        let g = Grid::new(1, 6).unwrap();
        let l = LatticeSet::one_third(g);
        let w = make_weight(g, &WeightSpec::Constant { c: 3.0 }).unwrap();
        assert!((ap_characteristic(&w, 2.0, &l).unwrap().value - 1.0).abs() < 1e-12);
        let pq = apq_characteristic(&w, 1.5, 3.0, &l).unwrap().value;
        assert!((pq - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_valued_step_a2_constant() {
        // ω = 1 on [0,1/2), K on [1/2,1): root cube gives (1+K)²/(4K)
        let g = Grid::new(1, 6).unwrap();
        let k = 9.0;
        let w = make_weight(
            g,
            &WeightSpec::Step {
                breaks: vec![0.5],
                values: vec![1.0, k],
            },
        )
        .unwrap();
        let c = ap_characteristic(&w, 2.0, &LatticeSet::standard(g)).unwrap();
        assert!((c.value - (1.0 + k).powi(2) / (4.0 * k)).abs() < 1e-12);
        assert_eq!(c.argmax.level, 0);
    }

    #[test]
    fn staircase_doubling_sigma_drops() {
        let g = Grid::new(1, 8).unwrap();
        let l = LatticeSet::standard(g);
        let flat = make_weight(g, &WeightSpec::Constant { c: 1.0 }).unwrap();
        let fit = doubling_exponents(&flat, 2.0, &l).unwrap();
        assert_eq!(fit.sigma, 1.0);
        assert!((fit.c1 - 1.0).abs() < 1e-12);
        let power = make_weight(
            g,
            &WeightSpec::Power {
                a: 2.0,
                center: Center::Scalar(0.0),
            },
        )
        .unwrap();
        let fit2 = doubling_exponents(&power, 4.0, &l).unwrap();
        assert!(fit2.c2 <= SIGMA_C2_CAP);
        assert!(fit2.c1 > 0.0);
    }
}
