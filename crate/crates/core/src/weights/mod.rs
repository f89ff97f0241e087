//! Muckenhoupt weights, the Bloom weight `ν = λ₁/λ₂`, and the exponent
//! bundle `(α, p, q)` with `1/p − 1/q = α/n`.

mod characteristic;
mod spec;

pub use characteristic::{
    ap_characteristic, apq_characteristic, doubling_exponents, Characteristic, DoublingFit,
    SIGMA_C2_CAP,
};
pub use spec::{make_weight, Center, WeightSpec};

use crate::dyadic::{CellBox, Grid, GridFunction, PrefixSum};
use crate::error::{invalid, violation, Result};

/// Smallest weight value accepted as a divisor.
pub const MIN_DIVISOR: f64 = 1e-300;

/// Strictly positive grid function with prefix tables for the powers that
/// downstream suprema need.
#[derive(Debug, Clone)]
pub struct Weight {
    func: GridFunction,
    table: PrefixSum,
    powers: Vec<(f64, PrefixSum)>,
}

impl Weight {
    pub fn new(func: GridFunction) -> Result<Self> {
        if let Some((i, v)) = func.values().iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
            return Err(violation(format!(
                "weight must be positive, cell {i} has value {v}"
            )));
        }
        let table = func.prefix();
        Ok(Self {
            func,
            table,
            powers: Vec::new(),
        })
    }

    pub fn unit(grid: Grid) -> Self {
        Self::new(GridFunction::constant(grid, 1.0)).expect("1 is positive")
    }

    /// Precomputes prefix tables for `ω^s`, `s ∈ exponents`.
    pub fn with_powers(mut self, exponents: &[f64]) -> Result<Self> {
        for &s in exponents {
            if s == 1.0 || self.powers.iter().any(|(e, _)| *e == s) {
                continue;
            }
            let pw = self.func.map(|v| v.powf(s))?;
            self.powers.push((s, pw.prefix()));
        }
        Ok(self)
    }

    pub fn func(&self) -> &GridFunction {
        &self.func
    }

    pub fn grid(&self) -> &Grid {
        self.func.grid()
    }

    pub fn values(&self) -> &[f64] {
        self.func.values()
    }

    /// `ω(Q)`.
    #[inline]
    pub fn measure(&self, b: &CellBox) -> f64 {
        self.table.integral(b)
    }

    #[inline]
    pub fn average(&self, b: &CellBox) -> f64 {
        self.table.average(b)
    }

    /// `∫_Q ω^s`, from the cached table when available.
    pub fn power_integral(&self, s: f64, b: &CellBox) -> f64 {
        if s == 1.0 {
            return self.measure(b);
        }
        if let Some((_, t)) = self.powers.iter().find(|(e, _)| *e == s) {
            return t.integral(b);
        }
        let v = self.values();
        let mut acc = 0.0;
        b.for_each_cell(self.grid(), |c| acc += v[c].powf(s));
        acc * self.grid().cell_volume()
    }

    pub fn power_average(&self, s: f64, b: &CellBox) -> f64 {
        self.power_integral(s, b) / b.measure(self.grid())
    }

    /// The weight `ω^s`.
    pub fn power(&self, s: f64) -> Result<Weight> {
        Weight::new(self.func.map(|v| v.powf(s))?)
    }

    pub fn scaled(&self, c: f64) -> Result<Weight> {
        Weight::new(self.func.map(|v| c * v)?)
    }

    pub fn is_constant(&self) -> bool {
        let v = self.values();
        v.iter().all(|x| *x == v[0])
    }
}

/// Pointwise quotient `ν = λ₁/λ₂`.
pub fn bloom_quotient(lambda1: &Weight, lambda2: &Weight) -> Result<Weight> {
    lambda1.func().check_same_grid(lambda2.func())?;
    if let Some(i) = lambda2.values().iter().position(|v| *v < MIN_DIVISOR) {
        return Err(violation(format!(
            "λ₂ at cell {i} is below {MIN_DIVISOR:e}"
        )));
    }
    Weight::new(lambda1.func().zip_with(lambda2.func(), |a, b| a / b)?)
}

/// The off-diagonal exponent/weight bundle `(α, p, q, λ₁, λ₂, ν)`.
///
/// `q` is always derived from `1/q = 1/p − α/n`.
#[derive(Debug, Clone)]
pub struct BloomTriple {
    pub alpha: f64,
    pub p: f64,
    pub q: f64,
    pub lambda1: Weight,
    pub lambda2: Weight,
    pub nu: Weight,
}

impl BloomTriple {
    pub fn new(alpha: f64, p: f64, lambda1: Weight, lambda2: Weight) -> Result<Self> {
        let n = lambda1.grid().n as f64;
        if !(alpha > 0.0 && alpha < n) {
            return Err(invalid(format!("α = {alpha} must lie in (0, {n})")));
        }
        if !(p > 1.0 && p < n / alpha) {
            return Err(invalid(format!(
                "p = {p} must lie in (1, n/α = {})",
                n / alpha
            )));
        }
        let q = 1.0 / (1.0 / p - alpha / n);
        let p_dual = p / (p - 1.0);
        let q_dual = q / (q - 1.0);
        let nu = bloom_quotient(&lambda1, &lambda2)?;
        let lambda1 = lambda1.with_powers(&[p, -p_dual, q])?;
        let lambda2 = lambda2.with_powers(&[q, -q_dual, p, -p_dual])?;
        let triple = Self {
            alpha,
            p,
            q,
            lambda1,
            lambda2,
            nu,
        };
        debug_assert!(triple.relation_defect() <= 1e-12);
        Ok(triple)
    }

    /// Unweighted triple (`λ₁ = λ₂ ≡ 1`).
    pub fn unweighted(grid: Grid, alpha: f64, p: f64) -> Result<Self> {
        Self::new(alpha, p, Weight::unit(grid), Weight::unit(grid))
    }

    pub fn grid(&self) -> &Grid {
        self.lambda1.grid()
    }

    pub fn n(&self) -> usize {
        self.grid().n
    }

    pub fn p_dual(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    pub fn q_dual(&self) -> f64 {
        self.q / (self.q - 1.0)
    }

    /// `|1/p − 1/q − α/n|`.
    pub fn relation_defect(&self) -> f64 {
        (1.0 / self.p - 1.0 / self.q - self.alpha / self.n() as f64).abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quotient_of_equal_weights_is_one() {
        let g = Grid::new(1, 6).unwrap();
        let l = make_weight(
            g,
            &WeightSpec::Power {
                a: 0.4,
                center: Center::Scalar(0.3),
            },
        )
        .unwrap();
        let nu = bloom_quotient(&l, &l).unwrap();
        assert!(nu.values().iter().all(|v| *v == 1.0));
        let nu = bloom_quotient(&l, &Weight::unit(g)).unwrap();
        assert_eq!(nu.values(), l.values());
    }

    #[test]
    fn rejects_nonpositive_weight() {
        let g = Grid::new(1, 2).unwrap();
        let f = GridFunction::new(g, vec![1.0, 0.0, 2.0, 3.0]).unwrap();
        assert!(matches!(
            Weight::new(f),
            Err(crate::Error::InvariantViolation(_))
        ));
    }

    #[test]
    fn triple_derives_q() {
        let g = Grid::new(1, 4).unwrap();
        let t = BloomTriple::unweighted(g, 0.5, 4.0 / 3.0).unwrap();
        assert!((t.q - 4.0).abs() < 1e-12);
        assert!(t.relation_defect() < 1e-12);
        assert!(BloomTriple::unweighted(g, 0.5, 2.5).is_err());
        assert!(BloomTriple::unweighted(g, 1.0, 1.5).is_err());
    }

    #[test]
    fn cached_and_direct_powers_agree() {
        let g = Grid::new(2, 4).unwrap();
        let w = make_weight(
            g,
            &WeightSpec::Power {
                a: 0.3,
                center: Center::Point(vec![0.2, 0.7]),
            },
        )
        .unwrap();
        let cached = w.clone().with_powers(&[2.5]).unwrap();
        let b = CellBox::new([4, 4], 8);
        let d = w.power_integral(2.5, &b);
        let c = cached.power_integral(2.5, &b);
        assert!((d - c).abs() <= 1e-13 * d.abs());
    }
}
