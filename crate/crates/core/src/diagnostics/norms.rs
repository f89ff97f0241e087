use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::dyadic::GridFunction;
use crate::error::{invalid, Result};
use crate::weights::{BloomTriple, Weight};

/// `‖f‖_{L^p(λ^p)} = (∫ |f|^p λ^p)^{1/p}`.
pub fn weighted_norm(f: &GridFunction, lambda: &Weight, p: f64) -> Result<f64> {
    f.check_same_grid(lambda.func())?;
    if !(p >= 1.0 && p.is_finite()) {
        return Err(invalid(format!("norm exponent must be in [1, ∞), got {p}")));
    }
    let h = f.grid().cell_volume();
    let s: f64 = f
        .values()
        .iter()
        .zip(lambda.values())
        .map(|(x, l)| (x.abs() * l).powf(p))
        .sum();
    Ok((s * h).powf(1.0 / p))
}

/// Source `ℓ^p(u)` and target `ℓ^q(v)`: `‖f‖ = (Σ |f_i|^p u_i)^{1/p}`.
#[derive(Debug, Clone)]
pub struct Spaces {
    pub p: f64,
    pub q: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl Spaces {
    pub fn new(p: f64, q: f64, u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if !(p > 1.0 && q >= p && q.is_finite()) {
            return Err(invalid(format!("need 1 < p ≤ q < ∞, got p = {p}, q = {q}")));
        }
        if u.len() != v.len() || u.iter().chain(&v).any(|w| !(*w > 0.0)) {
            return Err(invalid(
                "space weights must be positive and of equal length",
            ));
        }
        Ok(Self { p, q, u, v })
    }

    /// Counting measure on `n` points.
    pub fn counting(n: usize, p: f64, q: f64) -> Result<Self> {
        Self::new(p, q, vec![1.0; n], vec![1.0; n])
    }

    /// `L^p(λ₁^p) → L^q(λ₂^q)` on the grid.
    pub fn from_triple(t: &BloomTriple) -> Result<Self> {
        let h = t.grid().cell_volume();
        let u = t.lambda1.values().iter().map(|l| l.powf(t.p) * h).collect();
        let v = t.lambda2.values().iter().map(|l| l.powf(t.q) * h).collect();
        Self::new(t.p, t.q, u, v)
    }

    pub fn dim(&self) -> usize {
        self.u.len()
    }

    pub fn source_norm(&self, f: &[f64]) -> f64 {
        f.iter()
            .zip(&self.u)
            .map(|(x, w)| x.abs().powf(self.p) * w)
            .sum::<f64>()
            .powf(1.0 / self.p)
    }

    pub fn target_norm(&self, g: &[f64]) -> f64 {
        g.iter()
            .zip(&self.v)
            .map(|(x, w)| x.abs().powf(self.q) * w)
            .sum::<f64>()
            .powf(1.0 / self.q)
    }

    fn p_dual(&self) -> f64 {
        self.p / (self.p - 1.0)
    }
}

/// An operator that maps nonnegative inputs to nonnegative outputs.
pub trait PositiveOperator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, f: &[f64]) -> Vec<f64>;
    /// Transpose of the linearization of the operator at `at`, applied to `g`.
    fn adjoint_at(&self, at: &[f64], g: &[f64]) -> Vec<f64>;
    /// Dense nonnegative `K` (row-major) with `Tf ≤ Kf` for `f ≥ 0`.
    fn majorant(&self) -> Option<Vec<f64>>;
}

/// Nonnegative dense matrix.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    n: usize,
    m: Vec<f64>,
}

impl DenseOperator {
    /// Rejects matrices with negative entries.
    pub fn new(n: usize, m: Vec<f64>) -> Result<Self> {
        if m.len() != n * n {
            return Err(invalid("matrix is not square"));
        }
        if let Some(i) = m.iter().position(|x| !(*x >= 0.0)) {
            return Err(invalid(format!(
                "entry {i} = {} is not nonnegative; use the signed norm instead",
                m[i]
            )));
        }
        Ok(Self { n, m })
    }
}

fn mat_vec(n: usize, m: &[f64], x: &[f64]) -> Vec<f64> {
    (0..n)
        .map(|i| {
            m[i * n..(i + 1) * n]
                .iter()
                .zip(x)
                .map(|(a, b)| a * b)
                .sum()
        })
        .collect()
}

fn mat_t_vec(n: usize, m: &[f64], y: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for i in 0..n {
        if y[i] != 0.0 {
            for (o, a) in out.iter_mut().zip(&m[i * n..(i + 1) * n]) {
                *o += a * y[i];
            }
        }
    }
    out
}

impl PositiveOperator for DenseOperator {
    fn dim(&self) -> usize {
        self.n
    }
    fn apply(&self, f: &[f64]) -> Vec<f64> {
        mat_vec(self.n, &self.m, f)
    }
    fn adjoint_at(&self, _at: &[f64], g: &[f64]) -> Vec<f64> {
        mat_t_vec(self.n, &self.m, g)
    }
    fn majorant(&self) -> Option<Vec<f64>> {
        Some(self.m.clone())
    }
}

/// `[lower, upper]` for an operator norm. `lower` is attained by `witness`.
#[derive(Debug, Clone, Serialize)]
pub struct NormBracket {
    pub lower: f64,
    /// `None` when no majorant is available.
    pub upper: Option<f64>,
    pub iterations: usize,
    /// Best ratio so far after each iteration (nondecreasing).
    pub log: Vec<f64>,
    #[serde(skip)]
    pub witness: Vec<f64>,
    pub witness_support: usize,
}

impl NormBracket {
    /// Bracket of the zero operator.
    pub fn zero() -> Self {
        Self {
            lower: 0.0,
            upper: Some(0.0),
            iterations: 0,
            log: Vec::new(),
            witness: Vec::new(),
            witness_support: 0,
        }
    }
}

pub const MAX_ITERATIONS: usize = 500;
pub const GAIN_TOLERANCE: f64 = 1e-8;

/// Upper bound on `‖K‖_{ℓ^p(u)→ℓ^q(v)}` for `K ≥ 0`: the smaller of the
/// Riesz–Thorin bound `‖B‖_{1→1}^{1/p} ‖B‖_{∞→∞}^{1/p′}` and the Hölder
/// bound `(Σ_i ‖B_{i·}‖_{p′}^q)^{1/q}`, `B = diag(v^{1/q}) |K| diag(u^{−1/p})`.
pub fn majorant_bound(k: &[f64], s: &Spaces) -> f64 {
    let n = s.dim();
    let pd = s.p_dual();
    let du: Vec<f64> = s.u.iter().map(|w| w.powf(-1.0 / s.p)).collect();
    let mut col = vec![0.0; n];
    let mut max_row: f64 = 0.0;
    let mut holder = 0.0;
    for i in 0..n {
        let dv = s.v[i].powf(1.0 / s.q);
        let mut row = 0.0;
        let mut row_pd = 0.0;
        for j in 0..n {
            let b = dv * k[i * n + j].abs() * du[j];
            row += b;
            col[j] += b;
            row_pd += b.powf(pd);
        }
        max_row = max_row.max(row);
        holder += row_pd.powf(s.q / pd);
    }
    let max_col = col.iter().fold(0.0f64, |a, b| a.max(*b));
    let rt = max_col.powf(1.0 / s.p) * max_row.powf(1.0 / pd);
    rt.min(holder.powf(1.0 / s.q))
}

fn psi(y: f64, r: f64) -> f64 {
    y.signum() * y.abs().powf(r - 1.0)
}

struct Ascent {
    ratio: f64,
    x: Vec<f64>,
    log: Vec<f64>,
    iterations: usize,
}

/// `(at, g) ↦ Bᵀg` linearized at `at`.
type AdjointFn<'a> = &'a dyn Fn(&[f64], &[f64]) -> Vec<f64>;

/// Fixed-point ascent `x ← ψ_{p′}(Bᵀ ψ_q(Bx))` in the variables
/// `x = u^{1/p} f`, keeping the best iterate.
fn ascend(
    apply: &dyn Fn(&[f64]) -> Vec<f64>,
    adjoint: AdjointFn,
    s: &Spaces,
    start: Vec<f64>,
) -> Ascent {
    let du: Vec<f64> = s.u.iter().map(|w| w.powf(-1.0 / s.p)).collect();
    let dv: Vec<f64> = s.v.iter().map(|w| w.powf(1.0 / s.q)).collect();
    let pd = s.p_dual();
    let lp = |x: &[f64]| {
        x.iter()
            .map(|t| t.abs().powf(s.p))
            .sum::<f64>()
            .powf(1.0 / s.p)
    };
    let mut x = start;
    let nx = lp(&x);
    if nx == 0.0 {
        return Ascent {
            ratio: 0.0,
            x,
            log: vec![0.0],
            iterations: 0,
        };
    }
    x.iter_mut().for_each(|t| *t /= nx);
    let mut best = Ascent {
        ratio: f64::NEG_INFINITY,
        x: x.clone(),
        log: Vec::new(),
        iterations: 0,
    };
    let mut prev = f64::NEG_INFINITY;
    for it in 1..=MAX_ITERATIONS {
        let f: Vec<f64> = x.iter().zip(&du).map(|(a, d)| a * d).collect();
        let tf = apply(&f);
        let z: Vec<f64> = tf.iter().zip(&dv).map(|(a, d)| a * d).collect();
        let ratio = z
            .iter()
            .map(|t| t.abs().powf(s.q))
            .sum::<f64>()
            .powf(1.0 / s.q);
        if ratio > best.ratio {
            best.ratio = ratio;
            best.x = x.clone();
        }
        best.log.push(best.ratio);
        best.iterations = it;
        if ratio == 0.0 || (it > 1 && ratio - prev <= GAIN_TOLERANCE * prev.abs()) {
            break;
        }
        prev = ratio;
        let g: Vec<f64> = z.iter().zip(&dv).map(|(a, d)| psi(*a, s.q) * d).collect();
        let t = adjoint(&f, &g);
        let mut nxt: Vec<f64> = t.iter().zip(&du).map(|(a, d)| psi(a * d, pd)).collect();
        let nn = lp(&nxt);
        if !(nn > 0.0) || !nn.is_finite() {
            break;
        }
        nxt.iter_mut().for_each(|a| *a /= nn);
        x = nxt;
    }
    best
}

fn finish(
    op_apply: &dyn Fn(&[f64]) -> Vec<f64>,
    s: &Spaces,
    best: Ascent,
    upper: Option<f64>,
) -> NormBracket {
    let du: Vec<f64> = s.u.iter().map(|w| w.powf(-1.0 / s.p)).collect();
    let witness: Vec<f64> = best.x.iter().zip(&du).map(|(a, d)| a * d).collect();
    let nf = s.source_norm(&witness);
    let lower = if nf > 0.0 {
        s.target_norm(&op_apply(&witness)) / nf
    } else {
        0.0
    };
    let witness_support = witness.iter().filter(|w| **w != 0.0).count();
    NormBracket {
        lower,
        upper,
        iterations: best.iterations,
        log: best.log,
        witness,
        witness_support,
    }
}

/// Norm bracket of a positive operator by Boyd's power-type iteration from
/// the constant start; the upper end comes from the declared majorant.
pub fn boyd_norm(op: &dyn PositiveOperator, s: &Spaces) -> Result<NormBracket> {
    if op.dim() != s.dim() {
        return Err(invalid("operator and spaces have different dimensions"));
    }
    let upper = op.majorant().map(|k| majorant_bound(&k, s));
    let apply = |f: &[f64]| op.apply(f);
    let adjoint = |a: &[f64], g: &[f64]| op.adjoint_at(a, g);
    let best = ascend(&apply, &adjoint, s, vec![1.0; s.dim()]);
    let mut b = finish(&apply, s, best, upper);
    if let Some(u) = b.upper {
        // a positive witness can only undershoot the majorant by rounding
        b.upper = Some(u.max(b.lower));
    }
    Ok(b)
}

/// Norm bracket of a signed matrix: multi-start ascent for the lower end
/// (constant start, the Boyd witness of `|M|`, and `starts` Gaussian
/// vectors from `seed`), majorant bound of `|M|` for the upper end.
pub fn signed_norm(m: &[f64], s: &Spaces, starts: usize, seed: u64) -> Result<NormBracket> {
    let n = s.dim();
    if m.len() != n * n {
        return Err(invalid("matrix does not match the spaces"));
    }
    let abs = DenseOperator::new(n, m.iter().map(|x| x.abs()).collect())?;
    let abs_bracket = boyd_norm(&abs, s)?;
    let apply = |f: &[f64]| mat_vec(n, m, f);
    let adjoint = |_: &[f64], g: &[f64]| mat_t_vec(n, m, g);
    let mut candidates = vec![
        vec![1.0; n],
        abs_bracket
            .witness
            .iter()
            .zip(&s.u)
            .map(|(f, w)| f * w.powf(1.0 / s.p))
            .collect(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..starts {
        candidates.push((0..n).map(|_| StandardNormal.sample(&mut rng)).collect());
    }
    let mut best: Option<Ascent> = None;
    for c in candidates {
        let a = ascend(&apply, &adjoint, s, c);
        if best.as_ref().is_none_or(|b| a.ratio > b.ratio) {
            best = Some(a);
        }
    }
    let best = best.expect("at least one start");
    let upper = abs_bracket.upper.map(|u| u.max(abs_bracket.lower));
    let mut b = finish(&apply, s, best, upper);
    if let Some(u) = b.upper {
        b.upper = Some(u.max(b.lower));
    }
    Ok(b)
}
