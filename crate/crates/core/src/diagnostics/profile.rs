use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::norms::{boyd_norm, NormBracket, PositiveOperator, Spaces};
use super::operators::{MaximalOperator, OperatorName, SumOperator};
use crate::dyadic::{DyadicCube, GridFunction, LatticeSet, ShiftedLattice};
use crate::error::{invalid, Error, Result};
use crate::sparse::{
    augment_sparse, classify, split_truncation, spread_family, SparseFamily, SparseKind,
    SparseOperator, TruncationClass, TruncationSetting,
};
use crate::weights::BloomTriple;

/// Operators whose tails the profile measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProfileOperator {
    /// `(T^α_{S,b})^*` on a given family.
    #[serde(rename = "T_S_b_alpha_star")]
    TSBAlphaStar,
    /// `M_α^b` restricted to the cubes of the reference lattice.
    #[serde(rename = "M_alpha_b")]
    MAlphaB,
    /// The sparse majorant `Σ_ℓ T^α_{S_ℓ,b} + (T^α_{S_ℓ,b})^*` of `[b, I_α]`.
    #[serde(rename = "bracket_b_I_alpha")]
    BracketBIAlpha,
}

impl FromStr for ProfileOperator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.parse::<OperatorName>()? {
            OperatorName::TSBAlphaStar => Ok(Self::TSBAlphaStar),
            OperatorName::MAlphaB => Ok(Self::MAlphaB),
            OperatorName::BracketBIAlpha => Ok(Self::BracketBIAlpha),
            other => Err(Error::Unknown(format!(
                "operator `{other}` has no compactness profile"
            ))),
        }
    }
}

/// Side threshold `δ` and reference cube `Q_N` (default: the unit cube).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileSetting {
    pub delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_n: Option<DyadicCube>,
}

pub const DEFAULT_LADDER: [f64; 4] = [1.0 / 4.0, 1.0 / 16.0, 1.0 / 64.0, 1.0 / 256.0];

pub fn default_settings() -> Vec<ProfileSetting> {
    DEFAULT_LADDER
        .iter()
        .map(|&delta| ProfileSetting { delta, q_n: None })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileRow {
    pub delta: f64,
    pub n_side: f64,
    pub q_n: DyadicCube,
    /// Cubes in the finite part, i.e. the rank of the finite-rank piece.
    pub finite_rank: usize,
    pub above: usize,
    pub outside: usize,
    pub small: usize,
    /// Largest side among the small-cube tail.
    pub max_small_side: Option<f64>,
    pub tail: NormBracket,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompactnessProfile {
    pub operator: ProfileOperator,
    pub depth: u32,
    pub rows: Vec<ProfileRow>,
    /// Lower tail brackets never increase along the ladder (5% slack).
    pub lower_nonincreasing: bool,
    /// First lower tail bracket over the last.
    pub decay_factor: f64,
}

#[derive(Default)]
struct Counts {
    finite: usize,
    above: usize,
    outside: usize,
    small: usize,
    max_small_side: Option<f64>,
}

impl Counts {
    fn add(&mut self, class: TruncationClass, side: f64) {
        match class {
            TruncationClass::Finite => self.finite += 1,
            TruncationClass::Above => self.above += 1,
            TruncationClass::Outside => self.outside += 1,
            TruncationClass::Small => {
                self.small += 1;
                self.max_small_side = Some(self.max_small_side.map_or(side, |m: f64| m.max(side)));
            }
        }
    }
}

/// Splits the operator at each setting into its finite-rank part (cubes
/// inside `Q_N` with side at least `δ`) and the tail (cubes strictly
/// containing `Q_N`, disjoint from it, or smaller than `δ`), and brackets
/// the tail norm from `L^p(λ₁^p)` to `L^q(λ₂^q)`.
///
/// The `bracket_b_I_alpha` and default `T_S_b_alpha_star` families are the
/// oscillation augmentation of [`spread_family`] in each lattice.
pub fn compactness_profile(
    op: ProfileOperator,
    b: &GridFunction,
    triple: &BloomTriple,
    lattices: &LatticeSet,
    family: Option<&SparseFamily>,
    settings: &[ProfileSetting],
) -> Result<CompactnessProfile> {
    let grid = *triple.grid();
    b.check_same_grid(triple.lambda1.func())?;
    if lattices.grid() != &grid {
        return Err(invalid("lattices and weights live on different grids"));
    }
    let spaces = Spaces::from_triple(triple)?;
    let alpha = triple.alpha;
    let root_family = |lat: &ShiftedLattice| -> Result<SparseFamily> {
        Ok(augment_sparse(&spread_family(lat)?, b)?.family)
    };
    let default_family = match (op, family) {
        (ProfileOperator::TSBAlphaStar, None) => Some(root_family(&ShiftedLattice::new(grid, 0)?)?),
        _ => None,
    };
    let per_lattice: Vec<SparseFamily> = if op == ProfileOperator::BracketBIAlpha {
        lattices
            .lattices()
            .iter()
            .map(root_family)
            .collect::<Result<_>>()?
    } else {
        Vec::new()
    };
    let mut rows = Vec::with_capacity(settings.len());
    for setting in settings {
        let q_n = setting.q_n.unwrap_or(DyadicCube {
            shift: 0,
            level: 0,
            index: [0, 0],
        });
        let q_lat = ShiftedLattice::new(grid, q_n.shift)?;
        let q_box = q_lat.cube_box(&q_n)?;
        let n_side = q_box.side_length(&grid);
        if !(setting.delta > 0.0 && setting.delta < n_side) {
            return Err(invalid(format!(
                "δ = {} must lie in (0, N = {n_side})",
                setting.delta
            )));
        }
        let mut counts = Counts::default();
        let tail_op: Option<Box<dyn PositiveOperator + Send>> = match op {
            ProfileOperator::TSBAlphaStar => {
                let fam = family
                    .or(default_family.as_ref())
                    .expect("family resolved above");
                let split = split_truncation(
                    fam,
                    &TruncationSetting {
                        delta: setting.delta,
                        q_n,
                    },
                )?;
                for m in fam.members() {
                    counts.add(
                        classify(&grid, &m.cube_box, &q_box, setting.delta),
                        m.cube_box.side_length(&grid),
                    );
                }
                let tail = split.tail();
                (!tail.is_empty())
                    .then(|| {
                        SparseOperator::new(
                            &fam.subset(&tail),
                            SparseKind::SymbolAdjoint,
                            alpha,
                            Some(b),
                        )
                    })
                    .transpose()?
                    .map(|o| Box::new(o) as Box<dyn PositiveOperator + Send>)
            }
            ProfileOperator::MAlphaB => {
                let mut tail = Vec::new();
                for (_, q) in q_lat.enumerate(|_, _| true) {
                    let class = classify(&grid, &q, &q_box, setting.delta);
                    counts.add(class, q.side_length(&grid));
                    if class != TruncationClass::Finite {
                        tail.push(q);
                    }
                }
                (!tail.is_empty())
                    .then(|| MaximalOperator::new(grid, tail, alpha, Some(b)))
                    .transpose()?
                    .map(|o| Box::new(o) as Box<dyn PositiveOperator + Send>)
            }
            ProfileOperator::BracketBIAlpha => {
                let mut parts: Vec<Box<dyn PositiveOperator + Send>> = Vec::new();
                for fam in &per_lattice {
                    let mut tail = Vec::new();
                    for (k, m) in fam.members().iter().enumerate() {
                        let class = classify(&grid, &m.cube_box, &q_box, setting.delta);
                        counts.add(class, m.cube_box.side_length(&grid));
                        if class != TruncationClass::Finite {
                            tail.push(k);
                        }
                    }
                    if !tail.is_empty() {
                        let sub = fam.subset(&tail);
                        for kind in [SparseKind::Symbol, SparseKind::SymbolAdjoint] {
                            parts.push(Box::new(SparseOperator::new(&sub, kind, alpha, Some(b))?));
                        }
                    }
                }
                (!parts.is_empty())
                    .then(|| Box::new(SumOperator(parts)) as Box<dyn PositiveOperator + Send>)
            }
        };
        let tail = match tail_op {
            Some(o) => boyd_norm(o.as_ref(), &spaces)?,
            None => NormBracket::zero(),
        };
        rows.push(ProfileRow {
            delta: setting.delta,
            n_side,
            q_n,
            finite_rank: counts.finite,
            above: counts.above,
            outside: counts.outside,
            small: counts.small,
            max_small_side: counts.max_small_side,
            tail,
        });
    }
    let lower_nonincreasing = rows
        .windows(2)
        .all(|w| w[1].tail.lower <= 1.05 * w[0].tail.lower + 1e-300);
    let decay_factor = match (rows.first(), rows.last()) {
        (Some(a), Some(z)) if z.tail.lower > 0.0 => a.tail.lower / z.tail.lower,
        (Some(a), Some(_)) if a.tail.lower > 0.0 => f64::INFINITY,
        _ => 1.0,
    };
    Ok(CompactnessProfile {
        operator: op,
        depth: grid.depth,
        rows,
        lower_nonincreasing,
        decay_factor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::Grid;
    use crate::symbols::{make_function, FunctionSpec};

    fn run(op: ProfileOperator, spec: FunctionSpec) -> CompactnessProfile {
        let g = Grid::new(1, 10).unwrap();
        let t = BloomTriple::unweighted(g, 0.5, 4.0 / 3.0).unwrap();
        let b = make_function(g, &spec).unwrap();
        compactness_profile(
            op,
            &b,
            &t,
            &LatticeSet::standard(g),
            None,
            &default_settings(),
        )
        .unwrap()
    }

    #[test]
    fn constant_symbol_has_zero_tails() {
        let p = run(ProfileOperator::MAlphaB, FunctionSpec::Constant { c: 2.0 });
        assert!(p.rows.iter().all(|r| r.tail.lower == 0.0));
    }

    #[test]
    fn smooth_symbol_tails_decay() {
        let bump = FunctionSpec::Bump {
            center: crate::weights::Center::Scalar(0.5),
            radius: 0.25,
            height: 1.0,
        };
        for op in [
            ProfileOperator::MAlphaB,
            ProfileOperator::TSBAlphaStar,
            ProfileOperator::BracketBIAlpha,
        ] {
            let p = run(op, bump.clone());
            assert!(
                p.lower_nonincreasing,
                "{op:?}: {:?}",
                p.rows.iter().map(|r| r.tail.lower).collect::<Vec<_>>()
            );
            assert!(
                p.decay_factor >= 4.0,
                "{op:?}: {} {:?}",
                p.decay_factor,
                p.rows
                    .iter()
                    .map(|r| (r.tail.lower, r.finite_rank, r.above, r.outside, r.small))
                    .collect::<Vec<_>>()
            );
        }
    }

    #[test]
    fn oscillator_tail_stalls() {
        let p = run(ProfileOperator::MAlphaB, FunctionSpec::Oscillator);
        let last = p.rows.last().unwrap().tail.lower;
        assert!(
            last >= 0.5 * p.rows[0].tail.lower,
            "{:?}",
            p.rows.iter().map(|r| r.tail.lower).collect::<Vec<_>>()
        );
    }

    #[test]
    fn delta_outside_range_rejected() {
        let g = Grid::new(1, 6).unwrap();
        let t = BloomTriple::unweighted(g, 0.5, 4.0 / 3.0).unwrap();
        let b = GridFunction::constant(g, 0.0);
        let s = [ProfileSetting {
            delta: 1.0,
            q_n: None,
        }];
        assert!(compactness_profile(
            ProfileOperator::MAlphaB,
            &b,
            &t,
            &LatticeSet::standard(g),
            None,
            &s
        )
        .is_err());
    }
}
