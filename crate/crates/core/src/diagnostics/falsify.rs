use serde::{Deserialize, Serialize};

use super::norms::weighted_norm;
use crate::dyadic::{CellBox, DyadicCube, GridFunction, LatticeSet, ShiftedLattice};
use crate::error::{invalid, Error, Result};
use crate::ops::{frac_maximal_commutator, partner_cube, riesz_commutator};
use crate::oscillation::{central_cube, mean_oscillation, median_value};
use crate::weights::BloomTriple;

/// Which vanishing condition the symbol is expected to violate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailingCondition {
    SmallScale,
    LargeScale,
    FarAway,
}

impl FailingCondition {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::SmallScale => "small_scale",
            Self::LargeScale => "large_scale",
            Self::FarAway => "far_away",
        }
    }
}

impl std::str::FromStr for FailingCondition {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "small_scale" => Ok(Self::SmallScale),
            "large_scale" => Ok(Self::LargeScale),
            "far_away" => Ok(Self::FarAway),
            _ => Err(Error::Unknown(format!("condition `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FalsifyOperator {
    #[serde(rename = "M_alpha_b")]
    MAlphaB,
    #[serde(rename = "bracket_b_I_alpha")]
    BracketBIAlpha,
}

impl std::str::FromStr for FalsifyOperator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "M_alpha_b" => Ok(Self::MAlphaB),
            "bracket_b_I_alpha" => Ok(Self::BracketBIAlpha),
            _ => Err(Error::Unknown(format!(
                "operator `{s}` is not supported by the falsifier"
            ))),
        }
    }
}

/// Separation factor between a cube and its partner.
pub const PARTNER_FACTOR: f64 = 4.0;

/// Symbols whose smallest level oscillation is below this fraction of the
/// largest are treated as vanishing.
pub const STALL_FRACTION: f64 = 0.25;

/// One term `j` of the construction.
#[derive(Debug, Clone, Serialize)]
pub struct FalsifierTerm {
    pub level: u32,
    /// Half the side of `B_j`.
    pub radius: f64,
    pub cube: DyadicCube,
    pub cube_box: CellBox,
    pub partner: CellBox,
    pub partner_distance: f64,
    pub oscillation: f64,
    pub median: f64,
    /// 1 when `∫_{E_1}|b − m| ≥ ∫_{E_2}|b − m|`, else 2.
    pub case: u8,
    pub e1_cells: usize,
    pub e2_cells: usize,
    pub f1_cells: usize,
    pub f2_cells: usize,
    /// `|F̃_{j,i}| / |B̃_j|`.
    pub f1_tilde_ratio: f64,
    pub f2_tilde_ratio: f64,
    pub support_cells: usize,
    pub f_norm: f64,
    pub c: f64,
    pub op_norm: f64,
    pub op_norm_over_eps: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FalsifierReport {
    pub condition: FailingCondition,
    pub operator: FalsifyOperator,
    pub depth: u32,
    pub epsilon0: f64,
    /// Largest oscillation among candidate cubes per level.
    pub level_sups: Vec<Option<f64>>,
    pub terms: Vec<FalsifierTerm>,
    /// `‖op(f_j) − op(f_k)‖_{L^q(λ₂^q)}`.
    pub separation: Vec<Vec<f64>>,
    pub min_norm: f64,
    pub min_separation: f64,
    /// `max(max_j ‖f_j‖, 1/min_j ‖f_j‖)`.
    pub norm_band: f64,
    pub decay_ok: bool,
    pub measure_ok: bool,
    pub disjoint_ok: bool,
    pub sign_ok: bool,
    pub warning: Option<String>,
}

impl FalsifierReport {
    pub fn invariants_hold(&self) -> bool {
        self.decay_ok && self.measure_ok && self.disjoint_ok && self.sign_ok
    }
}

fn level_candidates(
    lat: &ShiftedLattice,
    level: u32,
    condition: FailingCondition,
) -> Vec<(DyadicCube, CellBox)> {
    let grid = lat.grid();
    let far = central_cube(grid, [0.5, 0.5], 1);
    lat.cubes_at_level(level)
        .into_iter()
        .map(|c| {
            let q = lat.cube_box(&c).expect("enumerated cube");
            (c, q)
        })
        .filter(|(_, q)| condition != FailingCondition::FarAway || !q.intersects(grid, &far))
        .collect()
}

/// Builds separated cubes `B_j` with oscillation at least `ε₀`, partners
/// `B̃_j`, median splits and the test functions
/// `f_j = χ_{F̃_j} / λ₁^p(B_j)^{1/p}`, then measures `op(f_j)`.
///
/// Levels are picked coarse to fine two apart, so sides shrink by 4 per
/// step for every condition; on the bounded domain this stands in for the
/// growing-radius and escaping sequences of the other two conditions.
pub fn falsify(
    b: &GridFunction,
    triple: &BloomTriple,
    lattices: &LatticeSet,
    operator: FalsifyOperator,
    condition: FailingCondition,
    max_terms: usize,
) -> Result<FalsifierReport> {
    let grid = *triple.grid();
    b.check_same_grid(triple.lambda1.func())?;
    let depth = grid.depth;
    if depth < 4 {
        return Err(invalid("the falsifier needs depth at least 4"));
    }
    let nu = &triple.nu;
    let lat = ShiftedLattice::new(grid, 0)?;
    let mut best: Vec<Option<(f64, DyadicCube, CellBox)>> = Vec::with_capacity(depth as usize);
    for k in 0..depth {
        let mut top: Option<(f64, DyadicCube, CellBox)> = None;
        for (c, q) in level_candidates(&lat, k, condition) {
            let v = mean_oscillation(b, &q, nu);
            if top.as_ref().is_none_or(|t| v > t.0) {
                top = Some((v, c, q));
            }
        }
        best.push(top);
    }
    let level_sups: Vec<Option<f64>> = best.iter().map(|t| t.as_ref().map(|t| t.0)).collect();
    let half = depth.div_ceil(2);
    let range: Vec<u32> = match condition {
        FailingCondition::SmallScale => (half..depth).collect(),
        FailingCondition::LargeScale => (1..half).collect(),
        FailingCondition::FarAway => (2..depth).collect(),
    };
    let in_range: Vec<f64> = range
        .iter()
        .filter_map(|&k| level_sups[k as usize])
        .collect();
    let max_s = in_range.iter().fold(0.0f64, |a, b| a.max(*b));
    let epsilon0 = in_range.iter().fold(f64::INFINITY, |a, b| a.min(*b));
    if in_range.is_empty() || !(epsilon0 > 0.0) || epsilon0 < STALL_FRACTION * max_s {
        return Err(Error::Precondition(format!(
            "b appears VMO at grid scales: level oscillations in the {} range from {} to {max_s}",
            condition.as_str(),
            if epsilon0.is_finite() { epsilon0 } else { 0.0 }
        )));
    }
    let eligible = |k: u32| level_sups[k as usize].is_some_and(|s| s >= epsilon0 * (1.0 - 1e-12));
    let level_pool: Vec<u32> = match condition {
        FailingCondition::LargeScale => range.clone(),
        _ => (2..depth).collect(),
    };

    // cubes and partners
    let mut chosen: Vec<(u32, f64, DyadicCube, CellBox, CellBox, f64)> = Vec::new();
    let mut last: Option<u32> = None;
    for &k in &level_pool {
        if chosen.len() >= max_terms {
            break;
        }
        if k < 2 || !eligible(k) || last.is_some_and(|l| k < l + 2) {
            continue;
        }
        let (osc, cube, q) = best[k as usize].expect("eligible level has a cube");
        let Ok(p) = partner_cube(&grid, &q, PARTNER_FACTOR, triple.alpha) else {
            continue;
        };
        chosen.push((k, osc, cube, q, p.partner, p.distance));
        last = Some(k);
    }
    let warning =
        (chosen.len() < 3).then(|| format!("only {} admissible scales on this grid", chosen.len()));
    if chosen.is_empty() {
        return Err(Error::Precondition(
            "no admissible scale fits a partner cube on this grid".into(),
        ));
    }

    let v = b.values();
    let h = grid.cell_volume();
    let p = triple.p;
    let qd = triple.q_dual();
    let mut terms = Vec::with_capacity(chosen.len());
    let mut outputs: Vec<GridFunction> = Vec::with_capacity(chosen.len());
    let mut supports: Vec<Vec<usize>> = Vec::new();
    let mut decay_ok = true;
    let mut measure_ok = true;
    let mut sign_ok = true;
    for (j, &(level, osc, cube, q, partner, dist)) in chosen.iter().enumerate() {
        let b_cells = q.cells(&grid);
        let p_cells = partner.cells(&grid);
        let m = median_value(b, &p_cells)?;
        let e1: Vec<usize> = b_cells.iter().copied().filter(|&x| v[x] >= m).collect();
        let e2: Vec<usize> = b_cells.iter().copied().filter(|&x| v[x] < m).collect();
        let f1: Vec<usize> = p_cells.iter().copied().filter(|&y| v[y] <= m).collect();
        let f2: Vec<usize> = p_cells.iter().copied().filter(|&y| v[y] >= m).collect();
        let later = |y: &usize| chosen[j + 1..].iter().any(|c| c.4.contains_cell(&grid, *y));
        let f1t: Vec<usize> = f1.iter().copied().filter(|y| !later(y)).collect();
        let f2t: Vec<usize> = f2.iter().copied().filter(|y| !later(y)).collect();
        let i1: f64 = e1.iter().map(|&x| (v[x] - m).abs()).sum();
        let i2: f64 = e2.iter().map(|&x| (v[x] - m).abs()).sum();
        let case = if i1 >= i2 { 1u8 } else { 2 };
        let (e, support) = if case == 1 { (&e1, &f1t) } else { (&e2, &f2t) };

        let min_of = |s: &[usize]| s.iter().map(|&i| v[i]).fold(f64::INFINITY, f64::min);
        let max_of = |s: &[usize]| s.iter().map(|&i| v[i]).fold(f64::NEG_INFINITY, f64::max);
        if !e1.is_empty() && !f1.is_empty() && min_of(&e1) < max_of(&f1) {
            sign_ok = false;
        }
        if !e2.is_empty() && !f2.is_empty() && max_of(&e2) >= min_of(&f2) {
            sign_ok = false;
        }
        let pc = p_cells.len() as f64;
        let (r1, r2) = (f1t.len() as f64 / pc, f2t.len() as f64 / pc);
        if r1 < 1.0 / 6.0 || r2 < 1.0 / 6.0 {
            measure_ok = false;
        }
        let radius = q.side_length(&grid) / 2.0;
        if j > 0
            && 4.0 * radius
                > terms
                    .last()
                    .map_or(f64::INFINITY, |t: &FalsifierTerm| t.radius)
        {
            decay_ok = false;
        }

        let norm = triple.lambda1.power_integral(p, &q).powf(1.0 / p);
        let mut fv = vec![0.0; grid.cell_count()];
        support.iter().for_each(|&y| fv[y] = 1.0 / norm);
        let f = GridFunction::new(grid, fv)?;
        let out = match operator {
            FalsifyOperator::MAlphaB => frac_maximal_commutator(&f, b, triple.alpha, lattices)?,
            FalsifyOperator::BracketBIAlpha => riesz_commutator(&f, b, triple.alpha)?,
        };
        let f_norm = weighted_norm(&f, &triple.lambda1, p)?;
        let op_norm = weighted_norm(&out, &triple.lambda2, triple.q)?;
        let e_int: f64 = e.iter().map(|&x| out.values()[x].abs()).sum::<f64>() * h;
        let c = triple.lambda2.power_integral(-qd, &q).powf(-1.0 / qd) * e_int;
        terms.push(FalsifierTerm {
            level,
            radius,
            cube,
            cube_box: q,
            partner,
            partner_distance: dist,
            oscillation: osc,
            median: m,
            case,
            e1_cells: e1.len(),
            e2_cells: e2.len(),
            f1_cells: f1.len(),
            f2_cells: f2.len(),
            f1_tilde_ratio: r1,
            f2_tilde_ratio: r2,
            support_cells: support.len(),
            f_norm,
            c,
            op_norm,
            op_norm_over_eps: op_norm / epsilon0,
        });
        supports.push(support.clone());
        outputs.push(out);
    }

    let mut owner = vec![usize::MAX; grid.cell_count()];
    let mut disjoint_ok = true;
    for (j, s) in supports.iter().enumerate() {
        for &y in s {
            if owner[y] != usize::MAX {
                disjoint_ok = false;
            }
            owner[y] = j;
        }
    }
    let k = outputs.len();
    let mut separation = vec![vec![0.0; k]; k];
    let mut min_separation = f64::INFINITY;
    for a in 0..k {
        for c in a + 1..k {
            let d = outputs[a].zip_with(&outputs[c], |x, y| x - y)?;
            let s = weighted_norm(&d, &triple.lambda2, triple.q)?;
            separation[a][c] = s;
            separation[c][a] = s;
            min_separation = min_separation.min(s);
        }
    }
    if k < 2 {
        min_separation = 0.0;
    }
    let min_norm = terms
        .iter()
        .map(|t| t.op_norm)
        .fold(f64::INFINITY, f64::min);
    let norm_band = terms
        .iter()
        .map(|t| t.f_norm.max(1.0 / t.f_norm))
        .fold(1.0, f64::max);
    Ok(FalsifierReport {
        condition,
        operator,
        depth,
        epsilon0,
        level_sups,
        terms,
        separation,
        min_norm,
        min_separation,
        norm_band,
        decay_ok,
        measure_ok,
        disjoint_ok,
        sign_ok,
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::Grid;
    use crate::symbols::{make_function, FunctionSpec};

    #[test]
    fn constant_symbol_is_rejected() {
        let g = Grid::new(1, 8).unwrap();
        let t = BloomTriple::unweighted(g, 0.5, 4.0 / 3.0).unwrap();
        let b = GridFunction::constant(g, 1.0);
        let r = falsify(
            &b,
            &t,
            &LatticeSet::standard(g),
            FalsifyOperator::MAlphaB,
            FailingCondition::SmallScale,
            4,
        );
        assert!(matches!(r, Err(Error::Precondition(m)) if m.contains("appears VMO")));
    }

    #[test]
    fn smooth_symbol_is_rejected() {
        let g = Grid::new(1, 10).unwrap();
        let t = BloomTriple::unweighted(g, 0.5, 4.0 / 3.0).unwrap();
        let b = make_function(
            g,
            &FunctionSpec::Polynomial {
                coeffs: vec![0.0, 1.0, -2.0],
            },
        )
        .unwrap();
        let r = falsify(
            &b,
            &t,
            &LatticeSet::standard(g),
            FalsifyOperator::MAlphaB,
            FailingCondition::SmallScale,
            4,
        );
        assert!(matches!(r, Err(Error::Precondition(_))));
    }

    #[test]
    fn oscillator_construction() {
        let g = Grid::new(1, 10).unwrap();
        let t = BloomTriple::unweighted(g, 0.5, 4.0 / 3.0).unwrap();
        let b = make_function(g, &FunctionSpec::Oscillator).unwrap();
        let r = falsify(
            &b,
            &t,
            &LatticeSet::one_third(g),
            FalsifyOperator::MAlphaB,
            FailingCondition::SmallScale,
            4,
        )
        .unwrap();
        assert_eq!(
            r.terms.iter().map(|t| t.level).collect::<Vec<_>>(),
            vec![2, 4, 6, 8]
        );
        assert!(r.invariants_hold());
        assert!((r.epsilon0 - 0.5).abs() < 1e-12);
        assert!(r.norm_band <= 6f64.powf(1.0 / t.p) + 1e-12);
        assert!(r.min_norm > 0.0);
        assert!(r.min_separation >= 0.5 * r.min_norm);
    }
}
