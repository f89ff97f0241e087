use serde::Serialize;

use super::{verify_sparse, SparseFamily};
use crate::dyadic::{DyadicCube, GridFunction};
use crate::error::{violation, Result};

/// Constant in the pointwise bound `|b − ⟨b⟩_Q| ≤ C Σ_{R⊆Q} Ω(b,R)χ_R`.
pub fn pointwise_constant(n: usize) -> f64 {
    (1u32 << (n + 2)) as f64
}

/// Output of [`augment_sparse`].
#[derive(Debug, Clone, Serialize)]
pub struct Augmented {
    #[serde(skip)]
    pub family: SparseFamily,
    pub cubes: usize,
    pub added: usize,
    pub eta: f64,
    /// `max LHS / (2^{n+2} Σ Ω)` over all `Q ∈ S̃` and cells of `Q`.
    pub max_ratio: f64,
    /// `max LHS / Σ Ω`, the smallest constant that works for this `b`.
    pub empirical_constant: f64,
}

struct Node {
    cube: DyadicCube,
    avg: f64,
    osc: f64,
}

/// Enlarges an `η`-sparse `S` to an `η/(2(1+η))`-sparse `S̃ ⊇ S` on which
/// `b` obeys the pointwise oscillation bound with constant `2^{n+2}`.
///
/// The children of `Q ∈ S̃` are the maximal `P ⊊ Q` that are in `S` or
/// satisfy `(1/|P|)∫_P |b − ⟨b⟩_Q| > 2Ω(b,Q)`, with `Ω` the unweighted mean
/// oscillation. Walking down a chain of such cubes, each step changes the
/// average by at most `2^{n+1}Ω` of the parent, and the last one is within
/// `2Ω` of every cell value. Witnesses are then assigned greedily from the
/// finest cubes up.
pub fn augment_sparse(s: &SparseFamily, b: &GridFunction) -> Result<Augmented> {
    let lattice = s.lattice();
    let grid = *s.grid();
    if b.grid() != &grid {
        return Err(violation("symbol and family live on different grids"));
    }
    let vals = b.values();
    let mut stack: Vec<DyadicCube> = s
        .members()
        .iter()
        .filter(|m| {
            let mut c = m.cube;
            while let Some(p) = lattice.parent(&c) {
                if s.contains_cube(&p) {
                    return false;
                }
                c = p;
            }
            true
        })
        .map(|m| m.cube)
        .collect();
    let mut nodes: Vec<Node> = Vec::new();
    while let Some(q) = stack.pop() {
        let qb = lattice.box_unchecked(&q);
        let count = qb.cell_count(&grid) as f64;
        let mut sum = 0.0;
        qb.for_each_cell(&grid, |c| sum += vals[c]);
        let avg = sum / count;
        let mut dev = 0.0;
        qb.for_each_cell(&grid, |c| dev += (vals[c] - avg).abs());
        let osc = dev / count;
        let mut pending = lattice.children(&q);
        while let Some(p) = pending.pop() {
            let pb = lattice.box_unchecked(&p);
            let keep = s.contains_cube(&p) || {
                let mut d = 0.0;
                pb.for_each_cell(&grid, |c| d += (vals[c] - avg).abs());
                d / pb.cell_count(&grid) as f64 > 2.0 * osc
            };
            if keep {
                stack.push(p);
            } else {
                pending.extend(lattice.children(&p));
            }
        }
        nodes.push(Node { cube: q, avg, osc });
    }
    nodes.sort_by_key(|a| a.cube);
    nodes.dedup_by(|a, b| a.cube == b.cube);

    let eta = s.eta() / (2.0 * (1.0 + s.eta()));
    // greedy witnesses, finest cubes first
    let mut owned = vec![false; grid.cell_count()];
    let mut witnesses: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    for (k, node) in nodes.iter().enumerate().rev() {
        let qb = lattice.box_unchecked(&node.cube);
        let need = (eta * qb.cell_count(&grid) as f64 - 1e-9).ceil().max(1.0) as usize;
        let w = &mut witnesses[k];
        qb.for_each_cell(&grid, |c| {
            if w.len() < need && !owned[c] {
                owned[c] = true;
                w.push(c);
            }
        });
    }
    let added = nodes.iter().filter(|n| !s.contains_cube(&n.cube)).count();
    let members: Vec<_> = nodes
        .iter()
        .zip(witnesses)
        .map(|(n, w)| (n.cube, w))
        .collect();
    let family = SparseFamily::new(lattice.clone(), eta, members)?;
    let verdict = verify_sparse(&family);
    if let Some(c) = verdict.certificate {
        return Err(violation(format!(
            "augmented family is not {eta}-sparse: {c:?}"
        )));
    }

    // pointwise certificate: per cell, the chain of containing cubes
    let mut chains: Vec<Vec<u32>> = vec![Vec::new(); grid.cell_count()];
    for (k, m) in family.members().iter().enumerate() {
        m.cube_box
            .for_each_cell(&grid, |c| chains[c].push(k as u32));
    }
    let constant = pointwise_constant(grid.n);
    let mut max_ratio: f64 = 0.0;
    let mut empirical: f64 = 0.0;
    for (cell, chain) in chains.iter().enumerate() {
        // members are level-sorted, so chain runs coarse to fine
        let mut tail = 0.0;
        for &k in chain.iter().rev() {
            let node = &nodes[k as usize];
            tail += node.osc;
            let lhs = (vals[cell] - node.avg).abs();
            if lhs <= 1e-12 * (1.0 + node.avg.abs()) {
                continue;
            }
            if tail == 0.0 {
                return Err(violation(format!(
                    "pointwise bound fails at cell {cell} in {:?}",
                    node.cube
                )));
            }
            empirical = empirical.max(lhs / tail);
            max_ratio = max_ratio.max(lhs / (constant * tail));
        }
    }
    if max_ratio > 1.0 + 1e-12 {
        return Err(violation(format!(
            "pointwise oscillation bound violated, ratio {max_ratio}"
        )));
    }
    Ok(Augmented {
        cubes: family.len(),
        added,
        eta,
        max_ratio,
        empirical_constant: empirical,
        family,
    })
}
