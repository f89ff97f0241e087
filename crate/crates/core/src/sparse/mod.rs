//! `η`-sparse families of dyadic cubes, their stopping-time construction,
//! oscillation augmentation, and the sparse operators built on them.

mod augment;
mod build;
mod ops;
mod truncation;

pub use augment::{augment_sparse, pointwise_constant, Augmented};
pub use build::{build_sparse_cz, spread_family};
pub use ops::{apply_t_s, apply_t_s_alpha, apply_t_s_b_alpha, SparseKind, SparseOperator};
pub use truncation::{classify, split_truncation, Truncation, TruncationClass, TruncationSetting};

use serde::{Deserialize, Serialize};

use crate::dyadic::{CellBox, DyadicCube, Grid, ShiftedLattice};
use crate::error::{invalid, violation, Result};

pub const SPARSE_SCHEMA: &str = "dyadic-bloom/sparse/v1";

/// Cube of a sparse family with its witness set `E_Q` (sorted flat cells).
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMember {
    pub cube: DyadicCube,
    pub cube_box: CellBox,
    pub witness: Vec<usize>,
}

/// Cubes of one shifted lattice with pairwise disjoint witness sets
/// `E_Q ⊆ Q`, `|E_Q| ≥ η|Q|`.
///
/// Construction does not check the invariants; use [`verify_sparse`].
#[derive(Debug, Clone, PartialEq)]
pub struct SparseFamily {
    lattice: ShiftedLattice,
    eta: f64,
    members: Vec<SparseMember>,
}

impl SparseFamily {
    /// Members are sorted by cube address; boxes are taken from `lattice`.
    pub fn new(
        lattice: ShiftedLattice,
        eta: f64,
        members: Vec<(DyadicCube, Vec<usize>)>,
    ) -> Result<Self> {
        let mut out = Vec::with_capacity(members.len());
        for (cube, mut witness) in members {
            if cube.shift != lattice.shift_id() {
                return Err(invalid(format!(
                    "{cube:?} does not belong to lattice {}",
                    lattice.shift_id()
                )));
            }
            let cube_box = lattice.cube_box(&cube)?;
            witness.sort_unstable();
            out.push(SparseMember {
                cube,
                cube_box,
                witness,
            });
        }
        out.sort_by_key(|a| a.cube);
        Ok(Self {
            lattice,
            eta,
            members: out,
        })
    }

    pub fn grid(&self) -> &Grid {
        self.lattice.grid()
    }

    pub fn lattice(&self) -> &ShiftedLattice {
        &self.lattice
    }

    pub fn shift_id(&self) -> u16 {
        self.lattice.shift_id()
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn members(&self) -> &[SparseMember] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains_cube(&self, cube: &DyadicCube) -> bool {
        self.members.binary_search_by(|m| m.cube.cmp(cube)).is_ok()
    }

    /// The subfamily with the given member positions.
    pub fn subset(&self, positions: &[usize]) -> SparseFamily {
        let members = positions.iter().map(|&i| self.members[i].clone()).collect();
        Self {
            lattice: self.lattice.clone(),
            eta: self.eta,
            members,
        }
    }

    pub fn to_json(&self) -> SparseFamilyJson {
        SparseFamilyJson {
            schema: SPARSE_SCHEMA.to_string(),
            n: self.grid().n,
            depth: self.grid().depth,
            shift_id: self.shift_id(),
            eta: self.eta,
            cubes: self
                .members
                .iter()
                .map(|m| CubeJson {
                    shift: m.cube.shift,
                    level: m.cube.level,
                    index: m.cube.index[..self.grid().n].to_vec(),
                    witness_cell_ranges: to_ranges(&m.witness),
                })
                .collect(),
        }
    }

    pub fn from_json(j: &SparseFamilyJson) -> Result<Self> {
        if j.schema != SPARSE_SCHEMA {
            return Err(invalid(format!(
                "expected schema {SPARSE_SCHEMA}, found {}",
                j.schema
            )));
        }
        let grid = Grid::new(j.n, j.depth)?;
        let lattice = ShiftedLattice::new(grid, j.shift_id)?;
        let mut members = Vec::with_capacity(j.cubes.len());
        for c in &j.cubes {
            if c.index.len() != grid.n {
                return Err(invalid("cube index length does not match n"));
            }
            let mut index = [0u32; 2];
            index[..grid.n].copy_from_slice(&c.index);
            let cube = DyadicCube {
                shift: c.shift,
                level: c.level,
                index,
            };
            let mut witness = Vec::new();
            for r in &c.witness_cell_ranges {
                if r[0] > r[1] || r[1] > grid.cell_count() {
                    return Err(invalid(format!("bad witness range {r:?}")));
                }
                witness.extend(r[0]..r[1]);
            }
            members.push((cube, witness));
        }
        Self::new(lattice, j.eta, members)
    }
}

fn to_ranges(cells: &[usize]) -> Vec<[usize; 2]> {
    let mut out: Vec<[usize; 2]> = Vec::new();
    for &c in cells {
        match out.last_mut() {
            Some(r) if r[1] == c => r[1] = c + 1,
            _ => out.push([c, c + 1]),
        }
    }
    out
}

/// On-disk form of a [`SparseFamily`]; witness ranges are half-open
/// intervals of flat cell indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseFamilyJson {
    pub schema: String,
    pub n: usize,
    pub depth: u32,
    pub shift_id: u16,
    pub eta: f64,
    pub cubes: Vec<CubeJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubeJson {
    pub shift: u16,
    pub level: u32,
    pub index: Vec<u32>,
    pub witness_cell_ranges: Vec<[usize; 2]>,
}

/// First failure found by [`verify_sparse`].
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SparseViolation {
    NotInLattice {
        cube: DyadicCube,
    },
    Duplicate {
        cube: DyadicCube,
    },
    NotContained {
        cube: DyadicCube,
        cell: usize,
    },
    WitnessTooSmall {
        cube: DyadicCube,
        witness_cells: usize,
        cube_cells: usize,
    },
    Overlap {
        first: DyadicCube,
        second: DyadicCube,
        cell: usize,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct SparseVerdict {
    pub sparse: bool,
    pub eta: f64,
    /// `min_Q |E_Q|/|Q|`.
    pub min_ratio: f64,
    pub certificate: Option<SparseViolation>,
}

/// Checks `E_Q ⊆ Q`, `|E_Q| ≥ η|Q|` and pairwise disjointness exactly.
pub fn verify_sparse(s: &SparseFamily) -> SparseVerdict {
    let grid = *s.grid();
    let mut min_ratio = f64::INFINITY;
    let mut first: Option<SparseViolation> = None;
    let mut owner: Vec<u32> = vec![u32::MAX; grid.cell_count()];
    for (k, m) in s.members.iter().enumerate() {
        if first.is_some() {
            break;
        }
        if !s.lattice.is_member(&m.cube) {
            first = Some(SparseViolation::NotInLattice { cube: m.cube });
            break;
        }
        if k > 0 && s.members[k - 1].cube == m.cube {
            first = Some(SparseViolation::Duplicate { cube: m.cube });
            break;
        }
        let cube_cells = m.cube_box.cell_count(&grid);
        let ratio = m.witness.len() as f64 / cube_cells as f64;
        min_ratio = min_ratio.min(ratio);
        if (m.witness.len() as f64) < s.eta * cube_cells as f64 * (1.0 - 1e-12) {
            first = Some(SparseViolation::WitnessTooSmall {
                cube: m.cube,
                witness_cells: m.witness.len(),
                cube_cells,
            });
            break;
        }
        for &c in &m.witness {
            if c >= grid.cell_count() || !m.cube_box.contains_cell(&grid, c) {
                first = Some(SparseViolation::NotContained {
                    cube: m.cube,
                    cell: c,
                });
                break;
            }
            if owner[c] != u32::MAX {
                first = Some(SparseViolation::Overlap {
                    first: s.members[owner[c] as usize].cube,
                    second: m.cube,
                    cell: c,
                });
                break;
            }
            owner[c] = k as u32;
        }
    }
    if s.members.is_empty() {
        min_ratio = 1.0;
    }
    SparseVerdict {
        sparse: first.is_none(),
        eta: s.eta,
        min_ratio,
        certificate: first,
    }
}

impl SparseFamily {
    /// [`verify_sparse`] as a `Result`.
    pub fn check(&self) -> Result<()> {
        let v = verify_sparse(self);
        match v.certificate {
            None => Ok(()),
            Some(c) => Err(violation(format!(
                "family is not {}-sparse: {c:?}",
                self.eta
            ))),
        }
    }
}
