use std::path::{Path, PathBuf};

use dyadic_bloom::diagnostics::ProfileSetting;
use dyadic_bloom::error::{invalid, Error, Result};
use dyadic_bloom::symbols::{make_function, FunctionSpec};
use dyadic_bloom::weights::make_weight;
use dyadic_bloom::{BloomTriple, Grid, GridFunction, LatticeSet, WeightSpec};
use serde::{Deserialize, Serialize};

pub const CONFIG_SCHEMA: &str = "dyadic-bloom/config/v1";

fn config_schema() -> String {
    CONFIG_SCHEMA.to_string()
}

fn unit_weight() -> WeightSpec {
    WeightSpec::Constant { c: 1.0 }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    pub depth: u32,
}

/// `q` is derived from `1/q = 1/p − α/n` and cannot be supplied.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TripleSpec {
    pub alpha: f64,
    pub p: f64,
    #[serde(default = "unit_weight")]
    pub lambda1: WeightSpec,
    #[serde(default = "unit_weight")]
    pub lambda2: WeightSpec,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatticeChoice {
    Standard,
    #[default]
    OneThird,
}

/// Diagnostic-specific knobs; each diagnostic reads the ones it needs.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// Profile ladder; the default is four δ steps with `Q_N` the unit cube.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ladder: Option<Vec<ProfileSetting>>,
    /// Falsifier condition: `small_scale`, `large_scale` or `far_away`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_terms: Option<usize>,
    /// Stopping ratio `Λ` for Calderón–Zygmund families.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    /// Lattice shift id for single-lattice families.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<u16>,
    /// Augment a built family by the oscillation of `b`.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub augment: bool,
    /// Central point for the far-away modulus.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    /// Sparse family file for operators built on one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "config_schema")]
    pub schema: String,
    pub grid: GridSpec,
    pub triple: TripleSpec,
    /// The symbol `b`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbol: Option<FunctionSpec>,
    /// The function `f` that operators act on.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<FunctionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
    #[serde(default)]
    pub lattices: LatticeChoice,
    #[serde(default)]
    pub settings: Settings,
    #[serde(default)]
    pub seed: u64,
    /// Output directory; never written to the replay copy.
    #[serde(default, skip_serializing)]
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: Self = serde_json::from_str(&text)?;
        if cfg.schema != CONFIG_SCHEMA {
            return Err(invalid(format!(
                "unsupported config schema `{}` (expected `{CONFIG_SCHEMA}`)",
                cfg.schema
            )));
        }
        Ok(cfg)
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.grid.n, self.grid.depth)
    }

    pub fn triple(&self) -> Result<BloomTriple> {
        let g = self.grid()?;
        BloomTriple::new(
            self.triple.alpha,
            self.triple.p,
            make_weight(g, &self.triple.lambda1)?,
            make_weight(g, &self.triple.lambda2)?,
        )
    }

    pub fn lattice_set(&self) -> Result<LatticeSet> {
        let g = self.grid()?;
        Ok(match self.lattices {
            LatticeChoice::Standard => LatticeSet::standard(g),
            LatticeChoice::OneThird => LatticeSet::one_third(g),
        })
    }

    pub fn symbol(&self) -> Result<GridFunction> {
        let spec = self
            .symbol
            .as_ref()
            .ok_or_else(|| invalid("config has no `symbol`"))?;
        make_function(self.grid()?, spec)
    }

    pub fn symbol_opt(&self) -> Result<Option<GridFunction>> {
        self.symbol.as_ref().map(|_| self.symbol()).transpose()
    }

    pub fn input(&self) -> Result<GridFunction> {
        let spec = self
            .input
            .as_ref()
            .ok_or_else(|| invalid("config has no `input` function"))?;
        make_function(self.grid()?, spec)
    }

    pub fn operator(&self) -> Result<&str> {
        self.operator
            .as_deref()
            .ok_or_else(|| Error::Unknown("config names no operator".into()))
    }

    pub fn x0(&self) -> Result<Option<[f64; 2]>> {
        match &self.settings.x0 {
            None => Ok(None),
            Some(v) if v.len() == self.grid.n => {
                Ok(Some([v[0], if v.len() == 2 { v[1] } else { 0.0 }]))
            }
            Some(v) => Err(invalid(format!(
                "x0 has {} coordinates, grid has {}",
                v.len(),
                self.grid.n
            ))),
        }
    }
}
