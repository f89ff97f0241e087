use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use dyadic_bloom::dyadic::io::write_binary;
use dyadic_bloom::{GridFunction, Result};
use serde::Serialize;

use crate::config::{ExperimentConfig, LatticeChoice};

pub const SUMMARY_SCHEMA: &str = "dyadic-bloom/summary/v1";
pub const CURVE_SCHEMA: &str = "dyadic-bloom/curve/v1";

/// Grid and cube-family identity attached to every summary.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Stamp {
    pub n: usize,
    pub depth: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lattices: Option<LatticeChoice>,
    pub seed: u64,
}

impl Stamp {
    pub fn of(cfg: &ExperimentConfig) -> Self {
        Self {
            n: cfg.grid.n,
            depth: cfg.grid.depth,
            lattices: Some(cfg.lattices),
            seed: cfg.seed,
        }
    }
}

#[derive(Serialize)]
struct Summary<'a, T: Serialize> {
    schema: &'static str,
    command: &'a str,
    #[serde(flatten)]
    stamp: Stamp,
    result: &'a T,
}

/// Writes the artifacts of one run into a directory.
pub struct Artifacts {
    dir: PathBuf,
}

impl Artifacts {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn json<T: Serialize + ?Sized>(&self, name: &str, value: &T) -> Result<()> {
        let mut w = BufWriter::new(File::create(self.path(name))?);
        serde_json::to_writer_pretty(&mut w, value)?;
        w.write_all(b"\n")?;
        w.flush()?;
        Ok(())
    }

    /// `summary.json`, stamped with the grid and lattice family.
    pub fn summary<T: Serialize>(&self, command: &str, stamp: Stamp, result: &T) -> Result<()> {
        self.json(
            "summary.json",
            &Summary {
                schema: SUMMARY_SCHEMA,
                command,
                stamp,
                result,
            },
        )
    }

    /// The effective configuration, runnable with `run --config`.
    pub fn replay(&self, cfg: &ExperimentConfig) -> Result<()> {
        self.json("config.json", cfg)
    }

    /// A CSV curve; the first comment line carries the schema tag and depth.
    pub fn csv(&self, name: &str, depth: u32, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let mut w = BufWriter::new(File::create(self.path(name))?);
        writeln!(w, "# {CURVE_SCHEMA} depth={depth}")?;
        writeln!(w, "{}", header.join(","))?;
        for r in rows {
            writeln!(w, "{}", r.join(","))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn grid(&self, name: &str, f: &GridFunction, role: &str) -> Result<()> {
        let mut w = BufWriter::new(File::create(self.path(name))?);
        write_binary(&mut w, f, role)?;
        w.flush()?;
        Ok(())
    }
}

pub fn num(v: f64) -> String {
    format!("{v}")
}

pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}
