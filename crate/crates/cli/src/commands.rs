use std::fs;
use std::path::Path;

use dyadic_bloom::diagnostics::{
    apply_operator, compactness_profile, default_settings, falsify, operator_norm,
    FailingCondition, FalsifyOperator, OperatorInputs, OperatorName, ProfileOperator, Spaces,
};
use dyadic_bloom::dyadic::io::write_csv;
use dyadic_bloom::error::{invalid, Error, Result};
use dyadic_bloom::ops::check_sparse_domination;
use dyadic_bloom::oscillation::{bmo_norm, vmo_moduli};
use dyadic_bloom::sparse::{
    augment_sparse, build_sparse_cz, verify_sparse, SparseFamily, SparseFamilyJson,
};
use dyadic_bloom::weights::{ap_characteristic, apq_characteristic};
use dyadic_bloom::{ShiftedLattice, Weight};
use serde::Serialize;
use serde_json::json;

use crate::config::ExperimentConfig;
use crate::output::{num, opt, Artifacts, Stamp};

/// Diagnostics reachable from `run` and as subcommands.
pub const COMMANDS: [&str; 12] = [
    "gen_weight",
    "ap_const",
    "bmo",
    "vmo_moduli",
    "sparse_build",
    "sparse_verify",
    "sparse_apply",
    "op_apply",
    "norm",
    "dominate",
    "profile",
    "falsify",
];

/// What a finished command reports back to `main`.
pub struct Report {
    /// Printed on stdout.
    pub headline: String,
    /// Set when the run completed but a checked invariant failed.
    pub violation: Option<String>,
}

impl Report {
    fn ok(headline: impl Into<String>) -> Self {
        Self {
            headline: headline.into(),
            violation: None,
        }
    }
}

pub fn canonical(name: &str) -> Result<&'static str> {
    let n = name.replace('-', "_");
    COMMANDS
        .iter()
        .find(|c| **c == n)
        .copied()
        .ok_or_else(|| Error::Unknown(format!("diagnostic `{name}`")))
}

pub fn load_family(path: &Path) -> Result<SparseFamily> {
    let j: SparseFamilyJson = serde_json::from_str(&fs::read_to_string(path)?)?;
    SparseFamily::from_json(&j)
}

fn config_family(cfg: &ExperimentConfig) -> Result<Option<SparseFamily>> {
    let Some(path) = &cfg.settings.family else {
        return Ok(None);
    };
    let fam = load_family(path)?;
    if fam.grid() != &cfg.grid()? {
        return Err(invalid("sparse family and config live on different grids"));
    }
    Ok(Some(fam))
}

fn weight_stats(w: &Weight) -> serde_json::Value {
    let v = w.func().values();
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    json!({ "min": min, "max": max, "integral": w.func().total_integral() })
}

/// `sparse-verify` on a family file alone.
pub fn verify_file(path: &Path, art: &Artifacts) -> Result<Report> {
    let fam = load_family(path)?;
    let verdict = verify_sparse(&fam);
    let g = fam.grid();
    let stamp = Stamp {
        n: g.n,
        depth: g.depth,
        lattices: None,
        seed: 0,
    };
    let result = json!({ "shift_id": fam.shift_id(), "members": fam.len(), "verdict": verdict });
    art.summary("sparse_verify", stamp, &result)?;
    Ok(verdict_report(&fam, &verdict))
}

fn verdict_report(fam: &SparseFamily, v: &dyadic_bloom::sparse::SparseVerdict) -> Report {
    match &v.certificate {
        None => Report::ok(format!(
            "sparse: {} cubes, eta = {}, min ratio = {}",
            fam.len(),
            v.eta,
            v.min_ratio
        )),
        Some(c) => Report {
            headline: "not sparse".into(),
            violation: Some(format!(
                "family is not {}-sparse: {}",
                v.eta,
                serde_json::to_string(c).unwrap_or_default()
            )),
        },
    }
}

fn write_output(
    art: &Artifacts,
    cfg: &ExperimentConfig,
    command: &str,
    op: &str,
    f: &dyadic_bloom::GridFunction,
    extra: impl Serialize,
) -> Result<Report> {
    art.grid("output.bin", f, op)?;
    write_csv(fs::File::create(art.path("output.csv"))?, f)?;
    let v = f.values();
    let l1 = f.abs().total_integral();
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    art.summary(
        command,
        Stamp::of(cfg),
        &json!({ "operator": op, "l1": l1, "max": max, "details": extra }),
    )?;
    Ok(Report::ok(format!("{op}: l1 = {l1}, max = {max}")))
}

pub fn execute(command: &str, cfg: &ExperimentConfig, art: &Artifacts) -> Result<Report> {
    let grid = cfg.grid()?;
    let stamp = Stamp::of(cfg);
    match command {
        "gen_weight" => {
            let t = cfg.triple()?;
            art.grid("lambda1.bin", t.lambda1.func(), "lambda1")?;
            art.grid("lambda2.bin", t.lambda2.func(), "lambda2")?;
            art.grid("nu.bin", t.nu.func(), "nu")?;
            let result = json!({
                "alpha": t.alpha, "p": t.p, "q": t.q,
                "lambda1": weight_stats(&t.lambda1),
                "lambda2": weight_stats(&t.lambda2),
                "nu": weight_stats(&t.nu),
            });
            art.summary(command, stamp, &result)?;
            Ok(Report::ok(format!("q = {}", t.q)))
        }
        "ap_const" => {
            let t = cfg.triple()?;
            let lat = cfg.lattice_set()?;
            let ap = ap_characteristic(&t.lambda1, t.p, &lat)?;
            let result = json!({
                "ap_lambda1": ap,
                "apq_lambda1": apq_characteristic(&t.lambda1, t.p, t.q, &lat)?,
                "apq_lambda2": apq_characteristic(&t.lambda2, t.p, t.q, &lat)?,
                "a2_nu": ap_characteristic(&t.nu, 2.0, &lat)?,
            });
            art.summary(command, stamp, &result)?;
            Ok(Report::ok(format!("{:?}", ap.value)))
        }
        "bmo" => {
            let t = cfg.triple()?;
            let r = bmo_norm(&cfg.symbol()?, &t.nu, &cfg.lattice_set()?)?;
            art.summary(
                command,
                stamp,
                &json!({ "bmo_norm": r.bmo_norm, "argmax": r.argmax, "cubes": r.table.len() }),
            )?;
            Ok(Report::ok(format!("bmo_norm = {}", r.bmo_norm)))
        }
        "vmo_moduli" => {
            let t = cfg.triple()?;
            let m = vmo_moduli(&cfg.symbol()?, &t.nu, &cfg.lattice_set()?, cfg.x0()?)?;
            let mut rows = Vec::new();
            for (s, kind) in [
                (&m.small_scale, "small_scale"),
                (&m.large_scale, "large_scale"),
                (&m.far_away, "far_away"),
            ] {
                for pt in s {
                    rows.push(vec![
                        kind.to_string(),
                        pt.level.to_string(),
                        num(pt.side),
                        opt(pt.value),
                    ]);
                }
            }
            art.csv(
                "moduli.csv",
                grid.depth,
                &["modulus", "level", "side", "value"],
                &rows,
            )?;
            art.summary(command, stamp, &m)?;
            Ok(Report::ok(format!("{} scale points", rows.len())))
        }
        "sparse_build" => {
            let f = cfg.input()?;
            let lat = ShiftedLattice::new(grid, cfg.settings.shift.unwrap_or(0))?;
            let ratio = cfg.settings.ratio.unwrap_or(2.0);
            let mut fam = build_sparse_cz(&f, &lat, ratio)?;
            let mut aug = None;
            if cfg.settings.augment {
                let a = augment_sparse(&fam, &cfg.symbol()?)?;
                fam = a.family.clone();
                aug = Some(a);
            }
            art.json("family.json", &fam.to_json())?;
            let verdict = verify_sparse(&fam);
            art.summary(
                command,
                stamp,
                &json!({ "shift_id": fam.shift_id(), "ratio": ratio, "members": fam.len(), "verdict": verdict, "augment": aug }),
            )?;
            let mut r = verdict_report(&fam, &verdict);
            r.headline = format!("{} cubes written to family.json", fam.len());
            Ok(r)
        }
        "sparse_verify" => {
            let path = cfg
                .settings
                .family
                .as_ref()
                .ok_or_else(|| invalid("sparse_verify needs a family file"))?;
            verify_file(path, art)
        }
        "sparse_apply" | "op_apply" => {
            let name: OperatorName = cfg.operator()?.parse()?;
            if command == "sparse_apply" && !name.needs_family() {
                return Err(invalid(format!("{name} is not a sparse operator")));
            }
            let b = cfg.symbol_opt()?;
            let lat = cfg.lattice_set()?;
            let fam = config_family(cfg)?;
            let inp = OperatorInputs {
                alpha: cfg.triple.alpha,
                b: b.as_ref(),
                lattices: &lat,
                family: fam.as_ref(),
            };
            let out = apply_operator(name, &cfg.input()?, &inp)?;
            write_output(
                art,
                cfg,
                command,
                name.as_str(),
                &out,
                json!({ "family_members": fam.as_ref().map(|f| f.len()) }),
            )
        }
        "norm" => {
            let name: OperatorName = cfg.operator()?.parse()?;
            let t = cfg.triple()?;
            let b = cfg.symbol_opt()?;
            let lat = cfg.lattice_set()?;
            let fam = config_family(cfg)?;
            let inp = OperatorInputs {
                alpha: t.alpha,
                b: b.as_ref(),
                lattices: &lat,
                family: fam.as_ref(),
            };
            let br = operator_norm(name, &inp, &Spaces::from_triple(&t)?, cfg.seed)?;
            let rows: Vec<Vec<String>> = br
                .log
                .iter()
                .enumerate()
                .map(|(i, v)| vec![i.to_string(), num(*v)])
                .collect();
            art.csv("iterations.csv", grid.depth, &["iteration", "lower"], &rows)?;
            art.summary(
                command,
                stamp,
                &json!({ "operator": name, "p": t.p, "q": t.q, "bracket": br }),
            )?;
            Ok(Report::ok(format!(
                "{name}: [{}, {}]",
                br.lower,
                opt(br.upper)
            )))
        }
        "dominate" => {
            let ratio = cfg.settings.ratio.unwrap_or(2.0);
            let r = check_sparse_domination(
                &cfg.input()?,
                &cfg.symbol()?,
                cfg.triple.alpha,
                &cfg.lattice_set()?,
                ratio,
            )?;
            art.summary(command, stamp, &r)?;
            let violation = (r.violations > 0).then(|| {
                format!(
                    "{} cells have a positive commutator majorant but an empty sparse sum",
                    r.violations
                )
            });
            Ok(Report {
                headline: format!("constant = {}", r.constant),
                violation,
            })
        }
        "profile" => {
            let op: ProfileOperator = cfg.operator()?.parse()?;
            let t = cfg.triple()?;
            let fam = config_family(cfg)?;
            let settings = cfg.settings.ladder.clone().unwrap_or_else(default_settings);
            let p = compactness_profile(
                op,
                &cfg.symbol()?,
                &t,
                &cfg.lattice_set()?,
                fam.as_ref(),
                &settings,
            )?;
            let rows: Vec<Vec<String>> = p
                .rows
                .iter()
                .map(|r| {
                    vec![
                        num(r.delta),
                        num(r.n_side),
                        r.finite_rank.to_string(),
                        r.above.to_string(),
                        r.outside.to_string(),
                        r.small.to_string(),
                        opt(r.max_small_side),
                        num(r.tail.lower),
                        opt(r.tail.upper),
                    ]
                })
                .collect();
            art.csv(
                "profile.csv",
                grid.depth,
                &[
                    "delta",
                    "n_side",
                    "finite_rank",
                    "above",
                    "outside",
                    "small",
                    "max_small_side",
                    "lower",
                    "upper",
                ],
                &rows,
            )?;
            art.summary(command, stamp, &p)?;
            Ok(Report::ok(format!(
                "tail decay factor = {}",
                p.decay_factor
            )))
        }
        "falsify" => {
            let op: FalsifyOperator = cfg.operator()?.parse()?;
            let cond: FailingCondition = cfg
                .settings
                .condition
                .as_deref()
                .unwrap_or("small_scale")
                .parse()?;
            let t = cfg.triple()?;
            let r = falsify(
                &cfg.symbol()?,
                &t,
                &cfg.lattice_set()?,
                op,
                cond,
                cfg.settings.max_terms.unwrap_or(4),
            )?;
            let rows: Vec<Vec<String>> = r
                .terms
                .iter()
                .enumerate()
                .map(|(j, t)| {
                    vec![
                        (j + 1).to_string(),
                        t.level.to_string(),
                        num(t.radius),
                        num(t.oscillation),
                        num(t.median),
                        t.case.to_string(),
                        num(t.f1_tilde_ratio),
                        num(t.f2_tilde_ratio),
                        num(t.f_norm),
                        num(t.c),
                        num(t.op_norm),
                    ]
                })
                .collect();
            art.csv(
                "terms.csv",
                grid.depth,
                &[
                    "j",
                    "level",
                    "radius",
                    "oscillation",
                    "median",
                    "case",
                    "f1_tilde_ratio",
                    "f2_tilde_ratio",
                    "f_norm",
                    "c",
                    "op_norm",
                ],
                &rows,
            )?;
            art.summary(command, stamp, &r)?;
            if let Some(w) = &r.warning {
                eprintln!("warning: {w}");
            }
            let violation = (!r.invariants_hold()).then(|| {
                format!(
                    "falsifier invariants failed: decay {}, measure {}, disjoint {}, sign {}",
                    r.decay_ok, r.measure_ok, r.disjoint_ok, r.sign_ok
                )
            });
            Ok(Report {
                headline: format!(
                    "min norm = {}, min separation = {}",
                    r.min_norm, r.min_separation
                ),
                violation,
            })
        }
        other => Err(Error::Unknown(format!("diagnostic `{other}`"))),
    }
}
