//! Rehearsal parameter sweeps.
//!
//! A grid file is JSON in one of two shapes. A list of partial rehearsal
//! sections, one cell each:
//!
//! ```json
//! [{"strategy": "none"}, {"strategy": "batch", "pseudo_count": 8}]
//! ```
//!
//! or an object of value lists whose cartesian product forms the cells. Keys
//! expand in alphabetical order, the last one varying fastest:
//!
//! ```json
//! {"strategy": ["batch", "ortho"], "pseudo_count": [4, 16], "reinit_every": [1, 10]}
//! ```
//!
//! Each cell is laid over the base config's `rehearsal` section and run once
//! per seed, all runs in parallel. Every run gets its own directory
//! `cell-<i>-seed-<s>` under the sweep directory, next to `sweep_index.json`
//! and the pairwise significance report `sweep_report.{json,txt}`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use dpole_core::metrics::{mean, welch_t_test, SummaryStats, WelchTest};
use dpole_core::rehearsal::RehearsalConfig;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::compare::SIGNIFICANCE_LEVEL;
use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::runner::run_experiment;

pub const INDEX_FILE: &str = "sweep_index.json";
pub const REPORT_JSON_FILE: &str = "sweep_report.json";
pub const REPORT_TEXT_FILE: &str = "sweep_report.txt";

/// Parse a seed list such as `1,2,3`, `1..5` (inclusive) or `1..3,10`.
pub fn parse_seeds(list: &str) -> Result<Vec<u64>> {
    let bad = |part: &str| HarnessError::config("seeds", format!("cannot parse `{part}`"));
    let mut seeds = Vec::new();
    for part in list.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((lo, hi)) = part.split_once("..") {
            let lo: u64 = lo.trim().parse().map_err(|_| bad(part))?;
            let hi: u64 = hi
                .trim()
                .trim_start_matches('=')
                .parse()
                .map_err(|_| bad(part))?;
            if hi < lo {
                return Err(bad(part));
            }
            seeds.extend(lo..=hi);
        } else {
            seeds.push(part.parse().map_err(|_| bad(part))?);
        }
    }
    if seeds.is_empty() {
        return Err(HarnessError::config("seeds", "no seeds given"));
    }
    Ok(seeds)
}

fn overlay(
    base: &RehearsalConfig,
    patch: &Map<String, Value>,
    cell: usize,
) -> Result<RehearsalConfig> {
    let mut merged = match serde_json::to_value(base).expect("rehearsal config serializes") {
        Value::Object(m) => m,
        _ => unreachable!("rehearsal config is a JSON object"),
    };
    for (k, v) in patch {
        merged.insert(k.clone(), v.clone());
    }
    let cfg: RehearsalConfig = serde_json::from_value(Value::Object(merged))
        .map_err(|e| HarnessError::config(format!("grid[{cell}]"), e.to_string()))?;
    cfg.validate()
        .map_err(|e| HarnessError::from_core(&format!("grid[{cell}]"), e))?;
    Ok(cfg)
}

/// Expand grid JSON into rehearsal configs laid over `base`.
pub fn parse_grid_str(text: &str, base: &RehearsalConfig) -> Result<Vec<RehearsalConfig>> {
    let doc: Value =
        serde_json::from_str(text).map_err(|e| HarnessError::config("grid", e.to_string()))?;
    let patches: Vec<Map<String, Value>> = match doc {
        Value::Array(cells) => cells
            .into_iter()
            .enumerate()
            .map(|(i, c)| match c {
                Value::Object(m) => Ok(m),
                _ => Err(HarnessError::config(
                    format!("grid[{i}]"),
                    "expected an object",
                )),
            })
            .collect::<Result<_>>()?,
        Value::Object(axes) => {
            let mut cells = vec![Map::new()];
            for (key, values) in axes {
                let values = match values {
                    Value::Array(v) if !v.is_empty() => v,
                    _ => {
                        return Err(HarnessError::config(
                            format!("grid.{key}"),
                            "expected a non-empty list",
                        ))
                    }
                };
                cells = cells
                    .into_iter()
                    .flat_map(|cell| {
                        let key = &key;
                        values.iter().map(move |v| {
                            let mut c = cell.clone();
                            c.insert(key.clone(), v.clone());
                            c
                        })
                    })
                    .collect();
            }
            cells
        }
        _ => {
            return Err(HarnessError::config(
                "grid",
                "expected a list or an object of lists",
            ))
        }
    };
    if patches.is_empty() {
        return Err(HarnessError::config("grid", "no cells"));
    }
    patches
        .iter()
        .enumerate()
        .map(|(i, p)| overlay(base, p, i))
        .collect()
}

pub fn parse_grid(path: &Path, base: &RehearsalConfig) -> Result<Vec<RehearsalConfig>> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    parse_grid_str(&text, base)
}

/// One run of a sweep as recorded in the index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub cell: usize,
    pub seed: u64,
    pub rehearsal: RehearsalConfig,
    /// Run directory, relative to the sweep directory.
    pub path: PathBuf,
    pub summary: Option<SummaryStats>,
    pub error: Option<String>,
    #[serde(skip)]
    pub steps: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepIndex {
    pub config_hash: String,
    pub cells: Vec<RehearsalConfig>,
    pub seeds: Vec<u64>,
    pub runs: Vec<SweepEntry>,
}

pub fn run_dir_name(cell: usize, seed: u64) -> String {
    format!("cell-{cell}-seed-{seed}")
}

/// Run every cell for every seed. Failed runs are recorded in the index and
/// do not stop the others.
pub fn sweep(
    base: &ExperimentConfig,
    grid: &[RehearsalConfig],
    seeds: &[u64],
    out: &Path,
) -> Result<SweepIndex> {
    if grid.is_empty() {
        return Err(HarnessError::config("grid", "no cells"));
    }
    if seeds.is_empty() {
        return Err(HarnessError::config("seeds", "no seeds given"));
    }
    base.validate()?;
    crate::artifact::prepare_output_dir(out)?;

    let jobs: Vec<(usize, u64)> = (0..grid.len())
        .flat_map(|c| seeds.iter().map(move |&s| (c, s)))
        .collect();
    let runs: Vec<SweepEntry> = jobs
        .par_iter()
        .map(|&(cell, seed)| {
            let rel = PathBuf::from(run_dir_name(cell, seed));
            let cfg = ExperimentConfig {
                rehearsal: grid[cell].clone(),
                seed,
                output: Some(out.join(&rel)),
                ..base.clone()
            };
            let (summary, steps, error) = match run_experiment(&cfg) {
                Ok(run) => (Some(run.summary), Some(run.steps()), None),
                Err(e) => (None, None, Some(e.to_string())),
            };
            SweepEntry {
                cell,
                seed,
                rehearsal: grid[cell].clone(),
                path: rel,
                summary,
                error,
                steps,
            }
        })
        .collect();

    let index = SweepIndex {
        config_hash: base.config_hash(),
        cells: grid.to_vec(),
        seeds: seeds.to_vec(),
        runs,
    };
    let path = out.join(INDEX_FILE);
    fs::write(
        &path,
        serde_json::to_vec_pretty(&index).expect("index serializes"),
    )
    .map_err(|e| HarnessError::io(&path, e))?;
    Ok(index)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedTest {
    pub seed: u64,
    pub welch: Option<WelchTest>,
}

/// Significance of the step difference between two cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairReport {
    pub a: usize,
    pub b: usize,
    /// Mean over episodes and seeds of `steps(a) − steps(b)`.
    pub mean_difference: f64,
    pub per_seed: Vec<SeedTest>,
    /// Welch test on the step vectors of all seeds pooled per cell.
    pub pooled: Option<WelchTest>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub significance_level: f64,
    pub cells: Vec<RehearsalConfig>,
    pub pairs: Vec<PairReport>,
}

fn cell_label(c: &RehearsalConfig) -> String {
    format!(
        "{} n={} every={} k={} on={}",
        c.strategy, c.pseudo_count, c.reinit_every, c.ortho_exponent, c.apply_to
    )
}

/// Pairwise comparisons between all cells, using only seeds where both runs
/// succeeded.
pub fn significance_report(index: &SweepIndex) -> SweepReport {
    let steps = |cell: usize, seed: u64| {
        index
            .runs
            .iter()
            .find(|r| r.cell == cell && r.seed == seed)
            .and_then(|r| r.steps.as_deref())
    };
    let mut pairs = Vec::new();
    for a in 0..index.cells.len() {
        for b in a + 1..index.cells.len() {
            let mut per_seed = Vec::new();
            let (mut pooled_a, mut pooled_b) = (Vec::new(), Vec::new());
            for &seed in &index.seeds {
                if let (Some(x), Some(y)) = (steps(a, seed), steps(b, seed)) {
                    per_seed.push(SeedTest {
                        seed,
                        welch: welch_t_test(x, y).ok(),
                    });
                    pooled_a.extend_from_slice(x);
                    pooled_b.extend_from_slice(y);
                }
            }
            let mean_difference = if pooled_a.is_empty() || pooled_b.is_empty() {
                f64::NAN
            } else {
                mean(&pooled_a) - mean(&pooled_b)
            };
            pairs.push(PairReport {
                a,
                b,
                mean_difference,
                per_seed,
                pooled: welch_t_test(&pooled_a, &pooled_b).ok(),
            });
        }
    }
    SweepReport {
        significance_level: SIGNIFICANCE_LEVEL,
        cells: index.cells.clone(),
        pairs,
    }
}

impl SweepReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "cells:");
        for (i, c) in self.cells.iter().enumerate() {
            let _ = writeln!(s, "  [{i}] {}", cell_label(c));
        }
        let fmt = |w: &Option<WelchTest>| match w {
            Some(w) => format!(
                "t {:.3} dof {:.1} p {:.4}{}",
                w.t,
                w.dof,
                w.p,
                if w.p < self.significance_level {
                    " *"
                } else {
                    ""
                }
            ),
            None => "undefined".to_string(),
        };
        let _ = writeln!(s, "\npairs (* marks p < {}):", self.significance_level);
        for p in &self.pairs {
            let _ = writeln!(
                s,
                "  [{}] vs [{}]: mean difference {:.3}; pooled {}",
                p.a,
                p.b,
                p.mean_difference,
                fmt(&p.pooled)
            );
            for t in &p.per_seed {
                let _ = writeln!(s, "      seed {}: {}", t.seed, fmt(&t.welch));
            }
        }
        s
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self).expect("report serializes");
        for (name, body) in [(REPORT_JSON_FILE, json), (REPORT_TEXT_FILE, self.to_text())] {
            let path = dir.join(name);
            fs::write(&path, body).map_err(|e| HarnessError::io(&path, e))?;
        }
        Ok(())
    }
}
