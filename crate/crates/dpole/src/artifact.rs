//! Run artifacts and their on-disk form.
//!
//! A run directory holds:
//!
//! * `episodes.csv`: header `episode,steps,terminal_cause,compute_ns` and one
//!   row per episode (UTF-8, LF line endings);
//! * `run.json`: config snapshot, seed, config hash, summary statistics and
//!   total wall time;
//! * `actor.net`, `critic.net`: final network parameters in the text
//!   snapshot format of `dpole_core::net`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use dpole_core::dynamics::Failure;
use dpole_core::metrics::{PerformanceVector, SummaryStats};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};

pub const EPISODES_FILE: &str = "episodes.csv";
pub const METADATA_FILE: &str = "run.json";
pub const ACTOR_FILE: &str = "actor.net";
pub const CRITIC_FILE: &str = "critic.net";
pub const CSV_HEADER: &str = "episode,steps,terminal_cause,compute_ns";

/// Why an episode ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminalCause {
    Pole1,
    Pole2,
    Track,
    StepLimit,
}

impl From<Failure> for TerminalCause {
    fn from(f: Failure) -> Self {
        match f {
            Failure::Pole1 => TerminalCause::Pole1,
            Failure::Pole2 => TerminalCause::Pole2,
            Failure::Track => TerminalCause::Track,
        }
    }
}

impl TerminalCause {
    pub fn as_str(self) -> &'static str {
        match self {
            TerminalCause::Pole1 => "pole_1",
            TerminalCause::Pole2 => "pole_2",
            TerminalCause::Track => "track",
            TerminalCause::StepLimit => "step_limit",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "pole_1" => TerminalCause::Pole1,
            "pole_2" => TerminalCause::Pole2,
            "track" => TerminalCause::Track,
            "step_limit" => TerminalCause::StepLimit,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub episode_index: u64,
    pub steps_survived: u64,
    pub terminal_cause: TerminalCause,
    pub compute_ns: u64,
    /// Mean |δ| over the episode.
    pub td_error_mean_abs: f64,
}

/// Contents of `run.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub config: ExperimentConfig,
    pub seed: u64,
    pub config_hash: String,
    pub episodes: u64,
    pub summary: SummaryStats,
    pub total_wall_ns: u64,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunArtifact {
    pub config: ExperimentConfig,
    pub records: Vec<EpisodeRecord>,
    pub summary: SummaryStats,
    pub total_wall_ns: u64,
}

impl RunArtifact {
    pub fn performance(&self) -> PerformanceVector {
        PerformanceVector {
            steps: self.records.iter().map(|r| r.steps_survived).collect(),
            compute_ns: self.records.iter().map(|r| r.compute_ns).collect(),
        }
    }

    pub fn steps(&self) -> Vec<f64> {
        self.records
            .iter()
            .map(|r| r.steps_survived as f64)
            .collect()
    }

    pub fn metadata(&self) -> RunMetadata {
        RunMetadata {
            config: self.config.clone(),
            seed: self.config.seed,
            config_hash: self.config.config_hash(),
            episodes: self.records.len() as u64,
            summary: self.summary,
            total_wall_ns: self.total_wall_ns,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

/// Create `dir` and make sure files can be written in it.
pub fn prepare_output_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let probe = dir.join(".write-probe");
    fs::write(&probe, b"").map_err(|e| HarnessError::io(&probe, e))?;
    fs::remove_file(&probe).map_err(|e| HarnessError::io(&probe, e))
}

/// Render the episodes table.
pub fn results_csv(records: &[EpisodeRecord]) -> String {
    let mut out = String::with_capacity(32 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.episode_index,
            r.steps_survived,
            r.terminal_cause.as_str(),
            r.compute_ns
        ));
    }
    out
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| HarnessError::io(path, e))?;
    f.write_all(contents).map_err(|e| HarnessError::io(path, e))
}

/// Write `episodes.csv` and `run.json` into `dir`.
pub fn write_results_csv(artifact: &RunArtifact, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let csv_path = dir.join(EPISODES_FILE);
    write_file(&csv_path, results_csv(&artifact.records).as_bytes())?;
    let meta = serde_json::to_vec_pretty(&artifact.metadata()).expect("metadata serializes");
    write_file(&dir.join(METADATA_FILE), &meta)?;
    Ok(csv_path)
}

pub fn write_networks(dir: &Path, actor: &str, critic: &str) -> Result<()> {
    write_file(&dir.join(ACTOR_FILE), actor.as_bytes())?;
    write_file(&dir.join(CRITIC_FILE), critic.as_bytes())
}

/// Read an episodes table. `td_error_mean_abs` is not stored and reads as NaN.
pub fn read_results_csv(path: &Path) -> Result<Vec<EpisodeRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => HarnessError::io(path, io),
            other => HarnessError::format(path, format!("{other:?}")),
        })?;
    let header = reader
        .headers()
        .map_err(|e| HarnessError::format(path, e.to_string()))?
        .iter()
        .collect::<Vec<_>>()
        .join(",");
    if header != CSV_HEADER {
        return Err(HarnessError::format(
            path,
            format!("unexpected header `{header}`"),
        ));
    }
    let mut records = Vec::new();
    for (line, row) in reader.records().enumerate() {
        let row = row.map_err(|e| HarnessError::format(path, e.to_string()))?;
        let bad = |what: &str| HarnessError::format(path, format!("row {}: bad {what}", line + 1));
        let num = |i: usize, what: &str| -> Result<u64> {
            row.get(i)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| bad(what))
        };
        records.push(EpisodeRecord {
            episode_index: num(0, "episode")?,
            steps_survived: num(1, "steps")?,
            terminal_cause: row
                .get(2)
                .and_then(TerminalCause::parse)
                .ok_or_else(|| bad("terminal_cause"))?,
            compute_ns: num(3, "compute_ns")?,
            td_error_mean_abs: f64::NAN,
        });
    }
    Ok(records)
}

/// Locate the episodes table of an artifact given its directory, its CSV or
/// its `run.json`.
fn artifact_dir(path: &Path) -> PathBuf {
    if path.is_dir() {
        path.to_path_buf()
    } else {
        path.parent().map(Path::to_path_buf).unwrap_or_default()
    }
}

/// Load a run artifact written by [`write_results_csv`].
pub fn load_artifact(path: &Path) -> Result<RunArtifact> {
    let dir = artifact_dir(path);
    let meta_path = dir.join(METADATA_FILE);
    let text = fs::read_to_string(&meta_path).map_err(|e| HarnessError::io(&meta_path, e))?;
    let meta: RunMetadata =
        serde_json::from_str(&text).map_err(|e| HarnessError::format(&meta_path, e.to_string()))?;
    let records = read_results_csv(&dir.join(EPISODES_FILE))?;
    if records.len() as u64 != meta.episodes {
        return Err(HarnessError::format(
            &dir,
            format!(
                "{} records but metadata says {}",
                records.len(),
                meta.episodes
            ),
        ));
    }
    Ok(RunArtifact {
        config: meta.config,
        records,
        summary: meta.summary,
        total_wall_ns: meta.total_wall_ns,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(i: u64, steps: u64, cause: TerminalCause) -> EpisodeRecord {
        EpisodeRecord {
            episode_index: i,
            steps_survived: steps,
            terminal_cause: cause,
            compute_ns: 1000 + i,
            td_error_mean_abs: 0.1,
        }
    }

    #[test]
    fn csv_layout() {
        let text = results_csv(&[
            record(0, 12, TerminalCause::Pole2),
            record(1, 5, TerminalCause::StepLimit),
        ]);
        assert_eq!(
            text,
            "episode,steps,terminal_cause,compute_ns\n0,12,pole_2,1000\n1,5,step_limit,1001\n"
        );
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(EPISODES_FILE);
        let records: Vec<_> = (0..50)
            .map(|i| record(i, (i * 7) % 13 + 1, TerminalCause::Track))
            .collect();
        fs::write(&path, results_csv(&records)).unwrap();
        let back = read_results_csv(&path).unwrap();
        let steps: Vec<_> = back.iter().map(|r| r.steps_survived).collect();
        assert_eq!(
            steps,
            records.iter().map(|r| r.steps_survived).collect::<Vec<_>>()
        );
        assert_eq!(back[3].terminal_cause, TerminalCause::Track);
    }

    #[test]
    fn rejects_foreign_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        fs::write(&path, "a,b\n1,2\n").unwrap();
        assert!(matches!(
            read_results_csv(&path),
            Err(HarnessError::Format { .. })
        ));
    }

    #[test]
    fn cause_names_round_trip() {
        for c in [
            TerminalCause::Pole1,
            TerminalCause::Pole2,
            TerminalCause::Track,
            TerminalCause::StepLimit,
        ] {
            assert_eq!(TerminalCause::parse(c.as_str()), Some(c));
        }
    }
}
