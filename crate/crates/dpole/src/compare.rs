//! Side-by-side comparison of two runs.

use std::fmt::Write as _;
use std::path::Path;

use dpole_core::metrics::{
    difference_vector, mean, moving_average, welch_t_test, MeanMedianReading, SummaryStats,
    WelchTest,
};
use serde::{Deserialize, Serialize};

use crate::artifact::RunArtifact;
use crate::error::{HarnessError, Result};

pub const DEFAULT_MA_WINDOW: usize = 10;
/// Threshold used when a report calls a difference significant.
pub const SIGNIFICANCE_LEVEL: f64 = 0.05;

pub const REPORT_TEXT_FILE: &str = "comparison.txt";
pub const REPORT_JSON_FILE: &str = "comparison.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSide {
    pub label: String,
    pub summary: SummaryStats,
    pub reading: MeanMedianReading,
    pub moving_average: Vec<f64>,
    pub mean_compute_ns: f64,
    pub total_compute_ns: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub episodes: usize,
    pub ma_window: usize,
    pub a: RunSide,
    pub b: RunSide,
    /// `a.steps − b.steps` per episode.
    pub difference: Vec<f64>,
    pub difference_summary: SummaryStats,
    pub difference_moving_average: Vec<f64>,
    /// `None` when both step vectors are constant with different means.
    pub welch: Option<WelchTest>,
    /// `total_compute(a) / total_compute(b)`; `None` if b took no measurable time.
    pub compute_ratio: Option<f64>,
}

fn side(label: &str, run: &RunArtifact, window: usize) -> Result<RunSide> {
    let steps = run.steps();
    let summary = dpole_core::metrics::summarize(&steps).map_err(arg)?;
    let compute: Vec<f64> = run.records.iter().map(|r| r.compute_ns as f64).collect();
    Ok(RunSide {
        label: label.to_string(),
        reading: MeanMedianReading::of(&summary),
        summary,
        moving_average: moving_average(&steps, window).map_err(arg)?,
        mean_compute_ns: mean(&compute),
        total_compute_ns: run.records.iter().map(|r| r.compute_ns).sum(),
    })
}

fn arg(e: dpole_core::Error) -> HarnessError {
    HarnessError::Runtime(e.to_string())
}

/// Compare two runs episode by episode. Runs must have the same number of
/// episodes and `ma_window` must lie in `1..=episodes`.
pub fn compare_runs(
    a: &RunArtifact,
    b: &RunArtifact,
    labels: (&str, &str),
    ma_window: usize,
) -> Result<Comparison> {
    let (pa, pb) = (a.performance(), b.performance());
    if pa.len() != pb.len() {
        return Err(HarnessError::config(
            "artifacts",
            format!("episode counts differ: {} vs {}", pa.len(), pb.len()),
        ));
    }
    if ma_window == 0 || ma_window > pa.len() {
        return Err(HarnessError::config(
            "ma_window",
            format!("must lie in 1..={}", pa.len()),
        ));
    }
    let difference = difference_vector(&pa, &pb).map_err(arg)?;
    let welch = if pa.len() >= 2 {
        welch_t_test(&a.steps(), &b.steps()).ok()
    } else {
        None
    };
    let side_a = side(labels.0, a, ma_window)?;
    let side_b = side(labels.1, b, ma_window)?;
    let compute_ratio = (side_b.total_compute_ns > 0)
        .then(|| side_a.total_compute_ns as f64 / side_b.total_compute_ns as f64);
    Ok(Comparison {
        episodes: pa.len(),
        ma_window,
        difference_summary: dpole_core::metrics::summarize(&difference).map_err(arg)?,
        difference_moving_average: moving_average(&difference, ma_window).map_err(arg)?,
        difference,
        welch,
        compute_ratio,
        a: side_a,
        b: side_b,
    })
}

impl Comparison {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "episodes: {}  moving-average window: {}",
            self.episodes, self.ma_window
        );
        for side in [&self.a, &self.b] {
            let st = &side.summary;
            let _ = writeln!(s, "\n[{}]", side.label);
            let _ = writeln!(
                s,
                "  mean {:.3}  median {:.3}  rmsd {:.3}  step volatility {:.3}",
                st.mean, st.median, st.rmsd, st.step_volatility
            );
            let _ = writeln!(s, "  reading: {}", side.reading.describe());
            let _ = writeln!(
                s,
                "  compute: {:.3} ms total, {:.1} us per episode",
                side.total_compute_ns as f64 / 1e6,
                side.mean_compute_ns / 1e3
            );
        }
        let d = &self.difference_summary;
        let _ = writeln!(s, "\n[difference a - b]");
        let _ = writeln!(
            s,
            "  mean {:.3}  median {:.3}  rmsd {:.3}",
            d.mean, d.median, d.rmsd
        );
        match &self.welch {
            Some(w) => {
                let verdict = if w.p < SIGNIFICANCE_LEVEL {
                    "significant"
                } else {
                    "not significant"
                };
                let _ = writeln!(
                    s,
                    "  welch t {:.4}  dof {:.2}  p {:.4} ({verdict} at {SIGNIFICANCE_LEVEL})",
                    w.t, w.dof, w.p
                );
            }
            None => {
                let _ = writeln!(s, "  welch test undefined (zero variance in both runs)");
            }
        }
        if let Some(r) = self.compute_ratio {
            let _ = writeln!(s, "  compute time ratio a/b: {r:.3}");
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("comparison serializes")
    }

    /// Write `comparison.txt` and `comparison.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
        for (name, body) in [
            (REPORT_TEXT_FILE, self.to_text()),
            (REPORT_JSON_FILE, self.to_json()),
        ] {
            let path = dir.join(name);
            std::fs::write(&path, body).map_err(|e| HarnessError::io(&path, e))?;
        }
        Ok(())
    }
}
