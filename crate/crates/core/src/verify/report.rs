//! Suite reports: JSON for machine consumption, CSV of per-trial ratios,
//! plot data, and reproducer dumps for violated trials.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::grid::GridFunction;

use super::SuiteConfig;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`, 0 when both sides vanish, infinite when only `rhs` does.
    pub ratio: f64,
    pub pass: bool,
    pub witness: serde_json::Value,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub config: SuiteConfig,
    /// The theoretical constant the ratios are compared against.
    pub constant: f64,
    pub max_ratio: f64,
    pub verdict: String,
    pub violations: usize,
    pub wall_time_s: f64,
    pub trials: Vec<TrialRecord>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.verdict == "pass"
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        let file = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(file);
        serde_json::to_writer_pretty(&mut w, self)?;
        w.write_all(b"\n")
    }

    /// Per-trial ratios as CSV.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        let mut out = String::from("trial,lhs,rhs,ratio,pass\n");
        for t in &self.trials {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                t.trial, t.lhs, t.rhs, t.ratio, t.pass
            ));
        }
        std::fs::write(path, out)
    }

    /// One row of dimension-vs-ratio plot data, appended so several runs can
    /// share a file.
    pub fn append_plot_row(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        let path = path.as_ref();
        let mut content = if path.exists() {
            std::fs::read_to_string(path)?
        } else {
            String::from("suite,n,constant,max_ratio,verdict\n")
        };
        content.push_str(&format!(
            "{},{},{},{},{}\n",
            self.suite, self.config.dim, self.constant, self.max_ratio, self.verdict
        ));
        std::fs::write(path, content)
    }
}

/// Ratio with the 0/0-passes convention.
pub fn guarded_ratio(lhs: f64, rhs: f64) -> f64 {
    let tiny = 1e-300;
    if rhs.abs() > tiny {
        lhs / rhs
    } else if lhs.abs() <= 1e-12 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Inequality acceptance: `lhs <= c * rhs * (1 + slack)` up to an absolute
/// floor that absorbs floating-point noise when both sides vanish.
pub fn holds_upper(lhs: f64, c: f64, rhs: f64, slack: f64) -> bool {
    lhs <= c * rhs * (1.0 + slack) + 1e-12 * (1.0 + lhs.abs() + c.abs() * rhs.abs())
}

/// Equality acceptance at 1e-12 relative scale.
pub fn holds_equal(lhs: f64, rhs: f64) -> bool {
    (lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs() + rhs.abs())
}

/// Dump the inputs of a violated trial next to the report so the failure can
/// be replayed. Returns the written paths.
pub fn dump_reproducer(
    dir: &Path,
    suite: &str,
    trial: usize,
    grids: &[(&str, &GridFunction)],
    witness: &serde_json::Value,
) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for (tag, grid) in grids {
        let path = dir.join(format!("{suite}_trial{trial}_{tag}.oscg"));
        grid.save_path(&path).map_err(std::io::Error::other)?;
        written.push(path);
    }
    let wpath = dir.join(format!("{suite}_trial{trial}_witness.json"));
    std::fs::write(&wpath, serde_json::to_string_pretty(witness)?)?;
    written.push(wpath);
    Ok(written)
}
