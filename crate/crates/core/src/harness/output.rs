//! File emission. Everything written through an [`OutputDir`] is removed
//! again unless the set is committed, so a failed run leaves nothing behind.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;
use crate::metrics::TrajectoryPoint;

use super::experiment::{SummaryRow, SUMMARY_COLUMNS, TRAJECTORY_COLUMNS};

/// Outcome of one scenario assertion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), passed, detail: detail.into() }
    }
}

pub const CHECK_COLUMNS: [&str; 3] = ["name", "passed", "detail"];

/// JSON mirror of the CSV outputs.
#[derive(Debug, Clone, Serialize)]
pub struct SummaryJson<'a> {
    pub scenario: &'a str,
    pub seed: u64,
    pub all_passed: bool,
    pub rows: &'a [SummaryRow],
    pub checks: &'a [Check],
}

pub struct OutputDir {
    dir: PathBuf,
    created_dir: bool,
    written: Vec<PathBuf>,
    committed: bool,
}

impl OutputDir {
    pub fn create(dir: &Path) -> Result<Self> {
        let created_dir = !dir.exists();
        fs::create_dir_all(dir)?;
        Ok(OutputDir { dir: dir.to_path_buf(), created_dir, written: Vec::new(), committed: false })
    }

    fn track(&mut self, name: &str) -> PathBuf {
        let path = self.dir.join(name);
        self.written.push(path.clone());
        path
    }

    /// Writes a CSV with an explicit header, so empty tables still carry one.
    pub fn write_csv<S: Serialize>(&mut self, name: &str, header: &[&str], rows: &[S]) -> Result<()> {
        let path = self.track(name);
        let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
        w.write_record(header)?;
        for row in rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json<S: Serialize>(&mut self, name: &str, value: &S) -> Result<()> {
        let path = self.track(name);
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }

    pub fn write_summary(&mut self, rows: &[SummaryRow]) -> Result<()> {
        self.write_csv("summary.csv", &SUMMARY_COLUMNS, rows)
    }

    pub fn write_trajectory(&mut self, name: &str, points: &[TrajectoryPoint]) -> Result<()> {
        self.write_csv(name, &TRAJECTORY_COLUMNS, points)
    }

    pub fn write_checks(&mut self, checks: &[Check]) -> Result<()> {
        self.write_csv("checks.csv", &CHECK_COLUMNS, checks)
    }

    pub fn files(&self) -> &[PathBuf] {
        &self.written
    }

    pub fn commit(mut self) -> Vec<PathBuf> {
        self.committed = true;
        std::mem::take(&mut self.written)
    }
}

impl Drop for OutputDir {
    fn drop(&mut self) {
        if self.committed {
            return;
        }
        for path in &self.written {
            let _ = fs::remove_file(path);
        }
        if self.created_dir {
            let _ = fs::remove_dir(&self.dir);
        }
    }
}

/// Safe file-name fragment for trajectory labels.
pub fn slug(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' { c } else { '_' })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uncommitted_outputs_are_removed() {
        let root = tempfile::tempdir().unwrap();
        let dir = root.path().join("run");
        {
            let mut out = OutputDir::create(&dir).unwrap();
            out.write_checks(&[Check::new("a", true, "ok")]).unwrap();
            assert!(dir.join("checks.csv").exists());
        }
        assert!(!dir.exists());
    }

    #[test]
    fn committed_outputs_stay() {
        let root = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(root.path()).unwrap();
        out.write_checks(&[]).unwrap();
        let files = out.commit();
        assert_eq!(files.len(), 1);
        let text = fs::read_to_string(&files[0]).unwrap();
        assert_eq!(text, "name,passed,detail\n");
    }

    #[test]
    fn existing_directories_survive_cleanup() {
        let root = tempfile::tempdir().unwrap();
        fs::write(root.path().join("keep.txt"), "x").unwrap();
        {
            let mut out = OutputDir::create(root.path()).unwrap();
            out.write_json("summary.json", &1).unwrap();
        }
        assert!(root.path().join("keep.txt").exists());
        assert!(!root.path().join("summary.json").exists());
    }

    #[test]
    fn slugs() {
        assert_eq!(slug("regular-pull n=1024 f_in=1"), "regular-pull_n_1024_f_in_1");
    }
}
