//! Delimiter-separated output files with reproducibility metadata headers.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("cannot write `{0}`: {1}")]
    Io(PathBuf, std::io::Error),
}

/// A table writer: `#`-prefixed metadata lines, a header row, CSV body.
pub struct Table {
    meta: Vec<(String, String)>,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            meta: Vec::new(),
            header: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn row(&mut self, cells: &[String]) -> &mut Self {
        assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells.to_vec());
        self
    }

    pub fn row_f64(&mut self, cells: &[f64]) -> &mut Self {
        let formatted: Vec<String> = cells.iter().map(|v| fmt_f64(*v)).collect();
        self.row(&formatted)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            writeln!(out, "# {k} = {v}").unwrap();
        }
        writeln!(out, "{}", self.header.join(",")).unwrap();
        for r in &self.rows {
            writeln!(out, "{}", r.join(",")).unwrap();
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<PathBuf, ReportError> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| ReportError::Io(path.to_path_buf(), e))?;
        }
        std::fs::write(path, self.render())
            .map_err(|e| ReportError::Io(path.to_path_buf(), e))?;
        Ok(path.to_path_buf())
    }
}

/// Fixed-width scientific formatting so identical runs are byte-identical.
pub fn fmt_f64(v: f64) -> String {
    if v == 0.0 {
        "0.000000000000e0".into()
    } else {
        format!("{v:.12e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_deterministic() {
        let mut t = Table::new(&["a", "b"]);
        t.meta("seed", 7).row_f64(&[1.0, -0.5]).row_f64(&[0.0, 3.25e-9]);
        let one = t.render();
        let two = t.render();
        assert_eq!(one, two);
        assert!(one.starts_with("# seed = 7\na,b\n"));
        assert!(one.contains("0.000000000000e0"));
    }
}
