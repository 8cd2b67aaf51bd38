//! Deterministic CSV text and atomic file writes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Ten significant digits in scientific notation; locale independent.
pub fn sig(x: f64) -> String {
    format!("{x:.9e}")
}

pub fn dec8(x: f64) -> String {
    format!("{x:.8}")
}

pub struct Csv {
    comment: String,
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    pub fn new(comment: String, columns: &[&str]) -> Self {
        Self { comment, columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = format!("# {}\n{}\n", self.comment, self.columns.join(","));
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Write `contents` to `dir/name` through a temporary file and a rename, so
/// a failed run never leaves a truncated CSV behind.
pub fn write_atomic(dir: &Path, name: &str, contents: &str) -> std::io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let target = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp"));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
        fs::rename(&tmp, &target)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(e);
    }
    Ok(target)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting_is_fixed() {
        assert_eq!(sig(0.5), "5.000000000e-1");
        assert_eq!(sig(-1234.5678), "-1.234567800e3");
        assert_eq!(dec8(4.984953121), "4.98495312");
    }

    #[test]
    fn render_and_write() {
        let mut c = Csv::new("hello".into(), &["x", "y"]);
        c.push(vec!["1".into(), "2".into()]);
        assert_eq!(c.render(), "# hello\nx,y\n1,2\n");
        let dir = tempfile::tempdir().unwrap();
        let p = write_atomic(&dir.path().join("sub"), "t.csv", &c.render()).unwrap();
        assert_eq!(fs::read_to_string(p).unwrap(), c.render());
        assert!(!dir.path().join("sub/.t.csv.tmp").exists());
    }
}
