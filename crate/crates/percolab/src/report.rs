//! CSV emission: comma-separated, one header row, `#`-prefixed metadata
//! lines, UTF-8, dot decimal point. Floats are printed with 17 significant
//! digits so that a written value round-trips bit-exactly, and files are
//! written atomically (temp file, then rename).

use std::io::Write;
use std::path::Path;

#[derive(Clone, Debug, Default)]
pub struct CsvReport {
    meta: Vec<(String, String)>,
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvReport {
    /// Starts a report; `quantity` names what the file estimates.
    pub fn new(quantity: &str) -> CsvReport {
        let mut r = CsvReport::default();
        r.push_meta("quantity", quantity);
        r
    }

    pub fn push_meta(&mut self, key: &str, value: impl std::fmt::Display) {
        self.meta.push((key.to_string(), value.to_string()));
    }

    pub fn set_columns(&mut self, names: &[&str]) {
        self.columns = names.iter().map(|s| s.to_string()).collect();
    }

    pub fn push_row(&mut self, fields: Vec<String>) {
        assert_eq!(fields.len(), self.columns.len(), "row width mismatch");
        self.rows.push(fields);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write_atomic(&self, path: &Path) -> std::io::Result<()> {
        write_atomic(path, self.render().as_bytes())
    }
}

/// 17 significant digits; round-trips any f64 exactly.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

pub fn fmt_u64(x: u64) -> String {
    x.to_string()
}

/// Writes through a sibling temp file and renames into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("out")
    ));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)
}
