//! Tabular results with '#'-prefixed metadata, rendered as CSV or JSON.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

/// Default output directory when `--output` is absent.
pub const OUTPUT_DIR_ENV: &str = "ZENO_OUTPUT_DIR";

const UNITS: &str = "J = 1, time in 1/J, rates in J";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Report {
    pub command: &'static str,
    pub seed: u64,
    pub config: Value,
    /// Extra metadata emitted after the config.
    pub notes: Map<String, Value>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

impl Report {
    pub fn new(
        command: &'static str,
        seed: u64,
        config: &impl Serialize,
        columns: &[&'static str],
    ) -> Self {
        Self {
            command,
            seed,
            config: serde_json::to_value(config).expect("config serializes"),
            notes: Map::new(),
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn note(&mut self, key: &str, value: impl Into<Value>) {
        self.notes.insert(key.to_string(), value.into());
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// SHA-256 of the command, seed and config.
    pub fn digest(&self) -> String {
        let canonical =
            json!({ "command": self.command, "seed": self.seed, "config": self.config });
        hex::encode(Sha256::digest(
            serde_json::to_vec(&canonical).expect("json"),
        ))
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.render_csv(),
            Format::Json => self.render_json(),
        }
    }

    fn render_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# zeno {}", self.command);
        let _ = writeln!(out, "# units: {UNITS}");
        let _ = writeln!(out, "# seed: {}", self.seed);
        let _ = writeln!(out, "# config: {}", self.config);
        let _ = writeln!(out, "# config_digest: {}", self.digest());
        for (k, v) in &self.notes {
            let _ = writeln!(out, "# {k}: {v}");
        }
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(csv_cell).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    fn render_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                Value::Object(
                    self.columns
                        .iter()
                        .map(|c| c.to_string())
                        .zip(r.iter().cloned())
                        .collect(),
                )
            })
            .collect();
        let doc = json!({
            "command": self.command,
            "units": UNITS,
            "seed": self.seed,
            "config": self.config,
            "config_digest": self.digest(),
            "notes": self.notes,
            "columns": self.columns,
            "rows": rows,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("json");
        s.push('\n');
        s
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) if s.contains([',', '"', '\n']) => {
            format!("\"{}\"", s.replace('"', "\"\""))
        }
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Writes to `output`, else `$ZENO_OUTPUT_DIR/<command>.<ext>`, else stdout.
/// Returns the path written, if any.
pub fn emit(report: &Report, format: Format, output: Option<&Path>) -> io::Result<Option<PathBuf>> {
    let text = report.render(format);
    let target = match output {
        Some(p) => Some(p.to_path_buf()),
        None => std::env::var_os(OUTPUT_DIR_ENV)
            .filter(|d| !d.is_empty())
            .map(|d| PathBuf::from(d).join(format!("{}.{}", report.command, format.extension()))),
    };
    match target {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(&path, text)?;
            Ok(Some(path))
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(text.as_bytes())?;
            lock.flush()?;
            Ok(None)
        }
    }
}

/// Sample mean and standard error of the mean.
pub fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}
