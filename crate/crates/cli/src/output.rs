//! File outputs. Every file starts with the tool version, the command, the
//! seed and the fully resolved configuration, so a run can be repeated
//! from its outputs alone.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone)]
pub struct Metadata {
    pub command: &'static str,
    pub seed: Option<u64>,
    pub config: Value,
}

impl Metadata {
    pub fn lines(&self) -> Vec<String> {
        vec![
            format!("cayley-spectra {VERSION}"),
            format!("command: {}", self.command),
            format!("seed: {}", self.seed.map_or("none".to_string(), |s| s.to_string())),
            format!("config: {}", self.config),
        ]
    }

    pub fn to_json(&self) -> Value {
        json!({ "version": VERSION, "command": self.command, "seed": self.seed, "config": self.config })
    }
}

/// Shortest round-trip decimal; exponent form outside `[1e-5, 1e16)`.
pub fn fmt(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else if x == 0.0 || (1e-5..1e16).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map_or(String::new(), fmt)
}

/// CSV text with `#`-prefixed metadata lines ahead of the header row.
pub fn csv_text(meta: &Metadata, header: &[String], rows: &[Vec<String>]) -> Result<String, CliError> {
    let mut buf = Vec::new();
    for line in meta.lines() {
        writeln!(buf, "# {line}").map_err(CliError::io)?;
    }
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(header).map_err(CliError::io)?;
        for row in rows {
            w.write_record(row).map_err(CliError::io)?;
        }
        w.flush().map_err(CliError::io)?;
    }
    String::from_utf8(buf).map_err(CliError::io)
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}

/// Write to `path`, or to stdout when no path is given.
pub fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => write_text(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn json_text<T: Serialize>(meta: &Metadata, key: &str, value: &T) -> Result<String, CliError> {
    let mut doc = serde_json::Map::new();
    doc.insert("metadata".into(), meta.to_json());
    doc.insert(key.into(), serde_json::to_value(value).map_err(CliError::io)?);
    let mut text = serde_json::to_string_pretty(&Value::Object(doc)).map_err(CliError::io)?;
    text.push('\n');
    Ok(text)
}
