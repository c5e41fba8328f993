//! JSON and CSV rendering. Every document carries the version, seed and resolved configuration.

use crate::{CliError, Result, VERSION};
use serde_json::{json, Value};
use std::io::Write;
use std::path::PathBuf;

#[derive(Debug, Clone)]
pub struct Output {
    pub body: String,
    pub path: Option<PathBuf>,
}

impl Output {
    pub fn write(&self, out: &mut dyn Write) -> Result<()> {
        match &self.path {
            Some(p) => std::fs::write(p, &self.body)
                .map_err(|source| CliError::Io { path: p.display().to_string(), source }),
            None => out
                .write_all(self.body.as_bytes())
                .map_err(|source| CliError::Io { path: "<stdout>".into(), source }),
        }
    }
}

/// Result of a subcommand: rendered output, exit status and messages for standard error.
#[derive(Debug, Clone)]
pub struct Done {
    pub output: Output,
    pub status: i32,
    pub notes: Vec<String>,
}

pub fn json_document(command: &str, seed: u64, config: Value, result: Value) -> String {
    let doc = json!({
        "version": VERSION,
        "command": command,
        "seed": seed,
        "config": config,
        "result": result,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("JSON values always serialize");
    s.push('\n');
    s
}

/// Floats as the shortest string that round-trips; non-finite values as empty cells.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else {
        String::new()
    }
}

#[derive(Debug, Clone, Default)]
pub struct CsvTable {
    pub comments: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(command: &str, seed: u64, config: &Value, header: Vec<String>) -> Self {
        let comments = vec![
            format!("version: {VERSION}"),
            format!("command: {command}"),
            format!("seed: {seed}"),
            format!("config: {}", serde_json::to_string(config).expect("JSON values always serialize")),
        ];
        Self { comments, header, rows: Vec::new() }
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for c in &self.comments {
            s.push_str("# ");
            s.push_str(c);
            s.push('\n');
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        s.push_str(&String::from_utf8(w.into_inner().expect("in-memory flush")).expect("UTF-8 fields"));
        s
    }
}
