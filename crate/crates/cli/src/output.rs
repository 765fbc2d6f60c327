//! Output sinks, format selection and the config echo.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, CliResult};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "BANDSAMP_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Text,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Text => "txt",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Output file. Without it, output goes to `<out-dir>/<name>.<ext>` when an
    /// output directory is set, otherwise to stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,

    /// Default output directory.
    #[arg(long, env = OUT_DIR_ENV)]
    pub out_dir: Option<PathBuf>,
}

impl OutputArgs {
    pub fn resolve(&self, stem: &str) -> Option<PathBuf> {
        self.output
            .clone()
            .or_else(|| self.out_dir.as_ref().map(|d| d.join(format!("{stem}.{}", self.format.extension()))))
    }
}

/// The resolved configuration of a run, embedded in every artifact.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub format: Format,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub params: Value,
}

impl RunConfig {
    pub fn new(command: &str, out: &OutputArgs, stem: &str, params: Value) -> Self {
        Self { command: command.into(), format: out.format, output: out.resolve(stem), params }
    }

    /// `# config: {…}` line for CSV and text output.
    pub fn comment_line(&self) -> CliResult<String> {
        Ok(format!("# config: {}\n", serde_json::to_string(self)?))
    }
}

/// JSON document `{"config": …, <key>: <value>}`.
pub fn json_document(config: &RunConfig, key: &str, value: impl Serialize) -> CliResult<String> {
    let mut map = serde_json::Map::new();
    map.insert("config".into(), serde_json::to_value(config)?);
    map.insert(key.into(), serde_json::to_value(value)?);
    let mut s = serde_json::to_string_pretty(&Value::Object(map))?;
    s.push('\n');
    Ok(s)
}

/// Comma-separated rows with LF line endings.
#[derive(Debug, Default)]
pub struct Csv {
    body: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut c = Self::default();
        c.row(header.iter().map(|s| s.to_string()));
        c
    }

    pub fn row(&mut self, cells: impl IntoIterator<Item = String>) {
        let cells: Vec<String> = cells.into_iter().collect();
        self.body.push_str(&cells.join(","));
        self.body.push('\n');
    }

    pub fn finish(self) -> String {
        self.body
    }
}

/// Left-aligned text columns separated by two spaces.
pub fn aligned(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> =
        (0..cols).map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for r in rows {
        let line: Vec<String> = r.iter().zip(&widths).map(|(s, w)| format!("{s:<w$}")).collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

pub fn write_to(path: Option<&Path>, body: &str) -> CliResult<()> {
    match path {
        Some(p) => {
            let io = |source| CliError::Io { path: p.display().to_string(), source };
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(io)?;
            }
            fs::write(p, body).map_err(io)
        }
        None => std::io::stdout()
            .write_all(body.as_bytes())
            .map_err(|source| CliError::Io { path: "<stdout>".into(), source }),
    }
}

/// Writes a finished artifact where `config` says it goes.
pub fn emit(config: &RunConfig, body: &str) -> CliResult<()> {
    write_to(config.output.as_deref(), body)
}

pub fn num(x: f64) -> String {
    x.to_string()
}
