use std::io::Write;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::json;

use crate::args::Format;
use crate::config::RunConfig;

pub const CONFIG_PREFIX: &str = "# config: ";

/// What a command produced, in both renderings.
pub struct Output {
    pub json: serde_json::Value,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// False when the command's own check failed; the file is still written.
    pub ok: bool,
    pub summary: String,
}

impl Output {
    pub fn new(result: impl Serialize, header: &[&str]) -> Result<Self> {
        Ok(Self {
            json: serde_json::to_value(result)?,
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            ok: true,
            summary: String::new(),
        })
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn render(cfg: &RunConfig, out: &Output) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    match cfg.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut buf, &json!({ "config": cfg, "result": out.json }))?;
            buf.push(b'\n');
        }
        Format::Csv => {
            writeln!(buf, "{CONFIG_PREFIX}{}", serde_json::to_string(cfg)?)?;
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(&out.header)?;
            for row in &out.rows {
                w.write_record(row)?;
            }
            w.flush()?;
        }
    }
    Ok(buf)
}

pub fn emit(cfg: &RunConfig, out: &Output) -> Result<()> {
    let bytes = render(cfg, out)?;
    match &cfg.out {
        Some(path) => std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display())),
        None => Ok(std::io::stdout().lock().write_all(&bytes)?),
    }
}

/// Reads the configuration back from a file written by [`emit`].
pub fn read_config(text: &str) -> Result<RunConfig> {
    if let Some(rest) = text.strip_prefix(CONFIG_PREFIX) {
        let line = rest.lines().next().unwrap_or_default();
        return serde_json::from_str(line).context("config line");
    }
    let doc: serde_json::Value = serde_json::from_str(text).context("json output")?;
    serde_json::from_value(doc["config"].clone()).context("config field")
}
