//! Output files. Floats in CSV use 17 significant digits; JSON files carry
//! the toolkit version and the command configuration.

use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

use parsets_core::io::format_float;

pub struct Envelope {
    command: &'static str,
    config: Value,
}

impl Envelope {
    pub fn new(command: &'static str, config: &impl Serialize) -> Self {
        Envelope { command, config: serde_json::to_value(config).unwrap_or(Value::Null) }
    }

    pub fn finish(self, result: Value, metadata: Value) -> Value {
        json!({
            "tool": "parsets",
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "config": self.config,
            "metadata": metadata,
            "result": result,
        })
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let fields: Vec<String> = row.iter().map(|&x| format_float(x)).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    write_text(path, &out)
}
