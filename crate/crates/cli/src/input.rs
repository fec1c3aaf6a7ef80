//! Reading JSON arguments: a file path, `-` for stdin, or an inline literal.

use std::io::Read;
use std::path::Path;

use gm_core::{Error, Graph, Result};
use serde_json::Value;

pub fn read_json_file(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// Text starting with `[` or `{` is parsed as inline JSON.
pub fn read_json_arg(arg: &str) -> Result<Value> {
    let trimmed = arg.trim_start();
    if trimmed.starts_with('[') || trimmed.starts_with('{') {
        return Ok(serde_json::from_str(trimmed)?);
    }
    if arg == "-" {
        let mut text = String::new();
        std::io::stdin().read_to_string(&mut text).map_err(|e| Error::Io(format!("stdin: {e}")))?;
        return Ok(serde_json::from_str(&text)?);
    }
    read_json_file(Path::new(arg))
}

pub fn read_graph(arg: &str) -> Result<Graph> {
    Graph::from_json_value(&read_json_arg(arg)?)
}
