//! Edge lists, signal CSV files and JSON documents.
//!
//! Edge lists are UTF-8 text with one `u v` or `u v w` triple per line
//! (tab or space separated, 0-based), `#` starting a comment line.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{build_graph, Graph};

/// Parses an edge list. The node count is `1 + max index` unless `n` is
/// given.
pub fn parse_edge_list(text: &str, n: Option<usize>) -> Result<Graph> {
    let mut edges = Vec::new();
    let mut max_index = None;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if !(2..=3).contains(&fields.len()) {
            return Err(Error::Parse(format!("line {}: expected `u v [w]`", lineno + 1)));
        }
        let index = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::Parse(format!("line {}: bad node index `{s}`", lineno + 1)))
        };
        let (u, v) = (index(fields[0])?, index(fields[1])?);
        let w = match fields.get(2) {
            Some(s) => s
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("line {}: bad weight `{s}`", lineno + 1)))?,
            None => 1.0,
        };
        max_index = max_index.max(Some(u.max(v)));
        edges.push((u, v, w));
    }
    let n = n.unwrap_or(max_index.map_or(0, |m| m + 1));
    build_graph(&edges, n)
}

pub fn read_edge_list(path: &Path, n: Option<usize>) -> Result<Graph> {
    parse_edge_list(&fs::read_to_string(path)?, n)
}

/// Tab-separated edge list with each undirected edge once; weights are
/// written only when some weight differs from 1.
pub fn format_edge_list(g: &Graph) -> String {
    let weighted = g.edges().any(|(_, _, w)| w != 1.0);
    let mut out = String::new();
    for (u, v, w) in g.edges() {
        if weighted {
            let _ = writeln!(out, "{u}\t{v}\t{w}");
        } else {
            let _ = writeln!(out, "{u}\t{v}");
        }
    }
    out
}

/// Single-column CSV with a one-line header.
pub fn format_signal(header: &str, values: &[f64]) -> String {
    let mut out = format!("{header}\n");
    for v in values {
        let _ = writeln!(out, "{v}");
    }
    out
}

/// Parses a single-column CSV, skipping the header line.
pub fn parse_signal(text: &str) -> Result<Vec<f64>> {
    text.lines()
        .skip(1)
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .enumerate()
        .map(|(i, l)| l.parse::<f64>().map_err(|_| Error::Parse(format!("row {}: bad value `{l}`", i + 1))))
        .collect()
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

/// Pretty JSON followed by a newline.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_json_string(value)?)?;
    Ok(())
}
