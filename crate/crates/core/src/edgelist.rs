//! Plain-text graph and signal files.
//!
//! Edge lists start with a `n=<count>` header followed by one
//! `i<TAB>j<TAB>w` line per edge. Signal and index files hold one
//! `index<TAB>value` (or `index`) per line. `#` starts a comment and blank
//! lines are ignored everywhere.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::Graph;

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn field<T: std::str::FromStr>(line: usize, s: Option<&str>, what: &str) -> Result<T> {
    let s = s.ok_or_else(|| Error::parse(line, format!("missing {what}")))?;
    s.parse().map_err(|_| Error::parse(line, format!("bad {what} {s:?}")))
}

pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut lines = content_lines(text);
    let (hline, header) = lines.next().ok_or_else(|| Error::parse(1, "missing `n=<count>` header"))?;
    let n: usize = header
        .strip_prefix("n=")
        .ok_or_else(|| Error::parse(hline, "expected `n=<count>` header"))?
        .trim()
        .parse()
        .map_err(|_| Error::parse(hline, "bad vertex count"))?;
    let mut edges = Vec::new();
    for (no, line) in lines {
        let mut parts = line.split('\t').map(str::trim);
        let i = field(no, parts.next(), "source index")?;
        let j = field(no, parts.next(), "target index")?;
        let w = field(no, parts.next(), "weight")?;
        if parts.next().is_some() {
            return Err(Error::parse(no, "trailing fields"));
        }
        edges.push((i, j, w));
    }
    Graph::from_edges(n, &edges)
}

pub fn read_edge_list(path: impl AsRef<Path>) -> Result<Graph> {
    parse_edge_list(&read(path.as_ref())?)
}

pub fn format_edge_list(g: &Graph) -> String {
    let mut out = format!("n={}\n", g.num_vertices());
    for (i, j, w) in g.edges() {
        writeln!(out, "{i}\t{j}\t{w}").unwrap();
    }
    out
}

/// `index<TAB>value` pairs.
pub fn parse_signal(text: &str) -> Result<Vec<(usize, f64)>> {
    content_lines(text)
        .map(|(no, line)| {
            let mut parts = line.split('\t').map(str::trim);
            let idx = field(no, parts.next(), "index")?;
            let val = field(no, parts.next(), "value")?;
            if parts.next().is_some() {
                return Err(Error::parse(no, "trailing fields"));
            }
            Ok((idx, val))
        })
        .collect()
}

pub fn read_signal(path: impl AsRef<Path>) -> Result<Vec<(usize, f64)>> {
    parse_signal(&read(path.as_ref())?)
}

pub fn format_signal(values: &[f64]) -> String {
    let mut out = String::new();
    for (i, v) in values.iter().enumerate() {
        writeln!(out, "{i}\t{v}").unwrap();
    }
    out
}

/// One vertex index per line; extra tab-separated columns are ignored so a
/// signal file can double as an index file.
pub fn parse_indices(text: &str) -> Result<Vec<usize>> {
    content_lines(text)
        .map(|(no, line)| field(no, line.split('\t').next(), "index"))
        .collect()
}

pub fn read_indices(path: impl AsRef<Path>) -> Result<Vec<usize>> {
    parse_indices(&read(path.as_ref())?)
}
