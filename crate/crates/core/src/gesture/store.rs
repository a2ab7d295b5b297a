//! Template store text format.
//!
//! ```text
//! gtpl 1 <n> <reject_threshold>
//! <name> <action_id> x1 y1 x2 y2 ... xn yn
//! ```
//!
//! Reals are written with Rust's shortest round-trip formatting, so a
//! write/parse cycle is value-exact.

use std::fmt::Write as _;

use thiserror::Error;

use crate::geom::Point;

use super::{check_identifier, GestureTemplate, TemplateStore};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("template store line {line}: {message}")]
pub struct StoreParseError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> StoreParseError {
    StoreParseError {
        line,
        message: message.into(),
    }
}

pub fn write_store(store: &TemplateStore) -> String {
    let mut out = String::new();
    writeln!(out, "gtpl 1 {} {}", store.n(), store.reject_threshold()).unwrap();
    for t in store.templates() {
        write!(out, "{} {}", t.name, t.action_id).unwrap();
        for p in &t.normalized_points {
            write!(out, " {} {}", p.x, p.y).unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn parse_store(text: &str) -> Result<TemplateStore, StoreParseError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| err(1, "missing header"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let [magic, version, n, threshold] = fields[..] else {
        return Err(err(1, "header must be `gtpl 1 <n> <reject_threshold>`"));
    };
    if magic != "gtpl" {
        return Err(err(1, format!("expected `gtpl`, found {magic:?}")));
    }
    if version != "1" {
        return Err(err(1, format!("unsupported version {version:?}")));
    }
    let n: usize = n.parse().map_err(|_| err(1, format!("bad point count {n:?}")))?;
    let threshold: f64 = threshold
        .parse()
        .map_err(|_| err(1, format!("bad reject threshold {threshold:?}")))?;
    let mut store = TemplateStore::new(n, threshold).map_err(|e| err(1, e.to_string()))?;

    for (line_no, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 + 2 * n {
            return Err(err(
                line_no,
                format!("expected name, action and {} coordinates, found {} fields", 2 * n, fields.len()),
            ));
        }
        for id in &fields[..2] {
            check_identifier(id).map_err(|e| err(line_no, e.to_string()))?;
        }
        let coords = fields[2..]
            .iter()
            .map(|f| f.parse::<f64>().map_err(|_| err(line_no, format!("bad coordinate {f:?}"))))
            .collect::<Result<Vec<f64>, _>>()?;
        let normalized_points = coords.chunks_exact(2).map(|c| Point::new(c[0], c[1])).collect();
        store
            .insert(GestureTemplate {
                name: fields[0].to_string(),
                action_id: fields[1].to_string(),
                normalized_points,
            })
            .map_err(|e| err(line_no, e.to_string()))?;
    }
    Ok(store)
}
