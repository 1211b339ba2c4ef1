//! Java method ASTs and the path contexts extracted from them.

mod contexts;
mod lexer;
mod node;
mod parser;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use contexts::{extract_contexts, normalize_terminal, NUM_TERMINAL, STR_TERMINAL};
pub use lexer::{tokenize, Tok, TokKind};
pub use node::{AstNode, MethodAst};
pub use parser::{parse_file, parse_methods};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at byte {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(offset: usize, message: impl Into<String>) -> Self {
        Self { offset, message: message.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtractionConfig {
    /// Maximum number of nodes on a path, both terminals and the common
    /// ancestor included.
    pub max_path_length: usize,
    /// Maximum child-index gap between the two branches at the common ancestor.
    pub max_path_width: usize,
    pub max_contexts_per_method: usize,
    /// Key for the per-method down-sampling hash.
    pub seed: u64,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        Self { max_path_length: 8, max_path_width: 2, max_contexts_per_method: 1000, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid extraction config: {0} must be at least 1")]
pub struct ConfigError(pub &'static str);

impl ExtractionConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.max_path_length == 0 {
            return Err(ConfigError("max_path_length"));
        }
        if self.max_path_width == 0 {
            return Err(ConfigError("max_path_width"));
        }
        if self.max_contexts_per_method == 0 {
            return Err(ConfigError("max_contexts_per_method"));
        }
        Ok(())
    }

    /// No length, width or count limit.
    pub fn unlimited() -> Self {
        Self { max_path_length: usize::MAX, max_path_width: usize::MAX, max_contexts_per_method: usize::MAX, seed: 0 }
    }
}

/// `(left terminal, path, right terminal)`. The derived ordering is the
/// canonical order used wherever a set of contexts is serialized.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PathContext {
    pub left: String,
    pub path: String,
    pub right: String,
}

impl PathContext {
    pub fn new(left: impl Into<String>, path: impl Into<String>, right: impl Into<String>) -> Self {
        Self { left: left.into(), path: path.into(), right: right.into() }
    }

    /// Comma-joined form used inside corpus lines.
    pub fn to_compact(&self) -> String {
        format!("{},{},{}", self.left, self.path, self.right)
    }

    pub fn from_compact(s: &str) -> Option<Self> {
        let mut it = s.splitn(3, ',');
        let (l, p, r) = (it.next()?, it.next()?, it.next()?);
        Some(Self::new(l, p, r))
    }
}

impl fmt::Display for PathContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{}\t{}", self.left, self.path, self.right)
    }
}

impl FromStr for PathContext {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split('\t').collect();
        match parts.as_slice() {
            [l, p, r] => Ok(Self::new(*l, *p, *r)),
            _ => Err(format!("expected 3 tab-separated fields, got {}", parts.len())),
        }
    }
}

/// One context per line, in canonical order.
pub fn write_contexts<'a, W: std::io::Write>(
    mut out: W,
    contexts: impl IntoIterator<Item = &'a PathContext>,
) -> std::io::Result<()> {
    let mut sorted: Vec<&PathContext> = contexts.into_iter().collect();
    sorted.sort();
    sorted.dedup();
    for c in sorted {
        writeln!(out, "{c}")?;
    }
    Ok(())
}

pub fn read_contexts<R: std::io::BufRead>(input: R) -> Result<Vec<PathContext>, String> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|e| e.to_string())?;
        if line.is_empty() {
            continue;
        }
        out.push(line.parse().map_err(|e| format!("line {}: {e}", i + 1))?);
    }
    Ok(out)
}
