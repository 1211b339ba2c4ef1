//! Line-oriented corpus files.
//!
//! Commit corpus: `commit_id\tlabel\tctx ctx ...`, each context in compact
//! `left,path,right` form. Token corpus: `commit_id\tlabel\ttok tok ...`.
//! Predictions: `commit_id\tlabel\tscore`.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ast::PathContext;
use crate::mining::PRIORITY_CLASSES;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("corpus is empty")]
    Empty,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub commit_id: String,
    pub label: String,
    pub contexts: Vec<PathContext>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenEntry {
    pub commit_id: String,
    pub label: String,
    pub tokens: Vec<String>,
}

fn check_field(s: &str) -> std::io::Result<()> {
    if s.contains(['\t', '\n']) {
        return Err(std::io::Error::new(std::io::ErrorKind::InvalidInput, format!("field {s:?} contains a separator")));
    }
    Ok(())
}

pub fn write_commit_corpus<W: Write>(mut out: W, entries: &[CorpusEntry]) -> std::io::Result<()> {
    for e in entries {
        check_field(&e.commit_id)?;
        check_field(&e.label)?;
        let mut line = format!("{}\t{}\t", e.commit_id, e.label);
        for (i, c) in e.contexts.iter().enumerate() {
            let compact = c.to_compact();
            if compact.contains(char::is_whitespace) {
                return Err(std::io::Error::new(
                    std::io::ErrorKind::InvalidInput,
                    format!("context {compact:?} contains whitespace"),
                ));
            }
            if i > 0 {
                line.push(' ');
            }
            line.push_str(&compact);
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn read_commit_corpus<R: BufRead>(input: R) -> Result<Vec<CorpusEntry>, CorpusError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let mut parts = line.splitn(3, '\t');
        let (Some(id), Some(label)) = (parts.next(), parts.next()) else {
            return Err(CorpusError::Malformed { line: i + 1, message: "missing label".into() });
        };
        let contexts = parts
            .next()
            .unwrap_or("")
            .split_whitespace()
            .map(|p| {
                PathContext::from_compact(p)
                    .ok_or_else(|| CorpusError::Malformed { line: i + 1, message: format!("bad context {p:?}") })
            })
            .collect::<Result<_, _>>()?;
        out.push(CorpusEntry { commit_id: id.into(), label: label.into(), contexts });
    }
    Ok(out)
}

pub fn write_token_corpus<W: Write>(mut out: W, entries: &[TokenEntry]) -> std::io::Result<()> {
    for e in entries {
        check_field(&e.commit_id)?;
        check_field(&e.label)?;
        writeln!(out, "{}\t{}\t{}", e.commit_id, e.label, e.tokens.join(" "))?;
    }
    Ok(())
}

pub fn read_token_corpus<R: BufRead>(input: R) -> Result<Vec<TokenEntry>, CorpusError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let mut parts = line.splitn(3, '\t');
        let (Some(id), Some(label)) = (parts.next(), parts.next()) else {
            return Err(CorpusError::Malformed { line: i + 1, message: "missing label".into() });
        };
        let tokens = parts.next().unwrap_or("").split_whitespace().map(String::from).collect();
        out.push(TokenEntry { commit_id: id.into(), label: label.into(), tokens });
    }
    Ok(out)
}

/// How label strings map to class indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LabelScheme {
    /// `neg` = 0, `pos` = 1.
    Binary,
    /// blocker, critical, major, minor, trivial, noticket = 0..6.
    Priority,
}

impl LabelScheme {
    pub fn detect<'a>(labels: impl IntoIterator<Item = &'a str>) -> Result<Self, CorpusError> {
        let mut any = false;
        let (mut binary, mut priority) = (true, true);
        for l in labels {
            any = true;
            binary &= matches!(l, "pos" | "neg");
            priority &= PRIORITY_CLASSES.contains(&l);
            if !binary && !priority {
                return Err(CorpusError::UnknownLabel(l.to_string()));
            }
        }
        match (any, binary) {
            (false, _) => Err(CorpusError::Empty),
            (true, true) => Ok(LabelScheme::Binary),
            (true, false) => Ok(LabelScheme::Priority),
        }
    }

    pub fn classes(self) -> usize {
        match self {
            LabelScheme::Binary => 2,
            LabelScheme::Priority => PRIORITY_CLASSES.len(),
        }
    }

    pub fn index(self, label: &str) -> Result<usize, CorpusError> {
        let found = match self {
            LabelScheme::Binary => ["neg", "pos"].iter().position(|&l| l == label),
            LabelScheme::Priority => PRIORITY_CLASSES.iter().position(|&l| l == label),
        };
        found.ok_or_else(|| CorpusError::UnknownLabel(label.to_string()))
    }

    pub fn name(self, index: usize) -> &'static str {
        match self {
            LabelScheme::Binary => ["neg", "pos"][index],
            LabelScheme::Priority => PRIORITY_CLASSES[index],
        }
    }
}

/// Class counts keyed by label string.
pub fn label_counts<'a>(labels: impl IntoIterator<Item = &'a str>) -> BTreeMap<String, usize> {
    let mut m = BTreeMap::new();
    for l in labels {
        *m.entry(l.to_string()).or_insert(0) += 1;
    }
    m
}

pub fn write_predictions<W: Write>(mut out: W, rows: &[(&str, &str, f64)]) -> std::io::Result<()> {
    writeln!(out, "commit_id\tlabel\tscore")?;
    for (id, label, score) in rows {
        writeln!(out, "{id}\t{label}\t{score}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn commit_corpus_round_trip() {
        let entries = vec![
            CorpusEntry {
                commit_id: "repo:abc".into(),
                label: "pos".into(),
                contexts: vec![PathContext::new("f", "SimpleName^MethodCallExpr_NameExpr", "x")],
            },
            CorpusEntry { commit_id: "repo:def".into(), label: "neg".into(), contexts: vec![] },
        ];
        let mut buf = Vec::new();
        write_commit_corpus(&mut buf, &entries).unwrap();
        assert_eq!(read_commit_corpus(buf.as_slice()).unwrap(), entries);
    }

    #[test]
    fn token_corpus_round_trip() {
        let entries = vec![TokenEntry {
            commit_id: "r:1".into(),
            label: "major".into(),
            tokens: vec!["fit".into(), "list".into()],
        }];
        let mut buf = Vec::new();
        write_token_corpus(&mut buf, &entries).unwrap();
        assert_eq!(read_token_corpus(buf.as_slice()).unwrap(), entries);
    }

    #[test]
    fn schemes() {
        assert_eq!(LabelScheme::detect(["pos", "neg"]).unwrap(), LabelScheme::Binary);
        let p = LabelScheme::detect(["major", "noticket"]).unwrap();
        assert_eq!(p, LabelScheme::Priority);
        assert_eq!(p.index("noticket").unwrap(), 5);
        assert!(LabelScheme::detect(["pos", "major"]).is_err());
        assert!(LabelScheme::detect([]).is_err());
        assert_eq!(LabelScheme::Binary.index("pos").unwrap(), 1);
    }
}
