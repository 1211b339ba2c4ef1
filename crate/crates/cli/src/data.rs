use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use anyhow::Result;
use commitvec::commit::sample_context_list;
use commitvec::corpus::{read_commit_corpus, read_token_corpus, CorpusEntry, LabelScheme, TokenEntry};
use commitvec::mining::{CommitMeta, Label};
use commitvec::models::{index_commit, IndexedCommit, TrainConfig};
use commitvec::tokens::Vocabulary;
use serde::{Deserialize, Serialize};

use crate::run::{data_error, DataContext};

/// One line of `mined.jsonl`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MinedCommit {
    pub meta: CommitMeta,
    pub label: Label,
    pub issue_keys: Vec<String>,
}

pub fn open(path: &Path) -> Result<BufReader<File>> {
    let f = File::open(path).data(format!("opening {}", path.display()))?;
    Ok(BufReader::new(f))
}

pub fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line.data(format!("reading {}", path.display()))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).data(format!("{}:{}", path.display(), i + 1))?);
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize, W: Write>(mut out: W, rows: &[T]) -> Result<()> {
    for r in rows {
        serde_json::to_writer(&mut out, r)?;
        writeln!(out)?;
    }
    Ok(())
}

pub fn commit_corpus(path: &Path) -> Result<(Vec<CorpusEntry>, LabelScheme)> {
    let entries = read_commit_corpus(open(path)?).data(format!("reading {}", path.display()))?;
    let scheme =
        LabelScheme::detect(entries.iter().map(|e| e.label.as_str())).data(format!("labels of {}", path.display()))?;
    Ok((entries, scheme))
}

pub fn token_corpus(path: &Path) -> Result<(Vec<TokenEntry>, LabelScheme)> {
    let entries = read_token_corpus(open(path)?).data(format!("reading {}", path.display()))?;
    let scheme =
        LabelScheme::detect(entries.iter().map(|e| e.label.as_str())).data(format!("labels of {}", path.display()))?;
    Ok((entries, scheme))
}

pub fn require_binary(scheme: LabelScheme, path: &Path) -> Result<()> {
    if scheme != LabelScheme::Binary {
        return Err(data_error(format!("{} must carry pos/neg labels", path.display())));
    }
    Ok(())
}

pub fn class_indices(labels: impl IntoIterator<Item = impl AsRef<str>>, scheme: LabelScheme) -> Result<Vec<usize>> {
    labels.into_iter().map(|l| scheme.index(l.as_ref()).data("label")).collect()
}

pub fn binary_labels(labels: impl IntoIterator<Item = impl AsRef<str>>) -> Vec<bool> {
    labels.into_iter().map(|l| l.as_ref() == "pos").collect()
}

pub fn path_vocabularies(entries: &[CorpusEntry], cfg: &TrainConfig) -> Result<(Vocabulary, Vocabulary)> {
    let terminals = Vocabulary::build(
        entries.iter().map(|e| e.contexts.iter().flat_map(|c| [c.left.as_str(), c.right.as_str()])),
        cfg.terminal_vocab_cap,
    )
    .data("terminal vocabulary")?;
    let paths =
        Vocabulary::build(entries.iter().map(|e| e.contexts.iter().map(|c| c.path.as_str())), cfg.path_vocab_cap)
            .data("path vocabulary")?;
    Ok((terminals, paths))
}

pub fn token_vocabulary(entries: &[TokenEntry], cfg: &TrainConfig) -> Result<Vocabulary> {
    Vocabulary::build(entries.iter().map(|e| e.tokens.iter()), cfg.token_vocab_cap).data("token vocabulary")
}

pub fn index_corpus(
    entries: &[CorpusEntry],
    terminals: &Vocabulary,
    paths: &Vocabulary,
    cfg: &TrainConfig,
) -> Result<Vec<IndexedCommit>> {
    entries
        .iter()
        .map(|e| {
            let s =
                sample_context_list(&e.commit_id, &e.contexts, cfg.max_contexts, cfg.seed).data("sampling contexts")?;
            Ok(index_commit(&s, terminals, paths))
        })
        .collect()
}

pub fn read_vocab(path: &Path) -> Result<Vocabulary> {
    Vocabulary::read(open(path)?).data(format!("reading {}", path.display()))
}
