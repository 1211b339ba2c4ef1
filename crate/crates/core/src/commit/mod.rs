//! Commit-level context sets: the symmetric difference of the contexts of
//! every changed method before and after a commit.

use std::collections::{BTreeMap, BTreeSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ast::{extract_contexts, parse_file, ExtractionConfig, MethodAst, ParseError, PathContext};
use crate::util::derive_seed;

pub const DEFAULT_MAX_CONTEXTS: usize = 500;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileChange {
    pub path: String,
    /// `None` when the commit adds the file.
    pub pre_text: Option<String>,
    /// `None` when the commit deletes the file.
    pub post_text: Option<String>,
}

impl FileChange {
    pub fn is_java(&self) -> bool {
        self.path.ends_with(".java")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitInput {
    pub repo_id: String,
    pub commit_id: String,
    pub changes: Vec<FileChange>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedFile {
    pub path: String,
    pub error: ParseError,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommitContextSet {
    pub commit_id: String,
    /// S_C.
    pub contexts: BTreeSet<PathContext>,
    pub pre_count: usize,
    pub post_count: usize,
    pub skipped: Vec<SkippedFile>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampledCommit {
    pub commit_id: String,
    /// Exactly `max_contexts` entries; `None` is padding and only appears
    /// after every real context.
    pub slots: Vec<Option<PathContext>>,
    pub real_count: usize,
}

impl SampledCommit {
    pub fn real(&self) -> impl Iterator<Item = &PathContext> {
        self.slots[..self.real_count].iter().flatten()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CommitError {
    #[error("commit {commit_id}: pre- and post-commit contexts are identical")]
    EmptyRepresentation { commit_id: String, skipped: Vec<SkippedFile> },
    #[error("commit {0}: no contexts to sample")]
    NothingToSample(String),
}

/// Pairs methods present on both sides by `(name, parameter types)`. Methods
/// found on one side only and pairs with identical trees are dropped. When a
/// key occurs several times (same signature in nested classes) occurrences
/// are paired in source order.
pub fn match_methods(pre_text: &str, post_text: &str) -> Result<Vec<(MethodAst, MethodAst)>, ParseError> {
    match_parsed(parse_file("", pre_text)?, parse_file("", post_text)?)
}

fn match_parsed(pre: Vec<MethodAst>, post: Vec<MethodAst>) -> Result<Vec<(MethodAst, MethodAst)>, ParseError> {
    let mut by_key: BTreeMap<(String, Vec<String>), Vec<MethodAst>> = BTreeMap::new();
    for m in post {
        by_key.entry(m.key()).or_default().push(m);
    }
    for list in by_key.values_mut() {
        list.reverse();
    }
    let mut pairs = Vec::new();
    for m in pre {
        let Some(candidate) = by_key.get_mut(&m.key()).and_then(Vec::pop) else {
            continue;
        };
        if !m.root.same_structure(&candidate.root) {
            pairs.push((m, candidate));
        }
    }
    Ok(pairs)
}

fn file_pairs(change: &FileChange) -> Option<Result<Vec<(MethodAst, MethodAst)>, ParseError>> {
    if !change.is_java() {
        return None;
    }
    let (Some(pre), Some(post)) = (&change.pre_text, &change.post_text) else {
        return None;
    };
    if pre == post {
        return Some(Ok(Vec::new()));
    }
    Some(parse_file(&change.path, pre).and_then(|a| match_parsed(a, parse_file(&change.path, post)?)))
}

/// True iff some Java file has a changed method once comments are ignored.
pub fn is_code_relevant(commit: &CommitInput) -> bool {
    commit.changes.iter().filter_map(file_pairs).any(|r| r.is_ok_and(|pairs| !pairs.is_empty()))
}

/// S_C = S_pre Δ S_post over every matched method pair of every Java file.
/// Files that fail to parse are skipped and reported.
pub fn commit_contexts(commit: &CommitInput, cfg: &ExtractionConfig) -> Result<CommitContextSet, CommitError> {
    let mut pre_set = BTreeSet::new();
    let mut post_set = BTreeSet::new();
    let mut skipped = Vec::new();
    for change in &commit.changes {
        match file_pairs(change) {
            None => {}
            Some(Err(error)) => {
                log::warn!("{}: skipping {}: {error}", commit.commit_id, change.path);
                skipped.push(SkippedFile { path: change.path.clone(), error });
            }
            Some(Ok(pairs)) => {
                for (a, b) in pairs {
                    pre_set.extend(extract_contexts(&a, cfg));
                    post_set.extend(extract_contexts(&b, cfg));
                }
            }
        }
    }
    let contexts: BTreeSet<PathContext> = pre_set.symmetric_difference(&post_set).cloned().collect();
    if contexts.is_empty() {
        return Err(CommitError::EmptyRepresentation { commit_id: commit.commit_id.clone(), skipped });
    }
    Ok(CommitContextSet {
        commit_id: commit.commit_id.clone(),
        contexts,
        pre_count: pre_set.len(),
        post_count: post_set.len(),
        skipped,
    })
}

/// Fixed-length slot list: all contexts in canonical order when they fit,
/// otherwise a uniform sample (kept in canonical order) drawn from an RNG
/// seeded by `(seed, commit_id)`. Padding fills the tail.
pub fn sample_contexts(s: &CommitContextSet, max_contexts: usize, seed: u64) -> Result<SampledCommit, CommitError> {
    sample_context_list(&s.commit_id, &s.contexts.iter().cloned().collect::<Vec<_>>(), max_contexts, seed)
}

/// Same as [`sample_contexts`] for contexts already read from a corpus.
pub fn sample_context_list(
    commit_id: &str,
    contexts: &[PathContext],
    max_contexts: usize,
    seed: u64,
) -> Result<SampledCommit, CommitError> {
    if contexts.is_empty() {
        return Err(CommitError::NothingToSample(commit_id.to_string()));
    }
    let mut sorted: Vec<&PathContext> = contexts.iter().collect();
    sorted.sort();
    sorted.dedup();
    let chosen: Vec<&PathContext> = if sorted.len() <= max_contexts {
        sorted
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, commit_id));
        let mut idx = rand::seq::index::sample(&mut rng, sorted.len(), max_contexts).into_vec();
        idx.sort_unstable();
        idx.into_iter().map(|i| sorted[i]).collect()
    };
    let real_count = chosen.len();
    let mut slots: Vec<Option<PathContext>> = chosen.into_iter().cloned().map(Some).collect();
    slots.resize(max_contexts, None);
    Ok(SampledCommit { commit_id: commit_id.to_string(), slots, real_count })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn change(path: &str, pre: Option<&str>, post: Option<&str>) -> FileChange {
        FileChange { path: path.into(), pre_text: pre.map(String::from), post_text: post.map(String::from) }
    }

    fn commit(changes: Vec<FileChange>) -> CommitInput {
        CommitInput { repo_id: "r".into(), commit_id: "r:abc".into(), changes, message: String::new() }
    }

    #[test]
    fn added_methods_are_dropped() {
        let pre = "class A { int f() { return 0; } }";
        let post = "class A { int f() { return 1 + 2; } void g() { h(); } }";
        let pairs = match_methods(pre, post).unwrap();
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].0.name, "f");
        assert!(match_methods(pre, pre).unwrap().is_empty());
    }

    #[test]
    fn signature_change_is_add_plus_remove() {
        let pre = "class A { int f(int x) { return x; } }";
        let post = "class A { int f(long x) { return x; } }";
        assert!(match_methods(pre, post).unwrap().is_empty());
    }

    #[test]
    fn relevance() {
        let readme = commit(vec![change("README.md", Some("a"), Some("b"))]);
        assert!(!is_code_relevant(&readme));
        let comment = commit(vec![change(
            "A.java",
            Some("class A { int f() { return 0; } }"),
            Some("class A { int f() { /* zero */ return 0; } }"),
        )]);
        assert!(!is_code_relevant(&comment));
        let stmt = commit(vec![change(
            "A.java",
            Some("class A { int f() { return 0; } }"),
            Some("class A { int f() { return 1; } }"),
        )]);
        assert!(is_code_relevant(&stmt));
    }

    #[test]
    fn contexts_are_symmetric_difference() {
        let c = commit(vec![change(
            "A.java",
            Some("class A { int f(int a) { return a; } }"),
            Some("class A { int f(int a) { return a + 1; } }"),
        )]);
        let cfg = ExtractionConfig::default();
        let s = commit_contexts(&c, &cfg).unwrap();
        let pre = &match_methods(c.changes[0].pre_text.as_deref().unwrap(), c.changes[0].post_text.as_deref().unwrap())
            .unwrap()[0];
        let a = extract_contexts(&pre.0, &cfg);
        let b = extract_contexts(&pre.1, &cfg);
        assert_eq!((s.pre_count, s.post_count), (a.len(), b.len()));
        for ctx in &s.contexts {
            assert!(a.contains(ctx) != b.contains(ctx));
        }
        assert!(s.contexts.len() <= a.len() + b.len());
    }

    #[test]
    fn unparseable_file_is_skipped() {
        let c = commit(vec![
            change("Bad.java", Some("class B { void f( }"), Some("class B { void f() {} }")),
            change("A.java", Some("class A { int f() { return 0; } }"), Some("class A { int f() { return x; } }")),
        ]);
        let s = commit_contexts(&c, &ExtractionConfig::default()).unwrap();
        assert_eq!(s.skipped.len(), 1);
        assert_eq!(s.skipped[0].path, "Bad.java");
    }

    #[test]
    fn identical_sides_are_empty() {
        let c = commit(vec![change(
            "A.java",
            Some("class A { int f() { return 0; } }"),
            Some("class A { int f() { return 0; } }"),
        )]);
        assert!(matches!(
            commit_contexts(&c, &ExtractionConfig::default()),
            Err(CommitError::EmptyRepresentation { .. })
        ));
    }

    fn ctx_set(n: usize) -> CommitContextSet {
        CommitContextSet {
            commit_id: "r:1".into(),
            contexts: (0..n).map(|i| PathContext::new(format!("t{i:04}"), "P", "q")).collect(),
            pre_count: n,
            post_count: 0,
            skipped: vec![],
        }
    }

    #[test]
    fn padding_and_sampling() {
        let s = sample_contexts(&ctx_set(3), 500, 1).unwrap();
        assert_eq!((s.real_count, s.slots.len()), (3, 500));
        assert!(s.slots[3..].iter().all(Option::is_none));

        let s = sample_contexts(&ctx_set(500), 500, 1).unwrap();
        assert_eq!(s.real_count, 500);
        assert!(s.slots.iter().all(Option::is_some));

        let big = ctx_set(800);
        let a = sample_contexts(&big, 500, 1).unwrap();
        assert_eq!(a, sample_contexts(&big, 500, 1).unwrap());
        assert_ne!(a, sample_contexts(&big, 500, 2).unwrap());
        assert_eq!(a.real_count, 500);
        let mut seen: Vec<_> = a.real().collect();
        seen.dedup();
        assert_eq!(seen.len(), 500);
    }
}
