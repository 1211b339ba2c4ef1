//! Corpus construction: repository walks, commit-to-ticket links, priority
//! and security labels, negative sampling and corpus statistics.

mod issues;
mod vcs;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use issues::{
    cache_fingerprint, is_issue_key, parse_issue, HttpResponse, IssueClient, IssueError, JiraIssue, Priority,
    TrackerConfig, Transport, UreqTransport, TOKEN_ENV,
};
pub use vcs::{CommitMeta, GitCli, VcsClient};

use crate::util::derive_seed;

#[derive(Debug, Error)]
pub enum MiningError {
    #[error("repository {repo} unavailable: {message}")]
    RepoUnavailable { repo: String, message: String },
    #[error("repository {repo_id}: need {needed} negatives, only {available} candidates")]
    InsufficientNegatives { repo_id: String, needed: usize, available: usize },
    #[error(transparent)]
    Issue(#[from] IssueError),
    #[error("invalid pattern: {0}")]
    Pattern(#[from] regex::Error),
}

/// Distinct `KEY-<digits>` references, word-boundary delimited, in order of
/// first appearance.
pub fn link_issues(message: &str, project_key: &str) -> Vec<String> {
    let re = Regex::new(&format!(r"\b{}-[0-9]+\b", regex::escape(project_key))).expect("escaped key");
    let mut seen = HashSet::new();
    re.find_iter(message).map(|m| m.as_str().to_string()).filter(|k| seen.insert(k.clone())).collect()
}

/// Links against several project keys; order follows the message.
pub fn link_issues_any(message: &str, project_keys: &[String]) -> Vec<String> {
    let mut found: Vec<(usize, String)> = Vec::new();
    for key in project_keys {
        for k in link_issues(message, key) {
            found.push((message.find(&k).unwrap_or(usize::MAX), k));
        }
    }
    found.sort();
    let mut seen = HashSet::new();
    found.into_iter().map(|(_, k)| k).filter(|k| seen.insert(k.clone())).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Label {
    Priority(Priority),
    NoTicket,
    Security(bool),
}

/// Corpus labels of the six-way pretext task, in class-index order.
pub const PRIORITY_CLASSES: [&str; 6] = ["blocker", "critical", "major", "minor", "trivial", "noticket"];

impl Label {
    pub fn name(self) -> &'static str {
        match self {
            Label::Priority(p) => p.name(),
            Label::NoTicket => "NoTicket",
            Label::Security(true) => "pos",
            Label::Security(false) => "neg",
        }
    }
}

impl Label {
    /// Lowercase form written to corpus files.
    pub fn corpus_label(self) -> String {
        self.name().to_lowercase()
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_lowercase().as_str() {
            "pos" => Ok(Label::Security(true)),
            "neg" => Ok(Label::Security(false)),
            "noticket" => Ok(Label::NoTicket),
            _ => s.parse().map(Label::Priority),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledCommit {
    pub meta: CommitMeta,
    pub label: Label,
}

/// No resolved ticket gives NoTicket; otherwise the most severe priority.
pub fn label_priority(commit: &CommitMeta, issues: &[JiraIssue]) -> LabeledCommit {
    let label = issues.iter().map(|i| i.priority).max().map_or(Label::NoTicket, Label::Priority);
    LabeledCommit { meta: commit.clone(), label }
}

pub fn default_security_labels() -> BTreeSet<String> {
    ["security", "authorization", "authentication"].map(String::from).into()
}

/// True iff some issue carries a label from `security_labels`, compared in
/// lowercase.
pub fn filter_security(issues: &[JiraIssue], security_labels: &BTreeSet<String>) -> bool {
    let wanted: BTreeSet<String> = security_labels.iter().map(|s| s.to_lowercase()).collect();
    issues.iter().flat_map(|i| &i.labels).any(|l| wanted.contains(&l.to_lowercase()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NegativeSample {
    pub negatives: Vec<LabeledCommit>,
    /// Commits dropped by an exclusion pattern, for the review file.
    pub excluded: Vec<CommitMeta>,
}

/// One negative per positive from the same repository, drawn uniformly
/// without replacement among commits that are not positives, match no
/// exclusion pattern and pass `relevant`. Candidates are visited in a
/// seeded random order, so `relevant` is only evaluated until enough are
/// found.
pub fn sample_negatives<F>(
    positives: &[LabeledCommit],
    repo_commits: &BTreeMap<String, Vec<CommitMeta>>,
    exclusions: &[Regex],
    mut relevant: F,
    seed: u64,
) -> Result<NegativeSample, MiningError>
where
    F: FnMut(&CommitMeta) -> bool,
{
    let mut wanted: BTreeMap<&str, usize> = BTreeMap::new();
    let taken: HashSet<(&str, &str)> = positives
        .iter()
        .map(|p| {
            *wanted.entry(&p.meta.repo_id).or_default() += 1;
            (p.meta.repo_id.as_str(), p.meta.commit_id.as_str())
        })
        .collect();
    let mut out = NegativeSample { negatives: Vec::new(), excluded: Vec::new() };
    for (repo_id, needed) in wanted {
        let all = repo_commits.get(repo_id).map(Vec::as_slice).unwrap_or(&[]);
        let mut candidates: Vec<&CommitMeta> = Vec::new();
        for c in all {
            if taken.contains(&(repo_id, c.commit_id.as_str())) {
                continue;
            }
            if exclusions.iter().any(|re| re.is_match(&c.message)) {
                out.excluded.push(c.clone());
            } else {
                candidates.push(c);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, repo_id));
        candidates.shuffle(&mut rng);
        let mut chosen = Vec::with_capacity(needed);
        for c in candidates {
            if chosen.len() == needed {
                break;
            }
            if relevant(c) {
                chosen.push(c);
            }
        }
        if chosen.len() < needed {
            return Err(MiningError::InsufficientNegatives {
                repo_id: repo_id.to_string(),
                needed,
                available: chosen.len(),
            });
        }
        out.negatives
            .extend(chosen.into_iter().map(|m| LabeledCommit { meta: m.clone(), label: Label::Security(false) }));
    }
    Ok(out)
}

/// Review file: `commit_id\tlabel\tfirst message line` per commit.
pub fn write_review<W: Write>(mut out: W, commits: &[LabeledCommit]) -> std::io::Result<()> {
    writeln!(out, "commit_id\tlabel\tmessage")?;
    for c in commits {
        let line = c.meta.message.lines().next().unwrap_or("").replace('\t', " ");
        writeln!(out, "{}\t{}\t{line}", c.meta.qualified_id(), c.label)?;
    }
    Ok(())
}

/// `valid / references` rounded to two decimals; 0 when nothing was
/// referenced.
pub fn proportion(references: usize, valid: usize) -> f64 {
    if references == 0 {
        return 0.0;
    }
    (valid as f64 / references as f64 * 100.0).round() / 100.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassStats {
    pub class: String,
    pub references: usize,
    pub valid: usize,
    pub proportion: f64,
}

/// One mined commit as seen by [`corpus_stats`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatsEntry {
    pub repo_id: String,
    pub label: Label,
    pub issue_keys: Vec<String>,
    /// Code-relevant with a nonempty context set.
    pub valid: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    /// Per class, then a final `Total` row.
    pub rows: Vec<ClassStats>,
    /// Issue keys referenced from more than one repository.
    pub cross_project_duplicates: Vec<String>,
}

pub fn corpus_stats(entries: &[StatsEntry]) -> CorpusStats {
    let mut counts: BTreeMap<Label, (usize, usize)> = BTreeMap::new();
    let mut repos_per_key: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for e in entries {
        let c = counts.entry(e.label).or_default();
        c.0 += 1;
        c.1 += usize::from(e.valid);
        for k in &e.issue_keys {
            repos_per_key.entry(k).or_default().insert(&e.repo_id);
        }
    }
    let mut rows: Vec<ClassStats> = counts
        .into_iter()
        .rev()
        .map(|(l, (r, v))| ClassStats {
            class: l.name().to_string(),
            references: r,
            valid: v,
            proportion: proportion(r, v),
        })
        .collect();
    let (r, v) = rows.iter().fold((0, 0), |(r, v), s| (r + s.references, v + s.valid));
    rows.push(ClassStats { class: "Total".into(), references: r, valid: v, proportion: proportion(r, v) });
    CorpusStats {
        rows,
        cross_project_duplicates: repos_per_key
            .into_iter()
            .filter(|(_, repos)| repos.len() > 1)
            .map(|(k, _)| k.to_string())
            .collect(),
    }
}
