use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::Path;
use std::thread;

use anyhow::{Context, Result};
use commitvec::commit::{commit_contexts, is_code_relevant, CommitInput};
use commitvec::corpus::{read_commit_corpus, write_commit_corpus, write_token_corpus, CorpusEntry, TokenEntry};
use commitvec::mining::{
    cache_fingerprint, corpus_stats, filter_security, label_priority, link_issues_any, sample_negatives, write_review,
    CommitMeta, GitCli, IssueClient, JiraIssue, Label, LabeledCommit, MiningError, StatsEntry, VcsClient,
};
use commitvec::tokens::commit_tokens;
use log::{info, warn};
use regex::Regex;
use serde::Serialize;

use crate::config::{RepoSpec, Task};
use crate::data::{open, read_jsonl, write_jsonl, MinedCommit};
use crate::run::{data_error, DataContext, Run};

#[derive(Serialize)]
struct MineReport {
    scanned: BTreeMap<String, usize>,
    linked_commits: usize,
    issue_keys: usize,
    unresolved: BTreeMap<String, String>,
    dropped_unresolved: usize,
    dropped_duplicates: usize,
    issue_cache_sha256: String,
    labels: BTreeMap<String, usize>,
}

fn scan_all(git: &GitCli, repos: &[RepoSpec]) -> Result<BTreeMap<String, Vec<CommitMeta>>> {
    let results: Vec<Result<Vec<CommitMeta>, MiningError>> = thread::scope(|s| {
        let handles: Vec<_> = repos.iter().map(|r| s.spawn(move || git.scan(&r.path, &r.id))).collect();
        handles.into_iter().map(|h| h.join().expect("scan thread panicked")).collect()
    });
    let mut out = BTreeMap::new();
    for (r, res) in repos.iter().zip(results) {
        let metas = res.with_context(|| format!("scanning repository {}", r.id))?;
        info!("{}: {} commits", r.id, metas.len());
        out.insert(r.id.clone(), metas);
    }
    Ok(out)
}

fn input_for(git: &GitCli, run: &Run, meta: &CommitMeta) -> Result<CommitInput> {
    let repo = run
        .config
        .repo(&meta.repo_id)
        .ok_or_else(|| data_error(format!("repository {:?} is not configured", meta.repo_id)))?;
    Ok(git.commit_input(&repo.path, meta)?)
}

pub fn mine(run: &mut Run, offline: bool) -> Result<()> {
    let cfg = run.config.mine.clone();
    if cfg.repos.is_empty() {
        return Err(data_error("no repositories configured under [mine]"));
    }
    if cfg.project_keys.is_empty() {
        return Err(data_error("no project keys configured under [mine]"));
    }
    let exclusions: Vec<Regex> =
        cfg.exclusion_patterns.iter().map(|p| Regex::new(p)).collect::<Result<_, _>>().data("exclusion pattern")?;
    let git = GitCli::default();
    let repos = scan_all(&git, &cfg.repos)?;

    let mut linked: Vec<(&CommitMeta, Vec<String>)> = Vec::new();
    let mut keys = BTreeSet::new();
    for meta in repos.values().flatten() {
        let k = link_issues_any(&meta.message, &cfg.project_keys);
        keys.extend(k.iter().cloned());
        linked.push((meta, k));
    }
    let mut tracker = run.config.tracker.clone();
    tracker.offline |= offline;
    let client = IssueClient::with_ureq(tracker, &cfg.cache_dir);
    let fetched = client.fetch_all(&keys);
    let mut resolved: BTreeMap<&str, &JiraIssue> = BTreeMap::new();
    let mut unresolved = BTreeMap::new();
    for (k, r) in &fetched {
        match r {
            Ok(issue) => {
                resolved.insert(k, issue);
            }
            Err(e) => {
                warn!("{k}: {e}");
                unresolved.insert(k.clone(), e.to_string());
            }
        }
    }

    let mut repos_per_key: BTreeMap<String, BTreeSet<&str>> = BTreeMap::new();
    for (meta, ks) in &linked {
        for k in ks {
            repos_per_key.entry(k.clone()).or_default().insert(&meta.repo_id);
        }
    }
    let mut report = MineReport {
        scanned: repos.iter().map(|(k, v)| (k.clone(), v.len())).collect(),
        linked_commits: linked.iter().filter(|(_, k)| !k.is_empty()).count(),
        issue_keys: keys.len(),
        unresolved,
        dropped_unresolved: 0,
        dropped_duplicates: 0,
        issue_cache_sha256: cache_fingerprint(&cfg.cache_dir)?,
        labels: BTreeMap::new(),
    };

    let mut kept: Vec<(&CommitMeta, Vec<String>, Vec<JiraIssue>)> = Vec::new();
    for (meta, ks) in linked {
        if cfg.dedupe_issues && ks.iter().any(|k| repos_per_key[k.as_str()].len() > 1) {
            report.dropped_duplicates += 1;
            continue;
        }
        let issues: Vec<JiraIssue> = ks.iter().filter_map(|k| resolved.get(k.as_str()).map(|i| (*i).clone())).collect();
        if !ks.is_empty() && issues.is_empty() {
            report.dropped_unresolved += 1;
            continue;
        }
        kept.push((meta, ks, issues));
    }

    let mined: Vec<MinedCommit> = match cfg.task {
        Task::Priority => kept
            .into_iter()
            .map(|(meta, keys, issues)| MinedCommit {
                label: label_priority(meta, &issues).label,
                meta: meta.clone(),
                issue_keys: keys,
            })
            .collect(),
        Task::Security => {
            let mut keys_of: BTreeMap<(String, String), Vec<String>> = BTreeMap::new();
            let positives: Vec<LabeledCommit> = kept
                .into_iter()
                .filter(|(_, _, issues)| filter_security(issues, &cfg.security_labels))
                .map(|(meta, keys, _)| {
                    keys_of.insert((meta.repo_id.clone(), meta.commit_id.clone()), keys);
                    LabeledCommit { meta: meta.clone(), label: Label::Security(true) }
                })
                .collect();
            info!("{} security-relevant commits", positives.len());
            let relevant = |m: &CommitMeta| match input_for(&git, run, m) {
                Ok(input) => is_code_relevant(&input),
                Err(e) => {
                    warn!("{}: {e:#}", m.qualified_id());
                    false
                }
            };
            let sample =
                sample_negatives(&positives, &repos, &exclusions, relevant, run.seed).data("negative sampling")?;
            let all: Vec<LabeledCommit> = positives.into_iter().chain(sample.negatives).collect();
            run.write_with("review.tsv", |w| Ok(write_review(w, &all)?))?;
            run.write_with("excluded.tsv", |w| {
                writeln!(w, "commit_id\tmessage")?;
                for m in &sample.excluded {
                    let line = m.message.lines().next().unwrap_or("").replace('\t', " ");
                    writeln!(w, "{}\t{line}", m.qualified_id())?;
                }
                Ok(())
            })?;
            all.into_iter()
                .map(|c| {
                    let keys = keys_of.remove(&(c.meta.repo_id.clone(), c.meta.commit_id.clone())).unwrap_or_default();
                    MinedCommit { meta: c.meta, label: c.label, issue_keys: keys }
                })
                .collect()
        }
    };
    for m in &mined {
        *report.labels.entry(m.label.corpus_label()).or_default() += 1;
    }
    run.input_value("issue-cache", report.issue_cache_sha256.clone());
    run.write_with("mined.jsonl", |w| write_jsonl(w, &mined))?;
    run.write_json("mine_report.json", &report)?;
    info!("{} labeled commits", mined.len());
    Ok(())
}

pub fn extract(run: &mut Run, input: &Path) -> Result<()> {
    run.input(input)?;
    let mined: Vec<MinedCommit> = read_jsonl(input)?;
    let git = GitCli::default();
    let cfg = run.config.extract.clone();
    cfg.validate().data("[extract]")?;
    let mut corpus = Vec::new();
    let mut stats = Vec::new();
    for m in &mined {
        let commit = input_for(&git, run, &m.meta)?;
        let contexts = if is_code_relevant(&commit) {
            match commit_contexts(&commit, &cfg) {
                Ok(set) => {
                    for s in &set.skipped {
                        warn!("{}: skipped {}: {}", commit.commit_id, s.path, s.error);
                    }
                    Some(set.contexts)
                }
                Err(e) => {
                    info!("{e}");
                    None
                }
            }
        } else {
            None
        };
        stats.push(StatsEntry {
            repo_id: m.meta.repo_id.clone(),
            label: m.label,
            issue_keys: m.issue_keys.clone(),
            valid: contexts.is_some(),
        });
        if let Some(c) = contexts {
            corpus.push(CorpusEntry {
                commit_id: commit.commit_id,
                label: m.label.corpus_label(),
                contexts: c.into_iter().collect(),
            });
        }
    }
    info!("{} of {} commits have a nonempty representation", corpus.len(), mined.len());
    run.write_with("corpus.tsv", |w| Ok(write_commit_corpus(w, &corpus)?))?;
    run.write_with("extract.jsonl", |w| write_jsonl(w, &stats))?;
    Ok(())
}

pub fn tokenize(run: &mut Run, input: &Path, keep: Option<&Path>) -> Result<()> {
    run.input(input)?;
    let mined: Vec<MinedCommit> = read_jsonl(input)?;
    let keep: Option<BTreeSet<String>> = match keep {
        Some(p) => {
            run.input(p)?;
            let entries = read_commit_corpus(open(p)?).data(format!("reading {}", p.display()))?;
            Some(entries.into_iter().map(|e| e.commit_id).collect())
        }
        None => None,
    };
    let git = GitCli::default();
    let mut out = Vec::new();
    for m in &mined {
        let id = m.meta.qualified_id();
        if keep.as_ref().is_some_and(|k| !k.contains(&id)) {
            continue;
        }
        let commit = input_for(&git, run, &m.meta)?;
        if !is_code_relevant(&commit) {
            continue;
        }
        let seq = commit_tokens(&commit);
        if seq.tokens.is_empty() {
            continue;
        }
        out.push(TokenEntry { commit_id: id, label: m.label.corpus_label(), tokens: seq.tokens });
    }
    info!("{} token sequences", out.len());
    run.write_with("tokens.tsv", |w| Ok(write_token_corpus(w, &out)?))?;
    Ok(())
}

pub fn stats(run: &mut Run, input: &Path) -> Result<()> {
    run.input(input)?;
    let entries: Vec<StatsEntry> = read_jsonl(input)?;
    let s = corpus_stats(&entries);
    run.write_with("stats.csv", |w| {
        writeln!(w, "class,references,valid,proportion")?;
        for r in &s.rows {
            writeln!(w, "{},{},{},{:.2}", r.class, r.references, r.valid, r.proportion)?;
        }
        Ok(())
    })?;
    run.write_with("stats.txt", |w| {
        writeln!(w, "{:<10} {:>12} {:>12} {:>10}", "class", "references", "valid", "proportion")?;
        for r in &s.rows {
            writeln!(w, "{:<10} {:>12} {:>12} {:>10.2}", r.class, r.references, r.valid, r.proportion)?;
        }
        if !s.cross_project_duplicates.is_empty() {
            writeln!(w)?;
            writeln!(w, "issues referenced from several projects: {}", s.cross_project_duplicates.join(", "))?;
        }
        Ok(())
    })?;
    run.write_json("stats.json", &s)?;
    Ok(())
}
