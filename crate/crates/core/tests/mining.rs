mod common;

use std::collections::BTreeSet;

use commitvec::commit::is_code_relevant;
use commitvec::mining::{
    cache_fingerprint, corpus_stats, link_issues, GitCli, IssueClient, IssueError, Label, Priority, StatsEntry,
    TrackerConfig, UreqTransport, VcsClient,
};
use proptest::prelude::*;

fn offline(dir: &std::path::Path) -> IssueClient {
    IssueClient::new(
        TrackerConfig { offline: true, ..TrackerConfig::default() },
        dir,
        Box::new(UreqTransport::new(std::time::Duration::from_secs(1))),
    )
}

proptest! {
    #[test]
    fn links_are_distinct_and_bounded(words in prop::collection::vec("(ABC|XABC|AB)-[0-9]{1,3}|[a-z]{1,5}", 0..20)) {
        let msg = words.join(" ");
        let keys = link_issues(&msg, "ABC");
        let distinct: BTreeSet<&String> = keys.iter().collect();
        prop_assert_eq!(distinct.len(), keys.len());
        for k in &keys {
            prop_assert!(k.starts_with("ABC-"));
            prop_assert!(words.contains(k));
        }
    }
}

#[test]
fn scans_fixture_repo() {
    let dir = tempfile::tempdir().unwrap();
    common::fixtures::build_repo(dir.path());
    let git = GitCli::default();
    let metas = git.scan(dir.path(), "fx").unwrap();
    assert_eq!(metas.len(), 8);
    assert!(metas.iter().all(|m| !m.message.starts_with("Merge")));
    assert_eq!(metas[0].parent_id, None);
    assert_eq!(metas[1].parent_id.as_deref(), Some(metas[0].commit_id.as_str()));
    assert_eq!(metas[2].changed_paths, ["README.md"]);
    let relevant: Vec<bool> =
        metas.iter().map(|m| is_code_relevant(&git.commit_input(dir.path(), m).unwrap())).collect();
    assert_eq!(relevant, [false, true, false, true, true, true, true, false]);
    let first = git.commit_input(dir.path(), &metas[0]).unwrap();
    assert_eq!(first.changes.len(), 2);
    assert!(first.changes.iter().all(|c| c.pre_text.is_none() && c.post_text.is_some()));
    assert_eq!(first.commit_id, format!("fx:{}", metas[0].commit_id));
}

#[test]
fn empty_and_missing_repos() {
    let dir = tempfile::tempdir().unwrap();
    let git = GitCli::default();
    assert!(git.scan(dir.path(), "x").is_err());
    std::process::Command::new("git").arg("-C").arg(dir.path()).args(["init", "-q"]).status().unwrap();
    assert!(git.scan(dir.path(), "x").unwrap().is_empty());
}

#[test]
fn cached_issues() {
    let dir = tempfile::tempdir().unwrap();
    common::fixtures::write_issue_cache(dir.path());
    let c = offline(dir.path());
    let i = c.fetch_issue("SEC-1").unwrap();
    assert_eq!(i.priority, Priority::Critical);
    assert!(i.labels.contains("security"));
    assert!(matches!(c.fetch_issue("SEC-4"), Err(IssueError::Nonconforming { .. })));
    assert!(matches!(c.fetch_issue("SEC-9"), Err(IssueError::TrackerUnavailable { .. })));
    assert!(matches!(c.fetch_issue("bad"), Err(IssueError::InvalidKey(_))));
    let keys: BTreeSet<String> = ["SEC-1", "SEC-2", "SEC-9"].map(String::from).into();
    let all = c.fetch_all(&keys);
    assert_eq!(all.len(), 3);
    assert!(all["SEC-2"].is_ok() && all["SEC-9"].is_err());
    let h = cache_fingerprint(dir.path()).unwrap();
    assert_eq!(h, cache_fingerprint(dir.path()).unwrap());
    std::fs::write(dir.path().join("SEC-5.json"), "{}").unwrap();
    assert_ne!(h, cache_fingerprint(dir.path()).unwrap());
}

#[test]
fn stats_counts_sum_to_corpus() {
    let entries: Vec<StatsEntry> = (0..30)
        .map(|i| StatsEntry {
            repo_id: format!("r{}", i % 3),
            label: if i % 4 == 0 { Label::NoTicket } else { Label::Priority(Priority::ALL[i % 5]) },
            issue_keys: vec![],
            valid: i % 3 != 0,
        })
        .collect();
    let s = corpus_stats(&entries);
    let total = s.rows.last().unwrap();
    assert_eq!(total.class, "Total");
    assert_eq!(total.references, 30);
    assert_eq!(s.rows[..s.rows.len() - 1].iter().map(|r| r.references).sum::<usize>(), 30);
    assert_eq!(total.valid, 20);
    assert_eq!(total.proportion, 0.67);
}
