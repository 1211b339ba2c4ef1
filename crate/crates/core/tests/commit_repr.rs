mod common;

use std::collections::BTreeSet;

use commitvec::ast::{ExtractionConfig, PathContext};
use commitvec::commit::{commit_contexts, sample_context_list, CommitError, CommitInput, FileChange};
use proptest::prelude::*;

fn ctx() -> impl Strategy<Value = PathContext> {
    ("[a-d]", "P[0-3]", "[a-d]").prop_map(|(l, p, r)| PathContext::new(l, p, r))
}

fn java(statements: &[String]) -> String {
    format!("class A {{ void m(int p) {{ {} }} }}", statements.join(" "))
}

fn stmt() -> impl Strategy<Value = String> {
    ("[a-e]", "[a-e]", 0u8..20).prop_map(|(a, b, n)| format!("{a} = {b} + {n};"))
}

fn without_numbers(statements: &[String]) -> Vec<String> {
    statements.iter().map(|s| s.replace(|c: char| c.is_ascii_digit(), "")).collect()
}

proptest! {
    #[test]
    fn symmetric_difference_identities(a in prop::collection::btree_set(ctx(), 0..40), b in prop::collection::btree_set(ctx(), 0..40)) {
        let va: Vec<PathContext> = a.iter().cloned().collect();
        let vb: Vec<PathContext> = b.iter().cloned().collect();
        let naive = common::naive_symmetric_difference(&va, &vb);
        let union: BTreeSet<_> = a.union(&b).cloned().collect();
        let inter: BTreeSet<_> = a.intersection(&b).cloned().collect();
        let by_union: BTreeSet<_> = union.difference(&inter).cloned().collect();
        prop_assert_eq!(&naive, &by_union);
        prop_assert!(naive.len() <= a.len() + b.len());
        prop_assert_eq!(naive.is_empty(), a == b);
    }

    #[test]
    fn commit_sets_follow_statement_edits(pre in prop::collection::vec(stmt(), 1..6), post in prop::collection::vec(stmt(), 1..6)) {
        let commit = CommitInput {
            repo_id: "r".into(),
            commit_id: "r:1".into(),
            changes: vec![FileChange { path: "A.java".into(), pre_text: Some(java(&pre)), post_text: Some(java(&post)) }],
            message: String::new(),
        };
        match commit_contexts(&commit, &ExtractionConfig::default()) {
            Ok(s) => {
                prop_assert!(!s.contexts.is_empty());
                prop_assert!(s.contexts.len() <= s.pre_count + s.post_count);
            }
            Err(CommitError::EmptyRepresentation { .. }) => prop_assert_eq!(without_numbers(&pre), without_numbers(&post)),
            Err(e) => prop_assert!(false, "{}", e),
        }
    }

    #[test]
    fn sampling_layout(set in prop::collection::btree_set(ctx(), 1..60), max in 1usize..40, seed: u64) {
        let list: Vec<PathContext> = set.iter().cloned().collect();
        let s = sample_context_list("r:x", &list, max, seed).unwrap();
        prop_assert_eq!(s.slots.len(), max);
        prop_assert_eq!(s.real_count, set.len().min(max));
        prop_assert!(s.slots[..s.real_count].iter().all(Option::is_some));
        prop_assert!(s.slots[s.real_count..].iter().all(Option::is_none));
        let real: Vec<&PathContext> = s.real().collect();
        prop_assert!(real.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(real.iter().all(|c| set.contains(*c)));
        prop_assert_eq!(&s, &sample_context_list("r:x", &list, max, seed).unwrap());
    }
}

#[test]
fn different_seeds_draw_different_samples() {
    let list: Vec<PathContext> = (0..800).map(|i| PathContext::new(format!("t{i}"), "P", "u")).collect();
    let a = sample_context_list("r:1", &list, 500, 1).unwrap();
    let b = sample_context_list("r:1", &list, 500, 2).unwrap();
    assert_eq!(a.real_count, 500);
    assert_ne!(a, b);
}
