mod common;

use commitvec::ast::{extract_contexts, parse_methods, AstNode, ExtractionConfig, MethodAst, PathContext};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn tree() -> impl Strategy<Value = AstNode> {
    let leaf = ("[a-z]{1,6}", prop::sample::select(vec!["SimpleName", "IntegerLiteralExpr", "Name"]))
        .prop_map(|(tok, kind)| AstNode::leaf(kind, tok, (0, 0)));
    leaf.prop_recursive(5, 40, 4, |inner| {
        (
            prop::sample::select(vec!["BlockStmt", "BinaryExpr:plus", "MethodCallExpr", "IfStmt"]),
            prop::collection::vec(inner, 1..4),
        )
            .prop_map(|(kind, children)| AstNode::interior(kind, (0, 0), children))
    })
}

fn method(root: AstNode) -> MethodAst {
    MethodAst { name: "m".into(), signature: vec![], root, source_file: String::new() }
}

proptest! {
    #[test]
    fn matches_brute_force_on_random_trees(root in tree(), len in 2usize..10, width in 0usize..4, cap in 1usize..50, seed: u64) {
        let m = method(root);
        let cfg = ExtractionConfig { max_path_length: len, max_path_width: width, max_contexts_per_method: cap, seed };
        prop_assert_eq!(extract_contexts(&m, &cfg), common::brute_force_contexts(&m, &cfg));
    }

    #[test]
    fn limits_are_monotone(root in tree(), len in 2usize..8, width in 0usize..3) {
        let m = method(root);
        let cfg = ExtractionConfig { max_path_length: len, max_path_width: width, ..ExtractionConfig::unlimited() };
        let wider = ExtractionConfig { max_path_length: len + 1, max_path_width: width + 1, ..cfg.clone() };
        let small = extract_contexts(&m, &cfg);
        let big = extract_contexts(&m, &wider);
        prop_assert!(small.is_subset(&big));
    }

    #[test]
    fn compact_form_round_trips(l in "[a-z|]{1,8}", p in "[A-Za-z^_:]{1,20}", r in "[a-z|<>]{1,8}") {
        let c = PathContext::new(l, p, r);
        prop_assert_eq!(PathContext::from_compact(&c.to_compact()), Some(c.clone()));
        prop_assert_eq!(c.to_string().parse::<PathContext>(), Ok(c));
    }
}

#[test]
fn generated_methods_match_brute_force() {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..40 {
        let n = rng.random_range(1..6);
        let src = common::javagen::random_method(&mut rng, n);
        for m in parse_methods(&src).unwrap() {
            m.root.check_invariants().unwrap();
            let cfg = ExtractionConfig::default();
            assert_eq!(extract_contexts(&m, &cfg), common::brute_force_contexts(&m, &cfg), "{src}");
        }
    }
}

#[test]
fn cap_keeps_the_same_contexts_across_versions() {
    let a = &parse_methods("class A { int f(int x) { int y = x + 1; return foo(y, x * 2, bar(x)); } }").unwrap()[0];
    let cfg = ExtractionConfig { max_contexts_per_method: 5, seed: 3, ..ExtractionConfig::default() };
    let full = extract_contexts(a, &ExtractionConfig { max_contexts_per_method: usize::MAX, ..cfg.clone() });
    let capped = extract_contexts(a, &cfg);
    assert_eq!(capped.len(), 5);
    assert!(capped.is_subset(&full));
    assert_eq!(capped, extract_contexts(a, &cfg));
}
