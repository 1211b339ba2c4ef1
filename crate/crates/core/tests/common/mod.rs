//! Generators and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

pub mod fixtures;
pub mod javagen;
pub mod synth;

use std::collections::BTreeSet;

use commitvec::ast::{normalize_terminal, AstNode, ExtractionConfig, MethodAst, PathContext};
use commitvec::util::keyed_hash;

struct Flat<'a> {
    node: &'a AstNode,
    parent: Option<usize>,
    /// Position among the parent's children.
    slot: usize,
    depth: usize,
}

fn flatten<'a>(node: &'a AstNode, parent: Option<usize>, slot: usize, depth: usize, out: &mut Vec<Flat<'a>>) {
    let me = out.len();
    out.push(Flat { node, parent, slot, depth });
    for (i, c) in node.children.iter().enumerate() {
        flatten(c, Some(me), i, depth + 1, out);
    }
}

/// All-pairs path enumeration over a parent-pointer table. For every pair of
/// leaves it walks both up to their common ancestor, then applies the length,
/// width and per-method cap rules.
pub fn brute_force_contexts(method: &MethodAst, cfg: &ExtractionConfig) -> BTreeSet<PathContext> {
    let mut t = Vec::new();
    flatten(&method.root, None, 0, 0, &mut t);
    let leaves: Vec<usize> = (0..t.len()).filter(|&i| t[i].node.children.is_empty()).collect();
    let mut out = BTreeSet::new();
    for (x, &a) in leaves.iter().enumerate() {
        for &b in &leaves[x + 1..] {
            let mut up = vec![a];
            let mut down = vec![b];
            let (mut u, mut v) = (a, b);
            while t[u].depth > t[v].depth {
                u = t[u].parent.unwrap();
                up.push(u);
            }
            while t[v].depth > t[u].depth {
                v = t[v].parent.unwrap();
                down.push(v);
            }
            while t[u].parent != t[v].parent {
                u = t[u].parent.unwrap();
                v = t[v].parent.unwrap();
                up.push(u);
                down.push(v);
            }
            let lca = t[u].parent.unwrap();
            let width = t[v].slot - t[u].slot;
            let length = up.len() + down.len() + 1;
            if width > cfg.max_path_width || length > cfg.max_path_length {
                continue;
            }
            let mut parts: Vec<&str> = up.iter().map(|&i| t[i].node.kind.as_str()).collect();
            parts.push(&t[lca].node.kind);
            let mut path = parts.join("^");
            for &i in down.iter().rev() {
                path.push('_');
                path.push_str(&t[i].node.kind);
            }
            let term = |i: usize| normalize_terminal(t[i].node.token.as_deref().unwrap());
            out.insert(PathContext::new(term(a), path, term(b)));
        }
    }
    if out.len() > cfg.max_contexts_per_method {
        let mut ranked: Vec<(u64, PathContext)> =
            out.into_iter().map(|c| (keyed_hash(cfg.seed, c.to_compact().as_bytes()), c)).collect();
        ranked.sort();
        out = ranked.into_iter().take(cfg.max_contexts_per_method).map(|(_, c)| c).collect();
    }
    out
}

/// Symmetric difference by linear scans.
pub fn naive_symmetric_difference(a: &[PathContext], b: &[PathContext]) -> BTreeSet<PathContext> {
    let mut out = BTreeSet::new();
    for x in a {
        if !b.iter().any(|y| y == x) {
            out.insert(x.clone());
        }
    }
    for y in b {
        if !a.iter().any(|x| x == y) {
            out.insert(y.clone());
        }
    }
    out
}

/// Confusion counts by enumerating every example.
pub fn confusion(y: &[bool], scores: &[f64], threshold: f64) -> (usize, usize, usize, usize) {
    let mut c = (0, 0, 0, 0);
    for i in 0..y.len() {
        let predicted = scores[i] >= threshold;
        if y[i] && predicted {
            c.0 += 1;
        } else if !y[i] && predicted {
            c.1 += 1;
        } else if !y[i] {
            c.2 += 1;
        } else {
            c.3 += 1;
        }
    }
    c
}

/// Average precision by counting, for every distinct threshold, the
/// examples at or above it.
pub fn brute_force_ap(y: &[bool], scores: &[f64]) -> Option<f64> {
    let positives = y.iter().filter(|&&v| v).count();
    if positives == 0 {
        return None;
    }
    let mut thresholds: Vec<f64> = scores.to_vec();
    thresholds.sort_by(|a, b| b.total_cmp(a));
    thresholds.dedup();
    let mut ap = 0.0;
    let mut prev_recall = 0.0;
    for t in thresholds {
        let above: Vec<usize> = (0..y.len()).filter(|&i| scores[i] >= t).collect();
        let tp = above.iter().filter(|&&i| y[i]).count();
        let recall = tp as f64 / positives as f64;
        let precision = tp as f64 / above.len() as f64;
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    Some(ap)
}
