use std::collections::BTreeSet;

use super::{AstNode, ExtractionConfig, MethodAst, PathContext};
use crate::util::keyed_hash;

pub const STR_TERMINAL: &str = "<STR>";
pub const NUM_TERMINAL: &str = "<NUM>";

/// Splits identifiers at camel-case and underscore boundaries, lowercases the
/// parts and joins them with `|`. Literals collapse to sentinels.
pub fn normalize_terminal(raw: &str) -> String {
    let first = raw.chars().next().unwrap_or(' ');
    if first == '"' || first == '\'' {
        return STR_TERMINAL.to_string();
    }
    if first.is_ascii_digit() || (first == '.' && raw.len() > 1) {
        return NUM_TERMINAL.to_string();
    }
    let parts = split_identifier(raw);
    if parts.is_empty() {
        raw.to_lowercase()
    } else {
        parts.join("|")
    }
}

pub(crate) fn split_identifier(raw: &str) -> Vec<String> {
    let mut parts = Vec::new();
    for word in raw.split(|c: char| !c.is_alphanumeric()) {
        let chars: Vec<char> = word.chars().collect();
        let mut cur = String::new();
        for (i, &c) in chars.iter().enumerate() {
            if i > 0 && !cur.is_empty() {
                let prev = chars[i - 1];
                let next_lower = chars.get(i + 1).is_some_and(|n| n.is_lowercase());
                let boundary = (prev.is_lowercase() || prev.is_ascii_digit()) && c.is_uppercase()
                    || prev.is_uppercase() && c.is_uppercase() && next_lower;
                if boundary {
                    parts.push(std::mem::take(&mut cur).to_lowercase());
                }
            }
            cur.push(c);
        }
        if !cur.is_empty() {
            parts.push(cur.to_lowercase());
        }
    }
    parts
}

struct Leaf<'a> {
    node: &'a AstNode,
    /// `(ancestor, index of the child taken)` from the root down.
    chain: Vec<(&'a AstNode, usize)>,
    terminal: String,
}

fn collect_leaves<'a>(node: &'a AstNode, chain: &mut Vec<(&'a AstNode, usize)>, out: &mut Vec<Leaf<'a>>) {
    if node.is_leaf() {
        out.push(Leaf {
            node,
            chain: chain.clone(),
            terminal: normalize_terminal(node.token.as_deref().unwrap_or("")),
        });
        return;
    }
    for (i, c) in node.children.iter().enumerate() {
        chain.push((node, i));
        collect_leaves(c, chain, out);
        chain.pop();
    }
}

/// Every terminal pair within the configured length and width limits, as a
/// set. Methods with more qualifying contexts than
/// `max_contexts_per_method` keep the ones with the smallest keyed hash,
/// which is a uniform sample for a random key and picks the same contexts
/// from two versions of a method.
pub fn extract_contexts(method: &MethodAst, cfg: &ExtractionConfig) -> BTreeSet<PathContext> {
    let mut leaves = Vec::new();
    collect_leaves(&method.root, &mut Vec::new(), &mut leaves);
    let mut out = BTreeSet::new();
    let mut path = String::new();
    for (i, a) in leaves.iter().enumerate() {
        for b in &leaves[i + 1..] {
            let d = a
                .chain
                .iter()
                .zip(&b.chain)
                .position(|(x, y)| x.1 != y.1)
                .expect("distinct leaves diverge below the root");
            let (lca, ia) = a.chain[d];
            let ib = b.chain[d].1;
            if ib - ia > cfg.max_path_width {
                continue;
            }
            let length = (a.chain.len() - d) + (b.chain.len() - d) + 1;
            if length > cfg.max_path_length {
                continue;
            }
            path.clear();
            path.push_str(&a.node.kind);
            for (n, _) in a.chain[d + 1..].iter().rev() {
                path.push('^');
                path.push_str(&n.kind);
            }
            path.push('^');
            path.push_str(&lca.kind);
            for (n, _) in &b.chain[d + 1..] {
                path.push('_');
                path.push_str(&n.kind);
            }
            path.push('_');
            path.push_str(&b.node.kind);
            out.insert(PathContext::new(a.terminal.clone(), path.clone(), b.terminal.clone()));
        }
    }
    if out.len() > cfg.max_contexts_per_method {
        let mut keyed: Vec<(u64, PathContext)> =
            out.into_iter().map(|c| (keyed_hash(cfg.seed, c.to_compact().as_bytes()), c)).collect();
        keyed.sort();
        keyed.truncate(cfg.max_contexts_per_method);
        out = keyed.into_iter().map(|(_, c)| c).collect();
    }
    out
}
