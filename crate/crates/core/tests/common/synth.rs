//! Synthetic labeled corpora with planted signal.

use commitvec::ast::PathContext;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

pub fn noise_context(rng: &mut impl Rng) -> PathContext {
    PathContext::new(
        format!("t{}", rng.random_range(0..60)),
        format!("NameExpr^P{}_NameExpr", rng.random_range(0..30)),
        format!("t{}", rng.random_range(0..60)),
    )
}

pub fn planted_context() -> PathContext {
    PathContext::new("planted", "Planted^Path_Here", "signal")
}

/// Balanced corpus; a commit is positive iff it contains the planted context.
pub fn planted_corpus(n: usize, seed: u64) -> (Vec<Vec<PathContext>>, Vec<bool>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels: Vec<bool> = (0..n).map(|i| i % 2 == 0).collect();
    labels.shuffle(&mut rng);
    let commits = labels
        .iter()
        .map(|&pos| {
            let mut c: Vec<PathContext> = (0..rng.random_range(8..20)).map(|_| noise_context(&mut rng)).collect();
            if pos {
                c.push(planted_context());
            }
            c
        })
        .collect();
    (commits, labels)
}

/// Token sequences; positive iff the planted token occurs.
pub fn planted_tokens(n: usize, seed: u64) -> (Vec<Vec<String>>, Vec<bool>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels: Vec<bool> = (0..n).map(|i| i % 2 == 0).collect();
    labels.shuffle(&mut rng);
    let seqs = labels
        .iter()
        .map(|&pos| {
            let mut s: Vec<String> =
                (0..rng.random_range(8..20)).map(|_| format!("w{}", rng.random_range(0..60))).collect();
            if pos {
                let at = rng.random_range(0..=s.len());
                s.insert(at, "planted".into());
            }
            s
        })
        .collect();
    (seqs, labels)
}

pub const SIGNAL_POOL: usize = 100;

/// Context `j` of the signal pool belonging to class `c`.
pub fn signal_context(c: usize, j: usize) -> PathContext {
    PathContext::new(format!("c{c}s{j}"), format!("MethodCallExpr^S{}_NameExpr", j % 7), format!("c{c}r{j}"))
}

fn signal_commit(rng: &mut impl Rng, class: usize, signals: usize) -> Vec<PathContext> {
    let mut c: Vec<PathContext> = (0..12).map(|_| noise_context(rng)).collect();
    for _ in 0..signals {
        c.push(signal_context(class, rng.random_range(0..SIGNAL_POOL)));
    }
    c
}

/// Six-way corpus: class `c` commits carry three contexts from pool `c`.
pub fn pretext_corpus(n: usize, seed: u64) -> (Vec<Vec<PathContext>>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels: Vec<usize> = (0..n).map(|i| i % 6).collect();
    let commits = labels.iter().map(|&c| signal_commit(&mut rng, c, 3)).collect();
    (commits, labels)
}

/// Binary corpus sharing the pretext pools: positives carry one context from
/// pool 0, negatives one from pool 3.
pub fn target_corpus(n: usize, seed: u64) -> (Vec<Vec<PathContext>>, Vec<bool>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels: Vec<bool> = (0..n).map(|i| i % 2 == 0).collect();
    labels.shuffle(&mut rng);
    let commits = labels.iter().map(|&pos| signal_commit(&mut rng, if pos { 0 } else { 3 }, 1)).collect();
    (commits, labels)
}
