use std::collections::HashMap;
use std::io::{BufRead, Write};

use thiserror::Error;

pub const PAD: usize = 0;
pub const OOV: usize = 1;
const PAD_TOKEN: &str = "<pad>";
const OOV_TOKEN: &str = "<unk>";

#[derive(Debug, Error)]
pub enum VocabError {
    #[error("vocabulary size cap must be at least 2, got {0}")]
    CapTooSmall(usize),
    #[error("vocabulary line {line}: {message}")]
    Format { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Token index with `0` reserved for padding and `1` for unknown tokens.
/// Real tokens follow in descending frequency, ties broken lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, usize>,
}

/// Token frequencies summed over documents.
pub fn count_tokens<I, D, S>(docs: I) -> HashMap<String, u64>
where
    I: IntoIterator<Item = D>,
    D: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut counts = HashMap::new();
    for doc in docs {
        for t in doc {
            *counts.entry(t.as_ref().to_string()).or_insert(0) += 1;
        }
    }
    counts
}

/// Adds `other` into `into`; used to combine partial counts.
pub fn merge_counts(into: &mut HashMap<String, u64>, other: HashMap<String, u64>) {
    for (t, c) in other {
        *into.entry(t).or_insert(0) += c;
    }
}

impl Vocabulary {
    /// Keeps the `cap - 2` most frequent tokens; `cap` counts the two
    /// reserved entries.
    pub fn from_counts(counts: HashMap<String, u64>, cap: usize) -> Result<Self, VocabError> {
        if cap < 2 {
            return Err(VocabError::CapTooSmall(cap));
        }
        let mut ranked: Vec<(String, u64)> = counts.into_iter().filter(|(_, c)| *c > 0).collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        ranked.truncate(cap - 2);
        let mut tokens = vec![PAD_TOKEN.to_string(), OOV_TOKEN.to_string()];
        let mut freq = vec![0, 0];
        for (t, c) in ranked {
            tokens.push(t);
            freq.push(c);
        }
        Ok(Self::from_parts(tokens, freq))
    }

    pub fn build<I, D, S>(docs: I, cap: usize) -> Result<Self, VocabError>
    where
        I: IntoIterator<Item = D>,
        D: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self::from_counts(count_tokens(docs), cap)
    }

    fn from_parts(tokens: Vec<String>, counts: Vec<u64>) -> Self {
        let index = tokens.iter().enumerate().skip(2).map(|(i, t)| (t.clone(), i)).collect();
        Self { tokens, counts, index }
    }

    /// Number of entries including the reserved ones.
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.len() <= 2
    }

    pub fn get(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    /// Index of `token`, or [`OOV`].
    pub fn lookup(&self, token: &str) -> usize {
        self.get(token).unwrap_or(OOV)
    }

    pub fn token(&self, index: usize) -> Option<&str> {
        self.tokens.get(index).map(String::as_str)
    }

    pub fn count(&self, index: usize) -> u64 {
        self.counts.get(index).copied().unwrap_or(0)
    }

    /// `(token, index, count)` for every real entry.
    pub fn entries(&self) -> impl Iterator<Item = (&str, usize, u64)> {
        self.tokens.iter().zip(&self.counts).enumerate().skip(2).map(|(i, (t, &c))| (t.as_str(), i, c))
    }

    /// `token<TAB>index<TAB>count` lines ordered by index, reserved entries
    /// included.
    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (i, (t, c)) in self.tokens.iter().zip(&self.counts).enumerate() {
            writeln!(out, "{t}\t{i}\t{c}")?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(input: R) -> Result<Self, VocabError> {
        let mut tokens = Vec::new();
        let mut counts = Vec::new();
        for (n, line) in input.lines().enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let err = |message: String| VocabError::Format { line: n + 1, message };
            let f: Vec<&str> = line.split('\t').collect();
            let [t, i, c] = f.as_slice() else {
                return Err(err(format!("expected 3 fields, got {}", f.len())));
            };
            let i: usize = i.parse().map_err(|_| err(format!("bad index {i:?}")))?;
            let c: u64 = c.parse().map_err(|_| err(format!("bad count {c:?}")))?;
            if i != tokens.len() {
                return Err(err(format!("index {i} out of sequence")));
            }
            tokens.push(t.to_string());
            counts.push(c);
        }
        if tokens.len() < 2 {
            return Err(VocabError::Format { line: tokens.len(), message: "missing reserved entries".into() });
        }
        Ok(Self::from_parts(tokens, counts))
    }

    /// Stable digest of the token list, used to detect a model being paired
    /// with the wrong vocabulary.
    pub fn fingerprint(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        for t in &self.tokens {
            h.update(t.as_bytes());
            h.update([0u8]);
        }
        hex::encode(h.finalize())
    }
}
