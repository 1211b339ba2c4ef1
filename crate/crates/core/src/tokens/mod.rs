//! Token-based representation: changed lines, token preprocessing,
//! vocabularies, bag-of-words vectors and padded index sequences.

mod diff;
mod preprocess;
mod vocab;

use serde::{Deserialize, Serialize};

pub use diff::diff_lines;
pub use preprocess::{preprocess_tokens, stopwords, JAVA_KEYWORDS};
pub use vocab::{count_tokens, merge_counts, VocabError, Vocabulary, OOV, PAD};

use crate::commit::CommitInput;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenSequence {
    pub commit_id: String,
    pub tokens: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BowVector {
    pub counts: Vec<u32>,
}

/// Added lines of every Java file followed by the removed lines, in file
/// order, preprocessed into one token stream.
pub fn commit_tokens(commit: &CommitInput) -> TokenSequence {
    let mut added = Vec::new();
    let mut removed = Vec::new();
    for change in commit.changes.iter().filter(|c| c.is_java()) {
        let (a, r) = diff_lines(change.pre_text.as_deref().unwrap_or(""), change.post_text.as_deref().unwrap_or(""));
        added.extend(a);
        removed.extend(r);
    }
    added.extend(removed);
    TokenSequence { commit_id: commit.commit_id.clone(), tokens: preprocess_tokens(&added) }
}

/// Occurrence counts per vocabulary index; unknown tokens are ignored.
pub fn vectorize_bow<S: AsRef<str>>(tokens: &[S], vocab: &Vocabulary) -> BowVector {
    let mut counts = vec![0u32; vocab.len()];
    for t in tokens {
        if let Some(i) = vocab.get(t.as_ref()) {
            counts[i] += 1;
        }
    }
    BowVector { counts }
}

/// Keeps the first `max_len` tokens and left-pads with [`PAD`]; unknown
/// tokens map to [`OOV`].
pub fn encode_sequence<S: AsRef<str>>(tokens: &[S], vocab: &Vocabulary, max_len: usize) -> Vec<usize> {
    let kept = &tokens[..tokens.len().min(max_len)];
    let mut out = vec![PAD; max_len - kept.len()];
    out.extend(kept.iter().map(|t| vocab.lookup(t.as_ref())));
    out
}
