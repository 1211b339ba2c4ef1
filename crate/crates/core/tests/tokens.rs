use commitvec::tokens::{diff_lines, encode_sequence, preprocess_tokens, vectorize_bow, Vocabulary, OOV, PAD};
use proptest::prelude::*;

fn lines() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(prop::sample::select(vec!["a", "b", "c", "d", "int x = 1;"]).prop_map(String::from), 0..15)
}

proptest! {
    #[test]
    fn diff_is_an_edit_script(pre in lines(), post in lines()) {
        let (added, removed) = diff_lines(&pre.join("\n"), &post.join("\n"));
        // the kept lines are a common subsequence of the same length on both sides
        prop_assert_eq!(pre.len() - removed.len(), post.len() - added.len());
        prop_assert!(is_subsequence(&removed, &pre));
        prop_assert!(is_subsequence(&added, &post));
        if pre == post {
            prop_assert!(added.is_empty() && removed.is_empty());
        }
    }

    #[test]
    fn sequences_have_fixed_length(tokens in prop::collection::vec("[a-f]{1,3}", 0..30), max_len in 1usize..20) {
        let vocab = Vocabulary::build([tokens.iter().take(5).map(String::as_str)], 100).unwrap();
        let enc = encode_sequence(&tokens, &vocab, max_len);
        prop_assert_eq!(enc.len(), max_len);
        let pad = max_len.saturating_sub(tokens.len());
        prop_assert!(enc[..pad].iter().all(|&i| i == PAD));
        prop_assert!(enc[pad..].iter().all(|&i| i != PAD && i < vocab.len()));
    }

    #[test]
    fn bow_counts_known_tokens(tokens in prop::collection::vec("[a-f]{1,2}", 0..40)) {
        let vocab = Vocabulary::build([tokens.iter().map(String::as_str)], 8).unwrap();
        let bow = vectorize_bow(&tokens, &vocab);
        let known = tokens.iter().filter(|t| vocab.get(t).is_some()).count();
        prop_assert_eq!(bow.counts.iter().map(|&c| c as usize).sum::<usize>(), known);
        prop_assert_eq!(bow.counts[PAD], 0);
        prop_assert_eq!(bow.counts[OOV], 0);
    }

    #[test]
    fn vocab_file_round_trips(tokens in prop::collection::vec("[a-z]{1,6}", 1..50), cap in 2usize..20) {
        let vocab = Vocabulary::build([tokens.iter().map(String::as_str)], cap).unwrap();
        prop_assert!(vocab.len() <= cap);
        let mut buf = Vec::new();
        vocab.write(&mut buf).unwrap();
        let back = Vocabulary::read(buf.as_slice()).unwrap();
        prop_assert_eq!(back.fingerprint(), vocab.fingerprint());
    }

    #[test]
    fn preprocessing_output_is_clean(words in prop::collection::vec("[A-Za-z0-9_]{1,12}", 0..20)) {
        for t in preprocess_tokens(&[words.join(" ")]) {
            prop_assert!(t.len() > 1);
            prop_assert!(t.chars().all(|c| c.is_ascii_alphanumeric()));
            prop_assert!(!t.chars().all(|c| c.is_ascii_digit()));
            prop_assert_eq!(t.to_lowercase(), t);
        }
    }
}

fn is_subsequence(small: &[String], big: &[String]) -> bool {
    let mut it = big.iter();
    small.iter().all(|s| it.any(|b| b == s))
}
