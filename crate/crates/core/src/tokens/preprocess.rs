use std::collections::HashSet;
use std::sync::OnceLock;

const STOPWORDS: &str = include_str!("stopwords_en.txt");

/// The 50 reserved keywords of the Java language.
pub const JAVA_KEYWORDS: [&str; 50] = [
    "abstract",
    "assert",
    "boolean",
    "break",
    "byte",
    "case",
    "catch",
    "char",
    "class",
    "const",
    "continue",
    "default",
    "do",
    "double",
    "else",
    "enum",
    "extends",
    "final",
    "finally",
    "float",
    "for",
    "goto",
    "if",
    "implements",
    "import",
    "instanceof",
    "int",
    "interface",
    "long",
    "native",
    "new",
    "package",
    "private",
    "protected",
    "public",
    "return",
    "short",
    "static",
    "strictfp",
    "super",
    "switch",
    "synchronized",
    "this",
    "throw",
    "throws",
    "transient",
    "try",
    "void",
    "volatile",
    "while",
];

pub fn stopwords() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| STOPWORDS.lines().map(str::trim).filter(|l| !l.is_empty()).collect())
}

fn keywords() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| JAVA_KEYWORDS.iter().copied().collect())
}

/// Splits on non-alphanumeric characters and camel-case/underscore
/// boundaries, lowercases, then drops integers, single characters,
/// stopwords and Java keywords.
pub fn preprocess_tokens<S: AsRef<str>>(lines: &[S]) -> Vec<String> {
    let mut out = Vec::new();
    for line in lines {
        for word in line.as_ref().split(|c: char| !c.is_ascii_alphanumeric()) {
            if word.is_empty() || keywords().contains(word) {
                continue;
            }
            for part in split_camel(word) {
                if keep(&part) {
                    out.push(part);
                }
            }
        }
    }
    out
}

fn split_camel(word: &str) -> Vec<String> {
    let b = word.as_bytes();
    let mut parts = Vec::new();
    let mut start = 0;
    for i in 1..b.len() {
        let (prev, c) = (b[i - 1], b[i]);
        let next_lower = b.get(i + 1).is_some_and(u8::is_ascii_lowercase);
        let boundary = (prev.is_ascii_lowercase() || prev.is_ascii_digit()) && c.is_ascii_uppercase()
            || prev.is_ascii_uppercase() && c.is_ascii_uppercase() && next_lower;
        if boundary {
            parts.push(word[start..i].to_ascii_lowercase());
            start = i;
        }
    }
    parts.push(word[start..].to_ascii_lowercase());
    parts
}

fn keep(tok: &str) -> bool {
    tok.len() > 1 && !tok.bytes().all(|c| c.is_ascii_digit()) && !stopwords().contains(tok) && !keywords().contains(tok)
}
