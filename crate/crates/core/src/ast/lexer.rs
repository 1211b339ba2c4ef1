//! Java tokenizer. Comments and whitespace are dropped here, which is what
//! makes comment-only edits invisible to everything downstream.

use super::ParseError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokKind {
    Ident,
    Int,
    Float,
    Str,
    Char,
    TextBlock,
    Punct,
    Eof,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Tok<'a> {
    pub kind: TokKind,
    pub text: &'a str,
    pub start: usize,
    pub end: usize,
}

// Longest first. `>` is always emitted alone so that nested generics such as
// `List<List<T>>` close correctly; the expression parser re-joins adjacent `>`.
const PUNCT: &[&str] = &[
    "<<=", "...", "->", "::", "++", "--", "&&", "||", "==", "!=", "<=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=",
    "<<", "(", ")", "{", "}", "[", "]", ";", ",", ".", "@", "=", ">", "<", "!", "~", "?", ":", "+", "-", "*", "/", "&",
    "|", "^", "%",
];

pub fn tokenize(src: &str) -> Result<Vec<Tok<'_>>, ParseError> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if src[i..].starts_with("//") {
            i = src[i..].find('\n').map_or(bytes.len(), |p| i + p);
            continue;
        }
        if src[i..].starts_with("/*") {
            let close = src[i + 2..].find("*/").ok_or_else(|| ParseError::new(i, "unterminated block comment"))?;
            i = i + 2 + close + 2;
            continue;
        }
        let start = i;
        let kind = if src[i..].starts_with("\"\"\"") {
            let close = src[i + 3..].find("\"\"\"").ok_or_else(|| ParseError::new(i, "unterminated text block"))?;
            i = i + 3 + close + 3;
            TokKind::TextBlock
        } else if c == b'"' || c == b'\'' {
            i = scan_quoted(bytes, i, c)?;
            if c == b'"' {
                TokKind::Str
            } else {
                TokKind::Char
            }
        } else if c.is_ascii_digit() || (c == b'.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            let (end, float) = scan_number(bytes, i);
            i = end;
            if float {
                TokKind::Float
            } else {
                TokKind::Int
            }
        } else if is_ident_start(src, i) {
            while i < bytes.len() && is_ident_part(src, i) {
                i += src[i..].chars().next().map_or(1, char::len_utf8);
            }
            TokKind::Ident
        } else if let Some(p) = PUNCT.iter().find(|p| src[i..].starts_with(**p)) {
            i += p.len();
            TokKind::Punct
        } else {
            return Err(ParseError::new(i, format!("unexpected character {:?}", &src[i..].chars().next().unwrap())));
        };
        toks.push(Tok { kind, text: &src[start..i], start, end: i });
    }
    toks.push(Tok { kind: TokKind::Eof, text: "", start: bytes.len(), end: bytes.len() });
    Ok(toks)
}

fn is_ident_start(src: &str, i: usize) -> bool {
    src[i..].chars().next().is_some_and(|c| c.is_alphabetic() || c == '_' || c == '$')
}

fn is_ident_part(src: &str, i: usize) -> bool {
    src[i..].chars().next().is_some_and(|c| c.is_alphanumeric() || c == '_' || c == '$')
}

fn scan_quoted(bytes: &[u8], start: usize, quote: u8) -> Result<usize, ParseError> {
    let mut i = start + 1;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => i += 2,
            b'\n' => break,
            b if b == quote => return Ok(i + 1),
            _ => i += 1,
        }
    }
    Err(ParseError::new(start, "unterminated literal"))
}

fn scan_number(bytes: &[u8], start: usize) -> (usize, bool) {
    let mut i = start;
    let mut float = false;
    if bytes[i] == b'0' && matches!(bytes.get(i + 1), Some(b'x' | b'X' | b'b' | b'B')) {
        i += 2;
        while i < bytes.len() && (bytes[i].is_ascii_hexdigit() || bytes[i] == b'_') {
            i += 1;
        }
    } else {
        while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'_') {
            i += 1;
        }
        if i < bytes.len()
            && bytes[i] == b'.'
            && bytes
                .get(i + 1)
                .is_none_or(|b| !b.is_ascii_alphabetic() || matches!(b, b'e' | b'E' | b'f' | b'F' | b'd' | b'D'))
        {
            // `1.` `1.5` `1.e3`, but not `1.toString`
            float = true;
            i += 1;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'_') {
                i += 1;
            }
        }
        if i < bytes.len() && matches!(bytes[i], b'e' | b'E') {
            let mut j = i + 1;
            if j < bytes.len() && matches!(bytes[j], b'+' | b'-') {
                j += 1;
            }
            if j < bytes.len() && bytes[j].is_ascii_digit() {
                float = true;
                i = j;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
        }
    }
    if i < bytes.len() {
        match bytes[i] {
            b'l' | b'L' => i += 1,
            b'f' | b'F' | b'd' | b'D' => {
                float = true;
                i += 1;
            }
            _ => {}
        }
    }
    (i, float)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<(TokKind, &str)> {
        tokenize(src).unwrap().into_iter().map(|t| (t.kind, t.text)).collect()
    }

    #[test]
    fn comments_vanish() {
        let a = kinds("int x = 1; // trailing\n/* block */ y++;");
        let b = kinds("int x = 1;\ny++;");
        let strip = |v: Vec<(TokKind, &str)>| v.into_iter().map(|(k, t)| (k, t.to_string())).collect::<Vec<_>>();
        assert_eq!(strip(a), strip(b));
    }

    #[test]
    fn numbers() {
        let k = kinds("0x1F 10L 1.5f .5 3e10 1_000 2.");
        let expected = [
            TokKind::Int,
            TokKind::Int,
            TokKind::Float,
            TokKind::Float,
            TokKind::Float,
            TokKind::Int,
            TokKind::Float,
            TokKind::Eof,
        ];
        assert_eq!(k.iter().map(|p| p.0).collect::<Vec<_>>(), expected);
    }

    #[test]
    fn generics_close_one_at_a_time() {
        let k = kinds("a >>= b");
        assert_eq!(k.iter().map(|p| p.1).collect::<Vec<_>>(), vec!["a", ">", ">", "=", "b", ""]);
    }

    #[test]
    fn strings_with_escapes() {
        let k = kinds(r#"s = "a\"b"; c = '\'';"#);
        assert_eq!(k[2], (TokKind::Str, r#""a\"b""#));
        assert_eq!(k[6], (TokKind::Char, r"'\''"));
    }

    #[test]
    fn unterminated_comment_reports_offset() {
        let err = tokenize("int a; /* oops").unwrap_err();
        assert_eq!(err.offset, 7);
    }
}
