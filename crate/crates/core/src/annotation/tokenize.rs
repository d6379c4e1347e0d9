use super::Token;

/// Word-level tokenizer.
///
/// Splits on whitespace, then peels leading and trailing non-alphanumeric
/// characters off each chunk as one-character tokens. Punctuation between
/// alphanumerics stays attached, so "you're" and "step-by-step" are single
/// tokens. Casing is preserved and offsets are character offsets.
pub fn tokenize(text: &str) -> Vec<Token> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if chars[i].is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        while i < chars.len() && !chars[i].is_whitespace() {
            i += 1;
        }
        split_chunk(&chars, start, i, &mut tokens);
    }
    tokens
}

fn split_chunk(chars: &[char], start: usize, end: usize, out: &mut Vec<Token>) {
    let chunk = &chars[start..end];
    let first = chunk.iter().position(|c| c.is_alphanumeric());
    let last = chunk.iter().rposition(|c| c.is_alphanumeric());
    let (core_start, core_end) = match (first, last) {
        (Some(a), Some(b)) => (start + a, start + b + 1),
        _ => (end, end),
    };
    for pos in start..core_start {
        out.push(make_token(chars, pos, pos + 1));
    }
    if core_start < core_end {
        out.push(make_token(chars, core_start, core_end));
    }
    for pos in core_end..end {
        out.push(make_token(chars, pos, pos + 1));
    }
}

fn make_token(chars: &[char], start: usize, end: usize) -> Token {
    Token { text: chars[start..end].iter().collect(), char_start: start, char_end: end }
}

/// True when the token has no alphanumeric character.
pub fn is_punctuation_token(token: &Token) -> bool {
    !token.text.chars().any(char::is_alphanumeric)
}
