use std::fmt;

/// A single lowercased token. Never empty, never contains whitespace.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Token(String);

impl Token {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Token {
    fn from(s: &str) -> Self {
        Token(s.to_string())
    }
}

/// Lowercases, splits on Unicode whitespace, and emits every punctuation
/// character as its own token. A character counts as punctuation when it is
/// neither alphanumeric nor whitespace, so "48-yarder" becomes
/// ["48", "-", "yarder"]. Deterministic and total: empty input gives an
/// empty sequence.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for ch in text.chars().flat_map(|c| c.to_lowercase()) {
        if ch.is_whitespace() {
            flush(&mut current, &mut tokens);
        } else if ch.is_alphanumeric() {
            current.push(ch);
        } else {
            flush(&mut current, &mut tokens);
            tokens.push(Token(ch.to_string()));
        }
    }
    flush(&mut current, &mut tokens);
    tokens
}

fn flush(current: &mut String, tokens: &mut Vec<Token>) {
    if !current.is_empty() {
        tokens.push(Token(std::mem::take(current)));
    }
}

/// Joins tokens back into a single space-separated string.
pub fn detokenize(tokens: &[Token]) -> String {
    let mut out = String::new();
    for (i, t) in tokens.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(t.as_str());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn texts(tokens: &[Token]) -> Vec<&str> {
        tokens.iter().map(|t| t.as_str()).collect()
    }

    #[test]
    fn question_splits_into_words_and_punctuation() {
        let toks = tokenize("What position does Von Miller play?");
        assert_eq!(
            texts(&toks),
            ["what", "position", "does", "von", "miller", "play", "?"]
        );
    }

    #[test]
    fn empty_input_yields_empty_sequence() {
        assert!(tokenize("").is_empty());
        assert!(tokenize("   \t\n").is_empty());
    }

    #[test]
    fn hyphenated_compound_splits_on_punctuation() {
        assert_eq!(texts(&tokenize("48-yarder")), ["48", "-", "yarder"]);
    }

    #[test]
    fn tokens_are_nonempty_and_whitespace_free() {
        for t in tokenize("a  b\u{00a0}c's -- (ok)") {
            assert!(!t.as_str().is_empty());
            assert!(!t.as_str().chars().any(char::is_whitespace));
        }
    }

    proptest! {
        // Re-tokenizing the space-joined output reproduces the tokens.
        #[test]
        fn idempotent_on_joined_output(s in "\\PC{0,40}") {
            let once = tokenize(&s);
            let twice = tokenize(&detokenize(&once));
            prop_assert_eq!(once, twice);
        }
    }
}
