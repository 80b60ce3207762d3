//! Syllable-level unigram tokenizer.
//!
//! Text is NFC-normalized and lowercased, split on whitespace, and each piece
//! has leading and trailing punctuation removed. Interior punctuation is kept
//! so that names like `a/h1n1` or `vắc-xin` stay a single token. No stemming
//! and no stop-word filtering is applied.

use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

/// Lowercase + NFC, applied to tokens and to disease surface forms.
pub fn normalize(text: &str) -> String {
    let lowered = text.nfc().collect::<String>().to_lowercase();
    lowered.nfc().collect()
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || is_combining_mark(c)
}

pub fn tokenize(text: &str) -> Vec<String> {
    normalize(text)
        .split_whitespace()
        .map(|piece| piece.trim_matches(|c: char| !is_word_char(c)))
        .filter(|token| !token.is_empty())
        .map(str::to_owned)
        .collect()
}
