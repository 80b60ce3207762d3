//! Rule-based sentence segmentation over tag-stripped text.
//!
//! A boundary is placed after `.`, `!`, `?` or `…` when the terminator is
//! followed by whitespace and then an uppercase letter, a digit, or an opening
//! quote or parenthesis (or the end of the text). A newline always ends a
//! sentence. Boundaries that would fall strictly inside a protected span (an
//! entity mention) are dropped.
//!
//! All offsets are in `char`s, not bytes.

use std::ops::Range;

use super::tokenize::tokenize;
use super::Sentence;

const TERMINATORS: [char; 4] = ['.', '!', '?', '…'];
const OPENERS: [char; 9] = ['"', '\'', '“', '‘', '«', '(', '[', '{', '„'];

fn starts_sentence(c: char) -> bool {
    c.is_uppercase() || c.is_numeric() || OPENERS.contains(&c)
}

/// Cut positions: a sentence may end right before each returned offset.
fn candidate_cuts(chars: &[char]) -> Vec<usize> {
    let mut cuts = Vec::new();
    for (i, &c) in chars.iter().enumerate() {
        if c == '\n' {
            cuts.push(i);
        } else if TERMINATORS.contains(&c) {
            let next = i + 1;
            if next == chars.len() {
                cuts.push(next);
                continue;
            }
            if !chars[next].is_whitespace() {
                continue;
            }
            let after_ws = chars[next..]
                .iter()
                .position(|c| !c.is_whitespace())
                .map(|p| next + p);
            match after_ws {
                None => cuts.push(next),
                Some(k) if starts_sentence(chars[k]) => cuts.push(next),
                Some(_) => {}
            }
        }
    }
    cuts
}

pub fn segment_sentences(text: &str) -> Vec<Sentence> {
    segment_protected(text, &[])
}

/// Segments `text`, never splitting inside any of the `protected` char ranges.
pub fn segment_protected(text: &str, protected: &[Range<usize>]) -> Vec<Sentence> {
    let chars: Vec<char> = text.chars().collect();
    let cuts = candidate_cuts(&chars)
        .into_iter()
        .filter(|&cut| !protected.iter().any(|r| r.start < cut && cut < r.end))
        .chain(std::iter::once(chars.len()));

    let mut sentences = Vec::new();
    let mut start = 0;
    for cut in cuts {
        if cut < start {
            continue;
        }
        let segment = &chars[start..cut];
        if let Some(first) = segment.iter().position(|c| !c.is_whitespace()) {
            let last = segment.iter().rposition(|c| !c.is_whitespace()).unwrap();
            let (s, e) = (start + first, start + last + 1);
            let raw: String = chars[s..e].iter().collect();
            sentences.push(Sentence {
                index: sentences.len(),
                char_start: s,
                char_end: e,
                tokens: tokenize(&raw),
            });
        }
        start = cut;
    }
    sentences
}

/// Title zone: the whole trimmed title is one sentence.
pub(crate) fn single_sentence(text: &str) -> Vec<Sentence> {
    let chars: Vec<char> = text.chars().collect();
    match chars.iter().position(|c| !c.is_whitespace()) {
        None => Vec::new(),
        Some(first) => {
            let last = chars.iter().rposition(|c| !c.is_whitespace()).unwrap();
            let raw: String = chars[first..=last].iter().collect();
            vec![Sentence {
                index: 0,
                char_start: first,
                char_end: last + 1,
                tokens: tokenize(&raw),
            }]
        }
    }
}
