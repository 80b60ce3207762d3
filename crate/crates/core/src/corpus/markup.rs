//! Inline `<ner type=...>…</ner>` markup: stripping and re-insertion.
//!
//! The opening tag tolerates whitespace around `=` and before `>` (the
//! annotated corpus contains `<ner type = location>`), and the tag content may
//! be padded with whitespace. The exact opening tag text and the padding are
//! recorded so re-serialization is byte-identical.

use super::{CorpusError, MentionKind};

const OPEN_PREFIX: &str = "<ner";
const CLOSE_TAG: &str = "</ner>";

/// Original spelling of one tag, kept for lossless re-serialization.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TagMarkup {
    pub open_tag: String,
    /// Whitespace chars between the opening tag and the mention surface.
    pub lead: usize,
    /// Whitespace chars between the mention surface and `</ner>`.
    pub trail: usize,
}

impl TagMarkup {
    pub fn canonical(kind: MentionKind) -> Self {
        TagMarkup {
            open_tag: format!("<ner type={}>", kind.as_str()),
            lead: 0,
            trail: 0,
        }
    }
}

/// A tag found while stripping, in char offsets of the stripped text.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct RawSpan {
    pub kind: MentionKind,
    pub start: usize,
    pub end: usize,
    pub surface: String,
    pub markup: TagMarkup,
}

#[derive(Debug)]
pub(crate) struct Stripped {
    pub plain: String,
    pub spans: Vec<RawSpan>,
}

fn malformed(offset: usize, reason: impl Into<String>) -> CorpusError {
    CorpusError::MalformedTag {
        offset,
        reason: reason.into(),
    }
}

/// Parses the attribute part of an opening tag, e.g. ` type = location`.
fn parse_open_tag(inner: &str, offset: usize) -> Result<MentionKind, CorpusError> {
    if !inner.starts_with(char::is_whitespace) {
        return Err(malformed(offset, "expected whitespace after `<ner`"));
    }
    let rest = inner.trim_start();
    let rest = rest
        .strip_prefix("type")
        .ok_or_else(|| malformed(offset, "expected `type` attribute"))?;
    let rest = rest
        .trim_start()
        .strip_prefix('=')
        .ok_or_else(|| malformed(offset, "expected `=` after `type`"))?;
    match rest.trim() {
        "disease" => Ok(MentionKind::Disease),
        "location" => Ok(MentionKind::Location),
        other => Err(malformed(offset, format!("unknown entity type `{other}`"))),
    }
}

/// Strips tags from `text`, returning the plain text and one span per tag.
/// `offset` values in errors are byte offsets into `text`.
pub(crate) fn strip_tags(text: &str) -> Result<Stripped, CorpusError> {
    let mut plain = String::with_capacity(text.len());
    let mut plain_chars = 0usize;
    let mut spans = Vec::new();
    let mut pos = 0usize;

    while pos < text.len() {
        let rest = &text[pos..];
        let next_open = rest.find(OPEN_PREFIX);
        let next_close = rest.find(CLOSE_TAG);
        if let Some(close) = next_close {
            if next_open.is_none_or(|open| close < open) {
                return Err(malformed(pos + close, "closing tag without opening tag"));
            }
        }
        let Some(open) = next_open else {
            plain.push_str(rest);
            break;
        };

        let before = &rest[..open];
        plain.push_str(before);
        plain_chars += before.chars().count();

        let tag_start = pos + open;
        let gt = text[tag_start..]
            .find('>')
            .ok_or_else(|| malformed(tag_start, "unterminated opening tag"))?;
        let open_tag = &text[tag_start..=tag_start + gt];
        let kind = parse_open_tag(&open_tag[OPEN_PREFIX.len()..open_tag.len() - 1], tag_start)?;

        let content_start = tag_start + gt + 1;
        let close = text[content_start..]
            .find(CLOSE_TAG)
            .ok_or_else(|| malformed(tag_start, "unclosed tag"))?;
        let content = &text[content_start..content_start + close];
        if content.contains(OPEN_PREFIX) {
            return Err(malformed(tag_start, "nested tag"));
        }
        let surface = content.trim();
        if surface.is_empty() {
            return Err(malformed(tag_start, "empty mention"));
        }
        let lead = content[..content.len() - content.trim_start().len()].chars().count();
        let trail = content[content.trim_end().len()..].chars().count();
        let surface_chars = surface.chars().count();

        spans.push(RawSpan {
            kind,
            start: plain_chars + lead,
            end: plain_chars + lead + surface_chars,
            surface: surface.to_owned(),
            markup: TagMarkup {
                open_tag: open_tag.to_owned(),
                lead,
                trail,
            },
        });
        plain.push_str(content);
        plain_chars += content.chars().count();
        pos = content_start + close + CLOSE_TAG.len();
    }

    Ok(Stripped { plain, spans })
}

/// Re-inserts tags into `plain` at the given spans. Spans must be sorted and
/// non-overlapping (including their padding).
pub(crate) fn insert_tags<'a>(
    plain: &str,
    spans: impl IntoIterator<Item = (usize, usize, &'a TagMarkup)>,
) -> String {
    let mut out = String::with_capacity(plain.len() + 32);
    let mut chars = plain.chars().enumerate().peekable();
    for (start, end, markup) in spans {
        let tag_start = start - markup.lead;
        let tag_end = end + markup.trail;
        while let Some(&(i, c)) = chars.peek() {
            if i >= tag_start {
                break;
            }
            out.push(c);
            chars.next();
        }
        out.push_str(&markup.open_tag);
        while let Some(&(i, c)) = chars.peek() {
            if i >= tag_end {
                break;
            }
            out.push(c);
            chars.next();
        }
        out.push_str(CLOSE_TAG);
    }
    out.extend(chars.map(|(_, c)| c));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent scanner: walks chars, tracks an output counter by hand.
    fn oracle_spans(tagged: &str) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut count = 0;
        let mut in_tag = false;
        let mut mention_start = 0;
        let mut chars = tagged.chars().peekable();
        while let Some(c) = chars.next() {
            if c == '<' {
                let is_close = chars.peek() == Some(&'/');
                for d in chars.by_ref() {
                    if d == '>' {
                        break;
                    }
                }
                if is_close {
                    out.push((mention_start, count));
                    in_tag = false;
                } else {
                    mention_start = count;
                    in_tag = true;
                }
            } else {
                count += 1;
            }
        }
        assert!(!in_tag);
        out
    }

    #[test]
    fn offsets_match_independent_scanner() {
        let tagged = "A <ner type=disease>cúm</ner> B <ner type=location>Hà Nội</ner>.";
        let stripped = strip_tags(tagged).unwrap();
        assert_eq!(stripped.plain, "A cúm B Hà Nội.");
        let got: Vec<_> = stripped.spans.iter().map(|s| (s.start, s.end)).collect();
        assert_eq!(got, oracle_spans(tagged));
        assert_eq!(got, vec![(2, 5), (8, 14)]);
        assert_eq!(stripped.spans[0].kind, MentionKind::Disease);
        assert_eq!(stripped.spans[1].surface, "Hà Nội");
    }

    #[test]
    fn padded_tag_with_spaced_attribute() {
        let tagged = "huyện <ner type = location> Thạnh Phú </ner>.";
        let stripped = strip_tags(tagged).unwrap();
        assert_eq!(stripped.plain, "huyện  Thạnh Phú .");
        let span = &stripped.spans[0];
        assert_eq!(span.surface, "Thạnh Phú");
        assert_eq!((span.start, span.end), (7, 16));
        assert_eq!((span.markup.lead, span.markup.trail), (1, 1));
        let back = insert_tags(
            &stripped.plain,
            stripped.spans.iter().map(|s| (s.start, s.end, &s.markup)),
        );
        assert_eq!(back, tagged);
    }

    #[test]
    fn plain_angle_brackets_pass_through() {
        let stripped = strip_tags("a < b > c").unwrap();
        assert_eq!(stripped.plain, "a < b > c");
        assert!(stripped.spans.is_empty());
    }

    #[test]
    fn malformed_inputs() {
        let cases = [
            "<ner type=disease>cúm",
            "<ner type=virus>cúm</ner>",
            "<ner type=disease>a <ner type=location>b</ner></ner>",
            "cúm</ner>",
            "<ner type=disease>  </ner>",
            "<nertype=disease>x</ner>",
            "<ner kind=disease>x</ner>",
            "<ner type=disease",
            "<ner type=Disease>x</ner>",
        ];
        for case in cases {
            assert!(
                matches!(strip_tags(case), Err(CorpusError::MalformedTag { .. })),
                "{case:?} should be rejected"
            );
        }
    }
}
