//! Annotated news documents: parsing, sentence structure, statistics and a
//! seeded synthetic generator.
//!
//! Corpus files are JSON Lines. Each line holds one record:
//!
//! ```json
//! {"id": "d1", "title": "<ner type=disease>Cúm A/H1N1</ner> lan rộng", "body": "...", "label": "relevant"}
//! ```
//!
//! `label` is optional (`"relevant"` or `"non-relevant"`); documents without
//! one are [`Label::Unlabeled`] and can only be used for prediction.

mod markup;
mod segment;
mod stats;
mod synth;
mod tokenize;

use std::collections::HashSet;
use std::fmt;
use std::io::{BufRead, Write};
use std::ops::Range;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use markup::TagMarkup;
pub use segment::{segment_protected, segment_sentences};
pub use stats::{corpus_stats, ClassStats, CorpusStats};
pub use synth::{generate_synthetic_corpus, SynthParams};
pub use tokenize::{normalize, tokenize};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("malformed tag at byte {offset}: {reason}")]
    MalformedTag { offset: usize, reason: String },
    #[error("record has no id")]
    MissingId,
    #[error("invalid label `{0}` (expected \"relevant\" or \"non-relevant\")")]
    InvalidLabel(String),
    #[error("duplicate document id `{0}`")]
    DuplicateId(String),
    #[error("document `{0}` has no label")]
    UnlabeledDocument(String),
    #[error("invalid generator parameter: {0}")]
    InvalidParam(String),
    #[error("document `{id}`, {zone}: {source}")]
    InDocument {
        id: String,
        zone: Zone,
        #[source]
        source: Box<CorpusError>,
    },
    #[error("line {line}: {source}")]
    AtLine {
        line: usize,
        #[source]
        source: Box<CorpusError>,
    },
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MentionKind {
    Disease,
    Location,
}

impl MentionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MentionKind::Disease => "disease",
            MentionKind::Location => "location",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Zone {
    Title,
    Body,
}

impl fmt::Display for Zone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Zone::Title => "title",
            Zone::Body => "body",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Label {
    Relevant,
    NonRelevant,
    Unlabeled,
}

impl Label {
    pub fn parse(label: Option<&str>) -> Result<Self, CorpusError> {
        match label {
            None => Ok(Label::Unlabeled),
            Some("relevant") => Ok(Label::Relevant),
            Some("non-relevant") => Ok(Label::NonRelevant),
            Some(other) => Err(CorpusError::InvalidLabel(other.to_owned())),
        }
    }

    pub fn as_str(self) -> Option<&'static str> {
        match self {
            Label::Relevant => Some("relevant"),
            Label::NonRelevant => Some("non-relevant"),
            Label::Unlabeled => None,
        }
    }

    pub fn is_relevant(self) -> bool {
        self == Label::Relevant
    }
}

/// A tagged entity. Offsets are `char` offsets into the tag-stripped text of
/// its zone and cover the surface without any padding whitespace.
#[derive(Debug, Clone, PartialEq)]
pub struct Mention {
    pub kind: MentionKind,
    pub surface: String,
    pub char_start: usize,
    pub char_end: usize,
    pub zone: Zone,
    pub sentence_index: usize,
    pub markup: TagMarkup,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub index: usize,
    pub char_start: usize,
    pub char_end: usize,
    pub tokens: Vec<String>,
}

/// One corpus line as stored on disk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawRecord {
    #[serde(default)]
    pub id: Option<String>,
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub body: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatedDocument {
    pub id: String,
    pub title_raw: String,
    pub body_raw: String,
    pub title_text: String,
    pub body_text: String,
    pub title_sentences: Vec<Sentence>,
    pub body_sentences: Vec<Sentence>,
    /// Title mentions first, then body mentions, each sorted by offset.
    pub mentions: Vec<Mention>,
    pub label: Label,
}

fn char_slice(text: &str, range: Range<usize>) -> &str {
    let mut indices = text.char_indices().map(|(b, _)| b).chain(std::iter::once(text.len()));
    let start = indices.nth(range.start).unwrap_or(text.len());
    let end = if range.end == range.start {
        start
    } else {
        indices.nth(range.end - range.start - 1).unwrap_or(text.len())
    };
    &text[start..end]
}

fn sentence_of(sentences: &[Sentence], start: usize) -> usize {
    sentences
        .iter()
        .position(|s| s.char_start <= start && start < s.char_end)
        .expect("mention lies inside a sentence")
}

fn build_zone(
    id: &str,
    zone: Zone,
    raw: &str,
) -> Result<(String, Vec<Sentence>, Vec<Mention>), CorpusError> {
    let stripped = markup::strip_tags(raw).map_err(|e| CorpusError::InDocument {
        id: id.to_owned(),
        zone,
        source: Box::new(e),
    })?;
    let sentences = match zone {
        Zone::Title => segment::single_sentence(&stripped.plain),
        Zone::Body => {
            let protected: Vec<Range<usize>> =
                stripped.spans.iter().map(|s| s.start..s.end).collect();
            segment_protected(&stripped.plain, &protected)
        }
    };
    let mentions = stripped
        .spans
        .into_iter()
        .map(|span| Mention {
            kind: span.kind,
            surface: span.surface,
            char_start: span.start,
            char_end: span.end,
            zone,
            sentence_index: sentence_of(&sentences, span.start),
            markup: span.markup,
        })
        .collect();
    Ok((stripped.plain, sentences, mentions))
}

pub fn parse_document(record: &RawRecord) -> Result<AnnotatedDocument, CorpusError> {
    let id = match record.id.as_deref() {
        Some(id) if !id.is_empty() => id.to_owned(),
        _ => return Err(CorpusError::MissingId),
    };
    let label = Label::parse(record.label.as_deref())?;
    let (title_text, title_sentences, mut mentions) = build_zone(&id, Zone::Title, &record.title)?;
    let (body_text, body_sentences, body_mentions) = build_zone(&id, Zone::Body, &record.body)?;
    mentions.extend(body_mentions);
    Ok(AnnotatedDocument {
        id,
        title_raw: record.title.clone(),
        body_raw: record.body.clone(),
        title_text,
        body_text,
        title_sentences,
        body_sentences,
        mentions,
        label,
    })
}

impl AnnotatedDocument {
    pub fn zone_text(&self, zone: Zone) -> &str {
        match zone {
            Zone::Title => &self.title_text,
            Zone::Body => &self.body_text,
        }
    }

    pub fn sentences(&self, zone: Zone) -> &[Sentence] {
        match zone {
            Zone::Title => &self.title_sentences,
            Zone::Body => &self.body_sentences,
        }
    }

    pub fn sentence_text(&self, zone: Zone, index: usize) -> &str {
        let s = &self.sentences(zone)[index];
        char_slice(self.zone_text(zone), s.char_start..s.char_end)
    }

    pub fn mentions_in(&self, zone: Zone) -> impl Iterator<Item = &Mention> {
        self.mentions.iter().filter(move |m| m.zone == zone)
    }

    pub fn title_tokens(&self) -> impl Iterator<Item = &String> {
        self.title_sentences.iter().flat_map(|s| s.tokens.iter())
    }

    /// Rebuilds the tagged text of a zone from the plain text and mentions.
    pub fn to_tagged(&self, zone: Zone) -> String {
        let mut spans: Vec<&Mention> = self.mentions_in(zone).collect();
        spans.sort_by_key(|m| m.char_start);
        markup::insert_tags(
            self.zone_text(zone),
            spans.into_iter().map(|m| (m.char_start, m.char_end, &m.markup)),
        )
    }

    pub fn to_record(&self) -> RawRecord {
        RawRecord {
            id: Some(self.id.clone()),
            title: self.to_tagged(Zone::Title),
            body: self.to_tagged(Zone::Body),
            label: self.label.as_str().map(str::to_owned),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    pub documents: Vec<AnnotatedDocument>,
}

impl Corpus {
    pub fn new(documents: Vec<AnnotatedDocument>) -> Result<Self, CorpusError> {
        let mut seen = HashSet::new();
        for doc in &documents {
            if !seen.insert(doc.id.as_str()) {
                return Err(CorpusError::DuplicateId(doc.id.clone()));
            }
        }
        Ok(Corpus { documents })
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn read_jsonl(reader: impl BufRead) -> Result<Self, CorpusError> {
        let mut documents = Vec::new();
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let at_line = |e: CorpusError| CorpusError::AtLine {
                line: n + 1,
                source: Box::new(e),
            };
            let record: RawRecord = serde_json::from_str(&line).map_err(|e| at_line(e.into()))?;
            documents.push(parse_document(&record).map_err(at_line)?);
        }
        Corpus::new(documents)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CorpusError> {
        let file = std::fs::File::open(path)?;
        Corpus::read_jsonl(std::io::BufReader::new(file))
    }

    pub fn write_jsonl(&self, mut writer: impl Write) -> Result<(), CorpusError> {
        for doc in &self.documents {
            serde_json::to_writer(&mut writer, &doc.to_record())?;
            writer.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn labels(&self) -> Vec<Label> {
        self.documents.iter().map(|d| d.label).collect()
    }

    pub fn require_labels(&self) -> Result<(), CorpusError> {
        match self.documents.iter().find(|d| d.label == Label::Unlabeled) {
            Some(doc) => Err(CorpusError::UnlabeledDocument(doc.id.clone())),
            None => Ok(()),
        }
    }
}
