//! The fourteen feature models: which sentences of a report are kept, which
//! binary indicators are appended, and how a report becomes a sparse binary
//! vector.
//!
//! Model 1 uses the whole report. Models 2–5 keep only body sentences that
//! contain a disease mention, optionally widened by the preceding and/or
//! following sentence. Models 6–8 add a location indicator, 9–11 add the title
//! tokens, and 12–14 add a multiple-disease indicator.

use std::collections::{BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{normalize, AnnotatedDocument, MentionKind, Zone};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FeatureError {
    #[error("invalid feature model: {0}")]
    InvalidSpec(String),
    #[error("vocabulary layout does not match feature model {0}")]
    SpecMismatch(u8),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Window {
    SentenceOnly,
    PlusPreceding,
    PlusFollowing,
    PlusBoth,
}

impl Window {
    fn preceding(self) -> bool {
        matches!(self, Window::PlusPreceding | Window::PlusBoth)
    }

    fn following(self) -> bool {
        matches!(self, Window::PlusFollowing | Window::PlusBoth)
    }
}

/// One of the fourteen valid feature models. Only valid combinations can be
/// constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FeatureModelSpec {
    model_id: u8,
    raw_text: bool,
    window: Window,
    use_location: bool,
    use_title: bool,
    use_multi_disease: bool,
}

pub const MODEL_IDS: std::ops::RangeInclusive<u8> = 1..=14;

impl FeatureModelSpec {
    pub fn from_id(model_id: u8) -> Result<Self, FeatureError> {
        let (raw_text, window, tier) = match model_id {
            1 => (true, Window::SentenceOnly, 0),
            2 => (false, Window::SentenceOnly, 0),
            3..=14 => {
                let window = match (model_id - 3) % 3 {
                    0 => Window::PlusPreceding,
                    1 => Window::PlusFollowing,
                    _ => Window::PlusBoth,
                };
                (false, window, (model_id - 3) / 3)
            }
            _ => {
                return Err(FeatureError::InvalidSpec(format!(
                    "model id {model_id} is outside 1-14"
                )))
            }
        };
        Ok(FeatureModelSpec {
            model_id,
            raw_text,
            window,
            use_location: tier >= 1,
            use_title: tier >= 2,
            use_multi_disease: tier >= 3,
        })
    }

    /// Looks up the model with exactly these flags.
    pub fn from_flags(
        raw_text: bool,
        window: Window,
        use_location: bool,
        use_title: bool,
        use_multi_disease: bool,
    ) -> Result<Self, FeatureError> {
        MODEL_IDS
            .map(|id| Self::from_id(id).expect("valid id"))
            .find(|s| {
                s.raw_text == raw_text
                    && s.window == window
                    && s.use_location == use_location
                    && s.use_title == use_title
                    && s.use_multi_disease == use_multi_disease
            })
            .ok_or_else(|| {
                FeatureError::InvalidSpec(format!(
                    "no model has raw_text={raw_text}, window={window:?}, location={use_location}, \
                     title={use_title}, multi_disease={use_multi_disease}"
                ))
            })
    }

    pub fn all() -> impl Iterator<Item = FeatureModelSpec> {
        MODEL_IDS.map(|id| Self::from_id(id).expect("valid id"))
    }

    pub fn model_id(&self) -> u8 {
        self.model_id
    }

    pub fn raw_text(&self) -> bool {
        self.raw_text
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn use_location(&self) -> bool {
        self.use_location
    }

    pub fn use_title(&self) -> bool {
        self.use_title
    }

    pub fn use_multi_disease(&self) -> bool {
        self.use_multi_disease
    }

    pub fn description(&self) -> String {
        match self.model_id {
            1 => "Baseline (raw text)".to_owned(),
            2 => "Sentence containing disease name".to_owned(),
            3 => "(2) + the preceding sentence".to_owned(),
            4 => "(2) + the following sentence".to_owned(),
            5 => "(2) + preceding and following sentences".to_owned(),
            id @ 6..=8 => format!("({}) + location feature", id - 3),
            id @ 9..=11 => format!("({}) + title", id - 3),
            id => format!("({}) + multiple disease feature", id - 3),
        }
    }
}

/// Body sentence indices that feed the representation.
pub fn select_sentences(doc: &AnnotatedDocument, spec: &FeatureModelSpec) -> BTreeSet<usize> {
    let n = doc.body_sentences.len();
    if spec.raw_text {
        return (0..n).collect();
    }
    let mut selected = BTreeSet::new();
    for m in doc.mentions_in(Zone::Body) {
        if m.kind != MentionKind::Disease {
            continue;
        }
        let i = m.sentence_index;
        selected.insert(i);
        if spec.window.preceding() && i > 0 {
            selected.insert(i - 1);
        }
        if spec.window.following() && i + 1 < n {
            selected.insert(i + 1);
        }
    }
    selected
}

/// True iff some body location mention falls in a selected sentence.
pub fn location_flag(doc: &AnnotatedDocument, selected: &BTreeSet<usize>) -> bool {
    doc.mentions_in(Zone::Body)
        .any(|m| m.kind == MentionKind::Location && selected.contains(&m.sentence_index))
}

fn disease_key(surface: &str) -> String {
    normalize(surface).split_whitespace().collect::<Vec<_>>().join(" ")
}

/// True iff the report names at least two distinct diseases (title or body).
pub fn multi_disease_flag(doc: &AnnotatedDocument) -> bool {
    let names: HashSet<String> = doc
        .mentions
        .iter()
        .filter(|m| m.kind == MentionKind::Disease)
        .map(|m| disease_key(&m.surface))
        .collect();
    names.len() >= 2
}

/// Unigram set of a report under a model. Model 1 covers title and body.
pub fn extract_text(doc: &AnnotatedDocument, spec: &FeatureModelSpec) -> BTreeSet<String> {
    extract_with_selection(doc, spec, &select_sentences(doc, spec))
}

fn extract_with_selection(
    doc: &AnnotatedDocument,
    spec: &FeatureModelSpec,
    selected: &BTreeSet<usize>,
) -> BTreeSet<String> {
    let mut tokens: BTreeSet<String> = selected
        .iter()
        .flat_map(|&i| doc.body_sentences[i].tokens.iter().cloned())
        .collect();
    if spec.raw_text || spec.use_title {
        tokens.extend(doc.title_tokens().cloned());
    }
    tokens
}

/// Everything a model needs from one document, computed once and reused
/// across cross-validation folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extraction {
    pub tokens: BTreeSet<String>,
    pub location: bool,
    pub multi_disease: bool,
}

impl Extraction {
    pub fn of(doc: &AnnotatedDocument, spec: &FeatureModelSpec) -> Self {
        let selected = select_sentences(doc, spec);
        Extraction {
            tokens: extract_with_selection(doc, spec, &selected),
            location: spec.use_location && location_flag(doc, &selected),
            multi_disease: spec.use_multi_disease && multi_disease_flag(doc),
        }
    }
}

/// Sparse binary vector: the sorted set of active feature indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct FeatureVector {
    indices: Vec<usize>,
}

impl FeatureVector {
    pub fn from_indices(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        FeatureVector { indices }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Token → index map, with indicator slots appended after the tokens:
/// the location flag at `n_tokens` and the multi-disease flag right after it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
    location_slot: Option<usize>,
    multi_disease_slot: Option<usize>,
}

impl Vocabulary {
    /// Builds a vocabulary over the documents' tokens under `spec`.
    pub fn build<'a>(
        docs: impl IntoIterator<Item = &'a AnnotatedDocument>,
        spec: &FeatureModelSpec,
    ) -> Self {
        let mut all = BTreeSet::new();
        for doc in docs {
            all.extend(extract_text(doc, spec));
        }
        Self::from_tokens(all, spec)
    }

    pub fn from_extractions<'a>(
        extractions: impl IntoIterator<Item = &'a Extraction>,
        spec: &FeatureModelSpec,
    ) -> Self {
        let mut all: BTreeSet<&str> = BTreeSet::new();
        for e in extractions {
            all.extend(e.tokens.iter().map(String::as_str));
        }
        Self::from_tokens(all.into_iter().map(str::to_owned), spec)
    }

    /// `tokens` must be sorted and unique; they become indices `0..n`.
    fn from_tokens(tokens: impl IntoIterator<Item = String>, spec: &FeatureModelSpec) -> Self {
        let tokens: Vec<String> = tokens.into_iter().collect();
        Self::from_parts(tokens, spec.use_location, spec.use_multi_disease)
            .expect("sorted unique tokens")
    }

    /// Rebuilds a vocabulary from tokens in index order (e.g. from a model file).
    pub fn from_parts(
        tokens: Vec<String>,
        use_location: bool,
        use_multi_disease: bool,
    ) -> Option<Self> {
        let index: HashMap<String, usize> =
            tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        if index.len() != tokens.len() {
            return None;
        }
        let n = tokens.len();
        let location_slot = use_location.then_some(n);
        let multi_disease_slot = use_multi_disease.then_some(n + usize::from(use_location));
        Some(Vocabulary {
            tokens,
            index,
            location_slot,
            multi_disease_slot,
        })
    }

    pub fn n_tokens(&self) -> usize {
        self.tokens.len()
    }

    pub fn dimension(&self) -> usize {
        self.tokens.len()
            + usize::from(self.location_slot.is_some())
            + usize::from(self.multi_disease_slot.is_some())
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn get(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn location_slot(&self) -> Option<usize> {
        self.location_slot
    }

    pub fn multi_disease_slot(&self) -> Option<usize> {
        self.multi_disease_slot
    }

    pub fn matches(&self, spec: &FeatureModelSpec) -> bool {
        self.location_slot.is_some() == spec.use_location
            && self.multi_disease_slot.is_some() == spec.use_multi_disease
    }

    pub fn vectorize_extraction(&self, extraction: &Extraction) -> FeatureVector {
        let mut indices: Vec<usize> =
            extraction.tokens.iter().filter_map(|t| self.get(t)).collect();
        if let (true, Some(slot)) = (extraction.location, self.location_slot) {
            indices.push(slot);
        }
        if let (true, Some(slot)) = (extraction.multi_disease, self.multi_disease_slot) {
            indices.push(slot);
        }
        FeatureVector::from_indices(indices)
    }
}

pub fn vectorize(
    doc: &AnnotatedDocument,
    spec: &FeatureModelSpec,
    vocab: &Vocabulary,
) -> Result<FeatureVector, FeatureError> {
    if !vocab.matches(spec) {
        return Err(FeatureError::SpecMismatch(spec.model_id));
    }
    Ok(vocab.vectorize_extraction(&Extraction::of(doc, spec)))
}
