use serde::Serialize;

use super::{Corpus, CorpusError, Label, MentionKind, Zone};
use crate::features::{location_flag, select_sentences, FeatureModelSpec};

/// Per-class counters over body disease sentences.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ClassStats {
    pub n_reports: usize,
    pub n_disease_sentences: usize,
    pub n_disease_sentences_with_preceding: usize,
    pub n_disease_sentences_with_following: usize,
    pub n_disease_sentences_with_both: usize,
    /// Reports whose widest (±1 sentence) selection contains a location.
    pub n_reports_with_location_in_selected: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CorpusStats {
    pub relevant: ClassStats,
    pub non_relevant: ClassStats,
}

pub fn corpus_stats(corpus: &Corpus) -> Result<CorpusStats, CorpusError> {
    corpus.require_labels()?;
    let widest = FeatureModelSpec::from_id(5).expect("model 5 exists");
    let mut stats = CorpusStats::default();
    for doc in &corpus.documents {
        let class = match doc.label {
            Label::Relevant => &mut stats.relevant,
            _ => &mut stats.non_relevant,
        };
        class.n_reports += 1;

        let n = doc.body_sentences.len();
        let mut disease_sentences: Vec<usize> = doc
            .mentions_in(Zone::Body)
            .filter(|m| m.kind == MentionKind::Disease)
            .map(|m| m.sentence_index)
            .collect();
        disease_sentences.dedup();
        for i in disease_sentences {
            let preceding = i > 0;
            let following = i + 1 < n;
            class.n_disease_sentences += 1;
            class.n_disease_sentences_with_preceding += usize::from(preceding);
            class.n_disease_sentences_with_following += usize::from(following);
            class.n_disease_sentences_with_both += usize::from(preceding && following);
        }

        if location_flag(doc, &select_sentences(doc, &widest)) {
            class.n_reports_with_location_in_selected += 1;
        }
    }
    Ok(stats)
}
