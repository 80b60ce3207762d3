//! Relevance classification of NER-annotated news reports about disease
//! outbreaks.
//!
//! Documents carry inline `<ner type=disease>` / `<ner type=location>` tags.
//! Each of the fourteen feature models picks the sentences around disease
//! mentions (optionally adding the title, a location flag and a
//! multi-disease flag), turns them into binary unigram vectors, and a linear
//! soft-margin SVM separates relevant from non-relevant reports.
//! [`eval`] runs repeated stratified cross-validation over those models.

pub mod cli;
pub mod corpus;
pub mod eval;
pub mod features;
pub mod svm;
