//! Model files: a single JSON object.
//!
//! ```json
//! {"format_version":1,"model_id":8,"C":1.0,"bias":-0.12,
//!  "weights":[...],"vocabulary":["cúm",...],
//!  "indicator_slots":{"location_flag":4463,"multi_disease_flag":null}}
//! ```
//!
//! Weights are written with the shortest decimal form that parses back to the
//! same `f64`, so a save/load cycle is exact.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{LinearSvm, SvmError, SvmModel};
use crate::features::{FeatureModelSpec, Vocabulary};

pub const FORMAT_VERSION: i64 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct IndicatorSlots {
    location_flag: Option<usize>,
    multi_disease_flag: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    format_version: i64,
    model_id: u8,
    #[serde(rename = "C")]
    c: f64,
    bias: f64,
    weights: Vec<f64>,
    vocabulary: Vec<String>,
    indicator_slots: IndicatorSlots,
}

pub fn save_model(model: &SvmModel, mut sink: impl Write) -> Result<(), SvmError> {
    let file = ModelFile {
        format_version: FORMAT_VERSION,
        model_id: model.spec.model_id(),
        c: model.svm.c,
        bias: model.svm.bias,
        weights: model.svm.weights.clone(),
        vocabulary: model.vocab.tokens().to_vec(),
        indicator_slots: IndicatorSlots {
            location_flag: model.vocab.location_slot(),
            multi_disease_flag: model.vocab.multi_disease_slot(),
        },
    };
    serde_json::to_writer(&mut sink, &file)
        .map_err(|e| SvmError::CorruptModelFile(format!("cannot serialize model: {e}")))?;
    sink.write_all(b"\n")?;
    Ok(())
}

fn corrupt(msg: impl Into<String>) -> SvmError {
    SvmError::CorruptModelFile(msg.into())
}

pub fn load_model(mut source: impl Read) -> Result<SvmModel, SvmError> {
    let mut text = String::new();
    source
        .read_to_string(&mut text)
        .map_err(|e| corrupt(format!("unreadable: {e}")))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| corrupt(e.to_string()))?;
    let version = value
        .get("format_version")
        .ok_or_else(|| corrupt("missing format_version"))?;
    match version.as_i64() {
        Some(FORMAT_VERSION) => {}
        Some(other) => return Err(SvmError::UnsupportedFormatVersion(other)),
        None => return Err(corrupt("format_version is not an integer")),
    }
    let file: ModelFile = serde_json::from_value(value).map_err(|e| corrupt(e.to_string()))?;

    let spec = FeatureModelSpec::from_id(file.model_id).map_err(|e| corrupt(e.to_string()))?;
    if !(file.c.is_finite() && file.c > 0.0) {
        return Err(corrupt(format!("C must be positive, got {}", file.c)));
    }
    if !file.bias.is_finite() || file.weights.iter().any(|w| !w.is_finite()) {
        return Err(corrupt("non-finite weight"));
    }
    let vocab = Vocabulary::from_parts(file.vocabulary, spec.use_location(), spec.use_multi_disease())
        .ok_or_else(|| corrupt("duplicate vocabulary token"))?;
    if vocab.location_slot() != file.indicator_slots.location_flag
        || vocab.multi_disease_slot() != file.indicator_slots.multi_disease_flag
    {
        return Err(corrupt(format!(
            "indicator slots do not match the layout of model {}",
            spec.model_id()
        )));
    }
    if file.weights.len() != vocab.dimension() {
        return Err(corrupt(format!(
            "{} weights for dimension {}",
            file.weights.len(),
            vocab.dimension()
        )));
    }
    SvmModel::new(
        LinearSvm {
            weights: file.weights,
            bias: file.bias,
            c: file.c,
        },
        spec,
        vocab,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> SvmModel {
        let spec = FeatureModelSpec::from_id(8).unwrap();
        let vocab = Vocabulary::from_parts(vec!["cúm".into(), "sởi".into()], true, false).unwrap();
        SvmModel::new(
            LinearSvm {
                weights: vec![0.1 + 0.2, -1.0 / 3.0, 1e-300],
                bias: -0.0123456789012345,
                c: 1.0,
            },
            spec,
            vocab,
        )
        .unwrap()
    }

    fn saved(m: &SvmModel) -> String {
        let mut out = Vec::new();
        save_model(m, &mut out).unwrap();
        String::from_utf8(out).unwrap()
    }

    #[test]
    fn exact_round_trip() {
        let m = model();
        let loaded = load_model(saved(&m).as_bytes()).unwrap();
        assert_eq!(loaded, m);
        for (a, b) in loaded.svm.weights.iter().zip(&m.svm.weights) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn truncated_file_is_corrupt() {
        let text = saved(&model());
        let cut = &text[..text.len() / 2];
        assert!(matches!(load_model(cut.as_bytes()), Err(SvmError::CorruptModelFile(_))));
        assert!(matches!(load_model(&b""[..]), Err(SvmError::CorruptModelFile(_))));
    }

    #[test]
    fn future_version_rejected() {
        let text = saved(&model()).replace("\"format_version\":1", "\"format_version\":99");
        assert!(matches!(
            load_model(text.as_bytes()),
            Err(SvmError::UnsupportedFormatVersion(99))
        ));
    }

    #[test]
    fn inconsistent_files_rejected() {
        let text = saved(&model());
        for broken in [
            text.replace("\"model_id\":8", "\"model_id\":2"),
            text.replace("\"model_id\":8", "\"model_id\":15"),
            text.replace("\"C\":1.0", "\"C\":-1.0"),
            text.replace("\"sởi\"", "\"cúm\""),
            text.replace("\"location_flag\":2", "\"location_flag\":0"),
        ] {
            assert_ne!(broken, text);
            assert!(
                matches!(load_model(broken.as_bytes()), Err(SvmError::CorruptModelFile(_))),
                "{broken}"
            );
        }
    }
}
