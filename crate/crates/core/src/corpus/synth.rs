//! Seeded synthetic corpora with a controllable signal.
//!
//! Every generated report mentions at least one disease, so disease presence
//! alone never separates the classes. Relevant reports carry outbreak "signal"
//! words in the disease sentence (and, sometimes, the following sentence) with
//! probability `signal_strength`; non-relevant reports carry health-policy
//! distractor words instead. A location tag lands inside the ±1-sentence
//! window around the disease sentences with probability `location_correlation`
//! for relevant reports and a quarter of that for non-relevant ones.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{parse_document, AnnotatedDocument, Corpus, CorpusError, RawRecord};

pub(crate) const SIGNAL_WORDS: [&str; 12] = [
    "bùng", "phát", "tử", "vong", "nhiễm", "lây", "mắc", "ổ", "cách", "ly", "khẩn", "cấp",
];

pub(crate) const DISTRACTOR_WORDS: [&str; 12] = [
    "tiêm", "chủng", "vắc-xin", "dự", "ngừa", "chính", "sách", "giáo", "dục", "hội", "thảo",
    "tuyên",
];

const DISEASES: [&str; 16] = [
    "cúm A/H5N1",
    "cúm A/H1N1",
    "sởi",
    "sốt xuất huyết",
    "tay chân miệng",
    "tả",
    "dại",
    "thương hàn",
    "viêm não Nhật Bản",
    "bạch hầu",
    "ho gà",
    "quai bị",
    "thủy đậu",
    "lao",
    "sốt rét",
    "Zika",
];

const LOCATIONS: [&str; 24] = [
    "Hà Nội",
    "Sóc Trăng",
    "Kiên Giang",
    "Bến Tre",
    "Thạnh Phú",
    "Đà Nẵng",
    "Cần Thơ",
    "Nghệ An",
    "Thanh Hóa",
    "Quảng Nam",
    "Huế",
    "Hải Phòng",
    "Đồng Tháp",
    "An Giang",
    "Long An",
    "Tây Ninh",
    "Bình Dương",
    "Lào Cai",
    "Sơn La",
    "Điện Biên",
    "Gia Lai",
    "Đắk Lắk",
    "Cà Mau",
    "Bạc Liêu",
];

const ONSETS: [&str; 21] = [
    "b", "c", "ch", "d", "đ", "g", "h", "kh", "l", "m", "n", "ng", "nh", "ph", "qu", "s", "t",
    "th", "tr", "v", "x",
];

const RHYMES: [&str; 24] = [
    "a", "á", "à", "an", "anh", "ao", "âm", "ân", "ây", "e", "ê", "i", "im", "in", "o", "ô", "ơ",
    "ông", "u", "ư", "ương", "uyên", "ai", "ói",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SynthParams {
    pub n_relevant: usize,
    pub n_irrelevant: usize,
    /// Probability that a report carries its class-specific cue words.
    pub signal_strength: f64,
    /// Probability of a location inside the disease window (relevant class).
    pub location_correlation: f64,
    pub filler_vocab: usize,
    pub n_diseases: usize,
    pub n_locations: usize,
    pub seed: u64,
}

impl SynthParams {
    pub fn new(n_relevant: usize, n_irrelevant: usize, p: f64, q: f64, seed: u64) -> Self {
        SynthParams {
            n_relevant,
            n_irrelevant,
            signal_strength: p,
            location_correlation: q,
            filler_vocab: 300,
            n_diseases: 12,
            n_locations: 20,
            seed,
        }
    }

    fn validate(&self) -> Result<(), CorpusError> {
        let invalid = |msg: String| Err(CorpusError::InvalidParam(msg));
        for (name, v) in [
            ("signal_strength", self.signal_strength),
            ("location_correlation", self.location_correlation),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return invalid(format!("{name} must lie in [0, 1], got {v}"));
            }
        }
        let max_filler = filler_lexicon().len();
        if self.filler_vocab == 0 || self.filler_vocab > max_filler {
            return invalid(format!("filler_vocab must lie in 1..={max_filler}"));
        }
        if self.n_diseases == 0 || self.n_diseases > DISEASES.len() {
            return invalid(format!("n_diseases must lie in 1..={}", DISEASES.len()));
        }
        if self.n_locations == 0 || self.n_locations > LOCATIONS.len() {
            return invalid(format!("n_locations must lie in 1..={}", LOCATIONS.len()));
        }
        Ok(())
    }
}

/// Onset+rhyme syllables that collide with no cue word and no entity token.
pub(crate) fn filler_lexicon() -> Vec<String> {
    let reserved: Vec<String> = SIGNAL_WORDS
        .iter()
        .chain(DISTRACTOR_WORDS.iter())
        .chain(DISEASES.iter())
        .chain(LOCATIONS.iter())
        .flat_map(|w| super::tokenize(w))
        .collect();
    ONSETS
        .iter()
        .flat_map(|o| RHYMES.iter().map(move |r| format!("{o}{r}")))
        .filter(|w| !reserved.contains(w))
        .collect()
}

struct Lexicon {
    filler: Vec<String>,
    diseases: Vec<&'static str>,
    locations: Vec<&'static str>,
}

fn capitalize(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn tag(kind: &str, surface: &str) -> String {
    format!("<ner type={kind}>{surface}</ner>")
}

/// Inserts `piece` at a random position other than the sentence start.
fn insert_word(rng: &mut ChaCha8Rng, sentence: &mut Vec<String>, piece: String) {
    let at = rng.random_range(1..=sentence.len());
    sentence.insert(at, piece);
}

fn filler_sentence(rng: &mut ChaCha8Rng, lex: &Lexicon, min: usize, max: usize) -> Vec<String> {
    let len = rng.random_range(min..=max);
    (0..len)
        .map(|_| lex.filler.choose(rng).expect("nonempty filler").clone())
        .collect()
}

fn generate_record(
    rng: &mut ChaCha8Rng,
    lex: &Lexicon,
    params: &SynthParams,
    id: String,
    relevant: bool,
) -> RawRecord {
    let n_sentences = rng.random_range(3..=8);
    let mut sentences: Vec<Vec<String>> = (0..n_sentences)
        .map(|_| filler_sentence(rng, lex, 5, 12))
        .collect();

    let primary = rng.random_range(0..n_sentences);
    let mut disease_sentences = vec![primary];
    if rng.random_bool(0.25) {
        let other = rng.random_range(0..n_sentences);
        if other != primary {
            disease_sentences.push(other);
        }
    }
    let primary_disease = *lex.diseases.choose(rng).expect("nonempty diseases");
    for (k, &i) in disease_sentences.iter().enumerate() {
        let name = if k == 0 {
            primary_disease
        } else {
            *lex.diseases.choose(rng).expect("nonempty diseases")
        };
        insert_word(rng, &mut sentences[i], tag("disease", name));
    }

    let p = params.signal_strength;
    if relevant && rng.random_bool(p) {
        let word = SIGNAL_WORDS.choose(rng).expect("signal words").to_string();
        insert_word(rng, &mut sentences[primary], word);
        if primary + 1 < n_sentences && rng.random_bool(p) {
            let word = SIGNAL_WORDS.choose(rng).expect("signal words").to_string();
            insert_word(rng, &mut sentences[primary + 1], word);
        }
    }
    if !relevant && rng.random_bool(p) {
        let word = DISTRACTOR_WORDS.choose(rng).expect("distractors").to_string();
        insert_word(rng, &mut sentences[primary], word);
    }

    let mut window: Vec<usize> = disease_sentences
        .iter()
        .flat_map(|&i| [i.checked_sub(1), Some(i), Some(i + 1)])
        .flatten()
        .filter(|&i| i < n_sentences)
        .collect();
    window.sort_unstable();
    window.dedup();
    let outside: Vec<usize> = (0..n_sentences).filter(|i| !window.contains(i)).collect();

    let q = params.location_correlation;
    let location_prob = if relevant { q } else { q / 4.0 };
    if rng.random_bool(location_prob) {
        let at = *window.choose(rng).expect("window is nonempty");
        let place = *lex.locations.choose(rng).expect("locations");
        insert_word(rng, &mut sentences[at], tag("location", place));
    } else if !outside.is_empty() && rng.random_bool(0.3) {
        let at = *outside.choose(rng).expect("nonempty");
        let place = *lex.locations.choose(rng).expect("locations");
        insert_word(rng, &mut sentences[at], tag("location", place));
    }

    let body = sentences
        .into_iter()
        .map(|mut words| {
            words[0] = capitalize(&words[0]);
            format!("{}.", words.join(" "))
        })
        .collect::<Vec<_>>()
        .join(" ");

    let mut title = filler_sentence(rng, lex, 3, 6);
    if rng.random_bool(0.5) {
        insert_word(rng, &mut title, tag("disease", primary_disease));
    }
    title[0] = capitalize(&title[0]);

    RawRecord {
        id: Some(id),
        title: title.join(" "),
        body,
        label: Some(if relevant { "relevant" } else { "non-relevant" }.to_owned()),
    }
}

pub fn generate_synthetic_corpus(params: &SynthParams) -> Result<Corpus, CorpusError> {
    params.validate()?;
    let mut filler = filler_lexicon();
    filler.truncate(params.filler_vocab);
    let lex = Lexicon {
        filler,
        diseases: DISEASES[..params.n_diseases].to_vec(),
        locations: LOCATIONS[..params.n_locations].to_vec(),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut classes: Vec<bool> = std::iter::repeat_n(true, params.n_relevant)
        .chain(std::iter::repeat_n(false, params.n_irrelevant))
        .collect();
    classes.shuffle(&mut rng);

    let documents = classes
        .into_iter()
        .enumerate()
        .map(|(i, relevant)| {
            let record = generate_record(&mut rng, &lex, params, format!("syn-{i:05}"), relevant);
            parse_document(&record)
        })
        .collect::<Result<Vec<AnnotatedDocument>, _>>()?;
    Corpus::new(documents)
}
