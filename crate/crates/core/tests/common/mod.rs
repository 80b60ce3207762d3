//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};

use clarabel::algebra::CscMatrix;
use clarabel::solver::{DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT};
use obc::corpus::{normalize, tokenize, AnnotatedDocument, Corpus, SynthParams};

/// ½‖w‖² + C·Σ max(0, 1 − y(w·x + b)) on dense data.
pub fn dense_objective(xs: &[Vec<f64>], ys: &[f64], w: &[f64], b: f64, c: f64) -> f64 {
    let reg: f64 = 0.5 * w.iter().map(|v| v * v).sum::<f64>();
    let loss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let s: f64 = x.iter().zip(w).map(|(a, b)| a * b).sum();
            (1.0 - y * (s + b)).max(0.0)
        })
        .sum();
    reg + c * loss
}

/// Solves the primal soft-margin QP with an interior-point solver.
/// Variables are `[w (d), b, ξ (n)]`. Returns `(w, b, objective)`.
pub fn qp_oracle(xs: &[Vec<f64>], ys: &[f64], c: f64) -> (Vec<f64>, f64, f64) {
    let n = xs.len();
    let d = xs[0].len();
    let nv = d + 1 + n;

    let mut p = vec![vec![0.0; nv]; nv];
    for (k, row) in p.iter_mut().enumerate().take(d) {
        row[k] = 1.0;
    }
    let mut q = vec![0.0; nv];
    for v in &mut q[d + 1..] {
        *v = c;
    }
    // y_i (w·x_i + b) + ξ_i ≥ 1  and  ξ_i ≥ 0, written as A z ≤ b
    let mut a = Vec::with_capacity(2 * n);
    let mut rhs = Vec::with_capacity(2 * n);
    for (i, (x, y)) in xs.iter().zip(ys).enumerate() {
        let mut row = vec![0.0; nv];
        for k in 0..d {
            row[k] = -y * x[k];
        }
        row[d] = -y;
        row[d + 1 + i] = -1.0;
        a.push(row);
        rhs.push(-1.0);
    }
    for i in 0..n {
        let mut row = vec![0.0; nv];
        row[d + 1 + i] = -1.0;
        a.push(row);
        rhs.push(0.0);
    }
    let settings = DefaultSettingsBuilder::default()
        .verbose(false)
        .tol_gap_abs(1e-10)
        .tol_gap_rel(1e-10)
        .tol_feas(1e-10)
        .build()
        .unwrap();
    let p = CscMatrix::from(&p).to_triu();
    let a = CscMatrix::from(&a);
    let cones = [SupportedConeT::NonnegativeConeT(2 * n)];
    let mut solver = DefaultSolver::new(&p, &q, &a, &rhs, &cones, settings).expect("well-formed QP");
    solver.solve();
    assert!(
        matches!(solver.solution.status, SolverStatus::Solved | SolverStatus::AlmostSolved),
        "oracle status {:?}",
        solver.solution.status
    );
    let z = &solver.solution.x;
    let w = z[..d].to_vec();
    let b = z[d];
    let f = dense_objective(xs, ys, &w, b, c);
    (w, b, f)
}

/// Flags of the fourteen models, written out independently of the library:
/// (raw text, preceding, following, location, title, multi-disease).
pub fn model_table(id: u8) -> (bool, bool, bool, bool, bool, bool) {
    match id {
        1 => (true, false, false, false, false, false),
        2 => (false, false, false, false, false, false),
        3 => (false, true, false, false, false, false),
        4 => (false, false, true, false, false, false),
        5 => (false, true, true, false, false, false),
        6 => (false, true, false, true, false, false),
        7 => (false, false, true, true, false, false),
        8 => (false, true, true, true, false, false),
        9 => (false, true, false, true, true, false),
        10 => (false, false, true, true, true, false),
        11 => (false, true, true, true, true, false),
        12 => (false, true, false, true, true, true),
        13 => (false, false, true, true, true, true),
        14 => (false, true, true, true, true, true),
        _ => panic!("no model {id}"),
    }
}

pub struct ScannedMention {
    pub disease: bool,
    pub start: usize,
    pub end: usize,
    pub surface: String,
}

/// Finds `<ner ...>...</ner>` spans directly in tagged text; offsets are chars
/// of the tag-free text, with any padding inside the tag trimmed away.
pub fn scan_mentions(tagged: &str) -> Vec<ScannedMention> {
    let mut out = Vec::new();
    let mut plain_chars = 0usize;
    let mut rest = tagged;
    while let Some(open) = rest.find("<ner") {
        plain_chars += rest[..open].chars().count();
        let after_open = &rest[open..];
        let gt = after_open.find('>').expect("closed open tag");
        let tag = &after_open[..gt];
        let inner_and_more = &after_open[gt + 1..];
        let close = inner_and_more.find("</ner>").expect("close tag");
        let inner = &inner_and_more[..close];
        let lead = inner.chars().take_while(|c| c.is_whitespace()).count();
        let surface = inner.trim();
        let start = plain_chars + lead;
        out.push(ScannedMention {
            disease: tag.contains("disease"),
            start,
            end: start + surface.chars().count(),
            surface: surface.to_owned(),
        });
        plain_chars += inner.chars().count();
        rest = &inner_and_more[close + "</ner>".len()..];
    }
    out
}

pub struct Scanned {
    pub selected: BTreeSet<usize>,
    pub tokens: BTreeSet<String>,
    pub location: bool,
    pub multi_disease: bool,
}

fn char_slice(text: &str, start: usize, end: usize) -> String {
    text.chars().skip(start).take(end - start).collect()
}

/// Brute-force selection: a sentence is kept if it, or the neighbour the
/// model looks across, overlaps a disease span.
pub fn scan(doc: &AnnotatedDocument, model: u8) -> Scanned {
    let (raw, prev, next, loc, title, multi) = model_table(model);
    let body = scan_mentions(&doc.body_raw);
    let spans: Vec<(usize, usize)> = doc
        .body_sentences
        .iter()
        .map(|s| (s.char_start, s.char_end))
        .collect();
    let overlaps = |i: usize, m: &ScannedMention| m.start < spans[i].1 && spans[i].0 < m.end;
    let has_disease = |i: usize| body.iter().any(|m| m.disease && overlaps(i, m));

    let mut selected = BTreeSet::new();
    for i in 0..spans.len() {
        let keep = raw
            || has_disease(i)
            || (prev && i + 1 < spans.len() && has_disease(i + 1))
            || (next && i > 0 && has_disease(i - 1));
        if keep {
            selected.insert(i);
        }
    }

    let mut tokens = BTreeSet::new();
    for &i in &selected {
        tokens.extend(tokenize(&char_slice(&doc.body_text, spans[i].0, spans[i].1)));
    }
    if raw || title {
        tokens.extend(tokenize(&doc.title_text));
    }
    let location = loc
        && body
            .iter()
            .any(|m| !m.disease && selected.iter().any(|&i| overlaps(i, m)));
    let names: HashSet<String> = scan_mentions(&doc.title_raw)
        .into_iter()
        .chain(body)
        .filter(|m| m.disease)
        .map(|m| normalize(&m.surface).split_whitespace().collect::<Vec<_>>().join(" "))
        .collect();
    Scanned {
        selected,
        tokens,
        location,
        multi_disease: multi && names.len() >= 2,
    }
}

/// 1,000 seeded synthetic documents drawn from four differently tuned corpora.
pub fn thousand_documents() -> Vec<AnnotatedDocument> {
    let mut docs = Vec::new();
    for (k, (p, q)) in [(1.0, 0.0), (0.7, 0.9), (0.5, 0.5), (0.2, 1.0)].into_iter().enumerate() {
        let corpus = obc::corpus::generate_synthetic_corpus(&SynthParams::new(125, 125, p, q, 100 + k as u64))
            .unwrap();
        docs.extend(corpus.documents);
    }
    docs
}

pub fn synth(n_rel: usize, n_irr: usize, p: f64, q: f64, seed: u64) -> Corpus {
    obc::corpus::generate_synthetic_corpus(&SynthParams::new(n_rel, n_irr, p, q, seed)).unwrap()
}

pub const EXAMPLE_TITLE: &str = "<ner type=disease>Cúm A/H1N1</ner> lan rộng";
pub const EXAMPLE_BODY: &str = "Cục Y tế dự phòng (Bộ Y tế) cho biết, <ner type=disease>cúm A/H1N1</ner> đã lan rộng ra 35 tỉnh, thành trong cả nước, trong đó có hơn 200 ca mắc dịch, 7 trường hợp đã tử vong.\n\nMới nhất, ngày 1/4, Sở Y tế tỉnh Bến Tre, cho biết trên địa bàn tỉnh vừa xuất hiện một ổ dịch mới <ner type=disease>cúm A/H1N1</ner> tại xã Tân Phong, huyện <ner type = location> Thạnh Phú </ner>.";
