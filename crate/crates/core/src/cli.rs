//! The `obc` command line.
//!
//! Failures go to stderr as a single line `error:<category>: <message>`.
//! Exit codes: 0 success, 1 runtime failure, 2 usage error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::corpus::{corpus_stats, generate_synthetic_corpus, ClassStats, Corpus, CorpusError, SynthParams};
use crate::eval::{self, compare_models, run_repeated_cv, CvParams, EvalError};
use crate::features::{vectorize, FeatureError, FeatureModelSpec, Vocabulary, MODEL_IDS};
use crate::svm::{self, load_model, save_model, label_for_score, SvmError, SvmModel, TrainParams, TrainingSet};

#[derive(Debug, Parser)]
#[command(name = "obc", version, about = "Classify disease-outbreak news reports")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print per-class corpus statistics and vocabulary sizes for all models
    Stats {
        #[arg(long)]
        corpus: PathBuf,
    },
    /// Write a seeded synthetic corpus as JSON Lines
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 500, value_parser = positive_count)]
        relevant: usize,
        #[arg(long, default_value_t = 500, value_parser = positive_count)]
        irrelevant: usize,
        /// Probability that a report carries its class cue word
        #[arg(long, default_value_t = 0.7, value_parser = probability)]
        signal: f64,
        /// Probability that a relevant report names a location near the disease
        #[arg(long, default_value_t = 0.8, value_parser = probability)]
        location: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Train on a labeled corpus and write a model file
    Train {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Score documents with a trained model (TSV: id, score, label)
    Predict {
        #[arg(long)]
        model_file: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        /// Write predictions here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Repeated k-fold cross-validation of one model
    Eval {
        #[arg(long)]
        corpus: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        cv: CvArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Cross-validate several models on shared folds
    Compare {
        #[arg(long)]
        corpus: PathBuf,
        /// Comma-separated model ids
        #[arg(long, value_delimiter = ',', value_parser = model_id,
              default_value = "1,2,3,4,5,6,7,8,9,10,11,12,13,14")]
        models: Vec<u8>,
        #[command(flatten)]
        cv: CvArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// Feature model id (1-14)
    #[arg(long, default_value_t = 8, value_parser = model_id)]
    model: u8,
}

#[derive(Debug, Args)]
struct SolverArgs {
    /// Soft-margin penalty
    #[arg(long = "c", short = 'C', default_value_t = 1.0, value_parser = positive_real)]
    c: f64,
    /// Relative duality-gap tolerance
    #[arg(long, default_value_t = 1e-3, value_parser = positive_real)]
    tolerance: f64,
    #[arg(long, default_value_t = 1000, value_parser = positive_count)]
    max_epochs: usize,
}

impl SolverArgs {
    fn params(&self) -> TrainParams {
        TrainParams {
            c: self.c,
            tolerance: self.tolerance,
            max_epochs: self.max_epochs,
        }
    }
}

#[derive(Debug, Args)]
struct CvArgs {
    #[arg(long, default_value_t = 10, value_parser = positive_count)]
    repeats: usize,
    #[arg(long, default_value_t = 10, value_parser = fold_count)]
    folds: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

fn model_id(s: &str) -> Result<u8, String> {
    let id: u8 = s.trim().parse().map_err(|_| format!("`{s}` is not a model id"))?;
    if MODEL_IDS.contains(&id) {
        Ok(id)
    } else {
        Err(format!("model id must be between 1 and 14, got {id}"))
    }
}

fn positive_count(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(format!("expected a positive integer, got `{s}`")),
    }
}

fn fold_count(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n >= 2 => Ok(n),
        _ => Err(format!("expected an integer of at least 2, got `{s}`")),
    }
}

fn positive_real(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x.is_finite() && x > 0.0 => Ok(x),
        _ => Err(format!("expected a positive number, got `{s}`")),
    }
}

fn probability(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if (0.0..=1.0).contains(&x) => Ok(x),
        _ => Err(format!("expected a probability in [0, 1], got `{s}`")),
    }
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Io(PathBuf, io::Error),
    Corpus(CorpusError),
    Model(SvmError),
    Train(SvmError),
    Eval(EvalError),
    Features(FeatureError),
}

impl Failure {
    fn category(&self) -> &'static str {
        match self {
            Failure::Usage(_) => "usage",
            Failure::Io(..) => "io",
            Failure::Corpus(CorpusError::UnlabeledDocument(_)) => "unlabeled",
            Failure::Corpus(_) => "corpus",
            Failure::Model(_) => "model",
            Failure::Train(_) => "train",
            Failure::Eval(EvalError::Corpus(CorpusError::UnlabeledDocument(_))) => "unlabeled",
            Failure::Eval(EvalError::Corpus(_)) => "corpus",
            Failure::Eval(_) => "eval",
            Failure::Features(_) => "features",
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Usage(m) => m.clone(),
            Failure::Io(path, e) => format!("{}: {e}", path.display()),
            Failure::Corpus(e) => e.to_string(),
            Failure::Model(e) | Failure::Train(e) => e.to_string(),
            Failure::Eval(e) => e.to_string(),
            Failure::Features(e) => e.to_string(),
        }
    }

    fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            _ => 1,
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut (dyn Write + Send), stderr: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{}", e.render());
                return 0;
            }
            let text = e.render().to_string();
            let first = text.lines().next().unwrap_or("").trim_start_matches("error: ");
            let _ = writeln!(stderr, "error:usage: {first}");
            return 2;
        }
    };
    let result = thread_pool().and_then(|pool| pool.install(|| dispatch(cli.command, stdout, stderr)));
    match result {
        Ok(()) => 0,
        Err(f) => {
            let message = f.message().replace('\n', " ");
            let _ = writeln!(stderr, "error:{}: {message}", f.category());
            f.exit_code()
        }
    }
}

fn thread_pool() -> Result<rayon::ThreadPool, Failure> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(raw) = std::env::var_os("OBC_THREADS") {
        let n = raw
            .to_str()
            .and_then(|s| s.trim().parse::<usize>().ok())
            .filter(|&n| n > 0)
            .ok_or_else(|| Failure::Usage(format!("OBC_THREADS must be a positive integer, got {raw:?}")))?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| Failure::Usage(format!("cannot start worker threads: {e}")))
}

fn load_corpus(path: &Path) -> Result<Corpus, Failure> {
    Corpus::load(path).map_err(|e| match e {
        CorpusError::Io(io) => Failure::Io(path.to_owned(), io),
        other => Failure::Corpus(other),
    })
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Io(path.to_owned(), e))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<(), Failure> {
    w.flush().map_err(|e| Failure::Io(path.to_owned(), e))
}

fn emit(text: &str, out: Option<&Path>, stdout: &mut (dyn Write + Send)) -> Result<(), Failure> {
    match out {
        Some(path) => {
            let mut w = create(path)?;
            w.write_all(text.as_bytes())
                .map_err(|e| Failure::Io(path.to_owned(), e))?;
            finish(w, path)
        }
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Io(PathBuf::from("<stdout>"), e)),
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn dispatch(command: Command, stdout: &mut (dyn Write + Send), stderr: &mut (dyn Write + Send)) -> Result<(), Failure> {
    match command {
        Command::Stats { corpus } => stats(&load_corpus(&corpus)?, stdout),
        Command::Synth {
            out,
            relevant,
            irrelevant,
            signal,
            location,
            seed,
        } => {
            let params = SynthParams::new(relevant, irrelevant, signal, location, seed);
            let corpus = generate_synthetic_corpus(&params).map_err(Failure::Corpus)?;
            let mut w = create(&out)?;
            corpus.write_jsonl(&mut w).map_err(Failure::Corpus)?;
            finish(w, &out)
        }
        Command::Train {
            corpus,
            out,
            model,
            solver,
        } => {
            let corpus = load_corpus(&corpus)?;
            let spec = FeatureModelSpec::from_id(model.model).map_err(Failure::Features)?;
            let trained = train_model(&corpus, spec, &solver.params())?;
            if !trained.1 {
                let _ = writeln!(
                    stderr,
                    "warning: solver stopped after {} epochs without reaching tolerance {}",
                    solver.max_epochs, solver.tolerance
                );
            }
            let mut w = create(&out)?;
            save_model(&trained.0, &mut w).map_err(Failure::Model)?;
            finish(w, &out)
        }
        Command::Predict {
            model_file,
            corpus,
            out,
        } => {
            let file = File::open(&model_file).map_err(|e| Failure::Io(model_file.clone(), e))?;
            let model = load_model(io::BufReader::new(file)).map_err(Failure::Model)?;
            let corpus = load_corpus(&corpus)?;
            let mut text = String::new();
            for doc in &corpus.documents {
                let x = vectorize(doc, &model.spec, &model.vocab).map_err(Failure::Features)?;
                let score = model.decision(&x).map_err(Failure::Model)?;
                let label = label_for_score(score).as_str().unwrap_or("unlabeled");
                text.push_str(&format!("{}\t{score}\t{label}\n", doc.id));
            }
            emit(&text, out.as_deref(), stdout)
        }
        Command::Eval {
            corpus,
            model,
            cv,
            solver,
            output,
        } => {
            let corpus = load_corpus(&corpus)?;
            let spec = FeatureModelSpec::from_id(model.model).map_err(Failure::Features)?;
            let report = run_repeated_cv(&corpus, &spec, &cv_params(&cv, &solver)).map_err(Failure::Eval)?;
            if report.aggregate.non_converged_runs > 0 {
                let _ = writeln!(
                    stderr,
                    "warning: {} of {} runs stopped before reaching the tolerance",
                    report.aggregate.non_converged_runs,
                    report.runs.len()
                );
            }
            let text = match output.format {
                Format::Json => to_json(&report),
                Format::Text => report.render_table(),
            };
            emit(&text, output.out.as_deref(), stdout)
        }
        Command::Compare {
            corpus,
            models,
            cv,
            solver,
            output,
        } => {
            let corpus = load_corpus(&corpus)?;
            let comparison = compare_models(&corpus, &models, &cv_params(&cv, &solver)).map_err(Failure::Eval)?;
            let text = match output.format {
                Format::Json => to_json(&comparison),
                Format::Text => comparison.render_table(),
            };
            emit(&text, output.out.as_deref(), stdout)
        }
    }
}

fn cv_params(cv: &CvArgs, solver: &SolverArgs) -> CvParams {
    CvParams {
        repeats: cv.repeats,
        folds: cv.folds,
        base_seed: cv.seed,
        train: solver.params(),
    }
}

/// Trains on the whole corpus; the flag reports convergence.
fn train_model(corpus: &Corpus, spec: FeatureModelSpec, params: &TrainParams) -> Result<(SvmModel, bool), Failure> {
    corpus.require_labels().map_err(Failure::Corpus)?;
    let extractions = eval::extract_corpus(corpus, &spec);
    let vocab = Vocabulary::from_extractions(&extractions, &spec);
    let mut data = TrainingSet::new(vocab.dimension());
    for (doc, e) in corpus.documents.iter().zip(&extractions) {
        data.push(&vocab.vectorize_extraction(e), doc.label)
            .map_err(Failure::Train)?;
    }
    let trained = svm::train(&data, params).map_err(Failure::Train)?;
    let model = SvmModel::new(trained.svm, spec, vocab).map_err(Failure::Train)?;
    Ok((model, trained.converged))
}

fn stats(corpus: &Corpus, stdout: &mut (dyn Write + Send)) -> Result<(), Failure> {
    let stats = corpus_stats(corpus).map_err(Failure::Corpus)?;
    let mut text = String::new();
    let row = |name: &str, f: fn(&ClassStats) -> usize| {
        format!(
            "{name:<48} {:>10} {:>12}\n",
            f(&stats.relevant),
            f(&stats.non_relevant)
        )
    };
    text.push_str(&format!("{:<48} {:>10} {:>12}\n", "", "relevant", "non-relevant"));
    text.push_str(&row("reports", |s| s.n_reports));
    text.push_str(&row("sentences with a disease", |s| s.n_disease_sentences));
    text.push_str(&row("  with a preceding sentence", |s| {
        s.n_disease_sentences_with_preceding
    }));
    text.push_str(&row("  with a following sentence", |s| {
        s.n_disease_sentences_with_following
    }));
    text.push_str(&row("  with both", |s| s.n_disease_sentences_with_both));
    text.push_str(&row("reports with a location near a disease", |s| {
        s.n_reports_with_location_in_selected
    }));
    text.push('\n');
    text.push_str(&format!("{:>2}  {:<42} {:>11}\n", "#", "Models", "#Vocabulary"));
    for spec in FeatureModelSpec::all() {
        text.push_str(&format!(
            "{:>2}  {:<42} {:>11}\n",
            spec.model_id(),
            spec.description(),
            eval::corpus_vocabulary_size(corpus, &spec)
        ));
    }
    emit(&text, None, stdout)
}
