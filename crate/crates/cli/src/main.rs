//! `praisetag`: tag, evaluate, split, inspect and convert praise corpora,
//! render feedback, or run the HTTP service.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 adapter error.

mod io;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use praisetag_core::annotation::tokenize;
use praisetag_core::dataset::{
    compute_stats, read_conll, read_jsonl, read_predictions, split_dataset, write_conll, write_jsonl, write_predictions,
    Corpus, SplitConfig, StratifyBy,
};
use praisetag_core::evaluation::{evaluate_predictions, evaluate_runs, DEFAULT_TAU};
use praisetag_core::feedback::{render_feedback, FeedbackConfig};
use praisetag_core::tagging::{lexicon_tag, DEFAULT_ADAPTER_TIMEOUT};
use praisetag_core::{AdapterEndpoint, AdapterError, Lexicon, Prediction};
use praisetag_service::ServiceConfig;
use thiserror::Error;

use crate::io::{corpus_name, open_input, open_output};

#[derive(Debug, Parser)]
#[command(name = "praisetag", version, about = "Tag and score praise in tutor responses")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TaggerKind {
    Lexicon,
    External,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ConvertTarget {
    /// JSONL in, CoNLL out.
    Conll,
    /// CoNLL in, JSONL out.
    Jsonl,
}

#[derive(Debug, clap::Args)]
struct TaggerArgs {
    #[arg(long, value_enum, default_value = "lexicon")]
    tagger: TaggerKind,
    /// `tcp://host:port`, `http(s)://...`, or a command line. Required with
    /// `--tagger external`.
    #[arg(long)]
    adapter: Option<String>,
    /// Lexicon JSON file replacing the built-in one.
    #[arg(long)]
    lexicon: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_ADAPTER_TIMEOUT.as_millis() as u64)]
    timeout_ms: u64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tag every response of a JSONL corpus and write predictions as JSONL.
    Tag {
        #[arg(long = "in")]
        input: String,
        #[arg(long = "out", default_value = "-")]
        output: String,
        #[command(flatten)]
        tagger: TaggerArgs,
    },
    /// Score predictions against a gold corpus.
    Eval {
        #[arg(long)]
        gold: String,
        /// Prediction JSONL; repeat for several runs to get mean and std.
        #[arg(long = "pred", required = true)]
        preds: Vec<String>,
        #[arg(long, default_value_t = DEFAULT_TAU, value_parser = parse_tau)]
        tau: f64,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Seeded train/validation/test split.
    Split {
        #[arg(long = "in")]
        input: String,
        #[arg(long, default_value = "0.7,0.1,0.2", value_parser = parse_ratios)]
        ratios: (f64, f64, f64),
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Split each praise-label combination separately.
        #[arg(long)]
        stratify: bool,
        /// Defaults to the input's directory.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Gold tag distribution of a corpus.
    Stats {
        #[arg(long = "in")]
        input: String,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Convert between JSONL and CoNLL columns.
    Convert {
        #[arg(long = "in")]
        input: String,
        #[arg(long, value_enum)]
        to: ConvertTarget,
        #[arg(long = "out", default_value = "-")]
        output: String,
    },
    /// Tag one response and print the feedback it earns.
    Feedback {
        #[arg(long)]
        text: String,
        #[command(flatten)]
        tagger: TaggerArgs,
        #[arg(long, default_value_t = praisetag_core::feedback::DEFAULT_CONFIDENCE_THRESHOLD, value_parser = parse_unit)]
        threshold: f64,
        /// JSON object mapping every template id to its text.
        #[arg(long)]
        templates: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Run the HTTP service.
    Serve {
        /// TOML config; without it the service uses defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        bind: Option<String>,
    },
}

fn parse_ratios(s: &str) -> Result<(f64, f64, f64), String> {
    let parts: Vec<f64> = s.split(',').map(|p| p.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    let [a, b, c] = parts[..] else {
        return Err("expected three comma-separated ratios".to_string());
    };
    SplitConfig::new((a, b, c), 0).validate().map_err(|e| e.to_string())?;
    Ok((a, b, c))
}

fn parse_unit(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is outside [0, 1]"))
    }
}

fn parse_tau(s: &str) -> Result<f64, String> {
    let v = parse_unit(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err("tau must be in (0, 1]".to_string())
    }
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Adapter(#[from] AdapterError),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Adapter(_) => 3,
        }
    }
}

fn data<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Data(e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("praisetag: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

enum Tagger {
    Lexicon(Lexicon),
    External(praisetag_core::tagging::AdapterHandle),
}

impl Tagger {
    fn new(args: &TaggerArgs) -> Result<Self, CliError> {
        match args.tagger {
            TaggerKind::Lexicon => {
                let lexicon = match &args.lexicon {
                    Some(path) => Lexicon::load(path).map_err(data)?,
                    None => Lexicon::default_praise(),
                };
                Ok(Tagger::Lexicon(lexicon))
            }
            TaggerKind::External => {
                let spec = args.adapter.as_deref().ok_or_else(|| CliError::Usage("--tagger external needs --adapter".into()))?;
                let endpoint =
                    AdapterEndpoint::parse(spec).ok_or_else(|| CliError::Usage(format!("invalid adapter `{spec}`")))?;
                if args.timeout_ms == 0 {
                    return Err(CliError::Usage("--timeout-ms must be > 0".into()));
                }
                Ok(Tagger::External(endpoint.connect(Duration::from_millis(args.timeout_ms))?))
            }
        }
    }

    fn tag(&mut self, id: &str, text: &str) -> Result<Prediction, CliError> {
        match self {
            Tagger::Lexicon(lexicon) => Ok(lexicon_tag(id, text, lexicon)),
            Tagger::External(handle) => Ok(handle.external_tag(id, text)?),
        }
    }
}

fn load_corpus(input: &str) -> Result<Corpus, CliError> {
    read_jsonl(open_input(input)?, &corpus_name(input)).map_err(|e| CliError::Data(format!("{input}: {e}")))
}

fn load_predictions(input: &str) -> Result<Vec<Prediction>, CliError> {
    read_predictions(open_input(input)?).map_err(|e| CliError::Data(format!("{input}: {e}")))
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<(), CliError> {
    println!("{}", serde_json::to_string_pretty(value).map_err(data)?);
    Ok(())
}

fn emit<T: serde::Serialize>(format: Format, value: &T, text: impl FnOnce() -> String) -> Result<(), CliError> {
    match format {
        Format::Json => print_json(value),
        Format::Text => {
            print!("{}", text());
            Ok(())
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Tag { input, output, tagger } => {
            let corpus = load_corpus(&input)?;
            let mut tagger = Tagger::new(&tagger)?;
            let predictions = corpus
                .responses()
                .iter()
                .map(|r| tagger.tag(r.id(), r.text()))
                .collect::<Result<Vec<_>, _>>()?;
            write_predictions(&predictions, open_output(&output)?).map_err(data)
        }
        Command::Eval { gold, preds, tau, format } => {
            let gold_corpus = load_corpus(&gold)?;
            let runs = preds.iter().map(|p| load_predictions(p)).collect::<Result<Vec<_>, _>>()?;
            if let [single] = runs.as_slice() {
                let report = evaluate_predictions(gold_corpus.responses(), single, tau).map_err(data)?;
                emit(format, &report, || report.to_text())
            } else {
                let report = evaluate_runs(gold_corpus.responses(), &runs, tau).map_err(data)?;
                emit(format, &report, || report.to_text())
            }
        }
        Command::Split { input, ratios, seed, stratify, out_dir } => {
            if input == "-" && out_dir.is_none() {
                return Err(CliError::Usage("--out-dir is required when reading stdin".into()));
            }
            let corpus = load_corpus(&input)?;
            let config = SplitConfig {
                ratios,
                seed,
                stratify_by: if stratify { StratifyBy::PraiseLabelCombination } else { StratifyBy::None },
            };
            let (train, validation, test) = split_dataset(&corpus, &config).map_err(data)?;
            let dir = out_dir.unwrap_or_else(|| {
                PathBuf::from(&input).parent().map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."))
            });
            std::fs::create_dir_all(&dir).map_err(|e| CliError::Data(format!("{}: {e}", dir.display())))?;
            for part in [&train, &validation, &test] {
                let path = dir.join(format!("{}.jsonl", part.name()));
                praisetag_core::dataset::save_jsonl(part, &path).map_err(data)?;
                println!("{}\t{}", path.display(), part.len());
            }
            Ok(())
        }
        Command::Stats { input, format } => {
            let stats = compute_stats(&load_corpus(&input)?).map_err(data)?;
            emit(format, &stats, || stats.to_text())
        }
        Command::Convert { input, to, output } => match to {
            ConvertTarget::Conll => write_conll(&load_corpus(&input)?, open_output(&output)?).map_err(data),
            ConvertTarget::Jsonl => {
                let corpus = read_conll(open_input(&input)?, &corpus_name(&input))
                    .map_err(|e| CliError::Data(format!("{input}: {e}")))?;
                write_jsonl(&corpus, open_output(&output)?).map_err(data)
            }
        },
        Command::Feedback { text, tagger, threshold, templates, format } => {
            if text.trim().is_empty() {
                return Err(CliError::Usage("--text is empty".into()));
            }
            let mut config = FeedbackConfig { confidence_threshold: threshold, ..FeedbackConfig::default() };
            if let Some(path) = templates {
                config.templates = FeedbackConfig::load_templates(&path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
            }
            let prediction = Tagger::new(&tagger)?.tag("cli", &text)?;
            let message = render_feedback(&text, &tokenize(&text), &prediction, &config).map_err(data)?;
            match format {
                Format::Json => print_json(&message),
                Format::Text => {
                    for item in &message.items {
                        println!("{}", item.text);
                    }
                    Ok(())
                }
            }
        }
        Command::Serve { config, bind } => {
            let mut config = match config {
                Some(path) => ServiceConfig::load(&path).map_err(data)?,
                None => {
                    let mut c = ServiceConfig::default();
                    c.apply_env(|k| std::env::var(k).ok());
                    c
                }
            };
            if let Some(bind) = bind {
                config.bind = bind;
            }
            config.validate().map_err(data)?;
            praisetag_service::init_logging();
            let runtime = tokio::runtime::Runtime::new().map_err(data)?;
            runtime.block_on(praisetag_service::serve(config)).map_err(data)
        }
    }
}
