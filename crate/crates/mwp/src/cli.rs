//! Command-line entry point: ingestion, statistics, folds, training,
//! evaluation, probes, ablations, and template-based generation.
//!
//! Every subcommand is reproducible: identical inputs and `--seed` produce
//! byte-identical report files. A TOML config (`--config`) mirrors the
//! flags; explicit flags win. Exit codes: 0 success, 1 validation warnings
//! under `--strict`, 2 hard errors.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::corpus::{
    self, ingest, make_folds, Corpus, FoldScheme, FoldSet, SourceFormat,
};
use crate::genesis::{
    self, parse_template_file, validate_template, Constraints, Lexicon, VariationTemplate,
};
use crate::metrics::{
    self, breakdown_by_num_count, execution_accuracy, lexical_diversity, majority_template_predict,
    render_stats_markdown, template_stats, DiversityParams, EvalReport,
};
use crate::neural::{self, Model, ModelConfig, Variant};
use crate::number::{parse_decimal, Num};
use crate::probes;

/// Output rendering for reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutFormat {
    Json,
    Md,
    Csv,
}

#[derive(Parser, Debug)]
#[command(
    name = "mwp",
    about = "Quantify shallow-heuristic exploitability of math-word-problem corpora",
    version
)]
pub struct Cli {
    /// TOML config file; every flag can be set there, flags override.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Treat validation warnings as errors (exit 1).
    #[arg(long, global = true)]
    pub strict: bool,
    /// Worker threads for fold- and template-level parallelism.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug)]
pub struct CorpusArgs {
    /// Corpus file path.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Source format of `--corpus`.
    #[arg(long, value_enum, default_value = "native-json")]
    pub source_format: SourceFormat,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Convert a corpus to the native line-delimited JSON format.
    Ingest {
        #[command(flatten)]
        corpus: CorpusArgs,
        /// Output path; defaults to `$MWP_CACHE_DIR/<name>.native.jsonl`
        /// when that variable is set, else standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Corpus statistics: problems, templates, operators, diversity.
    Stats {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long, value_enum, default_value = "md")]
        format: OutFormat,
        /// Also compute the (slow) lexical-diversity score.
        #[arg(long)]
        cld: bool,
        /// Canonicalize commutative operands before masking templates.
        #[arg(long)]
        canonicalize: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit a cross-validation fold assignment.
    Folds {
        #[command(flatten)]
        corpus: CorpusArgs,
        /// `equal-five`, `fixed:<a,b,c,d,e>`, or `seed-grouped`.
        #[arg(long)]
        folds: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train a model, optionally under cross-validation.
    Train {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long, value_enum)]
        variant: Option<Variant>,
        /// Cross-validate (`equal-five`, `fixed:<sizes>`, `seed-grouped`);
        /// omitted = single run validated on `--val-corpus` or itself.
        #[arg(long)]
        folds: Option<String>,
        /// Validation corpus for a single (non-CV) run.
        #[arg(long)]
        val_corpus: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        batch_size: Option<usize>,
        #[arg(long)]
        embedding_size: Option<usize>,
        #[arg(long)]
        hidden_size: Option<usize>,
        #[arg(long)]
        layers: Option<usize>,
        #[arg(long)]
        dropout: Option<f64>,
        #[arg(long)]
        learning_rate: Option<f64>,
        #[arg(long)]
        tolerance: Option<String>,
        /// Output directory for snapshots, logs, and the merged report.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a model snapshot on a corpus.
    Eval {
        #[command(flatten)]
        corpus: CorpusArgs,
        /// Model snapshot path.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        tolerance: Option<String>,
        #[arg(long, value_enum, default_value = "json")]
        format: OutFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dataset-artifact probes.
    #[command(subcommand)]
    Probe(ProbeCommand),
    /// Split a corpus into Easy/Hard from a question-removed report.
    Partition {
        #[command(flatten)]
        corpus: CorpusArgs,
        /// Question-removed evaluation report (JSON).
        #[arg(long)]
        noq_report: Option<PathBuf>,
        /// Optional full-question report to break down over the partition.
        #[arg(long)]
        full_report: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Attention heatmaps for a model on selected problems.
    Attn {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        model: Option<PathBuf>,
        /// Problem id; omitted = first problem.
        #[arg(long)]
        id: Option<String>,
        #[arg(long, value_enum, default_value = "md")]
        format: OutFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Ablation delta: accuracy change from removing a variation label.
    Delta {
        #[command(flatten)]
        corpus: CorpusArgs,
        /// Full-set evaluation report (JSON).
        #[arg(long)]
        report: Option<PathBuf>,
        /// Variation type or category to remove.
        #[arg(long)]
        label: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Accuracy by number-count bucket.
    Breakdown {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: OutFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Instantiate variation templates into a generated corpus.
    Generate {
        /// Template file(s).
        #[arg(long)]
        templates: Vec<PathBuf>,
        /// Lexicon JSON file.
        #[arg(long)]
        lexicon: Option<PathBuf>,
        #[arg(long)]
        per_template: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Validate template files against the taxonomy and a lexicon.
    ValidateTemplates {
        #[arg(long)]
        templates: Vec<PathBuf>,
        #[arg(long)]
        lexicon: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum ProbeCommand {
    /// Question-removed evaluation: test on bodies only.
    Noq {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        tolerance: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Values read from the TOML config file; consulted only for flags the
/// user did not pass.
#[derive(Default)]
struct FileConfig {
    table: toml::Table,
}

impl FileConfig {
    fn load(path: Option<&Path>) -> Result<FileConfig, CliError> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::hard(format!("cannot read config {}: {e}", path.display())))?;
        let table = text
            .parse::<toml::Table>()
            .map_err(|e| CliError::hard(format!("bad config {}: {e}", path.display())))?;
        Ok(FileConfig { table })
    }

    fn get(&self, key: &str) -> Option<&toml::Value> {
        self.table.get(key)
    }

    fn string(&self, key: &str) -> Option<String> {
        self.get(key).and_then(|v| v.as_str()).map(str::to_string)
    }

    fn path(&self, key: &str) -> Option<PathBuf> {
        self.string(key).map(PathBuf::from)
    }

    fn u64(&self, key: &str) -> Option<u64> {
        self.get(key).and_then(|v| v.as_integer()).map(|v| v as u64)
    }

    fn usize(&self, key: &str) -> Option<usize> {
        self.u64(key).map(|v| v as usize)
    }

    fn f64(&self, key: &str) -> Option<f64> {
        self.get(key).and_then(|v| v.as_float())
    }

    fn bool(&self, key: &str) -> Option<bool> {
        self.get(key).and_then(|v| v.as_bool())
    }
}

/// Subcommand failure, tagged with the intended exit code.
#[derive(Debug)]
pub struct CliError {
    pub message: String,
    pub code: i32,
}

impl CliError {
    fn hard(message: impl Into<String>) -> CliError {
        CliError {
            message: message.into(),
            code: 2,
        }
    }

    fn warnings(message: impl Into<String>) -> CliError {
        CliError {
            message: message.into(),
            code: 1,
        }
    }
}

impl<E: std::error::Error> From<E> for CliError {
    fn from(e: E) -> CliError {
        CliError::hard(e.to_string())
    }
}

/// Parse and run `argv`; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders --help/--version as "errors" with exit code 0
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let config = FileConfig::load(cli.config.as_deref())?;
    let jobs = cli.jobs.or_else(|| config.usize("jobs"));
    if let Some(n) = jobs {
        // ignore failure: the global pool can only be initialized once
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global();
    }
    let strict = cli.strict || config.bool("strict").unwrap_or(false);
    match cli.command {
        Command::Ingest { corpus, out } => cmd_ingest(&config, corpus, out, strict),
        Command::Stats {
            corpus,
            format,
            cld,
            canonicalize,
            out,
        } => cmd_stats(&config, corpus, format, cld, canonicalize, out),
        Command::Folds {
            corpus,
            folds,
            seed,
            out,
        } => cmd_folds(&config, corpus, folds, seed, out),
        Command::Train {
            corpus,
            variant,
            folds,
            val_corpus,
            seed,
            epochs,
            batch_size,
            embedding_size,
            hidden_size,
            layers,
            dropout,
            learning_rate,
            tolerance,
            out,
        } => cmd_train(
            &config,
            corpus,
            TrainFlags {
                variant,
                folds,
                val_corpus,
                seed,
                epochs,
                batch_size,
                embedding_size,
                hidden_size,
                layers,
                dropout,
                learning_rate,
                tolerance,
                out,
            },
        ),
        Command::Eval {
            corpus,
            model,
            tolerance,
            format,
            out,
        } => cmd_eval(&config, corpus, model, tolerance, format, out),
        Command::Probe(ProbeCommand::Noq {
            corpus,
            model,
            tolerance,
            out,
        }) => cmd_probe_noq(&config, corpus, model, tolerance, out),
        Command::Partition {
            corpus,
            noq_report,
            full_report,
            out,
        } => cmd_partition(&config, corpus, noq_report, full_report, out),
        Command::Attn {
            corpus,
            model,
            id,
            format,
            out,
        } => cmd_attn(&config, corpus, model, id, format, out),
        Command::Delta {
            corpus,
            report,
            label,
            out,
        } => cmd_delta(&config, corpus, report, label, out),
        Command::Breakdown {
            corpus,
            report,
            format,
            out,
        } => cmd_breakdown(&config, corpus, report, format, out),
        Command::Generate {
            templates,
            lexicon,
            per_template,
            seed,
            out,
        } => cmd_generate(&config, templates, lexicon, per_template, seed, out, strict),
        Command::ValidateTemplates { templates, lexicon } => {
            cmd_validate_templates(&config, templates, lexicon, strict)
        }
    }
}

fn required<T>(value: Option<T>, flag: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::hard(format!("missing required --{flag} (flag or config)")))
}

fn load_corpus(config: &FileConfig, args: &CorpusArgs) -> Result<Corpus, CliError> {
    let path = required(
        args.corpus.clone().or_else(|| config.path("corpus")),
        "corpus",
    )?;
    Ok(ingest(&path, args.source_format)?)
}

fn emit(out: Option<&Path>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => {
            if let Some(parent) = path.parent() {
                if !parent.as_os_str().is_empty() {
                    fs::create_dir_all(parent)?;
                }
            }
            fs::write(path, content)?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(content.as_bytes())?;
        }
    }
    Ok(())
}

fn json_line(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

fn parse_fold_scheme(spec: &str, seed: u64) -> Result<FoldScheme, CliError> {
    match spec {
        "equal-five" => Ok(FoldScheme::EqualFive { seed }),
        "seed-grouped" => Ok(FoldScheme::SeedGroupedFive { seed }),
        other => match other.strip_prefix("fixed:") {
            Some(sizes) => {
                let parsed: Result<Vec<usize>, _> =
                    sizes.split(',').map(|s| s.trim().parse()).collect();
                match parsed {
                    Ok(v) if !v.is_empty() => Ok(FoldScheme::FixedSizes(v)),
                    _ => Err(CliError::hard(format!("bad fold sizes in {spec:?}"))),
                }
            }
            None => Err(CliError::hard(format!(
                "unknown fold scheme {spec:?}; expected equal-five, seed-grouped, or fixed:<a,b,...>"
            ))),
        },
    }
}

fn parse_tolerance(flag: Option<String>, config: &FileConfig) -> Result<Num, CliError> {
    let text = flag.or_else(|| config.string("tolerance"));
    match text {
        None => Ok(metrics::default_tolerance()),
        Some(t) => parse_decimal(&t)
            .ok_or_else(|| CliError::hard(format!("bad --tolerance value {t:?}"))),
    }
}

fn load_report(path: &Path) -> Result<EvalReport, CliError> {
    let text = fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    Ok(EvalReport::from_json(&value)?)
}

fn load_model(config: &FileConfig, flag: Option<PathBuf>) -> Result<Model, CliError> {
    let path = required(flag.or_else(|| config.path("model")), "model")?;
    Ok(neural::load_snapshot(&path)?)
}

fn fold_set(
    config: &FileConfig,
    corpus: &Corpus,
    spec: Option<String>,
    seed: u64,
) -> Result<Option<FoldSet>, CliError> {
    let spec = spec.or_else(|| config.string("folds"));
    match spec {
        None => Ok(None),
        Some(s) => {
            let scheme = parse_fold_scheme(&s, seed)?;
            Ok(Some(make_folds(corpus, &scheme)?))
        }
    }
}

fn cmd_ingest(
    config: &FileConfig,
    corpus_args: CorpusArgs,
    out: Option<PathBuf>,
    strict: bool,
) -> Result<(), CliError> {
    let corpus = load_corpus(config, &corpus_args)?;
    for w in &corpus.provenance.warnings {
        eprintln!("warning: {}: {}", w.problem_id, w.message);
    }
    let content = corpus::write_native_jsonl(&corpus);
    let out = out.or_else(|| config.path("out")).or_else(|| {
        std::env::var_os("MWP_CACHE_DIR")
            .map(|dir| PathBuf::from(dir).join(format!("{}.native.jsonl", corpus.name)))
    });
    emit(out.as_deref(), &content)?;
    if strict && !corpus.provenance.warnings.is_empty() {
        return Err(CliError::warnings(format!(
            "{} ingest warnings",
            corpus.provenance.warnings.len()
        )));
    }
    Ok(())
}

fn cmd_stats(
    config: &FileConfig,
    corpus_args: CorpusArgs,
    format: OutFormat,
    cld: bool,
    canonicalize: bool,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let corpus = load_corpus(config, &corpus_args)?;
    let cld = cld || config.bool("cld").unwrap_or(false);
    let canonicalize = canonicalize || config.bool("canonicalize").unwrap_or(false);
    let stats = template_stats(&corpus, canonicalize);
    let diversity = cld.then(|| lexical_diversity(&corpus, &DiversityParams::default()));
    let out = out.or_else(|| config.path("out"));
    let content = match format {
        OutFormat::Md => {
            render_stats_markdown(&[(corpus.name.clone(), stats, diversity)])
        }
        OutFormat::Json => json_line(&json!({
            "dataset": corpus.name,
            "stats": stats,
            "diversity": diversity,
        })),
        OutFormat::Csv => {
            let cld_cell = diversity
                .as_ref()
                .map(|d| format!("{:.4}", d.cld))
                .unwrap_or_default();
            format!(
                "dataset,problems,templates,avg_operators,cld\n{},{},{},{:.4},{}\n",
                corpus.name,
                stats.problem_count,
                stats.distinct_templates,
                stats.avg_operators,
                cld_cell
            )
        }
    };
    emit(out.as_deref(), &content)
}

fn fold_set_json(set: &FoldSet) -> serde_json::Value {
    json!({
        "scheme": set.scheme,
        "folds": set
            .folds
            .iter()
            .map(|f| json!({"train": f.train, "test": f.test}))
            .collect::<Vec<_>>(),
    })
}

fn cmd_folds(
    config: &FileConfig,
    corpus_args: CorpusArgs,
    folds: Option<String>,
    seed: Option<u64>,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let corpus = load_corpus(config, &corpus_args)?;
    let seed = seed.or_else(|| config.u64("seed")).unwrap_or(0);
    let spec = required(folds.or_else(|| config.string("folds")), "folds")?;
    let scheme = parse_fold_scheme(&spec, seed)?;
    let set = make_folds(&corpus, &scheme)?;
    emit(
        out.or_else(|| config.path("out")).as_deref(),
        &json_line(&fold_set_json(&set)),
    )
}

struct TrainFlags {
    variant: Option<Variant>,
    folds: Option<String>,
    val_corpus: Option<PathBuf>,
    seed: Option<u64>,
    epochs: Option<usize>,
    batch_size: Option<usize>,
    embedding_size: Option<usize>,
    hidden_size: Option<usize>,
    layers: Option<usize>,
    dropout: Option<f64>,
    learning_rate: Option<f64>,
    tolerance: Option<String>,
    out: Option<PathBuf>,
}

fn model_config(config: &FileConfig, flags: &TrainFlags) -> Result<ModelConfig, CliError> {
    let variant = flags
        .variant
        .or_else(|| match config.string("variant").as_deref() {
            Some("constrained") => Some(Variant::Constrained),
            Some("seq2seq") => Some(Variant::Seq2Seq),
            _ => None,
        });
    let variant = required(variant, "variant")?;
    let seed = flags.seed.or_else(|| config.u64("seed")).unwrap_or(0);
    let mut cfg = match variant {
        Variant::Constrained => ModelConfig::constrained_default(seed),
        Variant::Seq2Seq => ModelConfig::seq2seq_default(seed),
    };
    if let Some(v) = flags.epochs.or_else(|| config.usize("epochs")) {
        cfg.epochs = v;
    }
    if let Some(v) = flags.batch_size.or_else(|| config.usize("batch-size")) {
        cfg.batch_size = v;
    }
    if let Some(v) = flags
        .embedding_size
        .or_else(|| config.usize("embedding-size"))
    {
        cfg.embedding_size = v;
    }
    if let Some(v) = flags.hidden_size.or_else(|| config.usize("hidden-size")) {
        cfg.hidden_size = v;
    }
    if let Some(v) = flags.layers.or_else(|| config.usize("layers")) {
        cfg.layers = v;
    }
    if let Some(v) = flags.dropout.or_else(|| config.f64("dropout")) {
        cfg.dropout = v;
    }
    if let Some(v) = flags
        .learning_rate
        .or_else(|| config.f64("learning-rate"))
    {
        cfg.learning_rate = v;
    }
    Ok(cfg)
}

fn cmd_train(
    config: &FileConfig,
    corpus_args: CorpusArgs,
    flags: TrainFlags,
) -> Result<(), CliError> {
    use rayon::prelude::*;
    let corpus = load_corpus(config, &corpus_args)?;
    let cfg = model_config(config, &flags)?;
    let tolerance = parse_tolerance(flags.tolerance.clone(), config)?;
    let out_dir = required(flags.out.clone().or_else(|| config.path("out")), "out")?;
    fs::create_dir_all(&out_dir)?;
    let folds = fold_set(config, &corpus, flags.folds.clone(), cfg.seed)?;
    match folds {
        None => {
            let val = match flags
                .val_corpus
                .clone()
                .or_else(|| config.path("val-corpus"))
            {
                Some(path) => ingest(&path, corpus_args.source_format)?,
                None => corpus.clone(),
            };
            let outcome = neural::train(cfg, &corpus, &val, &tolerance)?;
            neural::save_snapshot(&outcome.model, &out_dir.join("model.mwps"))?;
            emit(
                Some(&out_dir.join("train_log.csv")),
                &neural::log_to_csv(&outcome.model.log),
            )?;
            let predictions = neural::predict_corpus(&outcome.model, &val);
            let report = execution_accuracy(&predictions, &val, &tolerance)?;
            emit(
                Some(&out_dir.join("report.json")),
                &json_line(&report.to_json()),
            )?;
            println!(
                "trained {}: best epoch {}, validation accuracy {:.4}",
                out_dir.join("model.mwps").display(),
                outcome.best_epoch,
                outcome.best_val_accuracy
            );
        }
        Some(set) => {
            let results: Vec<Result<(usize, EvalReport), CliError>> = set
                .folds
                .par_iter()
                .enumerate()
                .map(|(i, fold)| {
                    let train_ids: HashSet<String> = fold.train.iter().cloned().collect();
                    let test_ids: HashSet<String> = fold.test.iter().cloned().collect();
                    let train_c = corpus.subset(&train_ids);
                    let test_c = corpus.subset(&test_ids);
                    let mut fold_cfg = cfg.clone();
                    fold_cfg.seed = cfg.seed.wrapping_add(i as u64);
                    let outcome = neural::train(fold_cfg, &train_c, &test_c, &tolerance)
                        .map_err(CliError::from)?;
                    neural::save_snapshot(
                        &outcome.model,
                        &out_dir.join(format!("model_fold{i}.mwps")),
                    )?;
                    emit(
                        Some(&out_dir.join(format!("train_log_fold{i}.csv"))),
                        &neural::log_to_csv(&outcome.model.log),
                    )?;
                    let predictions = neural::predict_corpus(&outcome.model, &test_c);
                    let report = execution_accuracy(&predictions, &test_c, &tolerance)
                        .map_err(CliError::from)?;
                    Ok((i, report))
                })
                .collect();
            let mut reports = Vec::new();
            for r in results {
                reports.push(r?);
            }
            reports.sort_by_key(|(i, _)| *i);
            let merged = EvalReport::merge(reports.into_iter().map(|(_, r)| r));
            emit(
                Some(&out_dir.join("report.json")),
                &json_line(&merged.to_json()),
            )?;
            println!(
                "cross-validation accuracy {:.4} over {} problems",
                merged.accuracy(),
                merged.len()
            );
        }
    }
    Ok(())
}

fn report_content(report: &EvalReport, format: OutFormat) -> String {
    match format {
        OutFormat::Json => json_line(&report.to_json()),
        OutFormat::Md => format!(
            "| Problems | Correct | Accuracy |\n|---|---|---|\n| {} | {} | {:.4} |\n",
            report.len(),
            report.correct_count(),
            report.accuracy()
        ),
        OutFormat::Csv => format!(
            "problems,correct,accuracy\n{},{},{:.6}\n",
            report.len(),
            report.correct_count(),
            report.accuracy()
        ),
    }
}

fn cmd_eval(
    config: &FileConfig,
    corpus_args: CorpusArgs,
    model: Option<PathBuf>,
    tolerance: Option<String>,
    format: OutFormat,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let corpus = load_corpus(config, &corpus_args)?;
    let model = load_model(config, model)?;
    let tolerance = parse_tolerance(tolerance, config)?;
    let predictions = neural::predict_corpus(&model, &corpus);
    let report = execution_accuracy(&predictions, &corpus, &tolerance)?;
    emit(
        out.or_else(|| config.path("out")).as_deref(),
        &report_content(&report, format),
    )
}

fn cmd_probe_noq(
    config: &FileConfig,
    corpus_args: CorpusArgs,
    model: Option<PathBuf>,
    tolerance: Option<String>,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let corpus = load_corpus(config, &corpus_args)?;
    let model = load_model(config, model)?;
    let tolerance = parse_tolerance(tolerance, config)?;
    let full_predictions = neural::predict_corpus(&model, &corpus);
    let full = execution_accuracy(&full_predictions, &corpus, &tolerance)?;
    let noq_corpus = probes::remove_questions(&corpus);
    let noq_predictions = neural::predict_corpus(&model, &noq_corpus);
    let noq = execution_accuracy(&noq_predictions, &noq_corpus, &tolerance)?;
    let (easy, hard) = probes::easy_hard_partition(&noq, &noq_corpus)?;
    let partition = probes::partition_report(&full, &easy, &hard)?;
    let payload = json!({
        "corpus": corpus.name,
        "full_accuracy": full.accuracy(),
        "noq_accuracy": noq.accuracy(),
        "easy": easy.iter().collect::<Vec<_>>(),
        "hard": hard.iter().collect::<Vec<_>>(),
        "easy_accuracy_on_full": partition.easy_accuracy_f64(),
        "hard_accuracy_on_full": partition.hard_accuracy_f64(),
        "full_report": full.to_json(),
        "noq_report": noq.to_json(),
    });
    emit(out.or_else(|| config.path("out")).as_deref(), &json_line(&payload))
}

fn cmd_partition(
    config: &FileConfig,
    corpus_args: CorpusArgs,
    noq_report: Option<PathBuf>,
    full_report: Option<PathBuf>,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let corpus = load_corpus(config, &corpus_args)?;
    let noq_path = required(
        noq_report.or_else(|| config.path("noq-report")),
        "noq-report",
    )?;
    let noq = load_report(&noq_path)?;
    let (easy, hard) = probes::easy_hard_partition(&noq, &corpus)?;
    let mut payload = json!({
        "corpus": corpus.name,
        "easy": easy.iter().collect::<Vec<_>>(),
        "hard": hard.iter().collect::<Vec<_>>(),
        "easy_count": easy.len(),
        "hard_count": hard.len(),
    });
    if let Some(path) = full_report.or_else(|| config.path("full-report")) {
        let full = load_report(&path)?;
        let part = probes::partition_report(&full, &easy, &hard)?;
        payload["easy_accuracy"] = json!(part.easy_accuracy_f64());
        payload["hard_accuracy"] = json!(part.hard_accuracy_f64());
        payload["overall_accuracy"] = json!(full.accuracy());
    }
    emit(out.or_else(|| config.path("out")).as_deref(), &json_line(&payload))
}

fn cmd_attn(
    config: &FileConfig,
    corpus_args: CorpusArgs,
    model: Option<PathBuf>,
    id: Option<String>,
    format: OutFormat,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let corpus = load_corpus(config, &corpus_args)?;
    let model = load_model(config, model)?;
    let id = id.or_else(|| config.string("id"));
    let problem = match id {
        Some(id) => corpus
            .get(&id)
            .ok_or_else(|| CliError::hard(format!("no problem with id {id:?}")))?,
        None => corpus
            .problems
            .first()
            .ok_or_else(|| CliError::hard("empty corpus"))?,
    };
    let report = probes::attention_report(&model, problem);
    let content = match format {
        OutFormat::Json => json_line(&report.to_json()),
        OutFormat::Md | OutFormat::Csv => report.render_text(),
    };
    emit(out.or_else(|| config.path("out")).as_deref(), &content)
}

fn cmd_delta(
    config: &FileConfig,
    corpus_args: CorpusArgs,
    report: Option<PathBuf>,
    label: Option<String>,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let corpus = load_corpus(config, &corpus_args)?;
    let report_path = required(report.or_else(|| config.path("report")), "report")?;
    let report = load_report(&report_path)?;
    let label = required(label.or_else(|| config.string("label")), "label")?;
    // match the exact type label or a whole category, case-insensitively
    let needle = label.to_lowercase();
    let delta = metrics::ablation_delta_by(&report, &corpus, &label, |chain_label| {
        chain_label.to_lowercase() == needle
            || genesis::variation_category(chain_label)
                .map(|c| c.to_lowercase() == needle)
                .unwrap_or(false)
    })?;
    emit(
        out.or_else(|| config.path("out")).as_deref(),
        &json_line(&serde_json::to_value(&delta).expect("delta serializes")),
    )
}

fn cmd_breakdown(
    config: &FileConfig,
    corpus_args: CorpusArgs,
    report: Option<PathBuf>,
    format: OutFormat,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let corpus = load_corpus(config, &corpus_args)?;
    let report_path = required(report.or_else(|| config.path("report")), "report")?;
    let report = load_report(&report_path)?;
    let buckets = breakdown_by_num_count(&report, &corpus)?;
    let content = match format {
        OutFormat::Json => {
            let rows: BTreeMap<String, serde_json::Value> = buckets
                .iter()
                .map(|(k, (c, t))| {
                    (
                        k.clone(),
                        json!({"correct": c, "total": t, "accuracy": *c as f64 / (*t).max(1) as f64}),
                    )
                })
                .collect();
            json_line(&json!(rows))
        }
        OutFormat::Md => {
            let mut s = String::from("| Numbers | Correct | Total | Accuracy |\n|---|---|---|---|\n");
            for (k, (c, t)) in &buckets {
                s.push_str(&format!(
                    "| {k} | {c} | {t} | {:.4} |\n",
                    *c as f64 / (*t).max(1) as f64
                ));
            }
            s
        }
        OutFormat::Csv => {
            let mut s = String::from("bucket,correct,total,accuracy\n");
            for (k, (c, t)) in &buckets {
                s.push_str(&format!(
                    "{k},{c},{t},{:.6}\n",
                    *c as f64 / (*t).max(1) as f64
                ));
            }
            s
        }
    };
    emit(out.or_else(|| config.path("out")).as_deref(), &content)
}

fn load_templates(
    config: &FileConfig,
    paths: Vec<PathBuf>,
) -> Result<Vec<VariationTemplate>, CliError> {
    let mut paths = paths;
    if paths.is_empty() {
        if let Some(p) = config.path("templates") {
            paths.push(p);
        }
    }
    if paths.is_empty() {
        return Err(CliError::hard("missing required --templates (flag or config)"));
    }
    let mut templates = Vec::new();
    for path in paths {
        let text = fs::read_to_string(&path)
            .map_err(|e| CliError::hard(format!("cannot read {}: {e}", path.display())))?;
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "template".to_string());
        templates.extend(parse_template_file(&text, &stem)?);
    }
    Ok(templates)
}

fn load_lexicon(config: &FileConfig, flag: Option<PathBuf>) -> Result<Lexicon, CliError> {
    let path = required(flag.or_else(|| config.path("lexicon")), "lexicon")?;
    let text = fs::read_to_string(&path)
        .map_err(|e| CliError::hard(format!("cannot read {}: {e}", path.display())))?;
    Ok(Lexicon::from_json_str(&text)?)
}

fn cmd_generate(
    config: &FileConfig,
    templates: Vec<PathBuf>,
    lexicon: Option<PathBuf>,
    per_template: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    strict: bool,
) -> Result<(), CliError> {
    let templates = load_templates(config, templates)?;
    let lexicon = load_lexicon(config, lexicon)?;
    let per_template = per_template
        .or_else(|| config.usize("per-template"))
        .unwrap_or(50);
    let seed = seed.or_else(|| config.u64("seed")).unwrap_or(0);
    let (corpus, failures) = genesis::generate(
        &templates,
        &lexicon,
        per_template,
        seed,
        &Constraints::default(),
    )?;
    for f in &failures {
        eprintln!("warning: template {}: {}", f.template_id, f.error);
    }
    emit(
        out.or_else(|| config.path("out")).as_deref(),
        &corpus::write_native_jsonl(&corpus),
    )?;
    eprintln!(
        "generated {} problems from {} templates ({} failures)",
        corpus.len(),
        templates.len(),
        failures.len()
    );
    if strict && !failures.is_empty() {
        return Err(CliError::warnings(format!(
            "{} instantiation failures",
            failures.len()
        )));
    }
    Ok(())
}

fn cmd_validate_templates(
    config: &FileConfig,
    templates: Vec<PathBuf>,
    lexicon: Option<PathBuf>,
    strict: bool,
) -> Result<(), CliError> {
    let templates = load_templates(config, templates)?;
    let lexicon = load_lexicon(config, lexicon)?;
    let mut total = 0usize;
    for t in &templates {
        let diags = validate_template(t, &lexicon);
        for d in &diags {
            println!("{}: {}", t.id, d);
        }
        total += diags.len();
    }
    println!("{} templates, {} diagnostics", templates.len(), total);
    if strict && total > 0 {
        return Err(CliError::warnings(format!("{total} template diagnostics")));
    }
    Ok(())
}

/// Majority-template 5-fold cross-validation accuracy, shared by the
/// library's consumers and integration tests.
pub fn majority_cv(
    corpus: &Corpus,
    scheme: &FoldScheme,
    tolerance: &Num,
) -> Result<EvalReport, CliError> {
    let set = make_folds(corpus, scheme)?;
    let mut reports = Vec::new();
    for fold in &set.folds {
        let train_ids: HashSet<String> = fold.train.iter().cloned().collect();
        let test_ids: HashSet<String> = fold.test.iter().cloned().collect();
        let train_c = corpus.subset(&train_ids);
        let test_c = corpus.subset(&test_ids);
        let predictions = majority_template_predict(&train_c, &test_c)?;
        reports.push(execution_accuracy(&predictions, &test_c, tolerance)?);
    }
    Ok(EvalReport::merge(reports))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fold_scheme_strings_parse() {
        assert!(matches!(
            parse_fold_scheme("equal-five", 3),
            Ok(FoldScheme::EqualFive { seed: 3 })
        ));
        assert!(matches!(
            parse_fold_scheme("seed-grouped", 1),
            Ok(FoldScheme::SeedGroupedFive { seed: 1 })
        ));
        match parse_fold_scheme("fixed:238,238,238,238,266", 0) {
            Ok(FoldScheme::FixedSizes(sizes)) => {
                assert_eq!(sizes, vec![238, 238, 238, 238, 266])
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_fold_scheme("three-fold", 0).is_err());
        assert!(parse_fold_scheme("fixed:a,b", 0).is_err());
    }

    #[test]
    fn help_exits_zero_and_unknown_flag_fails() {
        assert_eq!(run(["mwp", "--help"]), 0);
        assert_eq!(run(["mwp", "stats", "--help"]), 0);
        assert_eq!(run(["mwp", "--definitely-not-a-flag"]), 2);
        assert_eq!(run(["mwp", "stats"]), 2); // missing --corpus
    }
}
