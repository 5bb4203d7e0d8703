//! Command-line surface: `ingest`, `classify`, `score`, `eval`.
//!
//! Settings resolve as command-line flag, then `--config` TOML file, then
//! built-in default.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, DatasetPaths};
use crate::error::Error;
use crate::evalx::{self, EvalReport, QueryRecord, DEFAULT_KS};
use crate::knowledge::Relatedness;
use crate::scoring::{
    classify_words, Aggregator, CnScorer, ConditionalEstimator, ScoreConfig, Scorer,
    ScorerRegistry,
};
use crate::snapshot;
use crate::text::tokenize;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Data(#[from] Error),
}

impl CliError {
    /// 1 for usage errors, 2 for data and parse errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(Error::UnknownScorer(_) | Error::Config(_)) => 1,
            CliError::Data(_) => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Toggle {
    On,
    Off,
}

#[derive(Debug, Parser)]
#[command(name = "cnret", version, about = "Knowledge-augmented sentence-to-image retrieval scoring")]
pub struct Cli {
    #[command(flatten)]
    pub opts: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Default)]
pub struct GlobalOpts {
    /// TOML file with default settings and input paths.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// min, max, mean-arithmetic (mean_a) or mean-geometric (mean_g).
    #[arg(long, global = true)]
    pub aggregator: Option<Aggregator>,
    /// graph or corpus.
    #[arg(long, global = true)]
    pub relatedness: Option<Relatedness>,
    /// corpus, constant-one or graph-weight.
    #[arg(long, global = true)]
    pub estimator: Option<ConditionalEstimator>,
    #[arg(long, global = true)]
    pub min_weight: Option<f64>,
    /// Only nouns may be CN-detectable.
    #[arg(long, global = true)]
    pub noun_only: bool,
    #[arg(long, global = true, value_enum)]
    pub stopwords: Option<Toggle>,
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub output: Option<OutputFormat>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse the text inputs and write a binary snapshot.
    Ingest {
        #[arg(long)]
        detectors: Option<PathBuf>,
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        word_classes: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Show how each query word is detected.
    Classify {
        #[arg(long)]
        snapshot: Option<PathBuf>,
        query: String,
    },
    /// Rank the images for one query.
    Score {
        #[arg(long)]
        snapshot: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        top_k: i64,
        query: String,
    },
    /// Evaluate scorers on a query file.
    Eval {
        #[arg(long)]
        snapshot: Option<PathBuf>,
        #[arg(long)]
        queries: Option<PathBuf>,
        /// Comma-separated scorer names, e.g. MIL,MILSTEM,CN_MAX.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        scorers: Vec<String>,
    },
}

/// Contents of the `--config` file. Every key is optional.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub aggregator: Option<Aggregator>,
    pub relatedness: Option<Relatedness>,
    pub conditional_estimator: Option<ConditionalEstimator>,
    pub min_weight: Option<f64>,
    pub noun_only: Option<bool>,
    pub stopword_filter: Option<bool>,
    pub clamp_epsilon: Option<f64>,
    pub jobs: Option<usize>,
    pub output: Option<OutputFormat>,
    pub snapshot: Option<PathBuf>,
    pub detectors: Option<PathBuf>,
    pub graph: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub word_classes: Option<PathBuf>,
    pub queries: Option<PathBuf>,
    pub scorers: Option<Vec<String>>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text)
            .map_err(|e| CliError::Data(Error::Config(format!("{}: {e}", path.display()))))
    }
}

/// Fully resolved settings for one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub score: ScoreConfig,
    pub jobs: usize,
    pub output: OutputFormat,
    pub file: FileConfig,
}

impl RunConfig {
    pub fn resolve(opts: &GlobalOpts) -> Result<Self, CliError> {
        let file = match &opts.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let d = ScoreConfig::default();
        let score = ScoreConfig {
            aggregator: opts.aggregator.or(file.aggregator).unwrap_or(d.aggregator),
            relatedness: opts.relatedness.or(file.relatedness).unwrap_or(d.relatedness),
            conditional_estimator: opts
                .estimator
                .or(file.conditional_estimator)
                .unwrap_or(d.conditional_estimator),
            min_weight: opts.min_weight.or(file.min_weight).unwrap_or(d.min_weight),
            noun_only: opts.noun_only || file.noun_only.unwrap_or(d.noun_only),
            stopword_filter: opts
                .stopwords
                .map(|t| t == Toggle::On)
                .or(file.stopword_filter)
                .unwrap_or(d.stopword_filter),
            clamp_epsilon: opts.epsilon.or(file.clamp_epsilon).unwrap_or(d.clamp_epsilon),
        };
        score.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        let jobs = opts.jobs.or(file.jobs).unwrap_or(1);
        if jobs == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        Ok(RunConfig {
            score,
            jobs,
            output: opts.output.or(file.output).unwrap_or(OutputFormat::Table),
            file,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IngestSummary {
    pub snapshot: PathBuf,
    pub images: usize,
    pub vocabulary: usize,
    pub edges: usize,
    pub multiword_edges: usize,
    pub same_stem_edges: usize,
    pub tagged_images: u32,
    pub word_classes: usize,
}

pub fn cmd_ingest(paths: &DatasetPaths, out: &Path) -> crate::Result<IngestSummary> {
    let ds = Dataset::load(paths)?;
    snapshot::save(&ds, out)?;
    let all = ds.graph(&ScoreConfig {
        min_weight: 0.0,
        ..ScoreConfig::default()
    });
    Ok(IngestSummary {
        snapshot: out.to_path_buf(),
        images: ds.bank.num_images(),
        vocabulary: ds.bank.vocab().len(),
        edges: ds.edges.len(),
        multiword_edges: all.stats().multiword,
        same_stem_edges: all.stats().same_stem,
        tagged_images: ds.corpus.n_images(),
        word_classes: ds.word_classes.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassifiedWord {
    pub word: String,
    pub class: String,
    pub detectors: Vec<String>,
}

pub fn cmd_classify(ds: &Dataset, config: &ScoreConfig, query: &str) -> Vec<ClassifiedWord> {
    let graph = ds.graph(config);
    let world = ds.world(&graph);
    classify_words(&tokenize(query), &world, config)
        .into_iter()
        .map(|a| ClassifiedWord {
            word: a.word,
            class: a.kind.label().to_string(),
            detectors: a.via,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoredImage {
    pub rank: usize,
    pub image: String,
    pub score: f64,
    pub log_score: f64,
}

/// Top `top_k` images by CN score under `config`.
pub fn cmd_score(
    ds: &Dataset,
    config: &ScoreConfig,
    query: &str,
    top_k: i64,
) -> Result<Vec<ScoredImage>, CliError> {
    if top_k < 1 {
        return Err(CliError::Usage(format!("--top-k must be at least 1, got {top_k}")));
    }
    let graph = ds.graph(config);
    let world = ds.world(&graph);
    let scorer = CnScorer::new("CN", config.clone());
    let scores = scorer.log_scores(&tokenize(query), &world);
    Ok(evalx::rank_images(ds.bank.images(), &scores)
        .into_iter()
        .take(top_k as usize)
        .enumerate()
        .map(|(i, (image, log_score))| ScoredImage {
            rank: i + 1,
            image: image.to_string(),
            score: log_score.exp(),
            log_score,
        })
        .collect())
}

/// One report per scorer, in the order given.
pub fn cmd_eval(
    ds: &Dataset,
    config: &ScoreConfig,
    records: &[QueryRecord],
    scorers: &[String],
    jobs: usize,
) -> Result<Vec<EvalReport>, CliError> {
    if scorers.is_empty() {
        return Err(CliError::Usage("--scorers needs at least one scorer name".into()));
    }
    let registry = ScorerRegistry::builtin();
    let built = scorers
        .iter()
        .map(|name| registry.create(name, config))
        .collect::<crate::Result<Vec<_>>>()?;
    let graph = ds.graph(config);
    let world = ds.world(&graph);
    let reports = built
        .iter()
        .map(|s| evalx::evaluate_scorer(s.as_ref(), &world, records, &DEFAULT_KS, jobs))
        .collect::<crate::Result<Vec<_>>>()?;
    Ok(reports)
}

fn need<'a>(flag: Option<&'a PathBuf>, file: Option<&'a PathBuf>, name: &str) -> Result<&'a PathBuf, CliError> {
    flag.or(file)
        .ok_or_else(|| CliError::Usage(format!("missing --{name} (flag or config file)")))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output types serialize");
    s.push('\n');
    s
}

fn load_queries(path: &Path) -> crate::Result<Vec<QueryRecord>> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    evalx::read_queries_jsonl(BufReader::new(f), &path.display().to_string())
}

/// Parses `args` (including the program name) and runs the command,
/// returning what should be printed on stdout.
pub fn run<I, T>(args: I) -> Result<String, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => return Ok(e.to_string()),
        Err(e) => return Err(CliError::Usage(e.to_string())),
    };
    let rc = RunConfig::resolve(&cli.opts)?;
    let file = &rc.file;
    let json = rc.output == OutputFormat::Json;

    match &cli.command {
        Command::Ingest {
            detectors,
            graph,
            corpus,
            word_classes,
            out,
        } => {
            let det = need(detectors.as_ref(), file.detectors.as_ref(), "detectors")?;
            let out = need(out.as_ref(), file.snapshot.as_ref(), "out")?;
            let paths = DatasetPaths {
                detectors: Some(det),
                graph: graph.as_ref().or(file.graph.as_ref()).map(PathBuf::as_path),
                corpus: corpus.as_ref().or(file.corpus.as_ref()).map(PathBuf::as_path),
                word_classes: word_classes
                    .as_ref()
                    .or(file.word_classes.as_ref())
                    .map(PathBuf::as_path),
            };
            let s = cmd_ingest(&paths, out)?;
            if json {
                return Ok(to_json(&s));
            }
            Ok(format!(
                "wrote {}: {} images, {} detector words, {} edges ({} multi-word, {} same-stem), {} tagged images, {} word classes\n",
                s.snapshot.display(),
                s.images,
                s.vocabulary,
                s.edges,
                s.multiword_edges,
                s.same_stem_edges,
                s.tagged_images,
                s.word_classes
            ))
        }
        Command::Classify { snapshot: snap, query } => {
            let ds = snapshot::load(need(snap.as_ref(), file.snapshot.as_ref(), "snapshot")?)?;
            let words = cmd_classify(&ds, &rc.score, query);
            if json {
                return Ok(to_json(&words));
            }
            let w = words.iter().map(|c| c.word.len()).max().unwrap_or(0).max(4);
            let mut out = String::new();
            for c in &words {
                let _ = writeln!(
                    out,
                    "{:<w$}  {:<10}  {}",
                    c.word,
                    c.class,
                    c.detectors.join(", ")
                );
            }
            Ok(out)
        }
        Command::Score {
            snapshot: snap,
            top_k,
            query,
        } => {
            if *top_k < 1 {
                return Err(CliError::Usage(format!("--top-k must be at least 1, got {top_k}")));
            }
            let ds = snapshot::load(need(snap.as_ref(), file.snapshot.as_ref(), "snapshot")?)?;
            let ranked = cmd_score(&ds, &rc.score, query, *top_k)?;
            if json {
                return Ok(to_json(&ranked));
            }
            let w = ranked.iter().map(|r| r.image.len()).max().unwrap_or(5).max(5);
            let mut out = format!("{:>4}  {:<w$}  {:>12}  {:>12}\n", "rank", "image", "score", "log score");
            for r in &ranked {
                let _ = writeln!(
                    out,
                    "{:>4}  {:<w$}  {:>12.6e}  {:>12.6}",
                    r.rank, r.image, r.score, r.log_score
                );
            }
            Ok(out)
        }
        Command::Eval {
            snapshot: snap,
            queries,
            scorers,
        } => {
            let scorers = if scorers.is_empty() {
                file.scorers.clone().unwrap_or_default()
            } else {
                scorers.clone()
            };
            if scorers.is_empty() {
                return Err(CliError::Usage("--scorers needs at least one scorer name".into()));
            }
            let registry = ScorerRegistry::builtin();
            if let Some(bad) = scorers.iter().find(|s| !registry.contains(s.trim())) {
                return Err(CliError::Usage(format!(
                    "unknown scorer `{bad}`; known: {}",
                    registry.names().collect::<Vec<_>>().join(", ")
                )));
            }
            let ds = snapshot::load(need(snap.as_ref(), file.snapshot.as_ref(), "snapshot")?)?;
            let records = load_queries(need(queries.as_ref(), file.queries.as_ref(), "queries")?)?;
            let reports = cmd_eval(&ds, &rc.score, &records, &scorers, rc.jobs)?;
            if json {
                return Ok(to_json(&reports));
            }
            Ok(evalx::format_table(&reports))
        }
    }
}
