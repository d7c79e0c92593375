//! Command-line interface.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use epimark_core::ece::EceBinning;
use epimark_core::extract::{Lexicon, NoModel, StrategyKind};
use epimark_core::figures::MarkerSelection;
use epimark_core::ingest::{prepare_dataset, DatasetId, DatasetSpec};
use epimark_core::metrics::EvaluationConfig;
use epimark_core::report::ReportBundle;
use epimark_core::synth::{generate_synthetic, SyntheticProfile};
use epimark_core::PromptMode;
use serde::Serialize;
use serde_json::json;

use crate::adapters::load_raw;
use crate::config::FileConfig;
use crate::elicit::{Cache, Client, ClientConfig, ElicitError, EndpointExtractor, OfflineTransport, ReqwestTransport, Transport};
use crate::emit::{emit_figures, emit_report, Format};
use crate::error::Error;
use crate::jsonl::{read_items, read_json, read_records, write_items, write_json, write_records};
use crate::pipeline::{extract_all, load_records_dir, train_tables, ExtractFailure, ItemIndex};
use crate::run_dir::RunDir;

#[derive(Debug, Parser)]
#[command(name = "epimark", version, about = "Marker-confidence analysis of LLM answers")]
pub struct Cli {
    /// Seed for sampling, distractors, synthetic data and marker selection.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Run directory with items/, raw/, records/, tables/ and reports/.
    #[arg(long, global = true)]
    pub run_dir: Option<PathBuf>,
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Turn a raw benchmark file into train/test item files.
    Prepare(PrepareArgs),
    /// Collect raw model responses for an item file.
    Generate(GenerateArgs),
    /// Extract answers, markers and numeric confidences from raw responses.
    Extract(ExtractArgs),
    /// Compute the metric report from extracted records.
    Metrics(MetricsArgs),
    /// Render CSV tables and figure data from a report.
    Report(ReportArgs),
    /// Write a synthetic record log with planted marker accuracies.
    Synth(SynthArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct PrepareArgs {
    #[arg(long, value_parser = parse_dataset)]
    pub dataset: DatasetId,
    /// Source file (or MMLU directory of CSVs).
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Separate evaluation source, where the dataset has one.
    #[arg(long)]
    pub test_in: Option<PathBuf>,
    /// Output directory; defaults to <run-dir>/items/<dataset>.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, requires = "test_n")]
    pub train_n: Option<usize>,
    #[arg(long, requires = "train_n")]
    pub test_n: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Marker,
    Numeric,
}

impl From<ModeArg> for PromptMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Marker => PromptMode::Marker,
            ModeArg::Numeric => PromptMode::Numeric,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct EndpointArgs {
    #[arg(long)]
    pub endpoint: Option<String>,
    #[arg(long)]
    pub temperature: Option<f64>,
    #[arg(long)]
    pub max_tokens: Option<u32>,
    #[arg(long)]
    pub max_inflight: Option<usize>,
    /// Completion cache; defaults to <run-dir>/raw/cache.
    #[arg(long)]
    pub cache: Option<PathBuf>,
    /// Serve from the cache only; a miss is an endpoint error.
    #[arg(long)]
    pub offline: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct GenerateArgs {
    #[arg(long)]
    pub items: PathBuf,
    #[arg(long, value_enum)]
    pub mode: ModeArg,
    #[arg(long)]
    pub model: Option<String>,
    /// Defaults to <run-dir>/raw/<model>/<dataset>.<split>.<mode>.jsonl.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub endpoint: EndpointArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct ExtractArgs {
    #[arg(long)]
    pub raw: PathBuf,
    /// Item files the raw records refer to; repeatable.
    #[arg(long, required = true, num_args = 1..)]
    pub items: Vec<PathBuf>,
    #[arg(long, value_parser = parse_strategy)]
    pub strategy: Option<StrategyKind>,
    /// Hedging lexicon file; the built-in one is used otherwise.
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    #[arg(long)]
    pub extractor_model: Option<String>,
    /// Defaults to <run-dir>/records/<name of --raw>.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub endpoint: EndpointArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct MetricsArgs {
    /// Defaults to <run-dir>/records.
    #[arg(long)]
    pub records_dir: Option<PathBuf>,
    #[arg(long)]
    pub threshold: Option<u64>,
    /// Thresholds for the robustness sweep, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub thresholds: Option<Vec<u64>>,
    #[arg(long)]
    pub include_none_marker: bool,
    /// per_prediction, per_value or fixed:B.
    #[arg(long, value_parser = parse_bins)]
    pub ece_bins: Option<EceBinning>,
    #[arg(long)]
    pub coverage_floor: Option<f64>,
    /// Defaults to <run-dir>/reports/report.json.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ReportArgs {
    /// Report written by `metrics`; defaults to <run-dir>/reports/report.json.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Records for figure data; defaults to <run-dir>/records when present.
    #[arg(long)]
    pub records_dir: Option<PathBuf>,
    /// Defaults to the directory of the report.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Heatmap markers: all, shared or random:K (seeded).
    #[arg(long, default_value = "shared")]
    pub heatmap: String,
}

#[derive(Debug, Args, Serialize)]
pub struct SynthArgs {
    /// JSON or TOML profile; the reference profile is used otherwise.
    #[arg(long)]
    pub profile: Option<PathBuf>,
    #[arg(long)]
    pub n_records: Option<usize>,
    /// Per-dataset accuracy shifts, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub shifts: Option<Vec<f64>>,
    /// Also emit numeric-mode test records.
    #[arg(long)]
    pub numeric: bool,
    /// Defaults to <run-dir>/records/synthetic.jsonl.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Defaults to <run-dir>/items/synthetic.jsonl.
    #[arg(long)]
    pub items_out: Option<PathBuf>,
}

fn parse_dataset(s: &str) -> Result<DatasetId, String> {
    s.parse().map_err(|e: epimark_core::Error| e.to_string())
}

fn parse_strategy(s: &str) -> Result<StrategyKind, String> {
    s.parse()
}

fn parse_bins(s: &str) -> Result<EceBinning, String> {
    s.parse()
}

/// A command failure and the exit code it maps to.
#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Data(#[from] Error),
    #[error(transparent)]
    Endpoint(#[from] ElicitError),
}

impl From<epimark_core::Error> for Failure {
    fn from(e: epimark_core::Error) -> Self {
        Failure::Data(e.into())
    }
}

impl Failure {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Endpoint(_) => 3,
        })
    }
}

type Outcome = Result<(), Failure>;

struct Context {
    seed: u64,
    /// Seed given by flag or config file, as opposed to the default.
    explicit_seed: Option<u64>,
    run_dir: Option<RunDir>,
    file: FileConfig,
}

impl Context {
    fn default_path(&self, flag: &str, under: impl FnOnce(&RunDir) -> PathBuf) -> Result<PathBuf, Failure> {
        self.run_dir
            .as_ref()
            .map(under)
            .ok_or_else(|| Failure::Usage(format!("{flag} is required without --run-dir")))
    }

    fn record(&self, step: &str, args: &impl Serialize, outputs: &[PathBuf]) -> Outcome {
        if let Some(run) = &self.run_dir {
            let outputs: Vec<String> = outputs.iter().map(|p| relative(run.root(), p)).collect();
            run.record_step(
                step,
                json!({ "seed": self.seed, "args": args, "outputs": outputs, "config": self.file }),
            )?;
        }
        Ok(())
    }

    fn client_config(&self, model: Option<&str>, e: &EndpointArgs) -> ClientConfig {
        let mut c = self.file.client.clone();
        if let Some(m) = model {
            c.model_id = m.to_string();
        }
        if let Some(u) = &e.endpoint {
            c.endpoint_url = u.clone();
        }
        if let Some(t) = e.temperature {
            c.temperature = t;
        }
        if let Some(t) = e.max_tokens {
            c.max_tokens = t;
        }
        if let Some(n) = e.max_inflight {
            c.max_inflight = n;
        }
        c
    }

    fn client(&self, config: ClientConfig, e: &EndpointArgs) -> Result<Client<Box<dyn Transport>>, Failure> {
        config.validate().map_err(Failure::Usage)?;
        let cache = match (&e.cache, &self.run_dir) {
            (Some(p), _) => Some(Cache::new(p)),
            (None, Some(run)) => Some(Cache::new(run.cache())),
            (None, None) => None,
        };
        let transport: Box<dyn Transport> = if e.offline {
            Box::new(OfflineTransport)
        } else {
            Box::new(ReqwestTransport::new(Duration::from_secs(config.timeout_secs))?)
        };
        Ok(Client::new(config, cache, transport))
    }
}

impl Transport for Box<dyn Transport> {
    fn post_json(&self, url: &str, api_key: &str, body: &serde_json::Value) -> Result<crate::elicit::HttpReply, String> {
        (**self).post_json(url, api_key, body)
    }
}

fn relative(root: &Path, p: &Path) -> String {
    p.strip_prefix(root).unwrap_or(p).display().to_string()
}

fn file_safe(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') { c } else { '_' })
        .collect()
}

/// Runs a parsed command line.
pub fn run(cli: Cli) -> Outcome {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let explicit_seed = cli.seed.or(file.seed);
    let ctx = Context {
        seed: explicit_seed.unwrap_or(0),
        explicit_seed,
        run_dir: cli.run_dir.clone().or_else(|| file.run_dir.clone()).map(RunDir::new),
        file,
    };
    match &cli.command {
        Command::Prepare(a) => prepare(&ctx, a),
        Command::Generate(a) => generate(&ctx, a),
        Command::Extract(a) => extract(&ctx, a),
        Command::Metrics(a) => metrics(&ctx, a),
        Command::Report(a) => report(&ctx, a),
        Command::Synth(a) => synth(&ctx, a),
    }
}

/// Parses `std::env::args`, runs, and maps the outcome to an exit code.
pub fn main_with_args(args: impl IntoIterator<Item = std::ffi::OsString>) -> ExitCode {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            f.exit_code()
        }
    }
}

fn prepare(ctx: &Context, a: &PrepareArgs) -> Outcome {
    let out = match &a.out {
        Some(p) => p.clone(),
        None => ctx.default_path("--out", |r| r.items().join(a.dataset.as_str()))?,
    };
    let spec = DatasetSpec {
        dataset_id: a.dataset,
        source_path: a.input.display().to_string(),
        seed: ctx.seed,
        sample_sizes: a.train_n.zip(a.test_n),
    };
    let train_raw = load_raw(a.dataset, &a.input)?;
    let test_raw = a.test_in.as_deref().map(|p| load_raw(a.dataset, p)).transpose()?;
    let prepared = prepare_dataset(&spec, train_raw, test_raw)?;
    let (train, test) = (out.join("train.jsonl"), out.join("test.jsonl"));
    write_items(&train, &prepared.train)?;
    write_items(&test, &prepared.test)?;
    log::info!("{}: {} train / {} test items", a.dataset, prepared.train.len(), prepared.test.len());
    ctx.record(&format!("prepare:{}", a.dataset), a, &[train, test])
}

fn generate(ctx: &Context, a: &GenerateArgs) -> Outcome {
    let config = ctx.client_config(a.model.as_deref(), &a.endpoint);
    let items = read_items(&a.items)?;
    let mode = PromptMode::from(a.mode);
    let out = match (&a.out, items.first()) {
        (Some(p), _) => p.clone(),
        (None, Some(first)) => ctx.default_path("--out", |r| {
            r.raw().join(file_safe(&config.model_id)).join(format!(
                "{}.{}.{}.jsonl",
                file_safe(&first.dataset_id),
                first.split.as_str(),
                mode.as_str()
            ))
        })?,
        (None, None) => return Err(Failure::Usage("--out is required for an empty item file".into())),
    };
    let client = ctx.client(config, &a.endpoint)?;
    let records = client.generate(&items, mode)?;
    write_records(&out, &records)?;
    log::info!("{} responses, {} network calls", records.len(), client.network_calls());
    ctx.record(&format!("generate:{}", relative(ctx.run_dir.as_ref().map_or(Path::new(""), |r| r.root()), &out)), a, &[out])
}

fn extract(ctx: &Context, a: &ExtractArgs) -> Outcome {
    let strategy = a.strategy.unwrap_or(ctx.file.extract.strategy);
    let lexicon = match a.lexicon.as_ref().or(ctx.file.extract.lexicon.as_ref()) {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            Lexicon::parse(&text)?
        }
        None => Lexicon::builtin(),
    };
    let mut items = Vec::new();
    for p in &a.items {
        items.extend(read_items(p)?);
    }
    let index = ItemIndex::new(items);
    let decoded = read_records(&a.raw)?;
    if !decoded.errors.is_empty() {
        log::warn!("{} malformed raw line(s) skipped", decoded.errors.len());
    }
    let mut records = decoded.values;
    let out = match &a.out {
        Some(p) => p.clone(),
        None => {
            let name = a.raw.file_name().ok_or_else(|| Failure::Usage("--raw has no file name".into()))?;
            let model = records.first().map(|r| file_safe(&r.model_id)).unwrap_or_default();
            ctx.default_path("--out", |r| r.records().join(model).join(name))?
        }
    };
    let stats = if strategy.uses_model() {
        let model_id = a
            .extractor_model
            .clone()
            .or_else(|| ctx.file.extract.extractor_model.clone())
            .ok_or_else(|| Failure::Usage(format!("--extractor-model is required for {strategy}")))?;
        let client = ctx.client(ctx.client_config(Some(&model_id), &a.endpoint), &a.endpoint)?;
        let mut extractor = EndpointExtractor::new(&client, model_id);
        extract_all(&mut records, &index, strategy, &lexicon, Some(&mut extractor)).map_err(|e| match e {
            ExtractFailure::Data(e) => Failure::Data(e),
            ExtractFailure::Model(e) => Failure::Endpoint(e),
        })?
    } else {
        extract_all::<NoModel>(&mut records, &index, strategy, &lexicon, None).map_err(|e| match e {
            ExtractFailure::Data(e) => Failure::Data(e),
            ExtractFailure::Model(never) => match never {},
        })?
    };
    write_records(&out, &records)?;
    log::info!("{stats:?}");
    ctx.record(
        &format!("extract:{}", relative(ctx.run_dir.as_ref().map_or(Path::new(""), |r| r.root()), &out)),
        &json!({ "args": a, "lexicon_version": lexicon.version, "stats": stats }),
        &[out],
    )
}

fn evaluation_config(ctx: &Context, a: &MetricsArgs) -> EvaluationConfig {
    let mut m = ctx.file.metrics.clone();
    if let Some(t) = a.threshold {
        m.threshold = t;
    }
    if let Some(ts) = &a.thresholds {
        m.thresholds = ts.clone();
    }
    m.include_none_marker |= a.include_none_marker;
    if let Some(b) = a.ece_bins {
        m.ece_bins = b;
    }
    if let Some(f) = a.coverage_floor {
        m.coverage_floor = f;
    }
    EvaluationConfig::from(&m)
}

fn metrics(ctx: &Context, a: &MetricsArgs) -> Outcome {
    let dir = match &a.records_dir {
        Some(p) => p.clone(),
        None => ctx.default_path("--records-dir", RunDir::records)?,
    };
    let out = match &a.report {
        Some(p) => p.clone(),
        None => ctx.default_path("--report", |r| r.reports().join("report.json"))?,
    };
    let config = evaluation_config(ctx, a);
    let decoded = load_records_dir(&dir)?;
    if decoded.values.is_empty() {
        return Err(Error::Invalid(format!("no records under {}", dir.display())).into());
    }
    if !decoded.errors.is_empty() {
        log::warn!("{} malformed record line(s) skipped", decoded.errors.len());
    }
    let bundle = epimark_core::metrics::evaluate_all(&decoded.values, &config)?;
    for r in &bundle.reports {
        for w in &r.warnings {
            log::warn!("{}: {w}", r.model_id);
        }
    }
    write_json(&out, &bundle)?;
    let mut outputs = vec![out];
    if let Some(run) = &ctx.run_dir {
        for (model, tables) in train_tables(&decoded.values)? {
            for (dataset, table) in tables {
                let p = run.tables().join(file_safe(&model)).join(format!("{}.json", file_safe(&dataset)));
                write_json(&p, &table)?;
                outputs.push(p);
            }
        }
    }
    ctx.record("metrics", &json!({ "args": a, "evaluation": {
        "threshold": config.threshold,
        "sweep": config.sweep,
        "include_none_marker": config.include_none_marker,
        "ece_bins": config.binning,
        "coverage_floor": config.coverage_floor,
    }}), &outputs)
}

fn parse_selection(s: &str, seed: u64) -> Result<MarkerSelection, Failure> {
    match s {
        "all" => Ok(MarkerSelection::All),
        "shared" => Ok(MarkerSelection::Shared),
        _ => s
            .strip_prefix("random:")
            .and_then(|k| k.parse().ok())
            .map(|count| MarkerSelection::RandomShared { count, seed })
            .ok_or_else(|| Failure::Usage(format!("unknown heatmap selection `{s}` (all, shared or random:K)"))),
    }
}

fn report(ctx: &Context, a: &ReportArgs) -> Outcome {
    let selection = parse_selection(&a.heatmap, ctx.seed)?;
    let path = match &a.report {
        Some(p) => p.clone(),
        None => ctx.default_path("--report", |r| r.reports().join("report.json"))?,
    };
    let bundle: ReportBundle = read_json(&path)?;
    let out = match &a.out {
        Some(p) => p.clone(),
        None => path.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    let mut written = emit_report(&bundle, &out, &[Format::Csv])?;
    let records_dir = a
        .records_dir
        .clone()
        .or_else(|| ctx.run_dir.as_ref().map(RunDir::records).filter(|p| p.is_dir()));
    if let Some(dir) = records_dir {
        let records = load_records_dir(&dir)?.values;
        let (threshold, include_none) = bundle
            .reports
            .first()
            .map_or((ctx.file.metrics.threshold, false), |r| (r.threshold, r.include_none_marker));
        written.extend(emit_figures(
            &train_tables(&records)?,
            &records,
            &selection,
            threshold,
            include_none,
            &out,
        )?);
    }
    ctx.record("report", a, &written)
}

fn synth(ctx: &Context, a: &SynthArgs) -> Outcome {
    let mut profile = match &a.profile {
        Some(p) => load_profile(p)?,
        None => SyntheticProfile::reference(a.n_records.unwrap_or(5000), ctx.seed),
    };
    if let Some(n) = a.n_records {
        profile.n_records = n;
    }
    if let Some(s) = &a.shifts {
        profile.dataset_shifts = s.clone();
    }
    profile.numeric |= a.numeric;
    if let Some(seed) = ctx.explicit_seed {
        profile.seed = seed;
    }
    let out = match &a.out {
        Some(p) => p.clone(),
        None => ctx.default_path("--out", |r| r.records().join("synthetic.jsonl"))?,
    };
    let items_out = match &a.items_out {
        Some(p) => p.clone(),
        None => ctx.default_path("--items-out", |r| r.items().join("synthetic.jsonl"))?,
    };
    let run = generate_synthetic(&profile)?;
    write_records(&out, &run.records)?;
    write_items(&items_out, &run.items)?;
    ctx.record("synth", &json!({ "args": a, "profile": profile }), &[out, items_out])
}

fn load_profile(path: &Path) -> Result<SyntheticProfile, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let parsed = if path.extension().is_some_and(|x| x == "toml") {
        toml::from_str(&text).map_err(|e| Error::format(path, e))
    } else {
        serde_json::from_str(&text).map_err(|e| Error::format(path, e))
    };
    Ok(parsed?)
}
