//! `trendlab` command line.
//!
//! Exit codes: 0 success, 2 data error, 64 usage error, 65 configuration or
//! span error. JSON goes to standard output; bulk CSV goes to files when an
//! output path is given.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::Error;
use crate::generate::{generate_network, NetworkConfig};
use crate::graph::{DegreeHistory, Time};
use crate::harness::{
    plot_csv, plot_rows, run_protocol, run_sweep, NoveltyReference, PredictorSpec, ProtocolConfig,
    SweepAxis, SweepSpec, ThirdsBasis,
};
use crate::ingest::{self, DatasetSpec, Format};
use crate::metrics::{top_n, AucMode};
use crate::predictors::{self, PredictorKind, PredictorParams};
use crate::synthetic::{gain_experiment, GainExperimentConfig, Population, DEFAULT_POPULATION};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_CONFIG: i32 = 65;

pub const THREADS_ENV: &str = "TRENDLAB_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "trendlab",
    version,
    about = "Predict rising nodes of evolving networks"
)]
struct Cli {
    /// Log progress to standard error.
    #[arg(long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Convert a raw dataset into the canonical event file.
    Ingest(IngestArgs),
    /// Score every eligible node with one predictor.
    Score(ScoreArgs),
    /// Run the evaluation protocol.
    Evaluate(EvaluateArgs),
    /// Run the protocol over a range of window lengths.
    Sweep(SweepArgs),
    /// Random-gain experiment for the dominance models.
    Synth(SynthArgs),
    /// Generate a seeded preferential-attachment network with bursts.
    Generate(GenerateArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum FormatArg {
    Rating,
    Wallpost,
    Citation,
    Canonical,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Rating => Format::Rating,
            FormatArg::Wallpost => Format::Wallpost,
            FormatArg::Citation => Format::Citation,
            FormatArg::Canonical => Format::Canonical,
        }
    }
}

#[derive(Debug, Args)]
struct IngestArgs {
    #[arg(long, value_enum)]
    format: FormatArg,
    /// Input file(s); several files are concatenated.
    #[arg(long = "in", required = true, num_args = 1..)]
    inputs: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Paper dates file (citation only).
    #[arg(long)]
    dates: Option<PathBuf>,
    /// Unix day mapped to time 0.
    #[arg(long, default_value_t = 0)]
    origin_day: i64,
    /// Year whose January is month 0 (citation).
    #[arg(long, default_value_t = 1993)]
    origin_year: i32,
    /// Prefix for source ids (defaults to `u:` for ratings, empty otherwise).
    #[arg(long)]
    source_prefix: Option<String>,
    #[arg(long, default_value_t = 0.01)]
    max_malformed: f64,
    #[arg(long, default_value_t = 0.05)]
    max_undated: f64,
}

/// Dataset parameter presets.
#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Preset {
    Movielens,
    Netflix,
    Facebook,
    Citation,
}

impl Preset {
    /// (gamma, teleport, window length)
    fn values(self) -> (f64, f64, Time) {
        match self {
            Preset::Movielens | Preset::Netflix => (0.06, 0.9, 30),
            Preset::Facebook => (0.03, 0.6, 30),
            Preset::Citation => (0.03, 0.9, 40),
        }
    }
}

#[derive(Debug, Args)]
struct ParamArgs {
    #[arg(long)]
    preset: Option<Preset>,
    /// PBP recency weight [default: 0.98]
    #[arg(long)]
    lambda: Option<f64>,
    /// Decay rate per time unit for TBP and RBNDM [default: 0.06]
    #[arg(long)]
    gamma: Option<f64>,
    /// PageRank link-following probability [default: 0.9]
    #[arg(long)]
    teleport: Option<f64>,
    #[arg(long, default_value_t = 1e-12)]
    pagerank_tol: f64,
    #[arg(long, default_value_t = 1000)]
    pagerank_max_iters: usize,
}

impl ParamArgs {
    fn resolve(&self) -> PredictorParams {
        let d = PredictorParams::default();
        let (pg, pt, _) = self
            .preset
            .map(Preset::values)
            .unwrap_or((d.gamma, d.teleport, 30));
        PredictorParams {
            lambda: self.lambda.unwrap_or(d.lambda),
            gamma: self.gamma.unwrap_or(pg),
            teleport: self.teleport.unwrap_or(pt),
            pagerank_tol: self.pagerank_tol,
            pagerank_max_iters: self.pagerank_max_iters,
        }
    }

    fn window(&self) -> Time {
        self.preset.map(|p| p.values().2).unwrap_or(30)
    }
}

fn parse_predictor(s: &str) -> Result<PredictorKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .filter(|x| !x.trim().is_empty())
        .map(|x| x.trim().parse::<T>().map_err(|e| format!("`{x}`: {e}")))
        .collect()
}

fn parse_predictor_list(s: &str) -> Result<Vec<PredictorKind>, String> {
    parse_list::<PredictorKind>(s)
}

fn parse_usize_list(s: &str) -> Result<Vec<usize>, String> {
    parse_list::<usize>(s)
}

fn parse_time_list(s: &str) -> Result<Vec<Time>, String> {
    parse_list::<Time>(s)
}

#[derive(Debug, Args)]
struct ScoreArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_parser = parse_predictor)]
    predictor: PredictorKind,
    #[arg(long)]
    t: Time,
    /// Past window length [default: 30, or the preset's]
    #[arg(long)]
    tp: Option<Time>,
    #[command(flatten)]
    params: ParamArgs,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum AucModeArg {
    Classwise,
    Literal,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ThirdsArg {
    Time,
    Events,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum NoveltyArg {
    Degree,
    Recent,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[arg(long)]
    data: PathBuf,
    /// Past window length [default: 30, or the preset's]
    #[arg(long)]
    tp: Option<Time>,
    /// Future window length [default: 30, or the preset's]
    #[arg(long)]
    tf: Option<Time>,
    #[arg(long, default_value_t = 10)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_parser = parse_usize_list, default_value = "50,100,200")]
    topn: std::vec::Vec<usize>,
    #[arg(long, value_parser = parse_predictor_list, default_value = "indegree,pagerank,pbp,tbp,rbdm,rbndm")]
    predictors: std::vec::Vec<PredictorKind>,
    #[arg(long, value_enum, default_value_t = AucModeArg::Classwise)]
    auc_mode: AucModeArg,
    /// Measure the sampling thirds on the time axis or by event count.
    #[arg(long, value_enum, default_value_t = ThirdsArg::Time)]
    thirds: ThirdsArg,
    /// Ranking that defines the past top-n for novelty.
    #[arg(long, value_enum, default_value_t = NoveltyArg::Degree)]
    novelty_reference: NoveltyArg,
    #[command(flatten)]
    params: ParamArgs,
    /// Write the plot table CSV here.
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum AxisArg {
    Tf,
    Joint,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long, value_enum)]
    axis: AxisArg,
    #[arg(long, value_parser = parse_time_list)]
    values: std::vec::Vec<Time>,
    #[command(flatten)]
    eval: EvaluateArgs,
    /// Write the sweep table CSV here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, value_parser = parse_usize_list, default_value = "10,20,50,100,200,500,1000")]
    sizes: std::vec::Vec<usize>,
    #[arg(long, default_value_t = DEFAULT_POPULATION)]
    population: u64,
    /// Use a population of n*n for system size n.
    #[arg(long, conflicts_with = "population")]
    population_squared: bool,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    bins: usize,
    /// Directory for tau_curves.csv, tau_trials.csv and distributions.csv.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 2000)]
    nodes: usize,
    #[arg(long, default_value_t = 50_000)]
    events: usize,
    #[arg(long, default_value_t = 300)]
    span: Time,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

/// Provenance embedded in every JSON report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub flags: BTreeMap<String, Value>,
    pub seed: Option<u64>,
    pub inputs: Vec<InputDigest>,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

fn digest_file(path: &Path) -> Result<InputDigest, Failure> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let hash = Sha256::digest(&bytes);
    Ok(InputDigest {
        path: path.display().to_string(),
        sha256: hash.iter().map(|b| format!("{b:02x}")).collect(),
    })
}

impl RunManifest {
    fn new(
        command: &str,
        seed: Option<u64>,
        inputs: &[&Path],
        flags: Value,
    ) -> Result<Self, Failure> {
        let flags = match flags {
            Value::Object(m) => m.into_iter().collect(),
            _ => BTreeMap::new(),
        };
        Ok(RunManifest {
            command: command.to_string(),
            flags,
            seed,
            inputs: inputs
                .iter()
                .map(|p| digest_file(p))
                .collect::<Result<_, _>>()?,
            version: env!("CARGO_PKG_VERSION").to_string(),
        })
    }
}

/// A command failure with its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn config(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::OutOfSpan { .. }
            | Error::SpanTooSmall { .. }
            | Error::NoEligibleNodes(_)
            | Error::InvalidParameter(_)
            | Error::NotConverged { .. } => EXIT_CONFIG,
            _ => EXIT_DATA,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Error::io(path, e).into())
}

fn emit_json(out: &mut dyn Write, value: &impl Serialize) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(Error::from)?;
    writeln!(out, "{text}").map_err(|e| Error::io("<stdout>", e).into())
}

fn emit_text(out: &mut dyn Write, text: &str) -> Result<(), Failure> {
    out.write_all(text.as_bytes())
        .map_err(|e| Error::io("<stdout>", e).into())
}

fn load_history(path: &Path) -> Result<DegreeHistory, Failure> {
    let events = ingest::read_canonical(path)?;
    log::info!("loaded {} events from {}", events.len(), path.display());
    Ok(DegreeHistory::build(&events)?)
}

fn cmd_ingest(a: &IngestArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let mut spec = DatasetSpec::new(a.format.into());
    spec.origin_day = a.origin_day;
    spec.origin_year = a.origin_year;
    spec.max_malformed = a.max_malformed;
    spec.max_undated = a.max_undated;
    if let Some(p) = &a.source_prefix {
        spec.source_prefix = p.clone();
    }
    if spec.format == Format::Citation && a.dates.is_none() {
        return Err(Failure::usage("--dates is required for --format citation"));
    }
    let texts: Vec<String> = a
        .inputs
        .iter()
        .map(ingest::read_to_string)
        .collect::<Result<_, _>>()?;
    let dates = a.dates.as_ref().map(ingest::read_to_string).transpose()?;
    let parsed = ingest::parse(&spec, &texts, dates.as_deref())?;
    ingest::write_canonical(&a.out, &parsed.events)?;

    let mut input_paths: Vec<&Path> = a.inputs.iter().map(PathBuf::as_path).collect();
    if let Some(d) = &a.dates {
        input_paths.push(d);
    }
    let manifest = RunManifest::new(
        "ingest",
        None,
        &input_paths,
        json!({ "format": a.format, "origin_day": a.origin_day, "origin_year": a.origin_year,
                "source_prefix": spec.source_prefix, "max_malformed": a.max_malformed,
                "max_undated": a.max_undated }),
    )?;
    emit_json(
        out,
        &json!({ "manifest": manifest, "report": parsed.report }),
    )
}

fn cmd_score(a: &ScoreArgs, out: &mut dyn Write) -> Result<(), Failure> {
    if a.predictor == PredictorKind::Oracle {
        return Err(Failure::usage(
            "the oracle is only available inside evaluate",
        ));
    }
    let h = load_history(&a.data)?;
    if a.t < h.t_min() || a.t > h.t_max() {
        return Err(Error::OutOfSpan {
            t: a.t,
            t_min: h.t_min(),
            t_max: h.t_max(),
        }
        .into());
    }
    let params = a.params.resolve();
    let tp = a.tp.unwrap_or_else(|| a.params.window());
    let sv = predictors::score(&h, a.predictor, a.t, tp, &params)?;
    let ranked = top_n(&sv.scores, sv.len());
    let mut csv = String::from("node,score\n");
    for (node, s) in ranked.entries {
        csv.push_str(h.name(node));
        csv.push(',');
        csv.push_str(&s.to_string());
        csv.push('\n');
    }
    match &a.out {
        Some(p) => write_file(p, &csv),
        None => emit_text(out, &csv),
    }
}

fn protocol_config(a: &EvaluateArgs) -> Result<ProtocolConfig, Failure> {
    let params = a.params.resolve();
    params.validate()?;
    let window = a.params.window();
    let cfg = ProtocolConfig {
        sample_count: a.samples,
        seed: a.seed,
        tp: a.tp.unwrap_or(window),
        tf: a.tf.unwrap_or(window),
        n_values: a.topn.clone(),
        predictors: a
            .predictors
            .iter()
            .map(|&k| PredictorSpec::new(k, params))
            .collect(),
        auc_mode: match a.auc_mode {
            AucModeArg::Classwise => AucMode::Classwise,
            AucModeArg::Literal => AucMode::Literal,
        },
        thirds: match a.thirds {
            ThirdsArg::Time => ThirdsBasis::Time,
            ThirdsArg::Events => ThirdsBasis::Events,
        },
        novelty_reference: match a.novelty_reference {
            NoveltyArg::Degree => NoveltyReference::Degree,
            NoveltyArg::Recent => NoveltyReference::Recent,
        },
    };
    if cfg.predictors.is_empty() {
        return Err(Failure::usage(
            "--predictors must name at least one predictor",
        ));
    }
    cfg.validate().map_err(|e| Failure::config(e.to_string()))?;
    Ok(cfg)
}

fn protocol_flags(cfg: &ProtocolConfig, a: &EvaluateArgs) -> Value {
    json!({
        "data": a.data.display().to_string(),
        "tp": cfg.tp,
        "tf": cfg.tf,
        "samples": cfg.sample_count,
        "seed": cfg.seed,
        "topn": cfg.n_values,
        "predictors": cfg.predictors.iter().map(|p| p.kind).collect::<Vec<_>>(),
        "params": cfg.predictors.first().map(|p| p.params),
        "auc_mode": cfg.auc_mode,
        "thirds": cfg.thirds,
        "novelty_reference": cfg.novelty_reference,
    })
}

fn cmd_evaluate(a: &EvaluateArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let cfg = protocol_config(a)?;
    let h = load_history(&a.data)?;
    let report = run_protocol(&h, &cfg)?;
    if let Some(p) = &a.plot {
        write_file(p, &plot_csv(&plot_rows(&report, cfg.tf)))?;
    }
    let manifest = RunManifest::new(
        "evaluate",
        Some(cfg.seed),
        &[&a.data],
        protocol_flags(&cfg, a),
    )?;
    emit_json(out, &json!({ "manifest": manifest, "report": report }))
}

fn cmd_sweep(a: &SweepArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let cfg = protocol_config(&a.eval)?;
    let sweep = SweepSpec {
        axis: match a.axis {
            AxisArg::Tf => SweepAxis::FutureOnly,
            AxisArg::Joint => SweepAxis::JointPastFuture,
        },
        values: a.values.clone(),
    };
    sweep
        .validate()
        .map_err(|e| Failure::config(e.to_string()))?;
    let h = load_history(&a.eval.data)?;
    let rows = run_sweep(&h, &cfg, &sweep)?;
    let table: Vec<_> = rows
        .iter()
        .flat_map(|r| plot_rows(&r.report, r.value))
        .collect();
    let csv = plot_csv(&table);
    if let Some(p) = &a.eval.plot {
        write_file(p, &csv)?;
    }
    match &a.out {
        Some(p) => {
            write_file(p, &csv)?;
            let mut flags = protocol_flags(&cfg, &a.eval);
            flags["axis"] = json!(sweep.axis.to_string());
            flags["values"] = json!(sweep.values);
            let manifest = RunManifest::new("sweep", Some(cfg.seed), &[&a.eval.data], flags)?;
            emit_json(out, &json!({ "manifest": manifest, "sweep": rows }))
        }
        None => emit_text(out, &csv),
    }
}

fn cmd_synth(a: &SynthArgs, out: &mut dyn Write) -> Result<(), Failure> {
    if let Some(&s) = a.sizes.iter().find(|&&s| s < 2) {
        return Err(Failure::usage(format!(
            "system sizes must be >= 2, got {s}"
        )));
    }
    if a.sizes.is_empty() || a.trials == 0 || a.bins == 0 {
        return Err(Failure::usage(
            "--sizes, --trials and --bins must be nonempty/positive",
        ));
    }
    let cfg = GainExperimentConfig {
        sizes: a.sizes.clone(),
        population: if a.population_squared {
            Population::Squared
        } else {
            Population::Fixed(a.population)
        },
        trials: a.trials,
        seed: a.seed,
        bins: a.bins,
    };
    let result = gain_experiment(&cfg)?;
    fs::create_dir_all(&a.out_dir).map_err(|e| Error::io(&a.out_dir, e))?;
    write_file(&a.out_dir.join("tau_curves.csv"), &result.curves_csv())?;
    write_file(&a.out_dir.join("tau_trials.csv"), &result.tau_csv())?;
    write_file(
        &a.out_dir.join("distributions.csv"),
        &result.distributions_csv(),
    )?;
    let manifest = RunManifest::new(
        "synth",
        Some(a.seed),
        &[],
        json!({ "sizes": cfg.sizes, "population": cfg.population, "trials": cfg.trials,
                "bins": cfg.bins }),
    )?;
    emit_json(
        out,
        &json!({
            "manifest": manifest,
            "curves": result.curves(),
            "separation_rate": result.separation_rate(),
            "dominance_rate": result.dominance_rate(),
        }),
    )
}

fn cmd_generate(a: &GenerateArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let cfg = NetworkConfig {
        nodes: a.nodes,
        events: a.events,
        span: a.span,
        seed: a.seed,
        initial_nodes: NetworkConfig::default().initial_nodes.min(a.nodes),
        ..NetworkConfig::default()
    };
    let events = generate_network(&cfg).map_err(|e| Failure::usage(e.to_string()))?;
    ingest::write_canonical(&a.out, &events)?;
    let manifest = RunManifest::new(
        "generate",
        Some(a.seed),
        &[],
        serde_json::to_value(&cfg).map_err(Error::from)?,
    )?;
    emit_json(
        out,
        &json!({ "manifest": manifest, "events": events.len() }),
    )
}

fn configure_threads() {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return;
    };
    match raw.trim().parse::<usize>() {
        Ok(n) if n > 0 => {
            // A pool may already exist when called twice in one process.
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
        _ => log::warn!("ignoring {THREADS_ENV}={raw:?}"),
    }
}

/// Parses `args` (including the program name) and runs the command,
/// writing results to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    let _ = env_logger::Builder::new()
        .filter_level(if cli.verbose {
            log::LevelFilter::Info
        } else {
            log::LevelFilter::Warn
        })
        .target(env_logger::Target::Stderr)
        .try_init();
    configure_threads();

    let result = match &cli.command {
        Command::Ingest(a) => cmd_ingest(a, out),
        Command::Score(a) => cmd_score(a, out),
        Command::Evaluate(a) => cmd_evaluate(a, out),
        Command::Sweep(a) => cmd_sweep(a, out),
        Command::Synth(a) => cmd_synth(a, out),
        Command::Generate(a) => cmd_generate(a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
