//! `morphdec`: compile, simulate, decode, analyze, evaluate, run.

mod evaluate;
mod files;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use morphdec_core::corpus::{self, GoldLine};
use morphdec_core::decoder::{decode_with, parse_observation_records};
use morphdec_core::lexicon::{BUNDLED_LEXICON, BUNDLED_MORPH_MATRIX, BUNDLED_PHON_MATRIX, BUNDLED_TAGS};
use morphdec_core::phonology::BUNDLED_INVENTORY;
use morphdec_core::{eval, pipeline, Model, ModelSources, RunConfig};

use evaluate::Unit;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    NoAnalysis(usize),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::NoAnalysis(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::NoAnalysis(n) => write!(f, "no analysis for {n} record(s)"),
        }
    }
}

macro_rules! data_errors {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Data(e.to_string())
            }
        }
    )*};
}

data_errors!(morphdec_core::Error, morphdec_core::ConfigError, morphdec_core::CorpusError, morphdec_core::DecodeError);

#[derive(Parser)]
#[command(name = "morphdec", version, about = "Morpheme-level decoding of noisy diphone streams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a lexicon and grammar and write a compiled index directory.
    Compile(CompileArgs),
    /// Corrupt the diphone streams of a gold corpus.
    Simulate(SimulateArgs),
    /// Spot morpheme candidates in observation streams.
    Decode(DecodeArgs),
    /// Rank morphological analyses of observation streams.
    Analyze(AnalyzeArgs),
    /// Score hypotheses against gold with correct/delete/insert counts.
    Evaluate(EvaluateArgs),
    /// Simulate, decode, analyze and evaluate in one pass.
    Run(RunArgs),
}

#[derive(Args)]
struct CompileArgs {
    /// Lexicon file (bundled when omitted).
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Diphone inventory file (bundled when omitted).
    #[arg(long)]
    inventory: Option<PathBuf>,
    #[arg(long)]
    tags: Option<PathBuf>,
    /// Morpheme connectivity matrix.
    #[arg(long)]
    morph: Option<PathBuf>,
    /// Phoneme connectivity matrix.
    #[arg(long)]
    phon: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ModelArgs {
    /// Compiled index directory (bundled model when omitted).
    #[arg(long)]
    index: Option<PathBuf>,
    /// Directory with morph.tsv and phon.tsv replacing the index's matrices.
    #[arg(long)]
    matrices: Option<PathBuf>,
}

/// Settings shared by every stage; flags override `--config` and `--set`.
#[derive(Args, Default)]
struct Settings {
    /// Flat key=value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Any configuration key, as key=value; may repeat.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    /// on or off.
    #[arg(long)]
    prune: Option<String>,
    /// Analyses kept per table cell, or `none`.
    #[arg(long)]
    cap: Option<String>,
    /// viterbi or exact.
    #[arg(long)]
    search: Option<String>,
    #[arg(long)]
    jobs: Option<String>,
}

#[derive(Args, Default)]
struct NoiseArgs {
    /// Named rate set: paper-fig10 or zero.
    #[arg(long)]
    preset: Option<String>,
    /// Deletion, substitution and insertion rates as del,sub,ins.
    #[arg(long, conflicts_with = "preset")]
    rates: Option<String>,
    /// Multiplies all three rates.
    #[arg(long)]
    noise_scale: Option<String>,
    /// uniform or same-vowel-group.
    #[arg(long)]
    confusion: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Repeat each diphone min..=max times, or `off`.
    #[arg(long = "frame-mode", value_name = "MIN,MAX")]
    frame: Option<String>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Gold corpus (bundled when omitted).
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[command(flatten)]
    noise: NoiseArgs,
    #[command(flatten)]
    settings: Settings,
    #[arg(long)]
    index: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DecodeArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    obs: PathBuf,
    /// Print every candidate, not only per-eonjeol counts.
    #[arg(long)]
    dump_lattice: bool,
    #[command(flatten)]
    settings: Settings,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    obs: PathBuf,
    /// Add per-morpheme spans and tags.
    #[arg(long)]
    verbose: bool,
    /// Analyses printed per eonjeol.
    #[arg(long)]
    topk: Option<String>,
    /// Exit with status 4 when any eonjeol has no analysis.
    #[arg(long)]
    strict: bool,
    #[command(flatten)]
    settings: Settings,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    gold: PathBuf,
    #[arg(long)]
    hyp: PathBuf,
    #[arg(long, value_enum)]
    unit: Unit,
    /// Machine-readable output.
    #[arg(long)]
    json: bool,
    /// Index whose inventory transcribes gold text.
    #[arg(long)]
    index: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[command(flatten)]
    noise: NoiseArgs,
    #[command(flatten)]
    settings: Settings,
    #[arg(long)]
    topk: Option<String>,
    #[arg(long)]
    verbose: bool,
    #[arg(long)]
    strict: bool,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

fn set(cfg: &mut RunConfig, key: &str, value: &str) -> Result<(), CliError> {
    cfg.set(key, value).map_err(|e| CliError::Usage(e.to_string()))
}

impl Settings {
    fn apply(&self, cfg: &mut RunConfig) -> Result<(), CliError> {
        for kv in &self.set {
            let (k, v) = kv.split_once('=').ok_or_else(|| CliError::Usage(format!("--set expects key=value, got {kv:?}")))?;
            set(cfg, k.trim(), v.trim())?;
        }
        let flags = [
            ("alpha", &self.alpha),
            ("beta", &self.beta),
            ("prune", &self.prune),
            ("cap", &self.cap),
            ("search", &self.search),
            ("jobs", &self.jobs),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                set(cfg, k, v)?;
            }
        }
        Ok(())
    }

    fn load(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::parse(&files::read(p)?)?,
            None => RunConfig::default(),
        };
        self.apply(&mut cfg)?;
        Ok(cfg)
    }
}

impl NoiseArgs {
    fn apply(&self, cfg: &mut RunConfig) -> Result<(), CliError> {
        if let Some(p) = &self.preset {
            set(cfg, "preset", p)?;
        }
        if let Some(r) = &self.rates {
            let parts: Vec<&str> = r.split(',').map(str::trim).collect();
            let [d, s, i] = parts[..] else {
                return Err(CliError::Usage(format!("--rates expects del,sub,ins, got {r:?}")));
            };
            set(cfg, "del_rate", d)?;
            set(cfg, "sub_rate", s)?;
            set(cfg, "ins_rate", i)?;
        }
        let flags = [("noise_scale", &self.noise_scale), ("confusion", &self.confusion), ("seed", &self.seed), ("frame", &self.frame)];
        for (k, v) in flags {
            if let Some(v) = v {
                set(cfg, k, v)?;
            }
        }
        Ok(())
    }
}

fn gold_lines(path: Option<&Path>) -> Result<Vec<GoldLine>, CliError> {
    match path {
        Some(p) => Ok(corpus::parse_gold(&files::read(p)?)?),
        None => Ok(corpus::bundled_gold()),
    }
}

fn checked(cfg: &RunConfig, model: &Model) -> Result<(), CliError> {
    cfg.validate(model.phonology.inventory.len()).map_err(|e| CliError::Usage(e.to_string()))
}

fn compile(a: &CompileArgs) -> Result<(), CliError> {
    let pick = |p: &Option<PathBuf>, bundled: &str| -> Result<String, CliError> {
        match p {
            Some(p) => files::read(p),
            None => Ok(bundled.to_string()),
        }
    };
    let src = ModelSources {
        inventory: pick(&a.inventory, BUNDLED_INVENTORY)?,
        tags: pick(&a.tags, BUNDLED_TAGS)?,
        morph: pick(&a.morph, BUNDLED_MORPH_MATRIX)?,
        phon: pick(&a.phon, BUNDLED_PHON_MATRIX)?,
        lexicon: pick(&a.lexicon, BUNDLED_LEXICON)?,
    };
    let model = Model::from_sources(&src)?;
    files::write_dir_atomic(&a.out, &files::model_dir_files(&src, &model))?;
    for line in model.diagnostics() {
        eprintln!("{line}");
    }
    Ok(())
}

fn simulate(a: &SimulateArgs) -> Result<(), CliError> {
    let mut cfg = a.settings.load()?;
    a.noise.apply(&mut cfg)?;
    let model = files::load_model(a.index.as_deref(), None)?;
    checked(&cfg, &model)?;
    let corpus_path = a.corpus.clone().or_else(|| cfg.corpus.clone());
    let gold = corpus::to_records(&gold_lines(corpus_path.as_deref())?, &model.phonology)?;
    let inv = &model.phonology.inventory;
    let decoded = gold
        .iter()
        .enumerate()
        .map(|(i, r)| pipeline::simulate_record(inv, i, r, &cfg).map(|(_, d)| d))
        .collect::<Result<Vec<_>, _>>()?;
    files::emit(a.out.as_deref(), &pipeline::observations_text(decoded.iter().map(Option::as_ref), inv, &cfg))
}

fn decode(a: &DecodeArgs) -> Result<(), CliError> {
    let cfg = a.settings.load()?;
    let model = files::load_model(a.model.index.as_deref(), a.model.matrices.as_deref())?;
    checked(&cfg, &model)?;
    let params = cfg.hmm_params(model.phonology.inventory.len())?;
    let records = parse_observation_records(&files::read(&a.obs)?, &model.phonology.inventory)?;
    let mut out = String::new();
    for (n, rec) in records.iter().enumerate() {
        let Some(obs) = rec else {
            let _ = writeln!(out, "# eonjeol {}: empty", n + 1);
            continue;
        };
        let lattice = decode_with(cfg.search, obs, &model.index, &params, &cfg.prune)?;
        let _ = writeln!(out, "# eonjeol {}: {} candidates", n + 1, lattice.num_candidates());
        if a.dump_lattice {
            out.push_str(&lattice.dump(&model.lexicon));
        }
    }
    files::emit(a.out.as_deref(), &out)
}

fn analyze(a: &AnalyzeArgs) -> Result<(), CliError> {
    let mut cfg = a.settings.load()?;
    if let Some(k) = &a.topk {
        set(&mut cfg, "top_k", k)?;
    }
    let model = files::load_model(a.model.index.as_deref(), a.model.matrices.as_deref())?;
    checked(&cfg, &model)?;
    let acfg = cfg.analyzer_config(model.phonology.inventory.len())?;
    let records = parse_observation_records(&files::read(&a.obs)?, &model.phonology.inventory)?;
    let outputs = pipeline::analyze_records(&model, &records, &acfg, cfg.jobs)?;
    files::emit(a.out.as_deref(), &pipeline::format_analyses(outputs.iter().map(Vec::as_slice), &model, a.verbose))?;
    let missing = outputs.iter().filter(|o| o.is_empty()).count();
    if a.strict && missing > 0 {
        return Err(CliError::NoAnalysis(missing));
    }
    Ok(())
}

fn evaluate(a: &EvaluateArgs) -> Result<(), CliError> {
    let model = files::load_model(a.index.as_deref(), None)?;
    let counts = evaluate::count(a.unit, &files::read(&a.gold)?, &files::read(&a.hyp)?, &model.phonology)?;
    let rows = [(a.unit.name(), counts)];
    let text = if a.json { eval::format_json(&rows) } else { eval::format_table(&rows) };
    files::emit(a.out.as_deref(), &text)
}

fn run(a: &RunArgs) -> Result<(), CliError> {
    let mut cfg = a.settings.load()?;
    a.noise.apply(&mut cfg)?;
    if let Some(k) = &a.topk {
        set(&mut cfg, "top_k", k)?;
    }
    if let Some(c) = &a.corpus {
        cfg.corpus = Some(c.clone());
    }
    let model = files::load_model(a.model.index.as_deref(), a.model.matrices.as_deref())?;
    checked(&cfg, &model)?;
    let gold = corpus::to_records(&gold_lines(cfg.corpus.as_deref())?, &model.phonology)?;
    let report = pipeline::run(&model, &gold, &cfg)?;
    let table = report.eval_table();
    std::fs::create_dir_all(&a.out).map_err(|e| CliError::Data(format!("{}: {e}", a.out.display())))?;
    let outputs = [
        ("config.txt", cfg.to_text()),
        ("observations.txt", report.observations_text(&model)),
        ("analyses.txt", report.analyses_text(&model, a.verbose)),
        ("eval.txt", table.clone()),
        ("eval.json", report.eval_json()),
    ];
    for (name, body) in &outputs {
        files::write_atomic(&a.out.join(name), body)?;
    }
    print!("{table}");
    if a.strict && report.no_analysis > 0 {
        return Err(CliError::NoAnalysis(report.no_analysis));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Compile(a) => compile(a),
        Command::Simulate(a) => simulate(a),
        Command::Decode(a) => decode(a),
        Command::Analyze(a) => analyze(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Run(a) => run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("morphdec: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
