//! `fcm` command line: simulation, mixing, the encode/edit/decode pipeline,
//! evaluation and rendering.
//!
//! [`run`] takes the transport as a parameter so tests can swap the network
//! out.

mod error;
mod manifest;

pub use error::{CliError, EXIT_CONTRACT, EXIT_IO, EXIT_OK, EXIT_REMOTE, EXIT_REPLAY_MISS, EXIT_SCHEMA};
pub use manifest::{LlmUsage, RunManifest, StageTiming};

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ndarray::Array2;
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use fcm_core::decoder::Decoded;
use fcm_core::fcm::trajectory_with_tol;
use fcm_core::formats::{
    export_report, read_matrix_csv, read_text, render_heatmap, write_bytes, write_matrix_csv,
    HeatmapOptions, ReportStyle,
};
use fcm_core::llm::{Transport, TranscriptCache};
use fcm_core::{
    basin_map, deterministic_decode, deterministic_encode, evaluate, find_equilibrium, llm_content_edit, llm_decode,
    llm_encode, load_fcm, mix, save_fcm, EdgeForm, EvalOptions, Fcm, HedgeTable, LatentSummary,
    LlmClient, LlmConfig, MixWeights, NegationLexicon, ProviderKind, ReconstructionReport, SquashSpec, Stage,
    StateVector,
};

#[derive(Debug, Parser)]
#[command(name = "fcm", version, about = "Fuzzy cognitive maps: simulate, mix, and round-trip through text")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Iterate a map from an initial state until it settles.
    Simulate(SimulateArgs),
    /// Equilibrium reached from every binary corner state.
    Basins(BasinsArgs),
    /// Convex combination of maps over the union of their nodes.
    Mix(MixArgs),
    /// Map to a detailed text summary.
    Encode(EncodeArgs),
    /// Rewrite a detailed summary for naturalness (needs a model).
    Edit(EditArgs),
    /// Text back to a map, with an evidence sidecar.
    Decode(DecodeArgs),
    /// Encode, optionally edit, decode, evaluate and render in one go.
    Roundtrip(RoundtripArgs),
    /// Score reconstructed maps against a target.
    Eval(EvalArgs),
    /// Heatmap of an edge matrix.
    Render(RenderArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SquashKind {
    Logistic,
    Threshold,
    ClippedLinear,
}

#[derive(Debug, Args)]
struct SquashArgs {
    #[arg(long, value_enum, default_value_t = SquashKind::Logistic)]
    squash: SquashKind,
    /// Logistic steepness.
    #[arg(long, default_value_t = 5.0)]
    steepness: f64,
    /// Threshold cutoff; output is 1 above it.
    #[arg(long, default_value_t = 0.0)]
    cutoff: f64,
    #[arg(long, default_value_t = 100)]
    max_steps: usize,
    #[arg(long, default_value_t = fcm_core::fcm::DEFAULT_TOL)]
    tol: f64,
}

impl SquashArgs {
    fn spec(&self) -> Result<SquashSpec, CliError> {
        Ok(match self.squash {
            SquashKind::Logistic => SquashSpec::logistic(self.steepness)?,
            SquashKind::Threshold => SquashSpec::threshold(self.cutoff)?,
            SquashKind::ClippedLinear => SquashSpec::ClippedLinear,
        })
    }
}

#[derive(Debug, Args)]
struct OutArgs {
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormArg {
    Dense,
    Sparse,
}

impl From<FormArg> for EdgeForm {
    fn from(f: FormArg) -> Self {
        match f {
            FormArg::Dense => EdgeForm::Dense,
            FormArg::Sparse => EdgeForm::Sparse,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ImageFormat {
    Png,
    Svg,
}

impl ImageFormat {
    fn ext(self) -> &'static str {
        match self {
            ImageFormat::Png => "png",
            ImageFormat::Svg => "svg",
        }
    }
}

#[derive(Debug, Args)]
struct LlmArgs {
    /// Deterministic codec only; no network, no cache.
    #[arg(long)]
    offline: bool,
    /// Serve every model call from the transcript cache.
    #[arg(long, conflicts_with = "offline", requires = "cache_dir")]
    replay_only: bool,
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    #[arg(long, default_value = "gemini")]
    provider: ProviderKind,
    #[arg(long)]
    endpoint: Option<String>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    temperature: Option<f64>,
    #[arg(long)]
    top_p: Option<f64>,
    /// Environment variable holding the API key.
    #[arg(long)]
    api_key_env: Option<String>,
    #[arg(long)]
    max_retries: Option<usize>,
    /// Per-request timeout in seconds.
    #[arg(long)]
    timeout: Option<f64>,
}

#[derive(Debug, Args)]
struct CodecArgs {
    /// JSON hedge table replacing the built-in one.
    #[arg(long)]
    hedge_table: Option<PathBuf>,
    /// Negation markers, one per line.
    #[arg(long)]
    negation_lexicon: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    #[arg(long, default_value_t = fcm_core::eval::DEFAULT_STRONG_THRESHOLD)]
    strong_threshold: f64,
    #[arg(long, default_value_t = fcm_core::eval::DEFAULT_MIN_SIMILARITY)]
    min_similarity: f64,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    fcm: PathBuf,
    /// Initial activations, comma separated, one per node.
    #[arg(long, value_delimiter = ',', required = true)]
    state: Vec<f64>,
    #[command(flatten)]
    squash: SquashArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Args)]
struct BasinsArgs {
    fcm: PathBuf,
    #[command(flatten)]
    squash: SquashArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Args)]
struct MixArgs {
    #[arg(required = true)]
    fcms: Vec<PathBuf>,
    /// Mixing weights, comma separated; uniform when omitted.
    #[arg(long, value_delimiter = ',')]
    weights: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value_t = FormArg::Dense)]
    form: FormArg,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Args)]
struct EncodeArgs {
    fcm: PathBuf,
    /// Also produce the edited summary.
    #[arg(long)]
    edit: bool,
    #[command(flatten)]
    llm: LlmArgs,
    #[command(flatten)]
    codec: CodecArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Args)]
struct EditArgs {
    /// Detailed summary text file.
    summary: PathBuf,
    #[command(flatten)]
    llm: LlmArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Args)]
struct DecodeArgs {
    text: PathBuf,
    #[arg(long, value_enum, default_value_t = FormArg::Dense)]
    form: FormArg,
    #[command(flatten)]
    llm: LlmArgs,
    #[command(flatten)]
    codec: CodecArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Args)]
struct RoundtripArgs {
    fcm: PathBuf,
    /// Decode the edited summary instead of the detailed one.
    #[arg(long)]
    edit: bool,
    #[arg(long, value_enum, default_value_t = ImageFormat::Png)]
    image_format: ImageFormat,
    #[command(flatten)]
    llm: LlmArgs,
    #[command(flatten)]
    codec: CodecArgs,
    #[command(flatten)]
    score: ScoreArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Args)]
struct EvalArgs {
    target: PathBuf,
    /// One or more reconstructions; each becomes a report column.
    #[arg(required = true)]
    recon: Vec<PathBuf>,
    #[arg(long)]
    negation_lexicon: Option<PathBuf>,
    #[command(flatten)]
    score: ScoreArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Args)]
struct RenderArgs {
    /// FCM document (.json) or bare matrix (.csv).
    matrix: PathBuf,
    /// Output image; the extension picks PNG or SVG.
    #[arg(long)]
    out: Option<PathBuf>,
    /// |w| drawn at full brightness; use 2 for difference matrices.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    #[arg(long, default_value_t = 16)]
    cell_size: u32,
    /// Draw node labels (SVG only).
    #[arg(long)]
    labels: bool,
    #[command(flatten)]
    out_dir: OutArgs,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I, transport: Arc<dyn Transport>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONTRACT } else { EXIT_OK };
        }
    };
    match execute(cli, transport) {
        Ok(_) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Runs a parsed command and returns its manifest.
pub fn execute(cli: Cli, transport: Arc<dyn Transport>) -> Result<RunManifest, CliError> {
    match cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Basins(a) => cmd_basins(a),
        Command::Mix(a) => cmd_mix(a),
        Command::Encode(a) => cmd_encode(a, transport),
        Command::Edit(a) => cmd_edit(a, transport),
        Command::Decode(a) => cmd_decode(a, transport),
        Command::Roundtrip(a) => cmd_roundtrip(a, transport),
        Command::Eval(a) => cmd_eval(a),
        Command::Render(a) => cmd_render(a),
    }
}

fn sha256_json(value: &impl Serialize) -> String {
    hex::encode(Sha256::digest(serde_json::to_vec(value).expect("serializable")))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    Ok(write_bytes(path, text.as_bytes())?)
}

fn finish(manifest: RunManifest, out_dir: &Path) -> Result<RunManifest, CliError> {
    for o in &manifest.outputs {
        println!("wrote {o}");
    }
    manifest.write(out_dir)?;
    Ok(manifest)
}

fn load_input(manifest: &mut RunManifest, path: &Path) -> Result<Fcm, CliError> {
    manifest.input(path);
    Ok(load_fcm(path)?)
}

enum Mode {
    Offline,
    Llm(LlmClient),
}

impl Mode {
    fn from_args(args: &LlmArgs, transport: Arc<dyn Transport>) -> Result<Mode, CliError> {
        if args.offline {
            return Ok(Mode::Offline);
        }
        let defaults = LlmConfig::default();
        let provider = args.provider;
        let config = LlmConfig {
            provider,
            endpoint: args.endpoint.clone().unwrap_or_else(|| provider.default_endpoint().to_string()),
            model: args.model.clone().unwrap_or(defaults.model),
            temperature: args.temperature.unwrap_or(defaults.temperature),
            top_p: args.top_p.unwrap_or(defaults.top_p),
            max_retries: args.max_retries.unwrap_or(defaults.max_retries),
            timeout: match args.timeout {
                Some(s) => Duration::try_from_secs_f64(s)
                    .map_err(|e| CliError::contract(format!("--timeout {s}: {e}")))?,
                None => defaults.timeout,
            },
            retry_backoff: defaults.retry_backoff,
            api_key_env: args.api_key_env.clone().unwrap_or_else(|| provider.default_key_env().to_string()),
        };
        let mut client = LlmClient::new(config, transport)?;
        if let Some(dir) = &args.cache_dir {
            client = client.with_cache(TranscriptCache::open(dir)?);
        }
        Ok(Mode::Llm(client.replay_only(args.replay_only)))
    }

    fn record(&self, manifest: &mut RunManifest) {
        match self {
            Mode::Offline => manifest.fingerprint("codec", "deterministic".into()),
            Mode::Llm(client) => {
                manifest.fingerprint("llm", client.config().fingerprint());
                manifest.fingerprint("prompts", fcm_core::prompts::VERSION.into());
            }
        }
    }

    fn finish(&self, manifest: &mut RunManifest) {
        if let Mode::Llm(client) = self {
            let s = client.stats();
            manifest.llm = Some(LlmUsage {
                cache_hits: s.cache_hits,
                network_attempts: s.network_attempts,
            });
        }
    }
}

struct Codec {
    table: HedgeTable,
    lexicon: NegationLexicon,
}

impl Codec {
    fn load(args: &CodecArgs, manifest: &mut RunManifest) -> Result<Codec, CliError> {
        let table = match &args.hedge_table {
            Some(p) => {
                manifest.input(p);
                HedgeTable::from_json(&read_text(p)?)?
            }
            None => HedgeTable::default(),
        };
        let lexicon = load_lexicon(args.negation_lexicon.as_deref(), manifest)?;
        manifest.fingerprint("hedge_table", sha256_json(&table));
        Ok(Codec { table, lexicon })
    }
}

fn load_lexicon(path: Option<&Path>, manifest: &mut RunManifest) -> Result<NegationLexicon, CliError> {
    let lexicon = match path {
        Some(p) => {
            manifest.input(p);
            NegationLexicon::parse(&read_text(p)?)
        }
        None => NegationLexicon::default(),
    };
    manifest.fingerprint("negation_lexicon", sha256_json(&lexicon));
    Ok(lexicon)
}

fn encode(mode: &Mode, fcm: &Fcm, table: &HedgeTable) -> Result<LatentSummary, CliError> {
    Ok(match mode {
        Mode::Offline => deterministic_encode(fcm, table),
        Mode::Llm(client) => llm_encode(fcm, client)?,
    })
}

fn edit(mode: &Mode, latent1: &LatentSummary) -> Result<LatentSummary, CliError> {
    match mode {
        Mode::Offline => Err(CliError::contract("content editing needs a language model; drop --offline")),
        Mode::Llm(client) => Ok(llm_content_edit(latent1, client)?),
    }
}

fn decode(mode: &Mode, text: &str, codec: &Codec) -> Result<Decoded, CliError> {
    Ok(match mode {
        Mode::Offline => deterministic_decode(text, &codec.table, &codec.lexicon)?,
        Mode::Llm(client) => llm_decode(text, client, &codec.table, &codec.lexicon)?,
    })
}

fn write_summary(path: &Path, s: &LatentSummary) -> Result<(), CliError> {
    let mut text = s.text.clone();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    Ok(write_bytes(path, text.as_bytes())?)
}

fn summary_name(stage: Stage) -> &'static str {
    match stage {
        Stage::I => "latent_i.txt",
        Stage::II => "latent_ii.txt",
    }
}

fn evidence_json(source: &Path, d: &Decoded) -> serde_json::Value {
    json!({
        "schema_version": 1,
        "source": source.display().to_string(),
        "nodes": d.nodes,
        "edges": d.edges,
        "pairs_examined": d.pairs_examined,
        "warnings": d.warnings,
    })
}

/// Writes `<stem>.json` and `<stem>.evidence.json`.
fn write_decoded(
    manifest: &mut RunManifest,
    dir: &Path,
    stem: &str,
    source: &Path,
    d: &Decoded,
    form: EdgeForm,
) -> Result<(), CliError> {
    let fcm_path = dir.join(format!("{stem}.json"));
    save_fcm(&d.fcm, &fcm_path, form)?;
    manifest.output(&fcm_path);
    let ev_path = dir.join(format!("{stem}.evidence.json"));
    write_json(&ev_path, &evidence_json(source, d))?;
    manifest.output(&ev_path);
    for w in &d.warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
}

fn cmd_simulate(a: SimulateArgs) -> Result<RunManifest, CliError> {
    let mut m = RunManifest::new("simulate");
    let fcm = load_input(&mut m, &a.fcm)?;
    let squash = a.squash.spec()?;
    m.fingerprint("squash", sha256_json(&squash));
    let initial = StateVector::new(a.state)?;
    let (states, eq) = m.stage("simulate", || -> Result<_, CliError> {
        let states = trajectory_with_tol(&fcm, &initial, &squash, a.squash.max_steps, a.squash.tol)?;
        let eq = find_equilibrium(&fcm, &initial, &squash, a.squash.max_steps, a.squash.tol)?;
        Ok((states, eq))
    })?;
    let n = fcm.len();
    let flat: Vec<f64> = states.iter().flat_map(|s| s.values().iter().copied()).collect();
    let traj = Array2::from_shape_vec((states.len(), n), flat).expect("rows of equal length");
    let dir = &a.out.out_dir;
    let traj_path = dir.join("trajectory.csv");
    write_matrix_csv(&traj, &traj_path)?;
    m.output(&traj_path);
    let eq_path = dir.join("equilibrium.json");
    write_json(&eq_path, &json!({"labels": fcm.labels(), "squash": squash, "equilibrium": eq}))?;
    m.output(&eq_path);
    match eq.period() {
        Some(1) => println!("fixed point after {} step(s)", states.len() - 1),
        Some(k) => println!("limit cycle of period {k}"),
        None => println!("no equilibrium within {} steps", a.squash.max_steps),
    }
    finish(m, dir)
}

fn cmd_basins(a: BasinsArgs) -> Result<RunManifest, CliError> {
    let mut m = RunManifest::new("basins");
    let fcm = load_input(&mut m, &a.fcm)?;
    let squash = a.squash.spec()?;
    m.fingerprint("squash", sha256_json(&squash));
    let map = m.stage("basins", || basin_map(&fcm, &squash, a.squash.max_steps, a.squash.tol))?;
    let path = a.out.out_dir.join("basins.json");
    write_json(&path, &json!({"labels": fcm.labels(), "squash": squash, "basins": map}))?;
    m.output(&path);
    println!("{} equilibria over {} corner states", map.equilibria.len(), map.assignments.len());
    finish(m, &a.out.out_dir)
}

fn cmd_mix(a: MixArgs) -> Result<RunManifest, CliError> {
    let mut m = RunManifest::new("mix");
    let fcms = a.fcms.iter().map(|p| load_input(&mut m, p)).collect::<Result<Vec<_>, _>>()?;
    let weights = match a.weights {
        Some(w) => MixWeights::new(w)?,
        None => MixWeights::uniform(fcms.len())?,
    };
    let mixed = m.stage("mix", || mix(&fcms, &weights))?;
    let path = a.out.out_dir.join("mixed.json");
    save_fcm(&mixed, &path, a.form.into())?;
    m.output(&path);
    finish(m, &a.out.out_dir)
}

fn cmd_encode(a: EncodeArgs, transport: Arc<dyn Transport>) -> Result<RunManifest, CliError> {
    let mut m = RunManifest::new("encode");
    let fcm = load_input(&mut m, &a.fcm)?;
    let codec = Codec::load(&a.codec, &mut m)?;
    let mode = Mode::from_args(&a.llm, transport)?;
    mode.record(&mut m);
    let dir = &a.out.out_dir;
    let latent1 = m.stage("encode", || encode(&mode, &fcm, &codec.table))?;
    let p1 = dir.join(summary_name(Stage::I));
    write_summary(&p1, &latent1)?;
    m.output(&p1);
    if a.edit {
        let latent2 = m.stage("edit", || edit(&mode, &latent1))?;
        let p2 = dir.join(summary_name(Stage::II));
        write_summary(&p2, &latent2)?;
        m.output(&p2);
    }
    mode.finish(&mut m);
    finish(m, dir)
}

fn cmd_edit(a: EditArgs, transport: Arc<dyn Transport>) -> Result<RunManifest, CliError> {
    let mut m = RunManifest::new("edit");
    m.input(&a.summary);
    let text = read_text(&a.summary)?;
    let latent1 = LatentSummary::new(text.trim(), Stage::I, fcm_core::Provenance::Deterministic)?;
    let mode = Mode::from_args(&a.llm, transport)?;
    mode.record(&mut m);
    let latent2 = m.stage("edit", || edit(&mode, &latent1))?;
    let path = a.out.out_dir.join(summary_name(Stage::II));
    write_summary(&path, &latent2)?;
    m.output(&path);
    mode.finish(&mut m);
    finish(m, &a.out.out_dir)
}

fn cmd_decode(a: DecodeArgs, transport: Arc<dyn Transport>) -> Result<RunManifest, CliError> {
    let mut m = RunManifest::new("decode");
    m.input(&a.text);
    let text = read_text(&a.text)?;
    let codec = Codec::load(&a.codec, &mut m)?;
    let mode = Mode::from_args(&a.llm, transport)?;
    mode.record(&mut m);
    let decoded = m.stage("decode", || decode(&mode, &text, &codec))?;
    write_decoded(&mut m, &a.out.out_dir, "decoded", &a.text, &decoded, a.form.into())?;
    mode.finish(&mut m);
    finish(m, &a.out.out_dir)
}

fn eval_options(score: &ScoreArgs, lexicon: NegationLexicon) -> EvalOptions {
    EvalOptions {
        lexicon,
        min_similarity: score.min_similarity,
        strong_threshold: score.strong_threshold,
        ..EvalOptions::default()
    }
}

fn write_reports(
    m: &mut RunManifest,
    dir: &Path,
    variants: &[(&str, &ReconstructionReport)],
) -> Result<(), CliError> {
    let json_path = dir.join("report.json");
    export_report(variants, &json_path, ReportStyle::Structured)?;
    m.output(&json_path);
    let txt_path = dir.join("report.txt");
    export_report(variants, &txt_path, ReportStyle::HumanTable)?;
    m.output(&txt_path);
    Ok(())
}

fn heatmap(path: PathBuf, matrix: &Array2<f64>, scale: f64) -> Result<PathBuf, CliError> {
    let opts = HeatmapOptions { scale, ..HeatmapOptions::default() };
    render_heatmap(matrix, &path, &opts)?;
    Ok(path)
}

fn cmd_roundtrip(a: RoundtripArgs, transport: Arc<dyn Transport>) -> Result<RunManifest, CliError> {
    let mut m = RunManifest::new("roundtrip");
    let target = load_input(&mut m, &a.fcm)?;
    let codec = Codec::load(&a.codec, &mut m)?;
    let mode = Mode::from_args(&a.llm, transport)?;
    mode.record(&mut m);
    let dir = &a.out.out_dir;

    let latent1 = m.stage("encode", || encode(&mode, &target, &codec.table))?;
    let p1 = dir.join(summary_name(Stage::I));
    write_summary(&p1, &latent1)?;
    m.output(&p1);
    let summary = if a.edit {
        let latent2 = m.stage("edit", || edit(&mode, &latent1))?;
        let p2 = dir.join(summary_name(Stage::II));
        write_summary(&p2, &latent2)?;
        m.output(&p2);
        latent2
    } else {
        latent1
    };
    let source = dir.join(summary_name(summary.stage));

    let decoded = m.stage("decode", || decode(&mode, &summary.text, &codec))?;
    write_decoded(&mut m, dir, "recon", &source, &decoded, EdgeForm::Dense)?;

    let opts = eval_options(&a.score, codec.lexicon.clone());
    let report = m.stage("eval", || evaluate(&target, &decoded.fcm, &opts))?;
    let variant = format!("Latent {}", summary.stage);
    write_reports(&mut m, dir, &[(variant.as_str(), &report)])?;

    let ext = a.image_format.ext();
    let images = m.stage("render", || -> Result<Vec<PathBuf>, CliError> {
        let mut out = vec![
            heatmap(dir.join(format!("target.{ext}")), &report.target, 1.0)?,
            heatmap(dir.join(format!("recon.{ext}")), &report.reconstructed, 1.0)?,
            heatmap(dir.join(format!("diff.{ext}")), &(&report.target - &report.reconstructed), 2.0)?,
        ];
        if !report.flipped.is_empty() {
            out.push(heatmap(dir.join(format!("adjusted.{ext}")), &report.adjusted, 1.0)?);
        }
        Ok(out)
    })?;
    for p in &images {
        m.output(p);
    }
    mode.finish(&mut m);
    let n = &report.raw_norms;
    println!("l1 {:.4}  l2 {:.4}  linf {:.4}", n.l1, n.l2, n.linf);
    finish(m, dir)
}

fn cmd_eval(a: EvalArgs) -> Result<RunManifest, CliError> {
    let mut m = RunManifest::new("eval");
    let target = load_input(&mut m, &a.target)?;
    let lexicon = load_lexicon(a.negation_lexicon.as_deref(), &mut m)?;
    let opts = eval_options(&a.score, lexicon);
    let mut reports = Vec::new();
    for path in &a.recon {
        let recon = load_input(&mut m, path)?;
        let name = path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
        let report = m.stage(&format!("eval {name}"), || evaluate(&target, &recon, &opts))?;
        reports.push((name, report));
    }
    let variants: Vec<(&str, &ReconstructionReport)> = reports.iter().map(|(n, r)| (n.as_str(), r)).collect();
    write_reports(&mut m, &a.out.out_dir, &variants)?;
    print!("{}", fcm_core::formats::render_table(&variants));
    finish(m, &a.out.out_dir)
}

fn cmd_render(a: RenderArgs) -> Result<RunManifest, CliError> {
    let mut m = RunManifest::new("render");
    m.input(&a.matrix);
    let is_csv = a.matrix.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let (matrix, labels) = if is_csv {
        (read_matrix_csv(&a.matrix)?, None)
    } else {
        let fcm = load_fcm(&a.matrix)?;
        let labels: Vec<String> = fcm.labels().iter().map(|s| s.to_string()).collect();
        (fcm.edges().clone(), Some(labels))
    };
    let out = a.out.unwrap_or_else(|| a.out_dir.out_dir.join("heatmap.png"));
    let opts = HeatmapOptions {
        cell_size: a.cell_size,
        scale: a.scale,
        labels: if a.labels { labels } else { None },
    };
    m.stage("render", || render_heatmap(&matrix, &out, &opts))?;
    m.output(&out);
    finish(m, &a.out_dir.out_dir)
}
