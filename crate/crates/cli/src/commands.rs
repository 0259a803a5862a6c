use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use sabicluster_core::bicluster::BiclusterRecord;
use sabicluster_core::output::{write_atomic, write_json};
use sabicluster_core::profile::{profiles_csv, DEFAULT_MIN_WEIGHT};
use sabicluster_core::report::compare;
use sabicluster_core::synth::{generate, SynthSpec};
use sabicluster_core::{
    build_profiles, filter_by_session_length, load_sessions, normalize, AcvThreshold, Bicluster, InputFormat,
    PageCatalog, Parallelism, SearchOutcome, SearchParams, SessionPageMatrix, StrategyRegistry, UsageProfile,
};

/// Error in flags or inputs; exits with status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Debug, Parser)]
#[command(name = "sabicluster", version, about = "Biclustering of web usage data with simulated annealing")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load sessions, filter by session length and normalize rows to [0, 1].
    Preprocess(PreprocessArgs),
    /// Simulated-annealing biclustering followed by profile extraction.
    Sa(SaArgs),
    /// Steepest-ascent hill-climbing baseline.
    Greedy(GreedyArgs),
    /// Run every registered method over a list of seeds and tabulate them.
    Compare(CompareArgs),
    /// Generate a planted-block benchmark matrix.
    Synth(SynthArgs),
    /// Build aggregate usage profiles from a biclusters file.
    Profile(ProfileArgs),
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// raw-clickstream or matrix-csv
    #[arg(long, default_value = "raw-clickstream")]
    pub format: String,
    /// `code,label` CSV; required for raw-clickstream input.
    #[arg(long)]
    pub catalog: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub min_len: u64,
    #[arg(long, default_value_t = u64::MAX, hide_default_value = true)]
    pub max_len: u64,
    #[arg(long, default_value = ".")]
    pub output_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Normalized matrix-csv file.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = ".")]
    pub output_dir: PathBuf,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Number of initial biclusters.
    #[arg(long, default_value_t = 100)]
    pub population: usize,
    /// ACV threshold.
    #[arg(long, default_value_t = 0.93)]
    pub delta: f64,
    #[arg(long, default_value_t = DEFAULT_MIN_WEIGHT)]
    pub min_weight: f64,
}

#[derive(Debug, Args)]
pub struct AnnealArgs {
    #[arg(long, default_value_t = 50.0)]
    pub t_initial: f64,
    #[arg(long, default_value_t = 0.7)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.01)]
    pub t_min: f64,
    #[arg(long = "moves-per-temp", default_value_t = 20)]
    pub moves_per_temp: usize,
    /// One move per step, best updated without moving, cooling only on rejection.
    #[arg(long)]
    pub compat_pseudocode: bool,
}

#[derive(Debug, Args)]
pub struct StallArgs {
    #[arg(long, default_value_t = 1000)]
    pub max_stall: usize,
}

#[derive(Debug, Args)]
pub struct SaArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub anneal: AnnealArgs,
}

#[derive(Debug, Args)]
pub struct GreedyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub stall: StallArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub anneal: AnnealArgs,
    #[command(flatten)]
    pub stall: StallArgs,
    /// Explicit seed list; overrides --seed/--runs.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Vec<u64>,
    /// Number of consecutive seeds starting at --seed.
    #[arg(long, default_value_t = 1)]
    pub runs: u64,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 100)]
    pub rows: usize,
    #[arg(long, default_value_t = 20)]
    pub cols: usize,
    #[arg(long, default_value_t = 30)]
    pub block_rows: usize,
    #[arg(long, default_value_t = 6)]
    pub block_cols: usize,
    /// Standard deviation of the noise inside the planted block.
    #[arg(long, default_value_t = 0.01)]
    pub noise: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value = ".")]
    pub output_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    /// Normalized matrix-csv file the biclusters index.
    #[arg(long)]
    pub input: PathBuf,
    /// biclusters.json written by `sa` or `greedy`.
    #[arg(long)]
    pub biclusters: PathBuf,
    #[arg(long, default_value_t = DEFAULT_MIN_WEIGHT)]
    pub min_weight: f64,
    #[arg(long, default_value = ".")]
    pub output_dir: PathBuf,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Preprocess(a) => cmd_preprocess(&a),
        Command::Sa(a) => {
            let params = search_params(&a.common, Some(&a.anneal), None)?;
            cmd_run("sa", &a.common, &params)
        }
        Command::Greedy(a) => {
            let params = search_params(&a.common, None, Some(&a.stall))?;
            cmd_run("greedy", &a.common, &params)
        }
        Command::Compare(a) => cmd_compare(&a),
        Command::Synth(a) => cmd_synth(&a),
        Command::Profile(a) => cmd_profile(&a),
    }
}

fn search_params(common: &CommonArgs, anneal: Option<&AnnealArgs>, stall: Option<&StallArgs>) -> Result<SearchParams> {
    let mut p = SearchParams {
        seed: common.seed,
        population: common.population,
        delta: AcvThreshold::new(common.delta).map_err(|e| usage(format!("--delta: {e}")))?,
        ..SearchParams::default()
    };
    if let Some(a) = anneal {
        p.t_initial = a.t_initial;
        p.alpha = a.alpha;
        p.t_min = a.t_min;
        p.moves_per_temperature = a.moves_per_temp;
        if a.compat_pseudocode {
            p.compat_pseudocode = true;
            p.moves_per_temperature = 1;
        }
        p.annealing().validate().map_err(|e| usage(e.to_string()))?;
    }
    if let Some(s) = stall {
        p.max_stall = s.max_stall;
        p.greedy().validate().map_err(|e| usage(e.to_string()))?;
    }
    if !(0.0..=1.0).contains(&common.min_weight) {
        return Err(usage(format!("--min-weight {} must lie in [0, 1]", common.min_weight)));
    }
    Ok(p)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))
}

/// Loads a matrix-csv whose values are already in [0, 1].
fn load_normalized(path: &Path) -> Result<SessionPageMatrix> {
    if !path.exists() {
        return Err(usage(format!("--input: {} does not exist", path.display())));
    }
    let m = load_sessions(path, InputFormat::MatrixCsv, None)?;
    if !m.is_normalized() {
        return Err(usage(format!(
            "--input: {} has values outside [0, 1]; run `preprocess` first",
            path.display()
        )));
    }
    Ok(m)
}

fn parallelism() -> Result<Parallelism> {
    Parallelism::from_env().map_err(|e| usage(e.to_string()))
}

#[derive(Serialize)]
struct PreprocessSummary<'a> {
    input: String,
    format: String,
    min_len: u64,
    max_len: Option<u64>,
    sessions_read: usize,
    sessions_kept: usize,
    sessions_dropped: usize,
    pages: usize,
    output: &'a str,
}

fn cmd_preprocess(a: &PreprocessArgs) -> Result<()> {
    let format: InputFormat = a.format.parse().map_err(|e| usage(format!("--format: {e}")))?;
    if !a.input.exists() {
        return Err(usage(format!("--input: {} does not exist", a.input.display())));
    }
    let catalog = match (&a.catalog, format) {
        (Some(path), _) => Some(
            PageCatalog::load(path).map_err(|e| usage(format!("--catalog: {e}")))?,
        ),
        (None, InputFormat::RawClickstream) => {
            return Err(usage("--catalog is required for raw-clickstream input"));
        }
        (None, InputFormat::MatrixCsv) => None,
    };
    let raw = load_sessions(&a.input, format, catalog.as_ref())?;
    let filtered = filter_by_session_length(&raw, a.min_len, a.max_len)?;
    let normalized = normalize(&filtered);

    ensure_dir(&a.output_dir)?;
    let out = a.output_dir.join("matrix.csv");
    write_atomic(&out, normalized.to_csv_string()?.as_bytes())?;
    let summary = PreprocessSummary {
        input: a.input.display().to_string(),
        format: format.to_string(),
        min_len: a.min_len,
        max_len: (a.max_len != u64::MAX).then_some(a.max_len),
        sessions_read: raw.n_rows(),
        sessions_kept: normalized.n_rows(),
        sessions_dropped: raw.n_rows() - normalized.n_rows(),
        pages: normalized.n_cols(),
        output: "matrix.csv",
    };
    write_json(&a.output_dir.join("preprocess_summary.json"), &summary)?;
    println!(
        "sessions read {}, kept {}, dropped {} ({} pages) -> {}",
        summary.sessions_read,
        summary.sessions_kept,
        summary.sessions_dropped,
        summary.pages,
        out.display()
    );
    Ok(())
}

fn cmd_run(method: &str, common: &CommonArgs, params: &SearchParams) -> Result<()> {
    let matrix = load_normalized(&common.input)?;
    let registry = StrategyRegistry::builtin();
    let strategy = registry.create(method, params)?;
    let outcome = strategy.search(&matrix, parallelism()?)?;
    let optimal: Vec<Bicluster> = outcome.biclusters.iter().map(|s| s.bicluster.clone()).collect();
    let profiles = build_profiles(&optimal, &matrix, common.min_weight)?;

    ensure_dir(&common.output_dir)?;
    write_json(&common.output_dir.join("biclusters.json"), &outcome.records())?;
    write_json(&common.output_dir.join("profiles.json"), &profiles)?;
    write_atomic(&common.output_dir.join("profiles.csv"), profiles_csv(&profiles)?.as_bytes())?;
    write_json(&common.output_dir.join("report.json"), &outcome.report)?;

    print_summary(&outcome, &profiles);
    Ok(())
}

fn print_summary(outcome: &SearchOutcome, profiles: &[UsageProfile]) {
    let r = &outcome.report;
    println!(
        "{:<8} {:>4} {:>12} {:>9} {:>9} {:>10} {:>12} {:>9}",
        "method", "n", "mean_volume", "mean_acv", "best_acv", "worst_acv", "overlapping", "time_s"
    );
    println!(
        "{:<8} {:>4} {:>12.2} {:>9.4} {:>9.4} {:>10.4} {:>12.4} {:>9.2}",
        r.method, r.n_biclusters, r.mean_volume, r.mean_acv, r.best_acv, r.worst_acv, r.overlapping_degree, r.elapsed_secs
    );
    if profiles.is_empty() {
        println!("\nno usage profiles above min_weight");
        return;
    }
    println!("\n{:<8} {:<24} {:<40} {:>7} {:>8}", "profile", "pages", "weights", "acv", "users");
    for (i, p) in profiles.iter().enumerate() {
        let codes: Vec<String> = p.pages.iter().map(|pg| pg.code.to_string()).collect();
        let weights: Vec<String> = p.pages.iter().map(|pg| format!("{:.4}", pg.weight)).collect();
        println!(
            "{:<8} {:<24} {:<40} {:>7} {:>7.2}%",
            i + 1,
            codes.join(","),
            weights.join(", "),
            p.acv.map_or_else(|| "-".to_string(), |a| format!("{a:.4}")),
            100.0 * p.user_fraction
        );
    }
}

fn cmd_compare(a: &CompareArgs) -> Result<()> {
    let params = search_params(&a.common, Some(&a.anneal), Some(&a.stall))?;
    let seeds: Vec<u64> = if a.seeds.is_empty() {
        if a.runs == 0 {
            return Err(usage("--runs must be at least 1"));
        }
        (0..a.runs).map(|k| a.common.seed.wrapping_add(k)).collect()
    } else {
        a.seeds.clone()
    };
    let matrix = load_normalized(&a.common.input)?;
    let registry = StrategyRegistry::builtin();
    let methods: Vec<&str> = ["sa", "greedy"].into_iter().filter(|m| registry.contains(m)).collect();
    let comparison = compare(&matrix, &registry, &methods, &params, &seeds, parallelism()?)?;

    ensure_dir(&a.common.output_dir)?;
    write_json(&a.common.output_dir.join("comparison.json"), &comparison)?;
    write_atomic(&a.common.output_dir.join("comparison.csv"), comparison.table_csv()?.as_bytes())?;
    write_atomic(&a.common.output_dir.join("per_seed.csv"), comparison.per_seed_csv()?.as_bytes())?;
    print!("{}", comparison.render_table());
    Ok(())
}

fn cmd_synth(a: &SynthArgs) -> Result<()> {
    let spec = SynthSpec {
        rows: a.rows,
        cols: a.cols,
        block_rows: a.block_rows,
        block_cols: a.block_cols,
        noise: a.noise,
        seed: a.seed,
    };
    let synth = generate(&spec).map_err(|e| usage(e.to_string()))?;
    ensure_dir(&a.output_dir)?;
    write_atomic(&a.output_dir.join("matrix.csv"), synth.matrix.to_csv_string()?.as_bytes())?;
    write_json(&a.output_dir.join("planted.json"), &synth.planted)?;
    println!(
        "{}x{} matrix with planted {}x{} block -> {}",
        a.rows,
        a.cols,
        a.block_rows,
        a.block_cols,
        a.output_dir.join("matrix.csv").display()
    );
    Ok(())
}

fn cmd_profile(a: &ProfileArgs) -> Result<()> {
    if !(0.0..=1.0).contains(&a.min_weight) {
        return Err(usage(format!("--min-weight {} must lie in [0, 1]", a.min_weight)));
    }
    let matrix = load_normalized(&a.input)?;
    let text = fs::read_to_string(&a.biclusters)
        .map_err(|e| usage(format!("--biclusters: {}: {e}", a.biclusters.display())))?;
    let records: Vec<BiclusterRecord> = serde_json::from_str(&text)
        .map_err(|e| usage(format!("--biclusters: {}: {e}", a.biclusters.display())))?;
    if records.is_empty() {
        return Err(usage(format!("--biclusters: {} lists no biclusters", a.biclusters.display())));
    }
    let optimal = records
        .iter()
        .map(|r| r.to_bicluster(matrix.n_rows(), matrix.n_cols()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| usage(format!("--biclusters: {e}")))?;
    let profiles = build_profiles(&optimal, &matrix, a.min_weight)?;
    ensure_dir(&a.output_dir)?;
    write_json(&a.output_dir.join("profiles.json"), &profiles)?;
    write_atomic(&a.output_dir.join("profiles.csv"), profiles_csv(&profiles)?.as_bytes())?;
    println!("{} profile(s) written to {}", profiles.len(), a.output_dir.display());
    Ok(())
}
