mod commands;
mod config;
mod failure;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{ConfigFile, Resolver};
use failure::Failure;

/// Exact semi-POVM construction and measurement-bound verification.
#[derive(Parser, Debug)]
#[command(name = "semipovm", version)]
struct Cli {
    /// Output directory; created if missing.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for every random draw in the run.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Enclosure precision: interval widths are at most 2^-K.
    #[arg(long, global = true)]
    precision: Option<u32>,
    /// `key = value` file supplying any flag not given on the command line.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Enumerate halting programs of the reference machine.
    Enumerate(EnumerateArgs),
    /// Build a universal semi-POVM approximant and its POVM sequence.
    Construct(ConstructArgs),
    /// Check outcome probabilities of a POVM against a complexity table.
    Verify(VerifyArgs),
    /// Draw measurement outcomes with a seeded generator.
    Sample(SampleArgs),
    /// Comparison reports.
    #[command(subcommand)]
    Report(ReportCommand),
}

#[derive(Args, Debug)]
pub struct EnumerateArgs {
    #[arg(long)]
    pub max_len: Option<usize>,
    #[arg(long)]
    pub max_steps: Option<u64>,
    /// Extend a previously written table.
    #[arg(long)]
    pub resume: Option<PathBuf>,
    #[arg(long)]
    pub len_cap: Option<usize>,
    #[arg(long)]
    pub steps_cap: Option<u64>,
}

#[derive(Args, Debug, Clone)]
pub struct UniversalArgs {
    /// `scalar` or `noncommuting`.
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Support: all strings of length at most this.
    #[arg(long)]
    pub support_len: Option<usize>,
    /// JSON file `{"g": matrix, "h": matrix}` replacing the default pair.
    #[arg(long)]
    pub gh: Option<PathBuf>,
    /// Stage of the semi-measure; defaults to the table's length budget.
    #[arg(long)]
    pub stage: Option<u64>,
}

#[derive(Args, Debug)]
pub struct ConstructArgs {
    #[command(flatten)]
    pub universal: UniversalArgs,
    /// Also build F_n and G_n.
    #[arg(long)]
    pub seq_n: Option<u64>,
    /// Index budget for monotonization and the F_n search.
    #[arg(long)]
    pub budget: Option<u64>,
    /// Drop zero elements from the completed POVM.
    #[arg(long)]
    pub drop_zero: bool,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long)]
    pub povm: Option<PathBuf>,
    /// Density-matrix JSON file, or `maximally-mixed`.
    #[arg(long)]
    pub rho: Option<String>,
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// JSON map label -> "p/q"; asserts prob <= bound <= p_lower there.
    #[arg(long)]
    pub bounds: Option<PathBuf>,
    /// Also verify this many seeded random density matrices.
    #[arg(long)]
    pub random_rho: Option<usize>,
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    #[arg(long)]
    pub povm: Option<PathBuf>,
    #[arg(long)]
    pub rho: Option<String>,
    #[arg(long)]
    pub trials: Option<u64>,
}

#[derive(Subcommand, Debug)]
pub enum ReportCommand {
    /// Joint, conditional and mutual complexity over short strings.
    Ait(AitArgs),
    /// Trace sandwich and -log2 comparisons for a construction.
    Optimality(OptimalityArgs),
    /// Semi-density diagonals and the trace-deficiency search.
    Density(DensityArgs),
}

#[derive(Args, Debug)]
pub struct AitArgs {
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Sample all strings up to this length.
    #[arg(long)]
    pub max_len: Option<usize>,
}

#[derive(Args, Debug)]
pub struct OptimalityArgs {
    #[command(flatten)]
    pub universal: UniversalArgs,
    #[arg(long)]
    pub rho: Option<String>,
    #[arg(long)]
    pub random_rho: Option<usize>,
}

#[derive(Args, Debug)]
pub struct DensityArgs {
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Largest dimension N.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Threshold as `p/q`.
    #[arg(long)]
    pub eps: Option<String>,
    #[arg(long)]
    pub search_budget: Option<u64>,
}

/// Shared state of one run.
pub struct Ctx<'a> {
    pub out: PathBuf,
    pub seed: u64,
    pub precision: u32,
    pub settings: Resolver<'a>,
    pub outputs: Vec<String>,
}

impl Ctx<'_> {
    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), Failure> {
        let path = self.out.join(name);
        std::fs::write(&path, contents).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
        if !self.outputs.iter().any(|o| o == name) {
            self.outputs.push(name.to_string());
        }
        Ok(())
    }
}

#[derive(serde::Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    status: &'a str,
    exit_code: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    message: Option<&'a str>,
    config: &'a std::collections::BTreeMap<String, String>,
    outputs: &'a [String],
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Enumerate(_) => "enumerate",
        Command::Construct(_) => "construct",
        Command::Verify(_) => "verify",
        Command::Sample(_) => "sample",
        Command::Report(ReportCommand::Ait(_)) => "report ait",
        Command::Report(ReportCommand::Optimality(_)) => "report optimality",
        Command::Report(ReportCommand::Density(_)) => "report density",
    }
}

const GLOBAL_KEYS: &[&str] = &["out", "seed", "precision"];

fn main() -> ExitCode {
    let cli = Cli::parse();
    let file = match cli.config.as_deref().map(ConfigFile::load).transpose() {
        Ok(f) => f.unwrap_or_default(),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.code());
        }
    };
    let mut settings = Resolver::new(&file);
    let globals = (|| -> Result<(PathBuf, u64, u32), Failure> {
        let out = settings.or("out", cli.out.clone().map(|p| p.display().to_string()), "semipovm-out".to_string())?;
        let seed = settings.or("seed", cli.seed, 0u64)?;
        let precision = settings.or("precision", cli.precision, 16u32)?;
        Ok((PathBuf::from(out), seed, precision))
    })();
    let (out, seed, precision) = match globals {
        Ok(g) => g,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.code());
        }
    };
    if let Err(e) = std::fs::create_dir_all(&out) {
        eprintln!("error: cannot create {}: {e}", out.display());
        return ExitCode::from(2);
    }
    let name = command_name(&cli.command);
    let mut ctx = Ctx { out, seed, precision, settings, outputs: Vec::new() };
    let result = commands::run(&mut ctx, &file, cli.command);
    let (status, code, message) = match &result {
        Ok(()) => ("pass", 0, None),
        Err(e) => (e.status(), e.code(), Some(e.message())),
    };
    let manifest = Manifest {
        tool: "semipovm",
        version: env!("CARGO_PKG_VERSION"),
        command: name,
        status,
        exit_code: code,
        message,
        config: &ctx.settings.effective,
        outputs: &ctx.outputs,
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    if let Err(e) = std::fs::write(ctx.out.join("manifest.json"), text + "\n") {
        eprintln!("error: cannot write manifest: {e}");
        return ExitCode::from(2);
    }
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(code)
        }
    }
}
