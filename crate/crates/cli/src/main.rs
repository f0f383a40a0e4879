use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use cavity_relax_cli::config::{ConfigFile, Cutoff, Overrides, Scenario, ScenarioConfig};
use cavity_relax_cli::error::{CliError, CliResult};
use cavity_relax_cli::physics::Convention;
use cavity_relax_cli::scenarios::run;
use cavity_relax_cli::verify::VerifyOptions;

/// Liouvillian gaps, relaxation and atomic mutual information for two atoms in a leaky cavity.
#[derive(Debug, Parser)]
#[command(name = "cavity-relax", version)]
struct Args {
    /// Scenario to run: gap-coherent, second-rate-coherent, mi-coherent,
    /// gap-incoherent, mi-incoherent, real-detector or verify.
    #[arg(long)]
    scenario: Option<String>,
    /// JSON file with scenario configuration fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write SVG plots.
    #[arg(long)]
    plot: bool,
    /// Fock cutoff of the exact models: a positive integer or `auto`.
    #[arg(long, value_name = "N|auto")]
    cutoff: Option<String>,
    /// Only report warnings and errors.
    #[arg(long)]
    quiet: bool,
    /// Dissipator normalization used by verify (`standard` or `half`).
    #[arg(long, hide = true, default_value = "standard")]
    convention: String,
    /// Comma-separated criteria for verify.
    #[arg(long, hide = true, value_delimiter = ',')]
    only: Option<Vec<u8>>,
}

fn execute(args: Args) -> CliResult<i32> {
    let convention = match args.convention.as_str() {
        "standard" => Convention::Standard,
        "half" => Convention::Halved,
        other => return Err(CliError::Usage(format!("unknown convention '{other}'"))),
    };
    let flags = Overrides {
        scenario: args.scenario.as_deref().map(str::parse::<Scenario>).transpose()?,
        cutoff: args.cutoff.as_deref().map(str::parse::<Cutoff>).transpose()?,
        output: args.out,
        plot: args.plot,
    };
    let file = args.config.as_deref().map(ConfigFile::load).transpose()?;
    let cfg = ScenarioConfig::resolve(file, &flags)?;
    let verify = VerifyOptions { convention, only: args.only, seed: cfg.seeds };
    let outcome = run(&cfg, &verify)?;
    for c in &outcome.checks {
        println!("{}", c.line());
    }
    for f in &outcome.files {
        log::info!("wrote {}", f.display());
    }
    Ok(outcome.exit_code)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 64 } else { 0 });
        }
    };
    let level = if args.quiet { "warn" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match execute(args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
