use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qgibbs::hamiltonian::ModelConfig;
use qgibbs::{Amplifier, EstimateOptions, EstimationMode, VerifyConfig, ZMode};
use qgibbs_cli::{
    load_model, parse_amplifier, parse_mode, parse_z_mode, run, BetaGrid, CliError, Command, EstimateParams, Figure1Params, Format,
    PrepareParams, RunConfig,
};

#[derive(Parser)]
#[command(name = "qgibbs", version, about = "Thermalization and partition-function estimation simulator")]
struct Cli {
    /// Model config (JSON: n, J, g, g_over_J, boundary, shift_policy, dense_limit).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_parser = |s: &str| s.parse::<Format>().map_err(|e| e.to_string()))]
    format: Option<Format>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Scaling exponent curves; the model defaults to a 10-site periodic chain.
    Figure1(Figure1Args),
    /// Partition-function estimation over a beta/eps grid.
    Estimate(EstimateArgs),
    /// Purified Gibbs state diagnostics.
    Prepare(PrepareArgs),
    /// Seeded checks of the perturbation bounds.
    VerifyBounds(VerifyArgs),
}

fn grid(s: &str) -> Result<BetaGrid, String> {
    s.parse().map_err(|e: CliError| e.to_string())
}

#[derive(Args)]
struct Figure1Args {
    #[arg(long, value_parser = grid, default_value = "0:3:61")]
    beta_grid: BetaGrid,
    #[arg(long = "g-over-j", value_delimiter = ',', default_value = "0.5,1,2")]
    ratios: Vec<f64>,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long, value_parser = grid, default_value = "1:1:1")]
    beta_grid: BetaGrid,
    #[arg(long, value_delimiter = ',', default_value = "0.1")]
    eps: Vec<f64>,
    #[arg(long, default_value_t = 0.9)]
    confidence: f64,
    /// universal, classical or supplied.
    #[arg(long, value_parser = |s: &str| parse_mode(s).map_err(|e| e.to_string()), default_value = "universal")]
    mode: EstimationMode,
    /// self_hosted or oracle.
    #[arg(long, value_parser = |s: &str| parse_z_mode(s).map_err(|e| e.to_string()), default_value = "self_hosted")]
    z_mode: ZMode,
    #[arg(long, value_parser = |s: &str| parse_amplifier(s).map_err(|e| e.to_string()), default_value = "fixed_point")]
    amplifier: Amplifier,
    /// Energy-register bits; derived from beta and eps when absent.
    #[arg(long)]
    m: Option<u32>,
    /// Use circuit flag weights instead of sampled counting outcomes.
    #[arg(long)]
    exact_counting: bool,
}

#[derive(Args)]
struct PrepareArgs {
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    #[arg(long)]
    m: Option<u32>,
    #[arg(long, value_parser = |s: &str| parse_amplifier(s).map_err(|e| e.to_string()), default_value = "fixed_point")]
    amplifier: Amplifier,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 100_000)]
    scalar_pairs: usize,
    #[arg(long, default_value_t = 8)]
    dim: usize,
    #[arg(long, default_value_t = 8)]
    contour_trials: usize,
}

fn build(cli: Cli) -> Result<RunConfig, CliError> {
    let model = match &cli.config {
        Some(path) => load_model(path)?,
        None if matches!(cli.command, Cmd::Figure1(_)) => ModelConfig { n: 10, ..ModelConfig::default() },
        None => ModelConfig::default(),
    };
    let command = match cli.command {
        Cmd::Figure1(a) => Command::Figure1(Figure1Params { ratios: a.ratios, betas: a.beta_grid }),
        Cmd::Estimate(a) => Command::Estimate(EstimateParams {
            betas: a.beta_grid,
            eps: a.eps,
            options: EstimateOptions {
                confidence: a.confidence,
                mode: a.mode,
                z_mode: a.z_mode,
                amplifier: a.amplifier,
                m: a.m,
                exact_counting: a.exact_counting,
                ..EstimateOptions::default()
            },
        }),
        Cmd::Prepare(a) => Command::Prepare(PrepareParams { beta: a.beta, eps: a.eps, m: a.m, amplifier: a.amplifier }),
        Cmd::VerifyBounds(a) => Command::VerifyBounds(VerifyConfig {
            trials: a.trials,
            scalar_pairs: a.scalar_pairs,
            dim: a.dim,
            contour_trials: a.contour_trials,
            ..VerifyConfig::default()
        }),
    };
    let format = cli.format.unwrap_or(command.default_format());
    Ok(RunConfig { model, command, seed: cli.seed, out: cli.out, format })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = build(cli).and_then(|cfg| {
        let output = run(&cfg)?;
        match &cfg.out {
            Some(path) => std::fs::write(path, &output.text)?,
            None => print!("{}", output.text),
        }
        Ok(output.violation)
    });
    match result {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => {
            eprintln!("qgibbs: bound violation");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("qgibbs: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
