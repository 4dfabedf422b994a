//! Command implementations behind the `qgibbs` binary.
//!
//! Every command renders to a `String`, so identical [`RunConfig`]s give
//! byte-identical output.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use qgibbs::gibbs::{prepare_purified_gibbs, PrepareOptions, ZSource};
use qgibbs::hamiltonian::{eigendecompose, EigenSystem, ModelConfig};
use qgibbs::linalg;
use qgibbs::{
    bounds, oracle, seed, Amplifier, EstimateOptions, EstimateReport, EstimationMode, PrepareDiagnostics, VerifyConfig, VerifyReport, ZMode,
};

pub const SCHEMA_VERSION: u32 = 1;
pub const FIGURE1_CSV_VERSION: &str = "# qgibbs figure1 csv v1";
pub const ESTIMATE_CSV_VERSION: &str = "# qgibbs estimate csv v1";
pub const PREPARE_CSV_VERSION: &str = "# qgibbs prepare csv v1";
pub const VERIFY_CSV_VERSION: &str = "# qgibbs verify-bounds csv v1";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] qgibbs::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use qgibbs::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(E::DenseLimit { .. } | E::InvalidTerm(_) | E::InvalidParameter(_) | E::SpectrumOutOfRange { .. })
            | CliError::Core(E::ModeMismatch(_) | E::Json(_)) => 2,
            CliError::Core(_) | CliError::Io(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(CliError::Config(format!("unknown format '{s}' (expected csv or json)"))),
        }
    }
}

/// Inclusive grid `a, …, b` with `steps` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaGrid {
    pub start: f64,
    pub end: f64,
    pub steps: usize,
}

impl BetaGrid {
    pub fn single(beta: f64) -> Self {
        Self { start: beta, end: beta, steps: 1 }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.start];
        }
        let h = (self.end - self.start) / (self.steps - 1) as f64;
        (0..self.steps).map(|i| if i + 1 == self.steps { self.end } else { self.start + h * i as f64 }).collect()
    }
}

impl FromStr for BetaGrid {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || CliError::Config(format!("beta grid '{s}' is not a:b:steps"));
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, n] = parts.as_slice() else {
            return Err(bad());
        };
        let start: f64 = a.trim().parse().map_err(|_| bad())?;
        let end: f64 = b.trim().parse().map_err(|_| bad())?;
        let steps: usize = n.trim().parse().map_err(|_| bad())?;
        if !(start.is_finite() && end.is_finite()) || start < 0.0 || end < start || steps == 0 || (steps == 1 && end != start) {
            return Err(CliError::Config(format!("beta grid '{s}' needs 0 ≤ a ≤ b and steps ≥ 1 (steps = 1 only when a = b)")));
        }
        Ok(Self { start, end, steps })
    }
}

pub fn parse_mode(s: &str) -> Result<EstimationMode> {
    serde_json::from_value(serde_json::Value::String(s.replace('-', "_")))
        .map_err(|_| CliError::Config(format!("unknown mode '{s}' (expected universal, classical or supplied)")))
}

pub fn parse_z_mode(s: &str) -> Result<ZMode> {
    serde_json::from_value(serde_json::Value::String(s.replace('-', "_")))
        .map_err(|_| CliError::Config(format!("unknown z mode '{s}' (expected self_hosted or oracle)")))
}

pub fn parse_amplifier(s: &str) -> Result<Amplifier> {
    serde_json::from_value(serde_json::Value::String(s.replace('-', "_")))
        .map_err(|_| CliError::Config(format!("unknown amplifier '{s}' (expected grover or fixed_point)")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Figure1Params {
    pub ratios: Vec<f64>,
    pub betas: BetaGrid,
}

impl Default for Figure1Params {
    fn default() -> Self {
        Self { ratios: vec![0.5, 1.0, 2.0], betas: BetaGrid { start: 0.0, end: 3.0, steps: 61 } }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateParams {
    pub betas: BetaGrid,
    pub eps: Vec<f64>,
    pub options: EstimateOptions,
}

impl Default for EstimateParams {
    fn default() -> Self {
        Self { betas: BetaGrid::single(1.0), eps: vec![0.1], options: EstimateOptions::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrepareParams {
    pub beta: f64,
    pub eps: f64,
    pub m: Option<u32>,
    pub amplifier: Amplifier,
}

impl Default for PrepareParams {
    fn default() -> Self {
        Self { beta: 1.0, eps: 0.1, m: None, amplifier: Amplifier::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "command")]
pub enum Command {
    Figure1(Figure1Params),
    Estimate(EstimateParams),
    Prepare(PrepareParams),
    VerifyBounds(VerifyConfig),
}

impl Command {
    pub fn default_format(&self) -> Format {
        match self {
            Command::Figure1(_) => Format::Csv,
            _ => Format::Json,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub command: Command,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl RunConfig {
    pub fn new(model: ModelConfig, command: Command) -> Self {
        let format = command.default_format();
        Self { model, command, seed: 0, out: None, format }
    }
}

pub fn load_model(path: &std::path::Path) -> Result<ModelConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("invalid model config {}: {e}", path.display())))
}

/// Rendered command output.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub text: String,
    /// Set when a checked bound was violated.
    pub violation: bool,
}

pub fn run(cfg: &RunConfig) -> Result<Output> {
    let text = match &cfg.command {
        Command::Figure1(p) => render_figure1(&cmd_figure1(&cfg.model, p)?, cfg.format),
        Command::Estimate(p) => render_estimate(&cfg.model, cfg.seed, &cmd_estimate(&cfg.model, p, cfg.seed)?, cfg.format),
        Command::Prepare(p) => render_prepare(&cmd_prepare(&cfg.model, p)?, cfg.format),
        Command::VerifyBounds(v) => {
            let v = VerifyConfig { seed: cfg.seed, ..v.clone() };
            let report = cmd_verify_bounds(&v)?;
            let violation = !report.pass();
            return Ok(Output { text: render_verify(&v, &report, cfg.format), violation });
        }
    };
    Ok(Output { text, violation: false })
}

/// Shortest round-trip decimal, switching to exponent form for small magnitudes.
pub fn fmt_f64(x: f64) -> String {
    if x != 0.0 && x.abs() < 1e-4 {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

fn json(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("json values serialize");
    s.push('\n');
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Figure1Row {
    #[serde(rename = "g_over_J")]
    pub g_over_j: f64,
    pub beta: f64,
    pub alpha: f64,
}

/// Scaling exponent `α(β)` for each normalized coupling ratio, rows sorted
/// by ratio then `β`.
pub fn cmd_figure1(model: &ModelConfig, p: &Figure1Params) -> Result<Vec<Figure1Row>> {
    if p.ratios.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(CliError::Config("g/J ratios must be positive".into()));
    }
    let mut ratios = p.ratios.clone();
    ratios.sort_by(f64::total_cmp);
    ratios.dedup();
    let betas = p.betas.values();
    let curves = ratios
        .par_iter()
        .map(|&r| -> Result<Vec<Figure1Row>> {
            let m = ModelConfig { g_over_j: Some(r), ..model.clone() };
            let h = m.build()?;
            let eig = EigenSystem::diagonal(linalg::eigvalsh(&h.dense()?));
            betas
                .iter()
                .map(|&beta| {
                    let pt = oracle::scaling_exponent(&eig, beta, m.n)?;
                    Ok(Figure1Row { g_over_j: r, beta, alpha: pt.alpha })
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(curves.into_iter().flatten().collect())
}

pub fn render_figure1(rows: &[Figure1Row], format: Format) -> String {
    match format {
        Format::Csv => {
            let mut s = format!("{FIGURE1_CSV_VERSION}\ng_over_J,beta,alpha\n");
            for r in rows {
                writeln!(s, "{},{},{}", fmt_f64(r.g_over_j), fmt_f64(r.beta), fmt_f64(r.alpha)).unwrap();
            }
            s
        }
        Format::Json => json(&serde_json::json!({ "schema_version": SCHEMA_VERSION, "rows": rows })),
    }
}

/// One report per `(β, ε)` grid point; point `i` is seeded with `mix(seed, i)`.
pub fn cmd_estimate(model: &ModelConfig, p: &EstimateParams, seed: u64) -> Result<Vec<EstimateReport>> {
    if p.eps.is_empty() {
        return Err(CliError::Config("at least one eps value is required".into()));
    }
    let h = model.build()?;
    let mut out = Vec::new();
    let mut index = 0u64;
    for beta in p.betas.values() {
        for &eps in &p.eps {
            let opts = EstimateOptions { eps, ..p.options.clone() };
            out.push(qgibbs::estimator::estimate_partition(&h, beta, &opts, seed::mix(seed, index))?);
            index += 1;
        }
    }
    Ok(out)
}

pub fn render_estimate(model: &ModelConfig, seed: u64, reports: &[EstimateReport], format: Format) -> String {
    match format {
        Format::Csv => {
            let mut s = format!("{ESTIMATE_CSV_VERSION}\nbeta,eps,z_hat,z_oracle,rel_err,cost\n");
            for r in reports {
                writeln!(
                    s,
                    "{},{},{},{},{},{}",
                    fmt_f64(r.beta),
                    fmt_f64(r.rel_err_target),
                    fmt_f64(r.z_hat),
                    fmt_f64(r.z_oracle),
                    fmt_f64(r.rel_err()),
                    r.cost.u_applications
                )
                .unwrap();
            }
            s
        }
        Format::Json => json(&serde_json::json!({
            "schema_version": SCHEMA_VERSION,
            "model": model,
            "seed": seed,
            "reports": reports,
        })),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRow {
    pub a: usize,
    pub energy: f64,
    pub badmass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrepareReport {
    pub schema_version: u32,
    pub beta: f64,
    pub eps: f64,
    pub dim: usize,
    pub fidelity: f64,
    pub trace_distance: f64,
    pub badmass_bound: f64,
    pub measured_badmass: Option<f64>,
    pub diagnostics: PrepareDiagnostics,
    pub levels: Vec<LevelRow>,
}

/// Purified Gibbs state with oracle `Z(β_k)` for the Grover counts.
pub fn cmd_prepare(model: &ModelConfig, p: &PrepareParams) -> Result<PrepareReport> {
    let h = model.build()?;
    let eig = eigendecompose(&h)?;
    let opts = PrepareOptions { amplifier: p.amplifier, z_source: ZSource::Oracle, m: p.m, ..PrepareOptions::default() };
    let (pg, diagnostics) = prepare_purified_gibbs(&eig, &eig.energies, h.emax(), p.beta, p.eps, &opts)?;
    let rho = pg.state.reduced_density(&eig)?;
    let target = oracle::gibbs_state(&eig, p.beta)?;
    let layout = pg.state.layout();
    let levels = (0..eig.dim())
        .map(|a| {
            let badmass = match pg.state.peaks() {
                Some(peaks) => {
                    let (lo, hi) = peaks[a];
                    let mut mass = 0.0;
                    for e in (0..layout.register_size()).filter(|&e| e != lo && e != hi) {
                        for f in 0..layout.flag_states() {
                            mass += pg.state.amplitude(a, e, f).norm_sqr();
                        }
                    }
                    mass
                }
                None => 0.0,
            };
            LevelRow { a, energy: eig.energies[a], badmass }
        })
        .collect();
    Ok(PrepareReport {
        schema_version: SCHEMA_VERSION,
        beta: p.beta,
        eps: p.eps,
        dim: eig.dim(),
        fidelity: oracle::fidelity(&rho, &target)?,
        trace_distance: oracle::trace_distance(&rho, &target),
        badmass_bound: pg.badmass_bound,
        measured_badmass: pg.state.measured_badmass(),
        diagnostics,
        levels,
    })
}

pub fn render_prepare(report: &PrepareReport, format: Format) -> String {
    match format {
        Format::Csv => {
            let mut s = format!("{PREPARE_CSV_VERSION}\na,E_a,badmass_a\n");
            for l in &report.levels {
                writeln!(s, "{},{},{}", l.a, fmt_f64(l.energy), fmt_f64(l.badmass)).unwrap();
            }
            s
        }
        Format::Json => json(&serde_json::to_value(report).expect("report serializes")),
    }
}

pub fn cmd_verify_bounds(cfg: &VerifyConfig) -> Result<VerifyReport> {
    if cfg.dim < 2 {
        return Err(CliError::Config("verify-bounds needs dim ≥ 2".into()));
    }
    Ok(bounds::verify_bounds(cfg)?)
}

pub fn render_verify(cfg: &VerifyConfig, report: &VerifyReport, format: Format) -> String {
    match format {
        Format::Csv => {
            let mut s = format!("{VERIFY_CSV_VERSION}\nname,trials,max_observed_ratio,bound,pass,violations,informational\n");
            for b in &report.bounds {
                writeln!(
                    s,
                    "{},{},{},{},{},{},{}",
                    b.name,
                    b.trials,
                    fmt_f64(b.max_observed_ratio),
                    fmt_f64(b.bound),
                    b.pass,
                    b.violations,
                    b.informational
                )
                .unwrap();
            }
            s
        }
        Format::Json => json(&serde_json::json!({
            "schema_version": SCHEMA_VERSION,
            "pass": report.pass(),
            "config": cfg,
            "bounds": report.bounds,
        })),
    }
}
