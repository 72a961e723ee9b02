//! Config-driven command-line driver for the fwldp toolkit.
//!
//! One TOML file describes one run: a model from the registry, a time grid,
//! and a command with its parameters.  Results are written as
//! `<prefix>_<command>.csv` (plus a `.json` mirror with `--json`), and a
//! single deterministic summary line is printed.  Running the same config
//! twice produces byte-identical files; existing outputs are only replaced
//! under `--force`.
//!
//! Exit codes: 0 success, 1 validation/solver/filesystem error, 2 a verify
//! run completed but at least one audit failed.

use anyhow::{anyhow, bail, Context, Result};
use clap::Parser;
use fwldp::action::{minimize_endpoint_action, OptimizerOptions, RateResult, TargetSpec};
use fwldp::grid::{Control, TimeGrid};
use fwldp::integrate::{simulate_sde_sample, solve_skeleton};
use fwldp::io;
use fwldp::mc::{
    convergence_statement_ii, ldp_scaling_report, sinusoid_family, weak_convergence_statement_i,
    EventSpec,
};
use fwldp::model::ModelSpec;
use fwldp::registry::build_model;
use fwldp::verify::{
    audit_integrability, audit_lyapunov, audit_monotonicity, audit_ratio, AssumptionTag,
    AuditReport,
};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "fwldp",
    version,
    about = "Large-deviations toolkit driver: simulate, audit, and minimize actions for small-noise SDEs"
)]
struct Cli {
    /// Path to the TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overwrite existing output files.
    #[arg(long)]
    force: bool,
    /// Cap the worker-thread count (results are identical for any cap).
    #[arg(long)]
    threads: Option<usize>,
    /// Also emit a JSON mirror next to each CSV.
    #[arg(long)]
    json: bool,
    /// Override the seed of the dispatched command section.
    #[arg(long)]
    seed: Option<u64>,
}

// ---------------------------------------------------------------------------
// Configuration schema
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RunConfig {
    command: CommandName,
    /// Output path prefix; files are written as `<prefix>_<command>.csv`.
    output: String,
    model: ModelSection,
    #[serde(default)]
    grid: GridSection,
    #[serde(default)]
    simulate: SimulateSection,
    #[serde(default)]
    skeleton: SkeletonSection,
    #[serde(default)]
    rate: RateSection,
    #[serde(default)]
    verify: VerifySection,
    #[serde(rename = "mc-ldp", default)]
    mc_ldp: McLdpSection,
    #[serde(rename = "converge-i", default)]
    converge_i: ConvergeISection,
    #[serde(rename = "converge-ii", default)]
    converge_ii: ConvergeIISection,
}

#[derive(Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum CommandName {
    Simulate,
    Skeleton,
    Rate,
    Verify,
    McLdp,
    ConvergeI,
    #[serde(rename = "converge-ii")]
    ConvergeII,
}

impl CommandName {
    fn label(self) -> &'static str {
        match self {
            CommandName::Simulate => "simulate",
            CommandName::Skeleton => "skeleton",
            CommandName::Rate => "rate",
            CommandName::Verify => "verify",
            CommandName::McLdp => "mc-ldp",
            CommandName::ConvergeI => "converge-i",
            CommandName::ConvergeII => "converge-ii",
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelSection {
    name: String,
    #[serde(default)]
    params: BTreeMap<String, f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, default)]
struct GridSection {
    steps: usize,
    /// Defaults to the model's own horizon.
    horizon: Option<f64>,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            steps: 512,
            horizon: None,
        }
    }
}

/// Control description shared by several commands.
#[derive(Clone, Default, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
enum ControlSpec {
    #[default]
    Zero,
    Constant { value: Vec<f64> },
    Sinusoid { frequency: f64, amplitude: Vec<f64> },
}

impl ControlSpec {
    fn build(&self, grid: TimeGrid, noise_dim: usize) -> Result<Control> {
        let control = match self {
            ControlSpec::Zero => Control::zero(grid, noise_dim),
            ControlSpec::Constant { value } => Control::constant(grid, value)?,
            ControlSpec::Sinusoid {
                frequency,
                amplitude,
            } => Control::sinusoid(grid, *frequency, amplitude)?,
        };
        if control.dim() != noise_dim {
            bail!(
                "control dimension {} does not match the model noise dimension {noise_dim}",
                control.dim()
            );
        }
        Ok(control)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SimulateSection {
    epsilon: f64,
    seed: u64,
    /// Substream index within the seed (sample number).
    sample: u64,
}

impl Default for SimulateSection {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            seed: 0,
            sample: 0,
        }
    }
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SkeletonSection {
    control: ControlSpec,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RateSection {
    /// Required for the rate command.
    target: Option<TargetSpec>,
    gtol: Option<f64>,
    max_iterations: Option<usize>,
    memory: Option<usize>,
    mu_init: Option<f64>,
    mu_factor: Option<f64>,
    mu_cap: Option<f64>,
}

impl RateSection {
    fn optimizer_options(&self) -> OptimizerOptions {
        let mut opts = OptimizerOptions::default();
        if let Some(v) = self.gtol {
            opts.gtol = v;
        }
        if let Some(v) = self.max_iterations {
            opts.max_iterations = v;
        }
        if let Some(v) = self.memory {
            opts.memory = v;
        }
        if let Some(v) = self.mu_init {
            opts.mu_init = v;
        }
        if let Some(v) = self.mu_factor {
            opts.mu_factor = v;
        }
        if let Some(v) = self.mu_cap {
            opts.mu_cap = v;
        }
        opts
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, default)]
struct VerifySection {
    radius: f64,
    n: usize,
    seed: u64,
    monotonicity_tolerance: f64,
    lyapunov_tolerance: f64,
    /// Time nodes for the integrability quadrature.
    time_points: usize,
    /// Space samples per time node for the integrability quadrature.
    space_points: usize,
    /// Domain cap for the gamma-modulus ratio audit.
    gamma_cap: f64,
    ratio_c_points: usize,
    ratio_s_points: usize,
}

impl Default for VerifySection {
    fn default() -> Self {
        Self {
            radius: 5.0,
            n: 100_000,
            seed: 0,
            monotonicity_tolerance: 0.0,
            lyapunov_tolerance: 1e-9,
            time_points: 65,
            space_points: 2_048,
            gamma_cap: 100.0,
            ratio_c_points: 24,
            ratio_s_points: 1_024,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, default)]
struct McLdpSection {
    epsilons: Vec<f64>,
    n: usize,
    seed: u64,
    /// Required for the mc-ldp command.
    event: Option<EventSpec>,
    /// Rate-function value at the event; computed by the action module for
    /// endpoint half-space events when omitted.
    rate_value: Option<f64>,
}

impl Default for McLdpSection {
    fn default() -> Self {
        Self {
            epsilons: vec![0.25, 0.1, 0.05],
            n: 10_000,
            seed: 0,
            event: None,
            rate_value: None,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, default)]
struct ConvergeISection {
    indices: Vec<usize>,
    amplitude: Vec<f64>,
}

impl Default for ConvergeISection {
    fn default() -> Self {
        Self {
            indices: (1..=16).collect(),
            amplitude: vec![1.0],
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, default)]
struct ConvergeIISection {
    epsilons: Vec<f64>,
    delta: f64,
    n: usize,
    seed: u64,
    control: ControlSpec,
    /// First-passage ball radius for the tau_R diagnostic.
    radius: f64,
    /// First-passage squared-distance threshold; defaults to delta^2.
    passage: Option<f64>,
}

impl Default for ConvergeIISection {
    fn default() -> Self {
        Self {
            epsilons: vec![0.1, 0.01, 0.001],
            delta: 0.25,
            n: 10_000,
            seed: 0,
            control: ControlSpec::Zero,
            radius: 10.0,
            passage: None,
        }
    }
}

// ---------------------------------------------------------------------------
// Output helpers
// ---------------------------------------------------------------------------

/// JSON record mirroring one path CSV row.
#[derive(Serialize)]
struct PathRow {
    t: f64,
    x: Vec<f64>,
}

/// JSON record mirroring the rate CSV row.
#[derive(Serialize)]
struct RateRow {
    action: f64,
    terminal_error: f64,
    iterations: usize,
    converged: bool,
    penalty_final: f64,
    status: &'static str,
    grad_norm: f64,
}

struct Emitter {
    prefix: String,
    command: &'static str,
    force: bool,
    json: bool,
    written: Vec<String>,
}

impl Emitter {
    fn new(config: &RunConfig, cli: &Cli) -> Self {
        Self {
            prefix: config.output.clone(),
            command: config.command.label(),
            force: cli.force,
            json: cli.json,
            written: Vec::new(),
        }
    }

    fn path_for(&self, suffix: Option<&str>, ext: &str) -> PathBuf {
        let mut name = format!("{}_{}", self.prefix, self.command);
        if let Some(s) = suffix {
            name.push('_');
            name.push_str(s);
        }
        name.push('.');
        name.push_str(ext);
        PathBuf::from(name)
    }

    fn write_file(&mut self, path: PathBuf, content: &str) -> Result<()> {
        if path.exists() && !self.force {
            bail!(
                "output file {} already exists; pass --force to overwrite",
                path.display()
            );
        }
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)
                    .with_context(|| format!("creating directory {}", parent.display()))?;
            }
        }
        std::fs::write(&path, content)
            .with_context(|| format!("writing {}", path.display()))?;
        self.written.push(path.display().to_string());
        Ok(())
    }

    /// Write the primary CSV and, when requested, its JSON mirror.
    fn emit<T: Serialize>(&mut self, suffix: Option<&str>, csv: &str, rows: &T) -> Result<()> {
        self.write_file(self.path_for(suffix, "csv"), csv)?;
        if self.json {
            let mut text = io::to_json(rows);
            text.push('\n');
            self.write_file(self.path_for(suffix, "json"), &text)?;
        }
        Ok(())
    }

    fn files(&self) -> String {
        self.written.join(", ")
    }
}

fn path_rows(path: &fwldp::Path) -> Vec<PathRow> {
    (0..path.nodes())
        .map(|k| PathRow {
            t: path.grid().node(k),
            x: path.state(k).to_vec(),
        })
        .collect()
}

fn rate_row(result: &RateResult) -> RateRow {
    RateRow {
        action: result.action,
        terminal_error: result.terminal_error,
        iterations: result.iterations,
        converged: result.converged,
        penalty_final: result.penalty_final,
        status: result.status.label(),
        grad_norm: result.grad_norm,
    }
}

fn fmt_vec(values: &[f64]) -> String {
    let mut out = String::from("[");
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{v:.6}");
    }
    out.push(']');
    out
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring the worker-thread pool")?;
    }
    let text = std::fs::read_to_string(&cli.config)
        .with_context(|| format!("reading config {}", cli.config.display()))?;
    let config: RunConfig = toml::from_str(&text)
        .with_context(|| format!("parsing config {}", cli.config.display()))?;

    let model = build_model(&config.model.name, &config.model.params)
        .map_err(|e| anyhow!("building model `{}`: {e}", config.model.name))?;
    let horizon = config.grid.horizon.unwrap_or_else(|| model.horizon());
    let grid = TimeGrid::new(horizon, config.grid.steps)
        .map_err(|e| anyhow!("invalid [grid] section: {e}"))?;

    let mut emitter = Emitter::new(&config, cli);
    match config.command {
        CommandName::Simulate => run_simulate(&config, cli, &model, &grid, &mut emitter),
        CommandName::Skeleton => run_skeleton(&config, &model, &grid, &mut emitter),
        CommandName::Rate => run_rate(&config, &model, &grid, &mut emitter),
        CommandName::Verify => run_verify(&config, cli, &model, &mut emitter),
        CommandName::McLdp => run_mc_ldp(&config, cli, &model, &grid, &mut emitter),
        CommandName::ConvergeI => run_converge_i(&config, &model, &grid, &mut emitter),
        CommandName::ConvergeII => run_converge_ii(&config, cli, &model, &grid, &mut emitter),
    }
}

fn run_simulate(
    config: &RunConfig,
    cli: &Cli,
    model: &ModelSpec,
    grid: &TimeGrid,
    emitter: &mut Emitter,
) -> Result<ExitCode> {
    let section = &config.simulate;
    let seed = cli.seed.unwrap_or(section.seed);
    let path = simulate_sde_sample(model, section.epsilon, grid, seed, section.sample)?;
    emitter.emit(None, &io::path_to_csv(&path), &path_rows(&path))?;
    println!(
        "simulate {} K={} eps={} seed={} sample={}: endpoint={} -> {}",
        model.name(),
        grid.steps(),
        section.epsilon,
        seed,
        section.sample,
        fmt_vec(path.endpoint()),
        emitter.files()
    );
    Ok(ExitCode::SUCCESS)
}

fn run_skeleton(
    config: &RunConfig,
    model: &ModelSpec,
    grid: &TimeGrid,
    emitter: &mut Emitter,
) -> Result<ExitCode> {
    let control = config.skeleton.control.build(*grid, model.noise_dim())?;
    let path = solve_skeleton(model, &control, grid)?;
    emitter.emit(None, &io::path_to_csv(&path), &path_rows(&path))?;
    println!(
        "skeleton {} K={}: endpoint={} energy={:.6} -> {}",
        model.name(),
        grid.steps(),
        fmt_vec(path.endpoint()),
        control.energy(),
        emitter.files()
    );
    Ok(ExitCode::SUCCESS)
}

fn run_rate(
    config: &RunConfig,
    model: &ModelSpec,
    grid: &TimeGrid,
    emitter: &mut Emitter,
) -> Result<ExitCode> {
    let section = &config.rate;
    let target = section
        .target
        .clone()
        .ok_or_else(|| anyhow!("[rate].target is required for the rate command"))?;
    let opts = section.optimizer_options();
    let result = minimize_endpoint_action(model, &target, grid, &opts)?;
    emitter.emit(None, &io::rate_to_csv(&result), &rate_row(&result))?;
    emitter.write_file(
        emitter.path_for(Some("control"), "csv"),
        &io::control_to_csv(&result.control),
    )?;

    // Grid-refinement diagnostic: redo the minimization with 2K steps so the
    // discretization bias of the reported action is visible.
    let refined = minimize_endpoint_action(model, &target, &grid.refined(2), &opts);
    let refine_note = match &refined {
        Ok(r) if r.converged => format!("refine2K_delta={:.3e}", (r.action - result.action).abs()),
        Ok(r) => format!("refine2K={}", r.status.label()),
        Err(e) => format!("refine2K_error={e}"),
    };
    println!(
        "rate {} K={}: action={:.6} terminal={:.3e} status={} iters={} {} -> {}",
        model.name(),
        grid.steps(),
        result.action,
        result.terminal_error,
        result.status.label(),
        result.iterations,
        refine_note,
        emitter.files()
    );
    Ok(ExitCode::SUCCESS)
}

fn run_verify(
    config: &RunConfig,
    cli: &Cli,
    model: &ModelSpec,
    emitter: &mut Emitter,
) -> Result<ExitCode> {
    let section = &config.verify;
    let seed = cli.seed.unwrap_or(section.seed);
    let mut reports: Vec<AuditReport> = Vec::new();
    reports.push(audit_monotonicity(
        model,
        section.radius,
        section.n,
        seed,
        section.monotonicity_tolerance,
    )?);
    let (drift, trace) = audit_lyapunov(
        model,
        section.radius,
        section.n,
        seed,
        section.lyapunov_tolerance,
    )?;
    reports.push(drift);
    reports.push(trace);
    reports.push(audit_integrability(
        model,
        section.radius,
        section.time_points,
        section.space_points,
        seed,
    )?);
    if let Some(bundle) = model.lyapunov() {
        reports.push(audit_ratio(
            &bundle.gamma,
            AssumptionTag::RatioGamma,
            section.gamma_cap,
            section.ratio_c_points,
            section.ratio_s_points,
        )?);
    }

    emitter.emit(None, &io::audits_to_csv(&reports), &reports)?;
    let passed = reports.iter().filter(|r| r.passed).count();
    let worst = reports
        .iter()
        .map(|r| r.worst_margin - r.tolerance)
        .fold(f64::NEG_INFINITY, f64::max);
    println!(
        "verify {} R={} n={} seed={}: {passed}/{} audits passed, worst slack {worst:.3e} -> {}",
        model.name(),
        section.radius,
        section.n,
        seed,
        reports.len(),
        emitter.files()
    );
    if passed == reports.len() {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(2))
    }
}

fn run_mc_ldp(
    config: &RunConfig,
    cli: &Cli,
    model: &ModelSpec,
    grid: &TimeGrid,
    emitter: &mut Emitter,
) -> Result<ExitCode> {
    let section = &config.mc_ldp;
    let seed = cli.seed.unwrap_or(section.seed);
    let event = section
        .event
        .clone()
        .ok_or_else(|| anyhow!("[mc-ldp].event is required for the mc-ldp command"))?;
    let rate_value = match (section.rate_value, &event) {
        (Some(v), _) => v,
        (None, EventSpec::EndpointHalfspace { a, c }) => {
            let target = TargetSpec::halfspace(a.clone(), *c, 1e-6);
            let result =
                minimize_endpoint_action(model, &target, grid, &OptimizerOptions::default())?;
            if !result.converged {
                bail!(
                    "action minimization for the event did not converge (status {}); \
                     set [mc-ldp].rate_value explicitly",
                    result.status.label()
                );
            }
            result.action
        }
        (None, EventSpec::ExitBall { .. }) => {
            bail!("[mc-ldp].rate_value is required for exit_ball events")
        }
    };
    let rows = ldp_scaling_report(
        model,
        &event,
        &section.epsilons,
        section.n,
        grid,
        seed,
        rate_value,
    )?;
    emitter.emit(None, &io::scaling_to_csv(&rows), &rows)?;
    let last = rows.last().expect("at least one epsilon");
    let last_scaling = last
        .eps_log_p
        .map(|v| format!("{v:.6}"))
        .unwrap_or_else(|| "n/a (zero hits)".to_string());
    println!(
        "mc-ldp {} n={} seed={}: rate={:.6}, eps={:?}, eps_log_p(last)={} -> {}",
        model.name(),
        section.n,
        seed,
        rate_value,
        section.epsilons,
        last_scaling,
        emitter.files()
    );
    Ok(ExitCode::SUCCESS)
}

fn run_converge_i(
    config: &RunConfig,
    model: &ModelSpec,
    grid: &TimeGrid,
    emitter: &mut Emitter,
) -> Result<ExitCode> {
    let section = &config.converge_i;
    if section.indices.is_empty() {
        bail!("[converge-i].indices must be nonempty");
    }
    let family = sinusoid_family(*grid, &section.indices, &section.amplitude)?;
    let limit = Control::zero(*grid, section.amplitude.len());
    let rows = weak_convergence_statement_i(model, &family, &limit, grid)?;
    emitter.emit(None, &io::weak_to_csv(&rows), &rows)?;
    let first = &rows[0];
    let last = rows.last().unwrap();
    println!(
        "converge-i {} K={}: indices {}..{}, distance {:.6} -> {:.6} -> {}",
        model.name(),
        grid.steps(),
        first.index,
        last.index,
        first.distance,
        last.distance,
        emitter.files()
    );
    Ok(ExitCode::SUCCESS)
}

fn run_converge_ii(
    config: &RunConfig,
    cli: &Cli,
    model: &ModelSpec,
    grid: &TimeGrid,
    emitter: &mut Emitter,
) -> Result<ExitCode> {
    let section = &config.converge_ii;
    let seed = cli.seed.unwrap_or(section.seed);
    let control = section.control.build(*grid, model.noise_dim())?;
    let passage = section.passage.unwrap_or(section.delta * section.delta);
    let rows = convergence_statement_ii(
        model,
        &control,
        &section.epsilons,
        section.delta,
        section.n,
        grid,
        seed,
        section.radius,
        passage,
    )?;
    emitter.emit(None, &io::convergence_to_csv(&rows), &rows)?;
    let fractions: Vec<String> = rows
        .iter()
        .map(|r| format!("{:.4}", r.fraction_exceed))
        .collect();
    println!(
        "converge-ii {} delta={} n={} seed={}: exceedance fractions [{}] -> {}",
        model.name(),
        section.delta,
        section.n,
        seed,
        fractions.join(", "),
        emitter.files()
    );
    Ok(ExitCode::SUCCESS)
}
