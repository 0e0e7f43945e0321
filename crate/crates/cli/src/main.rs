//! `singqc` command-line driver.
//!
//! Every subcommand takes its parameters as flags, from a TOML file given
//! with `--config`, or both; flags override file values.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use singqc::baselines::{dg_sequence, slngqc_sequence};
use singqc::fidelity::{single_qubit_fidelity, FidelityReport};
use singqc::invariants::run_invariant_suite;
use singqc::lindblad::{qubit_channels, ErrorModel, EvolutionConfig, HamiltonianSource, ScheduleDrive};
use singqc::paths::{bloch_trajectory, synthesize, GateParams, NamedGate, PathVariant, PulseSchedule};
use singqc::rydberg::RydbergSpec;
use singqc::sweep::{
    reproduce_figure, run_sweep, Axis, GateName, GateSpec, Range, Scenario, SweepError, SweepSpec, TargetKind,
    FIGURE_IDS,
};

#[derive(Parser)]
#[command(name = "singqc", version, about = "Geometric gate synthesis, simulation and robustness sweeps")]
struct Cli {
    /// Worker threads for parallel evaluation (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a pulse schedule and print it as TOML.
    Synthesize(SynthesizeArgs),
    /// Simulate one schedule and report its six-state fidelity.
    Simulate(SimulateArgs),
    /// Run a one-axis parameter sweep and write CSV.
    Sweep(SweepArgs),
    /// Evaluate a Rydberg register gate at one parameter point.
    Rydberg(RydbergArgs),
    /// Regenerate the datasets behind a figure panel.
    Reproduce(ReproduceArgs),
    /// Run the invariant self-checks.
    Check(CheckArgs),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
enum SchemeName {
    #[default]
    Singqc,
    Dg,
    Slngqc,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
enum PathName {
    #[default]
    Path1,
    Path2,
}

impl From<PathName> for PathVariant {
    fn from(p: PathName) -> Self {
        match p {
            PathName::Path1 => PathVariant::Path1,
            PathName::Path2 => PathVariant::Path2,
        }
    }
}

/// Flags shared by `synthesize` and `simulate` that pick a schedule.
#[derive(Args, Serialize, Default)]
struct GateFlags {
    /// S, H, or a geometric triple "theta0,phi0,gamma" (SINGQC only).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    gate: Option<String>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    path: Option<PathName>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    scheme: Option<SchemeName>,
    /// Maximum Rabi frequency Ω in rad/s.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    omega: Option<f64>,
}

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct GateParamsDoc {
    gate: String,
    path: PathName,
    scheme: SchemeName,
    omega: f64,
}

impl Default for GateParamsDoc {
    fn default() -> Self {
        Self { gate: "S".into(), path: PathName::Path1, scheme: SchemeName::Singqc, omega: 1.0 }
    }
}

impl GateParamsDoc {
    fn schedule(&self) -> Result<PulseSchedule> {
        let gate: GateSpec = self.gate.parse().map_err(|e: String| anyhow!(e))?;
        let path = PathVariant::from(self.path);
        let named = match gate {
            GateSpec::Named(GateName::S) => Some(NamedGate::S),
            GateSpec::Named(GateName::H) => Some(NamedGate::H),
            GateSpec::Named(GateName::Cnz) => bail!("gate CNZ is a register gate; use the rydberg subcommand"),
            GateSpec::Custom { .. } => None,
        };
        Ok(match (self.scheme, named, gate) {
            (SchemeName::Dg, Some(g), _) => dg_sequence(g, self.omega),
            (SchemeName::Slngqc, Some(g), _) => slngqc_sequence(g, self.omega),
            (SchemeName::Singqc, Some(g), _) => synthesize(g.geometric_params(path), self.omega)?,
            (SchemeName::Singqc, None, GateSpec::Custom { theta0, phi0, gamma }) => {
                synthesize(GateParams::new(theta0, phi0, gamma, path)?, self.omega)?
            }
            (scheme, _, _) => bail!("scheme {scheme:?} only implements the S and H gates"),
        })
    }
}

#[derive(Args)]
struct SynthesizeArgs {
    /// TOML file with any of the flag values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    flags: GateFlags,
    /// Write the schedule here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct SimulateFlags {
    /// Read the schedule from a TOML file instead of synthesizing it.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    schedule: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    gate: GateFlags,
    /// Control (amplitude) error ε.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon: Option<f64>,
    /// Detuning error η, in units of Ω.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    eta: Option<f64>,
    /// Relative phase error χ.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    chi: Option<f64>,
    /// Γ₋ = Γ_z, in the time unit set by --omega.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma_rate: Option<f64>,
    /// RK4 step as a fraction of 1/‖H‖.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    step_fraction: Option<f64>,
}

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SimulateDoc {
    schedule: Option<PathBuf>,
    gate: String,
    path: PathName,
    scheme: SchemeName,
    omega: f64,
    epsilon: f64,
    eta: f64,
    chi: f64,
    gamma_rate: f64,
    step_fraction: f64,
}

impl Default for SimulateDoc {
    fn default() -> Self {
        let g = GateParamsDoc::default();
        Self {
            schedule: None,
            gate: g.gate,
            path: g.path,
            scheme: g.scheme,
            omega: g.omega,
            epsilon: 0.0,
            eta: 0.0,
            chi: 0.0,
            gamma_rate: 0.0,
            step_fraction: EvolutionConfig::DEFAULT_STEP_FRACTION,
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    flags: SimulateFlags,
    /// Also write the Bloch trajectory of |μ₁(0)⟩ as CSV.
    #[arg(long)]
    trajectory: Option<PathBuf>,
    /// Samples in the trajectory.
    #[arg(long, default_value_t = 201)]
    samples: usize,
}

#[derive(Args, Serialize)]
struct SweepFlags {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    scenario: Option<Scenario>,
    /// S, H, CNZ or "theta0,phi0,gamma".
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    gate: Option<GateSpec>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    axis: Option<Axis>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    /// Register fidelity reference (ideal or cz).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    target: Option<TargetKind>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    flags: SweepFlags,
    #[arg(long, allow_hyphen_values = true)]
    start: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    stop: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    /// Fixed parameter as key=value; repeatable.
    #[arg(long = "fixed", value_name = "KEY=VALUE")]
    fixed: Vec<String>,
    /// CSV destination (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
enum LevelsName {
    #[default]
    Reduced,
    Full,
}

#[derive(Args, Serialize)]
struct RydbergFlags {
    /// Number of control atoms (1 to 3).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    controls: Option<usize>,
    /// CNZ, dg (resonant 2π reference, one control only) or "theta0,phi0,gamma".
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    gate: Option<String>,
    /// Rydberg lifetime in seconds.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    tau_r: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon_c: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon_t: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    eta_prime: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    target: Option<TargetKind>,
    /// Evaluate a seeded sample of this many initial states.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    sample: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    /// Keep the dark level |2⟩ explicitly (full) or fold it into loss (reduced).
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    levels: Option<LevelsName>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    step_fraction: Option<f64>,
}

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RydbergDoc {
    controls: usize,
    gate: String,
    tau_r: Option<f64>,
    epsilon_c: f64,
    epsilon_t: f64,
    eta_prime: f64,
    target: TargetKind,
    sample: Option<usize>,
    seed: u64,
    levels: LevelsName,
    step_fraction: Option<f64>,
}

impl Default for RydbergDoc {
    fn default() -> Self {
        Self {
            controls: 1,
            gate: "CNZ".into(),
            tau_r: None,
            epsilon_c: 0.0,
            epsilon_t: 0.0,
            eta_prime: 0.0,
            target: TargetKind::Ideal,
            sample: None,
            seed: 0,
            levels: LevelsName::Reduced,
            step_fraction: None,
        }
    }
}

#[derive(Args)]
struct RydbergArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    flags: RydbergFlags,
}

#[derive(Args)]
struct ReproduceArgs {
    /// Panel id such as 2a or 6d, or "all".
    #[arg(long)]
    figure: String,
    #[arg(long, default_value = "figures")]
    out_dir: PathBuf,
    /// Grid points per curve (default: 41 single-qubit, 9 register).
    #[arg(long)]
    points: Option<usize>,
}

#[derive(Args)]
struct CheckArgs {
    /// Seed for the random superposition states.
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

/// Overlays `overlay` onto `base`, merging nested tables key by key.
fn merge_tables(base: &mut toml::Table, overlay: toml::Table) {
    for (key, value) in overlay {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge_tables(b, o),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

fn read_config(path: Option<&Path>) -> Result<toml::Table> {
    let Some(path) = path else {
        return Ok(toml::Table::new());
    };
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
}

/// File values overridden by flag values, deserialized into `T`.
fn resolve<T: DeserializeOwned>(config: Option<&Path>, flags: toml::Table) -> Result<T> {
    let mut table = read_config(config)?;
    merge_tables(&mut table, flags);
    T::deserialize(toml::Value::Table(table)).context("invalid parameters")
}

fn flag_table(flags: &impl Serialize) -> Result<toml::Table> {
    Ok(toml::Table::try_from(flags)?)
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn report_toml(report: &FidelityReport) -> String {
    let mut out = format!("fidelity = {:.11e}\nn_states = {}\nsampled = {}\n", report.value, report.n_states, report.sampled);
    if let Some(seed) = report.seed {
        let _ = writeln!(out, "seed = {seed}");
    }
    if let Some(se) = report.stderr {
        let _ = writeln!(out, "stderr = {se:.11e}");
    }
    out
}

fn cmd_synthesize(args: SynthesizeArgs) -> Result<()> {
    let doc: GateParamsDoc = resolve(args.config.as_deref(), flag_table(&args.flags)?)?;
    write_output(args.out.as_deref(), &doc.schedule()?.to_toml())
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let doc: SimulateDoc = resolve(args.config.as_deref(), flag_table(&args.flags)?)?;
    let schedule = match &doc.schedule {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            PulseSchedule::from_toml(&text)?
        }
        None => GateParamsDoc { gate: doc.gate.clone(), path: doc.path, scheme: doc.scheme, omega: doc.omega }
            .schedule()?,
    };
    let target = schedule
        .target_unitary()
        .ok_or_else(|| anyhow!("schedule scheme 'custom' names no target gate"))?;
    let errors = ErrorModel { epsilon: doc.epsilon, eta: doc.eta, chi: doc.chi };
    let channels = qubit_channels(doc.gamma_rate, doc.gamma_rate)?;
    let bound = ScheduleDrive::new(&schedule, errors).norm_bound() + 2.0 * doc.gamma_rate;
    let cfg = EvolutionConfig::resolving(bound, doc.step_fraction);
    let report = single_qubit_fidelity(&schedule, errors, &channels, &target, &cfg)?;
    print!("{}", report_toml(&report));
    if let Some(path) = args.trajectory {
        let mut csv = String::from("t,theta,phi\n");
        for p in bloch_trajectory(&schedule, args.samples)? {
            let _ = writeln!(csv, "{:.11e},{:.11e},{:.11e}", p.t, p.theta, p.phi);
        }
        write_output(Some(&path), &csv)?;
    }
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let mut flags = flag_table(&args.flags)?;
    let mut range = toml::Table::new();
    if let Some(v) = args.start {
        range.insert("start".into(), v.into());
    }
    if let Some(v) = args.stop {
        range.insert("stop".into(), v.into());
    }
    if let Some(v) = args.steps {
        range.insert("steps".into(), toml::Value::Integer(i64::try_from(v)?));
    }
    if !range.is_empty() {
        flags.insert("range".into(), range.into());
    }
    let mut fixed = toml::Table::new();
    for item in &args.fixed {
        let (key, value) = item.split_once('=').ok_or_else(|| anyhow!("--fixed expects KEY=VALUE, got '{item}'"))?;
        let value: f64 = value.trim().parse().with_context(|| format!("--fixed {key}: not a number"))?;
        fixed.insert(key.trim().to_string(), value.into());
    }
    if !fixed.is_empty() {
        flags.insert("fixed".into(), fixed.into());
    }
    let spec: SweepSpec = resolve(args.config.as_deref(), flags)?;
    let result = run_sweep(&spec)?;
    match &args.out {
        Some(path) => result.write_csv(path)?,
        None => print!("{}", result.to_csv()),
    }
    Ok(())
}

fn cmd_rydberg(args: RydbergArgs) -> Result<()> {
    let doc: RydbergDoc = resolve(args.config.as_deref(), flag_table(&args.flags)?)?;
    let dynamical = doc.gate.eq_ignore_ascii_case("dg");
    let scenario = match (doc.controls, dynamical) {
        (1, true) => Scenario::RydbergDgCz,
        (_, true) => bail!("the dynamical reference gate is defined for one control atom"),
        (1, false) => Scenario::RydbergCz,
        (2, false) => Scenario::RydbergC2z,
        (3, false) => Scenario::RydbergC3z,
        (n, _) => bail!("controls must be 1, 2 or 3, got {n}"),
    };
    let gate = if dynamical { GateSpec::CNZ } else { doc.gate.parse().map_err(|e: String| anyhow!(e))? };
    // a single point; the range only satisfies validation
    let range = Range { start: 1e-6, stop: 1.0, steps: 2 };
    let mut spec = SweepSpec::new(scenario, gate, Axis::Lifetime, range);
    spec.seed = doc.seed;
    spec.target = Some(doc.target);
    for (key, value) in [
        ("epsilon_c", Some(doc.epsilon_c)),
        ("epsilon_t", Some(doc.epsilon_t)),
        ("eta_prime", Some(doc.eta_prime)),
        ("step_fraction", doc.step_fraction),
        ("sample_k", doc.sample.map(|k| k as f64)),
        ("full_levels", Some(if doc.levels == LevelsName::Full { 1.0 } else { 0.0 })),
    ] {
        if let Some(v) = value {
            spec.fixed.insert(key.into(), v);
        }
    }
    spec.validate()?;
    let tau_r = doc.tau_r.unwrap_or(RydbergSpec::reference_point(doc.controls).tau_r);
    let report = spec.evaluate(tau_r)?;
    println!("scenario = \"{scenario}\"\ntau_r = {tau_r:e}");
    print!("{}", report_toml(&report));
    Ok(())
}

fn cmd_reproduce(args: ReproduceArgs) -> Result<()> {
    let ids: Vec<&str> = if args.figure == "all" { FIGURE_IDS.to_vec() } else { vec![args.figure.as_str()] };
    for id in ids {
        for path in reproduce_figure(id, &args.out_dir, args.points)? {
            println!("{}", path.display());
        }
    }
    Ok(())
}

fn cmd_check(args: CheckArgs) -> Result<()> {
    let outcomes = run_invariant_suite(args.seed);
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    for o in &outcomes {
        let verdict = if o.passed { "PASS" } else { "FAIL" };
        println!("{verdict} {} (value {:.3e}, limit {:.1e})", o.name, o.value, o.threshold);
    }
    println!("{} checks, {} failed", outcomes.len(), failed);
    if failed > 0 {
        bail!("{failed} invariant checks failed");
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            bail!("--jobs must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global()?;
    }
    match cli.command {
        Command::Synthesize(a) => cmd_synthesize(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Rydberg(a) => cmd_rydberg(a),
        Command::Reproduce(a) => cmd_reproduce(a),
        Command::Check(a) => cmd_check(a),
    }
}

/// One-line `key=value` error record on stderr.
fn error_line(err: &anyhow::Error) -> String {
    let kind = if err.downcast_ref::<SweepError>().is_some() {
        "sweep"
    } else if err.downcast_ref::<singqc::paths::PathError>().is_some() {
        "schedule"
    } else if err.downcast_ref::<std::io::Error>().is_some() {
        "io"
    } else if err.chain().any(|c| c.downcast_ref::<toml::de::Error>().is_some()) {
        "config"
    } else {
        "runtime"
    };
    let message = format!("{err:#}").replace('\n', " ");
    format!("error kind={kind} message={message:?}")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", error_line(&err));
            ExitCode::FAILURE
        }
    }
}
