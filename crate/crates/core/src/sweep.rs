//! Parameter sweeps and figure datasets.
//!
//! A [`SweepSpec`] names a scenario, a gate, one swept axis and fixed
//! values for everything else. Each grid point is evaluated independently
//! (in parallel through rayon) and rows come back in grid order.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::Operator;
use crate::baselines::{dg_sequence, slngqc_sequence};
use crate::fidelity::{
    cnz_target, multiqubit_fidelity, single_qubit_fidelity, FidelityError, FidelityReport, MultiTarget, Sampling,
};
use crate::lindblad::{qubit_channels, ErrorModel, EvolutionConfig, HamiltonianSource, LindbladError, ScheduleDrive};
use crate::paths::{synthesize, GateParams, NamedGate, PathError, PathVariant, PulseSchedule};
use crate::rydberg::{
    register_config, LevelSet, RydbergError, RydbergErrors, RydbergGate, RydbergSpec, REGISTER_STEP_FRACTION,
};

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("range needs at least 2 steps, got {0}")]
    TooFewSteps(usize),
    #[error("range start {start} must be below stop {stop}")]
    EmptyRange { start: f64, stop: f64 },
    #[error("axis '{axis}' does not apply to scenario '{scenario}'")]
    AxisScenario { axis: Axis, scenario: Scenario },
    #[error("gate '{gate}' is not available for scenario '{scenario}'")]
    GateScenario { gate: String, scenario: Scenario },
    #[error("unknown fixed parameter '{key}' for scenario '{scenario}'")]
    UnknownFixed { key: String, scenario: Scenario },
    #[error("fixed parameter '{key}' = {value} is invalid: {reason}")]
    BadFixed { key: String, value: f64, reason: &'static str },
    #[error("unknown figure id '{0}'")]
    UnknownFigure(String),
    #[error("invalid sweep config: {0}")]
    Config(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Fidelity(#[from] FidelityError),
    #[error(transparent)]
    Path(#[from] PathError),
    #[error(transparent)]
    Evolution(#[from] LindbladError),
    #[error(transparent)]
    Register(#[from] RydbergError),
}

macro_rules! kebab_enum {
    ($name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
        pub enum $name {
            $(#[serde(rename = $text)] $variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(&self) -> &'static str {
                match self { $($name::$variant => $text),+ }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($text => Ok($name::$variant),)+
                    other => Err(format!(
                        "unknown {} '{}' (expected one of: {})",
                        stringify!($name).to_lowercase(),
                        other,
                        [$($text),+].join(", ")
                    )),
                }
            }
        }
    };
}

kebab_enum!(Scenario {
    SingqcPath1 => "singqc-path1",
    SingqcPath2 => "singqc-path2",
    Dg => "dg",
    Slngqc => "slngqc",
    RydbergCz => "rydberg-cz",
    RydbergDgCz => "rydberg-dg-cz",
    RydbergC2z => "rydberg-c2z",
    RydbergC3z => "rydberg-c3z",
});

kebab_enum!(Axis {
    Epsilon => "epsilon",
    Eta => "eta",
    Chi => "chi",
    GammaRate => "gamma_rate",
    EpsilonT => "epsilon_t",
    EpsilonC => "epsilon_c",
    EtaPrime => "eta_prime",
    Lifetime => "lifetime",
});

kebab_enum!(TargetKind {
    Ideal => "ideal",
    Cz => "cz",
});

impl Scenario {
    pub fn is_register(&self) -> bool {
        self.n_controls().is_some()
    }

    pub fn n_controls(&self) -> Option<usize> {
        match self {
            Scenario::RydbergCz | Scenario::RydbergDgCz => Some(1),
            Scenario::RydbergC2z => Some(2),
            Scenario::RydbergC3z => Some(3),
            _ => None,
        }
    }

    fn fixed_keys(&self) -> &'static [&'static str] {
        if self.is_register() {
            &[
                "tau_r", "epsilon_c", "epsilon_t", "eta_prime", "step_fraction", "sample_k", "omega_c_bar",
                "omega_mod", "omega_t", "v_c", "v_t", "full_levels",
            ]
        } else {
            &["omega", "epsilon", "eta", "chi", "gamma_rate", "step_fraction"]
        }
    }
}

impl Axis {
    pub fn applies_to(&self, scenario: Scenario) -> bool {
        let register = matches!(self, Axis::EpsilonT | Axis::EpsilonC | Axis::EtaPrime | Axis::Lifetime);
        register == scenario.is_register()
    }

    fn key(&self) -> &'static str {
        match self {
            Axis::Lifetime => "tau_r",
            other => other.as_str(),
        }
    }
}

/// Gate selector: a named single-qubit gate, the register gate, or an
/// explicit geometric triple.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GateSpec {
    Named(GateName),
    Custom { theta0: f64, phi0: f64, gamma: f64 },
}

kebab_enum!(GateName {
    S => "S",
    H => "H",
    Cnz => "CNZ",
});

impl GateSpec {
    pub const S: GateSpec = GateSpec::Named(GateName::S);
    pub const H: GateSpec = GateSpec::Named(GateName::H);
    pub const CNZ: GateSpec = GateSpec::Named(GateName::Cnz);

    fn label(&self) -> String {
        match self {
            GateSpec::Named(n) => n.to_string(),
            GateSpec::Custom { theta0, phi0, gamma } => format!("custom({theta0}, {phi0}, {gamma})"),
        }
    }
}

impl FromStr for GateSpec {
    type Err = String;
    /// "S", "H", "CNZ" or "θ₀,φ₀,γ".
    fn from_str(s: &str) -> Result<Self, String> {
        if let Ok(n) = s.parse::<GateName>() {
            return Ok(GateSpec::Named(n));
        }
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() == 3 {
            let v: Result<Vec<f64>, _> = parts.iter().map(|p| p.parse::<f64>()).collect();
            if let Ok(v) = v {
                return Ok(GateSpec::Custom { theta0: v[0], phi0: v[1], gamma: v[2] });
            }
        }
        Err(format!("gate must be S, H, CNZ or 'theta0,phi0,gamma', got '{s}'"))
    }
}

/// Geometric triple used for register gates unless overridden: (0, 0, π).
pub fn default_register_params() -> GateParams {
    GateParams { theta0: 0.0, phi0: 0.0, gamma: PI, path: PathVariant::Path1 }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl Range {
    /// Grid values rounded to the 12 significant digits written to CSV, so
    /// that overlapping grids evaluate bit-identical points.
    pub fn values(&self) -> Vec<f64> {
        let n = self.steps;
        (0..n)
            .map(|i| {
                let raw = self.start + (self.stop - self.start) * i as f64 / (n - 1) as f64;
                round_sig(raw)
            })
            .collect()
    }
}

fn round_sig(x: f64) -> f64 {
    format!("{x:.11e}").parse().expect("formatted float parses")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub scenario: Scenario,
    pub gate: GateSpec,
    pub axis: Axis,
    pub range: Range,
    #[serde(default)]
    pub fixed: BTreeMap<String, f64>,
    #[serde(default)]
    pub seed: u64,
    /// Register fidelity reference; defaults to the ideal evolution.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<TargetKind>,
}

impl SweepSpec {
    pub fn new(scenario: Scenario, gate: GateSpec, axis: Axis, range: Range) -> Self {
        Self { scenario, gate, axis, range, fixed: BTreeMap::new(), seed: 0, target: None }
    }

    pub fn with_fixed(mut self, key: &str, value: f64) -> Self {
        self.fixed.insert(key.to_string(), value);
        self
    }

    pub fn from_toml(text: &str) -> Result<Self, SweepError> {
        let spec: Self = toml::from_str(text).map_err(|e| SweepError::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("sweep spec serializes")
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        let Range { start, stop, steps } = self.range;
        if steps < 2 {
            return Err(SweepError::TooFewSteps(steps));
        }
        if !(start < stop) {
            return Err(SweepError::EmptyRange { start, stop });
        }
        if !self.axis.applies_to(self.scenario) {
            return Err(SweepError::AxisScenario { axis: self.axis, scenario: self.scenario });
        }
        let gate_ok = match (self.scenario, self.gate) {
            (s, GateSpec::Named(GateName::Cnz)) => s.is_register(),
            (s, GateSpec::Named(_)) => !s.is_register(),
            (Scenario::Dg | Scenario::Slngqc, GateSpec::Custom { .. }) => false,
            (Scenario::RydbergDgCz, GateSpec::Custom { .. }) => false,
            (_, GateSpec::Custom { .. }) => true,
        };
        if !gate_ok {
            return Err(SweepError::GateScenario { gate: self.gate.label(), scenario: self.scenario });
        }
        let keys = self.scenario.fixed_keys();
        for (key, &value) in &self.fixed {
            if !keys.contains(&key.as_str()) {
                return Err(SweepError::UnknownFixed { key: key.clone(), scenario: self.scenario });
            }
            if !value.is_finite() {
                return Err(SweepError::BadFixed { key: key.clone(), value, reason: "not finite" });
            }
        }
        if self.axis == Axis::Lifetime && start <= 0.0 {
            return Err(SweepError::BadFixed { key: "tau_r".into(), value: start, reason: "lifetime must be positive" });
        }
        if self.axis == Axis::GammaRate && start < 0.0 {
            return Err(SweepError::BadFixed { key: "gamma_rate".into(), value: start, reason: "rates are non-negative" });
        }
        Ok(())
    }

    fn get(&self, key: &str, axis_value: f64, default: f64) -> f64 {
        if self.axis.key() == key {
            axis_value
        } else {
            self.fixed.get(key).copied().unwrap_or(default)
        }
    }

    /// Evaluates one grid point.
    pub fn evaluate(&self, axis_value: f64) -> Result<FidelityReport, SweepError> {
        if self.scenario.is_register() {
            self.evaluate_register(axis_value)
        } else {
            self.evaluate_qubit(axis_value)
        }
    }

    fn qubit_schedule(&self, omega: f64) -> Result<(PulseSchedule, Operator), SweepError> {
        let named = match self.gate {
            GateSpec::Named(GateName::S) => Some(NamedGate::S),
            GateSpec::Named(GateName::H) => Some(NamedGate::H),
            _ => None,
        };
        let path = match self.scenario {
            Scenario::SingqcPath2 => PathVariant::Path2,
            _ => PathVariant::Path1,
        };
        let schedule = match (self.scenario, named) {
            (Scenario::Dg, Some(g)) => dg_sequence(g, omega),
            (Scenario::Slngqc, Some(g)) => slngqc_sequence(g, omega),
            (_, Some(g)) => synthesize(g.geometric_params(path), omega)?,
            (_, None) => match self.gate {
                GateSpec::Custom { theta0, phi0, gamma } => {
                    synthesize(GateParams::new(theta0, phi0, gamma, path)?, omega)?
                }
                _ => unreachable!("validated gate/scenario pairing"),
            },
        };
        let target = match (named, schedule.gate_params()) {
            (Some(g), _) => g.unitary(),
            (None, Some(p)) => p.realized_unitary(),
            (None, None) => unreachable!("custom gates are geometric"),
        };
        Ok((schedule, target))
    }

    fn evaluate_qubit(&self, x: f64) -> Result<FidelityReport, SweepError> {
        let omega = self.get("omega", x, 1.0);
        if !(omega > 0.0) {
            return Err(SweepError::BadFixed { key: "omega".into(), value: omega, reason: "must be positive" });
        }
        let errors = ErrorModel { epsilon: self.get("epsilon", x, 0.0), eta: self.get("eta", x, 0.0), chi: self.get("chi", x, 0.0) };
        let gamma = self.get("gamma_rate", x, 0.0);
        let channels = qubit_channels(gamma, gamma)?;
        let (schedule, target) = self.qubit_schedule(omega)?;
        let fraction = self.get("step_fraction", x, EvolutionConfig::DEFAULT_STEP_FRACTION);
        let bound = ScheduleDrive::new(&schedule, errors).norm_bound() + 2.0 * gamma;
        let cfg = EvolutionConfig::resolving(bound, fraction);
        Ok(single_qubit_fidelity(&schedule, errors, &channels, &target, &cfg)?)
    }

    pub fn register_spec(&self, x: f64) -> RydbergSpec {
        let n = self.scenario.n_controls().expect("register scenario");
        let d = RydbergSpec::reference_point(n);
        RydbergSpec {
            n_controls: n,
            omega_c_bar: self.get("omega_c_bar", x, d.omega_c_bar),
            omega_mod: self.get("omega_mod", x, d.omega_mod),
            omega_t: self.get("omega_t", x, d.omega_t),
            v_c: self.get("v_c", x, d.v_c),
            v_t: self.get("v_t", x, d.v_t),
            tau_r: self.get("tau_r", x, d.tau_r),
        }
    }

    fn evaluate_register(&self, x: f64) -> Result<FidelityReport, SweepError> {
        let spec = self.register_spec(x);
        let params = match self.gate {
            GateSpec::Custom { theta0, phi0, gamma } => GateParams::new(theta0, phi0, gamma, PathVariant::Path1)?,
            _ => default_register_params(),
        };
        let levels = if self.get("full_levels", x, 0.0) != 0.0 { LevelSet::Full } else { LevelSet::DarkEliminated };
        let gate = if self.scenario == Scenario::RydbergDgCz {
            RydbergGate::dynamical_cz(spec, levels)?
        } else {
            RydbergGate::new(spec, params, levels)?
        };
        let errors = RydbergErrors {
            epsilon_c: self.get("epsilon_c", x, 0.0),
            epsilon_t: self.get("epsilon_t", x, 0.0),
            eta_prime: self.get("eta_prime", x, 0.0),
        };
        let default_k = if self.scenario == Scenario::RydbergC3z { 64.0 } else { 0.0 };
        let k = self.get("sample_k", x, default_k);
        let sampling = if k > 0.0 { Sampling::Sample { k: k as usize, seed: self.seed } } else { Sampling::Full };
        let target = match self.target.unwrap_or(TargetKind::Ideal) {
            TargetKind::Ideal => MultiTarget::IdealEvolution,
            TargetKind::Cz => MultiTarget::Computational(cnz_target(spec.n_atoms())),
        };
        let fraction = self.get("step_fraction", x, REGISTER_STEP_FRACTION);
        let cfg = register_config(&spec, fraction);
        Ok(multiqubit_fidelity(&gate, errors, &gate.collapse_channels(), &target, sampling, &cfg)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub axis_value: f64,
    pub fidelity: f64,
    pub n_states: usize,
    pub sampled: bool,
    pub stderr: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub rows: Vec<SweepRow>,
    pub version: String,
    pub wall_time_s: f64,
}

pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult, SweepError> {
    spec.validate()?;
    let clock = Instant::now();
    let rows = spec
        .range
        .values()
        .par_iter()
        .map(|&x| {
            let r = spec.evaluate(x)?;
            Ok(SweepRow { axis_value: x, fidelity: r.value, n_states: r.n_states, sampled: r.sampled, stderr: r.stderr })
        })
        .collect::<Result<Vec<_>, SweepError>>()?;
    Ok(SweepResult {
        spec: spec.clone(),
        rows,
        version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time_s: clock.elapsed().as_secs_f64(),
    })
}

fn sig12(x: f64) -> String {
    format!("{x:.11e}")
}

impl SweepResult {
    pub const HEADER: &'static str = "axis_value,fidelity,n_states,sampled,stderr";

    pub fn min_fidelity(&self) -> f64 {
        self.rows.iter().map(|r| r.fidelity).fold(f64::INFINITY, f64::min)
    }

    /// `#` metadata lines followed by the header and one row per point.
    pub fn to_csv(&self) -> String {
        let s = &self.spec;
        let mut out = String::new();
        let _ = writeln!(out, "# singqc sweep");
        let _ = writeln!(out, "# version = {}", self.version);
        let _ = writeln!(out, "# scenario = {}", s.scenario);
        let _ = writeln!(out, "# gate = {}", s.gate.label());
        let _ = writeln!(out, "# axis = {}", s.axis);
        let _ = writeln!(out, "# range = {} .. {} ({} steps)", s.range.start, s.range.stop, s.range.steps);
        for (k, v) in &s.fixed {
            let _ = writeln!(out, "# fixed.{k} = {v}");
        }
        if let Some(t) = s.target {
            let _ = writeln!(out, "# target = {t}");
        }
        let _ = writeln!(out, "# seed = {}", s.seed);
        let _ = writeln!(out, "# wall_time_s = {:.3}", self.wall_time_s);
        out.push_str(&self.csv_body());
        out
    }

    /// Header and rows only; deterministic for a given spec.
    pub fn csv_body(&self) -> String {
        let mut out = String::from(Self::HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                sig12(r.axis_value),
                sig12(r.fidelity),
                r.n_states,
                r.sampled,
                r.stderr.map(sig12).unwrap_or_default()
            );
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), SweepError> {
        std::fs::write(path, self.to_csv()).map_err(|source| SweepError::Io { path: path.to_path_buf(), source })
    }
}

/// One curve of a figure panel.
#[derive(Clone, Debug, Serialize)]
pub struct Curve {
    pub label: String,
    pub spec: SweepSpec,
}

#[derive(Clone, Debug, Serialize)]
pub struct Panel {
    pub id: String,
    pub description: String,
    pub assumptions: Vec<String>,
    pub curves: Vec<Curve>,
}

pub const FIGURE_IDS: &[&str] = &[
    "2a", "2b", "2c", "2d", "3a", "3b", "3c", "3d", "4a", "4b", "4c", "4d", "4e", "4f", "6a", "6b", "6c", "6d", "7a",
    "7b", "7c", "7d", "8a", "8b",
];

/// Γ values (in units of Ω) for the decoherence panels.
pub const DECOHERENCE_LEVELS: [f64; 4] = [0.0, 1e-4, 2e-4, 4e-4];

fn sq(scenario: Scenario, gate: GateSpec, axis: Axis, lo: f64, hi: f64, steps: usize) -> SweepSpec {
    SweepSpec::new(scenario, gate, axis, Range { start: lo, stop: hi, steps })
}

/// Sweep definitions behind a figure panel. `points` overrides the
/// number of grid points per curve.
pub fn figure_panel(id: &str, points: Option<usize>) -> Result<Panel, SweepError> {
    use Scenario::*;
    let q = points.unwrap_or(41);
    let r = points.unwrap_or(9);
    let gate_of = |c: char| if c == 'a' || c == 'c' { GateSpec::S } else { GateSpec::H };
    let axis_of = |c: char| if c == 'a' || c == 'b' { Axis::Epsilon } else { Axis::Eta };
    let panel_char = id.chars().nth(1).unwrap_or('?');
    let curve = |label: &str, spec: SweepSpec| Curve { label: label.to_string(), spec };
    let mut assumptions = Vec::new();
    let (description, curves) = match id {
        "2a" | "2b" | "2c" | "2d" => {
            let (g, a) = (gate_of(panel_char), axis_of(panel_char));
            (
                format!("{} gate fidelity vs {} for SINGQC Path 1, DG and SLNGQC", g.label(), a),
                vec![
                    curve("singqc-path1", sq(SingqcPath1, g, a, -0.2, 0.2, q)),
                    curve("dg", sq(Dg, g, a, -0.2, 0.2, q)),
                    curve("slngqc", sq(Slngqc, g, a, -0.2, 0.2, q)),
                ],
            )
        }
        "3a" | "3b" | "3c" | "3d" => {
            let (g, a) = (gate_of(panel_char), axis_of(panel_char));
            (
                format!("{} gate fidelity vs {} for both SINGQC paths and the baselines", g.label(), a),
                vec![
                    curve("singqc-path1", sq(SingqcPath1, g, a, -0.2, 0.2, q)),
                    curve("singqc-path2", sq(SingqcPath2, g, a, -0.2, 0.2, q)),
                    curve("dg", sq(Dg, g, a, -0.2, 0.2, q)),
                    curve("slngqc", sq(Slngqc, g, a, -0.2, 0.2, q)),
                ],
            )
        }
        "4a" | "4b" | "4c" | "4d" | "4e" | "4f" => {
            let (scenario, axis) = match panel_char {
                'a' => (SingqcPath1, Axis::Epsilon),
                'b' => (SingqcPath2, Axis::Eta),
                'c' => (Dg, Axis::Epsilon),
                'd' => (Dg, Axis::Eta),
                'e' => (Slngqc, Axis::Epsilon),
                _ => (Slngqc, Axis::Eta),
            };
            assumptions.push("curves at Γ ∈ {0, 1e-4, 2e-4, 4e-4}·Ω with Γ₋ = Γ_z; only 4e-4 is quoted".to_string());
            let curves = DECOHERENCE_LEVELS
                .iter()
                .map(|&g| curve(&format!("gamma_{g:e}"), sq(scenario, GateSpec::S, axis, -0.2, 0.2, q).with_fixed("gamma_rate", g)))
                .collect();
            (format!("S gate fidelity vs {axis} under decoherence for {scenario}"), curves)
        }
        "6a" | "7a" => {
            assumptions.push("lifetime axis spans 20-200 μs".to_string());
            let scenarios: &[Scenario] = if id == "6a" { &[RydbergCz, RydbergDgCz] } else { &[RydbergC2z, RydbergC3z] };
            let curves = scenarios
                .iter()
                .map(|&s| curve(s.as_str(), sq(s, GateSpec::CNZ, Axis::Lifetime, 20e-6, 200e-6, r)))
                .collect();
            ("register gate fidelity vs Rydberg lifetime".to_string(), curves)
        }
        "6b" | "6c" | "6d" | "7b" | "7c" | "7d" => {
            let axis = match panel_char {
                'b' => Axis::EpsilonT,
                'c' => Axis::EpsilonC,
                _ => Axis::EtaPrime,
            };
            assumptions.push("τ_r = 200 μs".to_string());
            let scenarios: &[Scenario] = if id.starts_with('6') { &[RydbergCz] } else { &[RydbergC2z, RydbergC3z] };
            let curves = scenarios
                .iter()
                .map(|&s| curve(s.as_str(), sq(s, GateSpec::CNZ, axis, -0.2, 0.2, r).with_fixed("tau_r", 200e-6)))
                .collect();
            (format!("register gate fidelity vs {axis}"), curves)
        }
        "8a" | "8b" => {
            let g = if panel_char == 'a' { GateSpec::S } else { GateSpec::H };
            assumptions.push("χ axis spans [-0.2, 0.2]".to_string());
            (
                format!("{} gate fidelity vs phase error for SINGQC Path 1, DG and SLNGQC", g.label()),
                vec![
                    curve("singqc-path1", sq(SingqcPath1, g, Axis::Chi, -0.2, 0.2, q)),
                    curve("dg", sq(Dg, g, Axis::Chi, -0.2, 0.2, q)),
                    curve("slngqc", sq(Slngqc, g, Axis::Chi, -0.2, 0.2, q)),
                ],
            )
        }
        other => return Err(SweepError::UnknownFigure(other.to_string())),
    };
    if id.starts_with('6') || id.starts_with('7') {
        assumptions.push("register gate triple (θ₀, φ₀, γ) = (0, 0, π); F′ against the ideal evolution".to_string());
        if id == "6a" {
            assumptions.push("dynamical CZ = one resonant 2π Rabi cycle of the target at Ω′".to_string());
        }
    }
    Ok(Panel { id: id.to_string(), description, assumptions, curves })
}

/// Runs every curve of a panel, writing `fig<id>_<label>.csv` files and a
/// `fig<id>_manifest.toml` into `out_dir`.
pub fn reproduce_figure(id: &str, out_dir: &Path, points: Option<usize>) -> Result<Vec<PathBuf>, SweepError> {
    let panel = figure_panel(id, points)?;
    std::fs::create_dir_all(out_dir).map_err(|source| SweepError::Io { path: out_dir.to_path_buf(), source })?;
    let mut written = Vec::new();
    let mut manifest = toml::Table::new();
    manifest.insert("figure".into(), panel.id.clone().into());
    manifest.insert("description".into(), panel.description.clone().into());
    manifest.insert(
        "assumptions".into(),
        toml::Value::Array(panel.assumptions.iter().cloned().map(toml::Value::from).collect()),
    );
    let mut curves = toml::value::Array::new();
    for c in &panel.curves {
        let result = run_sweep(&c.spec)?;
        let file = out_dir.join(format!("fig{}_{}.csv", panel.id, c.label));
        result.write_csv(&file)?;
        let mut entry = toml::Table::new();
        entry.insert("label".into(), c.label.clone().into());
        entry.insert("file".into(), file.file_name().unwrap().to_string_lossy().into_owned().into());
        entry.insert("sweep".into(), toml::Value::try_from(&c.spec).map_err(|e| SweepError::Config(e.to_string()))?);
        curves.push(entry.into());
        written.push(file);
    }
    manifest.insert("curves".into(), curves.into());
    let path = out_dir.join(format!("fig{}_manifest.toml", panel.id));
    std::fs::write(&path, toml::to_string_pretty(&manifest).expect("manifest serializes"))
        .map_err(|source| SweepError::Io { path: path.clone(), source })?;
    written.push(path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(scenario: Scenario, gate: GateSpec, axis: Axis) -> SweepSpec {
        SweepSpec::new(scenario, gate, axis, Range { start: -0.2, stop: 0.2, steps: 3 })
    }

    #[test]
    fn validation_rules() {
        assert!(quick(Scenario::SingqcPath1, GateSpec::S, Axis::Epsilon).validate().is_ok());
        let chi_on_register = quick(Scenario::RydbergCz, GateSpec::CNZ, Axis::Chi);
        assert!(matches!(chi_on_register.validate(), Err(SweepError::AxisScenario { .. })));
        let mut s = quick(Scenario::Dg, GateSpec::S, Axis::Epsilon);
        s.range.steps = 1;
        assert!(matches!(s.validate(), Err(SweepError::TooFewSteps(1))));
        s.range = Range { start: 0.2, stop: 0.2, steps: 3 };
        assert!(matches!(s.validate(), Err(SweepError::EmptyRange { .. })));
        let custom_dg = quick(Scenario::Dg, GateSpec::Custom { theta0: 0.0, phi0: 0.0, gamma: 0.3 }, Axis::Eta);
        assert!(matches!(custom_dg.validate(), Err(SweepError::GateScenario { .. })));
        let bad_key = quick(Scenario::Slngqc, GateSpec::H, Axis::Eta).with_fixed("tau_r", 1.0);
        assert!(matches!(bad_key.validate(), Err(SweepError::UnknownFixed { .. })));
        let s_on_register = quick(Scenario::RydbergC2z, GateSpec::S, Axis::EpsilonT);
        assert!(matches!(s_on_register.validate(), Err(SweepError::GateScenario { .. })));
    }

    #[test]
    fn grid_values_are_rounded_and_ordered() {
        let r = Range { start: -0.2, stop: 0.2, steps: 41 };
        let v = r.values();
        assert_eq!(v.len(), 41);
        assert_eq!(v[20], 0.0);
        assert!(v.windows(2).all(|w| w[0] < w[1]));
        let sub = Range { start: 0.0, stop: 0.2, steps: 21 }.values();
        assert_eq!(&v[20..], &sub[..]);
    }

    #[test]
    fn config_round_trip() {
        let spec = quick(Scenario::SingqcPath2, GateSpec::Custom { theta0: 0.5, phi0: 0.1, gamma: 1.0 }, Axis::Eta)
            .with_fixed("gamma_rate", 1e-4);
        let text = spec.to_toml();
        assert_eq!(SweepSpec::from_toml(&text).unwrap(), spec);
        let named = "scenario = \"dg\"\ngate = \"H\"\naxis = \"chi\"\nseed = 3\n[range]\nstart = -0.1\nstop = 0.1\nsteps = 5\n";
        let parsed = SweepSpec::from_toml(named).unwrap();
        assert_eq!(parsed.gate, GateSpec::H);
        assert!(SweepSpec::from_toml(&named.replace("chi", "lifetime")).is_err());
        assert!(SweepSpec::from_toml(&format!("bogus = 1\n{named}")).is_err());
        assert!(SweepSpec::from_toml(&format!("{named}bogus = 1\n")).is_err());
    }

    #[test]
    fn gate_spec_parsing() {
        assert_eq!("S".parse::<GateSpec>().unwrap(), GateSpec::S);
        assert_eq!("CNZ".parse::<GateSpec>().unwrap(), GateSpec::CNZ);
        assert_eq!(
            "0.5, 0, 1.2".parse::<GateSpec>().unwrap(),
            GateSpec::Custom { theta0: 0.5, phi0: 0.0, gamma: 1.2 }
        );
        assert!("X".parse::<GateSpec>().is_err());
    }

    #[test]
    fn every_figure_id_resolves() {
        for id in FIGURE_IDS {
            let p = figure_panel(id, Some(3)).unwrap();
            assert!(!p.curves.is_empty());
            for c in &p.curves {
                c.spec.validate().unwrap();
            }
        }
        assert_eq!(figure_panel("4a", None).unwrap().curves.len(), 4);
        assert!(matches!(figure_panel("5a", None), Err(SweepError::UnknownFigure(_))));
    }

    #[test]
    fn dg_is_exact_at_zero_error() {
        let spec = SweepSpec::new(Scenario::Dg, GateSpec::S, Axis::Epsilon, Range { start: -0.1, stop: 0.1, steps: 3 });
        let r = run_sweep(&spec).unwrap();
        assert!((r.rows[1].fidelity - 1.0).abs() < 1e-7);
        assert!(r.rows[0].fidelity < r.rows[1].fidelity);
        let csv = r.to_csv();
        assert!(csv.lines().any(|l| l == SweepResult::HEADER));
        assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 4);
    }
}
