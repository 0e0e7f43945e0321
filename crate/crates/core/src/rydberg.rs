//! Multiqubit C_N Z gates on Rydberg atoms.
//!
//! Each atom carries levels {|0⟩, |1⟩, |r⟩, |2⟩}; controls occupy sites
//! 0..N and the target is site N (site 0 varies slowest). The controls are
//! driven on |0⟩↔|r⟩ by Ω̄_c cos ωt with ω = V_t, which blockades the
//! target unless every control sits in |1⟩. The target's |1⟩↔|r⟩ drive
//! follows a synthesized geometric schedule, so the pair
//! {|1…1,1⟩, |1…1,r⟩} undergoes the single-qubit geometric gate.
//!
//! The drive is written in the lab frame: a schedule detuning Δ(t) shows
//! up as the phase factor e^{2iD(t)} on the target coupling, with
//! D(t) = ∫Δ dt, i.e. a laser detuning Δ′ = 2Δ.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{Operator, PureState, C64, ONE, ZERO};
use crate::baselines::ResonantPulse;
use crate::lindblad::{
    evolve_pure, CollapseChannel, ErrorModel, EvolutionConfig, HamiltonianSource, LindbladError, ScheduleDrive,
};
use crate::paths::{synthesize, GateParams, PathError, PathVariant, PhaseKind, PulseSchedule, Scheme};
use crate::sparse::{embed_site, SparseOperator};

pub const LEVEL_0: usize = 0;
pub const LEVEL_1: usize = 1;
pub const LEVEL_R: usize = 2;
pub const LEVEL_2: usize = 3;

/// Largest supported number of control atoms.
pub const MAX_CONTROLS: usize = 4;

#[derive(Debug, Error)]
pub enum RydbergError {
    #[error("n_controls must be in 1..={MAX_CONTROLS}, got {0}")]
    ControlCount(usize),
    #[error("{name} = {value} must be positive and finite")]
    NonPositive { name: &'static str, value: f64 },
    #[error("blockade hierarchy violated: {0}")]
    Hierarchy(String),
    #[error("state has dimension {got}, expected {expected}")]
    Dimension { expected: usize, got: usize },
    #[error(transparent)]
    Path(#[from] PathError),
    #[error(transparent)]
    Evolution(#[from] LindbladError),
}

/// Physical parameters, all rates in rad/s and times in s.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RydbergSpec {
    pub n_controls: usize,
    /// Ω̄_c, peak control Rabi frequency.
    pub omega_c_bar: f64,
    /// ω, control modulation frequency.
    pub omega_mod: f64,
    /// Ω′, target drive amplitude.
    pub omega_t: f64,
    /// V_c, control–control interaction.
    pub v_c: f64,
    /// V_t, control–target interaction.
    pub v_t: f64,
    /// τ_r, Rydberg lifetime.
    pub tau_r: f64,
}

const MHZ: f64 = 2.0 * PI * 1e6;

impl RydbergSpec {
    /// Ω̄_c = 2π×36 MHz, Ω′ = 2π×0.75 MHz, V_t = ω = 2π×400 MHz,
    /// V_c = V_t/7, τ_r = 200 μs.
    pub fn reference_point(n_controls: usize) -> Self {
        let v_t = 400.0 * MHZ;
        Self {
            n_controls,
            omega_c_bar: 36.0 * MHZ,
            omega_mod: v_t,
            omega_t: 0.75 * MHZ,
            v_c: v_t / 7.0,
            v_t,
            tau_r: 200e-6,
        }
    }

    pub fn with_lifetime(self, tau_r: f64) -> Self {
        Self { tau_r, ..self }
    }

    pub fn validate(&self) -> Result<(), RydbergError> {
        if self.n_controls == 0 || self.n_controls > MAX_CONTROLS {
            return Err(RydbergError::ControlCount(self.n_controls));
        }
        for (name, value) in [
            ("omega_c_bar", self.omega_c_bar),
            ("omega_mod", self.omega_mod),
            ("omega_t", self.omega_t),
            ("v_t", self.v_t),
            ("tau_r", self.tau_r),
        ] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(RydbergError::NonPositive { name, value });
            }
        }
        if !(self.v_c >= 0.0) || !self.v_c.is_finite() {
            return Err(RydbergError::NonPositive { name: "v_c", value: self.v_c });
        }
        if self.v_t < 10.0 * self.omega_c_bar.max(self.omega_t) {
            return Err(RydbergError::Hierarchy(format!(
                "V_t = {:.4e} must be at least 10 × max(Ω̄_c, Ω′) = {:.4e}",
                self.v_t,
                10.0 * self.omega_c_bar.max(self.omega_t)
            )));
        }
        if self.omega_c_bar < 10.0 * self.omega_t {
            return Err(RydbergError::Hierarchy(format!(
                "Ω̄_c = {:.4e} must be at least 10 × Ω′ = {:.4e}",
                self.omega_c_bar,
                10.0 * self.omega_t
            )));
        }
        Ok(())
    }

    pub fn n_atoms(&self) -> usize {
        self.n_controls + 1
    }

    pub fn target_site(&self) -> usize {
        self.n_controls
    }

    /// Γ = 1/τ_r.
    pub fn decay_rate(&self) -> f64 {
        1.0 / self.tau_r
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RydbergErrors {
    pub epsilon_c: f64,
    pub epsilon_t: f64,
    pub eta_prime: f64,
}

impl RydbergErrors {
    pub fn ideal() -> Self {
        Self::default()
    }
}

/// Which atomic levels are represented.
///
/// `DarkEliminated` drops |2⟩: nothing couples out of it, so its only role
/// is to absorb population decaying from |r⟩. Keeping that decay as pure
/// loss leaves every matrix element among {|0⟩,|1⟩,|r⟩} unchanged.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LevelSet {
    Full,
    DarkEliminated,
}

impl LevelSet {
    pub fn local_dim(&self) -> usize {
        match self {
            LevelSet::Full => 4,
            LevelSet::DarkEliminated => 3,
        }
    }
}

/// (θ₀, φ₀, γ) = (π, 0, γ*) with cosθ₁ = √3 − 1, which makes the lab-frame
/// phase on |1…1⟩ exactly π.
pub fn cz_gate_params() -> GateParams {
    let c = 3f64.sqrt() - 1.0;
    GateParams { theta0: PI, phi0: 0.0, gamma: PI * (1.0 / c - 1.0), path: PathVariant::Path1 }
}

/// ∫Δ dt accumulated at each segment start.
fn detuning_integrals(schedule: &PulseSchedule) -> Vec<f64> {
    let mut d = 0.0;
    schedule
        .segments
        .iter()
        .map(|s| {
            let start = d;
            d += s.detuning * s.duration;
            start
        })
        .collect()
}

/// Effective two-level gate in the lab frame: e^{iDσ_z}·e^{−iγ n·σ},
/// with D the total detuning area.
pub fn effective_lab_unitary(schedule: &PulseSchedule) -> Option<Operator> {
    let params = schedule.gate_params()?;
    let d: f64 = schedule.segments.iter().map(|s| s.detuning * s.duration).sum();
    let frame = Operator::diagonal(&[C64::from_polar(1.0, d), C64::from_polar(1.0, -d)]);
    Some(frame.matmul(&params.realized_unitary()))
}

/// Target-atom schedule mapped onto an (N+1)-atom register.
#[derive(Clone, Debug, PartialEq)]
pub struct RydbergGate {
    pub spec: RydbergSpec,
    pub schedule: PulseSchedule,
    pub levels: LevelSet,
}

impl RydbergGate {
    pub fn new(spec: RydbergSpec, params: GateParams, levels: LevelSet) -> Result<Self, RydbergError> {
        spec.validate()?;
        let schedule = synthesize(params, spec.omega_t)?;
        Ok(Self { spec, schedule, levels })
    }

    pub fn controlled_z(spec: RydbergSpec, levels: LevelSet) -> Result<Self, RydbergError> {
        Self::new(spec, cz_gate_params(), levels)
    }

    /// Any target schedule, e.g. a dynamical reference pulse.
    pub fn with_schedule(spec: RydbergSpec, schedule: PulseSchedule, levels: LevelSet) -> Result<Self, RydbergError> {
        spec.validate()?;
        Ok(Self { spec, schedule, levels })
    }

    /// Dynamical reference gate: one resonant 2π Rabi cycle of |1⟩_t ↔ |r⟩_t,
    /// which flips the sign of |1⟩_t unless a control atom blocks it.
    pub fn dynamical_cz(spec: RydbergSpec, levels: LevelSet) -> Result<Self, RydbergError> {
        let pulse = ResonantPulse { theta: PI, phase: 0.0, omega: spec.omega_t };
        let schedule = PulseSchedule { scheme: Scheme::Custom, omega: spec.omega_t, segments: vec![pulse.segment()] };
        Self::with_schedule(spec, schedule, levels)
    }

    pub fn local_dim(&self) -> usize {
        self.levels.local_dim()
    }

    pub fn dim(&self) -> usize {
        self.local_dim().pow(self.spec.n_atoms() as u32)
    }

    pub fn duration(&self) -> f64 {
        self.schedule.total_duration()
    }

    /// Laser detuning Δ′ on each segment (twice the schedule detuning).
    pub fn delta_prime(&self) -> Vec<f64> {
        self.schedule.segments.iter().map(|s| 2.0 * s.detuning).collect()
    }

    /// Register index of a product of per-atom levels.
    pub fn index_of(&self, levels: &[usize]) -> usize {
        let d = self.local_dim();
        levels.iter().fold(0, |acc, &l| acc * d + l)
    }

    /// Register index of computational basis state `bits` (atom 0 first).
    pub fn computational_index(&self, bits: usize) -> usize {
        let n = self.spec.n_atoms();
        let levels: Vec<usize> = (0..n).map(|k| (bits >> (n - 1 - k)) & 1).collect();
        self.index_of(&levels)
    }

    /// Lifts a 2^{N+1} computational amplitude vector into the register.
    pub fn embed_computational(&self, amps: &[C64]) -> Result<Vec<C64>, RydbergError> {
        let n_comp = 1usize << self.spec.n_atoms();
        if amps.len() != n_comp {
            return Err(RydbergError::Dimension { expected: n_comp, got: amps.len() });
        }
        let mut out = vec![ZERO; self.dim()];
        for (bits, &a) in amps.iter().enumerate() {
            out[self.computational_index(bits)] = a;
        }
        Ok(out)
    }

    fn site_op(&self, f: impl Fn(usize, usize) -> C64, site: usize) -> SparseOperator {
        let d = self.local_dim();
        let mut local = Operator::zeros(d);
        for i in 0..d {
            for j in 0..d {
                local[(i, j)] = f(i, j);
            }
        }
        embed_site(&local, site, self.spec.n_atoms(), d)
    }

    fn projector_r(&self, site: usize) -> SparseOperator {
        self.site_op(|i, j| if i == LEVEL_R && j == LEVEL_R { ONE } else { ZERO }, site)
    }

    pub fn hamiltonian(&self, errors: RydbergErrors) -> RydbergHamiltonian<'_> {
        RydbergHamiltonian::new(self, errors)
    }

    /// σ⁰ = |0⟩⟨r| and σ¹ = |1⟩⟨r| at Γ/8 each, σ² = |2⟩⟨r| at 3Γ/4, per atom.
    /// With |2⟩ eliminated, σ² becomes a loss of |r⟩ population at 3Γ/4.
    pub fn collapse_channels(&self) -> Vec<CollapseChannel> {
        let gamma = self.spec.decay_rate();
        let mut out = Vec::new();
        for site in 0..self.spec.n_atoms() {
            for ground in [LEVEL_0, LEVEL_1] {
                let op = self.site_op(|i, j| if i == ground && j == LEVEL_R { ONE } else { ZERO }, site);
                out.push(CollapseChannel::from_sparse(op, gamma / 8.0).expect("rate is positive"));
            }
            let dark_rate = 0.75 * gamma;
            let ch = match self.levels {
                LevelSet::Full => {
                    let op = self.site_op(|i, j| if i == LEVEL_2 && j == LEVEL_R { ONE } else { ZERO }, site);
                    CollapseChannel::from_sparse(op, dark_rate)
                }
                LevelSet::DarkEliminated => CollapseChannel::leakage(self.projector_r(site), dark_rate),
            };
            out.push(ch.expect("rate is positive"));
        }
        out
    }

    /// Rotating-frame two-level Hamiltonian on {|1…1,1⟩, |1…1,r⟩}.
    pub fn effective_hamiltonian(&self, t: f64) -> Result<Operator, RydbergError> {
        Ok(self.schedule.hamiltonian_at(t)?)
    }
}

/// Sparse full-register Hamiltonian:
/// (1+ε_c)Ω̄_c cos(ωt) Σ_k(|r⟩_k⟨0| + h.c.) + (1+ε_t)[Ω_t(t)|1⟩_t⟨r| + h.c.]
/// + V_t Σ_k P_r^k P_r^t + V_c Σ_{j<k} P_r^j P_r^k + η′Ω′ Σ_atoms P_r.
#[derive(Clone, Debug)]
pub struct RydbergHamiltonian<'a> {
    gate: &'a RydbergGate,
    errors: RydbergErrors,
    fixed: SparseOperator,
    control: SparseOperator,
    raise: SparseOperator,
    lower: SparseOperator,
    starts: Vec<f64>,
    d_starts: Vec<f64>,
}

impl<'a> RydbergHamiltonian<'a> {
    fn new(gate: &'a RydbergGate, errors: RydbergErrors) -> Self {
        let spec = &gate.spec;
        let n = spec.n_atoms();
        let target = spec.target_site();
        let dim = gate.dim();
        let pr: Vec<SparseOperator> = (0..n).map(|k| gate.projector_r(k)).collect();

        let mut fixed = SparseOperator::zeros(dim);
        let scaled = |op: &SparseOperator, c: f64| op.scale(C64::new(c, 0.0));
        for k in 0..spec.n_controls {
            fixed = fixed.add(&scaled(&pr[k].matmul(&pr[target]), spec.v_t));
            for j in 0..k {
                fixed = fixed.add(&scaled(&pr[j].matmul(&pr[k]), spec.v_c));
            }
        }
        if errors.eta_prime != 0.0 {
            for p in &pr {
                fixed = fixed.add(&scaled(p, errors.eta_prime * spec.omega_t));
            }
        }

        let mut control = SparseOperator::zeros(dim);
        for k in 0..spec.n_controls {
            let flip = gate.site_op(
                |i, j| if (i == LEVEL_R && j == LEVEL_0) || (i == LEVEL_0 && j == LEVEL_R) { ONE } else { ZERO },
                k,
            );
            control = control.add(&flip);
        }

        let lower = gate.site_op(|i, j| if i == LEVEL_1 && j == LEVEL_R { ONE } else { ZERO }, target);
        let raise = lower.dagger();
        Self {
            gate,
            errors,
            fixed,
            control,
            raise,
            lower,
            starts: gate.schedule.starts(),
            d_starts: detuning_integrals(&gate.schedule),
        }
    }

    /// Coefficient of |1⟩_t⟨r| on segment k at absolute time t.
    #[inline]
    pub fn target_coupling(&self, k: usize, t: f64) -> C64 {
        let seg = &self.gate.schedule.segments[k];
        let local = t - self.starts[k];
        let d = self.d_starts[k] + seg.detuning * local;
        let amp = seg.amplitude * (1.0 + self.errors.epsilon_t);
        C64::from_polar(amp, 2.0 * d - seg.phase_law.at(local))
    }

    #[inline]
    pub fn control_amplitude(&self, t: f64) -> f64 {
        let spec = &self.gate.spec;
        (1.0 + self.errors.epsilon_c) * spec.omega_c_bar * (spec.omega_mod * t).cos()
    }
}

impl HamiltonianSource for RydbergHamiltonian<'_> {
    fn dim(&self) -> usize {
        self.gate.dim()
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut out = self.starts.clone();
        out.push(self.gate.duration());
        out
    }

    fn piece_at(&self, t: f64) -> usize {
        let s = &self.gate.schedule;
        s.locate(t.clamp(0.0, s.total_duration())).map_or(0, |(k, _)| k)
    }

    fn apply_add(&self, t: f64, piece: usize, x: &[C64], ncols: usize, y: &mut [C64], c: C64) {
        self.fixed.apply_add(x, ncols, y, c);
        self.control.apply_add(x, ncols, y, c * self.control_amplitude(t));
        if !self.gate.schedule.segments.is_empty() {
            let g = self.target_coupling(piece, t);
            self.lower.apply_add(x, ncols, y, c * g);
            self.raise.apply_add(x, ncols, y, c * g.conj());
        }
    }

    fn norm_bound(&self) -> f64 {
        let spec = &self.gate.spec;
        let drive_max = self
            .gate
            .schedule
            .segments
            .iter()
            .map(|s| s.amplitude.abs())
            .fold(0.0, f64::max);
        self.fixed.norm_bound()
            + (1.0 + self.errors.epsilon_c).abs() * spec.omega_c_bar * spec.n_controls as f64
            + (1.0 + self.errors.epsilon_t).abs() * drive_max
    }
}

/// Dense H(t) on the full register.
pub fn total_hamiltonian(gate: &RydbergGate, errors: RydbergErrors, t: f64) -> Result<Operator, RydbergError> {
    let total = gate.duration();
    if !(t >= 0.0 && t <= total) {
        return Err(PathError::TimeOutOfRange { t, total }.into());
    }
    Ok(gate.hamiltonian(errors).dense_at(t))
}

/// Step rule for register evolutions: `fraction / (ω + V_t + Ω̄_c)`,
/// the fastest frequencies that matter for weakly populated Rydberg pairs.
pub fn register_config(spec: &RydbergSpec, fraction: f64) -> EvolutionConfig {
    EvolutionConfig::resolving(spec.omega_mod + spec.v_t + spec.omega_c_bar, fraction)
}

/// Default step fraction for register evolutions.
pub const REGISTER_STEP_FRACTION: f64 = 0.1;

/// Full model against the blockade/effective prediction for one
/// computational basis state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModelComparison {
    /// max_t |P_full(t) − P_eff(t)| for the initial basis state.
    pub max_population_deviation: f64,
    pub final_population_full: f64,
    pub final_phase_full: f64,
    pub final_phase_effective: f64,
}

/// Evolves computational basis state `bits` closed-system in the full
/// register and in the effective two-level model (which predicts no
/// dynamics unless every control and the target start in |1⟩), sampling
/// the survival probability at `samples` evenly spaced times.
pub fn compare_full_vs_effective(
    gate: &RydbergGate,
    bits: usize,
    samples: usize,
    cfg: &EvolutionConfig,
) -> Result<ModelComparison, RydbergError> {
    let n_comp = 1usize << gate.spec.n_atoms();
    if bits >= n_comp {
        return Err(RydbergError::Dimension { expected: n_comp, got: bits + 1 });
    }
    let idx = gate.computational_index(bits);
    let all_ones = bits == n_comp - 1;
    let h = gate.hamiltonian(RydbergErrors::ideal());
    let eff_drive = ScheduleDrive::new(&gate.schedule, ErrorModel::ideal());
    let mut full = PureState::basis(gate.dim(), idx);
    let mut eff = PureState::basis(2, 0);
    let eff_cfg = EvolutionConfig::for_schedule(&gate.schedule);
    let total = gate.duration();
    let samples = samples.max(2);
    let mut worst: f64 = 0.0;
    let mut t_prev = 0.0;
    for j in 1..samples {
        let t = total * j as f64 / (samples - 1) as f64;
        full = evolve_pure(&full, &h, (t_prev, t), cfg)?;
        let p_eff = if all_ones {
            eff = evolve_pure(&eff, &eff_drive, (t_prev, t), &eff_cfg)?;
            eff.amplitudes()[0].norm_sqr()
        } else {
            1.0
        };
        worst = worst.max((full.amplitudes()[idx].norm_sqr() - p_eff).abs());
        t_prev = t;
    }
    let amp = full.amplitudes()[idx];
    let phase_eff = if all_ones {
        let d: f64 = gate.schedule.segments.iter().map(|s| s.detuning * s.duration).sum();
        (eff.amplitudes()[0] * C64::from_polar(1.0, d)).arg()
    } else {
        0.0
    };
    Ok(ModelComparison {
        max_population_deviation: worst,
        final_population_full: amp.norm_sqr(),
        final_phase_full: amp.arg(),
        final_phase_effective: phase_eff,
    })
}

/// Phase the effective model imprints on |1…1⟩ in the lab frame, for
/// schedules whose axis is ±z.
pub fn conditional_phase(schedule: &PulseSchedule) -> Option<f64> {
    let u = effective_lab_unitary(schedule)?;
    Some(u[(0, 0)].arg())
}

/// Whether a schedule has a phase ramp (and hence a nonzero Δ′).
pub fn has_detuned_segment(schedule: &PulseSchedule) -> bool {
    schedule.segments.iter().any(|s| s.phase_law.kind == PhaseKind::Ramp && s.detuning != 0.0)
}
