//! Synthesis of state-independent geometric gate schedules.
//!
//! A gate (θ₀, φ₀, γ) is realized by four square-amplitude segments that
//! drag the auxiliary vector |μ₁⟩ around a closed loop on the Bloch sphere:
//! a meridian rotation to latitude θ₁, a phase-ramped sweep of azimuth
//! 2π/cosθ₁ at that latitude, a return to the pole, and a final meridian
//! rotation back to θ₀. θ₁ = arccos(π/(γ+π)) fixes the enclosed solid
//! angle. |μ₁(0)⟩ returns to itself with phase −γ and |μ₂(0)⟩ with +γ, so
//! the schedule implements e^{−iγ n·σ} (rotation angle 2γ about n).

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{bloch_axis, rotation_unitary, Operator, PureState, C64, I, ONE, ZERO};
use crate::lindblad::{evolve_pure, ErrorModel, EvolutionConfig, ScheduleDrive};

/// Default number of Simpson panels per segment for path integrals.
pub const DEFAULT_QUAD_STEPS: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PathError {
    #[error("gamma must be non-negative, got {0}")]
    NegativeGamma(f64),
    #[error("theta0 must lie in [0, π], got {0}")]
    ThetaOutOfRange(f64),
    #[error("drive amplitude must be positive and finite, got {0}")]
    BadOmega(f64),
    #[error("time {t} outside schedule span [0, {total}]")]
    TimeOutOfRange { t: f64, total: f64 },
    #[error("quadrature needs at least 16 panels, got {0}")]
    TooFewPanels(usize),
    #[error("coefficients not normalized: |c1|² + |c2|² = {0}")]
    NotNormalized(f64),
    #[error("schedule was not synthesized from geometric gate parameters")]
    NotGeometric,
    #[error("trajectory needs at least two samples, got {0}")]
    TooFewSamples(usize),
    #[error("invalid schedule document: {0}")]
    Document(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PathVariant {
    Path1,
    Path2,
}

impl fmt::Display for PathVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathVariant::Path1 => write!(f, "path1"),
            PathVariant::Path2 => write!(f, "path2"),
        }
    }
}

/// Target rotation (θ₀, φ₀, γ) and loop family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateParams {
    pub theta0: f64,
    pub phi0: f64,
    pub gamma: f64,
    pub path: PathVariant,
}

impl GateParams {
    pub fn new(theta0: f64, phi0: f64, gamma: f64, path: PathVariant) -> Result<Self, PathError> {
        let p = Self { theta0, phi0, gamma, path };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), PathError> {
        if !(0.0..=PI).contains(&self.theta0) {
            return Err(PathError::ThetaOutOfRange(self.theta0));
        }
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(PathError::NegativeGamma(self.gamma));
        }
        Ok(())
    }

    pub fn s_gate(path: PathVariant) -> Self {
        Self { theta0: 0.0, phi0: 0.0, gamma: PI / 4.0, path }
    }

    pub fn t_gate(path: PathVariant) -> Self {
        Self { theta0: 0.0, phi0: 0.0, gamma: PI / 8.0, path }
    }

    pub fn h_gate(path: PathVariant) -> Self {
        Self { theta0: PI / 4.0, phi0: 0.0, gamma: PI / 2.0, path }
    }

    /// π rotation about x (up to global phase).
    pub fn x_like(path: PathVariant) -> Self {
        Self { theta0: PI / 2.0, phi0: 0.0, gamma: PI / 2.0, path }
    }

    pub fn axis(&self) -> [f64; 3] {
        bloch_axis(self.theta0, self.phi0)
    }

    /// The unitary the closed loop implements, e^{−iγ n·σ}.
    pub fn realized_unitary(&self) -> Operator {
        rotation_unitary(-self.gamma, self.axis()).expect("bloch axis is a unit vector")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseKind {
    Constant,
    Ramp,
}

/// Drive phase within a segment: `offset + slope·(t − t_start)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseLaw {
    pub kind: PhaseKind,
    #[serde(rename = "offset_rad")]
    pub offset: f64,
    #[serde(rename = "slope_rad_per_s")]
    pub slope: f64,
}

impl PhaseLaw {
    pub fn constant(offset: f64) -> Self {
        Self { kind: PhaseKind::Constant, offset, slope: 0.0 }
    }

    pub fn ramp(offset: f64, slope: f64) -> Self {
        Self { kind: PhaseKind::Ramp, offset, slope }
    }

    #[inline]
    pub fn at(&self, local_t: f64) -> f64 {
        match self.kind {
            PhaseKind::Constant => self.offset,
            PhaseKind::Ramp => self.offset + self.slope * local_t,
        }
    }
}

/// One square pulse: H = A e^{−iφ(t)}|0⟩⟨1| + h.c. + Δ σ_z.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    #[serde(rename = "duration_s")]
    pub duration: f64,
    #[serde(rename = "amplitude_rad_per_s")]
    pub amplitude: f64,
    pub phase_law: PhaseLaw,
    #[serde(rename = "detuning_rad_per_s")]
    pub detuning: f64,
}

impl Segment {
    pub fn resonant(duration: f64, amplitude: f64, phase: f64) -> Self {
        Self { duration, amplitude, phase_law: PhaseLaw::constant(phase), detuning: 0.0 }
    }

    /// Coefficient of |0⟩⟨1|.
    #[inline]
    pub fn coupling(&self, local_t: f64) -> C64 {
        C64::from_polar(self.amplitude, -self.phase_law.at(local_t))
    }

    pub fn hamiltonian(&self, local_t: f64) -> Operator {
        let c = self.coupling(local_t);
        let d = C64::new(self.detuning, 0.0);
        Operator::from_rows([[d, c], [c.conj(), -d]])
    }
}

/// Which construction produced a schedule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scheme {
    Singqc(GateParams),
    Dynamical { gate: NamedGate },
    SingleLoop { gate: NamedGate },
    Custom,
}

/// The two gates benchmarked against every scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NamedGate {
    S,
    H,
}

impl NamedGate {
    pub fn unitary(&self) -> Operator {
        match self {
            NamedGate::S => Operator::diagonal(&[ONE, I]),
            NamedGate::H => Operator::from_rows([[ONE, ONE], [ONE, -ONE]])
                .scale_real(std::f64::consts::FRAC_1_SQRT_2),
        }
    }

    pub fn geometric_params(&self, path: PathVariant) -> GateParams {
        match self {
            NamedGate::S => GateParams::s_gate(path),
            NamedGate::H => GateParams::h_gate(path),
        }
    }
}

impl std::str::FromStr for NamedGate {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "S" | "s" => Ok(NamedGate::S),
            "H" | "h" => Ok(NamedGate::H),
            other => Err(format!("unknown gate id '{other}'")),
        }
    }
}

impl fmt::Display for NamedGate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NamedGate::S => write!(f, "S"),
            NamedGate::H => write!(f, "H"),
        }
    }
}

/// Piecewise-constant-amplitude drive. Segments are right-closed:
/// a boundary time belongs to the earlier segment, except t = 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScheduleDoc", into = "ScheduleDoc")]
pub struct PulseSchedule {
    pub scheme: Scheme,
    pub omega: f64,
    pub segments: Vec<Segment>,
}

#[derive(Serialize, Deserialize)]
struct ScheduleDoc {
    omega_rad_per_s: f64,
    total_duration_s: f64,
    scheme: Scheme,
    segments: Vec<Segment>,
}

impl From<PulseSchedule> for ScheduleDoc {
    fn from(s: PulseSchedule) -> Self {
        Self {
            omega_rad_per_s: s.omega,
            total_duration_s: s.total_duration(),
            scheme: s.scheme,
            segments: s.segments,
        }
    }
}

impl TryFrom<ScheduleDoc> for PulseSchedule {
    type Error = PathError;
    fn try_from(doc: ScheduleDoc) -> Result<Self, PathError> {
        let s = PulseSchedule { scheme: doc.scheme, omega: doc.omega_rad_per_s, segments: doc.segments };
        if let Some(bad) = s.segments.iter().find(|g| !(g.duration >= 0.0)) {
            return Err(PathError::Document(format!("negative duration {}", bad.duration)));
        }
        let total = s.total_duration();
        if (total - doc.total_duration_s).abs() > 1e-9 * total.max(1e-300) {
            return Err(PathError::Document(format!(
                "total_duration_s = {} but segments sum to {total}",
                doc.total_duration_s
            )));
        }
        Ok(s)
    }
}

impl PulseSchedule {
    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    /// Segment start times, one per segment.
    pub fn starts(&self) -> Vec<f64> {
        let mut t = 0.0;
        self.segments
            .iter()
            .map(|s| {
                let start = t;
                t += s.duration;
                start
            })
            .collect()
    }

    /// (segment index, local time) for t under the right-closed convention.
    pub fn locate(&self, t: f64) -> Result<(usize, f64), PathError> {
        let total = self.total_duration();
        if !(t >= 0.0 && t <= total) {
            return Err(PathError::TimeOutOfRange { t, total });
        }
        let mut start = 0.0;
        let mut last_nonempty = None;
        for (k, seg) in self.segments.iter().enumerate() {
            if seg.duration <= 0.0 {
                continue;
            }
            last_nonempty = Some((k, start));
            if t <= start + seg.duration {
                return Ok((k, t - start));
            }
            start += seg.duration;
        }
        match last_nonempty {
            Some((k, s)) => Ok((k, (t - s).min(self.segments[k].duration))),
            None => Ok((0, 0.0)),
        }
    }

    pub fn hamiltonian_at(&self, t: f64) -> Result<Operator, PathError> {
        let (k, local) = self.locate(t)?;
        match self.segments.get(k) {
            Some(seg) => Ok(seg.hamiltonian(local)),
            None => Ok(Operator::zeros(2)),
        }
    }

    /// Drive phase at t (used by phase-error injection).
    pub fn phase_at(&self, t: f64) -> Result<f64, PathError> {
        let (k, local) = self.locate(t)?;
        Ok(self.segments.get(k).map_or(0.0, |s| s.phase_law.at(local)))
    }

    pub fn gate_params(&self) -> Option<GateParams> {
        match self.scheme {
            Scheme::Singqc(p) => Some(p),
            _ => None,
        }
    }

    /// Gate the schedule is meant to implement, if its scheme names one.
    pub fn target_unitary(&self) -> Option<Operator> {
        match self.scheme {
            Scheme::Singqc(p) => Some(p.realized_unitary()),
            Scheme::Dynamical { gate } | Scheme::SingleLoop { gate } => Some(gate.unitary()),
            Scheme::Custom => None,
        }
    }

    /// Upper bound on ‖H(t)‖ over the schedule.
    pub fn norm_bound(&self) -> f64 {
        self.segments
            .iter()
            .filter(|s| s.duration > 0.0)
            .map(|s| s.amplitude.abs() + s.detuning.abs())
            .fold(0.0, f64::max)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("schedule serialization is infallible")
    }

    pub fn from_toml(text: &str) -> Result<Self, PathError> {
        toml::from_str(text).map_err(|e| PathError::Document(e.to_string()))
    }

    /// Copy with every ramp slope multiplied by `factor` (other fields kept).
    pub fn with_ramp_slope_scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for seg in &mut out.segments {
            if seg.phase_law.kind == PhaseKind::Ramp {
                seg.phase_law.slope *= factor;
            }
        }
        out
    }
}

/// θ₁ = arccos(π/(γ+π)).
pub fn derive_theta1(gamma: f64) -> Result<f64, PathError> {
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(PathError::NegativeGamma(gamma));
    }
    Ok((PI / (gamma + PI)).clamp(-1.0, 1.0).acos())
}

pub fn synthesize(params: GateParams, omega: f64) -> Result<PulseSchedule, PathError> {
    params.validate()?;
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(PathError::BadOmega(omega));
    }
    let GateParams { theta0, phi0, gamma, path } = params;
    let theta1 = derive_theta1(gamma)?;
    let signed = |area: f64| if area < 0.0 { -omega } else { omega };

    if gamma == 0.0 {
        // Degenerate loop: nothing to enclose, every segment is empty.
        let segments = vec![
            Segment::resonant(0.0, omega, FRAC_PI_2 + phi0),
            Segment { duration: 0.0, amplitude: -omega, phase_law: PhaseLaw::ramp(phi0, 0.0), detuning: 0.0 },
            Segment::resonant(0.0, -omega, FRAC_PI_2 + phi0),
            Segment::resonant(0.0, omega, FRAC_PI_2 + phi0),
        ];
        return Ok(PulseSchedule { scheme: Scheme::Singqc(params), omega, segments });
    }

    // Pulse areas ∫Ω_i dt for the meridian segments.
    let (area1, ramp_sign, area3) = match path {
        PathVariant::Path1 => ((theta1 - theta0) / 2.0, -1.0, -theta1 / 2.0),
        PathVariant::Path2 => ((TAU - theta1 - theta0) / 2.0, 1.0, -(TAU - theta1) / 2.0),
    };
    let area4 = theta0 / 2.0;

    let (s1, c1) = theta1.sin_cos();
    let sweep = TAU / c1;
    let ramp_duration = PI * s1 / omega;
    let slope = sweep / ramp_duration;
    let detuning = omega * theta1.tan();

    let segments = vec![
        Segment::resonant(area1.abs() / omega, signed(area1), FRAC_PI_2 + phi0),
        Segment {
            duration: ramp_duration,
            amplitude: ramp_sign * omega,
            phase_law: PhaseLaw::ramp(phi0, slope),
            detuning,
        },
        Segment::resonant(area3.abs() / omega, signed(area3), FRAC_PI_2 + phi0 + sweep),
        Segment::resonant(area4 / omega, omega, FRAC_PI_2 + phi0),
    ];
    Ok(PulseSchedule { scheme: Scheme::Singqc(params), omega, segments })
}

/// Bloch-sphere parametrization of |μ₁(t)⟩ along a synthesized loop.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathPoint {
    pub theta: f64,
    pub phi: f64,
    pub theta_dot: f64,
    pub phi_dot: f64,
    /// ∫₀ᵗ (1 − cosθ) φ̇ dt′, equal to γ₂(t) − γ₁(t).
    pub area: f64,
}

#[derive(Clone, Copy, Debug)]
struct SegmentStart {
    t: f64,
    theta: f64,
    area: f64,
}

/// Analytic θ(t), φ(t) for a geometric schedule: θ moves at 2A on
/// constant-phase segments with φ = phase − π/2; φ follows the ramp with θ
/// frozen on ramp segments.
#[derive(Clone, Debug)]
pub struct PathGeometry<'a> {
    schedule: &'a PulseSchedule,
    starts: Vec<SegmentStart>,
}

impl<'a> PathGeometry<'a> {
    pub fn new(schedule: &'a PulseSchedule) -> Result<Self, PathError> {
        let params = schedule.gate_params().ok_or(PathError::NotGeometric)?;
        let mut starts = Vec::with_capacity(schedule.segments.len());
        let (mut t, mut theta, mut area) = (0.0, params.theta0, 0.0);
        for seg in &schedule.segments {
            starts.push(SegmentStart { t, theta, area });
            match seg.phase_law.kind {
                PhaseKind::Constant => theta += 2.0 * seg.amplitude * seg.duration,
                PhaseKind::Ramp => area += (1.0 - theta.cos()) * seg.phase_law.slope * seg.duration,
            }
            t += seg.duration;
        }
        Ok(Self { schedule, starts })
    }

    pub fn point_in(&self, k: usize, local: f64) -> PathPoint {
        let seg = &self.schedule.segments[k];
        let s = self.starts[k];
        match seg.phase_law.kind {
            PhaseKind::Constant => PathPoint {
                theta: s.theta + 2.0 * seg.amplitude * local,
                phi: seg.phase_law.offset - FRAC_PI_2,
                theta_dot: 2.0 * seg.amplitude,
                phi_dot: 0.0,
                area: s.area,
            },
            PhaseKind::Ramp => PathPoint {
                theta: s.theta,
                phi: seg.phase_law.at(local),
                theta_dot: 0.0,
                phi_dot: seg.phase_law.slope,
                area: s.area + (1.0 - s.theta.cos()) * seg.phase_law.slope * local,
            },
        }
    }

    pub fn at(&self, t: f64) -> Result<PathPoint, PathError> {
        let (k, local) = self.schedule.locate(t)?;
        Ok(self.point_in(k, local))
    }

    /// Integrates `f` over every non-empty segment by composite Simpson.
    fn integrate(&self, panels: usize, f: impl Fn(f64, PathPoint) -> C64) -> Result<C64, PathError> {
        if panels < 16 {
            return Err(PathError::TooFewPanels(panels));
        }
        let panels = panels + panels % 2;
        let mut total = ZERO;
        for (k, seg) in self.schedule.segments.iter().enumerate() {
            if seg.duration <= 0.0 {
                continue;
            }
            let h = seg.duration / panels as f64;
            let mut acc = ZERO;
            for j in 0..=panels {
                let local = j as f64 * h;
                let w = if j == 0 || j == panels {
                    1.0
                } else if j % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                acc += f(self.starts[k].t + local, self.point_in(k, local)) * w;
            }
            total += acc * (h / 3.0);
        }
        Ok(total)
    }
}

/// |μ₁⟩ = cos(θ/2)|0⟩ + sin(θ/2)e^{iφ}|1⟩, |μ₂⟩ = sin(θ/2)e^{−iφ}|0⟩ − cos(θ/2)|1⟩.
pub fn auxiliary_vectors(theta: f64, phi: f64) -> ([C64; 2], [C64; 2]) {
    let (s, c) = (theta / 2.0).sin_cos();
    (
        [C64::new(c, 0.0), C64::from_polar(s, phi)],
        [C64::from_polar(s, -phi), C64::new(-c, 0.0)],
    )
}

/// Hamiltonian reconstructed from a path point:
/// Δσ_z + [Ω|0⟩⟨1| + h.c.] with Δ = ½sin²θ φ̇ and
/// Ω = −(i/2)e^{−iφ}(θ̇ − i sinθ cosθ φ̇).
pub fn path_hamiltonian(p: &PathPoint) -> Operator {
    let (s, c) = p.theta.sin_cos();
    let delta = 0.5 * s * s * p.phi_dot;
    let omega = -0.5 * I * C64::from_polar(1.0, -p.phi) * C64::new(p.theta_dot, -s * c * p.phi_dot);
    let d = C64::new(delta, 0.0);
    Operator::from_rows([[d, omega], [omega.conj(), -d]])
}

/// ∫₀^τ e^{i∫(1−cosθ)φ̇} e^{−iφ}[iθ̇ + sinθ φ̇] dt along the schedule's loop.
pub fn singqc_residual(schedule: &PulseSchedule, quad_steps: usize) -> Result<C64, PathError> {
    let geom = PathGeometry::new(schedule)?;
    geom.integrate(quad_steps, |_, p| {
        C64::from_polar(1.0, p.area - p.phi) * C64::new(p.theta.sin() * p.phi_dot, p.theta_dot)
    })
}

/// ∫⟨Ψ|H|Ψ⟩dt for |Ψ⟩ = c₁e^{iγ₁}|μ₁⟩ + c₂e^{iγ₂}|μ₂⟩ along the loop.
pub fn dynamical_phase(schedule: &PulseSchedule, c1: C64, c2: C64, quad_steps: usize) -> Result<f64, PathError> {
    let n2 = c1.norm_sqr() + c2.norm_sqr();
    if (n2 - 1.0).abs() > 1e-10 {
        return Err(PathError::NotNormalized(n2));
    }
    let geom = PathGeometry::new(schedule)?;
    let value = geom.integrate(quad_steps, |_, p| {
        let (mu1, mu2) = auxiliary_vectors(p.theta, p.phi);
        let a = c1 * C64::from_polar(1.0, -0.5 * p.area);
        let b = c2 * C64::from_polar(1.0, 0.5 * p.area);
        let psi = [a * mu1[0] + b * mu2[0], a * mu1[1] + b * mu2[1]];
        let h = path_hamiltonian(&p);
        let hpsi = h.apply(&psi);
        psi[0].conj() * hpsi[0] + psi[1].conj() * hpsi[1]
    })?;
    Ok(value.re)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BlochPoint {
    pub t: f64,
    pub theta: f64,
    pub phi: f64,
}

/// Spherical angles (Θ ∈ [0,π], Φ ∈ [0,2π)) of a two-level state.
pub fn bloch_angles(psi: &[C64]) -> (f64, f64) {
    let (a, b) = (psi[0], psi[1]);
    let theta = 2.0 * b.norm().atan2(a.norm());
    if a.norm() < 1e-12 || b.norm() < 1e-12 {
        return (theta, 0.0);
    }
    let phi = (b.arg() - a.arg()).rem_euclid(TAU);
    // rem_euclid can return TAU itself for tiny negative inputs
    (theta, if phi >= TAU { 0.0 } else { phi })
}

/// Samples |ψ₁(t)⟩ = U(t)|μ₁(0)⟩ at `samples` evenly spaced times.
pub fn bloch_trajectory(schedule: &PulseSchedule, samples: usize) -> Result<Vec<BlochPoint>, PathError> {
    if samples < 2 {
        return Err(PathError::TooFewSamples(samples));
    }
    let (theta0, phi0) = schedule.gate_params().map_or((0.0, 0.0), |p| (p.theta0, p.phi0));
    let (mu1, _) = auxiliary_vectors(theta0, phi0);
    let mut psi = PureState::normalized(mu1.to_vec());
    let drive = ScheduleDrive::new(schedule, ErrorModel::ideal());
    let cfg = EvolutionConfig::for_schedule(schedule);
    let total = schedule.total_duration();
    let mut out = Vec::with_capacity(samples);
    let mut t_prev = 0.0;
    for j in 0..samples {
        let t = total * j as f64 / (samples - 1) as f64;
        if t > t_prev {
            psi = evolve_pure(&psi, &drive, (t_prev, t), &cfg)
                .map_err(|e| PathError::Document(e.to_string()))?;
            t_prev = t;
        }
        let (theta, phi) = bloch_angles(psi.amplitudes());
        out.push(BlochPoint { t, theta, phi });
    }
    Ok(out)
}
