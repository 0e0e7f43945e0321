//! Fixed-step RK4 evolution of pure states, propagators and density
//! matrices under time-dependent Hamiltonians with Lindblad dissipation:
//!
//! ρ̇ = −i[H, ρ] + ½ Σ_j Γ_j (2 A_j ρ A_j† − A_j†A_j ρ − ρ A_j†A_j).
//!
//! Time is split at the Hamiltonian's breakpoints so that no RK4 step
//! straddles a discontinuity.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{norm_sqr, sigma_minus, sigma_z, DensityMatrix, Operator, PureState, C64, I, ONE, ZERO};
use crate::paths::PulseSchedule;
use crate::sparse::SparseOperator;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LindbladError {
    #[error("integration step must be positive and finite, got {0}")]
    BadStep(f64),
    #[error("time span [{0}, {1}] is reversed or not finite")]
    BadSpan(f64, f64),
    #[error("collapse rate must be finite and non-negative, got {0}")]
    NegativeRate(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("trace drifted by {drift:.3e} at t = {t:.6e}; reduce dt (currently {dt:.3e})")]
    TraceDrift { drift: f64, t: f64, dt: f64 },
    #[error("norm drifted by {drift:.3e} at t = {t:.6e}; reduce dt (currently {dt:.3e})")]
    NormDrift { drift: f64, t: f64, dt: f64 },
}

/// Systematic error fractions: control ε, detuning η, phase χ.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ErrorModel {
    pub epsilon: f64,
    pub eta: f64,
    pub chi: f64,
}

impl ErrorModel {
    pub fn ideal() -> Self {
        Self::default()
    }

    pub fn control(epsilon: f64) -> Self {
        Self { epsilon, ..Self::default() }
    }

    pub fn detuning(eta: f64) -> Self {
        Self { eta, ..Self::default() }
    }

    pub fn phase(chi: f64) -> Self {
        Self { chi, ..Self::default() }
    }

    pub fn is_ideal(&self) -> bool {
        self.epsilon == 0.0 && self.eta == 0.0 && self.chi == 0.0
    }
}

/// Drive amplitude scale Ω and instantaneous drive phase φ(t).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriveContext {
    pub omega: f64,
    pub phase: f64,
}

/// H′ = (1+ε)H[φ → (1+χ)φ] + (η/2)Ω σ_z for a two-level drive
/// H = A e^{−iφ}|0⟩⟨1| + h.c. + Δσ_z.
pub fn perturbed_hamiltonian(h_ideal: &Operator, ctx: DriveContext, errors: ErrorModel) -> Result<Operator, LindbladError> {
    if h_ideal.dim() != 2 {
        return Err(LindbladError::DimensionMismatch { expected: 2, got: h_ideal.dim() });
    }
    let mut h = h_ideal.clone();
    let shifted = h[(0, 1)] * C64::from_polar(1.0, -errors.chi * ctx.phase);
    h[(0, 1)] = shifted;
    h[(1, 0)] = shifted.conj();
    let mut h = h.scale_real(1.0 + errors.epsilon);
    let z = 0.5 * errors.eta * ctx.omega;
    h[(0, 0)] += z;
    h[(1, 1)] -= z;
    Ok(h)
}

/// Jump operator A with rate Γ ≥ 0. A leakage channel stores A†A only:
/// population leaves the modeled space at rate Γ⟨A†A⟩ and is not tracked.
#[derive(Clone, Debug, PartialEq)]
pub struct CollapseChannel {
    operator: SparseOperator,
    rate: f64,
    leakage: bool,
}

impl CollapseChannel {
    pub fn new(operator: &Operator, rate: f64) -> Result<Self, LindbladError> {
        Self::from_sparse(SparseOperator::from_dense(operator), rate)
    }

    pub fn from_sparse(operator: SparseOperator, rate: f64) -> Result<Self, LindbladError> {
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(LindbladError::NegativeRate(rate));
        }
        Ok(Self { operator, rate, leakage: false })
    }

    /// Loss at rate Γ from the states weighted by `a_dag_a`.
    pub fn leakage(a_dag_a: SparseOperator, rate: f64) -> Result<Self, LindbladError> {
        Ok(Self { leakage: true, ..Self::from_sparse(a_dag_a, rate)? })
    }

    pub fn is_leakage(&self) -> bool {
        self.leakage
    }

    /// σ₋ = |0⟩⟨1| at rate Γ₋.
    pub fn decay(rate: f64) -> Result<Self, LindbladError> {
        Self::new(&sigma_minus(), rate)
    }

    /// σ_z at rate Γ_z.
    pub fn dephasing(rate: f64) -> Result<Self, LindbladError> {
        Self::new(&sigma_z(), rate)
    }

    /// A, or A†A for a leakage channel.
    pub fn operator(&self) -> Operator {
        self.operator.to_dense()
    }

    pub fn sparse(&self) -> &SparseOperator {
        &self.operator
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn dim(&self) -> usize {
        self.operator.dim()
    }
}

/// Uniform-rate single-qubit decay plus dephasing.
pub fn qubit_channels(gamma_minus: f64, gamma_z: f64) -> Result<Vec<CollapseChannel>, LindbladError> {
    let mut out = Vec::new();
    if gamma_minus > 0.0 {
        out.push(CollapseChannel::decay(gamma_minus)?);
    }
    if gamma_z > 0.0 {
        out.push(CollapseChannel::dephasing(gamma_z)?);
    }
    if gamma_minus < 0.0 || gamma_z < 0.0 {
        return Err(LindbladError::NegativeRate(gamma_minus.min(gamma_z)));
    }
    Ok(out)
}

/// Integration step control.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    /// Largest allowed step, seconds.
    pub dt: f64,
    /// Acceptable change in a reported quantity when dt is halved.
    pub convergence_tol: f64,
}

impl EvolutionConfig {
    pub const DEFAULT_STEP_FRACTION: f64 = 0.02;

    pub fn new(dt: f64) -> Result<Self, LindbladError> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(LindbladError::BadStep(dt));
        }
        Ok(Self { dt, convergence_tol: 1e-7 })
    }

    /// dt = fraction / bound, where bound caps ‖H‖ plus the summed rates.
    pub fn resolving(bound: f64, fraction: f64) -> Self {
        let bound = if bound > 0.0 { bound } else { 1.0 };
        Self { dt: fraction / bound, convergence_tol: 1e-7 }
    }

    pub fn for_schedule(schedule: &PulseSchedule) -> Self {
        Self::resolving(schedule.norm_bound(), Self::DEFAULT_STEP_FRACTION)
    }

    pub fn halved(&self) -> Self {
        Self { dt: self.dt / 2.0, ..*self }
    }
}

/// Time-indexed Hamiltonian, piecewise smooth between breakpoints.
pub trait HamiltonianSource: Sync {
    fn dim(&self) -> usize;

    /// Sorted times at which H(t) may jump.
    fn breakpoints(&self) -> Vec<f64>;

    /// Identifies the smooth piece containing `t` (callers pass an
    /// interior time so boundary conventions never matter).
    fn piece_at(&self, t: f64) -> usize;

    /// y += c·H(t)·x using piece `piece`'s formula; x, y are dim × ncols
    /// row-major blocks.
    fn apply_add(&self, t: f64, piece: usize, x: &[C64], ncols: usize, y: &mut [C64], c: C64);

    /// Upper bound on ‖H(t)‖ over all t.
    fn norm_bound(&self) -> f64;

    fn dense_at(&self, t: f64) -> Operator {
        let n = self.dim();
        let mut y = vec![ZERO; n * n];
        self.apply_add(t, self.piece_at(t), Operator::identity(n).as_slice(), n, &mut y, ONE);
        Operator::from_vec(n, y)
    }
}

/// A constant Hamiltonian.
#[derive(Clone, Debug)]
pub struct StaticHamiltonian {
    h: SparseOperator,
}

impl StaticHamiltonian {
    pub fn new(h: &Operator) -> Self {
        Self { h: SparseOperator::from_dense(h) }
    }
}

impl HamiltonianSource for StaticHamiltonian {
    fn dim(&self) -> usize {
        self.h.dim()
    }
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
    fn piece_at(&self, _t: f64) -> usize {
        0
    }
    fn apply_add(&self, _t: f64, _piece: usize, x: &[C64], ncols: usize, y: &mut [C64], c: C64) {
        self.h.apply_add(x, ncols, y, c);
    }
    fn norm_bound(&self) -> f64 {
        self.h.norm_bound()
    }
}

/// Two-level schedule drive with injected systematic errors.
#[derive(Clone, Debug)]
pub struct ScheduleDrive<'a> {
    schedule: &'a PulseSchedule,
    errors: ErrorModel,
    starts: Vec<f64>,
}

impl<'a> ScheduleDrive<'a> {
    pub fn new(schedule: &'a PulseSchedule, errors: ErrorModel) -> Self {
        Self { schedule, errors, starts: schedule.starts() }
    }

    /// Perturbed 2×2 matrix entries (h00, h01) on segment k at absolute t.
    #[inline]
    fn entries(&self, k: usize, t: f64) -> (f64, C64) {
        let seg = &self.schedule.segments[k];
        let e = &self.errors;
        let phase = seg.phase_law.at(t - self.starts[k]) * (1.0 + e.chi);
        let scale = 1.0 + e.epsilon;
        let h01 = C64::from_polar(seg.amplitude * scale, -phase);
        let h00 = seg.detuning * scale + 0.5 * e.eta * self.schedule.omega;
        (h00, h01)
    }

    pub fn hamiltonian(&self, t: f64) -> Operator {
        self.dense_at(t)
    }
}

impl HamiltonianSource for ScheduleDrive<'_> {
    fn dim(&self) -> usize {
        2
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut t = 0.0;
        let mut out = vec![0.0];
        for seg in &self.schedule.segments {
            t += seg.duration;
            out.push(t);
        }
        out
    }

    fn piece_at(&self, t: f64) -> usize {
        self.schedule.locate(t.clamp(0.0, self.schedule.total_duration())).map_or(0, |(k, _)| k)
    }

    fn apply_add(&self, t: f64, piece: usize, x: &[C64], ncols: usize, y: &mut [C64], c: C64) {
        if self.schedule.segments.is_empty() {
            return;
        }
        let (h00, h01) = self.entries(piece, t);
        let (a, b) = (c * h00, c * h01);
        let b_dag = c * h01.conj();
        for j in 0..ncols {
            let (x0, x1) = (x[j], x[ncols + j]);
            y[j] += a * x0 + b * x1;
            y[ncols + j] += b_dag * x0 - a * x1;
        }
    }

    fn norm_bound(&self) -> f64 {
        let e = &self.errors;
        self.schedule
            .segments
            .iter()
            .filter(|s| s.duration > 0.0)
            .map(|s| (s.amplitude.abs() + s.detuning.abs()) * (1.0 + e.epsilon).abs() + 0.5 * (e.eta * self.schedule.omega).abs())
            .fold(0.0, f64::max)
    }
}

/// Splits [t0, t1] at the breakpoints strictly inside it.
fn pieces(source: &dyn HamiltonianSource, t0: f64, t1: f64) -> Vec<(f64, f64, usize)> {
    let mut cuts = vec![t0];
    cuts.extend(source.breakpoints().into_iter().filter(|&b| b > t0 && b < t1));
    cuts.push(t1);
    cuts.windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| (w[0], w[1], source.piece_at(0.5 * (w[0] + w[1]))))
        .collect()
}

fn check_span(t_span: (f64, f64), cfg: &EvolutionConfig) -> Result<(), LindbladError> {
    let (t0, t1) = t_span;
    if !(t1 >= t0) || !t0.is_finite() || !t1.is_finite() {
        return Err(LindbladError::BadSpan(t0, t1));
    }
    if !(cfg.dt > 0.0) || !cfg.dt.is_finite() {
        return Err(LindbladError::BadStep(cfg.dt));
    }
    Ok(())
}

/// Classical RK4 on dy/dt = f(t, y) across each piece with
/// n = ⌈len/dt⌉ equal steps; `after_step` may renormalize or validate.
fn rk4<F, G>(
    source: &dyn HamiltonianSource,
    t_span: (f64, f64),
    cfg: &EvolutionConfig,
    y: &mut [C64],
    mut rhs: F,
    mut after_step: G,
) -> Result<(), LindbladError>
where
    F: FnMut(f64, usize, &[C64], &mut [C64]),
    G: FnMut(f64, &mut [C64]) -> Result<(), LindbladError>,
{
    let len = y.len();
    let mut k1 = vec![ZERO; len];
    let mut k2 = vec![ZERO; len];
    let mut k3 = vec![ZERO; len];
    let mut k4 = vec![ZERO; len];
    let mut tmp = vec![ZERO; len];
    for (a, b, piece) in pieces(source, t_span.0, t_span.1) {
        let n = ((b - a) / cfg.dt).ceil().max(1.0) as usize;
        let h = (b - a) / n as f64;
        for step in 0..n {
            let t = a + step as f64 * h;
            rhs(t, piece, y, &mut k1);
            for i in 0..len {
                tmp[i] = y[i] + k1[i] * (0.5 * h);
            }
            rhs(t + 0.5 * h, piece, &tmp, &mut k2);
            for i in 0..len {
                tmp[i] = y[i] + k2[i] * (0.5 * h);
            }
            rhs(t + 0.5 * h, piece, &tmp, &mut k3);
            for i in 0..len {
                tmp[i] = y[i] + k3[i] * h;
            }
            rhs(t + h, piece, &tmp, &mut k4);
            let w = h / 6.0;
            for i in 0..len {
                y[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * w;
            }
            after_step(t + h, y)?;
        }
    }
    Ok(())
}

/// i|ψ̇⟩ = H|ψ⟩, renormalized after every step.
pub fn evolve_pure(
    psi0: &PureState,
    source: &dyn HamiltonianSource,
    t_span: (f64, f64),
    cfg: &EvolutionConfig,
) -> Result<PureState, LindbladError> {
    check_span(t_span, cfg)?;
    if psi0.dim() != source.dim() {
        return Err(LindbladError::DimensionMismatch { expected: source.dim(), got: psi0.dim() });
    }
    let mut y = psi0.amplitudes().to_vec();
    let dt = cfg.dt;
    rk4(
        source,
        t_span,
        cfg,
        &mut y,
        |t, piece, x, out| {
            out.iter_mut().for_each(|z| *z = ZERO);
            source.apply_add(t, piece, x, 1, out, -I);
        },
        |t, y| {
            let n2 = norm_sqr(y);
            if !((n2 - 1.0).abs() <= 1e-6) {
                return Err(LindbladError::NormDrift { drift: (n2 - 1.0).abs(), t, dt });
            }
            let s = 1.0 / n2.sqrt();
            y.iter_mut().for_each(|z| *z *= s);
            Ok(())
        },
    )?;
    Ok(PureState::normalized(y))
}

/// Closed-system propagator U(t1, t0) from iU̇ = HU.
pub fn propagator(
    source: &dyn HamiltonianSource,
    t_span: (f64, f64),
    cfg: &EvolutionConfig,
) -> Result<Operator, LindbladError> {
    check_span(t_span, cfg)?;
    let n = source.dim();
    let mut y = Operator::identity(n).into_vec();
    rk4(
        source,
        t_span,
        cfg,
        &mut y,
        |t, piece, x, out| {
            out.iter_mut().for_each(|z| *z = ZERO);
            source.apply_add(t, piece, x, n, out, -I);
        },
        |_, _| Ok(()),
    )?;
    Ok(Operator::from_vec(n, y))
}

/// Density-matrix right-hand side written as M + M† + Σ Γ AρA† with
/// M = −i(H − (i/2)ΣΓA†A)ρ, valid because ρ stays Hermitian.
struct LindbladRhs<'a> {
    source: &'a dyn HamiltonianSource,
    channels: &'a [CollapseChannel],
    loss: SparseOperator,
    m: Vec<C64>,
    scratch: Vec<C64>,
}

impl<'a> LindbladRhs<'a> {
    fn new(source: &'a dyn HamiltonianSource, channels: &'a [CollapseChannel]) -> Self {
        let n = source.dim();
        let mut loss = SparseOperator::zeros(n);
        for ch in channels.iter().filter(|c| c.rate > 0.0) {
            let ada = if ch.leakage { ch.operator.clone() } else { ch.operator.dagger().matmul(&ch.operator) };
            loss = loss.add(&ada.scale(C64::new(ch.rate, 0.0)));
        }
        Self { source, channels, loss, m: vec![ZERO; n * n], scratch: vec![ZERO; n * n] }
    }

    fn eval(&mut self, t: f64, piece: usize, rho: &[C64], out: &mut [C64]) {
        let n = self.source.dim();
        self.m.iter_mut().for_each(|z| *z = ZERO);
        self.source.apply_add(t, piece, rho, n, &mut self.m, -I);
        self.loss.apply_add(rho, n, &mut self.m, C64::new(-0.5, 0.0));
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = self.m[i * n + j] + self.m[j * n + i].conj();
            }
        }
        for ch in self.channels.iter().filter(|c| c.rate > 0.0 && !c.leakage) {
            ch.operator.sandwich_add(rho, out, C64::new(ch.rate, 0.0), &mut self.scratch);
        }
    }
}

/// Integrates the master equation; aborts if the trace drifts by more
/// than 1e-6 (or grows, when leakage channels are present).
pub fn evolve_density(
    rho0: &DensityMatrix,
    source: &dyn HamiltonianSource,
    channels: &[CollapseChannel],
    t_span: (f64, f64),
    cfg: &EvolutionConfig,
) -> Result<DensityMatrix, LindbladError> {
    check_span(t_span, cfg)?;
    let n = source.dim();
    if rho0.dim() != n {
        return Err(LindbladError::DimensionMismatch { expected: n, got: rho0.dim() });
    }
    if let Some(ch) = channels.iter().find(|c| c.dim() != n) {
        return Err(LindbladError::DimensionMismatch { expected: n, got: ch.dim() });
    }
    let trace0 = rho0.trace().re;
    let leaky = channels.iter().any(|c| c.leakage && c.rate > 0.0);
    let mut y = rho0.as_operator().as_slice().to_vec();
    let mut rhs = LindbladRhs::new(source, channels);
    let dt = cfg.dt;
    rk4(
        source,
        t_span,
        cfg,
        &mut y,
        |t, piece, x, out| rhs.eval(t, piece, x, out),
        |t, y| {
            let mut tr = 0.0;
            for i in 0..n {
                for j in i + 1..n {
                    let avg = 0.5 * (y[i * n + j] + y[j * n + i].conj());
                    y[i * n + j] = avg;
                    y[j * n + i] = avg.conj();
                }
                y[i * n + i] = C64::new(y[i * n + i].re, 0.0);
                tr += y[i * n + i].re;
            }
            let drift = if leaky { (tr - trace0).max(-tr) } else { (tr - trace0).abs() };
            if !(drift <= 1e-6) {
                return Err(LindbladError::TraceDrift { drift, t, dt });
            }
            Ok(())
        },
    )?;
    Ok(DensityMatrix::from_operator_unchecked(Operator::from_vec(n, y)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::sigma_x;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn rabi(omega: f64) -> StaticHamiltonian {
        StaticHamiltonian::new(&sigma_x().scale_real(omega))
    }

    #[test]
    fn perturbation_examples() {
        let ctx = DriveContext { omega: 1.0, phase: FRAC_PI_2 };
        let h = Operator::from_rows([[ZERO, C64::from_polar(1.0, -FRAC_PI_2)], [C64::from_polar(1.0, FRAC_PI_2), ZERO]]);
        assert_eq!(perturbed_hamiltonian(&h, ctx, ErrorModel::ideal()).unwrap(), h);
        let scaled = perturbed_hamiltonian(&h, ctx, ErrorModel::control(0.1)).unwrap();
        assert!(scaled.max_abs_diff(&h.scale_real(1.1)) < 1e-15);
        let shifted = perturbed_hamiltonian(&h, ctx, ErrorModel::phase(0.2)).unwrap();
        assert!((shifted[(0, 1)] - C64::from_polar(1.0, -0.6 * PI)).norm() < 1e-15);
        let det = perturbed_hamiltonian(&h, DriveContext { omega: 2.0, phase: 0.3 }, ErrorModel::detuning(0.1)).unwrap();
        assert!((det[(0, 0)].re - 0.1).abs() < 1e-15 && (det[(1, 1)].re + 0.1).abs() < 1e-15);
        assert!(det.is_hermitian(1e-15));
    }

    #[test]
    fn zero_hamiltonian_is_identity() {
        let h = StaticHamiltonian::new(&Operator::zeros(2));
        let cfg = EvolutionConfig::new(0.1).unwrap();
        let psi = PureState::normalized(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)]);
        let out = evolve_pure(&psi, &h, (0.0, 3.0), &cfg).unwrap();
        assert_eq!(out, psi);
        let rho = DensityMatrix::from_pure(&psi);
        let out = evolve_density(&rho, &h, &[], (0.0, 3.0), &cfg).unwrap();
        assert!(out.as_operator().max_abs_diff(rho.as_operator()) < 1e-15);
    }

    #[test]
    fn rabi_pi_pulse() {
        let omega = 2.0;
        let cfg = EvolutionConfig::resolving(omega, 0.01);
        let t1 = PI / (2.0 * omega);
        let psi = evolve_pure(&PureState::basis(2, 0), &rabi(omega), (0.0, t1), &cfg).unwrap();
        assert!((psi.amplitudes()[1] - (-I)).norm() < 1e-8);
        let rho0 = DensityMatrix::from_pure(&PureState::basis(2, 0));
        let rho = evolve_density(&rho0, &rabi(omega), &[], (0.0, t1), &cfg).unwrap();
        assert!((rho.population(1) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn pure_decay_follows_rate_equation() {
        // ρ̇₁₁ = −Γρ₁₁ and ρ̇₀₁ = −(Γ/2)ρ₀₁ under the ½ΓL(σ₋) convention.
        let gamma = 0.7;
        let ch = CollapseChannel::decay(gamma).unwrap();
        let h = StaticHamiltonian::new(&Operator::zeros(2));
        let cfg = EvolutionConfig::new(0.01).unwrap();
        let rho1 = DensityMatrix::from_pure(&PureState::basis(2, 1));
        for t in [0.5, 1.0, 3.0] {
            let rho = evolve_density(&rho1, &h, std::slice::from_ref(&ch), (0.0, t), &cfg).unwrap();
            assert!((rho.population(1) - (-gamma * t).exp()).abs() < 1e-9);
            assert!((rho.population(0) - (1.0 - (-gamma * t).exp())).abs() < 1e-9);
        }
        let plus = DensityMatrix::from_pure(&PureState::normalized(vec![ONE, ONE]));
        let rho = evolve_density(&plus, &h, &[ch], (0.0, 2.0), &cfg).unwrap();
        let coh = rho.as_operator()[(0, 1)].re;
        assert!((coh - 0.5 * (-gamma).exp()).abs() < 1e-9, "{coh}");
    }

    #[test]
    fn dephasing_decays_coherence_at_twice_the_rate() {
        // L(σ_z) gives ρ̇₀₁ = −2Γ_z ρ₀₁.
        let gz = 0.3;
        let ch = CollapseChannel::dephasing(gz).unwrap();
        let h = StaticHamiltonian::new(&Operator::zeros(2));
        let cfg = EvolutionConfig::new(0.01).unwrap();
        let plus = DensityMatrix::from_pure(&PureState::normalized(vec![ONE, ONE]));
        let rho = evolve_density(&plus, &h, &[ch], (0.0, 1.5), &cfg).unwrap();
        assert!((rho.as_operator()[(0, 1)].re - 0.5 * (-2.0 * gz * 1.5f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn errors_are_reported() {
        let h = rabi(1.0);
        let psi = PureState::basis(2, 0);
        assert!(matches!(EvolutionConfig::new(0.0), Err(LindbladError::BadStep(_))));
        let cfg = EvolutionConfig::new(0.1).unwrap();
        assert!(matches!(evolve_pure(&psi, &h, (1.0, 0.0), &cfg), Err(LindbladError::BadSpan(..))));
        assert!(matches!(CollapseChannel::decay(-1.0), Err(LindbladError::NegativeRate(_))));
        let big = PureState::basis(3, 0);
        assert!(matches!(evolve_pure(&big, &h, (0.0, 1.0), &cfg), Err(LindbladError::DimensionMismatch { .. })));
        // a step far too coarse for the drive blows up the trace
        let coarse = EvolutionConfig::new(5.0).unwrap();
        let rho = DensityMatrix::from_pure(&psi);
        let ch = CollapseChannel::decay(1.0).unwrap();
        assert!(matches!(
            evolve_density(&rho, &rabi(3.0), &[ch], (0.0, 50.0), &coarse),
            Err(LindbladError::TraceDrift { .. })
        ));
    }

    #[test]
    fn propagator_matches_closed_form() {
        let omega = 1.3;
        let t = 0.9;
        let u = propagator(&rabi(omega), (0.0, t), &EvolutionConfig::resolving(omega, 0.01)).unwrap();
        let (s, c) = (omega * t).sin_cos();
        let expect = Operator::from_rows([[C64::new(c, 0.0), C64::new(0.0, -s)], [C64::new(0.0, -s), C64::new(c, 0.0)]]);
        assert!(u.max_abs_diff(&expect) < 1e-10);
    }
}
