//! Self-checks of the construction that need no reference numbers.
//!
//! Each check compares a measured defect against a fixed threshold; the
//! CLI `check` command prints one line per outcome.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::{inner, sigma_x, DensityMatrix, Operator, PureState, C64};
use crate::baselines::{composed_unitary, dg_pulse_train, slngqc_pulse_train};
use crate::fidelity::single_qubit_fidelity;
use crate::lindblad::{
    evolve_density, propagator, qubit_channels, CollapseChannel, ErrorModel, EvolutionConfig, ScheduleDrive,
    StaticHamiltonian,
};
use crate::paths::{
    auxiliary_vectors, dynamical_phase, path_hamiltonian, singqc_residual, synthesize, GateParams, NamedGate,
    PathGeometry, PathVariant, PulseSchedule, DEFAULT_QUAD_STEPS,
};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl CheckOutcome {
    /// Passes when `value` is at most `threshold` (NaN fails).
    fn at_most(name: String, value: f64, threshold: f64) -> Self {
        Self { name, value, threshold, passed: value <= threshold }
    }
}

/// S, T, H and an X-like gate on both loops.
pub fn reference_gates() -> Vec<(&'static str, GateParams)> {
    let mut out = Vec::new();
    for path in [PathVariant::Path1, PathVariant::Path2] {
        out.push(("S", GateParams::s_gate(path)));
        out.push(("T", GateParams::t_gate(path)));
        out.push(("H", GateParams::h_gate(path)));
        out.push(("X-like", GateParams::x_like(path)));
    }
    out
}

fn fine_config(schedule: &PulseSchedule) -> EvolutionConfig {
    EvolutionConfig::resolving(schedule.norm_bound(), 0.005)
}

fn random_coefficients(rng: &mut ChaCha8Rng) -> (C64, C64) {
    let a = rng.gen_range(0.0..PI / 2.0);
    let (p1, p2) = (rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.0..2.0 * PI));
    (C64::from_polar(a.cos(), p1), C64::from_polar(a.sin(), p2))
}

fn geometric_checks(label: &str, params: GateParams, rng: &mut ChaCha8Rng, out: &mut Vec<CheckOutcome>) {
    let schedule = synthesize(params, 1.0).expect("reference gates synthesize");
    let residual = singqc_residual(&schedule, DEFAULT_QUAD_STEPS).map_or(f64::NAN, |r| r.norm());
    out.push(CheckOutcome::at_most(format!("{label}: SINGQC residual"), residual, 1e-8));

    let worst_phase = (0..100)
        .map(|_| {
            let (c1, c2) = random_coefficients(rng);
            dynamical_phase(&schedule, c1, c2, DEFAULT_QUAD_STEPS).map_or(f64::NAN, f64::abs)
        })
        .fold(0.0, f64::max);
    out.push(CheckOutcome::at_most(format!("{label}: dynamical phase, 100 random states"), worst_phase, 1e-6));

    let drive = ScheduleDrive::new(&schedule, ErrorModel::ideal());
    let u = propagator(&drive, (0.0, schedule.total_duration()), &fine_config(&schedule)).expect("propagator");
    let (mu1, mu2) = auxiliary_vectors(params.theta0, params.phi0);
    let cyclic = [mu1, mu2].iter().map(|m| 1.0 - inner(m, &u.apply(m)).norm()).fold(0.0, f64::max);
    out.push(CheckOutcome::at_most(format!("{label}: cyclic evolution defect"), cyclic, 1e-8));

    let distance = u.phase_aligned_distance(&params.realized_unitary());
    out.push(CheckOutcome::at_most(format!("{label}: propagator vs rotation"), distance, 1e-6));

    let geometry = PathGeometry::new(&schedule).expect("geometric schedule");
    let mut worst = 0.0f64;
    for (k, seg) in schedule.segments.iter().enumerate() {
        for j in 0..=8 {
            let local = seg.duration * j as f64 / 8.0;
            let rebuilt = path_hamiltonian(&geometry.point_in(k, local));
            worst = worst.max(rebuilt.max_abs_diff(&seg.hamiltonian(local)));
        }
    }
    out.push(CheckOutcome::at_most(format!("{label}: reverse-engineered Hamiltonian"), worst, 1e-5));
}

fn baseline_checks(out: &mut Vec<CheckOutcome>) {
    for gate in [NamedGate::S, NamedGate::H] {
        for (scheme, train) in [("DG", dg_pulse_train(gate, 1.0)), ("SLNGQC", slngqc_pulse_train(gate, 1.0))] {
            let d = composed_unitary(&train).phase_aligned_distance(&gate.unitary());
            out.push(CheckOutcome::at_most(format!("{scheme} {gate}: composed unitary"), d, 1e-10));
        }
    }
}

fn integrator_checks(out: &mut Vec<CheckOutcome>) {
    let gamma = 0.3;
    let t = 2.0;
    let cfg = EvolutionConfig::new(1e-3).expect("valid step");
    let excited = DensityMatrix::from_pure(&PureState::basis(2, 1));
    let zero_h = StaticHamiltonian::new(&Operator::zeros(2));
    let decay = [CollapseChannel::decay(gamma).expect("rate")];
    let decay_error = evolve_density(&excited, &zero_h, &decay, (0.0, t), &cfg)
        .map_or(f64::NAN, |rho| (rho.population(1) - (-gamma * t).exp()).abs());
    out.push(CheckOutcome::at_most("Lindblad pure decay vs e^{-Γt}".into(), decay_error, 1e-8));

    let omega = 0.7;
    let ground = DensityMatrix::from_pure(&PureState::basis(2, 0));
    let rabi_h = StaticHamiltonian::new(&sigma_x().scale_real(omega));
    let rabi_error = evolve_density(&ground, &rabi_h, &[], (0.0, t), &cfg)
        .map_or(f64::NAN, |rho| (rho.population(1) - (omega * t).sin().powi(2)).abs());
    out.push(CheckOutcome::at_most("Lindblad Rabi vs sin²(Ωt)".into(), rabi_error, 1e-8));
}

fn step_halving_checks(out: &mut Vec<CheckOutcome>) {
    let channels = qubit_channels(4e-4, 4e-4).expect("rates");
    for gate in [NamedGate::S, NamedGate::H] {
        let schedule = synthesize(gate.geometric_params(PathVariant::Path1), 1.0).expect("synthesize");
        let errors = ErrorModel::control(0.1);
        let cfg = EvolutionConfig::for_schedule(&schedule);
        let target = gate.unitary();
        let f = |c: &EvolutionConfig| {
            single_qubit_fidelity(&schedule, errors, &channels, &target, c).map_or(f64::NAN, |r| r.value)
        };
        let change = (f(&cfg) - f(&cfg.halved())).abs();
        out.push(CheckOutcome::at_most(format!("{gate}: fidelity change under dt halving"), change, 1e-7));
    }
}

/// Runs every check; `seed` drives the random superposition coefficients.
pub fn run_invariant_suite(seed: u64) -> Vec<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for (name, params) in reference_gates() {
        geometric_checks(&format!("{} {}", params.path, name), params, &mut rng, &mut out);
    }
    baseline_checks(&mut out);
    integrator_checks(&mut out);
    step_halving_checks(&mut out);
    out
}
