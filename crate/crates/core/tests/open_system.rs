use std::f64::consts::PI;

use singqc::algebra::{sigma_minus, sigma_x, DensityMatrix, Operator, PureState, C64, I, ONE};
use singqc::fidelity::single_qubit_fidelity;
use singqc::lindblad::{
    evolve_density, evolve_pure, perturbed_hamiltonian, qubit_channels, CollapseChannel, DriveContext, ErrorModel,
    EvolutionConfig, LindbladError, StaticHamiltonian,
};
use singqc::paths::{synthesize, GateParams, NamedGate, PathVariant};

fn cfg(dt: f64) -> EvolutionConfig {
    EvolutionConfig::new(dt).unwrap()
}

fn fidelity(gate: NamedGate, path: PathVariant, errors: ErrorModel, gamma: f64) -> f64 {
    let s = synthesize(gate.geometric_params(path), 1.0).unwrap();
    let channels = qubit_channels(gamma, gamma).unwrap();
    single_qubit_fidelity(&s, errors, &channels, &gate.unitary(), &EvolutionConfig::for_schedule(&s))
        .unwrap()
        .value
}

#[test]
fn error_model_substitutions() {
    let h = Operator::from_rows([[C64::new(0.3, 0.0), C64::new(0.5, -0.2)], [C64::new(0.5, 0.2), C64::new(-0.3, 0.0)]]);
    let ctx = DriveContext { omega: 2.0, phase: 0.7 };
    let same = perturbed_hamiltonian(&h, ctx, ErrorModel::ideal()).unwrap();
    assert!(same.max_abs_diff(&h) < 1e-15);
    let scaled = perturbed_hamiltonian(&h, ctx, ErrorModel::control(0.1)).unwrap();
    assert!(scaled.max_abs_diff(&h.scale_real(1.1)) < 1e-15);
    // η/2·Ω on σz: ±0.05·2 on the diagonal
    let shifted = perturbed_hamiltonian(&h, ctx, ErrorModel::detuning(0.05)).unwrap();
    assert!((shifted[(0, 0)].re - 0.35).abs() < 1e-15 && (shifted[(1, 1)].re + 0.35).abs() < 1e-15);
    let phased = perturbed_hamiltonian(&h, ctx, ErrorModel::phase(0.2)).unwrap();
    assert!((phased[(0, 1)] - h[(0, 1)] * C64::from_polar(1.0, -0.2 * 0.7)).norm() < 1e-15);
    assert!(phased.is_hermitian(1e-15));
}

#[test]
fn zero_hamiltonian_leaves_states_alone() {
    let psi = PureState::normalized(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)]);
    let h = StaticHamiltonian::new(&Operator::zeros(2));
    let out = evolve_pure(&psi, &h, (0.0, 3.0), &cfg(0.01)).unwrap();
    assert_eq!(out.amplitudes(), psi.amplitudes());
    let rho = DensityMatrix::from_pure(&psi);
    let after = evolve_density(&rho, &h, &[], (0.0, 3.0), &cfg(0.01)).unwrap();
    assert!(after.as_operator().max_abs_diff(rho.as_operator()) < 1e-15);
}

#[test]
fn rabi_pi_pulse() {
    let omega = 1.7;
    let h = StaticHamiltonian::new(&sigma_x().scale_real(omega));
    let t1 = PI / (2.0 * omega);
    let rho = evolve_density(&DensityMatrix::from_pure(&PureState::basis(2, 0)), &h, &[], (0.0, t1), &cfg(1e-3)).unwrap();
    assert!((rho.population(1) - 1.0).abs() < 1e-8);
    let psi = evolve_pure(&PureState::basis(2, 0), &h, (0.0, t1), &cfg(1e-3)).unwrap();
    assert!((psi.amplitudes()[1] - (-I)).norm() < 1e-8);
}

#[test]
fn pure_decay_and_dephasing_closed_forms() {
    let gamma = 0.4;
    let t = 3.0;
    let h = StaticHamiltonian::new(&Operator::zeros(2));
    let plus = PureState::normalized(vec![ONE, ONE]);
    let decay = [CollapseChannel::new(&sigma_minus(), gamma).unwrap()];
    let rho = evolve_density(&DensityMatrix::from_pure(&PureState::basis(2, 1)), &h, &decay, (0.0, t), &cfg(1e-3)).unwrap();
    assert!((rho.population(1) - (-gamma * t).exp()).abs() < 1e-8);
    let rho = evolve_density(&DensityMatrix::from_pure(&plus), &h, &decay, (0.0, t), &cfg(1e-3)).unwrap();
    assert!((rho.as_operator()[(0, 1)].norm() - 0.5 * (-gamma * t / 2.0).exp()).abs() < 1e-8);
    let deph = qubit_channels(0.0, gamma).unwrap();
    let rho = evolve_density(&DensityMatrix::from_pure(&plus), &h, &deph, (0.0, t), &cfg(1e-3)).unwrap();
    assert!((rho.as_operator()[(0, 1)].norm() - 0.5 * (-2.0 * gamma * t).exp()).abs() < 1e-8);
    assert!((rho.trace().re - 1.0).abs() < 1e-12);
}

#[test]
fn unstable_step_is_reported() {
    let h = StaticHamiltonian::new(&sigma_x().scale_real(50.0));
    let decay = [CollapseChannel::decay(1.0).unwrap()];
    let rho = DensityMatrix::from_pure(&PureState::basis(2, 0));
    let err = evolve_density(&rho, &h, &decay, (0.0, 10.0), &cfg(0.2)).unwrap_err();
    assert!(matches!(err, LindbladError::TraceDrift { .. }), "{err}");
    assert!(matches!(EvolutionConfig::new(0.0), Err(LindbladError::BadStep(_))));
    assert!(matches!(CollapseChannel::decay(-1.0), Err(LindbladError::NegativeRate(_))));
}

#[test]
fn perfect_gate_scores_one() {
    for gate in [NamedGate::S, NamedGate::H] {
        for path in [PathVariant::Path1, PathVariant::Path2] {
            let f = fidelity(gate, path, ErrorModel::ideal(), 0.0);
            assert!((f - 1.0).abs() < 1e-7, "{gate} {path}: {f}");
        }
    }
}

#[test]
fn robustness_points() {
    assert!(fidelity(NamedGate::S, PathVariant::Path1, ErrorModel::control(0.2), 0.0) >= 0.999);
    assert!(fidelity(NamedGate::S, PathVariant::Path2, ErrorModel::detuning(0.2), 0.0) >= 0.993);
}

#[test]
fn fidelity_ignores_target_global_phase() {
    let s = synthesize(GateParams::h_gate(PathVariant::Path1), 1.0).unwrap();
    let cfg = EvolutionConfig::for_schedule(&s);
    let channels = qubit_channels(1e-3, 1e-3).unwrap();
    let errors = ErrorModel { epsilon: 0.1, eta: -0.05, chi: 0.0 };
    let base = single_qubit_fidelity(&s, errors, &channels, &NamedGate::H.unitary(), &cfg).unwrap().value;
    for k in 0..10 {
        let phase = C64::from_polar(1.0, 0.61 * k as f64 + 0.1);
        let f = single_qubit_fidelity(&s, errors, &channels, &NamedGate::H.unitary().scale(phase), &cfg).unwrap().value;
        assert!((f - base).abs() < 1e-12);
    }
}

#[test]
fn fidelity_falls_with_decoherence() {
    let mut last = f64::INFINITY;
    for g in [0.0, 1e-4, 2e-4, 4e-4] {
        let f = fidelity(NamedGate::S, PathVariant::Path1, ErrorModel::control(0.1), g);
        assert!(f <= last + 1e-9, "Γ = {g}: {f} > {last}");
        assert!((0.0..=1.0 + 1e-9).contains(&f));
        last = f;
    }
}

#[test]
fn dimension_checks() {
    let s = synthesize(GateParams::s_gate(PathVariant::Path1), 1.0).unwrap();
    let wrong = Operator::identity(3);
    assert!(single_qubit_fidelity(&s, ErrorModel::ideal(), &[], &wrong, &EvolutionConfig::for_schedule(&s)).is_err());
    let h3 = Operator::identity(3);
    let ctx = DriveContext { omega: 1.0, phase: 0.0 };
    assert!(matches!(perturbed_hamiltonian(&h3, ctx, ErrorModel::ideal()), Err(LindbladError::DimensionMismatch { .. })));
}
