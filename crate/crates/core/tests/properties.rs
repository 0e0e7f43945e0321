use std::f64::consts::PI;

use proptest::prelude::*;

use singqc::algebra::{rotation_unitary, DensityMatrix, Operator, PureState, C64};
use singqc::fidelity::{register_product_state, single_qubit_fidelity};
use singqc::lindblad::{
    evolve_density, perturbed_hamiltonian, qubit_channels, DriveContext, ErrorModel, EvolutionConfig, ScheduleDrive,
};
use singqc::paths::{
    dynamical_phase, singqc_residual, synthesize, GateParams, NamedGate, PathVariant, PulseSchedule,
    DEFAULT_QUAD_STEPS,
};
use singqc::sparse::SparseOperator;
use singqc::sweep::Range;

fn complex() -> impl Strategy<Value = C64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| C64::new(re, im))
}

fn hermitian2() -> impl Strategy<Value = Operator> {
    (-1.0..1.0f64, -1.0..1.0f64, complex()).prop_map(|(a, d, b)| {
        Operator::from_rows([[C64::new(a, 0.0), b], [b.conj(), C64::new(d, 0.0)]])
    })
}

fn errors() -> impl Strategy<Value = ErrorModel> {
    (-0.2..0.2f64, -0.2..0.2f64, -0.2..0.2f64).prop_map(|(epsilon, eta, chi)| ErrorModel { epsilon, eta, chi })
}

fn path() -> impl Strategy<Value = PathVariant> {
    prop_oneof![Just(PathVariant::Path1), Just(PathVariant::Path2)]
}

fn params() -> impl Strategy<Value = GateParams> {
    (0.0..PI, 0.0..2.0 * PI, 0.05..PI, path()).prop_map(|(t, p, g, path)| GateParams::new(t, p, g, path).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn perturbed_hamiltonian_stays_hermitian(h in hermitian2(), e in errors(), omega in 0.1..5.0f64, phase in -7.0..7.0f64) {
        let out = perturbed_hamiltonian(&h, DriveContext { omega, phase }, e).unwrap();
        prop_assert!(out.is_hermitian(1e-12));
    }

    #[test]
    fn rotations_are_unitary(gamma in -7.0..7.0f64, theta in 0.0..PI, phi in 0.0..2.0 * PI) {
        let n = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
        prop_assert!(rotation_unitary(gamma, n).unwrap().is_unitary(1e-12));
    }

    #[test]
    fn polar_loops_carry_no_residual(phi0 in 0.0..2.0 * PI, gamma in 0.05..PI, path in path(), a in 0.0..PI / 2.0, b in 0.0..2.0 * PI) {
        let s = synthesize(GateParams::new(0.0, phi0, gamma, path).unwrap(), 1.0).unwrap();
        prop_assert!(singqc_residual(&s, DEFAULT_QUAD_STEPS).unwrap().norm() < 1e-8);
        let phase = dynamical_phase(&s, C64::new(a.cos(), 0.0), C64::from_polar(a.sin(), b), DEFAULT_QUAD_STEPS).unwrap();
        prop_assert!(phase.abs() < 1e-6, "{}", phase);
    }

    #[test]
    fn schedule_toml_round_trips(p in params(), omega in 0.1..10.0f64) {
        let s = synthesize(p, omega).unwrap();
        prop_assert_eq!(PulseSchedule::from_toml(&s.to_toml()).unwrap(), s);
    }

    #[test]
    fn sparse_and_dense_products_agree(entries in prop::collection::vec(complex(), 16), x in prop::collection::vec(complex(), 4)) {
        let dense = Operator::from_vec(4, entries);
        let sparse = SparseOperator::from_dense(&dense);
        let mut y = vec![C64::new(0.0, 0.0); 4];
        sparse.apply_add(&x, 1, &mut y, C64::new(1.0, 0.0));
        let expected = dense.apply(&x);
        for (a, b) in y.iter().zip(&expected) {
            prop_assert!((a - b).norm() < 1e-12);
        }
        prop_assert!(sparse.to_dense().max_abs_diff(&dense) == 0.0);
    }

    #[test]
    fn register_inputs_are_normalized(n in 1usize..=4, seed in any::<usize>()) {
        let index = seed % 4usize.pow(n as u32);
        let amps = register_product_state(index, n);
        prop_assert_eq!(amps.len(), 1 << n);
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        prop_assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn grid_values_are_sorted(start in -1.0..1.0f64, width in 1e-3..2.0f64, steps in 2usize..200) {
        let v = Range { start, stop: start + width, steps }.values();
        prop_assert_eq!(v.len(), steps);
        prop_assert!(v.windows(2).all(|w| w[0] < w[1]));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn evolution_preserves_trace(p in params(), e in errors(), g in 0.0..1e-2f64, a in 0.0..PI / 2.0) {
        let s = synthesize(p, 1.0).unwrap();
        let drive = ScheduleDrive::new(&s, e);
        let psi = PureState::normalized(vec![C64::new(a.cos(), 0.0), C64::new(0.0, a.sin())]);
        let channels = qubit_channels(g, g).unwrap();
        let rho = evolve_density(&DensityMatrix::from_pure(&psi), &drive, &channels, (0.0, s.total_duration()),
            &EvolutionConfig::for_schedule(&s)).unwrap();
        prop_assert!((rho.trace().re - 1.0).abs() < 1e-9);
        prop_assert!(rho.as_operator().is_hermitian(1e-10));
    }

    #[test]
    fn fidelity_is_blind_to_target_phase(e in errors(), alpha in 0.0..2.0 * PI, path in path()) {
        let s = synthesize(NamedGate::S.geometric_params(path), 1.0).unwrap();
        let cfg = EvolutionConfig::for_schedule(&s);
        let u = NamedGate::S.unitary();
        let base = single_qubit_fidelity(&s, e, &[], &u, &cfg).unwrap().value;
        let rotated = single_qubit_fidelity(&s, e, &[], &u.scale(C64::from_polar(1.0, alpha)), &cfg).unwrap().value;
        prop_assert!((base - rotated).abs() < 1e-12);
        prop_assert!((0.0..=1.0 + 1e-9).contains(&base));
    }
}
