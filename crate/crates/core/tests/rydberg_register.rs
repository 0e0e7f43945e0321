use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use singqc::algebra::{tensor_product, Operator, C64, ONE, ZERO};
use singqc::fidelity::{cnz_target, multiqubit_fidelity, MultiTarget, Sampling};
use singqc::paths::GateParams;
use singqc::rydberg::{
    compare_full_vs_effective, conditional_phase, cz_gate_params, register_config, total_hamiltonian, LevelSet,
    RydbergErrors, RydbergGate, RydbergSpec, LEVEL_R, REGISTER_STEP_FRACTION,
};
use singqc::sparse::embed_site;
use singqc::sweep::default_register_params;

fn register(n: usize, params: GateParams, levels: LevelSet) -> RydbergGate {
    RydbergGate::new(RydbergSpec::reference_point(n), params, levels).unwrap()
}

#[test]
fn rates_at_200_microseconds() {
    let spec = RydbergSpec::reference_point(1);
    assert!((spec.decay_rate() - 5e3).abs() < 1e-9);
    let g = register(1, default_register_params(), LevelSet::Full);
    let ch = g.collapse_channels();
    assert_eq!(ch.len(), 6);
    let rates: Vec<f64> = ch.iter().map(|c| c.rate()).collect();
    assert_eq!(rates, vec![625.0, 625.0, 3750.0, 625.0, 625.0, 3750.0]);
}

#[test]
fn interaction_sits_on_the_doubly_excited_state() {
    let spec = RydbergSpec::reference_point(1);
    let schedule = singqc::paths::synthesize(default_register_params(), spec.omega_t).unwrap();
    let h_at = |v_t: f64| {
        let g = RydbergGate::with_schedule(RydbergSpec { v_t, ..spec }, schedule.clone(), LevelSet::Full).unwrap();
        let t = 0.3 * g.duration();
        (total_hamiltonian(&g, RydbergErrors::ideal(), t).unwrap(), g.index_of(&[LEVEL_R, LEVEL_R]), g.dim())
    };
    let (h1, rr, dim) = h_at(spec.v_t);
    let (h2, _, _) = h_at(2.0 * spec.v_t);
    for i in 0..dim {
        for j in 0..dim {
            let expected = if i == rr && j == rr { spec.v_t } else { 0.0 };
            let d = h2[(i, j)] - h1[(i, j)];
            assert!((d.re - expected).abs() < 1e-6 * spec.v_t && d.im.abs() < 1e-6 * spec.v_t, "({i}, {j}): {d}");
        }
    }
}

#[test]
fn register_hamiltonian_is_hermitian() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let g = register(2, default_register_params(), LevelSet::Full);
    for _ in 0..50 {
        let t = rng.gen_range(0.0..g.duration());
        let errors = RydbergErrors {
            epsilon_c: rng.gen_range(-0.2..0.2),
            epsilon_t: rng.gen_range(-0.2..0.2),
            eta_prime: rng.gen_range(-0.2..0.2),
        };
        let h = total_hamiltonian(&g, errors, t).unwrap();
        assert!(h.hermiticity_defect() < 1e-12 * h.max_abs().max(1.0));
    }
}

#[test]
fn gate_time_does_not_grow_with_register() {
    let d: Vec<f64> = (1..=3).map(|n| register(n, default_register_params(), LevelSet::Full).duration()).collect();
    assert_eq!(d[0], d[1]);
    assert_eq!(d[0], d[2]);
}

#[test]
fn site_embedding_commutes_with_ordering() {
    let a = Operator::from_rows([[ONE, C64::new(0.0, 2.0)], [C64::new(3.0, 0.0), ZERO]]);
    let b = Operator::from_rows([[C64::new(0.5, 0.0), ONE], [ONE, C64::new(-1.0, 0.0)]]);
    let ea = embed_site(&a, 0, 2, 2).to_dense();
    let eb = embed_site(&b, 1, 2, 2).to_dense();
    let ab = tensor_product(&a, &b);
    assert!(ea.matmul(&eb).max_abs_diff(&ab) < 1e-15);
    assert!(eb.matmul(&ea).max_abs_diff(&ab) < 1e-15);
}

#[test]
fn effective_gate_flips_sign_of_all_ones() {
    // e^{−iπσz} = −I on the rotating-frame pair {|11⟩, |1r⟩}
    let u = default_register_params().realized_unitary();
    assert!((u[(0, 0)] + ONE).norm() < 1e-12);
    let lab = conditional_phase(&singqc::paths::synthesize(cz_gate_params(), 1.0).unwrap()).unwrap();
    assert!((lab.abs() - PI).abs() < 1e-9);
}

#[test]
fn blockade_and_effective_model_agree() {
    let g = register(1, default_register_params(), LevelSet::Full);
    let cfg = register_config(&g.spec, REGISTER_STEP_FRACTION);
    let blocked = compare_full_vs_effective(&g, 0b01, 50, &cfg).unwrap();
    assert!((1.0 - blocked.final_population_full).abs() < 0.01, "{blocked:?}");
    let driven = compare_full_vs_effective(&g, 0b11, 50, &cfg).unwrap();
    let dphi = (driven.final_phase_full - driven.final_phase_effective + PI).rem_euclid(2.0 * PI) - PI;
    assert!(dphi.abs() < 0.05, "{driven:?}");
}

#[test]
fn full_sample_equals_enumeration() {
    let g = register(1, default_register_params(), LevelSet::DarkEliminated);
    let cfg = register_config(&g.spec, REGISTER_STEP_FRACTION);
    let errors = RydbergErrors { epsilon_t: 0.05, ..RydbergErrors::ideal() };
    let full = multiqubit_fidelity(&g, errors, &[], &MultiTarget::IdealEvolution, Sampling::Full, &cfg).unwrap();
    let all = multiqubit_fidelity(&g, errors, &[], &MultiTarget::IdealEvolution, Sampling::Sample { k: 16, seed: 5 }, &cfg)
        .unwrap();
    assert_eq!(full.value, all.value);
    assert_eq!(all.stderr, Some(0.0));
    assert!(multiqubit_fidelity(&g, errors, &[], &MultiTarget::IdealEvolution, Sampling::Sample { k: 17, seed: 5 }, &cfg)
        .is_err());
}

#[test]
fn ideal_register_run_reaches_cz_operator() {
    let g = register(1, cz_gate_params(), LevelSet::DarkEliminated);
    let cfg = register_config(&g.spec, REGISTER_STEP_FRACTION);
    let target = MultiTarget::Computational(cnz_target(2));
    let f = multiqubit_fidelity(&g, RydbergErrors::ideal(), &[], &target, Sampling::Full, &cfg).unwrap();
    assert!(f.value >= 0.9999, "F′ against diag(1,1,1,−1) = {}", f.value);
}

#[test]
fn reduced_and_full_level_sets_agree() {
    let spec = RydbergSpec::reference_point(1).with_lifetime(50e-6);
    let cfg = register_config(&spec, REGISTER_STEP_FRACTION);
    let errors = RydbergErrors { eta_prime: 0.1, ..RydbergErrors::ideal() };
    let sample = Sampling::Sample { k: 3, seed: 2 };
    let f: Vec<f64> = [LevelSet::Full, LevelSet::DarkEliminated]
        .into_iter()
        .map(|levels| {
            let g = RydbergGate::new(spec, default_register_params(), levels).unwrap();
            multiqubit_fidelity(&g, errors, &g.collapse_channels(), &MultiTarget::IdealEvolution, sample, &cfg)
                .unwrap()
                .value
        })
        .collect();
    assert!((f[0] - f[1]).abs() < 1e-10, "{f:?}");
}

#[test]
fn invalid_specs_are_rejected() {
    let bad = RydbergSpec { tau_r: 0.0, ..RydbergSpec::reference_point(1) };
    assert!(RydbergGate::new(bad, default_register_params(), LevelSet::Full).is_err());
    let bad = RydbergSpec { n_controls: 5, ..RydbergSpec::reference_point(1) };
    assert!(RydbergGate::new(bad, default_register_params(), LevelSet::Full).is_err());
}
