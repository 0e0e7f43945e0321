use singqc::sweep::{
    figure_panel, reproduce_figure, run_sweep, Axis, GateSpec, Range, Scenario, SweepError, SweepResult, SweepSpec,
    FIGURE_IDS,
};

fn spec(scenario: Scenario, gate: GateSpec, axis: Axis, start: f64, stop: f64, steps: usize) -> SweepSpec {
    SweepSpec::new(scenario, gate, axis, Range { start, stop, steps })
}

#[test]
fn identical_specs_give_identical_csv() {
    let s = spec(Scenario::SingqcPath1, GateSpec::H, Axis::Eta, -0.2, 0.2, 9).with_fixed("gamma_rate", 2e-4);
    let a = run_sweep(&s).unwrap();
    let b = run_sweep(&s).unwrap();
    assert_eq!(a.csv_body(), b.csv_body());
    assert!(a.to_csv().starts_with("# singqc sweep"));
    assert!(a.csv_body().starts_with(SweepResult::HEADER));
}

#[test]
fn sub_range_reproduces_rows() {
    let full = run_sweep(&spec(Scenario::Slngqc, GateSpec::S, Axis::Epsilon, -0.2, 0.2, 41)).unwrap();
    let part = run_sweep(&spec(Scenario::Slngqc, GateSpec::S, Axis::Epsilon, -0.1, 0.1, 21)).unwrap();
    for row in &part.rows {
        let twin = full.rows.iter().find(|r| r.axis_value == row.axis_value).expect("grid point shared");
        assert_eq!(twin.fidelity, row.fidelity, "at {}", row.axis_value);
    }
}

#[test]
fn rows_follow_the_axis() {
    let r = run_sweep(&spec(Scenario::Dg, GateSpec::H, Axis::Chi, -0.2, 0.2, 7)).unwrap();
    assert_eq!(r.rows.len(), 7);
    assert!(r.rows.windows(2).all(|w| w[0].axis_value < w[1].axis_value));
    assert!(r.rows.iter().all(|row| row.n_states == 6 && !row.sampled && row.stderr.is_none()));
}

#[test]
fn single_qubit_examples() {
    let s1 = run_sweep(&spec(Scenario::SingqcPath1, GateSpec::S, Axis::Epsilon, -0.2, 0.2, 41)).unwrap();
    assert!(s1.min_fidelity() >= 0.999, "{}", s1.min_fidelity());
    let dg = run_sweep(&spec(Scenario::Dg, GateSpec::S, Axis::Epsilon, -0.2, 0.2, 3)).unwrap();
    assert!((dg.rows[1].fidelity - 1.0).abs() < 1e-7);
    assert!(dg.rows[0].fidelity < dg.rows[1].fidelity);
    let h2 = run_sweep(&spec(Scenario::SingqcPath2, GateSpec::H, Axis::Eta, -0.2, 0.2, 41)).unwrap();
    assert!(h2.min_fidelity() >= 0.993, "{}", h2.min_fidelity());
}

#[test]
fn config_file_round_trip() {
    let s = spec(Scenario::RydbergC2z, GateSpec::CNZ, Axis::EtaPrime, -0.2, 0.2, 5).with_fixed("tau_r", 5e-5);
    assert_eq!(SweepSpec::from_toml(&s.to_toml()).unwrap(), s);
    let text = "scenario = \"dg\"\ngate = \"H\"\naxis = \"eta\"\n[range]\nstart = -0.1\nstop = 0.1\nsteps = 3\n";
    let parsed = SweepSpec::from_toml(text).unwrap();
    assert_eq!(parsed, spec(Scenario::Dg, GateSpec::H, Axis::Eta, -0.1, 0.1, 3));
    assert!(SweepSpec::from_toml(&format!("{text}bogus = 1\n")).is_err());
    let custom = "scenario = \"singqc-path2\"\ngate = { theta0 = 0.5, phi0 = 0.1, gamma = 1.0 }\naxis = \"chi\"\n\
                  [range]\nstart = 0.0\nstop = 0.1\nsteps = 2\n";
    assert_eq!(SweepSpec::from_toml(custom).unwrap().gate, GateSpec::Custom { theta0: 0.5, phi0: 0.1, gamma: 1.0 });
}

#[test]
fn invalid_sweeps_are_rejected_before_running() {
    let chi = spec(Scenario::RydbergCz, GateSpec::CNZ, Axis::Chi, -0.2, 0.2, 3);
    assert!(matches!(run_sweep(&chi), Err(SweepError::AxisScenario { .. })));
    let eps_t = spec(Scenario::SingqcPath1, GateSpec::S, Axis::EpsilonT, -0.2, 0.2, 3);
    assert!(run_sweep(&eps_t).is_err());
}

#[test]
fn every_figure_has_a_panel() {
    for id in FIGURE_IDS {
        let p = figure_panel(id, Some(3)).unwrap();
        assert!(!p.curves.is_empty(), "{id}");
        for c in &p.curves {
            c.spec.validate().unwrap();
        }
    }
    assert!(figure_panel("5z", None).is_err());
    assert!(reproduce_figure("1a", std::path::Path::new("/nonexistent"), None).is_err());
}

#[test]
fn reproduce_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let files = reproduce_figure("2c", dir.path(), Some(3)).unwrap();
    assert_eq!(files.len(), 4);
    for f in &files[..3] {
        let text = std::fs::read_to_string(f).unwrap();
        assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 4, "{}", f.display());
    }
    let manifest: toml::Table = std::fs::read_to_string(&files[3]).unwrap().parse().unwrap();
    assert_eq!(manifest["figure"].as_str(), Some("2c"));
    assert_eq!(manifest["curves"].as_array().unwrap().len(), 3);
}
