//! Resonant-pulse baselines: a conventional dynamical gate (DG) and a
//! single-loop nonadiabatic geometric gate (SLNGQC), both for S and H.

use serde::{Deserialize, Serialize};

use crate::algebra::{sigma_x, sigma_y, Operator, C64};
use crate::paths::{NamedGate, PulseSchedule, Scheme, Segment};

/// A square resonant pulse of area Θ and phase φ at amplitude Ω.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResonantPulse {
    pub theta: f64,
    pub phase: f64,
    pub omega: f64,
}

impl ResonantPulse {
    pub fn duration(&self) -> f64 {
        self.theta / self.omega
    }

    pub fn segment(&self) -> Segment {
        Segment::resonant(self.duration(), self.omega, self.phase)
    }
}

/// cosΘ I − i sinΘ (cosφ σ_x + sinφ σ_y).
pub fn resonant_unitary(p: &ResonantPulse) -> Operator {
    let (s, c) = p.theta.sin_cos();
    let axis = &sigma_x().scale_real(p.phase.cos()) + &sigma_y().scale_real(p.phase.sin());
    &Operator::identity(2).scale_real(c) + &axis.scale(C64::new(0.0, -s))
}

/// (Θ, φ) pairs in application order.
fn dg_pulses(gate: NamedGate) -> &'static [(f64, f64)] {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
    match gate {
        NamedGate::S => &[(FRAC_PI_4, 0.0), (FRAC_PI_4, 1.5 * PI), (FRAC_PI_4, PI)],
        NamedGate::H => &[(FRAC_PI_2, 0.0), (FRAC_PI_4, 1.5 * PI)],
    }
}

fn slngqc_pulses(gate: NamedGate) -> &'static [(f64, f64)] {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_8, PI};
    match gate {
        NamedGate::S => &[(FRAC_PI_2, -FRAC_PI_2), (FRAC_PI_2, 0.75 * PI)],
        NamedGate::H => &[(FRAC_PI_8, -FRAC_PI_2), (FRAC_PI_2, PI), (3.0 * FRAC_PI_8, -FRAC_PI_2)],
    }
}

fn pulses(table: &[(f64, f64)], omega: f64) -> Vec<ResonantPulse> {
    table.iter().map(|&(theta, phase)| ResonantPulse { theta, phase, omega }).collect()
}

pub fn dg_pulse_train(gate: NamedGate, omega: f64) -> Vec<ResonantPulse> {
    pulses(dg_pulses(gate), omega)
}

pub fn slngqc_pulse_train(gate: NamedGate, omega: f64) -> Vec<ResonantPulse> {
    pulses(slngqc_pulses(gate), omega)
}

/// Product of the pulse unitaries, last pulse leftmost.
pub fn composed_unitary(train: &[ResonantPulse]) -> Operator {
    train
        .iter()
        .fold(Operator::identity(2), |acc, p| resonant_unitary(p).matmul(&acc))
}

pub fn dg_sequence(gate: NamedGate, omega: f64) -> PulseSchedule {
    PulseSchedule {
        scheme: Scheme::Dynamical { gate },
        omega,
        segments: dg_pulse_train(gate, omega).iter().map(ResonantPulse::segment).collect(),
    }
}

pub fn slngqc_sequence(gate: NamedGate, omega: f64) -> PulseSchedule {
    PulseSchedule {
        scheme: Scheme::SingleLoop { gate },
        omega,
        segments: slngqc_pulse_train(gate, omega).iter().map(ResonantPulse::segment).collect(),
    }
}
