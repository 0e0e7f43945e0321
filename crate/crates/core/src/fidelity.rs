//! State-averaged gate fidelities.
//!
//! Single qubit: F = (1/6) Σ_l ⟨Ψ_l|U†ρ_l U|Ψ_l⟩ over the six cardinal
//! states. Register: F′ = (1/4^{N+1}) Σ_j ⟨Ψ′_j|U′†ρ′_j U′|Ψ′_j⟩ over
//! product states with each atom in |0⟩, |1⟩, (|0⟩+|1⟩)/√2 or
//! (|0⟩−i|1⟩)/√2.

use std::f64::consts::FRAC_1_SQRT_2;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{inner, DensityMatrix, Operator, PureState, C64, ONE, ZERO};
use crate::lindblad::{evolve_density, evolve_pure, CollapseChannel, ErrorModel, EvolutionConfig, LindbladError, ScheduleDrive};
use crate::paths::PulseSchedule;
use crate::rydberg::{RydbergError, RydbergErrors, RydbergGate};

#[derive(Debug, Error)]
pub enum FidelityError {
    #[error("sample size {k} exceeds the {population} available initial states")]
    SampleTooLarge { k: usize, population: usize },
    #[error("sample size must be positive")]
    EmptySample,
    #[error("target has dimension {got}, expected {expected}")]
    TargetDimension { expected: usize, got: usize },
    #[error(transparent)]
    Evolution(#[from] LindbladError),
    #[error(transparent)]
    Register(#[from] RydbergError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FidelityReport {
    pub value: f64,
    pub n_states: usize,
    pub sampled: bool,
    pub seed: Option<u64>,
    /// Standard error of the sample mean (finite-population corrected).
    pub stderr: Option<f64>,
}

/// |0⟩, |1⟩, (|0⟩±|1⟩)/√2, (|0⟩±i|1⟩)/√2.
pub fn six_states() -> [[C64; 2]; 6] {
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    let ih = C64::new(0.0, FRAC_1_SQRT_2);
    [[ONE, ZERO], [ZERO, ONE], [h, h], [h, -h], [h, ih], [h, -ih]]
}

/// Per-atom register inputs |0⟩, |1⟩, (|0⟩+|1⟩)/√2, (|0⟩−i|1⟩)/√2.
pub fn register_single_states() -> [[C64; 2]; 4] {
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    [[ONE, ZERO], [ZERO, ONE], [h, h], [h, C64::new(0.0, -FRAC_1_SQRT_2)]]
}

/// Product state `index` (base-4 digits, atom 0 most significant) as
/// 2^{n_atoms} computational amplitudes.
pub fn register_product_state(index: usize, n_atoms: usize) -> Vec<C64> {
    let singles = register_single_states();
    let mut amps = vec![ONE];
    for k in 0..n_atoms {
        let digit = (index / 4usize.pow((n_atoms - 1 - k) as u32)) % 4;
        let s = singles[digit];
        amps = amps.iter().flat_map(|a| [a * s[0], a * s[1]]).collect();
    }
    amps
}

fn overlap_with(rho: &DensityMatrix, target: &[C64]) -> f64 {
    rho.expectation_in(target)
}

pub fn single_qubit_fidelity(
    schedule: &PulseSchedule,
    errors: ErrorModel,
    channels: &[CollapseChannel],
    target: &Operator,
    cfg: &EvolutionConfig,
) -> Result<FidelityReport, FidelityError> {
    if target.dim() != 2 {
        return Err(FidelityError::TargetDimension { expected: 2, got: target.dim() });
    }
    let drive = ScheduleDrive::new(schedule, errors);
    let t_span = (0.0, schedule.total_duration());
    let mut total = 0.0;
    for psi in six_states() {
        let ideal = target.apply(&psi);
        let overlap = if channels.is_empty() {
            let out = evolve_pure(&PureState::normalized(psi.to_vec()), &drive, t_span, cfg)?;
            inner(&ideal, out.amplitudes()).norm_sqr()
        } else {
            let rho0 = DensityMatrix::from_pure(&PureState::normalized(psi.to_vec()));
            overlap_with(&evolve_density(&rho0, &drive, channels, t_span, cfg)?, &ideal)
        };
        total += overlap;
    }
    Ok(FidelityReport { value: total / 6.0, n_states: 6, sampled: false, seed: None, stderr: None })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Sampling {
    Full,
    Sample { k: usize, seed: u64 },
}

/// Reference map U′ for the register fidelity.
#[derive(Clone, Debug)]
pub enum MultiTarget {
    /// The error-free, decay-free evolution of the same register.
    IdealEvolution,
    /// A unitary on the 2^{N+1} computational subspace; auxiliary levels
    /// count as loss.
    Computational(Operator),
}

/// diag(1, …, 1, −1) on N+1 qubits.
pub fn cnz_target(n_atoms: usize) -> Operator {
    let dim = 1usize << n_atoms;
    let mut diag = vec![ONE; dim];
    diag[dim - 1] = -ONE;
    Operator::diagonal(&diag)
}

fn chosen_states(population: usize, sampling: Sampling) -> Result<Vec<usize>, FidelityError> {
    match sampling {
        Sampling::Full => Ok((0..population).collect()),
        Sampling::Sample { k, seed } => {
            if k == 0 {
                return Err(FidelityError::EmptySample);
            }
            if k > population {
                return Err(FidelityError::SampleTooLarge { k, population });
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut idx = sample(&mut rng, population, k).into_vec();
            idx.sort_unstable();
            Ok(idx)
        }
    }
}

pub fn multiqubit_fidelity(
    gate: &RydbergGate,
    errors: RydbergErrors,
    channels: &[CollapseChannel],
    target: &MultiTarget,
    sampling: Sampling,
    cfg: &EvolutionConfig,
) -> Result<FidelityReport, FidelityError> {
    let n_atoms = gate.spec.n_atoms();
    if let MultiTarget::Computational(op) = target {
        let expected = 1usize << n_atoms;
        if op.dim() != expected {
            return Err(FidelityError::TargetDimension { expected, got: op.dim() });
        }
    }
    let population = 4usize.pow(n_atoms as u32);
    let indices = chosen_states(population, sampling)?;
    let actual = gate.hamiltonian(errors);
    let ideal = gate.hamiltonian(RydbergErrors::ideal());
    let t_span = (0.0, gate.duration());

    let overlap = |j: usize| -> Result<f64, FidelityError> {
        let comp = register_product_state(j, n_atoms);
        let psi0 = PureState::normalized(gate.embed_computational(&comp)?);
        let reference = match target {
            MultiTarget::IdealEvolution => evolve_pure(&psi0, &ideal, t_span, cfg)?.into_amplitudes(),
            MultiTarget::Computational(op) => gate.embed_computational(&op.apply(&comp))?,
        };
        if channels.is_empty() {
            let out = evolve_pure(&psi0, &actual, t_span, cfg)?;
            Ok(inner(&reference, out.amplitudes()).norm_sqr())
        } else {
            let rho = evolve_density(&DensityMatrix::from_pure(&psi0), &actual, channels, t_span, cfg)?;
            Ok(overlap_with(&rho, &reference))
        }
    };
    let values: Vec<f64> = indices.par_iter().map(|&j| overlap(j)).collect::<Result<_, _>>()?;

    let k = values.len();
    let mean = values.iter().sum::<f64>() / k as f64;
    let (sampled, seed, stderr) = match sampling {
        Sampling::Full => (false, None, None),
        Sampling::Sample { seed, .. } => {
            let var = if k > 1 {
                values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1) as f64
            } else {
                0.0
            };
            let fpc = if population > 1 { (population - k) as f64 / (population - 1) as f64 } else { 0.0 };
            (true, Some(seed), Some((var / k as f64 * fpc).sqrt()))
        }
    };
    Ok(FidelityReport { value: mean, n_states: k, sampled, seed, stderr })
}
