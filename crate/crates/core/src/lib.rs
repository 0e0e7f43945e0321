//! Geometric single-qubit and multiqubit Rydberg gates: pulse synthesis,
//! baseline schemes, open-system simulation, fidelity metrics and sweeps.

// `!(x >= 0.0)` style guards are kept on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod baselines;
pub mod fidelity;
pub mod invariants;
pub mod lindblad;
pub mod paths;
pub mod rydberg;
pub mod sparse;
pub mod sweep;
