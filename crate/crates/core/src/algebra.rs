//! Dense complex linear algebra for two-level and few-atom systems.
//!
//! Basis ordering is fixed: index 0 is |0⟩, index 1 is |1⟩. The Pauli
//! operators follow the convention in which |0⟩ is the +1 eigenstate of
//! σ_z, so the auxiliary vector cos(θ/2)|0⟩ + sin(θ/2)e^{iφ}|1⟩ is the +1
//! eigenstate of n·σ with n = (sinθ cosφ, sinθ sinφ, cosθ).

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("rotation axis must have unit norm, got |n| = {0}")]
    NonUnitAxis(f64),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("state is not normalized: |ψ|² = {0}")]
    NotNormalized(f64),
    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),
}

/// Square complex matrix stored row-major.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct Operator {
    dim: usize,
    data: Vec<C64>,
}

impl Operator {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Builds an operator from a row-major slice of length `dim²`.
    pub fn from_vec(dim: usize, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), dim * dim, "operator data must be dim×dim");
        Self { dim, data }
    }

    pub fn from_rows<const D: usize>(rows: [[C64; D]; D]) -> Self {
        Self { dim: D, data: rows.iter().flatten().copied().collect() }
    }

    pub fn diagonal(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// |row⟩⟨col| in a space of dimension `dim`.
    pub fn ket_bra(dim: usize, row: usize, col: usize) -> Self {
        let mut m = Self::zeros(dim);
        m[(row, col)] = ONE;
        m
    }

    /// |a⟩⟨b| for arbitrary vectors.
    pub fn outer(a: &[C64], b: &[C64]) -> Self {
        assert_eq!(a.len(), b.len());
        let dim = a.len();
        let mut data = Vec::with_capacity(dim * dim);
        for x in a {
            for y in b {
                data.push(x * y.conj());
            }
        }
        Self { dim, data }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn dagger(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|x| x * c).collect() }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|x| x * c).collect() }
    }

    pub fn matmul(&self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim, rhs.dim, "matmul dimension mismatch");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                let row = &rhs.data[k * n..(k + 1) * n];
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim);
        let n = self.dim;
        (0..n)
            .map(|i| self.data[i * n..(i + 1) * n].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn commutator(&self, rhs: &Operator) -> Operator {
        &self.matmul(rhs) - &rhs.matmul(self)
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let d = (self.data[i * n + j] - self.data[j * n + i].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.dagger().matmul(self).max_abs_diff(&Operator::identity(self.dim)) < tol
    }

    /// Upper bound on the spectral norm (maximum absolute row sum).
    pub fn norm_bound(&self) -> f64 {
        let n = self.dim;
        (0..n)
            .map(|i| self.data[i * n..(i + 1) * n].iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Kronecker product with `self` as the slower-varying index.
    pub fn kron(&self, rhs: &Operator) -> Operator {
        tensor_product(self, rhs)
    }

    /// Distance to `other` after removing the best global phase,
    /// `‖self − e^{iφ}other‖_max` with φ = arg tr(other† self).
    pub fn phase_aligned_distance(&self, other: &Operator) -> f64 {
        let overlap: C64 = other.data.iter().zip(&self.data).map(|(b, a)| b.conj() * a).sum();
        let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { ONE };
        self.max_abs_diff(&other.scale(phase))
    }
}

impl Index<(usize, usize)> for Operator {
    type Output = C64;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.dim + c]
    }
}

impl IndexMut<(usize, usize)> for Operator {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.dim + c]
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim, rhs.dim);
        Operator {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim, rhs.dim);
        Operator {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        self.matmul(rhs)
    }
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Operator({}×{})", self.dim, self.dim)?;
        for i in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|j| {
                    let z = self[(i, j)];
                    format!("{:+.6}{:+.6}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

pub fn tensor_product(a: &Operator, b: &Operator) -> Operator {
    let (na, nb) = (a.dim, b.dim);
    let n = na * nb;
    let mut out = Operator::zeros(n);
    for i in 0..na {
        for j in 0..na {
            let aij = a.data[i * na + j];
            if aij == ZERO {
                continue;
            }
            for k in 0..nb {
                for l in 0..nb {
                    out.data[(i * nb + k) * n + (j * nb + l)] = aij * b.data[k * nb + l];
                }
            }
        }
    }
    out
}

pub fn dagger(a: &Operator) -> Operator {
    a.dagger()
}

pub fn sigma_x() -> Operator {
    Operator::from_rows([[ZERO, ONE], [ONE, ZERO]])
}

pub fn sigma_y() -> Operator {
    Operator::from_rows([[ZERO, -I], [I, ZERO]])
}

/// diag(1, −1): |0⟩⟨0| − |1⟩⟨1|.
pub fn sigma_z() -> Operator {
    Operator::diagonal(&[ONE, -ONE])
}

/// σ₋ = |0⟩⟨1|.
pub fn sigma_minus() -> Operator {
    Operator::ket_bra(2, 0, 1)
}

/// n·σ for a real 3-vector.
pub fn pauli_dot(n: [f64; 3]) -> Operator {
    let sx = sigma_x().scale_real(n[0]);
    let sy = sigma_y().scale_real(n[1]);
    let sz = sigma_z().scale_real(n[2]);
    &(&sx + &sy) + &sz
}

/// Unit axis (sinθ cosφ, sinθ sinφ, cosθ).
pub fn bloch_axis(theta: f64, phi: f64) -> [f64; 3] {
    [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
}

/// e^{iγ n·σ} = cos γ I + i sin γ n·σ.
pub fn rotation_unitary(gamma: f64, n: [f64; 3]) -> Result<Operator, AlgebraError> {
    let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(AlgebraError::NonUnitAxis(norm));
    }
    let id = Operator::identity(2).scale_real(gamma.cos());
    let rot = pauli_dot(n).scale(I * gamma.sin());
    Ok(&id + &rot)
}

/// Normalized state vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PureState {
    amplitudes: Vec<C64>,
}

impl PureState {
    pub const NORM_TOL: f64 = 1e-12;

    pub fn new(amplitudes: Vec<C64>) -> Result<Self, AlgebraError> {
        let n2 = norm_sqr(&amplitudes);
        if (n2 - 1.0).abs() > Self::NORM_TOL {
            return Err(AlgebraError::NotNormalized(n2));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(mut amplitudes: Vec<C64>) -> Self {
        let n = norm_sqr(&amplitudes).sqrt();
        assert!(n > 0.0, "cannot normalize the zero vector");
        for a in &mut amplitudes {
            *a /= n;
        }
        Self { amplitudes }
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = ONE;
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &PureState) -> C64 {
        inner(&self.amplitudes, &other.amplitudes)
    }

    pub fn tensor(&self, other: &PureState) -> PureState {
        let mut out = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                out.push(a * b);
            }
        }
        PureState { amplitudes: out }
    }
}

pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// Density matrix with checked Hermiticity, unit trace and positivity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix {
    op: Operator,
}

impl DensityMatrix {
    pub const HERMITIAN_TOL: f64 = 1e-10;
    pub const TRACE_TOL: f64 = 1e-8;
    pub const EIGEN_TOL: f64 = 1e-8;

    pub fn new(op: Operator) -> Result<Self, AlgebraError> {
        let defect = op.hermiticity_defect();
        if defect > Self::HERMITIAN_TOL {
            return Err(AlgebraError::InvalidDensity(format!("non-Hermitian by {defect:e}")));
        }
        let tr = op.trace();
        if (tr - ONE).norm() > Self::TRACE_TOL {
            return Err(AlgebraError::InvalidDensity(format!("trace {tr}")));
        }
        if !is_positive_semidefinite(&op, Self::EIGEN_TOL) {
            return Err(AlgebraError::InvalidDensity("negative eigenvalue".into()));
        }
        Ok(Self { op })
    }

    /// Wraps an operator without validation; used by integrators that
    /// maintain the invariants themselves.
    pub fn from_operator_unchecked(op: Operator) -> Self {
        Self { op }
    }

    pub fn from_pure(psi: &PureState) -> Self {
        Self { op: Operator::outer(psi.amplitudes(), psi.amplitudes()) }
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn as_operator(&self) -> &Operator {
        &self.op
    }

    pub fn into_operator(self) -> Operator {
        self.op
    }

    pub fn trace(&self) -> C64 {
        self.op.trace()
    }

    /// ⟨ψ|ρ|ψ⟩ for an arbitrary (not necessarily normalized) vector.
    pub fn expectation_in(&self, psi: &[C64]) -> f64 {
        inner(psi, &self.op.apply(psi)).re
    }

    pub fn population(&self, index: usize) -> f64 {
        self.op[(index, index)].re
    }
}

/// Positivity check through a Cholesky factorization of A + tol·I;
/// succeeds iff the smallest eigenvalue exceeds −tol.
pub fn is_positive_semidefinite(a: &Operator, tol: f64) -> bool {
    let n = a.dim();
    let mut l = vec![ZERO; n * n];
    for j in 0..n {
        let mut diag = a[(j, j)].re + tol;
        for k in 0..j {
            diag -= l[j * n + k].norm_sqr();
        }
        if diag <= 0.0 {
            return false;
        }
        let d = diag.sqrt();
        l[j * n + j] = C64::new(d, 0.0);
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k].conj();
            }
            l[i * n + j] = s / d;
        }
    }
    true
}
