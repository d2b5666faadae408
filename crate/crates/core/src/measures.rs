//! Entanglement and comparison functionals on density matrices.

use std::f64::consts::SQRT_2;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qmat::{herm_eigen, herm_eigvals, ComplexMatrix, DensityMatrix, HermEigen};
use crate::states::TwoQubitState;

/// Spectral values below this are rounding noise from the Jacobi solver;
/// they are flushed to zero before taking square roots so that exact zeros
/// do not turn into `1e-8`-sized artifacts.
const SPECTRAL_FLUSH: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct ConcurrenceValue(f64);

impl ConcurrenceValue {
    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<ConcurrenceValue> for f64 {
    fn from(c: ConcurrenceValue) -> f64 {
        c.0
    }
}

/// Maximal CHSH value over all measurement settings, in `[0, 2√2]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct ChshValue(f64);

impl ChshValue {
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn violates_local_bound(self) -> bool {
        self.0 > 2.0
    }
}

fn flushed_sqrt(eig: &HermEigen) -> ComplexMatrix {
    let top = eig.values.first().copied().unwrap_or(0.0).max(1.0);
    eig.map_values(|l| if l < SPECTRAL_FLUSH * top { 0.0 } else { l.sqrt() })
}

fn hermitize(m: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::from_fn(m.rows(), m.cols(), |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5)
}

fn sigma_y_y() -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(4, 4);
    m[(0, 3)] = Complex64::new(-1.0, 0.0);
    m[(1, 2)] = Complex64::new(1.0, 0.0);
    m[(2, 1)] = Complex64::new(1.0, 0.0);
    m[(3, 0)] = Complex64::new(-1.0, 0.0);
    m
}

/// The four Wootters values `λ₁ ≥ … ≥ λ₄`: square roots of the spectrum of
/// `√ρ · (σy⊗σy) ρ* (σy⊗σy) · √ρ`, with conjugation in the (HH,HV,VH,VV) basis.
pub fn wootters_lambdas(rho: &TwoQubitState) -> Result<[f64; 4]> {
    let m = rho.matrix();
    let sqrt_rho = flushed_sqrt(&herm_eigen(m)?);
    let yy = sigma_y_y();
    let tilde = &(&yy * &m.conj()) * &yy;
    let r = hermitize(&(&(&sqrt_rho * &tilde) * &sqrt_rho));
    let mu = herm_eigvals(&r)?;
    let top = mu[0].max(1.0);
    let mut out = [0.0; 4];
    for (o, &v) in out.iter_mut().zip(&mu) {
        *o = if v < SPECTRAL_FLUSH * top { 0.0 } else { v.sqrt() };
    }
    Ok(out)
}

/// Wootters concurrence `max(0, λ₁ − λ₂ − λ₃ − λ₄)`.
pub fn concurrence(rho: &TwoQubitState) -> Result<ConcurrenceValue> {
    let l = wootters_lambdas(rho)?;
    Ok(ConcurrenceValue((l[0] - l[1] - l[2] - l[3]).max(0.0)))
}

/// Uhlmann fidelity `(tr √(√a · b · √a))²`.
pub fn fidelity(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "fidelity between dimensions {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    let sa = flushed_sqrt(&herm_eigen(a.matrix())?);
    let inner = hermitize(&(&(&sa * b.matrix()) * &sa));
    let mu = herm_eigvals(&inner)?;
    let top = mu[0].max(1.0);
    let root_sum: f64 = mu
        .iter()
        .filter(|&&v| v >= SPECTRAL_FLUSH * top)
        .map(|v| v.sqrt())
        .sum();
    Ok((root_sum * root_sum).clamp(0.0, 1.0))
}

pub fn pauli(k: usize) -> ComplexMatrix {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let z = c(0.0, 0.0);
    let e = match k {
        0 => [c(1.0, 0.0), z, z, c(1.0, 0.0)],
        1 => [z, c(1.0, 0.0), c(1.0, 0.0), z],
        2 => [z, c(0.0, -1.0), c(0.0, 1.0), z],
        3 => [c(1.0, 0.0), z, z, c(-1.0, 0.0)],
        _ => panic!("Pauli index {k} out of range"),
    };
    ComplexMatrix::from_vec(2, 2, e.to_vec()).expect("2x2")
}

/// Correlation matrix `T_ij = tr(ρ σ_i ⊗ σ_j)` for `i, j ∈ {x, y, z}`.
pub fn correlation_matrix(rho: &TwoQubitState) -> [[f64; 3]; 3] {
    let mut t = [[0.0; 3]; 3];
    for (i, row) in t.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            let op = pauli(i + 1).kron(&pauli(j + 1));
            *v = (rho.matrix() * &op).trace().re;
        }
    }
    t
}

/// Horodecki criterion: `2√(m₁ + m₂)` for the two largest eigenvalues of `TᵀT`.
pub fn chsh_max(rho: &TwoQubitState) -> Result<ChshValue> {
    let t = correlation_matrix(rho);
    let tt = ComplexMatrix::from_fn(3, 3, |i, j| {
        Complex64::new((0..3).map(|k| t[k][i] * t[k][j]).sum(), 0.0)
    });
    let m = herm_eigvals(&tt)?;
    let s = 2.0 * (m[0].max(0.0) + m[1].max(0.0)).sqrt();
    Ok(ChshValue(s.min(2.0 * SQRT_2)))
}

/// `tr ρ²`
pub fn purity(rho: &DensityMatrix) -> f64 {
    (rho.matrix() * rho.matrix()).trace().re
}
