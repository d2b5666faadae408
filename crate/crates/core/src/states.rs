//! Named states of the localization protocol.
//!
//! Two-qubit basis order is (HH, HV, VH, VV) with the A photon first.
//! The singlet carries a `-i` relative phase:
//! `|Ψ⁻⟩ = (|H⟩_A|V⟩_B − i|V⟩_A|H⟩_B)/√2`.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::error::{check_unit, Error, Result};
use crate::qmat::{ComplexMatrix, DensityMatrix};

/// Polarization of a single photon; `H` is basis index 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
pub enum Pol {
    H,
    V,
}

impl Pol {
    pub const BOTH: [Pol; 2] = [Pol::H, Pol::V];

    pub fn index(self) -> usize {
        match self {
            Pol::H => 0,
            Pol::V => 1,
        }
    }

    pub fn flip(self) -> Pol {
        match self {
            Pol::H => Pol::V,
            Pol::V => Pol::H,
        }
    }

    pub fn projector(self) -> ComplexMatrix {
        match self {
            Pol::H => ComplexMatrix::from_real_diag(&[1.0, 0.0]),
            Pol::V => ComplexMatrix::from_real_diag(&[0.0, 1.0]),
        }
    }
}

/// Normalized two-qubit ket over (HH, HV, VH, VV).
#[derive(Debug, Clone, PartialEq)]
pub struct PureTwoQubit {
    amps: [Complex64; 4],
}

impl PureTwoQubit {
    pub fn new(amps: [Complex64; 4]) -> Result<Self> {
        let norm: f64 = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalized(norm * norm));
        }
        Ok(Self { amps })
    }

    pub fn amplitudes(&self) -> &[Complex64; 4] {
        &self.amps
    }

    /// Amplitude of `|a⟩_A |b⟩_B`.
    pub fn amp(&self, a: Pol, b: Pol) -> Complex64 {
        self.amps[2 * a.index() + b.index()]
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn to_state(&self) -> TwoQubitState {
        TwoQubitState(DensityMatrix::pure(&self.amps).expect("normalized ket"))
    }
}

/// 4×4 density matrix of the signal pair (A, B).
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitState(DensityMatrix);

impl TwoQubitState {
    pub fn new(rho: DensityMatrix) -> Result<Self> {
        if rho.dim() != 4 {
            return Err(Error::DimensionMismatch(format!(
                "two-qubit state needs dimension 4, got {}",
                rho.dim()
            )));
        }
        Ok(Self(rho))
    }

    pub fn from_matrix(mat: ComplexMatrix) -> Result<Self> {
        Self::new(DensityMatrix::new(mat)?)
    }

    pub fn density(&self) -> &DensityMatrix {
        &self.0
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.0.matrix()
    }

    /// Entry `⟨a_r b_r| ρ |a_c b_c⟩`.
    pub fn entry(&self, row: (Pol, Pol), col: (Pol, Pol)) -> Complex64 {
        self.matrix()[(
            2 * row.0.index() + row.1.index(),
            2 * col.0.index() + col.1.index(),
        )]
    }
}

impl From<TwoQubitState> for DensityMatrix {
    fn from(s: TwoQubitState) -> Self {
        s.0
    }
}

/// `(|HV⟩ − i|VH⟩)/√2`
pub fn singlet() -> PureTwoQubit {
    let s = FRAC_1_SQRT_2;
    PureTwoQubit {
        amps: [
            Complex64::new(0.0, 0.0),
            Complex64::new(s, 0.0),
            Complex64::new(0.0, -s),
            Complex64::new(0.0, 0.0),
        ],
    }
}

pub fn singlet_projector() -> ComplexMatrix {
    ComplexMatrix::outer(singlet().amplitudes())
}

/// `q|Ψ⁻⟩⟨Ψ⁻| + (1−q) I₄/4`
pub fn werner(q: f64) -> Result<TwoQubitState> {
    let q = check_unit("q", q)?;
    let mat = &singlet_projector().scale_re(q) + &ComplexMatrix::identity(4).scale_re((1.0 - q) / 4.0);
    TwoQubitState::from_matrix(mat)
}

/// Unpolarized photon, `I₂/2`.
pub fn depolarized_qubit() -> DensityMatrix {
    DensityMatrix::maximally_mixed(2)
}

/// `q|Ψ⁻⟩⟨Ψ⁻| + (1−q)|a⟩_A⟨a| ⊗ I_B/2`: the localized state after the
/// environment photon is found in `flip(a)`.
pub fn localized_state(q: f64, a_noise: Pol) -> Result<TwoQubitState> {
    let q = check_unit("q", q)?;
    let noise = a_noise
        .projector()
        .kron(&ComplexMatrix::identity(2).scale_re(0.5));
    let mat = &singlet_projector().scale_re(q) + &noise.scale_re(1.0 - q);
    TwoQubitState::from_matrix(mat)
}

/// Localized state after the `H` outcome on the environment:
/// `q|Ψ⁻⟩⟨Ψ⁻| + (1−q)|V⟩_A⟨V| ⊗ I_B/2`.
pub fn eq2_state(q: f64) -> Result<TwoQubitState> {
    localized_state(q, Pol::V)
}

/// Mirror of [`eq2_state`] for the `V` outcome.
pub fn eq2_state_v_outcome(q: f64) -> Result<TwoQubitState> {
    localized_state(q, Pol::H)
}

/// Bloch vector `(⟨σx⟩, ⟨σy⟩, ⟨σz⟩)` of a qubit state.
pub fn bloch_vector(rho: &DensityMatrix) -> Result<[f64; 3]> {
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch("Bloch vector needs a qubit".into()));
    }
    let m = rho.matrix();
    Ok([
        2.0 * m[(0, 1)].re,
        -2.0 * m[(0, 1)].im,
        (m[(0, 0)] - m[(1, 1)]).re,
    ])
}
