//! The three-stage localization pipeline and its closed-form references.
//!
//! Stage I couples B to an unpolarized environment photon on a
//! beamsplitter and keeps the one-photon-per-port branch. Stage II detects
//! the environment photon in the H/V basis. Stage III applies local
//! V-attenuating filters on both arms.
//!
//! `T` is the intensity transmittivity and `R = 1 − T`. For a fully
//! distinguishable environment (`p = 0`) stages I and II are built from the
//! analytic mixtures; for `p > 0` they come from [`crate::fock`].

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_unit, Error, Result};
use crate::fock::{self, BranchProbabilities, EnvTreatment};
use crate::measures::{concurrence, ConcurrenceValue};
use crate::qmat::ComplexMatrix;
use crate::states::{localized_state, werner, Pol, TwoQubitState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Stage {
    I,
    II,
    III,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::I => "I",
            Stage::II => "II",
            Stage::III => "III",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Beamsplitter transmittivity `T` and environment overlap `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouplingConfig {
    t: f64,
    p: f64,
}

impl CouplingConfig {
    pub fn new(t: f64, p: f64) -> Result<Self> {
        Ok(Self {
            t: check_unit("T", t)?,
            p: check_unit("p", p)?,
        })
    }

    pub fn distinguishable(t: f64) -> Result<Self> {
        Self::new(t, 0.0)
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn r(&self) -> f64 {
        1.0 - self.t
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Weight of the undisturbed singlet, `T²/(T²+R²)`.
    pub fn q(&self) -> f64 {
        let (t, r) = (self.t, self.r());
        t * t / (t * t + r * r)
    }
}

/// V-polarization intensity attenuation on each arm: `|V⟩ → √A |V⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FilterConfig {
    aa: f64,
    ab: f64,
}

impl FilterConfig {
    pub fn new(aa: f64, ab: f64) -> Result<Self> {
        Ok(Self {
            aa: check_unit("A_A", aa)?,
            ab: check_unit("A_B", ab)?,
        })
    }

    pub fn identity() -> Self {
        Self { aa: 1.0, ab: 1.0 }
    }

    pub fn aa(&self) -> f64 {
        self.aa
    }

    pub fn ab(&self) -> f64 {
        self.ab
    }

    /// Kraus operator `diag(1, √A_B, √A_A, √(A_A·A_B))` over (HH,HV,VH,VV).
    pub fn kraus(&self) -> ComplexMatrix {
        let (a, b) = (self.aa.sqrt(), self.ab.sqrt());
        ComplexMatrix::from_real_diag(&[1.0, b, a, a * b])
    }
}

/// One-parameter filter schedule `A_A = εT²/(T²+R²)`, `A_B = ε`.
pub fn eps_to_filter(eps: f64, t: f64) -> Result<FilterConfig> {
    check_eps(eps)?;
    let cfg = CouplingConfig::distinguishable(t)?;
    FilterConfig::new(eps * cfg.q(), eps)
}

/// Filter whose arm ratio `A_A/A_B = T²/(1 − 2(1+p)TR)` balances the two
/// single-excitation populations of the stage-II state; reduces to
/// [`eps_to_filter`] at `p = 0`. The larger attenuation is `ε`.
pub fn balanced_filter(eps: f64, cfg: &CouplingConfig) -> Result<FilterConfig> {
    check_eps(eps)?;
    let (t, r, p) = (cfg.t(), cfg.r(), cfg.p());
    let x = 1.0 - 2.0 * (1.0 + p) * t * r;
    if !(x > 0.0) || t == 0.0 {
        return Err(Error::Undefined(format!(
            "no balancing filter at T = {t}, p = {p}"
        )));
    }
    let ratio = t * t / x;
    if ratio <= 1.0 {
        FilterConfig::new(eps * ratio, eps)
    } else {
        FilterConfig::new(eps, eps / ratio)
    }
}

fn check_eps(eps: f64) -> Result<f64> {
    if eps.is_finite() && eps > 0.0 && eps <= 1.0 {
        Ok(eps)
    } else {
        Err(Error::OutOfRange {
            name: "eps",
            value: eps,
            range: "(0, 1]",
        })
    }
}

/// Normalized conditional state of a stage together with the cumulative
/// probability of reaching it.
#[derive(Debug, Clone, PartialEq)]
pub struct StageOutcome {
    pub state: TwoQubitState,
    pub probability: f64,
    pub stage: Stage,
}

impl StageOutcome {
    pub fn concurrence(&self) -> ConcurrenceValue {
        concurrence(&self.state).expect("stage outcomes are valid states")
    }
}

/// Stage I: one-photon-per-port branch with the environment discarded.
pub fn stage1_couple(cfg: &CouplingConfig) -> Result<StageOutcome> {
    if cfg.p() == 0.0 {
        let (t, r) = (cfg.t(), cfg.r());
        Ok(StageOutcome {
            state: werner(cfg.q())?,
            probability: t * t + r * r,
            stage: Stage::I,
        })
    } else {
        fock::oracle_stage(cfg, EnvTreatment::TraceOut)
    }
}

/// Stage II: environment photon detected with polarization `outcome`.
pub fn stage2_measure(cfg: &CouplingConfig, outcome: Pol) -> Result<StageOutcome> {
    if cfg.p() == 0.0 {
        let (t, r) = (cfg.t(), cfg.r());
        Ok(StageOutcome {
            state: localized_state(cfg.q(), outcome.flip())?,
            probability: (t * t + r * r) / 2.0,
            stage: Stage::II,
        })
    } else {
        fock::oracle_stage(cfg, EnvTreatment::Project(outcome))
    }
}

fn filtered_operator(prev: &StageOutcome, f: &FilterConfig) -> Result<(ComplexMatrix, f64)> {
    if prev.stage != Stage::II {
        return Err(Error::WrongStage(prev.stage.name()));
    }
    let k = f.kraus();
    let m = k.sandwich(prev.state.matrix())?;
    let tr = m.trace().re;
    if !(tr > 1e-200) {
        return Err(Error::FullyBlocked);
    }
    Ok((m, tr))
}

/// Stage III: local filtering of a stage-II outcome. The probability is the
/// stage-II probability times the filter transmission.
pub fn stage3_filter(prev: &StageOutcome, f: &FilterConfig) -> Result<StageOutcome> {
    let (m, tr) = filtered_operator(prev, f)?;
    Ok(StageOutcome {
        state: TwoQubitState::from_matrix(m.scale_re(1.0 / tr))?,
        probability: prev.probability * tr,
        stage: Stage::III,
    })
}

/// Probability that the filters pass a stage-II pair, conditioned on
/// having reached stage II.
pub fn filter_transmission(prev: &StageOutcome, f: &FilterConfig) -> Result<f64> {
    Ok(filtered_operator(prev, f)?.1)
}

/// Branch probabilities (both to Bob, both to the measurement port, one each)
/// from the bosonic simulation.
pub fn stage1_branch_probabilities(cfg: &CouplingConfig) -> BranchProbabilities {
    fock::branch_probabilities(cfg)
}

/// Printed closed-form expressions, keyed by stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClosedForm {
    I,
    II,
    III,
    /// `ε → 0` filtration limit.
    IIIAsymptotic,
}

fn undefined(what: &str, cfg: &CouplingConfig) -> Error {
    Error::Undefined(format!("{what} at T = {}, p = {}", cfg.t(), cfg.p()))
}

/// Reference concurrence from the closed forms:
///
/// * I (`p = 0`): `max(0, (2T² − R²) / (2(R² + T²)))`
/// * II: `T|T − pR| / (1 − (2+p)TR)`, which is `T²/(T²+R²)` at `p = 0`
/// * III (`p = 0`): `T/√(T²+R²) / (1 + εR²/(2T²))`
/// * III asymptotic: `|T − pR| / √(1 − 2(1+p)TR)`
pub fn concurrence_closed_form(stage: ClosedForm, cfg: &CouplingConfig, eps: Option<f64>) -> Result<f64> {
    let (t, r, p) = (cfg.t(), cfg.r(), cfg.p());
    match stage {
        ClosedForm::I => {
            if p != 0.0 {
                return Err(undefined("stage I concurrence is only printed for p = 0", cfg));
            }
            Ok(((2.0 * t * t - r * r) / (2.0 * (r * r + t * t))).max(0.0))
        }
        ClosedForm::II => Ok(t * (t - p * r).abs() / (1.0 - (2.0 + p) * t * r)),
        ClosedForm::III => {
            let eps = eps.ok_or_else(|| undefined("stage III needs eps", cfg))?;
            check_eps(eps)?;
            if p != 0.0 {
                return Err(undefined("finite-eps stage III is only printed for p = 0", cfg));
            }
            if t == 0.0 {
                return Err(undefined("eps R²/(2T²) diverges", cfg));
            }
            Ok(t / (t * t + r * r).sqrt() / (1.0 + eps * r * r / (2.0 * t * t)))
        }
        ClosedForm::IIIAsymptotic => {
            let x = 1.0 - 2.0 * (1.0 + p) * t * r;
            if !(x > 0.0) {
                return Err(undefined("asymptotic filtration limit is 0/0", cfg));
            }
            Ok((t - p * r).abs() / x.sqrt())
        }
    }
}

/// Reference success probabilities (`p = 0` only):
/// `R²+T²`, `(R²+T²)/2`, `εT²/2 + ε²R²/4`.
pub fn probability_closed_form(stage: ClosedForm, cfg: &CouplingConfig, eps: Option<f64>) -> Result<f64> {
    if cfg.p() != 0.0 {
        return Err(undefined("probabilities are only printed for p = 0", cfg));
    }
    let (t, r) = (cfg.t(), cfg.r());
    match stage {
        ClosedForm::I => Ok(r * r + t * t),
        ClosedForm::II => Ok((r * r + t * t) / 2.0),
        ClosedForm::III => {
            let eps = check_eps(eps.ok_or_else(|| undefined("stage III needs eps", cfg))?)?;
            Ok(eps * t * t / 2.0 + eps * eps * r * r / 4.0)
        }
        ClosedForm::IIIAsymptotic => Err(undefined("no asymptotic probability", cfg)),
    }
}

/// Transmittivity below which the stage-I pair is separable, `√2 − 1`.
pub fn separability_threshold_t() -> f64 {
    std::f64::consts::SQRT_2 - 1.0
}

/// Locates the stage-I entanglement onset in `T` by bisection on the
/// constructed state's concurrence.
pub fn bisect_separability_crossing(p: f64, tol: f64) -> Result<f64> {
    let entangled = |t: f64| -> Result<bool> {
        Ok(stage1_couple(&CouplingConfig::new(t, p)?)?.concurrence().value() > 0.0)
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    if entangled(lo)? || !entangled(hi)? {
        return Err(Error::Undefined(format!("no single crossing in T for p = {p}")));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if entangled(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Where `(T²+2T−1)/(2T(1−T))` sits relative to the physical range of `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum PThreshold {
    /// Expression below 0: separable for every `p`.
    AlwaysSeparable,
    /// Entanglement disappears for `p` above this value.
    Above(f64),
    /// Expression above 1: entangled for every `p`.
    Never,
}

/// Stage-I disappearance threshold in `p`.
pub fn disappearance_threshold_p(t: f64) -> Result<PThreshold> {
    let t = check_unit("T", t)?;
    if t == 0.0 || t == 1.0 {
        return Err(Error::DegenerateCoupling(t));
    }
    let x = (t * t + 2.0 * t - 1.0) / (2.0 * t * (1.0 - t));
    Ok(if x < 0.0 {
        PThreshold::AlwaysSeparable
    } else if x > 1.0 {
        PThreshold::Never
    } else {
        PThreshold::Above(x)
    })
}

/// Overlap `T/(1−T)` at which the stage-II concurrence vanishes.
pub fn cprime_zero_locus(t: f64) -> Result<f64> {
    let t = check_unit("T", t)?;
    if t == 0.0 {
        return Err(Error::DegenerateCoupling(t));
    }
    if t >= 0.5 {
        return Err(Error::LocusOutOfRange(t));
    }
    Ok(t / (1.0 - t))
}
