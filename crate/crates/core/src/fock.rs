//! Brute-force two-photon Fock-space simulation of the coupling stage.
//!
//! The B photon (polarization-entangled with A) and the environment photon E
//! enter the two input ports of a beamsplitter. Each photon occupies one of
//! eight modes: output port × polarization × temporal bin. The E photon sits
//! in the signal's temporal bin with amplitude `√p` and in an orthogonal bin
//! with amplitude `√(1−p)`. A never meets any optics and is carried as a bare
//! polarization index.
//!
//! States are stored in the occupation-number basis: a key with two distinct
//! modes is `a_i† a_j† |0⟩`, a doubly occupied mode is `(a_i†)²/√2 |0⟩`.
//! The unpolarized environment is handled as an equal-weight classical
//! mixture of `H` and `V` inputs.

use std::collections::BTreeMap;
use std::f64::consts::SQRT_2;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{check_unit, Error, Result};
use crate::protocol::{CouplingConfig, Stage, StageOutcome};
use crate::qmat::ComplexMatrix;
use crate::states::{singlet, Pol, TwoQubitState};

/// Spatial port. The B photon enters on the `Bob` side, E on the `Meas`
/// side; transmission keeps a photon on its side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Port {
    Bob,
    Meas,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TimeBin {
    Signal,
    Orthogonal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeLabel {
    pub spatial: Port,
    pub pol: Pol,
    pub temporal: TimeBin,
}

impl ModeLabel {
    pub const fn new(spatial: Port, pol: Pol, temporal: TimeBin) -> Self {
        Self {
            spatial,
            pol,
            temporal,
        }
    }

    pub fn all() -> [ModeLabel; 8] {
        let mut out = [ModeLabel::new(Port::Bob, Pol::H, TimeBin::Signal); 8];
        let mut k = 0;
        for spatial in [Port::Bob, Port::Meas] {
            for pol in Pol::BOTH {
                for temporal in [TimeBin::Signal, TimeBin::Orthogonal] {
                    out[k] = ModeLabel::new(spatial, pol, temporal);
                    k += 1;
                }
            }
        }
        out
    }

    fn on_port(self, spatial: Port) -> Self {
        Self { spatial, ..self }
    }
}

/// Occupation configuration: A's polarization plus the (sorted) pair of
/// occupied modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FockKey {
    pub a_pol: Pol,
    pub modes: (ModeLabel, ModeLabel),
}

impl FockKey {
    pub fn new(a_pol: Pol, m1: ModeLabel, m2: ModeLabel) -> Self {
        let modes = if m1 <= m2 { (m1, m2) } else { (m2, m1) };
        Self { a_pol, modes }
    }

    pub fn doubly_occupied(&self) -> bool {
        self.modes.0 == self.modes.1
    }

    /// `(bob mode, meas mode)` when exactly one photon sits in each port.
    pub fn one_each(&self) -> Option<(ModeLabel, ModeLabel)> {
        match (self.modes.0.spatial, self.modes.1.spatial) {
            (Port::Bob, Port::Meas) => Some(self.modes),
            (Port::Meas, Port::Bob) => Some((self.modes.1, self.modes.0)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FockVector {
    amps: BTreeMap<FockKey, Complex64>,
}

impl FockVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `coef · |a⟩ a_{m1}† a_{m2}† |0⟩`.
    pub fn add_creation_pair(&mut self, a_pol: Pol, m1: ModeLabel, m2: ModeLabel, coef: Complex64) {
        let key = FockKey::new(a_pol, m1, m2);
        let c = if m1 == m2 { coef * SQRT_2 } else { coef };
        *self.amps.entry(key).or_default() += c;
    }

    pub fn amplitude(&self, key: &FockKey) -> Complex64 {
        self.amps.get(key).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&FockKey, &Complex64)> {
        self.amps.iter()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.values().map(|z| z.norm_sqr()).sum()
    }

    /// Coefficients over creation-operator products, the inverse of
    /// [`FockVector::add_creation_pair`].
    fn creation_terms(&self) -> impl Iterator<Item = (Pol, ModeLabel, ModeLabel, Complex64)> + '_ {
        self.amps.iter().map(|(k, &amp)| {
            let coef = if k.doubly_occupied() { amp / SQRT_2 } else { amp };
            (k.a_pol, k.modes.0, k.modes.1, coef)
        })
    }

    fn filtered(&self, keep: impl Fn(&FockKey) -> bool) -> FockVector {
        FockVector {
            amps: self
                .amps
                .iter()
                .filter(|(k, _)| keep(k))
                .map(|(k, v)| (*k, *v))
                .collect(),
        }
    }
}

/// Phase convention of the beamsplitter's reflection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BeamsplitterConvention {
    /// `b† → √T b† + i√R e†`, `e† → i√R b† + √T e†`
    #[default]
    Symmetric,
    /// `b† → √T b† + √R e†`, `e† → −√R b† + √T e†`
    Asymmetric,
}

impl BeamsplitterConvention {
    fn image(self, mode: ModeLabel, t: f64) -> [(ModeLabel, Complex64); 2] {
        let st = Complex64::new(t.sqrt(), 0.0);
        let sr = (1.0 - t).max(0.0).sqrt();
        let (to_other, from_other) = match self {
            Self::Symmetric => (Complex64::new(0.0, sr), Complex64::new(0.0, sr)),
            Self::Asymmetric => (Complex64::new(sr, 0.0), Complex64::new(-sr, 0.0)),
        };
        match mode.spatial {
            Port::Bob => [(mode, st), (mode.on_port(Port::Meas), to_other)],
            Port::Meas => [(mode.on_port(Port::Bob), from_other), (mode, st)],
        }
    }
}

/// Joint input state for a given environment polarization.
pub fn build_input(cfg: &CouplingConfig, env_pol: Pol) -> FockVector {
    let psi = singlet();
    let p = cfg.p();
    let env_bins = [
        (TimeBin::Signal, Complex64::new(p.sqrt(), 0.0)),
        (TimeBin::Orthogonal, Complex64::new((1.0 - p).sqrt(), 0.0)),
    ];
    let mut out = FockVector::new();
    for a in Pol::BOTH {
        for b in Pol::BOTH {
            let amp = psi.amp(a, b);
            if amp.norm() == 0.0 {
                continue;
            }
            let b_mode = ModeLabel::new(Port::Bob, b, TimeBin::Signal);
            for (bin, w) in env_bins {
                if w.norm() == 0.0 {
                    continue;
                }
                let e_mode = ModeLabel::new(Port::Meas, env_pol, bin);
                out.add_creation_pair(a, b_mode, e_mode, amp * w);
            }
        }
    }
    out
}

pub fn apply_beamsplitter(state: &FockVector, t: f64) -> FockVector {
    apply_beamsplitter_with(state, t, BeamsplitterConvention::Symmetric)
}

/// Maps every creation operator through the beamsplitter and re-expands the
/// products in the occupation basis.
pub fn apply_beamsplitter_with(state: &FockVector, t: f64, conv: BeamsplitterConvention) -> FockVector {
    let mut out = FockVector::new();
    for (a, m1, m2, coef) in state.creation_terms() {
        for (o1, c1) in conv.image(m1, t) {
            for (o2, c2) in conv.image(m2, t) {
                let c = coef * c1 * c2;
                if c.norm() != 0.0 {
                    out.add_creation_pair(a, o1, o2, c);
                }
            }
        }
    }
    out
}

/// Sub-normalized projection onto one photon per output port, with its
/// probability. Errors when the branch is empty.
pub fn postselect_one_each(state: &FockVector) -> Result<(FockVector, f64)> {
    let branch = state.filtered(|k| k.one_each().is_some());
    let prob = branch.norm_sqr();
    if !(prob > 0.0) {
        return Err(Error::ZeroProbability("no one-photon-per-port component"));
    }
    Ok((branch, prob))
}

/// Probabilities of the three photon-number patterns after the beamsplitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchProbabilities {
    pub both_bob: f64,
    pub both_meas: f64,
    pub one_each: f64,
}

impl BranchProbabilities {
    pub fn total(&self) -> f64 {
        self.both_bob + self.both_meas + self.one_each
    }

    fn of(state: &FockVector) -> Self {
        let mut out = Self {
            both_bob: 0.0,
            both_meas: 0.0,
            one_each: 0.0,
        };
        for (k, amp) in state.iter() {
            let slot = match (k.modes.0.spatial, k.modes.1.spatial) {
                (Port::Bob, Port::Bob) => &mut out.both_bob,
                (Port::Meas, Port::Meas) => &mut out.both_meas,
                _ => &mut out.one_each,
            };
            *slot += amp.norm_sqr();
        }
        out
    }
}

/// What is done with the photon leaving the measurement port.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvTreatment {
    /// Discard it (stage I).
    TraceOut,
    /// Polarization-resolved detection with the given outcome (stage II).
    Project(Pol),
}

/// Weighted post-beamsplitter states over the environment's polarization mixture.
pub type EnvMixture = Vec<(f64, FockVector)>;

fn mixture_after_coupling(cfg: &CouplingConfig, conv: BeamsplitterConvention) -> EnvMixture {
    Pol::BOTH
        .iter()
        .map(|&e| (0.5, apply_beamsplitter_with(&build_input(cfg, e), cfg.t(), conv)))
        .collect()
}

pub fn branch_probabilities(cfg: &CouplingConfig) -> BranchProbabilities {
    let mix = mixture_after_coupling(cfg, BeamsplitterConvention::Symmetric);
    let mut acc = BranchProbabilities {
        both_bob: 0.0,
        both_meas: 0.0,
        one_each: 0.0,
    };
    for (w, s) in &mix {
        let b = BranchProbabilities::of(s);
        acc.both_bob += w * b.both_bob;
        acc.both_meas += w * b.both_meas;
        acc.one_each += w * b.one_each;
    }
    acc
}

/// Unnormalized A–Bob operator of a single post-selected branch.
fn reduced_operator(state: &FockVector, treatment: EnvTreatment) -> ComplexMatrix {
    // environment record: (bob temporal, meas temporal, meas polarization)
    let mut records: BTreeMap<(TimeBin, TimeBin, Pol), [Complex64; 4]> = BTreeMap::new();
    for (key, &amp) in state.iter() {
        let Some((bob, meas)) = key.one_each() else {
            continue;
        };
        if let EnvTreatment::Project(p) = treatment {
            if meas.pol != p {
                continue;
            }
        }
        let slot = records.entry((bob.temporal, meas.temporal, meas.pol)).or_default();
        slot[2 * key.a_pol.index() + bob.pol.index()] += amp;
    }
    let mut rho = ComplexMatrix::zeros(4, 4);
    for psi in records.values() {
        rho = &rho + &ComplexMatrix::outer(psi);
    }
    rho
}

/// Reduces post-selected branches to the (A, Bob-port) polarization state.
/// The returned probability is the weighted norm of what survives the
/// environment treatment.
pub fn reduce_to_ab(branches: &[(f64, FockVector)], treatment: EnvTreatment) -> Result<StageOutcome> {
    let mut acc = ComplexMatrix::zeros(4, 4);
    for (w, s) in branches {
        acc = &acc + &reduced_operator(s, treatment).scale_re(*w);
    }
    let prob = acc.trace().re;
    if !(prob > 0.0) {
        return Err(Error::ZeroProbability("environment outcome never occurs"));
    }
    let state = TwoQubitState::from_matrix(acc.scale_re(1.0 / prob))?;
    let stage = match treatment {
        EnvTreatment::TraceOut => Stage::I,
        EnvTreatment::Project(_) => Stage::II,
    };
    Ok(StageOutcome {
        state,
        probability: prob,
        stage,
    })
}

/// Full oracle run: input, beamsplitter, one-each post-selection and
/// environment treatment, averaged over the unpolarized environment.
pub fn oracle_stage(cfg: &CouplingConfig, treatment: EnvTreatment) -> Result<StageOutcome> {
    oracle_stage_with(cfg, treatment, BeamsplitterConvention::Symmetric)
}

pub fn oracle_stage_with(
    cfg: &CouplingConfig,
    treatment: EnvTreatment,
    conv: BeamsplitterConvention,
) -> Result<StageOutcome> {
    let branches: EnvMixture = mixture_after_coupling(cfg, conv)
        .into_iter()
        .map(|(w, s)| (w, s.filtered(|k| k.one_each().is_some())))
        .collect();
    reduce_to_ab(&branches, treatment)
}

/// Coincidence probability for two equally polarized photons with temporal
/// overlap `p` meeting on a beamsplitter of transmittivity `t`.
pub fn hom_coincidence(t: f64, p: f64) -> Result<f64> {
    let t = check_unit("T", t)?;
    let p = check_unit("p", p)?;
    let mut input = FockVector::new();
    let b = ModeLabel::new(Port::Bob, Pol::H, TimeBin::Signal);
    for (bin, w) in [(TimeBin::Signal, p.sqrt()), (TimeBin::Orthogonal, (1.0 - p).sqrt())] {
        let e = ModeLabel::new(Port::Meas, Pol::H, bin);
        input.add_creation_pair(Pol::H, b, e, Complex64::new(w, 0.0));
    }
    let out = apply_beamsplitter(&input, t);
    Ok(BranchProbabilities::of(&out).one_each)
}

/// `1 − coincidence / distinguishable baseline`; equals `p` at `T = 1/2`.
pub fn hom_visibility(t: f64, p: f64) -> Result<f64> {
    let baseline = hom_coincidence(t, 0.0)?;
    if !(baseline > 0.0) {
        return Err(Error::ZeroProbability("no coincidences for distinguishable photons"));
    }
    Ok(1.0 - hom_coincidence(t, p)? / baseline)
}

/// Inverts a balanced-beamsplitter coincidence rate into an overlap estimate.
pub fn overlap_from_balanced_coincidence(rate: f64) -> Result<f64> {
    let rate = check_unit("coincidence rate", rate)?;
    check_unit("p", 1.0 - 2.0 * rate)
}
