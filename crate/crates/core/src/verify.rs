//! Oracle-vs-analytic equivalence checks over a `T × p` grid.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::fock::{self, BeamsplitterConvention, EnvTreatment};
use crate::measures::fidelity;
use crate::protocol::{
    concurrence_closed_form, disappearance_threshold_p, stage1_couple, stage2_measure, ClosedForm,
    CouplingConfig, PThreshold, StageOutcome,
};
use crate::report::round_sig;
use crate::states::Pol;

/// Points this close to the stage-I disappearance threshold are not used for
/// the sign check.
const THRESHOLD_MARGIN: f64 = 1e-6;
const CONTINUITY_DP: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct PointFailure {
    #[serde(rename = "T")]
    pub t: f64,
    pub p: f64,
    pub check: &'static str,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SkippedPoint {
    #[serde(rename = "T")]
    pub t: f64,
    pub p: f64,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifySummary {
    pub grid: usize,
    pub tolerance: f64,
    pub points_checked: usize,
    pub max_fidelity_deficit: f64,
    pub max_probability_mismatch: f64,
    pub max_concurrence_mismatch: f64,
    pub max_branch_sum_error: f64,
    pub max_outcome_asymmetry: f64,
    pub max_convention_deficit: f64,
    pub max_continuity_gap: f64,
    pub threshold_violations: usize,
    pub skipped: Vec<SkippedPoint>,
    pub failures: Vec<PointFailure>,
    pub pass: bool,
}

#[derive(Debug, Default, Clone, Copy)]
struct PointMetrics {
    fidelity_deficit: f64,
    probability_mismatch: f64,
    concurrence_mismatch: f64,
    branch_sum_error: f64,
    outcome_asymmetry: f64,
    convention_deficit: f64,
    continuity_gap: f64,
    threshold_violation: bool,
}

fn deficit(a: &StageOutcome, b: &StageOutcome) -> Result<f64> {
    Ok(1.0 - fidelity(a.state.density(), b.state.density())?)
}

fn check_point(t: f64, p: f64) -> Result<PointMetrics> {
    let cfg = CouplingConfig::new(t, p)?;
    let mut m = PointMetrics::default();

    let oracle1 = fock::oracle_stage(&cfg, EnvTreatment::TraceOut)?;
    let oracle_h = fock::oracle_stage(&cfg, EnvTreatment::Project(Pol::H))?;
    let oracle_v = fock::oracle_stage(&cfg, EnvTreatment::Project(Pol::V))?;

    if p == 0.0 {
        // analytic mixtures vs first-principles propagation
        let pairs = [
            (stage1_couple(&cfg)?, &oracle1),
            (stage2_measure(&cfg, Pol::H)?, &oracle_h),
            (stage2_measure(&cfg, Pol::V)?, &oracle_v),
        ];
        for (analytic, oracle) in &pairs {
            m.fidelity_deficit = m.fidelity_deficit.max(deficit(analytic, oracle)?);
            m.probability_mismatch = m
                .probability_mismatch
                .max((analytic.probability - oracle.probability).abs());
        }
    }

    let c2 = oracle_h.concurrence().value();
    let formula = concurrence_closed_form(ClosedForm::II, &cfg, None)?;
    if (0.0..=1.0).contains(&formula) {
        m.concurrence_mismatch = (c2 - formula).abs();
    }
    m.outcome_asymmetry = (c2 - oracle_v.concurrence().value()).abs();

    let branches = fock::branch_probabilities(&cfg);
    m.branch_sum_error = (branches.total() - 1.0).abs();
    m.probability_mismatch = m
        .probability_mismatch
        .max((branches.one_each - oracle1.probability).abs());

    for treatment in [EnvTreatment::TraceOut, EnvTreatment::Project(Pol::H)] {
        let sym = fock::oracle_stage_with(&cfg, treatment, BeamsplitterConvention::Symmetric)?;
        let asym = fock::oracle_stage_with(&cfg, treatment, BeamsplitterConvention::Asymmetric)?;
        m.convention_deficit = m.convention_deficit.max(deficit(&sym, &asym)?);
    }

    if p == 0.0 {
        let nudged = CouplingConfig::new(t, CONTINUITY_DP)?;
        for treatment in [EnvTreatment::TraceOut, EnvTreatment::Project(Pol::H)] {
            let a = fock::oracle_stage(&cfg, treatment)?;
            let b = fock::oracle_stage(&nudged, treatment)?;
            let gap = a.state.matrix().max_abs_diff(b.state.matrix());
            m.continuity_gap = m.continuity_gap.max(gap);
        }
    }

    let entangled = oracle1.concurrence().value() > 0.0;
    let expected = match disappearance_threshold_p(t)? {
        PThreshold::AlwaysSeparable => Some(false),
        PThreshold::Never => Some(true),
        PThreshold::Above(x) if (p - x).abs() > THRESHOLD_MARGIN => Some(p < x),
        PThreshold::Above(_) => None,
    };
    m.threshold_violation = expected.is_some_and(|e| e != entangled);
    Ok(m)
}

/// Runs every check on the `grid × grid` lattice over `[0, 1]²`.
/// Degenerate couplings `T ∈ {0, 1}` are skipped.
pub fn run(grid: usize, tolerance: f64, exec: Exec) -> Result<VerifySummary> {
    if grid < 2 {
        return Err(Error::OutOfRange {
            name: "grid",
            value: grid as f64,
            range: ">= 2",
        });
    }
    if !(tolerance > 0.0) {
        return Err(Error::OutOfRange {
            name: "tolerance",
            value: tolerance,
            range: "> 0",
        });
    }
    let axis: Vec<f64> = (0..grid).map(|k| k as f64 / (grid - 1) as f64).collect();
    let points: Vec<(f64, f64)> = axis
        .iter()
        .flat_map(|&t| axis.iter().map(move |&p| (t, p)))
        .collect();

    let results = exec.map(&points, |&(t, p)| {
        if t == 0.0 || t == 1.0 {
            None
        } else {
            Some(check_point(t, p))
        }
    });

    let mut summary = VerifySummary {
        grid,
        tolerance,
        points_checked: 0,
        max_fidelity_deficit: 0.0,
        max_probability_mismatch: 0.0,
        max_concurrence_mismatch: 0.0,
        max_branch_sum_error: 0.0,
        max_outcome_asymmetry: 0.0,
        max_convention_deficit: 0.0,
        max_continuity_gap: 0.0,
        threshold_violations: 0,
        skipped: Vec::new(),
        failures: Vec::new(),
        pass: true,
    };
    for (&(t, p), res) in points.iter().zip(results) {
        let m = match res {
            None => {
                summary.skipped.push(SkippedPoint {
                    t,
                    p,
                    reason: "degenerate coupling".into(),
                });
                continue;
            }
            Some(Err(e)) => {
                summary.failures.push(PointFailure {
                    t,
                    p,
                    check: "evaluation",
                    value: f64::NAN,
                });
                summary.skipped.push(SkippedPoint {
                    t,
                    p,
                    reason: e.to_string(),
                });
                continue;
            }
            Some(Ok(m)) => m,
        };
        summary.points_checked += 1;
        let checks = [
            ("fidelity_deficit", m.fidelity_deficit, &mut summary.max_fidelity_deficit),
            ("probability_mismatch", m.probability_mismatch, &mut summary.max_probability_mismatch),
            ("concurrence_mismatch", m.concurrence_mismatch, &mut summary.max_concurrence_mismatch),
            ("branch_sum_error", m.branch_sum_error, &mut summary.max_branch_sum_error),
            ("outcome_asymmetry", m.outcome_asymmetry, &mut summary.max_outcome_asymmetry),
            ("convention_deficit", m.convention_deficit, &mut summary.max_convention_deficit),
            ("continuity_gap", m.continuity_gap, &mut summary.max_continuity_gap),
        ];
        for (name, v, slot) in checks {
            *slot = slot.max(v);
            if v > tolerance {
                summary.failures.push(PointFailure {
                    t,
                    p,
                    check: name,
                    value: round_sig(v),
                });
            }
        }
        if m.threshold_violation {
            summary.threshold_violations += 1;
            summary.failures.push(PointFailure {
                t,
                p,
                check: "disappearance_threshold",
                value: 1.0,
            });
        }
    }
    for v in [
        &mut summary.max_fidelity_deficit,
        &mut summary.max_probability_mismatch,
        &mut summary.max_concurrence_mismatch,
        &mut summary.max_branch_sum_error,
        &mut summary.max_outcome_asymmetry,
        &mut summary.max_convention_deficit,
        &mut summary.max_continuity_gap,
    ] {
        *v = round_sig(*v);
    }
    summary.pass = summary.failures.is_empty();
    Ok(summary)
}
