//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Run with `cargo test -p entloc-core --test acceptance`.

use std::process::ExitCode;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use entloc::fock::{self, hom_coincidence, hom_visibility, overlap_from_balanced_coincidence, EnvTreatment};
use entloc::measures::{chsh_max, concurrence, fidelity};
use entloc::protocol::{
    balanced_filter, bisect_separability_crossing, concurrence_closed_form, eps_to_filter,
    probability_closed_form, separability_threshold_t, stage1_couple, stage2_measure,
    stage3_filter, ClosedForm, CouplingConfig, StageOutcome,
};
use entloc::qmat::{tensor, DensityMatrix};
use entloc::random;
use entloc::states::{Pol, TwoQubitState};
use entloc::FilterConfig;

// criterion 1
const T2_T: f64 = 0.4;
const T2_AA: f64 = 0.33;
const T2_AB: f64 = 1.0;
const C_II_REF: f64 = 0.32;
const C_II_TOL: f64 = 0.02;
const P_II_REF: f64 = 0.27;
const P_II_TOL: f64 = 0.015;
const C_III_REF: f64 = 0.42;
const C_III_TOL: f64 = 0.02;

// criterion 2
const T3_T: f64 = 0.3;
const T3_P: f64 = 0.85;
const T3_AA: f64 = 0.12;
const T3_AB: f64 = 0.30;
const CP_II_REF: f64 = 0.22;
const CP_II_TOL: f64 = 0.005;
const PP_II_REF: f64 = 0.20;
const PP_II_TOL: f64 = 0.03;
const CP_III_REF: f64 = 0.47;
const CP_III_TOL: f64 = 0.05;
const CP_III_ASYM_REF: f64 = 0.6247;
const CP_III_ASYM_TOL: f64 = 5e-5;

// criterion 3
const THRESH_OFFSET: f64 = 1e-4;
const BISECT_TOL: f64 = 1e-6;

// criterion 4
const FIDELITY_TOL: f64 = 1e-9;
const PROB_TOL: f64 = 1e-10;
const CPRIME_TOL: f64 = 1e-8;
const OVERLAPS: [f64; 4] = [0.25, 0.5, 0.75, 1.0];

// criterion 5
const EPS_MIN: f64 = 1e-6;
const EPS_LIMIT_TOL: f64 = 1e-6;
const EPS_POINTS: usize = 100;

// criterion 6
const HOM_TOL: f64 = 1e-12;
const HOM_POINTS: usize = 101;
const HOM_RATE: f64 = 0.075;
const HOM_P: f64 = 0.85;
const HOM_INVERT_TOL: f64 = 1e-9;

// criterion 7
const P_FORM_TOL: f64 = 1e-12;
const P_III_TABLE: f64 = 0.17;

// criterion 8
const LU_SAMPLES: usize = 500;
const LU_TOL: f64 = 1e-9;
const STATE_TOL: f64 = 1e-10;
const HV_TOL: f64 = 1e-10;
const GRID: usize = 21;

type Check = Result<String, String>;
type Criterion = fn() -> Check;

fn within(name: &str, value: f64, reference: f64, tol: f64) -> Check {
    let err = (value - reference).abs();
    let line = format!("{name} = {value:.10} (ref {reference}, |err| {err:.3e}, tol {tol:e})");
    if err <= tol {
        Ok(line)
    } else {
        Err(line)
    }
}

fn all(parts: Vec<Check>) -> Check {
    let mut ok = true;
    let mut lines = Vec::new();
    for p in parts {
        match p {
            Ok(s) => lines.push(s),
            Err(s) => {
                ok = false;
                lines.push(format!("FAILED {s}"));
            }
        }
    }
    let joined = lines.join("; ");
    if ok {
        Ok(joined)
    } else {
        Err(joined)
    }
}

fn t_grid() -> Vec<f64> {
    (1..=19).map(|k| k as f64 * 0.05).collect()
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn table_ii() -> Check {
    let cfg = CouplingConfig::distinguishable(T2_T).map_err(err)?;
    let s1 = stage1_couple(&cfg).map_err(err)?;
    let s2 = stage2_measure(&cfg, Pol::H).map_err(err)?;
    let f = FilterConfig::new(T2_AA, T2_AB).map_err(err)?;
    let s3 = stage3_filter(&s2, &f).map_err(err)?;
    let c1 = s1.concurrence().value();
    all(vec![
        if c1 == 0.0 {
            Ok("C_I = 0".into())
        } else {
            Err(format!("C_I = {c1:e}, expected exactly 0"))
        },
        within("C_II", s2.concurrence().value(), C_II_REF, C_II_TOL),
        within("P_II", s2.probability, P_II_REF, P_II_TOL),
        within("C_III", s3.concurrence().value(), C_III_REF, C_III_TOL),
    ])
}

fn table_iii() -> Check {
    let cfg = CouplingConfig::new(T3_T, T3_P).map_err(err)?;
    let s2 = stage2_measure(&cfg, Pol::H).map_err(err)?;
    let f = FilterConfig::new(T3_AA, T3_AB).map_err(err)?;
    let s3 = stage3_filter(&s2, &f).map_err(err)?;
    let asym = concurrence_closed_form(ClosedForm::IIIAsymptotic, &cfg, None).map_err(err)?;
    let c1 = stage1_couple(&cfg).map_err(err)?.concurrence().value();
    all(vec![
        if c1 == 0.0 {
            Ok("C'_I = 0".into())
        } else {
            Err(format!("C'_I = {c1:e}, expected 0"))
        },
        within("C'_II", s2.concurrence().value(), CP_II_REF, CP_II_TOL),
        within("P'_II", s2.probability, PP_II_REF, PP_II_TOL),
        within("C'_III (provisional)", s3.concurrence().value(), CP_III_REF, CP_III_TOL),
        within("C'_III asymptotic", asym, CP_III_ASYM_REF, CP_III_ASYM_TOL),
    ])
}

fn separability_threshold() -> Check {
    let t0 = separability_threshold_t();
    let c = |t: f64| -> Result<f64, String> {
        Ok(stage1_couple(&CouplingConfig::distinguishable(t).map_err(err)?)
            .map_err(err)?
            .concurrence()
            .value())
    };
    let below = c(t0 - THRESH_OFFSET)?;
    let above = c(t0 + THRESH_OFFSET)?;
    let crossing = bisect_separability_crossing(0.0, BISECT_TOL).map_err(err)?;
    all(vec![
        if below == 0.0 {
            Ok(format!("C(T0-{THRESH_OFFSET:e}) = 0"))
        } else {
            Err(format!("C(T0-{THRESH_OFFSET:e}) = {below:e}"))
        },
        if above > 0.0 {
            Ok(format!("C(T0+{THRESH_OFFSET:e}) = {above:.3e}"))
        } else {
            Err(format!("C(T0+{THRESH_OFFSET:e}) = {above:e}"))
        },
        within("bisected crossing", crossing, t0, BISECT_TOL),
    ])
}

fn oracle_equivalence() -> Check {
    let mut worst_fid: f64 = 0.0;
    let mut worst_prob: f64 = 0.0;
    let mut worst_c: f64 = 0.0;
    for t in t_grid() {
        let cfg = CouplingConfig::distinguishable(t).map_err(err)?;
        let pairs: [(StageOutcome, StageOutcome); 3] = [
            (stage1_couple(&cfg).map_err(err)?, fock::oracle_stage(&cfg, EnvTreatment::TraceOut).map_err(err)?),
            (
                stage2_measure(&cfg, Pol::H).map_err(err)?,
                fock::oracle_stage(&cfg, EnvTreatment::Project(Pol::H)).map_err(err)?,
            ),
            (
                stage2_measure(&cfg, Pol::V).map_err(err)?,
                fock::oracle_stage(&cfg, EnvTreatment::Project(Pol::V)).map_err(err)?,
            ),
        ];
        for (a, o) in &pairs {
            let f = fidelity(a.state.density(), o.state.density()).map_err(err)?;
            worst_fid = worst_fid.max(1.0 - f);
            worst_prob = worst_prob.max((a.probability - o.probability).abs());
        }
        for p in OVERLAPS {
            let cfg = CouplingConfig::new(t, p).map_err(err)?;
            let oracle = fock::oracle_stage(&cfg, EnvTreatment::Project(Pol::H)).map_err(err)?;
            let formula = concurrence_closed_form(ClosedForm::II, &cfg, None).map_err(err)?;
            worst_c = worst_c.max((oracle.concurrence().value() - formula).abs());
        }
    }
    all(vec![
        within("max fidelity deficit", worst_fid, 0.0, FIDELITY_TOL),
        within("max probability gap", worst_prob, 0.0, PROB_TOL),
        within("max C'_II gap", worst_c, 0.0, CPRIME_TOL),
    ])
}

fn filtration_limit() -> Check {
    let cfg = CouplingConfig::distinguishable(T2_T).map_err(err)?;
    let s2 = stage2_measure(&cfg, Pol::H).map_err(err)?;
    let limit = cfg.t() / (cfg.t().powi(2) + cfg.r().powi(2)).sqrt();
    let c_at = |eps: f64| -> Result<f64, String> {
        Ok(stage3_filter(&s2, &eps_to_filter(eps, cfg.t()).map_err(err)?)
            .map_err(err)?
            .concurrence()
            .value())
    };
    // log grid from eps = 1 down to EPS_MIN
    let mut curve = Vec::with_capacity(EPS_POINTS);
    for k in 0..EPS_POINTS {
        let eps = EPS_MIN.powf(k as f64 / (EPS_POINTS - 1) as f64);
        curve.push(c_at(eps)?);
    }
    let drops = curve.windows(2).filter(|w| w[1] < w[0]).count();
    all(vec![
        within("C(eps=1e-6)", c_at(EPS_MIN)?, limit, EPS_LIMIT_TOL),
        if drops == 0 {
            Ok(format!("nondecreasing over {EPS_POINTS} points"))
        } else {
            Err(format!("{drops} decreasing steps over {EPS_POINTS} points"))
        },
    ])
}

fn hom() -> Check {
    let mut worst: f64 = 0.0;
    for k in 0..HOM_POINTS {
        let p = k as f64 / (HOM_POINTS - 1) as f64;
        worst = worst.max((hom_visibility(0.5, p).map_err(err)? - p).abs());
    }
    let simulated = hom_coincidence(0.5, HOM_P).map_err(err)?;
    all(vec![
        within("max |V - p|", worst, 0.0, HOM_TOL),
        within("simulated rate at p = 0.85", simulated, HOM_RATE, HOM_INVERT_TOL),
        within(
            "p from rate 0.075",
            overlap_from_balanced_coincidence(HOM_RATE).map_err(err)?,
            HOM_P,
            HOM_INVERT_TOL,
        ),
    ])
}

fn probability_forms() -> Check {
    let mut worst: f64 = 0.0;
    for t in t_grid() {
        let cfg = CouplingConfig::distinguishable(t).map_err(err)?;
        let p1 = stage1_couple(&cfg).map_err(err)?.probability;
        let p2 = stage2_measure(&cfg, Pol::H).map_err(err)?.probability;
        worst = worst
            .max((p1 - probability_closed_form(ClosedForm::I, &cfg, None).map_err(err)?).abs())
            .max((p2 - probability_closed_form(ClosedForm::II, &cfg, None).map_err(err)?).abs());
    }
    let cfg = CouplingConfig::distinguishable(T2_T).map_err(err)?;
    let p3 = probability_closed_form(ClosedForm::III, &cfg, Some(1.0)).map_err(err)?;
    let s2 = stage2_measure(&cfg, Pol::H).map_err(err)?;
    let first_principles = stage3_filter(&s2, &eps_to_filter(1.0, T2_T).map_err(err)?)
        .map_err(err)?
        .probability;
    all(vec![
        within("max P_I/P_II closed-form gap", worst, 0.0, P_FORM_TOL),
        within("P_III formula (eps = 1)", p3, P_III_TABLE, P_FORM_TOL),
        Ok(format!(
            "first-principles P_III = {first_principles:.4} (stage-II probability times filter pass; differs from the table's 0.17)"
        )),
    ])
}

fn state_deviation(rho: &DensityMatrix) -> f64 {
    let m = rho.matrix();
    (m.trace().re - 1.0)
        .abs()
        .max(m.trace().im.abs())
        .max(m.hermiticity_error())
        .max(-rho.eigvals().iter().cloned().fold(0.0, f64::min))
}

fn properties() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst_lu: f64 = 0.0;
    for k in 0..LU_SAMPLES {
        let rho = if k % 2 == 0 {
            random::density_matrix(&mut rng, 4)
        } else {
            DensityMatrix::pure(&random::ket(&mut rng, 4)).map_err(err)?
        };
        let rho = TwoQubitState::new(rho).map_err(err)?;
        let u = tensor(&random::unitary(&mut rng, 2), &random::unitary(&mut rng, 2));
        let moved = TwoQubitState::from_matrix(u.sandwich(rho.matrix()).map_err(err)?).map_err(err)?;
        let d = concurrence(&rho).map_err(err)?.value() - concurrence(&moved).map_err(err)?.value();
        worst_lu = worst_lu.max(d.abs());
    }

    let mut worst_state: f64 = 0.0;
    let mut worst_hv: f64 = 0.0;
    for i in 1..GRID - 1 {
        let t = i as f64 / (GRID - 1) as f64;
        for j in 0..GRID {
            let p = j as f64 / (GRID - 1) as f64;
            let cfg = CouplingConfig::new(t, p).map_err(err)?;
            let s1 = stage1_couple(&cfg).map_err(err)?;
            let h = stage2_measure(&cfg, Pol::H).map_err(err)?;
            let v = stage2_measure(&cfg, Pol::V).map_err(err)?;
            let mut outs = vec![s1, h.clone(), v.clone()];
            for eps in [1.0, 0.1, 1e-3] {
                if let Ok(f) = balanced_filter(eps, &cfg) {
                    if let Ok(s3) = stage3_filter(&h, &f) {
                        outs.push(s3);
                    }
                }
            }
            for o in &outs {
                worst_state = worst_state.max(state_deviation(o.state.density()));
            }
            worst_hv = worst_hv.max((h.concurrence().value() - v.concurrence().value()).abs());
        }
    }

    let cfg = CouplingConfig::distinguishable(T2_T).map_err(err)?;
    let s2 = stage2_measure(&cfg, Pol::H).map_err(err)?;
    let s3 = stage3_filter(&s2, &FilterConfig::new(T2_AA, T2_AB).map_err(err)?).map_err(err)?;
    let (b2, b3) = (
        chsh_max(&s2.state).map_err(err)?.value(),
        chsh_max(&s3.state).map_err(err)?.value(),
    );
    all(vec![
        within("max local-unitary concurrence drift", worst_lu, 0.0, LU_TOL),
        within("max PSD/trace deviation", worst_state, 0.0, STATE_TOL),
        within("max |C_H - C_V|", worst_hv, 0.0, HV_TOL),
        if b3 > b2 {
            Ok(format!("CHSH filtered {b3:.6} > unfiltered {b2:.6}"))
        } else {
            Err(format!("CHSH filtered {b3:.6} <= unfiltered {b2:.6}"))
        },
    ])
}

fn main() -> ExitCode {
    let start = Instant::now();
    let criteria: [(&str, Criterion); 8] = [
        ("Table II theory regression", table_ii),
        ("Table III theory regression", table_iii),
        ("separability threshold", separability_threshold),
        ("oracle equivalence", oracle_equivalence),
        ("filtration limit", filtration_limit),
        ("HOM visibility", hom),
        ("probability closed forms", probability_forms),
        ("property suites", properties),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("PASS [{}] {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{}] {name}: {detail}", k + 1);
            }
        }
    }
    println!(
        "acceptance: {}/{} passed in {:.2}s",
        criteria.len() - failed,
        criteria.len(),
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
