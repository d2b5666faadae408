//! Concurrence curves over `T`, `p` or the filter strength `ε`.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_unit, Error, Result};
use crate::exec::Exec;
use crate::protocol::{
    balanced_filter, concurrence_closed_form, stage1_couple, stage2_measure, stage3_filter,
    ClosedForm, CouplingConfig, FilterConfig,
};
use crate::report::round_sig;
use crate::states::Pol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepVariable {
    #[serde(rename = "T")]
    T,
    #[serde(rename = "p")]
    P,
    #[serde(rename = "eps")]
    Eps,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::T => "T",
            SweepVariable::P => "p",
            SweepVariable::Eps => "eps",
        }
    }
}

impl FromStr for SweepVariable {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "T" | "t" => Ok(SweepVariable::T),
            "p" | "P" => Ok(SweepVariable::P),
            "eps" | "epsilon" => Ok(SweepVariable::Eps),
            _ => Err(Error::OutOfRange {
                name: "sweep variable",
                value: f64::NAN,
                range: "{T, p, eps}",
            }),
        }
    }
}

/// A one-dimensional sweep. The fixed parameters not being swept are taken
/// from `t`, `p` and `eps`; when `filter` is set, the stage-III column uses
/// those fixed attenuations instead of the `ε` schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
    pub t: f64,
    pub p: f64,
    pub eps: f64,
    pub filter: Option<FilterConfig>,
}

fn out_of_range(name: &'static str, value: f64, range: &'static str) -> Error {
    Error::OutOfRange { name, value, range }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.min < self.max) {
            return Err(out_of_range("min", self.min, "below max"));
        }
        if self.steps < 2 {
            return Err(out_of_range("steps", self.steps as f64, ">= 2"));
        }
        match self.variable {
            SweepVariable::T | SweepVariable::P => {
                check_unit("min", self.min)?;
                check_unit("max", self.max)?;
            }
            SweepVariable::Eps => {
                if !(self.min > 0.0) || self.max > 1.0 {
                    return Err(out_of_range("eps range", self.min, "(0, 1]"));
                }
            }
        }
        check_unit("T", self.t)?;
        check_unit("p", self.p)?;
        if self.variable != SweepVariable::Eps && !(self.eps > 0.0 && self.eps <= 1.0) {
            return Err(out_of_range("eps", self.eps, "(0, 1]"));
        }
        Ok(())
    }

    /// Grid values. `T` and `p` are linear from `min` to `max`; `ε` is
    /// logarithmic from `max` down to `min`, i.e. in order of increasing
    /// filtration strength.
    pub fn points(&self) -> Vec<f64> {
        let n = self.steps;
        let frac = |k: usize| k as f64 / (n - 1) as f64;
        match self.variable {
            SweepVariable::T | SweepVariable::P => (0..n)
                .map(|k| {
                    if k == n - 1 {
                        self.max
                    } else {
                        self.min + (self.max - self.min) * frac(k)
                    }
                })
                .collect(),
            SweepVariable::Eps => {
                let (hi, lo) = (self.max.ln(), self.min.ln());
                (0..n)
                    .map(|k| match k {
                        0 => self.max,
                        k if k == n - 1 => self.min,
                        k => (hi + (lo - hi) * frac(k)).exp(),
                    })
                    .collect()
            }
        }
    }
}

/// One CSV row; `None` marks an undefined value (written as `nan`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub x: f64,
    pub stage_i: Option<f64>,
    pub stage_ii: Option<f64>,
    pub stage_iii_eps: Option<f64>,
    pub stage_iii_limit: Option<f64>,
}

fn evaluate(t: f64, p: f64, eps: f64, filter: Option<FilterConfig>) -> SweepRow {
    let cfg = CouplingConfig::new(t, p).ok();
    let stage_i = cfg
        .and_then(|c| stage1_couple(&c).ok())
        .map(|o| o.concurrence().value());
    let s2 = cfg.and_then(|c| stage2_measure(&c, Pol::H).ok());
    let stage_ii = s2.as_ref().map(|o| o.concurrence().value());
    let stage_iii_eps = cfg.zip(s2.as_ref()).and_then(|(c, s2)| {
        let f = match filter {
            Some(f) => f,
            None => balanced_filter(eps, &c).ok()?,
        };
        stage3_filter(s2, &f).ok().map(|o| o.concurrence().value())
    });
    let stage_iii_limit =
        cfg.and_then(|c| concurrence_closed_form(ClosedForm::IIIAsymptotic, &c, None).ok());
    SweepRow {
        x: 0.0,
        stage_i,
        stage_ii,
        stage_iii_eps,
        stage_iii_limit,
    }
}

/// Evaluates every grid point; `exec` selects sequential or rayon evaluation.
pub fn run(spec: &SweepSpec, exec: Exec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let pts = spec.points();
    Ok(exec.map(&pts, |&x| {
        let (t, p, eps) = match spec.variable {
            SweepVariable::T => (x, spec.p, spec.eps),
            SweepVariable::P => (spec.t, x, spec.eps),
            SweepVariable::Eps => (spec.t, spec.p, x),
        };
        SweepRow {
            x,
            ..evaluate(t, p, eps, spec.filter)
        }
    }))
}

fn cell(out: &mut String, v: Option<f64>) {
    match v {
        Some(x) => write!(out, ",{}", round_sig(x)).unwrap(),
        None => out.push_str(",nan"),
    }
}

/// Header `<variable>,stage_I,stage_II,stage_III_eps,stage_III_limit`, LF endings.
pub fn to_csv(variable: SweepVariable, rows: &[SweepRow]) -> String {
    let mut out = format!("{},stage_I,stage_II,stage_III_eps,stage_III_limit\n", variable.name());
    for r in rows {
        write!(out, "{}", round_sig(r.x)).unwrap();
        cell(&mut out, r.stage_i);
        cell(&mut out, r.stage_ii);
        cell(&mut out, r.stage_iii_eps);
        cell(&mut out, r.stage_iii_limit);
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(variable: SweepVariable, min: f64, max: f64, steps: usize) -> SweepSpec {
        SweepSpec {
            variable,
            min,
            max,
            steps,
            t: 0.4,
            p: 0.0,
            eps: 0.15,
            filter: None,
        }
    }

    #[test]
    fn validation() {
        assert!(spec(SweepVariable::T, 0.5, 0.5, 10).validate().is_err());
        assert!(spec(SweepVariable::T, 0.0, 1.0, 1).validate().is_err());
        assert!(spec(SweepVariable::T, 0.0, 1.5, 10).validate().is_err());
        assert!(spec(SweepVariable::Eps, 0.0, 1.0, 10).validate().is_err());
        assert!(spec(SweepVariable::Eps, 1e-3, 1.0, 10).validate().is_ok());
        let mut s = spec(SweepVariable::T, 0.0, 1.0, 3);
        s.eps = 0.0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn endpoint_rows() {
        let rows = run(&spec(SweepVariable::T, 0.0, 1.0, 2), Exec::Sequential).unwrap();
        let r0 = rows[0];
        assert_eq!((r0.stage_i, r0.stage_ii), (Some(0.0), Some(0.0)));
        assert_eq!(r0.stage_iii_eps, None);
        assert_eq!(r0.stage_iii_limit, Some(0.0));
        let r1 = rows[1];
        for v in [r1.stage_i, r1.stage_ii, r1.stage_iii_eps, r1.stage_iii_limit] {
            assert!((v.unwrap() - 1.0).abs() < 1e-12);
        }
        let csv = to_csv(SweepVariable::T, &rows);
        assert_eq!(csv.lines().nth(1).unwrap(), "0,0,0,nan,0");
    }

    #[test]
    fn eps_points_descend_logarithmically() {
        let pts = spec(SweepVariable::Eps, 1e-3, 1.0, 4).points();
        assert_eq!(pts[0], 1.0);
        assert_eq!(pts[3], 1e-3);
        assert!((pts[1] - 0.1).abs() < 1e-12 && (pts[2] - 0.01).abs() < 1e-12);
    }

    #[test]
    fn fixed_filter_overrides_schedule() {
        let mut s = spec(SweepVariable::T, 0.3, 0.5, 3);
        s.filter = Some(FilterConfig::new(0.33, 1.0).unwrap());
        let rows = run(&s, Exec::Sequential).unwrap();
        let mid = rows[1];
        assert!((mid.x - 0.4).abs() < 1e-15);
        assert!((mid.stage_iii_eps.unwrap() - 0.408).abs() < 1e-3);
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let s = spec(SweepVariable::P, 0.0, 1.0, 41);
        assert_eq!(run(&s, Exec::Sequential).unwrap(), run(&s, Exec::Parallel).unwrap());
    }
}
