//! The three conditions each stage must meet to close the induction.
//!
//! * cellular: `1/p_m <= (m-1)/(2m)`
//! * transverse: `(n+1-m)(1/2 - 1/p_m) + 2 gamma_m >= 0`
//! * tangential: `(1/p_m, gamma_m)` lies on the segment from stage `m-1` to
//!   the weighted point `(1/p_{w,m}, gamma_{w,m})`
//!
//! Margins are signed exact values; a negative margin is a violation.

use serde::{Deserialize, Serialize};

use crate::catalog::{weighted_point, ExponentPoint};
use crate::error::{domain, Error, Result};
use crate::rational::{ratio, Rational};
use crate::scheme::{build_scheme, Scheme, SchemeStep};

/// Margins of one stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepMargins {
    pub m: u32,
    pub cellular_margin: Rational,
    pub transverse_margin: Rational,
    pub tangential_ok: bool,
    /// Lower bound on the transverse margin obtained by combining the
    /// previous stage's transverse condition with the weighted point's
    /// margin `(m-3)/(m-2)`; present for interpolation stages below the
    /// closing level.
    pub chain_bound: Option<Rational>,
}

impl StepMargins {
    pub fn ok(&self) -> bool {
        !self.cellular_margin.is_negative()
            && !self.transverse_margin.is_negative()
            && self.tangential_ok
            && self
                .chain_bound
                .as_ref()
                .is_none_or(|bound| self.transverse_margin >= *bound)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub n: u32,
    #[serde(rename = "M")]
    pub m_stop: u32,
    /// Levels `m = 3 ..= n+1`.
    pub per_step: Vec<StepMargins>,
    /// `(M-1)/(2M) < 1/p_final <= M/(2(M+1))`.
    pub bracketing_ok: bool,
    pub closing_alpha_in_open_unit: bool,
    pub closing_weighted_gamma_positive: bool,
    pub overall: bool,
}

/// Outcome of the segment test.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TangentialCheck {
    pub collinear: bool,
    pub alpha_in_unit: bool,
    /// The weight `a` with `step = a * prev + (1 - a) * w`, when collinear.
    pub weight: Option<Rational>,
}

/// `(m-1)/(2m) - 1/p_m`.
pub fn cellular_margin(step: &SchemeStep) -> Rational {
    let m = i128::from(step.m);
    ratio(m - 1, 2 * m) - &step.inv_p
}

/// `(n+1-m)(1/2 - 1/p_m) + 2 gamma_m`.
pub fn transverse_margin(n: u32, step: &SchemeStep) -> Rational {
    transverse_at(n, step.m, &step.point())
}

fn transverse_at(n: u32, m: u32, point: &ExponentPoint) -> Rational {
    let codim = Rational::integer(i64::from(n) + 1 - i64::from(m));
    codim * (ratio(1, 2) - &point.inv_p) + Rational::integer(2) * &point.gamma
}

/// `(m-2)(m-3)/(2m^3 - 6m^2 + 4)`, the guaranteed transverse margin of a
/// canonical interpolation stage.
pub fn transverse_margin_lower_bound(m: u32) -> Result<Rational> {
    if m < 3 {
        return Err(domain("m", m, "[3, inf)"));
    }
    let m = i128::from(m);
    Ok(ratio((m - 2) * (m - 3), 2 * m * m * m - 6 * m * m + 4))
}

/// Exact test that `step` lies on the segment from `prev` to `w`.
pub fn tangential_check(
    prev: &ExponentPoint,
    w: &ExponentPoint,
    step: &ExponentPoint,
) -> Result<TangentialCheck> {
    if prev == w {
        return Err(Error::DegenerateSegment);
    }
    let (dx, dy) = (&prev.inv_p - &w.inv_p, &prev.gamma - &w.gamma);
    let (sx, sy) = (&step.inv_p - &w.inv_p, &step.gamma - &w.gamma);
    let collinear = &dx * &sy == &dy * &sx;
    if !collinear {
        return Ok(TangentialCheck {
            collinear,
            alpha_in_unit: false,
            weight: None,
        });
    }
    let weight = if dx.is_zero() { sy / dy } else { sx / dx };
    let alpha_in_unit = !weight.is_negative() && weight <= Rational::one();
    Ok(TangentialCheck {
        collinear,
        alpha_in_unit,
        weight: Some(weight),
    })
}

/// Checks the canonical scheme for dimension `n`.
pub fn check_scheme(n: u32) -> Result<AdmissibilityReport> {
    Ok(check(&build_scheme(n)?))
}

/// Checks any scheme (canonical, generalized, or perturbed) level by level.
pub fn check(scheme: &Scheme) -> AdmissibilityReport {
    let n = scheme.n;
    let m_stop = scheme.m_stop;
    let mut per_step = Vec::with_capacity(n as usize);

    for m in 3..=n + 1 {
        let step = scheme.level(m).expect("levels 3..=n+1 exist");
        let w = weighted_point(n, m).expect("3 <= m <= n+1");
        let (tangential_ok, chain_bound) = if m == 3 {
            // The base stage is the bilinear point, which is also the
            // weighted point at m = 3.
            (step.point() == w, None)
        } else {
            let prev = scheme.level(m - 1).expect("previous level exists");
            match tangential_check(&prev.point(), &w, &step.point()) {
                Ok(t) => {
                    let chain = match (&t.weight, m <= m_stop) {
                        (Some(a), true) => Some(chain_bound(m, &prev, a)),
                        _ => None,
                    };
                    (t.collinear && t.alpha_in_unit, chain)
                }
                Err(_) => (false, None),
            }
        };
        per_step.push(StepMargins {
            m,
            cellular_margin: cellular_margin(&step),
            transverse_margin: transverse_margin(n, &step),
            tangential_ok,
            chain_bound,
        });
    }

    let mm = i128::from(m_stop);
    let inv = scheme.inv_p_final();
    let bracketing_ok = ratio(mm - 1, 2 * mm) < inv && inv <= ratio(mm, 2 * (mm + 1));
    let closing_alpha_in_open_unit =
        scheme.closing_alpha.is_positive() && scheme.closing_alpha < Rational::one();
    let closing_weighted_gamma_positive = weighted_point(n, m_stop + 1)
        .map(|w| w.gamma.is_positive())
        .unwrap_or(false);
    let overall = per_step.iter().all(StepMargins::ok)
        && bracketing_ok
        && closing_alpha_in_open_unit
        && closing_weighted_gamma_positive;

    AdmissibilityReport {
        n,
        m_stop,
        per_step,
        bracketing_ok,
        closing_alpha_in_open_unit,
        closing_weighted_gamma_positive,
        overall,
    }
}

// a * (-(1/2 - 1/p_{m-1})) + (1 - a) * (m-3)/(m-2)
fn chain_bound(m: u32, prev: &SchemeStep, weight: &Rational) -> Rational {
    let mi = i128::from(m);
    let prev_slack = ratio(1, 2) - &prev.inv_p;
    -(weight * prev_slack) + (Rational::one() - weight) * ratio(mi - 3, mi - 2)
}
