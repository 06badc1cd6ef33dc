//! Closed-form exponent data consumed by the induction.
//!
//! An estimate `||E f||_{L^p} <~ R^gamma ||f||_2` is encoded as the point
//! `(1/p, gamma)`; interpolating two estimates is an affine combination of
//! their points. This module supplies the ingredient points (the linear
//! weighted estimate for data tangent to an `(m-1)`-dimensional variety, and
//! the bilinear weighted estimate) together with the two exponents the
//! result is compared against.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::rational::{harmonic_sum, ratio, Rational};

/// A point `(1/p, gamma)` of the interpolation plane.
///
/// Points produced by the catalog satisfy `0 < inv_p < 1/2`; arbitrary points
/// may be built directly for geometric checks.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExponentPoint {
    pub inv_p: Rational,
    pub gamma: Rational,
}

impl ExponentPoint {
    pub fn new(inv_p: Rational, gamma: Rational) -> Self {
        Self { inv_p, gamma }
    }

    /// `weight * self + (1 - weight) * other`.
    pub fn blend(&self, other: &ExponentPoint, weight: &Rational) -> ExponentPoint {
        let rest = Rational::one() - weight;
        ExponentPoint {
            inv_p: weight * &self.inv_p + &rest * &other.inv_p,
            gamma: weight * &self.gamma + &rest * &other.gamma,
        }
    }

    /// The Lebesgue exponent `p` itself.
    pub fn p(&self) -> Rational {
        self.inv_p.recip().expect("catalog points have inv_p > 0")
    }
}

fn check_weighted(n: u32, m: u32) -> Result<()> {
    if n < 2 {
        return Err(domain("n", n, "[2, inf)"));
    }
    if m < 3 || m > n + 1 {
        return Err(domain("m", m, format!("[3, {}]", n + 1)));
    }
    Ok(())
}

/// `1/p_{w,m} = 1/2 - 1/(m(m-1)(m-2))`; depends on `m` only.
pub(crate) fn weighted_inv_p(m: u32) -> Rational {
    let m = i128::from(m);
    ratio(1, 2) - ratio(1, m * (m - 1) * (m - 2))
}

/// `gamma_{w,m}` written as `constant + slope * n`, the form used when the
/// same recursion is evaluated for many dimensions at once.
pub(crate) fn weighted_gamma_parts(m: u32) -> (Rational, Rational) {
    let m = i128::from(m);
    let cubic = 2 * m * (m - 1) * (m - 2);
    let constant = ratio(m - 1, 2 * m) - ratio(m - 1, cubic);
    let slope = ratio(-1, cubic);
    (constant, slope)
}

pub(crate) fn weighted_gamma(n: u32, m: u32) -> Rational {
    let (n, m) = (i128::from(n), i128::from(m));
    ratio(m - 1, 2 * m) - ratio(n + m - 1, 2 * m * (m - 1) * (m - 2))
}

/// Exponent pair of the linear weighted restriction estimate for data
/// tangent to an `(m-1)`-dimensional variety in dimension `n+1`.
///
/// `gamma` is returned as the formula gives it: it is negative at `m = 3`
/// for every `n >= 3`, and at `m = 4` once `n >= 16`
/// (it vanishes at `n = 15`).
pub fn weighted_point(n: u32, m: u32) -> Result<ExponentPoint> {
    check_weighted(n, m)?;
    Ok(ExponentPoint {
        inv_p: weighted_inv_p(m),
        gamma: weighted_gamma(n, m),
    })
}

/// Exponent pair of the bilinear weighted estimate: `p = 2(m+1)/m` with
/// loss `R^{-(n+2-2m)/(4(m+1))}`.
pub fn bilinear_point(n: u32, m: u32) -> Result<ExponentPoint> {
    if n < 1 {
        return Err(domain("n", n, "[1, inf)"));
    }
    if m < 2 || m > n + 1 {
        return Err(domain("m", m, format!("[2, {}]", n + 1)));
    }
    let (n, m) = (i128::from(n), i128::from(m));
    Ok(ExponentPoint {
        inv_p: ratio(m, 2 * (m + 1)),
        gamma: ratio(-(n + 2 - 2 * m), 4 * (m + 1)),
    })
}

/// Previous best sufficient exponent `2 + 4/(n + 1 + 1/2 + ... + 1/n)`.
pub fn p_cmw(n: u32) -> Result<Rational> {
    if n < 2 {
        return Err(domain("n", n, "[2, inf)"));
    }
    let tail = harmonic_sum(2, u64::from(n))?;
    let denom = Rational::integer(n + 1) + tail;
    Ok(Rational::integer(2) + Rational::integer(4) / denom)
}

/// The necessary-condition exponent and the intermediate dimension that
/// attains it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NecessaryExponent {
    pub value: Rational,
    /// Smallest maximizing `m`.
    pub argmax_m: u32,
}

/// `max_{1 <= m <= n} 2 + 4/(n - 1 + m + n/m)` by exhaustive scan.
///
/// Ties keep the smallest `m` (at `n = 6` both `m = 2` and `m = 3` attain the
/// maximum).
pub fn p_ness(n: u32) -> Result<NecessaryExponent> {
    if n < 1 {
        return Err(domain("n", n, "[1, inf)"));
    }
    let ni = i128::from(n);
    // Maximizing 2 + 4/d is minimizing d = n - 1 + m + n/m.
    let mut best: Option<(Rational, u32)> = None;
    for m in 1..=n {
        let mi = i128::from(m);
        let d = ratio(mi * (ni - 1) + mi * mi + ni, mi);
        if best.as_ref().is_none_or(|(b, _)| d < *b) {
            best = Some((d, m));
        }
    }
    let (d, argmax_m) = best.expect("range 1..=n is nonempty");
    Ok(NecessaryExponent {
        value: Rational::integer(2) + Rational::integer(4) / d,
        argmax_m,
    })
}
