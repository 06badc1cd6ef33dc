//! Numerical check of the large-`n` expansions
//!
//! ```text
//! p_{n+1}, p_cmw ~ 2 + 4/n + 4 ln(n)/n^2 + O(n^-2)
//! p_ness         ~ 2 + 4/n - 8/n^{3/2}  + O(n^-2)
//! ```
//!
//! The exponent itself is exact; only `ln n` and `sqrt n` are approximated,
//! in fixed point with `digits + GUARD_DIGITS` decimal places. The
//! reported quantity is `(value - expansion) * n^2`, which stays bounded
//! exactly when the expansion is right to `O(n^-2)`.

use std::fmt;
use std::str::FromStr;

use dashu_int::ops::SquareRoot;
use dashu_int::{IBig, UBig};
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::catalog::{p_cmw, p_ness};
use crate::error::{domain, Error, Result};
use crate::rational::{format_fixed, Rational};
use crate::scheme::build_scheme;

/// Extra decimal places carried through the fixed-point evaluation.
pub const GUARD_DIGITS: u32 = 10;

/// Smallest precision accepted by [`expansion_remainder`].
pub const MIN_DIGITS: u32 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    PFinal,
    PCmw,
    PNess,
}

impl Target {
    pub const ALL: [Target; 3] = [Target::PFinal, Target::PCmw, Target::PNess];

    pub fn name(self) -> &'static str {
        match self {
            Target::PFinal => "p_final",
            Target::PCmw => "p_cmw",
            Target::PNess => "p_ness",
        }
    }

    /// Exact value of the exponent at dimension `n`.
    pub fn value(self, n: u32) -> Result<Rational> {
        match self {
            Target::PFinal => Ok(build_scheme(n)?.p_final),
            Target::PCmw => p_cmw(n),
            Target::PNess => Ok(p_ness(n)?.value),
        }
    }

    /// The expansion claimed for this exponent.
    pub fn stated_expansion(self) -> Expansion {
        match self {
            Target::PFinal | Target::PCmw => Expansion { log_coefficient: 4, sqrt_coefficient: 0 },
            Target::PNess => Expansion { log_coefficient: 0, sqrt_coefficient: -8 },
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "p_final" | "p_n+1" | "final" => Ok(Target::PFinal),
            "p_cmw" | "cmw" => Ok(Target::PCmw),
            "p_ness" | "ness" => Ok(Target::PNess),
            other => Err(Error::Usage(format!(
                "unsupported target {other:?}; expected p_final, p_cmw or p_ness"
            ))),
        }
    }
}

/// `2 + 4/n + log_coefficient * ln(n)/n^2 + sqrt_coefficient/n^{3/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expansion {
    pub log_coefficient: i64,
    pub sqrt_coefficient: i64,
}

/// A fixed-point decimal `mantissa * 10^-scale`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Decimal {
    mantissa: IBig,
    scale: u32,
}

impl Decimal {
    pub fn new(mantissa: IBig, scale: u32) -> Self {
        Self { mantissa, scale }
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn to_rational(&self) -> Rational {
        Rational::new(self.mantissa.clone(), pow10(self.scale)).expect("10^k > 0")
    }

    pub fn abs(&self) -> Decimal {
        let mantissa = if self.mantissa < IBig::ZERO {
            -self.mantissa.clone()
        } else {
            self.mantissa.clone()
        };
        Decimal { mantissa, scale: self.scale }
    }

    /// Lossy conversion for plotting and quick comparisons.
    pub fn to_f64(&self) -> f64 {
        self.to_string().parse().unwrap_or(f64::NAN)
    }
}

impl PartialOrd for Decimal {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Decimal {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.to_rational().cmp(&other.to_rational())
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let negative = self.mantissa < IBig::ZERO;
        let magnitude = if negative { -self.mantissa.clone() } else { self.mantissa.clone() };
        f.write_str(&format_fixed(&magnitude, self.scale as usize, negative))
    }
}

impl fmt::Debug for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Decimal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let err = || Error::Parse(s.to_string());
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        if frac.chars().any(|c| !c.is_ascii_digit()) {
            return Err(err());
        }
        let digits = format!("{int}{frac}");
        let mantissa = IBig::from_str(&digits).map_err(|_| err())?;
        Ok(Decimal { mantissa, scale: frac.len() as u32 })
    }
}

impl Serialize for Decimal {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Decimal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

fn pow10(k: u32) -> IBig {
    IBig::from(10u8).pow(k as usize)
}

/// `floor(value * 10^scale)`.
fn to_fixed(value: &Rational, scale: u32) -> IBig {
    (value * Rational::integer(pow10(scale))).floor()
}

/// Divides by `10^drop`, rounding half to even.
fn round_off(value: &IBig, drop: u32) -> IBig {
    let unit = pow10(drop);
    let negative = *value < IBig::ZERO;
    let magnitude = if negative { -value.clone() } else { value.clone() };
    let (mut q, rem) = (&magnitude / &unit, &magnitude % &unit);
    let twice = rem * IBig::from(2u8);
    if twice > unit || (twice == unit && (&q % IBig::from(2u8)) != IBig::ZERO) {
        q += IBig::ONE;
    }
    if negative {
        -q
    } else {
        q
    }
}

/// `sum_{j >= 0} y^{2j+1}/(2j+1)` for `y = num/den` in `[0, 1/3]`, scaled by
/// `unit`.
///
/// Every floor division loses under one unit; the running power's error
/// stays below `1/(1 - y^2) <= 9/8` units, so each term is off by at most
/// 2.2 units and the truncated tail by less than 9/8. With `J` terms the
/// total error is below `2.2 J + 2` units, and `J <= 1.05 * scale + 2`.
fn atanh_fixed(num: &IBig, den: &IBig, unit: &IBig) -> IBig {
    let (y2n, y2d) = (num * num, den * den);
    let mut power = unit * num / den;
    let mut sum = IBig::ZERO;
    let mut odd = IBig::ONE;
    loop {
        let term = &power / &odd;
        if term == IBig::ZERO {
            break;
        }
        sum += term;
        power = power * &y2n / &y2d;
        odd += IBig::from(2u8);
    }
    sum
}

/// `ln(n) * 10^scale` in fixed point, for `n >= 1`.
///
/// With `n = 2^k x`, `x` in `[1, 2)`, `ln n = 2k atanh(1/3) + 2 atanh(y)` with
/// `y = (n - 2^k)/(n + 2^k) < 1/3`. By the bound on [`atanh_fixed`] the
/// absolute error is below `(2k + 2)(2.2 J + 2)` units of `10^-scale`,
/// i.e. under `10^6` units for any `n < 2^64` and `scale <= 400`.
pub(crate) fn ln_fixed(n: u64, scale: u32) -> IBig {
    assert!(n >= 1, "ln is evaluated at positive integers");
    let unit = pow10(scale);
    let k = 63 - n.leading_zeros();
    let base = 1u64 << k;
    let ln2 = IBig::from(2u8) * atanh_fixed(&IBig::ONE, &IBig::from(3u8), &unit);
    let rest = IBig::from(2u8) * atanh_fixed(&IBig::from(n - base), &IBig::from(n + base), &unit);
    IBig::from(k) * ln2 + rest
}

/// `floor(sqrt(n) * 10^scale)`.
pub(crate) fn sqrt_fixed(n: u64, scale: u32) -> IBig {
    let radicand = UBig::from(n) * UBig::from(10u8).pow(2 * scale as usize);
    IBig::from(radicand.sqrt())
}

/// `(value(n) - expansion(n)) * n^2` with `digits` fractional digits.
pub fn remainder_against(n: u32, target: Target, expansion: Expansion, digits: u32) -> Result<Decimal> {
    if n < 3 {
        return Err(domain("n", n, "[3, inf)"));
    }
    if digits < MIN_DIGITS {
        return Err(domain("digits", digits, format!("[{MIN_DIGITS}, inf)")));
    }
    let value = target.value(n)?;
    let ni = Rational::integer(n);
    let exact = (value - Rational::integer(2)) * &ni * &ni - Rational::integer(4) * &ni;

    let scale = digits + GUARD_DIGITS;
    let mut fixed = to_fixed(&exact, scale);
    if expansion.log_coefficient != 0 {
        fixed -= IBig::from(expansion.log_coefficient) * ln_fixed(u64::from(n), scale);
    }
    if expansion.sqrt_coefficient != 0 {
        fixed -= IBig::from(expansion.sqrt_coefficient) * sqrt_fixed(u64::from(n), scale);
    }
    Ok(Decimal::new(round_off(&fixed, GUARD_DIGITS), digits))
}

/// Remainder against the stated expansion for `target`.
pub fn expansion_remainder(n: u32, target: Target, digits: u32) -> Result<Decimal> {
    remainder_against(n, target, target.stated_expansion(), digits)
}

/// Renard E24 mantissas: 24 log-spaced values per decade.
const E24: [u32; 24] = [
    10, 11, 12, 13, 15, 16, 18, 20, 22, 24, 27, 30, 33, 36, 39, 43, 47, 51, 56, 62, 68, 75, 82, 91,
];

/// Every integer up to 100, then 24 log-spaced points per decade, plus
/// `n_hi` itself.
pub fn sample_points(n_lo: u32, n_hi: u32) -> Vec<u32> {
    let mut points: Vec<u32> = (n_lo..=n_hi.min(100)).collect();
    let mut decade: u64 = 10;
    while decade * 10 <= u64::from(n_hi) {
        for &mantissa in &E24 {
            let n = u64::from(mantissa) * decade;
            if n > 100 && n >= u64::from(n_lo) && n <= u64::from(n_hi) {
                points.push(n as u32);
            }
        }
        decade *= 10;
    }
    if n_hi >= n_lo {
        points.push(n_hi);
    }
    points.sort_unstable();
    points.dedup();
    points
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemainderSample {
    pub n: u32,
    pub remainder_times_n2: Decimal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemainderReport {
    pub target: Target,
    pub samples: Vec<RemainderSample>,
    pub max_abs: Decimal,
    pub precision_digits: u32,
}

/// Largest `|remainder * n^2|` within one decade of the sweep.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecadeMax {
    pub lo: u32,
    pub hi: u32,
    pub max_abs: Decimal,
}

impl RemainderReport {
    /// Splits the samples into decades `[n0 10^i, n0 10^{i+1})` measured from
    /// the first sample `n0`; a final sample sitting exactly on a decade
    /// boundary closes the previous decade instead of opening a new one.
    pub fn decade_maxima(&self) -> Vec<DecadeMax> {
        let Some(first) = self.samples.first() else {
            return Vec::new();
        };
        let last_n = self.samples.last().expect("nonempty").n;
        let n0 = u64::from(first.n);
        let index = |n: u32| {
            let mut i = 0u32;
            let mut edge = n0 * 10;
            while u64::from(n) >= edge {
                i += 1;
                edge *= 10;
            }
            if n == last_n && i > 0 && u64::from(n) * 10 == edge {
                i - 1
            } else {
                i
            }
        };
        let mut out: Vec<(u32, DecadeMax)> = Vec::new();
        for s in &self.samples {
            let i = index(s.n);
            let abs = s.remainder_times_n2.abs();
            match out.last_mut() {
                Some((j, d)) if *j == i => {
                    d.hi = s.n;
                    if abs > d.max_abs {
                        d.max_abs = abs;
                    }
                }
                _ => out.push((i, DecadeMax { lo: s.n, hi: s.n, max_abs: abs })),
            }
        }
        out.into_iter().map(|(_, d)| d).collect()
    }

    /// Whether no decade's maximum exceeds the previous decade's, or the
    /// first decade's, by more than the relative `tolerance`.
    pub fn decades_bounded(&self, tolerance: &Rational) -> bool {
        let decades = self.decade_maxima();
        let Some(first) = decades.first() else {
            return true;
        };
        let factor = Rational::one() + tolerance;
        let cap = first.max_abs.to_rational() * &factor;
        decades.windows(2).all(|w| {
            let (prev, next) = (w[0].max_abs.to_rational(), w[1].max_abs.to_rational());
            next <= &prev * &factor && next <= cap
        })
    }
}

/// Remainders over the log-spaced samples of `[n_lo, n_hi]`.
pub fn sweep_report(n_lo: u32, n_hi: u32, target: Target, digits: u32) -> Result<RemainderReport> {
    sweep_against(n_lo, n_hi, target, target.stated_expansion(), digits)
}

/// [`sweep_report`] against an arbitrary expansion.
pub fn sweep_against(
    n_lo: u32,
    n_hi: u32,
    target: Target,
    expansion: Expansion,
    digits: u32,
) -> Result<RemainderReport> {
    if n_lo < 3 {
        return Err(domain("n_lo", n_lo, "[3, inf)"));
    }
    if n_lo > n_hi {
        return Err(Error::EmptyRange { lo: n_lo.into(), hi: n_hi.into() });
    }
    let samples = sample_points(n_lo, n_hi)
        .into_par_iter()
        .map(|n| {
            remainder_against(n, target, expansion, digits)
                .map(|remainder_times_n2| RemainderSample { n, remainder_times_n2 })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_abs = samples
        .iter()
        .map(|s| s.remainder_times_n2.abs())
        .max()
        .expect("at least one sample");
    Ok(RemainderReport { target, samples, max_abs, precision_digits: digits })
}
