//! The exponent recursion.
//!
//! Starting from the bilinear base point at `m = 3`, each stage `m` picks the
//! point on the segment from the previous stage's point to the weighted
//! point `(1/p_{w,m}, gamma_{w,m})` that saturates the cellular constraint
//! `1/p_m = (m-1)/(2m)`. The recursion runs while the resulting `gamma_m`
//! stays strictly negative; the last such stage is the stopping index `M`.
//! A final interpolation toward `(1/p_{w,M+1}, gamma_{w,M+1})` lands on
//! `gamma = 0` and fixes `p_{n+1} = p_n = ... = p_{M+1}`.
//!
//! All stages store `1/p` rather than `p`, since interpolation is affine in
//! `1/p`.

use serde::{Deserialize, Serialize};

use crate::catalog::{weighted_gamma, weighted_gamma_parts, weighted_inv_p, ExponentPoint};
use crate::error::{domain, Error, Result};
use crate::rational::{ratio, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepSource {
    /// The bilinear estimate at `m = 2, 3`.
    Base,
    /// `p_m = 2m/(m-1)`.
    CellularSaturation,
    /// A stage whose interpolation weight was supplied by the caller.
    Override,
    /// The interpolation landing on the target loss, and the constant
    /// stages after it.
    Closing,
}

/// One stage of the induction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeStep {
    pub m: u32,
    pub inv_p: Rational,
    pub gamma: Rational,
    pub alpha: Rational,
    pub source: StepSource,
}

impl SchemeStep {
    pub fn point(&self) -> ExponentPoint {
        ExponentPoint::new(self.inv_p.clone(), self.gamma.clone())
    }

    pub fn p(&self) -> Rational {
        self.inv_p.recip().expect("stage exponents have inv_p > 0")
    }
}

/// The complete induction record for one dimension `n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scheme {
    pub n: u32,
    /// Stages `m = 2 ..= M`; `m = 2` repeats the base point.
    pub steps: Vec<SchemeStep>,
    #[serde(rename = "M")]
    pub m_stop: u32,
    pub closing_alpha: Rational,
    pub p_final: Rational,
}

/// A segment of the interpolation plane: the stage point `chosen` lies on
/// the segment from `from` (previous stage) to `to` (weighted point).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub m: u32,
    pub from: ExponentPoint,
    pub to: ExponentPoint,
    pub chosen: ExponentPoint,
}

impl Scheme {
    pub fn step(&self, m: u32) -> Option<&SchemeStep> {
        self.steps.iter().find(|s| s.m == m)
    }

    /// The stage at the stopping index `M`.
    pub fn last_step(&self) -> &SchemeStep {
        self.steps.last().expect("a scheme always holds its base stages")
    }

    pub fn inv_p_final(&self) -> Rational {
        self.p_final.recip().expect("p_final > 0")
    }

    /// Loss reached by the closing interpolation, recomputed from the
    /// closing weight; zero for canonical schemes.
    pub fn closing_gamma(&self) -> Rational {
        let last = self.last_step();
        let weight = &self.closing_alpha;
        weight * &last.gamma
            + (Rational::one() - weight) * weighted_gamma(self.n, self.m_stop + 1)
    }

    /// The stage at any level `m` in `2 ..= n+1`: a recorded step for
    /// `m <= M`, the closing stage at `M+1`, and the constant stages after it.
    pub fn level(&self, m: u32) -> Option<SchemeStep> {
        if m <= self.m_stop {
            return self.step(m).cloned();
        }
        if m > self.n + 1 {
            return None;
        }
        let alpha = if m == self.m_stop + 1 {
            self.closing_alpha.clone()
        } else {
            Rational::one()
        };
        Some(SchemeStep {
            m,
            inv_p: self.inv_p_final(),
            gamma: self.closing_gamma(),
            alpha,
            source: StepSource::Closing,
        })
    }

    /// Interpolation segments for every stage `4 ..= M+1`, for plotting.
    pub fn segments(&self) -> Vec<Segment> {
        (4..=self.m_stop + 1)
            .map(|m| {
                let prev = self.level(m - 1).expect("previous level exists");
                let chosen = self.level(m).expect("level up to M+1 exists");
                Segment {
                    m,
                    from: prev.point(),
                    to: ExponentPoint::new(weighted_inv_p(m), weighted_gamma(self.n, m)),
                    chosen: chosen.point(),
                }
            })
            .collect()
    }
}

/// Closing weight and the resulting final exponent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Closing {
    pub alpha: Rational,
    pub p_final: Rational,
}

/// The base stage `m = 3`: the bilinear point `(1/3, (2-n)/12)`.
pub fn base_step(n: u32) -> Result<SchemeStep> {
    if n < 3 {
        return Err(domain("n", n, "[3, inf)"));
    }
    Ok(base_at(n, 3))
}

fn base_at(n: u32, m: u32) -> SchemeStep {
    SchemeStep {
        m,
        inv_p: ratio(1, 3),
        gamma: ratio(2 - i128::from(n), 12),
        alpha: Rational::one(),
        source: StepSource::Base,
    }
}

/// `alpha_m = (m^2 - 3m)/(m^2 - 2m - 2)`, the weight that places stage `m`
/// on the cellular line when stage `m-1` is.
pub fn interpolation_alpha(m: u32) -> Result<Rational> {
    if m < 3 {
        return Err(domain("m", m, "[3, inf)"));
    }
    let m = i128::from(m);
    Ok(ratio(m * m - 3 * m, m * m - 2 * m - 2))
}

fn check_successor(n: u32, prev: &SchemeStep, m: u32) -> Result<()> {
    if m != prev.m + 1 {
        return Err(Error::Usage(format!(
            "stage {m} cannot follow stage {}",
            prev.m
        )));
    }
    // Stage n+1 is evaluated only to show the recursion would turn
    // nonnegative there; run_stages never records it.
    if m < 4 || m > n + 1 {
        return Err(domain("m", m, format!("[4, {}]", n + 1)));
    }
    Ok(())
}

/// The canonical stage `m` built from stage `m-1`.
pub fn next_step(n: u32, prev: &SchemeStep, m: u32) -> Result<SchemeStep> {
    check_successor(n, prev, m)?;
    let alpha = interpolation_alpha(m)?;
    let gamma = &alpha * &prev.gamma + (Rational::one() - &alpha) * weighted_gamma(n, m);
    let mi = i128::from(m);
    Ok(SchemeStep {
        m,
        inv_p: ratio(mi - 1, 2 * mi),
        gamma,
        alpha,
        source: StepSource::CellularSaturation,
    })
}

/// Stage `m` as the point at weight `alpha` between stage `m-1` and the
/// weighted point, with both coordinates interpolated.
pub(crate) fn blended_step(
    n: u32,
    prev: &SchemeStep,
    m: u32,
    alpha: Rational,
    source: StepSource,
) -> Result<SchemeStep> {
    check_successor(n, prev, m)?;
    let rest = Rational::one() - &alpha;
    Ok(SchemeStep {
        m,
        inv_p: &alpha * &prev.inv_p + &rest * weighted_inv_p(m),
        gamma: &alpha * &prev.gamma + rest * weighted_gamma(n, m),
        alpha,
        source,
    })
}

/// Runs the recursion for `m = 4 ..= n`, keeping stages while their loss
/// stays strictly below `ceiling`. `advance` produces stage `m` from stage
/// `m-1`.
pub(crate) fn run_stages<F>(n: u32, ceiling: &Rational, mut advance: F) -> Result<Vec<SchemeStep>>
where
    F: FnMut(&SchemeStep, u32) -> Result<SchemeStep>,
{
    let mut steps = vec![base_at(n, 2), base_at(n, 3)];
    if steps[1].gamma >= *ceiling {
        return Err(Error::Construction(format!(
            "base loss {} is not below {}",
            steps[1].gamma, ceiling
        )));
    }
    for m in 4..=n {
        let next = advance(steps.last().expect("nonempty"), m)?;
        if next.gamma >= *ceiling {
            break;
        }
        steps.push(next);
    }
    Ok(steps)
}

/// Interpolates from stage `M` toward the weighted point at `M+1` until
/// the loss equals `target`.
pub(crate) fn close_toward(n: u32, last: &SchemeStep, target: &Rational) -> Result<Closing> {
    let next = last.m + 1;
    if last.m < 3 || next > n + 1 {
        return Err(domain("M", last.m, format!("[3, {n}]")));
    }
    let gw = weighted_gamma(n, next);
    if gw <= *target {
        return Err(Error::Construction(format!(
            "weighted loss gamma_w,{next} = {gw} does not exceed the target {target}"
        )));
    }
    if last.gamma >= *target {
        return Err(Error::Construction(format!(
            "stage {} loss {} is not below the target {target}",
            last.m, last.gamma
        )));
    }
    let alpha = (&gw - target) / (&gw - &last.gamma);
    let inv_p = &alpha * &last.inv_p + (Rational::one() - &alpha) * weighted_inv_p(next);
    let p_final = inv_p.recip()?;
    Ok(Closing { alpha, p_final })
}

/// The closing interpolation: `alpha_{M+1} = gamma_{w,M+1}/(gamma_{w,M+1} - gamma_M)`
/// lands exactly on `gamma = 0`.
pub fn closing_step(n: u32, step_m: &SchemeStep) -> Result<Closing> {
    close_toward(n, step_m, &Rational::zero())
}

/// Largest `M` in `[3, n]` with `gamma_m < 0` for every `m` in `[3, M]`.
pub fn find_m(n: u32) -> Result<u32> {
    if n < 3 {
        return Err(domain("n", n, "[3, inf)"));
    }
    let steps = run_stages(n, &Rational::zero(), |prev, m| next_step(n, prev, m))?;
    Ok(steps.last().expect("nonempty").m)
}

/// The canonical scheme for dimension `n`.
pub fn build_scheme(n: u32) -> Result<Scheme> {
    if n < 3 {
        return Err(domain("n", n, "[3, inf)"));
    }
    let steps = run_stages(n, &Rational::zero(), |prev, m| next_step(n, prev, m))?;
    assemble(n, steps, &Rational::zero())
}

pub(crate) fn assemble(n: u32, steps: Vec<SchemeStep>, target: &Rational) -> Result<Scheme> {
    let last = steps.last().expect("nonempty");
    let Closing { alpha, p_final } = close_toward(n, last, target)?;
    Ok(Scheme {
        n,
        m_stop: last.m,
        steps,
        closing_alpha: alpha,
        p_final,
    })
}

/// `gamma_m(n) = constant + slope * n`.
///
/// The weights `alpha_m` do not depend on `n` and every ingredient loss is
/// affine in `n`, so each canonical `gamma_m` is affine in `n` with
/// `n`-independent coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineGamma {
    pub m: u32,
    pub constant: Rational,
    pub slope: Rational,
}

impl AffineGamma {
    pub fn at(&self, n: u32) -> Rational {
        &self.constant + &self.slope * Rational::integer(n)
    }
}

/// Iterator over the affine coefficients of `gamma_3, gamma_4, ...`.
pub fn affine_gammas() -> impl Iterator<Item = AffineGamma> {
    let first = AffineGamma {
        m: 3,
        constant: ratio(1, 6),
        slope: ratio(-1, 12),
    };
    std::iter::successors(Some(first), |prev| {
        let m = prev.m + 1;
        let alpha = interpolation_alpha(m).expect("m >= 4");
        let rest = Rational::one() - &alpha;
        let (c, s) = weighted_gamma_parts(m);
        Some(AffineGamma {
            m,
            constant: &alpha * &prev.constant + &rest * c,
            slope: &alpha * &prev.slope + rest * s,
        })
    })
}

/// Stopping indices for every `n` in `[3, n_max]`, computed without running
/// the recursion per dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoppingScan {
    pub n_max: u32,
    /// `m_stop[i]` is `M` for `n = i + 3`.
    pub m_stop: Vec<u32>,
    /// `(n, m)` where the recursion would produce `gamma_m = 0` exactly.
    pub exact_zeros: Vec<(u32, u32)>,
    /// Dimensions whose recursion stayed negative all the way to `m = n`.
    pub capped: Vec<u32>,
}

impl StoppingScan {
    pub fn m_stop_for(&self, n: u32) -> Option<u32> {
        let idx = n.checked_sub(3)? as usize;
        self.m_stop.get(idx).copied()
    }
}

/// Scans every `n` in `[3, n_max]` for its stopping index.
///
/// Since `gamma_m(n)` is affine in `n` with negative slope, `gamma_m(n) < 0`
/// exactly when `n` exceeds the crossing point `t_m = -constant/slope`.
/// `M(n) + 1` is the first `m >= 4` with `t_m >= n`, and `gamma_{M+1}(n)`
/// vanishes exactly when `t_{M+1} = n`.
pub fn scan_stopping_indices(n_max: u32) -> Result<StoppingScan> {
    if n_max < 3 {
        return Err(domain("n_max", n_max, "[3, inf)"));
    }
    struct Crossing {
        running_floor_max: dashu_int::IBig,
        exact: Option<dashu_int::IBig>,
    }
    let mut gammas = affine_gammas().skip(1);
    let mut crossings: Vec<Crossing> = Vec::new(); // index 0 is m = 4
    let mut push_next = |crossings: &mut Vec<Crossing>| {
        let g = gammas.next().expect("infinite iterator");
        assert!(g.slope.is_negative(), "slope of gamma_{} must be negative", g.m);
        let t = -(&g.constant / &g.slope);
        let floor = t.floor();
        let running = match crossings.last() {
            Some(c) if c.running_floor_max > floor => c.running_floor_max.clone(),
            _ => floor.clone(),
        };
        crossings.push(Crossing {
            running_floor_max: running,
            exact: t.is_integer().then_some(floor),
        });
    };

    let mut scan = StoppingScan {
        n_max,
        m_stop: Vec::with_capacity(n_max as usize - 2),
        exact_zeros: Vec::new(),
        capped: Vec::new(),
    };
    let mut m = 4u32;
    for n in 3..=n_max {
        let target = dashu_int::IBig::from(n);
        loop {
            if m > n {
                break;
            }
            let idx = (m - 4) as usize;
            while crossings.len() <= idx {
                push_next(&mut crossings);
            }
            if crossings[idx].running_floor_max >= target {
                break;
            }
            m += 1;
        }
        if m > n {
            scan.m_stop.push(n);
            scan.capped.push(n);
            continue;
        }
        scan.m_stop.push(m - 1);
        if crossings[(m - 4) as usize].exact.as_ref() == Some(&target) {
            scan.exact_zeros.push((n, m));
        }
    }
    Ok(scan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{bilinear_point, weighted_point};

    fn r(num: i64, den: i64) -> Rational {
        Rational::new(num, den).unwrap()
    }

    fn two_plus(num: i64, den: i64) -> Rational {
        Rational::integer(2) + r(num, den)
    }

    fn stage(m: u32, inv_p: Rational, gamma: Rational) -> SchemeStep {
        SchemeStep {
            m,
            inv_p,
            gamma,
            alpha: Rational::one(),
            source: StepSource::CellularSaturation,
        }
    }

    #[test]
    fn base_step_examples() {
        let s = base_step(3).unwrap();
        assert_eq!((s.m, s.inv_p.clone(), s.gamma.clone()), (3, r(1, 3), r(-1, 12)));
        assert_eq!(s.alpha, Rational::one());
        assert_eq!(s.source, StepSource::Base);
        assert_eq!(base_step(4).unwrap().gamma, r(-1, 6));
        assert!(matches!(base_step(2), Err(Error::Domain { .. })));
        for n in 3..50 {
            assert_eq!(base_step(n).unwrap().point(), bilinear_point(n, 2).unwrap());
        }
    }

    #[test]
    fn interpolation_alpha_examples() {
        assert_eq!(interpolation_alpha(4).unwrap(), r(2, 3));
        assert_eq!(interpolation_alpha(5).unwrap(), r(10, 13));
        assert_eq!(interpolation_alpha(3).unwrap(), Rational::zero());
        assert!(interpolation_alpha(2).is_err());
    }

    #[test]
    fn interpolation_alpha_solves_defining_identity() {
        for m in 3..300u32 {
            let mi = i64::from(m);
            let alpha = interpolation_alpha(m).unwrap();
            let inv_prev = r(mi - 2, 2 * (mi - 1));
            let lhs = &alpha * inv_prev + (Rational::one() - &alpha) * weighted_inv_p(m);
            assert_eq!(lhs, r(mi - 1, 2 * mi), "m = {m}");
        }
    }

    #[test]
    fn next_step_examples() {
        let s = next_step(4, &base_step(4).unwrap(), 4).unwrap();
        assert_eq!((s.m, s.inv_p, s.gamma), (4, r(3, 8), r(-5, 144)));

        let s = next_step(3, &base_step(3).unwrap(), 4).unwrap();
        assert_eq!((s.m, s.inv_p.clone(), s.gamma.clone()), (4, r(3, 8), r(1, 36)));
        let by_hand = r(2, 3) * r(-1, 12) + r(1, 3) * weighted_point(3, 4).unwrap().gamma;
        assert_eq!(s.gamma, by_hand);
        assert!(next_step(3, &s, 5).is_err());

        let prev = stage(4, r(3, 8), r(-7, 72));
        let s = next_step(5, &prev, 5).unwrap();
        assert_eq!((s.m, s.inv_p, s.gamma), (5, r(2, 5), r(1, 4680)));
    }

    #[test]
    fn next_step_rejects_out_of_sequence() {
        let base = base_step(6).unwrap();
        assert!(matches!(next_step(6, &base, 5), Err(Error::Usage(_))));
        assert!(matches!(next_step(6, &base, 3), Err(Error::Usage(_))));
    }

    #[test]
    fn find_m_examples() {
        assert_eq!(find_m(3).unwrap(), 3);
        assert_eq!(find_m(4).unwrap(), 4);
        assert_eq!(find_m(5).unwrap(), 4);
        assert!(find_m(2).is_err());
    }

    #[test]
    fn recursion_values_for_small_n() {
        // gamma_5 for n = 4 is positive, so M = 4.
        let s4 = next_step(4, &base_step(4).unwrap(), 4).unwrap();
        let s5 = next_step(4, &s4, 5).unwrap();
        assert_eq!(s5.gamma, r(10, 13) * r(-5, 144) + r(3, 13) * weighted_gamma(4, 5));
        assert_eq!(s5.gamma, r(47, 936));
        let s4 = next_step(5, &base_step(5).unwrap(), 4).unwrap();
        assert_eq!(s4.gamma, r(-7, 72));
    }

    #[test]
    fn closing_step_examples() {
        let c = closing_step(3, &base_step(3).unwrap()).unwrap();
        assert_eq!(c, Closing { alpha: r(3, 4), p_final: r(96, 35) });

        let s4 = next_step(4, &base_step(4).unwrap(), 4).unwrap();
        let c = closing_step(4, &s4).unwrap();
        assert_eq!(c, Closing { alpha: r(48, 53), p_final: r(636, 245) });

        let s4 = next_step(5, &base_step(5).unwrap(), 4).unwrap();
        let c = closing_step(5, &s4).unwrap();
        assert_eq!(c, Closing { alpha: r(117, 152), p_final: r(3648, 1459) });
    }

    #[test]
    fn closing_step_failures() {
        // Stage loss not negative.
        let s = stage(4, r(3, 8), r(1, 36));
        assert!(matches!(closing_step(5, &s), Err(Error::Construction(_))));
        // gamma_{w,4} < 0 once n >= 15.
        let s = base_step(20).unwrap();
        assert!(matches!(closing_step(20, &s), Err(Error::Construction(_))));
        // M + 1 beyond n + 1.
        let s = stage(6, r(5, 12), r(-1, 10));
        assert!(matches!(closing_step(4, &s), Err(Error::Domain { .. })));
    }

    #[test]
    fn build_scheme_examples() {
        let s = build_scheme(3).unwrap();
        assert_eq!(s.m_stop, 3);
        assert_eq!(s.p_final, two_plus(26, 35));
        assert_eq!(build_scheme(6).unwrap().p_final, two_plus(42118, 97051));
        assert_eq!(build_scheme(10).unwrap().p_final, two_plus(19725581, 68686691));
        assert!(build_scheme(2).is_err());
    }

    #[test]
    fn scheme_layout() {
        let s = build_scheme(8).unwrap();
        let ms: Vec<u32> = s.steps.iter().map(|st| st.m).collect();
        assert_eq!(ms, (2..=s.m_stop).collect::<Vec<_>>());
        assert_eq!(s.steps[0].point(), s.steps[1].point());
        assert!(s.steps[..2].iter().all(|st| st.source == StepSource::Base));
        assert!(s.steps[2..].iter().all(|st| st.source == StepSource::CellularSaturation));
        assert_eq!(s.closing_gamma(), Rational::zero());
        let closing = s.level(s.m_stop + 1).unwrap();
        assert_eq!(closing.alpha, s.closing_alpha);
        assert_eq!(s.level(9).unwrap().alpha, Rational::one());
        assert!(s.level(10).is_none());
        assert_eq!(s.segments().len() as u32, s.m_stop - 2);
    }

    #[test]
    fn scheme_invariants_hold_across_range() {
        for n in 3..=120u32 {
            let s = build_scheme(n).unwrap();
            for st in &s.steps[1..] {
                assert!(st.gamma.is_negative(), "n={n} m={}", st.m);
                assert!(!st.alpha.is_negative() && st.alpha <= Rational::one());
            }
            assert!(s.closing_alpha.is_positive() && s.closing_alpha < Rational::one());
            let ni = i64::from(n);
            assert!(s.p_final >= r(2 * (ni + 1), ni), "n={n}");
            let mm = i64::from(s.m_stop);
            let inv = s.inv_p_final();
            assert!(r(mm - 1, 2 * mm) < inv && inv <= r(mm, 2 * (mm + 1)), "n={n}");
        }
    }

    #[test]
    fn scheme_json_shape() {
        let s = build_scheme(3).unwrap();
        let v = serde_json::to_value(&s).unwrap();
        assert_eq!(v["M"], 3);
        assert_eq!(v["p_final"]["num"], "96");
        assert_eq!(v["steps"][1]["source"], "base");
        let back: Scheme = serde_json::from_value(v).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn affine_gammas_match_direct_recursion() {
        for n in [3u32, 4, 5, 9, 40, 131] {
            let s = build_scheme(n).unwrap();
            for (g, st) in affine_gammas().zip(&s.steps[1..]) {
                assert_eq!(g.m, st.m);
                assert_eq!(g.at(n), st.gamma, "n={n} m={}", st.m);
            }
        }
    }

    #[test]
    fn stopping_scan_matches_find_m() {
        let scan = scan_stopping_indices(400).unwrap();
        for n in 3..=400 {
            assert_eq!(scan.m_stop_for(n), Some(find_m(n).unwrap()), "n = {n}");
        }
        assert!(scan.exact_zeros.is_empty());
        assert_eq!(scan.capped, vec![3, 4]);
        assert!(scan_stopping_indices(2).is_err());
    }
}
