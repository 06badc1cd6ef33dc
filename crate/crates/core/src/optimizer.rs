//! Alternative exponent choices.
//!
//! Every stage may pick any point on its segment, parameterized by the
//! weight `alpha` on the previous stage. Cellular, transverse and
//! nonpositive-loss constraints are each affine in `alpha`, so the admissible
//! choices form a closed interval. [`grid_search`] walks a uniform rational
//! grid inside those intervals and certifies, over the grid, that the
//! cellular-saturating choice gives the smallest final exponent.
//! [`general_scheme`] runs the recursion against a positive loss budget.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::admissibility::check;
use crate::catalog::{weighted_inv_p, weighted_point, ExponentPoint};
use crate::error::{domain, Error, Result};
use crate::rational::{ratio, Rational};
use crate::scheme::{
    assemble, blended_step, build_scheme, next_step, run_stages, Scheme, SchemeStep,
    StepSource,
};

/// Closed interval `[lo, hi]` of interpolation weights.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlphaInterval {
    pub lo: Rational,
    pub hi: Rational,
}

impl AlphaInterval {
    pub fn contains(&self, alpha: &Rational) -> bool {
        self.lo <= *alpha && *alpha <= self.hi
    }

    /// `resolution + 1` evenly spaced weights from `lo` to `hi`, or the
    /// single point when the interval is degenerate.
    pub fn grid(&self, resolution: u32) -> Vec<Rational> {
        if self.lo == self.hi {
            return vec![self.lo.clone()];
        }
        let width = &self.hi - &self.lo;
        let steps = Rational::integer(resolution);
        (0..=resolution)
            .map(|k| &self.lo + &width * Rational::integer(k) / &steps)
            .collect()
    }
}

// Intersects [lo, hi] with { alpha : at_zero + alpha * (at_one - at_zero) >= 0 }.
fn restrict(lo: &mut Rational, hi: &mut Rational, at_zero: Rational, at_one: Rational) -> bool {
    let slope = &at_one - &at_zero;
    if slope.is_zero() {
        return !at_zero.is_negative();
    }
    let root = -(&at_zero / &slope);
    if slope.is_positive() {
        *lo = lo.clone().max(root);
    } else {
        *hi = hi.clone().min(root);
    }
    lo <= hi
}

/// The weights `alpha in [0, 1]` for which the stage-`m` point
/// `alpha * prev + (1 - alpha) * w_m` is cellular, transverse and has
/// nonpositive loss. `None` when no weight qualifies.
pub fn admissible_alpha_interval(n: u32, m: u32, prev: &SchemeStep) -> Result<Option<AlphaInterval>> {
    if m < 4 || m > n + 1 {
        return Err(domain("m", m, format!("[4, {}]", n + 1)));
    }
    if prev.m + 1 != m {
        return Err(Error::Usage(format!("stage {m} cannot follow stage {}", prev.m)));
    }
    let w = weighted_point(n, m)?;
    let p = prev.point();
    let mi = i128::from(m);
    let cell = |pt: &ExponentPoint| ratio(mi - 1, 2 * mi) - &pt.inv_p;
    let codim = Rational::integer(i64::from(n) + 1 - i64::from(m));
    let trans = |pt: &ExponentPoint| &codim * (ratio(1, 2) - &pt.inv_p) + Rational::integer(2) * &pt.gamma;
    let loss = |pt: &ExponentPoint| -&pt.gamma;

    let (mut lo, mut hi) = (Rational::zero(), Rational::one());
    let feasible = restrict(&mut lo, &mut hi, cell(&w), cell(&p))
        && restrict(&mut lo, &mut hi, trans(&w), trans(&p))
        && restrict(&mut lo, &mut hi, loss(&w), loss(&p));
    Ok(feasible.then_some(AlphaInterval { lo, hi }))
}

/// A scheme rebuilt with some interpolation weights replaced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerturbedScheme {
    pub overrides: BTreeMap<u32, Rational>,
    #[serde(flatten)]
    pub scheme: Scheme,
    pub admissible: bool,
    /// Override keys never reached because the recursion closed earlier.
    pub unreached: Vec<u32>,
}

/// Weight that puts stage `m` on the cellular line `1/p = (m-1)/(2m)`,
/// clamped to `[0, 1]` when the line is out of reach.
fn saturating_alpha(m: u32, prev: &SchemeStep) -> Rational {
    let mi = i128::from(m);
    let target = ratio(mi - 1, 2 * mi);
    let winv = weighted_inv_p(m);
    if prev.inv_p >= target {
        return Rational::one();
    }
    (&winv - target) / (winv - &prev.inv_p)
}

/// Reruns the recursion with the given weights. Stages without an
/// override saturate the cellular constraint relative to the actual
/// previous stage; the stopping index and closing step follow the
/// canonical rules.
pub fn perturbed_scheme(n: u32, overrides: &BTreeMap<u32, Rational>) -> Result<PerturbedScheme> {
    let canonical = build_scheme(n)?;
    for (&m, alpha) in overrides {
        if m < 4 || m > canonical.m_stop {
            return Err(Error::Usage(format!(
                "override stage {m} outside [4, {}]",
                canonical.m_stop
            )));
        }
        if alpha.is_negative() || *alpha > Rational::one() {
            return Err(Error::Usage(format!("override weight {alpha} outside [0, 1]")));
        }
    }

    let mut in_interval = true;
    let steps = run_stages(n, &Rational::zero(), |prev, m| match overrides.get(&m) {
        Some(alpha) => {
            let interval = admissible_alpha_interval(n, m, prev)?;
            if !interval.is_some_and(|iv| iv.contains(alpha)) {
                in_interval = false;
            }
            blended_step(n, prev, m, alpha.clone(), StepSource::Override)
        }
        None => blended_step(n, prev, m, saturating_alpha(m, prev), StepSource::CellularSaturation),
    })?;
    let scheme = assemble(n, steps, &Rational::zero())?;
    let unreached: Vec<u32> = overrides
        .keys()
        .copied()
        .filter(|&m| m > scheme.m_stop + 1)
        .collect();
    let admissible = in_interval && check(&scheme).overall;
    Ok(PerturbedScheme {
        overrides: overrides.clone(),
        scheme,
        admissible,
        unreached,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSearch {
    pub n: u32,
    pub resolution: u32,
    pub canonical_p_final: Rational,
    /// Admissible scheme with the smallest final exponent; ties go to the
    /// lexicographically smallest override list.
    pub best: PerturbedScheme,
    pub canonical_is_minimal: bool,
    pub evaluated: usize,
    pub admissible_count: usize,
}

fn enumerate(
    n: u32,
    m: u32,
    last: u32,
    resolution: u32,
    prev: &SchemeStep,
    chosen: &mut Vec<(u32, Rational)>,
    out: &mut Vec<Vec<(u32, Rational)>>,
) -> Result<()> {
    if m > last {
        out.push(chosen.clone());
        return Ok(());
    }
    let Some(interval) = admissible_alpha_interval(n, m, prev)? else {
        out.push(chosen.clone());
        return Ok(());
    };
    for alpha in interval.grid(resolution) {
        let step = blended_step(n, prev, m, alpha.clone(), StepSource::Override)?;
        chosen.push((m, alpha));
        if step.gamma.is_negative() {
            enumerate(n, m + 1, last, resolution, &step, chosen, out)?;
        } else {
            out.push(chosen.clone());
        }
        chosen.pop();
    }
    Ok(())
}

/// Exhaustive search over the product grid of admissible weights for
/// stages `4 ..= M`.
pub fn grid_search(n: u32, resolution: u32) -> Result<GridSearch> {
    if resolution < 2 {
        return Err(Error::Usage(format!("grid resolution {resolution} must be at least 2")));
    }
    let canonical = build_scheme(n)?;
    let start = canonical.step(3).expect("base stage").clone();

    let mut candidates = vec![Vec::new()];
    enumerate(n, 4, canonical.m_stop, resolution, &start, &mut Vec::new(), &mut candidates)?;

    let evaluated: Vec<PerturbedScheme> = candidates
        .par_iter()
        .map(|pairs| perturbed_scheme(n, &pairs.iter().cloned().collect()))
        .collect::<Result<_>>()?;

    let admissible: Vec<(&Vec<(u32, Rational)>, &PerturbedScheme)> = candidates
        .iter()
        .zip(&evaluated)
        .filter(|(_, p)| p.admissible)
        .collect();
    let canonical_is_minimal = admissible
        .iter()
        .all(|(_, p)| p.scheme.p_final >= canonical.p_final);
    let (_, best) = admissible
        .iter()
        .min_by(|(ka, a), (kb, b)| a.scheme.p_final.cmp(&b.scheme.p_final).then_with(|| ka.cmp(kb)))
        .expect("the canonical scheme is always a candidate");

    Ok(GridSearch {
        n,
        resolution,
        canonical_p_final: canonical.p_final.clone(),
        best: (*best).clone(),
        canonical_is_minimal,
        evaluated: evaluated.len(),
        admissible_count: admissible.len(),
    })
}

/// The recursion with an allowed loss `R^{gamma0}`: stages continue while
/// `gamma_m < gamma0`, and the closing interpolation lands on `gamma0`.
///
/// The final exponent never drops below `2(n+1)/n`; when the interpolation
/// would go lower, the closing point moves along the segment to
/// `1/p = n/(2(n+1))`.
pub fn general_scheme(n: u32, gamma0: &Rational) -> Result<Scheme> {
    if n < 3 {
        return Err(domain("n", n, "[3, inf)"));
    }
    if gamma0.is_negative() {
        return Err(Error::Usage(format!("loss budget {gamma0} must be nonnegative")));
    }
    let steps = run_stages(n, gamma0, |prev, m| next_step(n, prev, m))?;
    let mut scheme = assemble(n, steps, gamma0)?;

    let ni = i128::from(n);
    let floor_inv = ratio(n.into(), 2 * (ni + 1));
    if scheme.inv_p_final() > floor_inv {
        let last = scheme.last_step();
        let winv = weighted_inv_p(scheme.m_stop + 1);
        scheme.closing_alpha = (&winv - &floor_inv) / (winv - &last.inv_p);
        scheme.p_final = floor_inv.recip()?;
    }
    Ok(scheme)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::base_step;

    fn r(num: i64, den: i64) -> Rational {
        Rational::new(num, den).unwrap()
    }

    fn overrides(pairs: &[(u32, Rational)]) -> BTreeMap<u32, Rational> {
        pairs.iter().cloned().collect()
    }

    #[test]
    fn interval_contains_canonical_weight() {
        let iv = admissible_alpha_interval(4, 4, &base_step(4).unwrap()).unwrap().unwrap();
        assert!(iv.contains(&r(2, 3)));
    }

    #[test]
    fn interval_for_n3_pins_zero_loss_point() {
        // loss <= 0 forces alpha >= 3/4; the transverse condition has
        // codimension 0 at m = n + 1 and forces loss >= 0, i.e. alpha <= 3/4.
        let iv = admissible_alpha_interval(3, 4, &base_step(3).unwrap()).unwrap().unwrap();
        assert_eq!(iv, AlphaInterval { lo: r(3, 4), hi: r(3, 4) });

        let p = ExponentPoint::new(r(1, 3), r(-1, 12));
        let w = weighted_point(3, 4).unwrap();
        let (mut lo, mut hi) = (Rational::zero(), Rational::one());
        assert!(restrict(&mut lo, &mut hi, -&w.gamma, -&p.gamma));
        assert_eq!((lo.clone(), hi.clone()), (r(3, 4), Rational::one()));
        let trans = |pt: &ExponentPoint| Rational::integer(2) * &pt.gamma;
        assert!(restrict(&mut lo, &mut hi, trans(&w), trans(&p)));
        assert_eq!((lo, hi), (r(3, 4), r(3, 4)));
    }

    #[test]
    fn interval_rejects_bad_stage() {
        let base = base_step(6).unwrap();
        assert!(admissible_alpha_interval(6, 3, &base).is_err());
        assert!(admissible_alpha_interval(6, 5, &base).is_err());
        assert!(admissible_alpha_interval(6, 8, &base).is_err());
    }

    #[test]
    fn interval_empty_when_all_constraints_conflict() {
        // A previous stage far past the cellular line leaves nothing.
        let prev = SchemeStep {
            m: 4,
            inv_p: r(49, 100),
            gamma: r(1, 2),
            alpha: Rational::one(),
            source: StepSource::Override,
        };
        assert_eq!(admissible_alpha_interval(8, 5, &prev).unwrap(), None);
    }

    #[test]
    fn restrict_handles_flat_constraints() {
        let (mut lo, mut hi) = (Rational::zero(), Rational::one());
        assert!(restrict(&mut lo, &mut hi, r(1, 5), r(1, 5)));
        assert_eq!((lo.clone(), hi.clone()), (Rational::zero(), Rational::one()));
        assert!(!restrict(&mut lo, &mut hi, r(-1, 5), r(-1, 5)));
    }

    #[test]
    fn grid_points_are_evenly_spaced() {
        let iv = AlphaInterval { lo: r(1, 2), hi: Rational::one() };
        assert_eq!(iv.grid(4), vec![r(1, 2), r(5, 8), r(3, 4), r(7, 8), Rational::one()]);
        let point = AlphaInterval { lo: r(3, 4), hi: r(3, 4) };
        assert_eq!(point.grid(64), vec![r(3, 4)]);
    }

    #[test]
    fn canonical_override_reproduces_canonical_scheme() {
        let p = perturbed_scheme(4, &overrides(&[(4, r(2, 3))])).unwrap();
        let canonical = build_scheme(4).unwrap();
        assert_eq!(p.scheme.p_final, canonical.p_final);
        assert_eq!(p.scheme.m_stop, canonical.m_stop);
        assert_eq!(p.scheme.closing_alpha, canonical.closing_alpha);
        assert!(p.admissible);
        let unchanged = perturbed_scheme(9, &BTreeMap::new()).unwrap();
        assert_eq!(unchanged.scheme, build_scheme(9).unwrap());
        assert!(unchanged.admissible);
    }

    #[test]
    fn perturbed_examples_do_not_beat_canonical() {
        let canonical = r(636, 245);
        let p = perturbed_scheme(4, &overrides(&[(4, r(7, 10))])).unwrap();
        assert!(p.scheme.p_final >= canonical);
        assert!(p.admissible);

        // Below the admissible interval [2/3, 3/4] the exponent drops, but
        // the scheme is rejected.
        let p = perturbed_scheme(4, &overrides(&[(4, r(3, 5))])).unwrap();
        assert_eq!(p.scheme.p_final, r(2460, 949));
        assert!(!p.admissible);

        let p = perturbed_scheme(4, &overrides(&[(4, Rational::one())])).unwrap();
        assert_eq!(p.scheme.step(4).unwrap().gamma, r(-1, 6));
        assert_eq!(p.scheme.p_final, r(60, 23));
        assert!(p.scheme.p_final >= canonical);
        assert!(!p.admissible, "transverse margin at m = 4 is -1/6");
    }

    #[test]
    fn perturbed_usage_errors() {
        assert!(matches!(perturbed_scheme(4, &overrides(&[(4, r(3, 2))])), Err(Error::Usage(_))));
        assert!(matches!(perturbed_scheme(4, &overrides(&[(4, r(-1, 2))])), Err(Error::Usage(_))));
        assert!(matches!(perturbed_scheme(4, &overrides(&[(5, r(1, 2))])), Err(Error::Usage(_))));
        assert!(matches!(perturbed_scheme(4, &overrides(&[(3, r(1, 2))])), Err(Error::Usage(_))));
    }

    #[test]
    fn early_close_when_override_turns_loss_nonnegative() {
        // n = 6 has M = 5; alpha = 0 at stage 4 jumps to the weighted point,
        // whose loss is positive, so the recursion closes from stage 3.
        let p = perturbed_scheme(6, &overrides(&[(4, Rational::zero()), (5, r(1, 2))])).unwrap();
        assert_eq!(p.scheme.m_stop, 3);
        assert_eq!(p.unreached, vec![5]);
        assert!(!p.admissible);
    }

    #[test]
    fn grid_search_small_dimensions() {
        for (n, res) in [(3, 64), (4, 64), (5, 16)] {
            let g = grid_search(n, res).unwrap();
            assert!(g.canonical_is_minimal, "n = {n}");
            assert_eq!(g.best.scheme.p_final, g.canonical_p_final);
        }
        assert!(matches!(grid_search(4, 1), Err(Error::Usage(_))));
    }

    #[test]
    fn grid_search_is_deterministic() {
        assert_eq!(grid_search(6, 8).unwrap(), grid_search(6, 8).unwrap());
    }

    #[test]
    fn general_scheme_examples() {
        for n in 3..=20 {
            assert_eq!(general_scheme(n, &Rational::zero()).unwrap(), build_scheme(n).unwrap());
        }
        let g = general_scheme(3, &r(1, 1000)).unwrap();
        assert_eq!(g.m_stop, 3);
        assert_eq!(g.closing_alpha, r(747, 1000));
        assert_eq!(g.p_final, r(24000, 8759));
        assert!(g.p_final < r(96, 35));
        assert!(general_scheme(4, &r(1, 1000)).unwrap().p_final < r(636, 245));
        assert!(matches!(general_scheme(4, &r(-1, 10)), Err(Error::Usage(_))));
    }

    #[test]
    fn general_scheme_respects_floor() {
        let g = general_scheme(3, &r(1, 10)).unwrap();
        assert_eq!(g.p_final, r(8, 3));
        let t = crate::admissibility::tangential_check(
            &g.last_step().point(),
            &weighted_point(3, 4).unwrap(),
            &ExponentPoint::new(g.inv_p_final(), g.closing_gamma()),
        )
        .unwrap();
        assert!(t.collinear && t.alpha_in_unit);
        assert_eq!(t.weight.as_ref(), Some(&g.closing_alpha));
    }

    #[test]
    fn general_scheme_construction_failure() {
        // gamma_{w,n+1} = n/(2(n+1)) - 1/((n+1)(n-1)) < 1/2 for any n.
        assert!(matches!(general_scheme(5, &r(1, 2)), Err(Error::Construction(_))));
    }
}
