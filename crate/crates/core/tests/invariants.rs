//! Cross-module properties of canonical, perturbed and generalized schemes.

use std::collections::BTreeMap;

use lpexp_core::*;
use proptest::prelude::*;

fn r(num: i64, den: i64) -> Rational {
    Rational::new(num, den).unwrap()
}

fn lower_bound(n: u32) -> Rational {
    r(2 * (i64::from(n) + 1), i64::from(n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn every_step_is_an_exact_interpolation(n in 3u32..400) {
        let s = build_scheme(n).unwrap();
        for pair in s.steps.windows(2) {
            let (prev, cur) = (&pair[0], &pair[1]);
            let w = weighted_point(n, cur.m).unwrap();
            let one = Rational::one();
            prop_assert_eq!(&cur.alpha * &prev.inv_p + (&one - &cur.alpha) * &w.inv_p, cur.inv_p.clone());
            prop_assert_eq!(&cur.alpha * &prev.gamma + (&one - &cur.alpha) * &w.gamma, cur.gamma.clone());
        }
        prop_assert!(s.closing_gamma().is_zero());
    }

    #[test]
    fn final_exponent_is_bracketed(n in 3u32..400) {
        let s = build_scheme(n).unwrap();
        let m = i64::from(s.m_stop);
        let inv = s.inv_p_final();
        prop_assert!(r(m - 1, 2 * m) < inv && inv <= r(m, 2 * (m + 1)));
        prop_assert!(s.p_final >= lower_bound(n));
    }

    #[test]
    fn final_exponent_sits_between_comparisons(n in 3u32..=100) {
        let f = build_scheme(n).unwrap().p_final;
        prop_assert!(p_ness(n).unwrap().value < f);
        prop_assert!(f < p_cmw(n).unwrap());
    }

    #[test]
    fn canonical_margins_are_nonnegative(n in 3u32..300) {
        let s = build_scheme(n).unwrap();
        for step in &s.steps[1..] {
            prop_assert!(!cellular_margin(step).is_negative());
            let margin = transverse_margin(n, step);
            if step.m == 3 {
                prop_assert!(margin.is_zero());
            } else {
                let floor = transverse_margin_lower_bound(step.m).unwrap();
                prop_assert!(floor.is_positive());
                prop_assert!(margin >= floor);
            }
        }
    }

    #[test]
    fn canonical_steps_lie_on_their_segments(n in 3u32..300) {
        let s = build_scheme(n).unwrap();
        for seg in s.segments() {
            let t = tangential_check(&seg.from, &seg.to, &seg.chosen).unwrap();
            prop_assert!(t.collinear && t.alpha_in_unit, "n={} m={}", n, seg.m);
        }
    }

    #[test]
    fn intervals_contain_canonical_weights(n in 3u32..200) {
        let s = build_scheme(n).unwrap();
        for pair in s.steps.windows(2) {
            let (prev, cur) = (&pair[0], &pair[1]);
            if cur.m < 4 {
                continue;
            }
            let iv = admissible_alpha_interval(n, cur.m, prev).unwrap().expect("nonempty");
            prop_assert!(iv.contains(&cur.alpha));
        }
        let iv = admissible_alpha_interval(n, s.m_stop + 1, s.last_step()).unwrap().expect("nonempty");
        prop_assert!(iv.contains(&s.closing_alpha));
    }

    #[test]
    fn admissible_perturbations_never_win(
        n in 4u32..9,
        picks in proptest::collection::vec((0u32..=32, 0u32..=32), 6),
    ) {
        let canonical = build_scheme(n).unwrap();
        // Walk the stages, choosing each override inside the interval seen
        // from the actual previous stage.
        let mut overrides = BTreeMap::new();
        for (m, (k, res)) in (4..=canonical.m_stop).zip(picks) {
            let current = perturbed_scheme(n, &overrides).unwrap();
            let Some(prev) = current.scheme.step(m - 1) else { break };
            let Some(iv) = admissible_alpha_interval(n, m, prev).unwrap() else { break };
            let res = res.max(1);
            let grid = iv.grid(res);
            overrides.insert(m, grid[(k % (res + 1)) as usize % grid.len()].clone());
        }
        let p = perturbed_scheme(n, &overrides).unwrap();
        if p.admissible {
            prop_assert!(p.scheme.p_final >= canonical.p_final);
        }
    }

    #[test]
    fn loss_budget_monotonicity(n in 3u32..12, mut dens in proptest::collection::vec(2i64..5000, 1..6)) {
        dens.sort_unstable_by(|a, b| b.cmp(a));
        let mut previous = general_scheme(n, &Rational::zero()).unwrap().p_final;
        for d in dens {
            let g0 = r(1, d);
            let Ok(s) = general_scheme(n, &g0) else { break };
            prop_assert!(s.p_final <= previous);
            prop_assert!(s.p_final >= lower_bound(n));
            previous = s.p_final;
        }
    }

    #[test]
    fn doubling_precision_is_stable(n in 3u32..3000, digits in 20u32..40, t in 0usize..3) {
        let target = Target::ALL[t];
        let a = expansion_remainder(n, target, digits).unwrap().to_rational();
        let b = expansion_remainder(n, target, 2 * digits).unwrap().to_rational();
        let tol: Rational = format!("1/1{}", "0".repeat((digits / 2) as usize)).parse().unwrap();
        prop_assert!((a - b).abs() <= tol);
    }
}
