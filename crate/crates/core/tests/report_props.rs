use interpnorm::norms::RISpaceSpec;
use interpnorm::report::{Band, RatioReport, Verdict};
use interpnorm::svfun::SlowlyVarying;
use interpnorm::verify::{default_corpus, experiment_grid, verify_reiteration, ReiterationSetup};
use proptest::prelude::*;

fn side() -> impl Strategy<Value = f64> {
    prop_oneof![8 => 1e-6..1e6f64, 1 => Just(0.0), 1 => Just(f64::INFINITY)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn verdict_follows_the_band(
        pairs in prop::collection::vec((side(), side()), 1..30),
        lo in 0.0..1.0f64,
        span in 1.0..1e4f64,
        max_width in 1.0..1e4f64,
        one_sided in any::<bool>(),
    ) {
        let (lhs, rhs): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
        let band = Band { lo, hi: lo.max(1e-3) * span };
        let r = RatioReport::new("p", (0..lhs.len()).map(|i| i as f64).collect(), lhs.clone(), rhs.clone(), band, max_width, one_sided);
        prop_assert!(r.ratio_min <= r.ratio_max);
        let measured: Vec<f64> = lhs.iter().zip(&rhs).filter(|(l, r)| !(**l == 0.0 && **r == 0.0)).map(|(l, r)| l / r).collect();
        let divergent = lhs.iter().zip(&rhs).any(|(l, r)| !(*l == 0.0 && *r == 0.0) && (!l.is_finite() || !r.is_finite() || !(l / r).is_finite()));
        prop_assert_eq!(r.divergent, divergent);
        let finite: Vec<f64> = measured.iter().copied().filter(|q| q.is_finite()).collect();
        let inside = if one_sided {
            finite.iter().all(|&q| q <= band.hi)
        } else {
            let (mn, mx) = finite.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &q| (a.min(q), b.max(q)));
            finite.is_empty() || (mn >= band.lo && mx <= band.hi && mx / mn <= max_width)
        };
        let want = if !divergent && inside { Verdict::Pass } else { Verdict::Fail };
        prop_assert_eq!(r.verdict, want);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn reiteration_sandwich(alpha in 0.5..3.0f64, beta in 0.5..3.0f64, p in 1.5..4.0f64, eta in 0.05..0.95f64) {
        let s = ReiterationSetup {
            alpha,
            beta,
            p,
            eta,
            b: SlowlyVarying::ell_pow(-1.0).on_unit(),
            e: RISpaceSpec::lq(2.0),
            resolution: experiment_grid(),
        };
        let corpus = default_corpus(0).unwrap();
        let out = verify_reiteration(None, &s, &corpus).unwrap();
        for (a, b) in out.i1.iter().zip(&out.i2) {
            let (mx, sum) = (a.max(*b), a + b);
            prop_assert!(mx <= sum && sum <= 2.0 * mx);
        }
        prop_assert!(out.report.width() <= 1e3, "{}", out.report.summary_line());
    }
}
