use interpnorm::dyadic::{
    average, discrete_hat_norm, make_grid, seq_hardy_check, step_function, DiscreteSeq, HardyDirection, LambdaGrid,
};
use interpnorm::norms::{weighted_norm_with, Measure, MeasuredInterval, RISpaceSpec};
use interpnorm::quad::QuadConfig;
use interpnorm::svfun::SlowlyVarying;
use proptest::prelude::*;

fn space() -> impl Strategy<Value = RISpaceSpec> {
    prop::sample::select(vec![RISpaceSpec::lq(1.0), RISpaceSpec::lq(2.0), RISpaceSpec::lq(4.0), RISpaceSpec::linf()])
}

fn grid() -> LambdaGrid {
    make_grid(-6, 6).unwrap()
}

fn seq(g: &LambdaGrid) -> impl Strategy<Value = DiscreteSeq> {
    let (k_min, n) = (g.k_min, g.len());
    prop::collection::vec(0.0..10.0f64, n).prop_map(move |v| DiscreteSeq::new(k_min, v))
}

/// ‖f‖_Ê over the span of the grid, f taking x = ln t.
fn hat_norm(f: &dyn Fn(f64) -> f64, g: &LambdaGrid, e: &RISpaceSpec) -> f64 {
    let breaks: Vec<f64> = g.ks().map(|k| g.ln_lambda(k)).collect();
    let (lo, _) = g.interval_ln(g.k_min);
    let (_, hi) = g.interval_ln(g.k_max);
    let iv = MeasuredInterval::from_ln(lo, hi, Measure::LogHomogeneous);
    weighted_norm_with(f, &iv, e, &breaks, &QuadConfig::default()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn averaging_inverts_the_step_embedding(x in seq(&grid())) {
        let g = grid();
        let s = step_function(&x);
        let back = average(&s, &g, &QuadConfig::default()).unwrap();
        for (a, b) in back.values.iter().zip(&x.values) {
            prop_assert!((a - b).abs() <= 1e-10 * b.max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn step_embedding_is_isometric(x in seq(&grid()), e in space()) {
        let g = grid();
        let s = step_function(&x);
        let cont = hat_norm(&s, &g, &e);
        let disc = discrete_hat_norm(&x, &e, &g);
        prop_assert!((cont - disc).abs() <= 1e-8 * disc.max(1e-300), "{cont} vs {disc}");
    }

    #[test]
    fn averaging_is_bounded(c in -50.0..50.0f64, w in 0.2..20.0f64, e in space()) {
        let g = grid();
        let f = move |x: f64| (-((x - c) / w).powi(2)).exp();
        let t = average(&f, &g, &QuadConfig::default()).unwrap();
        let lhs = discrete_hat_norm(&t, &e, &g);
        let rhs = hat_norm(&f, &g, &e);
        prop_assert!(lhs <= rhs * (1.0 + 1e-8) + 1e-300, "‖Tf‖ = {lhs} > ‖f‖ = {rhs}");
    }

    #[test]
    fn sequence_hardy_trivial_direction(
        xs in prop::collection::vec(0.0..10.0f64, 12),
        r in 0.05..0.95f64,
        e in space(),
        above in any::<bool>(),
    ) {
        let direction = if above { HardyDirection::CumulativeAbove } else { HardyDirection::CumulativeBelow };
        let ratio = if above { 1.0 / r } else { r };
        let sigma = DiscreteSeq::new(0, (0..12).map(|i| ratio.powi(i)).collect());
        let x = DiscreteSeq::new(0, xs);
        let rep = seq_hardy_check(&sigma, &x, &e, direction).unwrap();
        prop_assert!(rep.lhs[0] >= rep.rhs[0] * (1.0 - 1e-12), "{} < {}", rep.lhs[0], rep.rhs[0]);
        prop_assert!(rep.lhs[0] <= rep.rhs[0] / (1.0 - r) * (1.0 + 1e-9), "{} above the constant", rep.lhs[0]);
    }
}

#[test]
fn weights_are_comparable_on_each_block() {
    let g = make_grid(-30, 30).unwrap();
    let weights = [
        SlowlyVarying::ell_pow(-2.0),
        SlowlyVarying::ell_pow(1.0),
        SlowlyVarying::broken_log(-2.0, 1.0),
        SlowlyVarying::broken_log(1.0, -2.0),
        SlowlyVarying::broken_log(0.5, 2.0).mul(&SlowlyVarying::ell_pow(-1.0)),
    ];
    for b in &weights {
        let mut worst = 1.0f64;
        for k in g.ks() {
            let (p, q) = g.interval_ln(k);
            if !(p.is_finite() && q.is_finite()) {
                continue;
            }
            let vals: Vec<f64> = (0..=32).map(|i| b.eval_ln(p + (q - p) * i as f64 / 32.0)).collect();
            let (lo, hi) = vals.iter().fold((f64::INFINITY, 0.0f64), |(a, c), &v| (a.min(v), c.max(v)));
            worst = worst.max(hi / lo);
        }
        // ℓ changes by at most a factor e on a block, so ℓ^γ by e^|γ|.
        assert!(worst <= 16.0, "{}: max/min on a block = {worst}", b.name());
    }
}
