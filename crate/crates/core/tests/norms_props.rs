use interpnorm::norms::{sv_norm, sv_norm_local, weighted_norm, Measure, MeasuredInterval, RISpaceSpec};
use interpnorm::quad::QuadConfig;
use interpnorm::svfun::{ell_ln, SlowlyVarying};
use proptest::prelude::*;

fn space() -> impl Strategy<Value = RISpaceSpec> {
    prop::sample::select(vec![RISpaceSpec::lq(1.0), RISpaceSpec::lq(2.0), RISpaceSpec::lq(3.5), RISpaceSpec::linf()])
}

fn measure() -> impl Strategy<Value = Measure> {
    prop::sample::select(vec![Measure::Homogeneous, Measure::LogHomogeneous, Measure::Lebesgue])
}

/// A smooth positive bump in x = ln t.
fn bump(c: f64, w: f64, h: f64) -> impl Fn(f64) -> f64 {
    move |x: f64| h * (-((x - c) / w).powi(2)).exp()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Composite Simpson over [a, b] with n (even) panels.
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn homogeneous_in_the_function(
        c in -5.0..5.0f64, w in 0.3..4.0f64, k in 0.01..100.0f64,
        lo in -12.0..0.0f64, len in 0.5..20.0f64, e in space(), m in measure(),
    ) {
        let f = bump(c, w, 1.0);
        let iv = MeasuredInterval::from_ln(lo, lo + len, m);
        let base = weighted_norm(&f, &iv, &e).unwrap();
        let scaled = weighted_norm(&|x| k * f(x), &iv, &e).unwrap();
        prop_assert!(rel(scaled, k * base) < 1e-9, "{scaled} vs {}", k * base);
    }

    #[test]
    fn monotone_in_the_interval(
        c in -5.0..5.0f64, w in 0.3..4.0f64, lo in -12.0..0.0f64, len in 0.5..20.0f64,
        grow_lo in 0.0..5.0f64, grow_hi in 0.0..5.0f64, e in space(), m in measure(),
    ) {
        let f = bump(c, w, 1.0);
        let inner = weighted_norm(&f, &MeasuredInterval::from_ln(lo, lo + len, m), &e).unwrap();
        let outer = weighted_norm(&f, &MeasuredInterval::from_ln(lo - grow_lo, lo + len + grow_hi, m), &e).unwrap();
        prop_assert!(outer >= inner * (1.0 - 1e-10), "{outer} < {inner}");
    }

    #[test]
    fn lattice_property(
        c in -5.0..5.0f64, w in 0.3..4.0f64, c2 in -5.0..5.0f64, h2 in 0.0..2.0f64,
        lo in -12.0..0.0f64, len in 0.5..20.0f64, e in space(), m in measure(),
    ) {
        let f = bump(c, w, 1.0);
        let extra = bump(c2, 1.0, h2);
        let g = |x: f64| f(x) + extra(x);
        let iv = MeasuredInterval::from_ln(lo, lo + len, m);
        let nf = weighted_norm(&f, &iv, &e).unwrap();
        let ng = weighted_norm(&g, &iv, &e).unwrap();
        prop_assert!(ng >= nf * (1.0 - 1e-10), "{ng} < {nf}");
    }

    #[test]
    fn hat_norm_agrees_with_direct_quadrature(
        c in -8.0..8.0f64, w in 0.5..4.0f64, lo in -20.0..-0.5f64, hi in 0.5..20.0f64,
        q in prop::sample::select(vec![1.0, 2.0, 3.0]),
    ) {
        let f = bump(c, w, 1.0);
        let iv = MeasuredInterval::from_ln(lo, hi, Measure::LogHomogeneous);
        let got = weighted_norm(&f, &iv, &RISpaceSpec::lq(q)).unwrap();
        // ∫ |f|^q dt/(tℓ(t)) = ∫ |f(x)|^q dx/(1+|x|), split at the kink of ℓ.
        let g = |x: f64| f(x).powf(q) / ell_ln(x);
        let direct = (simpson(&g, lo, 0.0, 20_000) + simpson(&g, 0.0, hi, 20_000)).powf(1.0 / q);
        prop_assert!(rel(got, direct) < 1e-6, "{got} vs {direct}");
    }
}

fn sweep_xs() -> Vec<f64> {
    let l = 1e6f64.ln();
    (0..=48).map(|i| -l + 2.0 * l * i as f64 / 48.0).collect()
}

#[test]
fn local_scaling_band() {
    let cfg = QuadConfig::default();
    for gamma in [-2.0, -1.0, 0.0, 1.0, 2.0] {
        let b = SlowlyVarying::ell_pow(gamma);
        for alpha in [-3.0, -1.0, -0.5, 0.5, 1.0, 3.0] {
            for e in [RISpaceSpec::lq(1.0), RISpaceSpec::lq(2.0), RISpaceSpec::linf()] {
                let rs: Vec<f64> = sweep_xs()
                    .iter()
                    .map(|&x| {
                        let (l, r) = sv_norm_local(&b, alpha, &e, x.exp(), &cfg).unwrap();
                        l / r
                    })
                    .collect();
                let (lo, hi) = rs.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
                assert!(lo > 0.0 && hi / lo < 1e2, "γ={gamma} α={alpha} {e}: band [{lo}, {hi}]");
            }
        }
    }
}

#[test]
fn weight_is_dominated_by_its_norm_below() {
    let cfg = QuadConfig::default();
    for gamma in [-2.0, -1.0, 0.0, 1.0, 2.0] {
        let b = SlowlyVarying::ell_pow(gamma);
        for e in [RISpaceSpec::lq(1.0), RISpaceSpec::lq(2.0), RISpaceSpec::linf()] {
            for &x in &sweep_xs() {
                let n = sv_norm(&b, f64::NEG_INFINITY, x, Measure::Homogeneous, &e, &cfg).unwrap();
                let r = b.eval_ln(x) / n;
                assert!(r <= 10.0, "γ={gamma} {e} x={x}: b(t)/‖b‖ = {r}");
            }
        }
    }
}
