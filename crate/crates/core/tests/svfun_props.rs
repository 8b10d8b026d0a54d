use interpnorm::svfun::{
    associated_pair, ell_ln, extension_indices, sv_dilation_constant, Domain, IndexConfig, PositiveFn, SlowlyVarying,
};
use proptest::prelude::*;
use std::sync::Arc;

/// Products and powers of broken logarithms, with exponents in [-2, 2].
fn weight() -> impl Strategy<Value = SlowlyVarying> {
    let exp = -2.0..2.0f64;
    (exp.clone(), exp.clone(), exp, 0.25..1.5f64, any::<bool>()).prop_map(|(a, b, c, r, reflect)| {
        let w = SlowlyVarying::broken_log(a, b).mul(&SlowlyVarying::ell_pow(c)).powf(r);
        if reflect { w.reflect() } else { w }
    })
}

/// t^{p0} on (0,1] and t^{p1} on (1,∞): extension indices min and max of (p0, p1).
fn kinked_power(p0: f64, p1: f64) -> PositiveFn {
    PositiveFn::new("kinked", Domain::FullLine, Arc::new(move |x: f64| if x <= 0.0 { (p0 * x).exp() } else { (p1 * x).exp() }))
}

fn product(f: &PositiveFn, g: &PositiveFn) -> PositiveFn {
    let (f, g) = (f.log_fn(), g.log_fn());
    PositiveFn::new("product", Domain::FullLine, Arc::new(move |x| f(x) * g(x)))
}

fn inverted(f: &PositiveFn) -> PositiveFn {
    let f = f.log_fn();
    PositiveFn::new("inverted", Domain::FullLine, Arc::new(move |x| f(-x)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn dilation_constant_does_not_grow_with_reach(b in weight(), eps in prop::sample::select(vec![0.1, 0.5, 1.0])) {
        let near = sv_dilation_constant(&b, eps, 80.0);
        let far = sv_dilation_constant(&b, eps, 160.0);
        prop_assert!(near.is_finite() && near >= 1.0);
        prop_assert!(far <= 1.25 * near && near <= 1.25 * far, "C = {near} at reach 80, {far} at reach 160");
    }

    #[test]
    fn associated_pair_reproduces_b(b in weight(), y in 0.0..500.0f64) {
        let pair = associated_pair(&b);
        // u = 1/ℓ(t): t = e^{-y} for B₀ and t = e^{y} for B∞.
        let ln_u = -ell_ln(y).ln();
        let b0 = pair.b0.eval_ln(ln_u);
        let want0 = b.eval_ln(-y);
        prop_assert!((b0 - want0).abs() <= 1e-12 * want0, "B0 {b0} vs b {want0}");
        let binf = pair.binf.as_ref().unwrap().eval_ln(ln_u);
        let want_inf = b.eval_ln(y);
        prop_assert!((binf - want_inf).abs() <= 1e-12 * want_inf, "Binf {binf} vs b {want_inf}");
    }

    #[test]
    fn numeric_indices_match_analytic(a in -2.0..2.0f64, c in -2.0..2.0f64) {
        let b = SlowlyVarying::broken_log(a, c);
        let exact = b.analytic_assoc().unwrap();
        let opaque = SlowlyVarying::from_fn("opaque", Domain::FullLine, b.log_fn());
        let num = opaque.associated_indices(&IndexConfig::default()).unwrap();
        prop_assert!((num.zero.pi - exact.zero.pi).abs() < 0.05, "{} vs {}", num.zero.pi, exact.zero.pi);
        prop_assert!((num.zero.rho - exact.zero.rho).abs() < 0.05);
        prop_assert!((num.infinity.pi - exact.infinity.pi).abs() < 0.05);
        prop_assert!((num.infinity.rho - exact.infinity.rho).abs() < 0.05);
    }

    #[test]
    fn indices_of_a_product(p0 in -2.0..2.0f64, p1 in -2.0..2.0f64, q0 in -2.0..2.0f64, q1 in -2.0..2.0f64) {
        let cfg = IndexConfig::default();
        let (f, g) = (kinked_power(p0, p1), kinked_power(q0, q1));
        let (fi, gi) = (extension_indices(&f, &cfg).unwrap(), extension_indices(&g, &cfg).unwrap());
        let pi = extension_indices(&product(&f, &g), &cfg).unwrap();
        let unc = pi.uncertainty + fi.uncertainty + gi.uncertainty + 1e-9;
        prop_assert!(pi.pi >= fi.pi + gi.pi - unc, "{} < {} + {}", pi.pi, fi.pi, gi.pi);
        prop_assert!(pi.rho <= fi.rho + gi.rho + unc, "{} > {} + {}", pi.rho, fi.rho, gi.rho);
    }

    #[test]
    fn inversion_swaps_and_negates_indices(p0 in -2.0..2.0f64, p1 in -2.0..2.0f64) {
        let cfg = IndexConfig::default();
        let f = kinked_power(p0, p1);
        let fi = extension_indices(&f, &cfg).unwrap();
        let ii = extension_indices(&inverted(&f), &cfg).unwrap();
        let unc = fi.uncertainty + ii.uncertainty + 1e-9;
        prop_assert!((ii.pi + fi.rho).abs() <= unc, "π = {} against -ρ = {}", ii.pi, -fi.rho);
        prop_assert!((ii.rho + fi.pi).abs() <= unc, "ρ = {} against -π = {}", ii.rho, -fi.pi);
    }
}

#[test]
fn kinked_power_indices_are_exact() {
    let i = extension_indices(&kinked_power(-0.5, 1.5), &IndexConfig::default()).unwrap();
    assert!((i.pi + 0.5).abs() < 1e-9 && (i.rho - 1.5).abs() < 1e-9, "{i:?}");
}
