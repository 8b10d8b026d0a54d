//! Weighted L_q norms against dt, dt/t and dt/(t ℓ(t)) over subintervals of (0, ∞).

use crate::error::{Error, Result};
use crate::quad::{integrate_line, sup_line, QuadConfig};
use crate::svfun::SlowlyVarying;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    /// dt
    Lebesgue,
    /// dt/t (tilde spaces)
    Homogeneous,
    /// dt/(t ℓ(t)) (hat spaces)
    LogHomogeneous,
}

/// An interval (lo, hi) ⊂ (0, ∞) with a measure; stored by its logarithmic endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasuredInterval {
    lo_ln: f64,
    hi_ln: f64,
    pub measure: Measure,
}

impl MeasuredInterval {
    /// `lo` may be 0 and `hi` may be ∞.
    pub fn new(lo: f64, hi: f64, measure: Measure) -> Result<Self> {
        if !(lo >= 0.0 && hi > lo) {
            return Err(Error::InvalidArgument(format!("interval ({lo}, {hi}) is empty")));
        }
        Ok(Self::from_ln(lo.ln(), hi.ln(), measure))
    }

    /// Interval (e^lo_ln, e^hi_ln); ±∞ endpoints allowed.
    pub fn from_ln(lo_ln: f64, hi_ln: f64, measure: Measure) -> Self {
        MeasuredInterval { lo_ln, hi_ln, measure }
    }

    pub fn lo(&self) -> f64 {
        self.lo_ln.exp()
    }
    pub fn hi(&self) -> f64 {
        self.hi_ln.exp()
    }
    pub fn lo_ln(&self) -> f64 {
        self.lo_ln
    }
    pub fn hi_ln(&self) -> f64 {
        self.hi_ln
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RiKind {
    LebesgueQ,
}

/// A rearrangement-invariant space; only L_q with 0 < q ≤ ∞ is implemented.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RISpaceSpec {
    pub q: f64,
    pub kind: RiKind,
}

impl RISpaceSpec {
    pub fn lq(q: f64) -> Self {
        RISpaceSpec { q, kind: RiKind::LebesgueQ }
    }
    pub fn linf() -> Self {
        Self::lq(f64::INFINITY)
    }
    pub fn is_sup(&self) -> bool {
        self.q.is_infinite()
    }
    /// 1/q with 1/∞ = 0; the extension indices of φ_E.
    pub fn inv_q(&self) -> f64 {
        if self.is_sup() { 0.0 } else { 1.0 / self.q }
    }
}

impl fmt::Display for RISpaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_sup() { write!(f, "Lq:inf") } else { write!(f, "Lq:{}", self.q) }
    }
}

impl FromStr for RISpaceSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let body = s
            .trim()
            .strip_prefix("Lq:")
            .or_else(|| s.trim().strip_prefix('L'))
            .ok_or_else(|| Error::Parse(format!("unknown space `{s}` (expected Lq:<q>)")))?;
        let q = match body {
            "inf" | "infinity" | "∞" => f64::INFINITY,
            _ => body.parse::<f64>().map_err(|_| Error::Parse(format!("bad exponent in `{s}`")))?,
        };
        if !(q > 0.0) {
            return Err(Error::Parse(format!("exponent must be positive in `{s}`")));
        }
        Ok(Self::lq(q))
    }
}

impl Serialize for RISpaceSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for RISpaceSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// φ_E(λ) = λ^{1/q}.
pub fn fundamental_function(e: &RISpaceSpec, lam: f64) -> f64 {
    lam.powf(e.inv_q())
}

/// ∫ |f|^q dμ over the interval for finite q, with `f` given in the coordinate x = ln t.
pub fn lq_integral(
    f: &dyn Fn(f64) -> f64,
    iv: &MeasuredInterval,
    q: f64,
    breaks: &[f64],
    cfg: &QuadConfig,
) -> Result<f64> {
    let pw = |v: f64| -> f64 {
        let a = v.abs();
        if a == 0.0 { 0.0 } else { a.powf(q) }
    };
    let (lo, hi) = (iv.lo_ln, iv.hi_ln);
    if !(hi > lo) {
        return Ok(0.0);
    }
    match iv.measure {
        Measure::Homogeneous => integrate_line(&|x| pw(f(x)), lo, hi, breaks, cfg.x_cap, cfg),
        Measure::Lebesgue => integrate_line(
            &|x| {
                let a = f(x).abs();
                if a == 0.0 { 0.0 } else { (q * a.ln() + x).exp() }
            },
            lo,
            hi,
            breaks,
            cfg.x_cap,
            cfg,
        ),
        Measure::LogHomogeneous => {
            let mut total = 0.0;
            if lo < 0.0 {
                // x = 1 − e^v, v = ln(1 − x) ≥ 0.
                let top = hi.min(0.0);
                let (va, vb) = ((-top).ln_1p(), (-lo).ln_1p());
                let vb = if vb.is_finite() { vb } else { f64::INFINITY };
                let br: Vec<f64> = breaks.iter().filter(|&&b| b < 0.0).map(|&b| (-b).ln_1p()).collect();
                total += integrate_line(&|v: f64| pw(f(-v.exp_m1())), va, vb, &br, cfg.v_cap, cfg)?;
            }
            if hi > 0.0 && total.is_finite() {
                let bot = lo.max(0.0);
                let (va, vb) = (bot.ln_1p(), hi.ln_1p());
                let br: Vec<f64> = breaks.iter().filter(|&&b| b > 0.0).map(|&b| b.ln_1p()).collect();
                total += integrate_line(&|v: f64| pw(f(v.exp_m1())), va, vb, &br, cfg.v_cap, cfg)?;
            }
            Ok(total)
        }
    }
}

/// ‖f‖ of L_q(μ) restricted to the interval; `f` takes x = ln t. ∞ is a value.
pub fn weighted_norm_with(
    f: &dyn Fn(f64) -> f64,
    iv: &MeasuredInterval,
    e: &RISpaceSpec,
    breaks: &[f64],
    cfg: &QuadConfig,
) -> Result<f64> {
    if e.is_sup() {
        return sup_line(&|x| f(x).abs(), iv.lo_ln, iv.hi_ln, breaks, cfg);
    }
    let s = lq_integral(f, iv, e.q, breaks, cfg)?;
    Ok(if s.is_infinite() { s } else { s.powf(1.0 / e.q) })
}

pub fn weighted_norm(f: &dyn Fn(f64) -> f64, iv: &MeasuredInterval, e: &RISpaceSpec) -> Result<f64> {
    weighted_norm_with(f, iv, e, &[], &QuadConfig::default())
}

/// ‖b‖ over (e^lo_ln, e^hi_ln) with the given measure.
pub fn sv_norm(
    b: &SlowlyVarying,
    lo_ln: f64,
    hi_ln: f64,
    measure: Measure,
    e: &RISpaceSpec,
    cfg: &QuadConfig,
) -> Result<f64> {
    let iv = MeasuredInterval::from_ln(lo_ln, hi_ln, measure);
    weighted_norm_with(&|x| b.eval_ln(x), &iv, e, &[0.0], cfg)
}

/// Both sides of ‖s^α b(s)‖_{Ẽ(0,t)} ~ t^α b(t) (α > 0) or ‖s^α b(s)‖_{Ẽ(t,∞)} ~ t^α b(t) (α < 0).
pub fn sv_norm_scaling(b: &SlowlyVarying, alpha: f64, e: &RISpaceSpec, t: f64) -> Result<(f64, f64)> {
    sv_norm_scaling_with(b, alpha, e, t, &QuadConfig::default())
}

pub fn sv_norm_scaling_with(
    b: &SlowlyVarying,
    alpha: f64,
    e: &RISpaceSpec,
    t: f64,
    cfg: &QuadConfig,
) -> Result<(f64, f64)> {
    if alpha == 0.0 {
        return Err(Error::InvalidArgument("α must be nonzero".into()));
    }
    let xt = t.ln();
    let iv = if alpha > 0.0 {
        MeasuredInterval::from_ln(f64::NEG_INFINITY, xt, Measure::Homogeneous)
    } else {
        MeasuredInterval::from_ln(xt, f64::INFINITY, Measure::Homogeneous)
    };
    let lhs = weighted_norm_with(&|x| (alpha * x).exp() * b.eval_ln(x), &iv, e, &[0.0], cfg)?;
    Ok((lhs, t.powf(alpha) * b.eval(t)))
}

/// Both sides of ‖s^α b(s)‖_{Ẽ(t,2t)} ~ t^α b(t), any real α.
pub fn sv_norm_local(
    b: &SlowlyVarying,
    alpha: f64,
    e: &RISpaceSpec,
    t: f64,
    cfg: &QuadConfig,
) -> Result<(f64, f64)> {
    let xt = t.ln();
    let iv = MeasuredInterval::from_ln(xt, xt + std::f64::consts::LN_2, Measure::Homogeneous);
    let lhs = weighted_norm_with(&|x| (alpha * x).exp() * b.eval_ln(x), &iv, e, &[0.0], cfg)?;
    Ok((lhs, t.powf(alpha) * b.eval(t)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::svfun::ell_ln;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn closed_form_examples() {
        let iv = MeasuredInterval::new(0.0, 1.0, Measure::Homogeneous).unwrap();
        let v = weighted_norm(&|x: f64| (0.5 * x).exp(), &iv, &RISpaceSpec::lq(2.0)).unwrap();
        assert!(rel(v, 1.0) < 1e-9, "{v}");

        let iv = MeasuredInterval::new(0.0, 1.0, Measure::LogHomogeneous).unwrap();
        let v = weighted_norm(&|x: f64| 1.0 / ell_ln(x), &iv, &RISpaceSpec::lq(1.0)).unwrap();
        assert!(rel(v, 1.0) < 1e-9, "{v}");

        let v = weighted_norm(&|_| 1.0, &iv, &RISpaceSpec::lq(1.0)).unwrap();
        assert_eq!(v, f64::INFINITY);
    }

    #[test]
    fn lebesgue_measure() {
        let iv = MeasuredInterval::new(0.0, 1.0, Measure::Lebesgue).unwrap();
        // ∫_0^1 log(1/t) dt = 1
        let v = weighted_norm(&|x: f64| -x, &iv, &RISpaceSpec::lq(1.0)).unwrap();
        assert!(rel(v, 1.0) < 1e-9, "{v}");
    }

    #[test]
    fn fundamental_function_values() {
        assert_eq!(fundamental_function(&RISpaceSpec::linf(), 7.0), 1.0);
        assert_eq!(fundamental_function(&RISpaceSpec::lq(1.0), 7.0), 7.0);
        assert_eq!(fundamental_function(&RISpaceSpec::lq(2.0), 4.0), 2.0);
    }

    #[test]
    fn scaling_examples() {
        let (l, r) = sv_norm_scaling(&SlowlyVarying::constant(1.0), 1.0, &RISpaceSpec::linf(), 3.0).unwrap();
        assert!(rel(l, r) < 1e-12);
        let (l, r) = sv_norm_scaling(&SlowlyVarying::ell(), 1.0, &RISpaceSpec::lq(1.0), 1.0).unwrap();
        assert!(rel(l, 2.0) < 1e-9 && r == 1.0);
    }

    #[test]
    fn sup_of_increasing_weight_on_open_interval() {
        let iv = MeasuredInterval::new(0.0, 2.0, Measure::Homogeneous).unwrap();
        let v = weighted_norm(&|x: f64| x.exp(), &iv, &RISpaceSpec::linf()).unwrap();
        assert!(rel(v, 2.0) < 1e-9);
    }

    #[test]
    fn parse_spaces() {
        assert_eq!("Lq:2".parse::<RISpaceSpec>().unwrap().q, 2.0);
        assert!("Lq:inf".parse::<RISpaceSpec>().unwrap().is_sup());
        assert!("Lq:-1".parse::<RISpaceSpec>().is_err());
        assert!("Orlicz".parse::<RISpaceSpec>().is_err());
    }
}
