//! Slowly varying functions, their associated functions B₀/B∞ and extension indices.
//!
//! Every evaluator takes the logarithmic argument x = ln t, so arguments far beyond the
//! range of `f64` in t (for instance t = e^{-10^6}) remain representable.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

pub type LogFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// ℓ(t) = 1 + |ln t| written in the coordinate x = ln t.
#[inline]
pub fn ell_ln(x: f64) -> f64 {
    1.0 + x.abs()
}

/// ℓ(t) = 1 + |ln t|.
#[inline]
pub fn ell(t: f64) -> f64 {
    ell_ln(t.ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    FullLine,
    UnitInterval,
}

impl Domain {
    /// Upper end of the domain in the logarithmic coordinate.
    pub fn hi_ln(self) -> f64 {
        match self {
            Domain::FullLine => f64::INFINITY,
            Domain::UnitInterval => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexMethod {
    Analytic,
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexPair {
    pub pi: f64,
    pub rho: f64,
    pub method: IndexMethod,
    pub uncertainty: f64,
}

impl IndexPair {
    pub fn analytic(pi: f64, rho: f64) -> Self {
        IndexPair { pi, rho, method: IndexMethod::Analytic, uncertainty: 0.0 }
    }

    /// Indices of an exact power u ↦ u^e (times a slowly varying factor).
    pub fn power(e: f64) -> Self {
        Self::analytic(e, e)
    }

    fn scaled(self, r: f64) -> Self {
        let (a, b) = (r * self.pi, r * self.rho);
        IndexPair { pi: a.min(b), rho: a.max(b), ..self }
    }
}

/// A positive function of t given through its logarithmic evaluator x ↦ φ(e^x).
#[derive(Clone)]
pub struct PositiveFn {
    name: String,
    f: LogFn,
    domain: Domain,
    analytic: Option<(f64, f64)>,
}

impl fmt::Debug for PositiveFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PositiveFn({})", self.name)
    }
}

impl PositiveFn {
    pub fn new(name: impl Into<String>, domain: Domain, f: LogFn) -> Self {
        PositiveFn { name: name.into(), f, domain, analytic: None }
    }

    pub fn with_indices(mut self, pi: f64, rho: f64) -> Self {
        self.analytic = Some((pi, rho));
        self
    }

    /// t ↦ t^α ℓ^β(t) on the given domain.
    pub fn power_log(alpha: f64, beta: f64, domain: Domain) -> Self {
        PositiveFn::new(
            format!("t^{alpha}*ell^{beta}"),
            domain,
            Arc::new(move |x| (alpha * x).exp() * ell_ln(x).powf(beta)),
        )
        .with_indices(alpha, alpha)
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn domain(&self) -> Domain {
        self.domain
    }
    pub fn analytic_indices(&self) -> Option<(f64, f64)> {
        self.analytic
    }
    #[inline]
    pub fn eval_ln(&self, x: f64) -> f64 {
        (self.f)(x)
    }
    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        (self.f)(t.ln())
    }
    pub fn log_fn(&self) -> LogFn {
        self.f.clone()
    }
}

/// Analytic extension indices of the associated functions (B₀, B∞).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssocIndices {
    pub zero: IndexPair,
    pub infinity: IndexPair,
}

impl AssocIndices {
    fn mul(self, o: AssocIndices) -> AssocIndices {
        let add = |a: IndexPair, b: IndexPair| IndexPair::analytic(a.pi + b.pi, a.rho + b.rho);
        AssocIndices { zero: add(self.zero, o.zero), infinity: add(self.infinity, o.infinity) }
    }
    fn exact(self) -> bool {
        self.zero.pi == self.zero.rho && self.infinity.pi == self.infinity.rho
    }
}

/// A positive slowly varying function with analytic metadata.
#[derive(Clone)]
pub struct SlowlyVarying {
    name: String,
    f: LogFn,
    domain: Domain,
    index_info: Option<(f64, f64)>,
    assoc: Option<AssocIndices>,
    sv_class_check: bool,
}

impl fmt::Debug for SlowlyVarying {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SlowlyVarying({})", self.name)
    }
}

impl SlowlyVarying {
    /// Wraps an arbitrary positive evaluator; the b(t²) ~ b(t) property is tested on a grid.
    pub fn from_fn(name: impl Into<String>, domain: Domain, f: LogFn) -> Self {
        let mut b = SlowlyVarying {
            name: name.into(),
            f,
            domain,
            index_info: None,
            assoc: None,
            sv_class_check: false,
        };
        b.sv_class_check = square_ratio_sup(&b) <= DELTA2_BOUND;
        b
    }

    pub fn constant(c: f64) -> Self {
        SlowlyVarying {
            name: if c == 1.0 { "const".into() } else { format!("const({c})") },
            f: Arc::new(move |_| c),
            domain: Domain::FullLine,
            index_info: Some((0.0, 0.0)),
            assoc: Some(AssocIndices { zero: IndexPair::power(0.0), infinity: IndexPair::power(0.0) }),
            sv_class_check: true,
        }
    }

    /// ℓ^{(α,β)}: ℓ^α on (0,1] and ℓ^β on (1,∞).
    pub fn broken_log(alpha: f64, beta: f64) -> Self {
        SlowlyVarying {
            name: if alpha == beta {
                if alpha == 1.0 { "ell".into() } else { format!("ell^{alpha}") }
            } else {
                format!("broken_log({alpha},{beta})")
            },
            f: Arc::new(move |x| if x <= 0.0 { ell_ln(x).powf(alpha) } else { ell_ln(x).powf(beta) }),
            domain: Domain::FullLine,
            index_info: Some((0.0, 0.0)),
            assoc: Some(AssocIndices {
                zero: IndexPair::power(-alpha),
                infinity: IndexPair::power(-beta),
            }),
            sv_class_check: true,
        }
    }

    pub fn ell() -> Self {
        Self::broken_log(1.0, 1.0)
    }

    pub fn ell_pow(gamma: f64) -> Self {
        Self::broken_log(gamma, gamma)
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn domain(&self) -> Domain {
        self.domain
    }
    pub fn index_info(&self) -> Option<(f64, f64)> {
        self.index_info
    }
    pub fn sv_class_check(&self) -> bool {
        self.sv_class_check
    }
    pub fn log_fn(&self) -> LogFn {
        self.f.clone()
    }

    #[inline]
    pub fn eval_ln(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        (self.f)(t.ln())
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn as_positive(&self) -> PositiveFn {
        let p = PositiveFn::new(self.name.clone(), self.domain, self.f.clone());
        match self.index_info {
            Some((a, b)) => p.with_indices(a, b),
            None => p,
        }
    }

    /// Pointwise product.
    pub fn mul(&self, other: &SlowlyVarying) -> SlowlyVarying {
        let (f, g) = (self.f.clone(), other.f.clone());
        let assoc = match (self.assoc, other.assoc) {
            (Some(a), Some(b)) if a.exact() && b.exact() => Some(a.mul(b)),
            _ => None,
        };
        let domain = if self.domain == Domain::UnitInterval || other.domain == Domain::UnitInterval {
            Domain::UnitInterval
        } else {
            Domain::FullLine
        };
        SlowlyVarying {
            name: format!("{}*{}", self.name, other.name),
            f: Arc::new(move |x| f(x) * g(x)),
            domain,
            index_info: Some((0.0, 0.0)),
            assoc,
            sv_class_check: self.sv_class_check && other.sv_class_check,
        }
    }

    /// Pointwise real power b^r.
    pub fn powf(&self, r: f64) -> SlowlyVarying {
        let f = self.f.clone();
        SlowlyVarying {
            name: format!("({})^{r}", self.name),
            f: Arc::new(move |x| f(x).powf(r)),
            domain: self.domain,
            index_info: Some((0.0, 0.0)),
            assoc: self.assoc.map(|a| AssocIndices {
                zero: a.zero.scaled(r),
                infinity: a.infinity.scaled(r),
            }),
            sv_class_check: self.sv_class_check,
        }
    }

    /// Constant multiple c·b.
    pub fn scale(&self, c: f64) -> SlowlyVarying {
        let f = self.f.clone();
        SlowlyVarying {
            name: format!("{c}*{}", self.name),
            f: Arc::new(move |x| c * f(x)),
            ..self.clone()
        }
    }

    /// t ↦ b(1/t); swaps the roles of B₀ and B∞.
    pub fn reflect(&self) -> SlowlyVarying {
        let f = self.f.clone();
        SlowlyVarying {
            name: format!("reflect({})", self.name),
            f: Arc::new(move |x| f(-x)),
            domain: Domain::FullLine,
            index_info: Some((0.0, 0.0)),
            assoc: self.assoc.map(|a| AssocIndices { zero: a.infinity, infinity: a.zero }),
            sv_class_check: self.sv_class_check,
        }
    }

    /// The same function regarded as an element of SV(0,1).
    pub fn on_unit(&self) -> SlowlyVarying {
        SlowlyVarying { domain: Domain::UnitInterval, ..self.clone() }
    }

    /// Analytic associated indices when known.
    pub fn analytic_assoc(&self) -> Option<AssocIndices> {
        self.assoc
    }

    /// Extension indices of B₀ and B∞, analytic when available.
    pub fn associated_indices(&self, cfg: &IndexConfig) -> Result<AssocIndices> {
        if let Some(a) = self.assoc {
            return Ok(a);
        }
        let pair = associated_pair(self);
        let zero = extension_indices(&pair.b0, cfg)?;
        let infinity = match &pair.binf {
            Some(b) => extension_indices(b, cfg)?,
            None => IndexPair::analytic(f64::NAN, f64::NAN),
        };
        Ok(AssocIndices { zero, infinity })
    }
}

/// Bound on sampled Δ₂ and b(t²)/b(t) ratios.
pub const DELTA2_BOUND: f64 = 16.0;
/// Constant C in the "almost monotone" test f(t)/f(s) ≥ 1/C for s < t.
pub const ALMOST_MONOTONE_C: f64 = 10.0;

fn sample_grid(domain: Domain, reach: f64) -> Vec<f64> {
    // x = ln t on a symmetric log-log grid reaching |x| = reach.
    let n = 240;
    let step = reach.ln_1p() / n as f64;
    let mut xs: Vec<f64> = (0..=n).map(|i| (i as f64 * step).exp_m1()).collect();
    let neg: Vec<f64> = xs.iter().skip(1).map(|x| -x).collect();
    if domain == Domain::FullLine {
        xs.extend(neg);
    } else {
        xs = neg.into_iter().chain(std::iter::once(0.0)).collect();
    }
    xs.sort_by(f64::total_cmp);
    xs
}

fn square_ratio_sup(b: &SlowlyVarying) -> f64 {
    sample_grid(b.domain, 1e6)
        .into_iter()
        .map(|x| {
            let r = b.eval_ln(2.0 * x) / b.eval_ln(x);
            r.max(1.0 / r)
        })
        .fold(1.0, f64::max)
}

/// Whether x ↦ f(e^x) is almost increasing on the sorted grid: f(t)/f(s) ≥ 1/C for s < t.
pub fn almost_increasing(f: &dyn Fn(f64) -> f64, xs: &[f64], c: f64) -> bool {
    let mut running_max = 0.0f64;
    for &x in xs {
        let v = f(x);
        if !(v > 0.0 && v.is_finite()) {
            return false;
        }
        if running_max > 0.0 && v * c < running_max {
            return false;
        }
        running_max = running_max.max(v);
    }
    true
}

/// B₀ and B∞ of a slowly varying function.
#[derive(Clone, Debug)]
pub struct AssociatedPair {
    pub b0: PositiveFn,
    pub binf: Option<PositiveFn>,
    pub source: String,
    /// Sampled sup of max(B(u)/B(2u), B(2u)/B(u)) over both functions.
    pub delta2_sup: f64,
    pub not_delta2: bool,
}

/// B₀(u) = b(e^{1−1/u}), B∞(u) = b(e^{1/u−1}) on (0,1]; evaluators take ln u.
pub fn associated_pair(b: &SlowlyVarying) -> AssociatedPair {
    let f0 = b.f.clone();
    let mut b0 = PositiveFn::new(
        format!("B0[{}]", b.name),
        Domain::UnitInterval,
        Arc::new(move |y: f64| f0(-(-y).exp_m1())),
    );
    let mut binf = if b.domain == Domain::FullLine {
        let fi = b.f.clone();
        Some(PositiveFn::new(
            format!("Binf[{}]", b.name),
            Domain::UnitInterval,
            Arc::new(move |y: f64| fi((-y).exp_m1())),
        ))
    } else {
        None
    };
    if let Some(a) = b.assoc {
        b0.analytic = Some((a.zero.pi, a.zero.rho));
        if let Some(bi) = binf.as_mut() {
            bi.analytic = Some((a.infinity.pi, a.infinity.rho));
        }
    }
    let ln2 = std::f64::consts::LN_2;
    let mut sup = 1.0f64;
    for g in std::iter::once(&b0).chain(binf.iter()) {
        for j in 1..=60 {
            let y = -(j as f64) * ln2;
            let r = g.eval_ln(y) / g.eval_ln(y + ln2);
            sup = sup.max(r).max(1.0 / r);
        }
    }
    AssociatedPair {
        b0,
        binf,
        source: b.name.clone(),
        delta2_sup: sup,
        not_delta2: !(sup <= DELTA2_BOUND) || !b.sv_class_check,
    }
}

/// Budgets for numeric extension-index estimation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IndexConfig {
    /// Dilations reach t = 2^{±k_max}.
    pub k_max: usize,
    /// Depth of the dyadic s-sample in the supremum defining m_φ.
    pub s_depth: usize,
    /// Maximal allowed disagreement between the outer and inner slope fits.
    pub budget: f64,
}

impl Default for IndexConfig {
    fn default() -> Self {
        IndexConfig { k_max: 40, s_depth: 60, budget: 0.05 }
    }
}

fn fit_slope(ks: &[(f64, f64)]) -> f64 {
    // Least squares of ln m on {1, ln t, ln(1 + |ln t|)}; returns the ln t coefficient.
    let rows: Vec<[f64; 3]> = ks.iter().map(|&(lt, _)| [1.0, lt, (1.0 + lt.abs()).ln()]).collect();
    let mut a = [[0.0; 3]; 3];
    let mut rhs = [0.0; 3];
    for (r, &(_, y)) in rows.iter().zip(ks) {
        for i in 0..3 {
            rhs[i] += r[i] * y;
            for j in 0..3 {
                a[i][j] += r[i] * r[j];
            }
        }
    }
    solve3(a, rhs)[1]
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> [f64; 3] {
    for c in 0..3 {
        let p = (c..3).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, p);
        b.swap(c, p);
        for r in (c + 1)..3 {
            let m = a[r][c] / a[c][c];
            for k in c..3 {
                a[r][k] -= m * a[c][k];
            }
            b[r] -= m * b[c];
        }
    }
    let mut x = [0.0; 3];
    for r in (0..3).rev() {
        let s: f64 = ((r + 1)..3).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

/// Lower and upper extension indices of φ from its dilation function
/// m_φ(t) = sup_s φ(ts)/φ(s), sampled at t = 2^{±k}.
pub fn extension_indices(phi: &PositiveFn, cfg: &IndexConfig) -> Result<IndexPair> {
    if let Some((pi, rho)) = phi.analytic {
        return Ok(IndexPair::analytic(pi, rho));
    }
    let ln2 = std::f64::consts::LN_2;
    let (k, j) = (cfg.k_max as i64, cfg.s_depth as i64);
    // ln φ(2^n), n over the needed range.
    let lo = -(k + j);
    let hi = match phi.domain {
        Domain::FullLine => k + j,
        Domain::UnitInterval => 0,
    };
    let lnphi: Vec<f64> = (lo..=hi).map(|n| phi.eval_ln(n as f64 * ln2).ln()).collect();
    if lnphi.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "{} is not finite and positive on the dyadic grid",
            phi.name
        )));
    }
    let at = |n: i64| lnphi[(n - lo) as usize];
    let s_range: Vec<i64> = match phi.domain {
        Domain::FullLine => (-j..=j).collect(),
        Domain::UnitInterval => (-j..=0).collect(),
    };
    let ln_m = |kk: i64| -> f64 {
        s_range
            .iter()
            .filter(|&&s| s + kk <= hi && s + kk >= lo)
            .map(|&s| at(s + kk) - at(s))
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let series = |sign: i64, from: i64, to: i64| -> Vec<(f64, f64)> {
        (from..=to).map(|kk| ((sign * kk) as f64 * ln2, ln_m(sign * kk))).collect()
    };
    let (kh, kq) = (k / 2, k / 4);
    let pi_outer = fit_slope(&series(-1, kh, k));
    let pi_inner = fit_slope(&series(-1, kq, k - kq));
    let rho_outer = fit_slope(&series(1, kh, k));
    let rho_inner = fit_slope(&series(1, kq, k - kq));
    let unc = (pi_outer - pi_inner).abs().max((rho_outer - rho_inner).abs());
    if unc > cfg.budget {
        let (first, second) = if (pi_outer - pi_inner).abs() >= (rho_outer - rho_inner).abs() {
            (pi_outer, pi_inner)
        } else {
            (rho_outer, rho_inner)
        };
        return Err(Error::IndexUnstable { first, second });
    }
    let (mut pi, mut rho, mut unc) = (pi_outer, rho_outer, unc);
    if pi > rho {
        let mid = 0.5 * (pi + rho);
        unc += 0.5 * (pi - rho);
        pi = mid;
        rho = mid;
    }
    Ok(IndexPair { pi, rho, method: IndexMethod::Numeric, uncertainty: unc })
}

/// b ∘ μ for a positive almost-monotone μ with t/μ^δ almost increasing for some δ > 0
/// (or the same for 1/μ when μ is decreasing).
pub fn sv_compose(b: &SlowlyVarying, mu: &PositiveFn) -> Result<SlowlyVarying> {
    let xs = sample_grid(mu.domain, 150.0);
    let m = mu.f.clone();
    let inc = almost_increasing(&|x| m(x), &xs, ALMOST_MONOTONE_C);
    let dec = almost_increasing(&|x| 1.0 / m(x), &xs, ALMOST_MONOTONE_C);
    if !inc && !dec {
        return Err(Error::NotAdmissible(format!("{} is not almost monotone", mu.name)));
    }
    let sign = if inc { 1.0 } else { -1.0 };
    let deltas = [4.0, 2.0, 1.0, 0.5, 0.25, 0.125, 0.0625];
    let ok = deltas.iter().any(|&d| {
        almost_increasing(&|x| (x - sign * d * m(x).ln()).exp(), &xs, ALMOST_MONOTONE_C)
    });
    if !ok {
        return Err(Error::NotAdmissible(format!(
            "t/{}^δ is not almost increasing for any tested δ",
            mu.name
        )));
    }
    let f = b.f.clone();
    let name = format!("compose({},{})", b.name, mu.name);
    let mut out = SlowlyVarying::from_fn(name, mu.domain, Arc::new(move |x| f(m(x).ln())));
    out.index_info = Some((0.0, 0.0));
    Ok(out)
}

/// Sampled constant C_ε = sup b(st) / (max{s^ε, s^{-ε}} b(t)) over |ln s|, |ln t| ≤ reach.
pub fn sv_dilation_constant(b: &SlowlyVarying, eps: f64, reach: f64) -> f64 {
    let n = 200;
    let xs: Vec<f64> = (0..=n).map(|i| -reach + 2.0 * reach * i as f64 / n as f64).collect();
    let mut sup = 0.0f64;
    for &xt in &xs {
        if b.domain == Domain::UnitInterval && xt > 0.0 {
            continue;
        }
        let bt = b.eval_ln(xt);
        for &xs_ in &xs {
            let x = xt + xs_;
            if b.domain == Domain::UnitInterval && x > 0.0 {
                continue;
            }
            sup = sup.max(b.eval_ln(x) / ((eps * xs_.abs()).exp() * bt));
        }
    }
    sup
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn broken_log_values() {
        let b = SlowlyVarying::broken_log(2.0, -1.0);
        assert!(close(b.eval((-1f64).exp()), 4.0, 1e-15));
        assert_eq!(b.eval(1.0), 1.0);
        assert!(close(b.eval(1f64.exp()), 0.5, 1e-15));
        assert_eq!(b.index_info(), Some((0.0, 0.0)));
        assert!(b.sv_class_check());
    }

    #[test]
    fn associated_pair_closed_forms() {
        let b = SlowlyVarying::broken_log(2.0, -1.0);
        let p = associated_pair(&b);
        for &u in &[1.0, 0.5, 0.1, 1e-3] {
            assert!(close(p.b0.eval(u), u.powf(-2.0), 1e-12));
            assert!(close(p.binf.as_ref().unwrap().eval(u), u, 1e-12));
        }
        assert!(!p.not_delta2);

        let prod = b.mul(&SlowlyVarying::broken_log(1.0, 1.0));
        let p = associated_pair(&prod);
        for &u in &[1.0, 0.25, 0.01] {
            assert!(close(p.b0.eval(u), u.powi(-3), 1e-12));
            assert!(close(p.binf.as_ref().unwrap().eval(u), 1.0, 1e-12));
        }
        let a = prod.analytic_assoc().unwrap();
        assert_eq!((a.zero.pi, a.infinity.pi), (-3.0, 0.0));

        let one = associated_pair(&SlowlyVarying::constant(1.0));
        assert_eq!(one.b0.eval(0.3), 1.0);
    }

    #[test]
    fn associated_pair_inverts() {
        // B₀(1/ℓ(t)) = b(t) on (0,1].
        let b = SlowlyVarying::broken_log(0.7, -1.3).mul(&SlowlyVarying::ell_pow(0.2));
        let p = associated_pair(&b);
        for i in 0..50 {
            let x = -(i as f64) * 0.37;
            let u = 1.0 / ell_ln(x);
            assert!(close(p.b0.eval(u), b.eval_ln(x), 1e-12));
        }
    }

    #[test]
    fn numeric_indices_of_power_log() {
        let cfg = IndexConfig::default();
        let p = PositiveFn::new("tl", Domain::FullLine, Arc::new(|x| (0.7 * x).exp() * ell_ln(x).powi(2)));
        let ip = extension_indices(&p, &cfg).unwrap();
        assert_eq!(ip.method, IndexMethod::Numeric);
        assert!((ip.pi - 0.7).abs() < 0.02, "{ip:?}");
        assert!((ip.rho - 0.7).abs() < 0.02, "{ip:?}");
        let id = PositiveFn::new("t", Domain::FullLine, Arc::new(|x: f64| x.exp()));
        let ip = extension_indices(&id, &cfg).unwrap();
        assert!((ip.pi - 1.0).abs() < 1e-9 && (ip.rho - 1.0).abs() < 1e-9);
    }

    #[test]
    fn numeric_indices_of_broken_power() {
        // φ(t) = t^{1/4} on (0,1], t^{3/4} beyond: π = 1/4, ρ = 3/4.
        let p = PositiveFn::new(
            "bp",
            Domain::FullLine,
            Arc::new(|x: f64| if x < 0.0 { (0.25 * x).exp() } else { (0.75 * x).exp() }),
        );
        let ip = extension_indices(&p, &IndexConfig::default()).unwrap();
        assert!((ip.pi - 0.25).abs() < 0.02 && (ip.rho - 0.75).abs() < 0.02, "{ip:?}");
    }

    #[test]
    fn compose_ell_square() {
        let mu = PositiveFn::new("t^2", Domain::FullLine, Arc::new(|x: f64| (2.0 * x).exp()));
        let c = sv_compose(&SlowlyVarying::ell(), &mu).unwrap();
        for i in -300..300 {
            let x = i as f64 * 0.1;
            let r = c.eval_ln(x) / ell_ln(x);
            assert!((1.0..=2.0 + 1e-12).contains(&r));
        }
        let one = sv_compose(&SlowlyVarying::constant(1.0), &mu).unwrap();
        assert_eq!(one.eval(3.0), 1.0);
    }

    #[test]
    fn compose_rejects_wild_mu() {
        let mu = PositiveFn::new(
            "osc",
            Domain::FullLine,
            Arc::new(|x: f64| (x + 30.0 * x.sin()).exp()),
        );
        assert!(matches!(
            sv_compose(&SlowlyVarying::ell(), &mu),
            Err(Error::NotAdmissible(_))
        ));
    }

    #[test]
    fn almost_increasing_tolerates_dips() {
        let xs: Vec<f64> = (0..100).map(|i| i as f64).collect();
        assert!(almost_increasing(&|x| 1.0 + x + 5.0 * (x).sin().abs(), &xs, 10.0));
        assert!(!almost_increasing(&|x| (-x).exp(), &xs, 10.0));
    }
}
