//! Interpolation-space norm functionals: the θ-method, ℛ, ℒ, (ℛ,ℒ), (ℒ,ℛ) and the
//! grand and small Lebesgue norms, over (0,∞) or, for ordered couples, over (0,1).

use crate::error::{Error, Result};
use crate::kcalc::{rearrange, FunctionSample, KProfile, SampleForm};
use crate::nested::{build_nodes, middle_above, middle_below, outer, GridConfig, Profile, SyncFn, Tail};
use crate::norms::{weighted_norm_with, Measure, MeasuredInterval, RISpaceSpec};
use crate::quad::{integrate, integrate_line, integrate_span, sup_line, QuadConfig};
use crate::registry::parse_weight;
use crate::svfun::{ell_ln, SlowlyVarying};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpaceKind {
    #[serde(rename = "theta")]
    Theta,
    R,
    L,
    RL,
    LR,
    #[serde(rename = "grand")]
    Grand,
    #[serde(rename = "small")]
    Small,
}

impl FromStr for SpaceKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "theta" => SpaceKind::Theta,
            "R" => SpaceKind::R,
            "L" => SpaceKind::L,
            "RL" => SpaceKind::RL,
            "LR" => SpaceKind::LR,
            "grand" => SpaceKind::Grand,
            "small" => SpaceKind::Small,
            _ => return Err(Error::Parse(format!("unknown space kind '{s}'"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OuterMeasure {
    /// dt/t
    #[default]
    Tilde,
    /// dt/(t ℓ(t))
    Hat,
}

impl OuterMeasure {
    pub fn measure(self) -> Measure {
        match self {
            OuterMeasure::Tilde => Measure::Homogeneous,
            OuterMeasure::Hat => Measure::LogHomogeneous,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalMode {
    #[default]
    FullLine,
    OrderedUnit,
}

/// The innermost function: s^{-θ} a(s) K(s,f), or its Lebesgue realization
/// s^{1/p} a(s) f*(s) with 1/p = 1 − θ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrand {
    #[default]
    KFunctional,
    Rearranged,
}

/// A slowly varying weight that serializes as its expression.
#[derive(Clone, Debug)]
pub struct WeightRef(pub SlowlyVarying);

impl Serialize for WeightRef {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.0.name())
    }
}

impl<'de> Deserialize<'de> for WeightRef {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse_weight(&s).map(WeightRef).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Weights {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<WeightRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<WeightRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<WeightRef>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Spaces {
    #[serde(rename = "E", default, skip_serializing_if = "Option::is_none")]
    pub e: Option<RISpaceSpec>,
    #[serde(rename = "F", default, skip_serializing_if = "Option::is_none")]
    pub f: Option<RISpaceSpec>,
    #[serde(rename = "G", default, skip_serializing_if = "Option::is_none")]
    pub g: Option<RISpaceSpec>,
}

/// Parameters of one norm functional.
///
/// Weight roles: θ-method (b, E); ℛ/ℒ outer (b, E), inner (a, F); (ℛ,ℒ)/(ℒ,ℛ) outer
/// (c, E), middle (b, F), inner (a, G).
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    pub kind: SpaceKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub weights: Weights,
    #[serde(default)]
    pub spaces: Spaces,
    #[serde(default)]
    pub outer_measure: OuterMeasure,
    #[serde(default, alias = "interval_mode")]
    pub mode: IntervalMode,
    #[serde(default)]
    pub integrand: Integrand,
    #[serde(default)]
    pub grid: GridConfig,
}

fn w(b: &SlowlyVarying) -> Option<WeightRef> {
    Some(WeightRef(b.clone()))
}

impl SpaceSpec {
    fn bare(kind: SpaceKind) -> Self {
        SpaceSpec {
            kind,
            theta: None,
            p: None,
            alpha: None,
            weights: Weights::default(),
            spaces: Spaces::default(),
            outer_measure: OuterMeasure::Tilde,
            mode: IntervalMode::FullLine,
            integrand: Integrand::KFunctional,
            grid: GridConfig::default(),
        }
    }

    pub fn theta(theta: f64, b: &SlowlyVarying, e: RISpaceSpec) -> Self {
        let mut s = Self::bare(SpaceKind::Theta);
        s.theta = Some(theta);
        s.weights.b = w(b);
        s.spaces.e = Some(e);
        s
    }

    fn two_level(kind: SpaceKind, theta: f64, b: &SlowlyVarying, e: RISpaceSpec, a: &SlowlyVarying, f: RISpaceSpec) -> Self {
        let mut s = Self::bare(kind);
        s.theta = Some(theta);
        s.weights.b = w(b);
        s.weights.a = w(a);
        s.spaces.e = Some(e);
        s.spaces.f = Some(f);
        s
    }

    pub fn r(theta: f64, b: &SlowlyVarying, e: RISpaceSpec, a: &SlowlyVarying, f: RISpaceSpec) -> Self {
        Self::two_level(SpaceKind::R, theta, b, e, a, f)
    }

    pub fn l(theta: f64, b: &SlowlyVarying, e: RISpaceSpec, a: &SlowlyVarying, f: RISpaceSpec) -> Self {
        Self::two_level(SpaceKind::L, theta, b, e, a, f)
    }

    #[allow(clippy::too_many_arguments)]
    fn three_level(
        kind: SpaceKind,
        theta: f64,
        c: &SlowlyVarying,
        e: RISpaceSpec,
        b: &SlowlyVarying,
        f: RISpaceSpec,
        a: &SlowlyVarying,
        g: RISpaceSpec,
    ) -> Self {
        let mut s = Self::two_level(kind, theta, b, e, a, f);
        s.weights.c = w(c);
        s.spaces.g = Some(g);
        s.outer_measure = OuterMeasure::Hat;
        s
    }

    #[allow(clippy::too_many_arguments)]
    pub fn rl(theta: f64, c: &SlowlyVarying, e: RISpaceSpec, b: &SlowlyVarying, f: RISpaceSpec, a: &SlowlyVarying, g: RISpaceSpec) -> Self {
        Self::three_level(SpaceKind::RL, theta, c, e, b, f, a, g)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn lr(theta: f64, c: &SlowlyVarying, e: RISpaceSpec, b: &SlowlyVarying, f: RISpaceSpec, a: &SlowlyVarying, g: RISpaceSpec) -> Self {
        Self::three_level(SpaceKind::LR, theta, c, e, b, f, a, g)
    }

    pub fn grand(p: f64, alpha: f64) -> Self {
        let mut s = Self::bare(SpaceKind::Grand);
        s.p = Some(p);
        s.alpha = Some(alpha);
        s.mode = IntervalMode::OrderedUnit;
        s
    }

    pub fn small(p: f64, alpha: f64) -> Self {
        let mut s = Self::grand(p, alpha);
        s.kind = SpaceKind::Small;
        s
    }

    /// L^{p),α} as the ℛ-space (p, ℓ^{−α/p}, L∞, 1, L_p) over (0,1).
    pub fn grand_as_r(p: f64, alpha: f64) -> Self {
        Self::r(1.0 - 1.0 / p, &SlowlyVarying::ell_pow(-alpha / p), RISpaceSpec::linf(), &SlowlyVarying::constant(1.0), RISpaceSpec::lq(p))
            .ordered()
            .rearranged()
    }

    /// L^{(p,α} as the ℒ-space (p, ℓ^{α/p'−1}, L₁, 1, L_p) over (0,1).
    pub fn small_as_l(p: f64, alpha: f64) -> Self {
        let pp = p / (p - 1.0);
        Self::l(1.0 - 1.0 / p, &SlowlyVarying::ell_pow(alpha / pp - 1.0), RISpaceSpec::lq(1.0), &SlowlyVarying::constant(1.0), RISpaceSpec::lq(p))
            .ordered()
            .rearranged()
    }

    pub fn ordered(mut self) -> Self {
        self.mode = IntervalMode::OrderedUnit;
        self
    }

    pub fn hat(mut self) -> Self {
        self.outer_measure = OuterMeasure::Hat;
        self
    }

    pub fn rearranged(mut self) -> Self {
        self.integrand = Integrand::Rearranged;
        self
    }

    pub fn with_grid(mut self, grid: GridConfig) -> Self {
        self.grid = grid;
        self
    }

    fn need_w<'a>(&'a self, w: &'a Option<WeightRef>, name: &str) -> Result<&'a SlowlyVarying> {
        w.as_ref()
            .map(|r| &r.0)
            .ok_or_else(|| Error::InvalidArgument(format!("{:?} spaces need weight {name}", self.kind)))
    }

    fn need_s(&self, s: Option<RISpaceSpec>, name: &str) -> Result<RISpaceSpec> {
        s.ok_or_else(|| Error::InvalidArgument(format!("{:?} spaces need space {name}", self.kind)))
    }

    pub fn theta_value(&self) -> Result<f64> {
        let t = self
            .theta
            .ok_or_else(|| Error::InvalidArgument(format!("{:?} spaces need theta", self.kind)))?;
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidArgument(format!("theta = {t} is outside [0,1]")));
        }
        Ok(t)
    }

    fn p_alpha(&self) -> Result<(f64, f64)> {
        let (p, a) = match (self.p, self.alpha) {
            (Some(p), Some(a)) => (p, a),
            _ => return Err(Error::InvalidArgument("grand/small spaces need p and alpha".into())),
        };
        if !(p > 1.0 && p.is_finite() && a > 0.0) {
            return Err(Error::InvalidArgument(format!("need 1 < p < ∞ and α > 0, got p={p}, α={a}")));
        }
        Ok((p, a))
    }

    /// Checks that the parameters required by the kind are present and in range.
    pub fn validate(&self) -> Result<()> {
        match self.kind {
            SpaceKind::Theta => {
                self.theta_value()?;
                self.need_w(&self.weights.b, "b")?;
                self.need_s(self.spaces.e, "E")?;
            }
            SpaceKind::R | SpaceKind::L => {
                self.theta_value()?;
                self.need_w(&self.weights.b, "b")?;
                self.need_w(&self.weights.a, "a")?;
                self.need_s(self.spaces.e, "E")?;
                self.need_s(self.spaces.f, "F")?;
            }
            SpaceKind::RL | SpaceKind::LR => {
                let t = self.theta_value()?;
                if !(t > 0.0 && t < 1.0) {
                    return Err(Error::InvalidArgument("three-level spaces need 0 < θ < 1".into()));
                }
                self.need_w(&self.weights.c, "c")?;
                self.need_w(&self.weights.b, "b")?;
                self.need_w(&self.weights.a, "a")?;
                self.need_s(self.spaces.e, "E")?;
                self.need_s(self.spaces.f, "F")?;
                self.need_s(self.spaces.g, "G")?;
            }
            SpaceKind::Grand | SpaceKind::Small => {
                self.p_alpha()?;
            }
        }
        if self.integrand == Integrand::Rearranged && self.theta.is_some_and(|t| t >= 1.0) {
            return Err(Error::InvalidArgument("the rearranged integrand needs θ < 1".into()));
        }
        Ok(())
    }

    fn bounds(&self) -> (f64, f64) {
        match self.mode {
            IntervalMode::FullLine => (f64::NEG_INFINITY, f64::INFINITY),
            IntervalMode::OrderedUnit => (f64::NEG_INFINITY, 0.0),
        }
    }
}

fn split_top_level(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

/// Compact form `kind:key=value,...`, e.g. `grand:p=2,alpha=1` or
/// `theta:0.5,b=const,E=Lq:2`. A leading bare number is θ.
impl FromStr for SpaceSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.starts_with('{') {
            return serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()));
        }
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let kind: SpaceKind = kind.trim().parse()?;
        let mut spec = SpaceSpec::bare(kind);
        if matches!(kind, SpaceKind::Grand | SpaceKind::Small) {
            spec.mode = IntervalMode::OrderedUnit;
        }
        if matches!(kind, SpaceKind::RL | SpaceKind::LR) {
            spec.outer_measure = OuterMeasure::Hat;
        }
        let num = |k: &str, v: &str| -> Result<f64> {
            v.trim().parse::<f64>().map_err(|_| Error::Parse(format!("{k}: not a number: '{v}'")))
        };
        for (i, item) in split_top_level(rest).into_iter().enumerate() {
            let item = item.trim();
            if item.is_empty() {
                continue;
            }
            let Some((k, v)) = item.split_once('=') else {
                if i == 0 {
                    spec.theta = Some(num("theta", item)?);
                    continue;
                }
                return Err(Error::Parse(format!("expected key=value, got '{item}'")));
            };
            let v = v.trim();
            match k.trim() {
                "theta" => spec.theta = Some(num(k, v)?),
                "p" => spec.p = Some(num(k, v)?),
                "alpha" => spec.alpha = Some(num(k, v)?),
                "a" => spec.weights.a = Some(WeightRef(parse_weight(v)?)),
                "b" => spec.weights.b = Some(WeightRef(parse_weight(v)?)),
                "c" => spec.weights.c = Some(WeightRef(parse_weight(v)?)),
                "E" => spec.spaces.e = Some(v.parse()?),
                "F" => spec.spaces.f = Some(v.parse()?),
                "G" => spec.spaces.g = Some(v.parse()?),
                "measure" => {
                    spec.outer_measure = match v {
                        "tilde" => OuterMeasure::Tilde,
                        "hat" => OuterMeasure::Hat,
                        _ => return Err(Error::Parse(format!("measure must be tilde or hat, got '{v}'"))),
                    }
                }
                "mode" => {
                    spec.mode = match v {
                        "full" | "full_line" => IntervalMode::FullLine,
                        "ordered" | "ordered_unit" => IntervalMode::OrderedUnit,
                        _ => return Err(Error::Parse(format!("mode must be full_line or ordered_unit, got '{v}'"))),
                    }
                }
                "integrand" => {
                    spec.integrand = match v {
                        "k" | "k_functional" => Integrand::KFunctional,
                        "rearranged" => Integrand::Rearranged,
                        _ => return Err(Error::Parse(format!("integrand must be k_functional or rearranged, got '{v}'"))),
                    }
                }
                other => return Err(Error::Parse(format!("unknown key '{other}'"))),
            }
        }
        spec.validate().map_err(|e| Error::Parse(e.to_string()))?;
        Ok(spec)
    }
}

impl fmt::Display for SpaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", serde_json::to_string(self).map_err(|_| fmt::Error)?)
    }
}

/// A norm value (∞ marks f outside the space) with optional samples (t, inner value).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormValue {
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub breakdown: Option<Vec<(f64, f64)>>,
}

impl NormValue {
    pub fn plain(value: f64) -> Self {
        NormValue { value, breakdown: None }
    }
}

const BREAKDOWN_POINTS: usize = 200;

fn breakdown(xs: &[f64], vals: &[f64]) -> Vec<(f64, f64)> {
    let step = xs.len().div_ceil(BREAKDOWN_POINTS).max(1);
    xs.iter().zip(vals).step_by(step).map(|(&x, &v)| (x.exp(), v)).collect()
}

type BoxFn<'a> = Box<dyn Fn(f64) -> f64 + Sync + 'a>;

/// The innermost function in x = ln s, with its kinks.
fn base_integrand<'a>(spec: &SpaceSpec, k: &'a KProfile, a: Option<&'a SlowlyVarying>) -> Result<(BoxFn<'a>, Vec<f64>)> {
    let theta = spec.theta_value()?;
    let breaks = k.breaks_ln();
    let h: BoxFn<'a> = match spec.integrand {
        Integrand::KFunctional => Box::new(move |x: f64| {
            let lk = k.ln_eval(x);
            if lk == f64::NEG_INFINITY {
                return 0.0;
            }
            let wa = a.map_or(1.0, |a| a.eval_ln(x));
            wa * (lk - theta * x).exp()
        }),
        Integrand::Rearranged => {
            let inv_p = 1.0 - theta;
            Box::new(move |x: f64| {
                let fs = k.fstar_ln(x);
                if fs == 0.0 {
                    return 0.0;
                }
                let wa = a.map_or(1.0, |a| a.eval_ln(x));
                wa * fs * (inv_p * x).exp()
            })
        }
    };
    Ok((h, breaks))
}

/// ‖h‖ over (lo, hi) in the tilde measure.
fn inner_norm(h: SyncFn, lo: f64, hi: f64, g: &RISpaceSpec, breaks: &[f64], cfg: &QuadConfig) -> f64 {
    if !(hi > lo) {
        return 0.0;
    }
    weighted_norm_with(h, &MeasuredInterval::from_ln(lo, hi, Measure::Homogeneous), g, breaks, cfg).unwrap_or(f64::NAN)
}

/// ‖t^{-θ} b(t) K(t,f)‖_{Ẽ} (Ê when the outer measure is hat).
pub fn norm_theta(k: &KProfile, spec: &SpaceSpec) -> Result<NormValue> {
    norm_theta_with(k, spec, &QuadConfig::default())
}

pub fn norm_theta_with(k: &KProfile, spec: &SpaceSpec, cfg: &QuadConfig) -> Result<NormValue> {
    spec.validate()?;
    let b = spec.need_w(&spec.weights.b, "b")?;
    let e = spec.need_s(spec.spaces.e, "E")?;
    let (h, mut breaks) = base_integrand(spec, k, None)?;
    let (lo, hi) = spec.bounds();
    breaks.push(0.0);
    let iv = MeasuredInterval::from_ln(lo, hi, spec.outer_measure.measure());
    let v = weighted_norm_with(&|x| b.eval_ln(x) * h(x), &iv, &e, &breaks, cfg)?;
    Ok(NormValue::plain(v))
}

/// ‖b(t) ‖s^{-θ} a(s) K(s,f)‖_{F̃(t,∞)}‖_{Ẽ} ((t,1) and (0,1) for ordered couples).
pub fn norm_r(k: &KProfile, spec: &SpaceSpec) -> Result<NormValue> {
    norm_r_with(k, spec, &QuadConfig::default())
}

pub fn norm_r_with(k: &KProfile, spec: &SpaceSpec, cfg: &QuadConfig) -> Result<NormValue> {
    two_level(k, spec, cfg, true)
}

/// ‖b(t) ‖s^{-θ} a(s) K(s,f)‖_{F̃(0,t)}‖_{Ẽ}.
pub fn norm_l(k: &KProfile, spec: &SpaceSpec) -> Result<NormValue> {
    norm_l_with(k, spec, &QuadConfig::default())
}

pub fn norm_l_with(k: &KProfile, spec: &SpaceSpec, cfg: &QuadConfig) -> Result<NormValue> {
    two_level(k, spec, cfg, false)
}

fn two_level(k: &KProfile, spec: &SpaceSpec, cfg: &QuadConfig, above: bool) -> Result<NormValue> {
    spec.validate()?;
    let b = spec.need_w(&spec.weights.b, "b")?;
    let a = spec.need_w(&spec.weights.a, "a")?;
    let e = spec.need_s(spec.spaces.e, "E")?;
    let f = spec.need_s(spec.spaces.f, "F")?;
    let (h, breaks) = base_integrand(spec, k, Some(a))?;
    let (lo, hi) = spec.bounds();
    let nodes = build_nodes(lo, hi, &spec.grid, &breaks);
    let prof = Profile::build(&*h, &breaks, lo, hi, &f, nodes, cfg)?;
    let n = prof.len();
    let vals: Vec<f64> = if above {
        (0..n).map(|j| prof.to_hi(j)).collect()
    } else {
        (0..n).map(|j| prof.from_lo(j)).collect()
    };
    let exact_above = |u: f64| inner_norm(&*h, u, hi, &f, &breaks, cfg);
    let exact_below = |u: f64| inner_norm(&*h, lo, u, &f, &breaks, cfg);
    let (left, right) = if above {
        (Tail::Const(prof.total()), Tail::Exact(&exact_above))
    } else {
        (Tail::Exact(&exact_below), Tail::Const(prof.total()))
    };
    let bf = |x: f64| b.eval_ln(x);
    let v = outer(&prof.xs, &vals, lo, hi, left, right, &bf, &e, spec.outer_measure.measure(), cfg)?;
    if v.is_nan() {
        return Err(Error::QuadratureNonconvergent("NaN in outer norm".into()));
    }
    Ok(NormValue { value: v, breakdown: Some(breakdown(&prof.xs, &vals)) })
}

/// ‖c(u) ‖b(t) ‖s^{-θ} a(s) K(s,f)‖_{G̃(t,u)}‖_{F̃(0,u)}‖_{Ê}.
pub fn norm_rl(k: &KProfile, spec: &SpaceSpec) -> Result<NormValue> {
    norm_rl_with(k, spec, &QuadConfig::default())
}

pub fn norm_rl_with(k: &KProfile, spec: &SpaceSpec, cfg: &QuadConfig) -> Result<NormValue> {
    three_level(k, spec, cfg, true)
}

/// ‖c(u) ‖b(t) ‖s^{-θ} a(s) K(s,f)‖_{G̃(u,t)}‖_{F̃(u,∞)}‖_{Ê}.
pub fn norm_lr(k: &KProfile, spec: &SpaceSpec) -> Result<NormValue> {
    norm_lr_with(k, spec, &QuadConfig::default())
}

pub fn norm_lr_with(k: &KProfile, spec: &SpaceSpec, cfg: &QuadConfig) -> Result<NormValue> {
    three_level(k, spec, cfg, false)
}

fn three_level(k: &KProfile, spec: &SpaceSpec, cfg: &QuadConfig, rl: bool) -> Result<NormValue> {
    spec.validate()?;
    let c = spec.need_w(&spec.weights.c, "c")?;
    let b = spec.need_w(&spec.weights.b, "b")?;
    let a = spec.need_w(&spec.weights.a, "a")?;
    let e = spec.need_s(spec.spaces.e, "E")?;
    let f = spec.need_s(spec.spaces.f, "F")?;
    let g = spec.need_s(spec.spaces.g, "G")?;
    let (h, breaks) = base_integrand(spec, k, Some(a))?;
    let (lo, hi) = spec.bounds();
    let nodes = build_nodes(lo, hi, &spec.grid, &breaks);
    let prof = Profile::build(&*h, &breaks, lo, hi, &g, nodes, cfg)?;
    let bf = |x: f64| b.eval_ln(x);
    let mid = if rl { middle_below(&prof, &bf, &f, cfg)? } else { middle_above(&prof, &bf, &f, cfg)? };
    let n = mid.len();
    let cf = |x: f64| c.eval_ln(x);
    let v = outer(
        &prof.xs,
        &mid,
        lo,
        hi,
        Tail::Const(mid[0]),
        Tail::Const(mid[n - 1]),
        &cf,
        &e,
        Measure::LogHomogeneous,
        cfg,
    )?;
    if v.is_nan() {
        return Err(Error::QuadratureNonconvergent("NaN in outer norm".into()));
    }
    Ok(NormValue { value: v, breakdown: Some(breakdown(&prof.xs, &mid)) })
}

/// Dispatches on the kind; grand and small norms use the rearrangement stored in K.
pub fn norm(k: &KProfile, spec: &SpaceSpec) -> Result<NormValue> {
    match spec.kind {
        SpaceKind::Theta => norm_theta(k, spec),
        SpaceKind::R => norm_r(k, spec),
        SpaceKind::L => norm_l(k, spec),
        SpaceKind::RL => norm_rl(k, spec),
        SpaceKind::LR => norm_lr(k, spec),
        SpaceKind::Grand | SpaceKind::Small => {
            let (p, alpha) = spec.p_alpha()?;
            let fs = |x: f64| k.fstar_ln(x);
            let breaks = k.breaks_ln();
            let cfg = QuadConfig::default();
            let v = if spec.kind == SpaceKind::Grand {
                grand_closure(&fs, &breaks, p, alpha, &cfg)?
            } else {
                small_closure(&fs, &breaks, p, alpha, &cfg)?
            };
            Ok(NormValue::plain(v))
        }
    }
}

/// Outcome of [`check_nontrivial`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Nontriviality {
    pub nontrivial: bool,
    pub reasons: Vec<String>,
}

/// Evaluates the finiteness conditions under which the space is intermediate; each
/// failed condition is listed. Divergent norms are answers, not errors.
pub fn check_nontrivial(spec: &SpaceSpec) -> Nontriviality {
    let mut reasons = Vec::new();
    if let Err(e) = spec.validate() {
        return Nontriviality { nontrivial: false, reasons: vec![e.to_string()] };
    }
    let cfg = QuadConfig::default();
    let ordered = spec.mode == IntervalMode::OrderedUnit;
    let m = spec.outer_measure.measure();
    let hi = if ordered { 0.0 } else { f64::INFINITY };
    let finite = |v: Result<f64>| v.map(|v| v.is_finite()).unwrap_or(false);
    let norm_of = |wt: &SlowlyVarying, lo: f64, hi: f64, e: &RISpaceSpec, meas: Measure| -> Result<f64> {
        weighted_norm_with(&|x| wt.eval_ln(x), &MeasuredInterval::from_ln(lo, hi, meas), e, &[0.0], &cfg)
    };
    // ‖b(t) ‖a‖_{F̃(t..)}‖ over (lo, hi) with the outer measure
    let nested = |b: &SlowlyVarying, a: &SlowlyVarying, e: &RISpaceSpec, f: &RISpaceSpec, lo: f64, hi: f64, inner: &dyn Fn(f64) -> (f64, f64)| {
        let v = |x: f64| {
            let (p, q) = inner(x);
            let n = norm_of(a, p, q, f, Measure::Homogeneous).unwrap_or(f64::INFINITY);
            if n == 0.0 { 0.0 } else { b.eval_ln(x) * n }
        };
        weighted_norm_with(&v, &MeasuredInterval::from_ln(lo, hi, m), e, &[0.0], &cfg)
    };
    let theta = spec.theta.unwrap_or(0.5);
    let interior = theta > 0.0 && theta < 1.0;
    match spec.kind {
        SpaceKind::Theta => {
            let b = &spec.weights.b.as_ref().unwrap().0;
            let e = spec.spaces.e.unwrap();
            if theta == 0.0 && !ordered && !finite(norm_of(b, 0.0, f64::INFINITY, &e, m)) {
                reasons.push("θ = 0 needs ‖b‖ over (1,∞) finite".into());
            }
            if theta == 1.0 && !finite(norm_of(b, f64::NEG_INFINITY, 0.0, &e, m)) {
                reasons.push("θ = 1 needs ‖b‖ over (0,1) finite".into());
            }
        }
        SpaceKind::R => {
            let b = &spec.weights.b.as_ref().unwrap().0;
            let a = &spec.weights.a.as_ref().unwrap().0;
            let (e, f) = (spec.spaces.e.unwrap(), spec.spaces.f.unwrap());
            if !finite(norm_of(b, f64::NEG_INFINITY, 0.0, &e, m)) {
                reasons.push("‖b‖ over (0,1) is infinite".into());
            }
            if theta == 0.0 && !ordered && !finite(nested(b, a, &e, &f, 0.0, f64::INFINITY, &|x| (x, f64::INFINITY))) {
                reasons.push("θ = 0 needs ‖b(t)‖a‖_F(t,∞)‖ over (1,∞) finite".into());
            }
            if theta == 1.0 {
                if !finite(nested(b, a, &e, &f, f64::NEG_INFINITY, 0.0, &|x| (x, 0.0))) {
                    reasons.push("θ = 1 needs ‖b(t)‖a‖_F(t,1)‖ over (0,1) finite".into());
                }
                let ab = a.mul(b);
                if !finite(norm_of(&ab, f64::NEG_INFINITY, 0.0, &e, m)) {
                    reasons.push("θ = 1 needs ‖ab‖ over (0,1) finite".into());
                }
            }
        }
        SpaceKind::L => {
            let b = &spec.weights.b.as_ref().unwrap().0;
            let a = &spec.weights.a.as_ref().unwrap().0;
            let (e, f) = (spec.spaces.e.unwrap(), spec.spaces.f.unwrap());
            if (interior || theta == 1.0) && !ordered && !finite(norm_of(b, 0.0, f64::INFINITY, &e, m)) {
                reasons.push("‖b‖ over (1,∞) is infinite".into());
            }
            if theta == 0.0 && !ordered && !finite(nested(b, a, &e, &f, 0.0, f64::INFINITY, &|x| (0.0, x))) {
                reasons.push("θ = 0 needs ‖b(t)‖a‖_F(1,t)‖ over (1,∞) finite".into());
            }
            if theta == 1.0 && !finite(nested(b, a, &e, &f, f64::NEG_INFINITY, 0.0, &|x| (f64::NEG_INFINITY, x))) {
                reasons.push("θ = 1 needs ‖b(t)‖a‖_F(0,t)‖ over (0,1) finite".into());
            }
        }
        SpaceKind::RL | SpaceKind::LR | SpaceKind::Grand | SpaceKind::Small => {}
    }
    if ordered && theta == 1.0 && matches!(spec.kind, SpaceKind::R | SpaceKind::L) {
        let a = &spec.weights.a.as_ref().unwrap().0;
        let f = spec.spaces.f.unwrap();
        if !finite(norm_of(a, f64::NEG_INFINITY, 0.0, &f, Measure::Homogeneous)) {
            reasons.push("ordered θ = 1 needs ‖a‖_F(0,1) finite".into());
        }
    }
    let _ = hi;
    Nontriviality { nontrivial: reasons.is_empty(), reasons }
}

/// Grand and small Lebesgue norms of f straight from f*, without K-functionals:
/// exact piecewise antiderivatives for step functions, quadrature otherwise.
pub fn grand_small_norms(f: &FunctionSample, p: f64, alpha: f64) -> Result<(NormValue, NormValue)> {
    if !(p > 1.0 && p.is_finite() && alpha > 0.0) {
        return Err(Error::InvalidArgument(format!("need 1 < p < ∞ and α > 0, got p={p}, α={alpha}")));
    }
    let cfg = QuadConfig::default();
    let r = rearrange(f)?;
    match &r.form {
        SampleForm::PiecewiseConstant { breaks, values } => {
            let (g, s) = step_grand_small(breaks, values, p, alpha, &cfg)?;
            Ok((NormValue::plain(g), NormValue::plain(s)))
        }
        form => {
            let fs = |x: f64| match form {
                SampleForm::Closure { f, .. } => f(x),
                _ => r.eval(x.exp()),
            };
            let g = grand_closure(&fs, &[], p, alpha, &cfg)?;
            let s = small_closure(&fs, &[], p, alpha, &cfg)?;
            Ok((NormValue::plain(g), NormValue::plain(s)))
        }
    }
}

fn step_grand_small(breaks: &[f64], values: &[f64], p: f64, alpha: f64, cfg: &QuadConfig) -> Result<(f64, f64)> {
    let n = values.len();
    let vp: Vec<f64> = values.iter().map(|v| v.abs().powf(p)).collect();
    // ∫_0^t f*^p and ∫_t^1 f*^p, summed piece by piece
    let below = |t: f64| -> f64 {
        (0..n).map(|i| vp[i] * (t.min(breaks[i + 1]) - breaks[i]).max(0.0)).sum()
    };
    let above = |t: f64| -> f64 {
        (0..n).map(|i| vp[i] * (breaks[i + 1] - t.max(breaks[i])).max(0.0)).sum()
    };
    let kinks: Vec<f64> = breaks.iter().filter(|&&b| b > 0.0 && b < 1.0).map(|b| b.ln()).collect();
    let g = sup_line(
        &|x: f64| ell_ln(x).powf(-alpha / p) * above(x.exp()).powf(1.0 / p),
        f64::NEG_INFINITY,
        0.0,
        &kinks,
        cfg,
    )?;
    let pp = p / (p - 1.0);
    let s = integrate_line(
        &|x: f64| {
            let m = below(x.exp());
            if m == 0.0 { 0.0 } else { ell_ln(x).powf(alpha / pp - 1.0) * m.powf(1.0 / p) }
        },
        f64::NEG_INFINITY,
        0.0,
        &kinks,
        cfg.x_cap,
        cfg,
    )?;
    Ok((g, s))
}

/// sup_{0<t<1} ℓ^{−α/p}(t) (∫_t^1 f*^p)^{1/p}, f* given in x = ln s.
fn grand_closure(fs: &dyn Fn(f64) -> f64, breaks: &[f64], p: f64, alpha: f64, cfg: &QuadConfig) -> Result<f64> {
    let fp = |y: f64| {
        let (v, e) = (fs(y).abs(), y.exp());
        if v == 0.0 || e == 0.0 { 0.0 } else { v.powf(p) * e }
    };
    let kinks: Vec<f64> = breaks.iter().copied().filter(|&b| b < 0.0).collect();
    let above = |x: f64| -> f64 {
        let anchor = x.max(-40.0);
        let ks: Vec<f64> = kinks.iter().copied().filter(|&b| b > anchor).collect();
        let near = integrate(&fp, anchor, 0.0, &ks, cfg);
        let far = integrate_span(&fp, x, anchor, -1.0, cfg);
        match (near, far) {
            (Ok(a), Ok(b)) => a + b,
            _ => f64::NAN,
        }
    };
    let v = sup_line(&|x: f64| ell_ln(x).powf(-alpha / p) * above(x).powf(1.0 / p), f64::NEG_INFINITY, 0.0, &kinks, cfg)?;
    if v.is_nan() {
        return Err(Error::QuadratureNonconvergent("grand norm inner integral failed".into()));
    }
    Ok(v)
}

/// ∫_0^1 ℓ^{α/p'−1}(t) (∫_0^t f*^p)^{1/p} dt/t, f* given in x = ln s.
fn small_closure(fs: &dyn Fn(f64) -> f64, breaks: &[f64], p: f64, alpha: f64, cfg: &QuadConfig) -> Result<f64> {
    let fp = |y: f64| {
        let (v, e) = (fs(y).abs(), y.exp());
        if v == 0.0 || e == 0.0 { 0.0 } else { v.powf(p) * e }
    };
    let kinks: Vec<f64> = breaks.iter().copied().filter(|&b| b < 0.0).collect();
    let below = |x: f64| -> f64 {
        let ks: Vec<f64> = kinks.iter().copied().filter(|&b| b < x).collect();
        integrate_line(&fp, f64::NEG_INFINITY, x, &ks, cfg.x_cap, cfg).unwrap_or(f64::NAN)
    };
    let pp = p / (p - 1.0);
    let v = integrate_line(
        &|x: f64| {
            let m = below(x);
            if m == 0.0 { 0.0 } else { ell_ln(x).powf(alpha / pp - 1.0) * m.powf(1.0 / p) }
        },
        f64::NEG_INFINITY,
        0.0,
        &kinks,
        cfg.x_cap,
        cfg,
    )?;
    if v.is_nan() {
        return Err(Error::QuadratureNonconvergent("small norm inner integral failed".into()));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kcalc::{k_functional, synthetic_kprofile, SyntheticSpec};
    use crate::registry::{identity_function, log_function};

    fn min1t() -> KProfile {
        synthetic_kprofile(&SyntheticSpec::Min1t).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
        let r = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let c = b - r * (b - a);
            let d = a + r * (b - a);
            if f(c) > f(d) { b = d } else { a = c }
        }
        f(0.5 * (a + b))
    }

    #[test]
    fn theta_closed_forms() {
        let one = SlowlyVarying::constant(1.0);
        let v = norm_theta(&min1t(), &SpaceSpec::theta(0.5, &one, RISpaceSpec::lq(2.0))).unwrap().value;
        assert!(rel(v, 2f64.sqrt()) < 1e-10, "{v}");
        let v = norm_theta(&min1t(), &SpaceSpec::theta(0.0, &one, RISpaceSpec::linf())).unwrap().value;
        assert!(rel(v, 1.0) < 1e-9, "{v}");
    }

    #[test]
    fn theta_ordered_matches_dense_trapezoid() {
        // K from f(x) = x: f* = 1 − s, K(t) = t − t²/2; θ = 1/2, b = ℓ, L2 over (0,1).
        let k = k_functional(&identity_function()).unwrap();
        let spec = SpaceSpec::theta(0.5, &SlowlyVarying::ell(), RISpaceSpec::lq(2.0)).ordered();
        let v = norm_theta(&k, &spec).unwrap().value;
        let n = 400_000;
        let (a, b) = (-60.0f64, 0.0f64);
        let h = (b - a) / n as f64;
        let g = |x: f64| {
            let t = x.exp();
            let kk = t - t * t / 2.0;
            (ell_ln(x) * kk / t.sqrt()).powi(2)
        };
        let mut s = 0.5 * (g(a) + g(b));
        for i in 1..n {
            s += g(a + i as f64 * h);
        }
        let want = (s * h).sqrt();
        assert!(rel(v, want) < 1e-6, "{v} {want}");
    }

    #[test]
    fn r_and_l_sup_examples() {
        let one = SlowlyVarying::constant(1.0);
        let g = GridConfig { per_decade: 128, x_reach: 1e4 };
        let spec = SpaceSpec::r(0.3, &one, RISpaceSpec::linf(), &one, RISpaceSpec::linf()).with_grid(g);
        let v = norm_r(&min1t(), &spec).unwrap().value;
        assert!(rel(v, 1.0) < 1e-6, "{v}");
        let spec = SpaceSpec::l(0.3, &one, RISpaceSpec::linf(), &one, RISpaceSpec::linf()).with_grid(g);
        let v = norm_l(&min1t(), &spec).unwrap().value;
        assert!(rel(v, 1.0) < 1e-6, "{v}");
    }

    #[test]
    fn grand_of_constant_by_golden_section() {
        for &(p, alpha) in &[(2.0, 1.0), (3.0, 2.0)] {
            let (g, _) = grand_small_norms(&FunctionSample::constant(1.0), p, alpha).unwrap();
            let want = golden_max(|x| ell_ln(x).powf(-alpha / p) * (1.0 - x.exp()).powf(1.0 / p), -50.0, 0.0);
            assert!(rel(g.value, want) < 1e-8, "{} {want}", g.value);
        }
        let s0 = 0.4;
        let (g, _) = grand_small_norms(&FunctionSample::indicator(0.0, s0).unwrap(), 2.0, 1.0).unwrap();
        let want = golden_max(|x| ell_ln(x).powf(-0.5) * (s0 - x.exp()).max(0.0).sqrt(), -50.0, s0.ln());
        assert!(rel(g.value, want) < 1e-8);
    }

    #[test]
    fn small_of_indicator_two_ways() {
        // f = χ_(0,1/2): the step path uses exact antiderivatives, the closure path quadrature.
        let f = FunctionSample::indicator(0.0, 0.5).unwrap();
        let (_, s1) = grand_small_norms(&f, 2.0, 1.0).unwrap();
        let fs = |x: f64| if x < -(2f64.ln()) { 1.0 } else { 0.0 };
        let s2 = small_closure(&fs, &[-(2f64.ln())], 2.0, 1.0, &QuadConfig::default()).unwrap();
        assert!(rel(s1.value, s2) < 1e-6, "{} {s2}", s1.value);
    }

    #[test]
    fn identification_through_nested_engine() {
        for f in [FunctionSample::constant(1.0), FunctionSample::random_piecewise(3), log_function()] {
            let k = k_functional(&f).unwrap();
            let (g, s) = grand_small_norms(&f, 2.0, 1.0).unwrap();
            let r = norm_r(&k, &SpaceSpec::grand_as_r(2.0, 1.0)).unwrap().value;
            let l = norm_l(&k, &SpaceSpec::small_as_l(2.0, 1.0)).unwrap().value;
            assert!(rel(r, g.value) < 1e-4, "{} grand {r} {}", f.name, g.value);
            assert!(rel(l, s.value) < 1e-4, "{} small {l} {}", f.name, s.value);
        }
    }

    #[test]
    fn three_level_collapses_with_sup_middle() {
        // With F = L∞ and b ≡ 1 the middle sup over (0,u) of the (t,u) norm is the (0,u) norm.
        let one = SlowlyVarying::constant(1.0);
        let c = SlowlyVarying::broken_log(-1.0, -1.0);
        let g = GridConfig { per_decade: 128, x_reach: 1e4 };
        let k = min1t();
        let rl = SpaceSpec::rl(0.5, &c, RISpaceSpec::lq(2.0), &one, RISpaceSpec::linf(), &one, RISpaceSpec::lq(2.0)).with_grid(g);
        let l = SpaceSpec::l(0.5, &c, RISpaceSpec::lq(2.0), &one, RISpaceSpec::lq(2.0)).hat().with_grid(g);
        let v1 = norm_rl(&k, &rl).unwrap().value;
        let v2 = norm_l(&k, &l).unwrap().value;
        assert!(rel(v1, v2) < 1e-3, "{v1} {v2}");
        let lr = SpaceSpec::lr(0.5, &c, RISpaceSpec::lq(2.0), &one, RISpaceSpec::linf(), &one, RISpaceSpec::lq(2.0)).with_grid(g);
        let r = SpaceSpec::r(0.5, &c, RISpaceSpec::lq(2.0), &one, RISpaceSpec::lq(2.0)).hat().with_grid(g);
        let v1 = norm_lr(&k, &lr).unwrap().value;
        let v2 = norm_r(&k, &r).unwrap().value;
        assert!(rel(v1, v2) < 1e-3, "{v1} {v2}");
    }

    #[test]
    fn nontriviality_conditions() {
        let one = SlowlyVarying::constant(1.0);
        assert!(check_nontrivial(&SpaceSpec::theta(0.5, &one, RISpaceSpec::linf())).nontrivial);
        let t = check_nontrivial(&SpaceSpec::theta(0.0, &one, RISpaceSpec::lq(1.0)));
        assert!(!t.nontrivial && t.reasons[0].contains("(1,∞)"));
        // ℛ, θ = 0, b = ℓ^{(0,−2)}, a ≡ 1, F = L∞, E = L1: ‖b‖ over (0,1) in L1(dt/t) diverges.
        let spec = SpaceSpec::r(0.0, &SlowlyVarying::broken_log(0.0, -2.0), RISpaceSpec::lq(1.0), &one, RISpaceSpec::linf());
        let t = check_nontrivial(&spec);
        assert!(!t.nontrivial);
        assert!(t.reasons.iter().any(|r| r.contains("(0,1)")));
        // ℓ^{(−2,−2)} passes both conditions.
        let spec = SpaceSpec::r(0.0, &SlowlyVarying::ell_pow(-2.0), RISpaceSpec::lq(1.0), &one, RISpaceSpec::linf());
        assert!(check_nontrivial(&spec).nontrivial);
    }

    #[test]
    fn compact_and_json_forms() {
        let s: SpaceSpec = "theta:0.5,b=const,E=Lq:2".parse().unwrap();
        assert_eq!(s.kind, SpaceKind::Theta);
        assert_eq!(s.theta, Some(0.5));
        let s: SpaceSpec = "R:0.5,b=broken_log(1,-1),E=Lq:inf,a=const,F=Lq:2,mode=ordered".parse().unwrap();
        assert_eq!(s.mode, IntervalMode::OrderedUnit);
        let json = serde_json::to_string(&s).unwrap();
        assert!(json.contains("\"b\":\"broken_log(1,-1)\""), "{json}");
        let back: SpaceSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back.spaces.e, Some(RISpaceSpec::linf()));
        let g: SpaceSpec = r#"{"kind":"grand","p":2,"alpha":1}"#.parse().unwrap();
        assert_eq!(g.mode, IntervalMode::FullLine);
        assert!("R:0.5,b=ell".parse::<SpaceSpec>().is_err());
        assert!("theta:0.5,b=ell,E=Lq:2,zz=1".parse::<SpaceSpec>().is_err());
        assert!("grand:p=0.5,alpha=1".parse::<SpaceSpec>().is_err());
    }
}
