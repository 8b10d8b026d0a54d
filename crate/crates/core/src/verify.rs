//! Bounded-ratio experiments: each one computes both sides of an equivalence (or of a
//! one-sided estimate) over a sweep and returns a [`RatioReport`].

use crate::dyadic::{discrete_hat_norm, make_grid, DiscreteSeq};
use crate::error::{Error, Result};
use crate::kcalc::{k_functional, synthetic_kprofile, FunctionSample, KProfile, SyntheticSpec};
use crate::nested::{build_nodes, middle_above, middle_below, outer, GridConfig, Profile, Tail};
use crate::norms::{
    fundamental_function, sv_norm, sv_norm_scaling_with, weighted_norm_with, Measure, MeasuredInterval,
    RISpaceSpec,
};
use crate::quad::{integrate_line, sup_line, QuadConfig};
use crate::registry::identity_function;
use crate::report::{Band, RatioReport, DEFAULT_WIDTH};
use crate::spaces::{norm_l_with, norm_lr_with, norm_r_with, norm_rl_with, norm_theta_with, SpaceSpec};
use crate::svfun::{almost_increasing, ell_ln, AssocIndices, Domain, IndexConfig, LogFn, PositiveFn, SlowlyVarying, ALMOST_MONOTONE_C};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

const INF: f64 = f64::INFINITY;
const NEG_INF: f64 = f64::NEG_INFINITY;

/// Log-spaced sweep points in t.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    #[serde(default)]
    pub scale: Scale,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    #[default]
    Log,
}

impl LogGrid {
    pub fn new(min: f64, max: f64, points: usize) -> Self {
        LogGrid { min, max, points, scale: Scale::Log }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min > 0.0 && self.max > self.min && self.max.is_finite()) {
            return Err(Error::InvalidArgument(format!("grid needs 0 < min < max, got [{}, {}]", self.min, self.max)));
        }
        if self.points < 8 {
            return Err(Error::InvalidArgument(format!("grid needs at least 8 points, got {}", self.points)));
        }
        Ok(())
    }

    /// ln t at each point.
    pub fn ln_points(&self) -> Vec<f64> {
        let (a, b) = (self.min.ln(), self.max.ln());
        let n = self.points.max(2) - 1;
        (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
    }

    /// The grid with twice the log-span at the same density. Grids ending at or below
    /// t = 1 extend towards 0 only; the others extend symmetrically.
    pub fn extended(&self) -> LogGrid {
        let (a, b) = (self.min.ln(), self.max.ln());
        let span = b - a;
        let (na, nb) = if b <= 0.0 { (a - span, b) } else { (0.5 * (a + b) - span, 0.5 * (a + b) + span) };
        LogGrid { min: na.exp(), max: nb.exp(), points: 2 * self.points - 1, scale: self.scale }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// Norms over (0,t).
    Zero,
    /// Norms over (t,∞).
    Infinity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HardySide {
    /// b(t) ∫₀ᵗ f
    Cumulative,
    /// b(t) ∫ₜ^∞ f
    Tail,
}

/// Which of two mirrored statements: (i) nests over (0,u), (ii) over (u,∞).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairSide {
    #[serde(rename = "i")]
    I,
    #[serde(rename = "ii")]
    Ii,
}

/// Test functions swept over the grid: for a point t, the log-bump is
/// s⁻¹χ_(t,et)(s) in the Hardy experiments and χ_(t,et)(s) in the others.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BumpFamily {
    #[default]
    LogBumps,
    Zero,
}

fn assoc(b: &SlowlyVarying) -> Result<AssocIndices> {
    b.associated_indices(&IndexConfig::default())
}

fn hyp(ok: bool, what: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::HypothesisViolated(what()))
    }
}

fn exps(xs: &[f64]) -> Vec<f64> {
    xs.iter().map(|x| x.exp()).collect()
}

fn unzip(v: Vec<(f64, f64)>) -> (Vec<f64>, Vec<f64>) {
    v.into_iter().unzip()
}

fn report(id: &str, grid: Vec<f64>, pairs: Vec<(f64, f64)>, one_sided: bool) -> RatioReport {
    let (lhs, rhs) = unzip(pairs);
    let band = if one_sided { Band::upper(DEFAULT_WIDTH) } else { Band::UNBOUNDED };
    RatioReport::new(id, grid, lhs, rhs, band, DEFAULT_WIDTH, one_sided)
}

/// ‖b‖_{Ẽ(0,t)} (or (t,∞)) against b(t) φ_E(ℓ(t)).
pub fn verify_limiting_estimate(b: &SlowlyVarying, e: &RISpaceSpec, side: Side, grid: &LogGrid) -> Result<RatioReport> {
    let ix = assoc(b)?;
    let r = e.inv_q();
    match side {
        Side::Zero => hyp(ix.infinity.rho < r && r < ix.zero.pi, || {
            format!("need ρ(B∞) = {} < 1/q = {r} < π(B₀) = {}", ix.infinity.rho, ix.zero.pi)
        })?,
        Side::Infinity => hyp(ix.zero.rho < r && r < ix.infinity.pi, || {
            format!("need ρ(B₀) = {} < 1/q = {r} < π(B∞) = {}", ix.zero.rho, ix.infinity.pi)
        })?,
    }
    let xs = grid.ln_points();
    let cfg = QuadConfig::default();
    let pairs: Result<Vec<(f64, f64)>> = xs
        .par_iter()
        .map(|&x| {
            let lhs = match side {
                Side::Zero => sv_norm(b, NEG_INF, x, Measure::Homogeneous, e, &cfg)?,
                Side::Infinity => sv_norm(b, x, INF, Measure::Homogeneous, e, &cfg)?,
            };
            Ok((lhs, b.eval_ln(x) * fundamental_function(e, ell_ln(x))))
        })
        .collect();
    Ok(report("limiting_estimate", exps(&xs), pairs?, false))
}

/// ‖s^α b(s)‖ over (0,t) for α > 0, over (t,∞) for α < 0, against t^α b(t).
pub fn verify_sv_scaling(b: &SlowlyVarying, alpha: f64, e: &RISpaceSpec, grid: &LogGrid) -> Result<RatioReport> {
    if alpha == 0.0 {
        return Err(Error::InvalidArgument("α must be nonzero".into()));
    }
    let xs = grid.ln_points();
    let cfg = QuadConfig::default();
    let pairs: Result<Vec<(f64, f64)>> =
        xs.par_iter().map(|&x| sv_norm_scaling_with(b, alpha, e, x.exp(), &cfg)).collect();
    Ok(report("sv_scaling", exps(&xs), pairs?, false))
}

/// A positive function for [`verify_sv_embedding`]: `power(r)` is s^r,
/// `shifted_power(r)` is (1+s)^r, anything else is a weight expression.
pub fn parse_positive(s: &str) -> Result<PositiveFn> {
    let s = s.trim();
    let arg = |head: &str| -> Option<Result<f64>> {
        let inner = s.strip_prefix(head)?.strip_prefix('(')?.strip_suffix(')')?;
        Some(inner.trim().parse::<f64>().map_err(|_| Error::Parse(format!("{head}: bad exponent in '{s}'"))))
    };
    if let Some(r) = arg("power") {
        let r = r?;
        return Ok(PositiveFn::new(s, Domain::FullLine, Arc::new(move |x: f64| (r * x).exp())));
    }
    if let Some(r) = arg("shifted_power") {
        let r = r?;
        return Ok(PositiveFn::new(s, Domain::FullLine, Arc::new(move |x: f64| (r * x.exp().ln_1p()).exp())));
    }
    Ok(crate::registry::parse_weight(s)?.as_positive())
}

/// One-sided: ‖b φ‖_{Ẽ(0,t)} against ∫₀ᵗ b φ φ_E(ℓ) ds/(sℓ) (or the (t,∞) mirror).
pub fn verify_sv_embedding(
    b: &SlowlyVarying,
    phi: &PositiveFn,
    e: &RISpaceSpec,
    side: Side,
    grid: &LogGrid,
) -> Result<RatioReport> {
    let ix = assoc(b)?;
    let probe: Vec<f64> = (0..=400).map(|i| -100.0 + 0.5 * i as f64).collect();
    match side {
        Side::Zero => {
            hyp(ix.zero.pi > 0.0, || format!("need π(B₀) = {} > 0", ix.zero.pi))?;
            hyp(almost_increasing(&|x| 1.0 / phi.eval_ln(x), &probe, ALMOST_MONOTONE_C), || {
                format!("{} is not almost decreasing", phi.name())
            })?;
        }
        Side::Infinity => {
            hyp(ix.infinity.pi > 0.0, || format!("need π(B∞) = {} > 0", ix.infinity.pi))?;
            hyp(almost_increasing(&|x| phi.eval_ln(x), &probe, ALMOST_MONOTONE_C), || {
                format!("{} is not almost increasing", phi.name())
            })?;
        }
    }
    let r = e.inv_q();
    let xs = grid.ln_points();
    let cfg = QuadConfig::default();
    let bp = |x: f64| b.eval_ln(x) * phi.eval_ln(x);
    let dens = |x: f64| {
        let v = bp(x);
        if v == 0.0 { 0.0 } else { v * ell_ln(x).powf(r - 1.0) }
    };
    let pairs: Result<Vec<(f64, f64)>> = xs
        .par_iter()
        .map(|&x| {
            let (lo, hi) = match side {
                Side::Zero => (NEG_INF, x),
                Side::Infinity => (x, INF),
            };
            let iv = MeasuredInterval::from_ln(lo, hi, Measure::Homogeneous);
            let lhs = weighted_norm_with(&bp, &iv, e, &[0.0], &cfg)?;
            let rhs = integrate_line(&dens, lo, hi, &[0.0], cfg.x_cap, &cfg)?;
            Ok((lhs, rhs))
        })
        .collect();
    Ok(report("sv_embedding", exps(&xs), pairs?, true))
}

/// One-sided limiting Hardy inequality over the log-bump family
/// f_t(s) = s⁻¹χ_(t,et)(s): ‖b(u) ∫₀ᵘ f_t‖_Ê against ‖u b f_t ℓ‖_Ê (or the tail mirror).
/// `force` runs past the hypothesis gate, for negative controls.
pub fn verify_limit_hardy(
    b: &SlowlyVarying,
    e: &RISpaceSpec,
    side: HardySide,
    family: BumpFamily,
    grid: &LogGrid,
    force: bool,
) -> Result<RatioReport> {
    let ix = assoc(b)?;
    let gate = match side {
        HardySide::Cumulative => hyp(ix.zero.rho < 0.0 && 0.0 < ix.infinity.pi, || {
            format!("need ρ(B₀) = {} < 0 < π(B∞) = {}", ix.zero.rho, ix.infinity.pi)
        }),
        HardySide::Tail => hyp(ix.infinity.rho < 0.0 && 0.0 < ix.zero.pi, || {
            format!("need ρ(B∞) = {} < 0 < π(B₀) = {}", ix.infinity.rho, ix.zero.pi)
        }),
    };
    let mut forced_note = None;
    if let Err(err) = gate {
        if !force {
            return Err(err);
        }
        forced_note = Some(format!("forced past hypothesis gate ({err})"));
    }
    let xs = grid.ln_points();
    let cfg = QuadConfig::default();
    let pairs: Result<Vec<(f64, f64)>> = xs
        .par_iter()
        .map(|&xt| {
            if family == BumpFamily::Zero {
                return Ok((0.0, 0.0));
            }
            let (s0, s1) = (xt, xt + 1.0);
            let breaks = [s0, s1, 0.0];
            let lhs = match side {
                HardySide::Cumulative => {
                    let g = |y: f64| b.eval_ln(y) * (y - s0).clamp(0.0, 1.0);
                    weighted_norm_with(&g, &MeasuredInterval::from_ln(s0, INF, Measure::LogHomogeneous), e, &breaks, &cfg)?
                }
                HardySide::Tail => {
                    let g = |y: f64| b.eval_ln(y) * (s1 - y).clamp(0.0, 1.0);
                    weighted_norm_with(&g, &MeasuredInterval::from_ln(NEG_INF, s1, Measure::LogHomogeneous), e, &breaks, &cfg)?
                }
            };
            let g = |y: f64| b.eval_ln(y) * ell_ln(y);
            let rhs = weighted_norm_with(&g, &MeasuredInterval::from_ln(s0, s1, Measure::LogHomogeneous), e, &breaks, &cfg)?;
            Ok((lhs, rhs))
        })
        .collect();
    let mut rep = report("limit_hardy", exps(&xs), pairs?, true);
    if let Some(n) = forced_note {
        rep = rep.note(n);
    }
    Ok(rep)
}

/// ln of a positive function tabulated on grid nodes and interpolated linearly in the
/// node coordinate; outside the table the function itself is called.
struct LogTable {
    xs: Vec<f64>,
    ln: Vec<f64>,
    exact: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl LogTable {
    fn new(exact: Arc<dyn Fn(f64) -> f64 + Send + Sync>, lo: f64, hi: f64, cfg: &GridConfig) -> Self {
        let xs = build_nodes(lo, hi, cfg, &[]);
        let ln: Vec<f64> = xs.par_iter().map(|&x| exact(x).ln()).collect();
        LogTable { xs, ln, exact }
    }

    fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if !(x >= self.xs[0] && x <= self.xs[n - 1]) {
            return (self.exact)(x);
        }
        let i = self.xs.partition_point(|&v| v <= x).clamp(1, n - 1);
        let (x0, x1) = (self.xs[i - 1], self.xs[i]);
        let (y0, y1) = (self.ln[i - 1], self.ln[i]);
        if !(y0.is_finite() && y1.is_finite()) {
            return (self.exact)(x);
        }
        let s = if x1 > x0 { (x - x0) / (x1 - x0) } else { 0.0 };
        (y0 + s * (y1 - y0)).exp()
    }
}

/// x ↦ ‖a‖_{F̃(0,e^x)} (below) or ‖a‖_{F̃(e^x,∞)}, tabulated.
fn weight_norm_table(a: &SlowlyVarying, f: &RISpaceSpec, below: bool, lo: f64, hi: f64, cfg: &GridConfig) -> LogTable {
    let (a, f) = (a.clone(), *f);
    let qcfg = QuadConfig::default();
    let exact: Arc<dyn Fn(f64) -> f64 + Send + Sync> = Arc::new(move |x: f64| {
        let r = if below {
            sv_norm(&a, lo, x, Measure::Homogeneous, &f, &qcfg)
        } else {
            sv_norm(&a, x, hi, Measure::Homogeneous, &f, &qcfg)
        };
        r.unwrap_or(f64::NAN)
    });
    LogTable::new(exact, lo, hi, cfg)
}

/// Default resolution of the nested experiments.
pub fn experiment_grid() -> GridConfig {
    GridConfig { per_decade: 64, x_reach: 1e6 }
}

fn bump_profile(xt: f64, g: &RISpaceSpec, gcfg: &GridConfig, cfg: &QuadConfig) -> Result<Profile> {
    let (s0, s1) = (xt, xt + 1.0);
    let h = move |x: f64| if x >= s0 && x < s1 { 1.0 } else { 0.0 };
    let breaks = [s0, s1];
    let nodes = build_nodes(NEG_INF, INF, gcfg, &breaks);
    Profile::build(&h, &breaks, NEG_INF, INF, g, nodes, cfg)
}

fn ends(v: &[f64]) -> (Tail<'static>, Tail<'static>) {
    (Tail::Const(v[0]), Tail::Const(v[v.len() - 1]))
}

fn gate_pair(a: &SlowlyVarying, b: &SlowlyVarying, f: &RISpaceSpec, side: PairSide) -> Result<()> {
    let (ia, ib) = (assoc(a)?, assoc(b)?);
    let r = f.inv_q();
    match side {
        PairSide::I => {
            hyp(ia.infinity.rho < r && r < ia.zero.pi, || {
                format!("need ρ(A∞) = {} < 1/q_F = {r} < π(A₀) = {}", ia.infinity.rho, ia.zero.pi)
            })?;
            hyp(ib.zero.rho < 0.0 && 0.0 < ib.infinity.pi, || {
                format!("need ρ(B₀) = {} < 0 < π(B∞) = {}", ib.zero.rho, ib.infinity.pi)
            })
        }
        PairSide::Ii => {
            hyp(ia.zero.rho < r && r < ia.infinity.pi, || {
                format!("need ρ(A₀) = {} < 1/q_F = {r} < π(A∞) = {}", ia.zero.rho, ia.infinity.pi)
            })?;
            hyp(ib.infinity.rho < 0.0 && 0.0 < ib.zero.pi, || {
                format!("need ρ(B∞) = {} < 0 < π(B₀) = {}", ib.infinity.rho, ib.zero.pi)
            })
        }
    }
}

/// Parameters shared by the nested two-weight experiments.
#[derive(Clone, Debug)]
pub struct NestedSetup {
    pub a: SlowlyVarying,
    pub b: SlowlyVarying,
    pub e: RISpaceSpec,
    pub f: RISpaceSpec,
    pub g: RISpaceSpec,
    pub side: PairSide,
    pub family: BumpFamily,
    pub resolution: GridConfig,
}

/// ‖b(u)‖f‖_{G̃(0,u)}‖_Ê against ‖b(u)/‖a‖_{F̃(0,u)} · ‖a(t)‖f‖_{G̃(t,u)}‖_{F̃(0,u)}‖_Ê
/// (side i) or the (u,∞) mirror (side ii), over f = χ_(t,et).
pub fn verify_key_equivalence(s: &NestedSetup, grid: &LogGrid) -> Result<RatioReport> {
    gate_pair(&s.a, &s.b, &s.f, s.side)?;
    let cfg = QuadConfig::default();
    let below = s.side == PairSide::I;
    let an = weight_norm_table(&s.a, &s.f, below, NEG_INF, INF, &s.resolution);
    let xs = grid.ln_points();
    let mut pairs = Vec::with_capacity(xs.len());
    for &xt in &xs {
        if s.family == BumpFamily::Zero {
            pairs.push((0.0, 0.0));
            continue;
        }
        let prof = bump_profile(xt, &s.g, &s.resolution, &cfg)?;
        let n = prof.len();
        let plain: Vec<f64> =
            if below { (0..n).map(|j| prof.from_lo(j)).collect() } else { (0..n).map(|j| prof.to_hi(j)).collect() };
        let bw = |x: f64| s.b.eval_ln(x);
        let (l, r) = ends(&plain);
        let lhs = outer(&prof.xs, &plain, NEG_INF, INF, l, r, &bw, &s.e, Measure::LogHomogeneous, &cfg)?;
        let aw = |x: f64| s.a.eval_ln(x);
        let mid = if below { middle_below(&prof, &aw, &s.f, &cfg)? } else { middle_above(&prof, &aw, &s.f, &cfg)? };
        let cw = |x: f64| {
            let d = an.eval(x);
            if d > 0.0 && d.is_finite() { s.b.eval_ln(x) / d } else { 0.0 }
        };
        let (l, r) = ends(&mid);
        let rhs = outer(&prof.xs, &mid, NEG_INF, INF, l, r, &cw, &s.e, Measure::LogHomogeneous, &cfg)?;
        pairs.push((lhs, rhs));
    }
    let mut rep = report("key_equivalence", exps(&xs), pairs, false);
    // The "≳" direction holds with constant 1: ‖a(t)‖f‖_{(t,u)}‖_{(0,u)} ≤ ‖a‖_{(0,u)} ‖f‖_{(0,u)}.
    let worst = rep.ratios().iter().filter(|q| q.is_finite()).fold(INF, |m: f64, &q| m.min(q));
    if worst < 1.0 - 1e-3 {
        rep = rep.fail(format!("lhs/rhs = {worst} below 1 in the direction that holds with constant 1"));
    }
    Ok(rep)
}

/// The triple norm ‖b(u)‖a(t)‖f‖_{G̃(t,u)}‖_{F̃(0,u)}‖_Ê against the λ_k sum
/// ‖(b(λ_k)‖a‖_{F̃(0,λ_k)}‖f‖_{G̃(I_k)})‖_{dÊ} (side i, two-sided), or the (ℒ,ℛ)
/// version against ‖a‖_{F̃(λ_k,∞)} (side ii, one-sided).
pub fn verify_discrete_equivalence(s: &NestedSetup, grid: &LogGrid) -> Result<RatioReport> {
    gate_pair(&s.a, &s.b, &s.f, s.side)?;
    let cfg = QuadConfig::default();
    let below = s.side == PairSide::I;
    let lg = make_grid(-30, 30)?;
    let ks: Vec<i64> = lg.ks().collect();
    let a_norm: Vec<f64> = ks
        .par_iter()
        .map(|&k| {
            let x = lg.ln_lambda(k);
            if below {
                sv_norm(&s.a, NEG_INF, x, Measure::Homogeneous, &s.f, &cfg)
            } else {
                sv_norm(&s.a, x, INF, Measure::Homogeneous, &s.f, &cfg)
            }
        })
        .collect::<Result<_>>()?;
    let b_at: Vec<f64> = ks.iter().map(|&k| s.b.eval_ln(lg.ln_lambda(k))).collect();
    let xs = grid.ln_points();
    let mut pairs = Vec::with_capacity(xs.len());
    for &xt in &xs {
        if s.family == BumpFamily::Zero {
            pairs.push((0.0, 0.0));
            continue;
        }
        let prof = bump_profile(xt, &s.g, &s.resolution, &cfg)?;
        let aw = |x: f64| s.a.eval_ln(x);
        let mid = if below { middle_below(&prof, &aw, &s.f, &cfg)? } else { middle_above(&prof, &aw, &s.f, &cfg)? };
        let bw = |x: f64| s.b.eval_ln(x);
        let (l, r) = ends(&mid);
        let lhs = outer(&prof.xs, &mid, NEG_INF, INF, l, r, &bw, &s.e, Measure::LogHomogeneous, &cfg)?;
        let seq: Vec<f64> = ks
            .iter()
            .enumerate()
            .map(|(i, &k)| {
                let (p, q) = lg.interval_ln(k);
                let overlap = (q.min(xt + 1.0) - p.max(xt)).max(0.0);
                let fk = if overlap == 0.0 {
                    0.0
                } else if s.g.is_sup() {
                    1.0
                } else {
                    overlap.powf(s.g.inv_q())
                };
                if fk == 0.0 { 0.0 } else { b_at[i] * a_norm[i] * fk }
            })
            .collect();
        pairs.push((lhs, discrete_hat_norm(&DiscreteSeq::new(ks[0], seq), &s.e, &lg)));
    }
    let mut rep = report("discrete_equivalence", exps(&xs), pairs, !below);
    if !below {
        rep = rep.note("one-sided: only the upper estimate is claimed");
    }
    Ok(rep)
}

/// A named K-profile in the function corpus.
#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub name: String,
    pub profile: KProfile,
}

/// The twelve-member corpus. `seed` shifts the random members: piecewise seeds
/// seed+1..=seed+7 and the concave profile's seed+7.
pub fn default_corpus(seed: u64) -> Result<Vec<CorpusEntry>> {
    let mut out = Vec::new();
    let mut push = |name: String, profile: KProfile| out.push(CorpusEntry { name, profile });
    push("indicator(0.3,0.7)".into(), k_functional(&FunctionSample::indicator(0.3, 0.7)?)?);
    push("x".into(), k_functional(&identity_function())?);
    for s in 1..=7 {
        push(format!("piecewise(seed={})", seed + s), k_functional(&FunctionSample::random_piecewise(seed + s))?);
    }
    push("min1t".into(), synthetic_kprofile(&SyntheticSpec::Min1t)?);
    push(
        format!("random_concave(20,{})", seed + 7),
        synthetic_kprofile(&SyntheticSpec::RandomConcave { knots: 20, seed: seed + 7 })?,
    );
    push("log".into(), synthetic_kprofile(&SyntheticSpec::Power { sigma: 1.0, gamma: 1.0 })?);
    Ok(out)
}

fn corpus_grid(corpus: &[CorpusEntry]) -> Vec<f64> {
    (0..corpus.len()).map(|i| i as f64).collect()
}

/// Parameters of the three-weight identification.
#[derive(Clone, Debug)]
pub struct ThreeWeightSetup {
    pub theta: f64,
    pub a: SlowlyVarying,
    pub b: SlowlyVarying,
    pub c: SlowlyVarying,
    pub e: RISpaceSpec,
    pub f: RISpaceSpec,
    pub g: RISpaceSpec,
    pub side: PairSide,
    pub resolution: GridConfig,
}

/// (ℛ,ℒ) norm with d = c/‖b‖_{F̃(0,u)} against the ℒ norm with weight c over the
/// corpus (side i); side ii compares (ℒ,ℛ) with d = c/‖b‖_{F̃(u,∞)} and ℛ.
pub fn verify_three_weight_identity(s: &ThreeWeightSetup, corpus: &[CorpusEntry]) -> Result<RatioReport> {
    let (ib, ic) = (assoc(&s.b)?, assoc(&s.c)?);
    let r = s.f.inv_q();
    match s.side {
        PairSide::I => {
            hyp(ib.infinity.rho < r && r < ib.zero.pi, || {
                format!("need ρ(B∞) = {} < 1/q_F = {r} < π(B₀) = {}", ib.infinity.rho, ib.zero.pi)
            })?;
            hyp(ic.zero.rho < 0.0 && 0.0 < ic.infinity.pi, || {
                format!("need ρ(C₀) = {} < 0 < π(C∞) = {}", ic.zero.rho, ic.infinity.pi)
            })?;
        }
        PairSide::Ii => {
            hyp(ib.zero.rho < r && r < ib.infinity.pi, || {
                format!("need ρ(B₀) = {} < 1/q_F = {r} < π(B∞) = {}", ib.zero.rho, ib.infinity.pi)
            })?;
            hyp(ic.infinity.rho < 0.0 && 0.0 < ic.zero.pi, || {
                format!("need ρ(C∞) = {} < 0 < π(C₀) = {}", ic.infinity.rho, ic.zero.pi)
            })?;
        }
    }
    let below = s.side == PairSide::I;
    let tab = Arc::new(weight_norm_table(&s.b, &s.f, below, NEG_INF, INF, &s.resolution));
    let c = s.c.clone();
    let d_fn: LogFn = Arc::new(move |x: f64| c.eval_ln(x) / tab.eval(x));
    let d = SlowlyVarying::from_fn(format!("{}/norm({})", s.c.name(), s.b.name()), Domain::FullLine, d_fn);
    let cfg = QuadConfig::default();
    let (three, two) = if below {
        (
            SpaceSpec::rl(s.theta, &d, s.e, &s.b, s.f, &s.a, s.g),
            SpaceSpec::l(s.theta, &s.c, s.e, &s.a, s.g).hat(),
        )
    } else {
        (
            SpaceSpec::lr(s.theta, &d, s.e, &s.b, s.f, &s.a, s.g),
            SpaceSpec::r(s.theta, &s.c, s.e, &s.a, s.g).hat(),
        )
    };
    let (three, two) = (three.with_grid(s.resolution), two.with_grid(s.resolution));
    let mut pairs = Vec::with_capacity(corpus.len());
    for ce in corpus {
        let k = &ce.profile;
        let lhs = if below { norm_rl_with(k, &three, &cfg)? } else { norm_lr_with(k, &three, &cfg)? };
        let rhs = if below { norm_l_with(k, &two, &cfg)? } else { norm_r_with(k, &two, &cfg)? };
        pairs.push((lhs.value, rhs.value));
    }
    Ok(report("three_weight_identity", corpus_grid(corpus), pairs, false))
}

/// Parameters of the Holmstedt-type formula check.
#[derive(Clone, Debug)]
pub struct HolmstedtSetup {
    pub theta: f64,
    pub b0: SlowlyVarying,
    pub b1: SlowlyVarying,
    pub a: SlowlyVarying,
    pub e0: RISpaceSpec,
    pub e1: RISpaceSpec,
    pub f: RISpaceSpec,
    pub resolution: GridConfig,
}

/// Holmstedt-formula quantities along a u-grid.
#[derive(Clone, Debug)]
pub struct HolmstedtTerms {
    pub u: Vec<f64>,
    pub p0: Vec<f64>,
    pub q1: Vec<f64>,
    pub phi: Vec<f64>,
    pub y0: f64,
    pub y1: f64,
}

/// P₀f(u), Q₁f(u), φ(u) and the norms of f in Y₀ (ℛ) and Y₁ (ℒ).
pub fn holmstedt_terms(k: &KProfile, s: &HolmstedtSetup, grid: &LogGrid) -> Result<HolmstedtTerms> {
    if !(s.theta > 0.0 && s.theta < 1.0) {
        return Err(Error::InvalidArgument("need 0 < θ < 1".into()));
    }
    let cfg = QuadConfig::default();
    let n0 = sv_norm(&s.b0, NEG_INF, 0.0, Measure::Homogeneous, &s.e0, &cfg)?;
    let n1 = sv_norm(&s.b1, 0.0, INF, Measure::Homogeneous, &s.e1, &cfg)?;
    if !n0.is_finite() {
        return Err(Error::Triviality(format!("‖{}‖ over (0,1) is infinite", s.b0.name())));
    }
    if !n1.is_finite() {
        return Err(Error::Triviality(format!("‖{}‖ over (1,∞) is infinite", s.b1.name())));
    }
    let y0 = norm_r_with(k, &SpaceSpec::r(s.theta, &s.b0, s.e0, &s.a, s.f).with_grid(s.resolution), &cfg)?.value;
    let y1 = norm_l_with(k, &SpaceSpec::l(s.theta, &s.b1, s.e1, &s.a, s.f).with_grid(s.resolution), &cfg)?.value;
    let us = grid.ln_points();
    let theta = s.theta;
    let h = |x: f64| {
        let lk = k.ln_eval(x);
        if lk == NEG_INF { 0.0 } else { s.a.eval_ln(x) * (lk - theta * x).exp() }
    };
    let mut breaks = k.breaks_ln();
    breaks.extend(us.iter().copied());
    let nodes = build_nodes(NEG_INF, INF, &s.resolution, &breaks);
    let prof = Profile::build(&h, &k.breaks_ln(), NEG_INF, INF, &s.f, nodes, &cfg)?;
    let w0 = |x: f64| s.b0.eval_ln(x);
    let w1 = |x: f64| s.b1.eval_ln(x);
    let p0_all = middle_below(&prof, &w0, &s.e0, &cfg)?;
    let q1_all = middle_above(&prof, &w1, &s.e1, &cfg)?;
    let mut p0 = Vec::new();
    let mut q1 = Vec::new();
    let mut phi = Vec::new();
    for &u in &us {
        let j = prof.xs.partition_point(|&v| v < u - 1e-12 * (1.0 + u.abs())).min(prof.len() - 1);
        p0.push(p0_all[j]);
        q1.push(q1_all[j]);
        let num = sv_norm(&s.b0, NEG_INF, u, Measure::Homogeneous, &s.e0, &cfg)?;
        let den = sv_norm(&s.b1, u, INF, Measure::Homogeneous, &s.e1, &cfg)?;
        phi.push(num / den);
    }
    Ok(HolmstedtTerms { u: exps(&us), p0, q1, phi, y0, y1 })
}

/// One-sided check of the computable half of the Holmstedt formula: the surrogate
/// P₀f(u) + φ(u)Q₁f(u) against min(‖f‖_{Y₀}, φ(u)‖f‖_{Y₁}), i.e. against the
/// trivial decompositions f = f + 0 and f = 0 + f. Each of the four estimates
/// P₀f ≤ ‖f‖_{Y₀}, P₀f ≤ φ‖f‖_{Y₁}, φQ₁f ≤ ‖f‖_{Y₀}, Q₁f ≤ ‖f‖_{Y₁} holds with
/// constant 1, so the ratio is at most 2.
pub fn verify_holmstedt(k: &KProfile, s: &HolmstedtSetup, grid: &LogGrid) -> Result<RatioReport> {
    let t = holmstedt_terms(k, s, grid)?;
    let tol = 1e-3;
    let mut bad = Vec::new();
    let mut pairs = Vec::new();
    for i in 0..t.u.len() {
        let (p, q, ph) = (t.p0[i], t.q1[i], t.phi[i]);
        let checks = [
            (p, t.y0, "P0f <= |f|_Y0"),
            (p, ph * t.y1, "P0f <= phi |f|_Y1"),
            (ph * q, t.y0, "phi Q1f <= |f|_Y0"),
            (q, t.y1, "Q1f <= |f|_Y1"),
        ];
        for (l, r, what) in checks {
            if l > r * (1.0 + tol) {
                bad.push(format!("{what} at u={:.3e}: {l:.6e} > {r:.6e}", t.u[i]));
            }
        }
        pairs.push((p + ph * q, t.y0.min(ph * t.y1)));
    }
    let (lhs, rhs) = unzip(pairs);
    let mut rep = RatioReport::new("holmstedt", t.u.clone(), lhs, rhs, Band::upper(2.0 * (1.0 + tol)), DEFAULT_WIDTH, true);
    for b in bad.into_iter().take(5) {
        rep = rep.fail(b);
    }
    Ok(rep)
}

/// ‖φ(t)^{−θ} b(φ(t)) K(φ(t))‖_Ê against ‖t^{−θ} b(t) K(t)‖_Ẽ over the corpus.
pub fn verify_change_of_variables(
    corpus: &[CorpusEntry],
    theta: f64,
    b: &SlowlyVarying,
    phi: &SlowlyVarying,
    e: &RISpaceSpec,
) -> Result<RatioReport> {
    let ip = assoc(phi)?;
    hyp(ip.infinity.rho < 0.0 && 0.0 < ip.zero.pi, || {
        format!("need ρ(Φ∞) = {} < 0 < π(Φ₀) = {}", ip.infinity.rho, ip.zero.pi)
    })?;
    let cfg = QuadConfig::default();
    let spec = SpaceSpec::theta(theta, b, *e);
    let mut pairs = Vec::with_capacity(corpus.len());
    for ce in corpus {
        let k = &ce.profile;
        // dt/(tℓ(t)) = dv with t = exp(±(e^{|v|} − 1)).
        let h = |v: f64| {
            let x = v.signum() * v.abs().exp_m1();
            let y = phi.eval_ln(x).ln();
            let lk = k.ln_eval(y);
            if lk == NEG_INF { 0.0 } else { b.eval_ln(y) * (lk - theta * y).exp() }
        };
        let lhs = if e.is_sup() {
            sup_line(&h, -cfg.v_cap, cfg.v_cap, &[0.0], &cfg)?
        } else {
            let q = e.q;
            let hq = |v: f64| {
                let a = h(v);
                if a == 0.0 { 0.0 } else { a.powf(q) }
            };
            let s = integrate_line(&hq, NEG_INF, INF, &[0.0], cfg.v_cap, &cfg)?;
            if s.is_infinite() { s } else { s.powf(1.0 / q) }
        };
        let rhs = norm_theta_with(k, &spec, &cfg)?.value;
        pairs.push((lhs, rhs));
    }
    Ok(report("change_of_variables", corpus_grid(corpus), pairs, false))
}

/// Cases of the reiteration formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReiterationCase {
    A,
    B,
    C,
    D,
    E,
}

/// M₁ and M₂ from the indices of B_{0,0}, B_{1,0} (π, ρ) and of φ_{E₀}, φ_{E₁} (π, ρ);
/// the conditions at ∞ are omitted, as for ordered couples. A vanishing denominator
/// gives M₁ = 1 and M₂ = 0.
pub fn reiteration_thresholds(b00: (f64, f64), b10: (f64, f64), e0: (f64, f64), e1: (f64, f64)) -> (f64, f64) {
    let m = |num: f64, den: f64, fallback: f64| {
        if den == 0.0 {
            return fallback;
        }
        let v = 1.0 / (1.0 - num / den);
        if v.is_finite() { v } else { fallback }
    };
    let m1 = m(b10.0 - e1.1, b00.0 - e0.1, 1.0);
    let m2 = m(b10.1 - e1.0, b00.1 - e0.0, 0.0);
    (m1, m2)
}

/// M₁ = M₂ for the couple (L^{p),α}, L^{(p,β}): b₀ = ℓ^{−α/p} with E₀ = L∞ and
/// b₁ = ℓ^{β/p'−1} with E₁ = L₁, whose associated functions on (0,1) are u^{α/p}
/// and u^{1−β/p'}.
pub fn grand_small_m(alpha: f64, beta: f64, p: f64) -> (f64, f64) {
    let pp = p / (p - 1.0);
    let b00 = alpha / p;
    let b10 = 1.0 - beta / pp;
    reiteration_thresholds((b00, b00), (b10, b10), (0.0, 0.0), (1.0, 1.0))
}

pub fn select_case(eta: f64, m1: f64, m2: f64) -> ReiterationCase {
    if eta == 0.0 {
        ReiterationCase::D
    } else if eta == 1.0 {
        ReiterationCase::E
    } else if eta < m1 {
        ReiterationCase::A
    } else if eta > m2 {
        ReiterationCase::B
    } else {
        ReiterationCase::C
    }
}

/// Reiteration between the grand and small Lebesgue spaces on (0,1):
/// (L^{p),α}, L^{(p,β})_{η,b,E}.
#[derive(Clone, Debug)]
pub struct ReiterationSetup {
    pub alpha: f64,
    pub beta: f64,
    pub p: f64,
    pub eta: f64,
    /// The outer weight b, on (0,1).
    pub b: SlowlyVarying,
    pub e: RISpaceSpec,
    pub resolution: GridConfig,
}

/// Per-function outcome of a reiteration run.
#[derive(Clone, Debug)]
pub struct ReiterationOutcome {
    pub case: ReiterationCase,
    pub m1: f64,
    pub m2: f64,
    pub i1: Vec<f64>,
    pub i2: Vec<f64>,
    pub claimed: Vec<f64>,
    pub report: RatioReport,
}

fn unit_weight(name: String, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> SlowlyVarying {
    SlowlyVarying::from_fn(name, Domain::UnitInterval, Arc::new(f))
}

impl ReiterationSetup {
    fn pp(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    /// Exponent c in φ(u) = ℓ(u)^{−c} = b₀(u)φ_{E₀}(ℓ(u)) / (b₁(u)φ_{E₁}(ℓ(u))).
    fn phi_exponent(&self) -> f64 {
        self.alpha / self.p + self.beta / self.pp()
    }

    /// b(φ(u)) as a weight on (0,1).
    fn b_of_phi(&self) -> SlowlyVarying {
        let (b, c) = (self.b.clone(), self.phi_exponent());
        unit_weight(format!("compose({},phi)", self.b.name()), move |x| b.eval_ln(-c * ell_ln(x).ln()))
    }

    /// ℓ^{γ}(u) b(φ(u)).
    fn log_times_b_phi(&self, gamma: f64, tag: &str) -> SlowlyVarying {
        let (b, c) = (self.b.clone(), self.phi_exponent());
        unit_weight(format!("{tag}"), move |x| {
            let l = ell_ln(x);
            l.powf(gamma) * b.eval_ln(-c * l.ln())
        })
    }

    /// B_η(u) = ℓ^{−α(1−η)/p + βη/p'}(u) b(φ(u)).
    pub fn b_eta(&self, eta: f64) -> SlowlyVarying {
        let g = -self.alpha * (1.0 - eta) / self.p + self.beta * eta / self.pp();
        self.log_times_b_phi(g, &format!("B_eta({eta})"))
    }

    /// B_η^#(u) = ℓ^{η((α−β)/p+β)}(u) b(φ(u)).
    pub fn b_eta_sharp(&self, eta: f64) -> SlowlyVarying {
        let g = eta * ((self.alpha - self.beta) / self.p + self.beta);
        self.log_times_b_phi(g, &format!("B_eta_sharp({eta})"))
    }

    fn theta(&self) -> f64 {
        1.0 - 1.0 / self.p
    }

    fn b0(&self) -> SlowlyVarying {
        SlowlyVarying::ell_pow(-self.alpha / self.p).on_unit()
    }

    fn b1(&self) -> SlowlyVarying {
        SlowlyVarying::ell_pow(self.beta / self.pp() - 1.0).on_unit()
    }

    /// I₁ and I₂ for one function.
    pub fn i1_i2(&self, k: &KProfile) -> Result<(f64, f64)> {
        let cfg = QuadConfig::default();
        let inv_p = 1.0 / self.p;
        let h = |x: f64| {
            let fs = k.fstar_ln(x);
            if fs == 0.0 { 0.0 } else { fs * (inv_p * x).exp() }
        };
        let breaks = k.breaks_ln();
        let nodes = build_nodes(NEG_INF, 0.0, &self.resolution, &breaks);
        let fsp = RISpaceSpec::lq(self.p);
        let prof = Profile::build(&h, &breaks, NEG_INF, 0.0, &fsp, nodes, &cfg)?;
        let (b0, b1) = (self.b0(), self.b1());
        let w0 = |x: f64| b0.eval_ln(x);
        let w1 = |x: f64| b1.eval_ln(x);
        let p0 = middle_below(&prof, &w0, &RISpaceSpec::linf(), &cfg)?;
        let q1 = middle_above(&prof, &w1, &RISpaceSpec::lq(1.0), &cfg)?;
        let c = self.phi_exponent();
        let eta = self.eta;
        let b = &self.b;
        let v1 = |x: f64| {
            let y = -c * ell_ln(x).ln();
            (-eta * y).exp() * b.eval_ln(y)
        };
        let v2 = |x: f64| {
            let y = -c * ell_ln(x).ln();
            ((1.0 - eta) * y).exp() * b.eval_ln(y)
        };
        let (l, r) = ends(&p0);
        let i1 = outer(&prof.xs, &p0, NEG_INF, 0.0, l, r, &v1, &self.e, Measure::LogHomogeneous, &cfg)?;
        let (l, r) = ends(&q1);
        let i2 = outer(&prof.xs, &q1, NEG_INF, 0.0, l, r, &v2, &self.e, Measure::LogHomogeneous, &cfg)?;
        Ok((i1, i2))
    }

    /// The norm of the space identified for this case.
    pub fn claimed_norm(&self, case: ReiterationCase, k: &KProfile) -> Result<f64> {
        let cfg = QuadConfig::default();
        let th = self.theta();
        let one = SlowlyVarying::constant(1.0).on_unit();
        let lp = RISpaceSpec::lq(self.p);
        let prep = |s: SpaceSpec| s.ordered().rearranged().hat().with_grid(self.resolution);
        Ok(match case {
            ReiterationCase::A => norm_r_with(k, &prep(SpaceSpec::r(th, &self.b_eta(self.eta), self.e, &one, lp)), &cfg)?.value,
            ReiterationCase::B => norm_l_with(k, &prep(SpaceSpec::l(th, &self.b_eta(self.eta), self.e, &one, lp)), &cfg)?.value,
            ReiterationCase::C => {
                let a_sharp = self.b0();
                norm_l_with(k, &prep(SpaceSpec::l(th, &self.b_eta_sharp(self.eta), self.e, &a_sharp, lp)), &cfg)?.value
            }
            ReiterationCase::D => {
                let r = norm_r_with(k, &prep(SpaceSpec::r(th, &self.b_eta(0.0), self.e, &one, lp)), &cfg)?.value;
                let rl = SpaceSpec::rl(th, &self.b_of_phi(), self.e, &self.b0(), RISpaceSpec::linf(), &one, lp);
                let rl = norm_rl_with(k, &prep(rl), &cfg)?.value;
                r.max(rl)
            }
            ReiterationCase::E => {
                let l = norm_l_with(k, &prep(SpaceSpec::l(th, &self.b_eta(1.0), self.e, &one, lp)), &cfg)?.value;
                let lr = SpaceSpec::lr(th, &self.b_of_phi(), self.e, &self.b1(), RISpaceSpec::lq(1.0), &one, lp);
                let lr = norm_lr_with(k, &prep(lr), &cfg)?.value;
                l.max(lr)
            }
        })
    }
}

/// Checks the sandwich max(I₁,I₂) ≤ I₁+I₂ ≤ 2max(I₁,I₂) and reports the claimed norm
/// against I₁+I₂ over the corpus. With `case` given, it must match the case gate.
pub fn verify_reiteration(
    case: Option<ReiterationCase>,
    s: &ReiterationSetup,
    corpus: &[CorpusEntry],
) -> Result<ReiterationOutcome> {
    if !(s.alpha > 0.0 && s.beta > 0.0 && s.p > 1.0 && s.p.is_finite()) {
        return Err(Error::HypothesisViolated(format!(
            "need α, β > 0 and 1 < p < ∞, got α={}, β={}, p={}",
            s.alpha, s.beta, s.p
        )));
    }
    if !(0.0..=1.0).contains(&s.eta) {
        return Err(Error::InvalidArgument(format!("η = {} is outside [0,1]", s.eta)));
    }
    let (m1, m2) = grand_small_m(s.alpha, s.beta, s.p);
    let gate = select_case(s.eta, m1, m2);
    if let Some(c) = case {
        if c != gate {
            return Err(Error::CaseGateFailed(format!(
                "case {c:?} requested but η = {} with M₁ = {m1}, M₂ = {m2} selects case {gate:?}",
                s.eta
            )));
        }
    }
    if gate == ReiterationCase::E {
        let cfg = QuadConfig::default();
        let nb = sv_norm(&s.b, NEG_INF, 0.0, Measure::Homogeneous, &s.e, &cfg)?;
        hyp(nb.is_finite(), || format!("case e needs ‖{}‖ over (0,1) finite", s.b.name()))?;
    }
    let mut i1 = Vec::new();
    let mut i2 = Vec::new();
    let mut claimed = Vec::new();
    let mut sandwich_bad = Vec::new();
    for ce in corpus {
        let (a, b) = s.i1_i2(&ce.profile)?;
        let sum = a + b;
        let mx = a.max(b);
        if !(mx <= sum && sum <= 2.0 * mx) && !(a == 0.0 && b == 0.0) {
            sandwich_bad.push(ce.name.clone());
        }
        i1.push(a);
        i2.push(b);
        claimed.push(s.claimed_norm(gate, &ce.profile)?);
    }
    let sums: Vec<f64> = i1.iter().zip(&i2).map(|(a, b)| a + b).collect();
    let mut rep = RatioReport::new(
        format!("reiteration_{gate:?}").to_lowercase(),
        corpus_grid(corpus),
        claimed.clone(),
        sums,
        Band::UNBOUNDED,
        DEFAULT_WIDTH,
        false,
    )
    .note(format!("case {gate:?}, M1 = {m1:.12e}, M2 = {m2:.12e}"));
    for n in sandwich_bad {
        rep = rep.fail(format!("sandwich violated for {n}"));
    }
    Ok(ReiterationOutcome { case: gate, m1, m2, i1, i2, claimed, report: rep })
}
