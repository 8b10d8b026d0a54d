//! The λ_k partition of (0,∞) into unit-mass intervals for dt/(t ℓ(t)), discrete hat
//! norms, and the sequence Hardy inequalities.
//!
//! In the coordinate s = sgn(ln t)·ln ℓ(t) the measure dt/(t ℓ(t)) becomes ds and
//! I_k = (k−1, k), which is how everything below is computed.

use crate::error::{Error, Result};
use crate::norms::RISpaceSpec;
use crate::quad::{integrate, QuadConfig};
use crate::report::{Band, RatioReport};
use crate::svfun::{associated_pair, IndexConfig, SlowlyVarying};

pub const MAX_INDEX: i64 = 40;

/// ln λ_k: 1 − e^{−k} for k < 0 and e^k − 1 for k ≥ 0.
pub fn ln_lambda(k: i64) -> f64 {
    let kf = k as f64;
    if k < 0 { -(-kf).exp_m1() } else { kf.exp_m1() }
}

/// Hat coordinate s = sgn(x)·ln(1 + |x|) of x = ln t.
pub fn hat_coord(x: f64) -> f64 {
    x.signum() * x.abs().ln_1p()
}

/// Inverse of [`hat_coord`].
pub fn from_hat_coord(s: f64) -> f64 {
    s.signum() * s.abs().exp_m1()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LambdaGrid {
    pub k_min: i64,
    pub k_max: i64,
    /// ln λ_k for k = k_min − 1 ..= k_max.
    pub ln_lambdas: Vec<f64>,
    /// Largest deviation of a numerically integrated interval mass from 1.
    pub mass_error: f64,
}

/// Builds the grid of intervals I_k, k_min ≤ k ≤ k_max, and checks each has unit mass.
pub fn make_grid(k_min: i64, k_max: i64) -> Result<LambdaGrid> {
    if !(k_min < 0 && k_max > 0) {
        return Err(Error::InvalidArgument(format!("need k_min < 0 < k_max, got {k_min}, {k_max}")));
    }
    if let Some(k) = [k_min, k_max].into_iter().find(|k| k.abs() > MAX_INDEX) {
        return Err(Error::OverflowRange(k));
    }
    let ln_lambdas: Vec<f64> = (k_min - 1..=k_max).map(ln_lambda).collect();
    let mut grid = LambdaGrid { k_min, k_max, ln_lambdas, mass_error: 0.0 };
    let cfg = QuadConfig { rel_tol: 1e-13, ..QuadConfig::default() };
    let mut worst = 0.0f64;
    for k in k_min..=k_max {
        let (a, b) = grid.interval_ln(k);
        // ∫ dt/(t ℓ(t)) = ∫ dx/(1+|x|), integrated directly in x.
        let m = integrate(&|x: f64| 1.0 / (1.0 + x.abs()), a, b, &[0.0], &cfg)?;
        worst = worst.max((m - 1.0).abs());
    }
    grid.mass_error = worst;
    Ok(grid)
}

impl LambdaGrid {
    pub fn len(&self) -> usize {
        (self.k_max - self.k_min + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn ks(&self) -> impl Iterator<Item = i64> {
        self.k_min..=self.k_max
    }

    /// ln λ_k for k_min − 1 ≤ k ≤ k_max.
    pub fn ln_lambda(&self, k: i64) -> f64 {
        self.ln_lambdas[(k - self.k_min + 1) as usize]
    }

    /// λ_k (may overflow to ∞ for large k; use [`Self::ln_lambda`]).
    pub fn lambda(&self, k: i64) -> f64 {
        self.ln_lambda(k).exp()
    }

    /// Logarithmic endpoints of I_k = (λ_{k−1}, λ_k).
    pub fn interval_ln(&self, k: i64) -> (f64, f64) {
        (self.ln_lambda(k - 1), self.ln_lambda(k))
    }
}

/// Values x_k for k_min ≤ k ≤ k_max.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSeq {
    pub k_min: i64,
    pub values: Vec<f64>,
}

impl DiscreteSeq {
    pub fn new(k_min: i64, values: Vec<f64>) -> Self {
        DiscreteSeq { k_min, values }
    }

    pub fn zeros(grid: &LambdaGrid) -> Self {
        DiscreteSeq { k_min: grid.k_min, values: vec![0.0; grid.len()] }
    }

    pub fn from_fn(grid: &LambdaGrid, f: impl FnMut(i64) -> f64) -> Self {
        DiscreteSeq { k_min: grid.k_min, values: grid.ks().map(f).collect() }
    }

    pub fn k_max(&self) -> i64 {
        self.k_min + self.values.len() as i64 - 1
    }

    pub fn get(&self, k: i64) -> f64 {
        let i = k - self.k_min;
        if i < 0 || i >= self.values.len() as i64 { 0.0 } else { self.values[i as usize] }
    }

    /// CSV rows (k, λ_k, value); λ_k printed through its logarithm when it overflows.
    pub fn to_csv(&self, grid: &LambdaGrid) -> String {
        let mut s = String::from("k,ln_lambda,value\n");
        for (i, v) in self.values.iter().enumerate() {
            let k = self.k_min + i as i64;
            s.push_str(&format!(
                "{k},{},{}\n",
                crate::report::fmt_num(ln_lambda(k)),
                crate::report::fmt_num(*v)
            ));
            let _ = grid;
        }
        s
    }
}

/// Plain ℓ_q (quasi-)norm of a sequence.
pub fn lq_seq(values: &[f64], e: &RISpaceSpec) -> f64 {
    if e.is_sup() {
        values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    } else {
        values.iter().map(|v| v.abs().powf(e.q)).sum::<f64>().powf(1.0 / e.q)
    }
}

/// ‖Σ x_k χ_{I_k}‖_Ê: every I_k has unit mass, so this is the ℓ_q norm of x.
pub fn discrete_hat_norm(x: &DiscreteSeq, e: &RISpaceSpec, _grid: &LambdaGrid) -> f64 {
    lq_seq(&x.values, e)
}

/// The step function S x = Σ x_k χ_{I_k} as a function of x = ln t.
pub fn step_function(x: &DiscreteSeq) -> impl Fn(f64) -> f64 + '_ {
    move |lx: f64| {
        let s = hat_coord(lx);
        let k = s.ceil() as i64;
        x.get(k)
    }
}

/// The averaging operator T f = (∫_{I_k} f dt/(t ℓ(t)))_k, f taking x = ln t.
pub fn average(f: &dyn Fn(f64) -> f64, grid: &LambdaGrid, cfg: &QuadConfig) -> Result<DiscreteSeq> {
    let mut vals = Vec::with_capacity(grid.len());
    for k in grid.ks() {
        let v = integrate(&|s: f64| f(from_hat_coord(s)), (k - 1) as f64, k as f64, &[], cfg)?;
        vals.push(v);
    }
    Ok(DiscreteSeq::new(grid.k_min, vals))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HardyDirection {
    /// σ_k Σ_{m≤k} x_m, needs sup σ_{k+1}/σ_k < 1.
    CumulativeBelow,
    /// σ_k Σ_{m≥k} x_m, needs inf σ_{k+1}/σ_k > 1.
    CumulativeAbove,
}

/// Both sides of the sequence Hardy inequality and the proof constant 1/(1−σ).
/// The report is two-sided with band [1, 1/(1−σ)].
pub fn seq_hardy_check(
    sigma: &DiscreteSeq,
    x: &DiscreteSeq,
    e: &RISpaceSpec,
    direction: HardyDirection,
) -> Result<RatioReport> {
    let n = sigma.values.len();
    if sigma.values.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::HypothesisViolated("σ must be positive".into()));
    }
    let ratios: Vec<f64> = sigma.values.windows(2).map(|w| w[1] / w[0]).collect();
    let s = match direction {
        HardyDirection::CumulativeBelow => ratios.iter().copied().fold(0.0, f64::max),
        HardyDirection::CumulativeAbove => ratios.iter().map(|r| 1.0 / r).fold(0.0, f64::max),
    };
    if !(s < 1.0) {
        return Err(Error::HypothesisViolated(format!(
            "σ ratio bound {s} is not below 1 for {direction:?}"
        )));
    }
    let xs: Vec<f64> = (0..n).map(|i| x.get(sigma.k_min + i as i64)).collect();
    if xs.iter().any(|&v| v < 0.0) {
        return Err(Error::NotNonnegative);
    }
    let mut cum = vec![0.0; n];
    match direction {
        HardyDirection::CumulativeBelow => {
            let mut acc = 0.0;
            for i in 0..n {
                acc += xs[i];
                cum[i] = acc;
            }
        }
        HardyDirection::CumulativeAbove => {
            let mut acc = 0.0;
            for i in (0..n).rev() {
                acc += xs[i];
                cum[i] = acc;
            }
        }
    }
    let lhs_seq: Vec<f64> = (0..n).map(|i| sigma.values[i] * cum[i]).collect();
    let rhs_seq: Vec<f64> = (0..n).map(|i| sigma.values[i] * xs[i]).collect();
    let lhs = lq_seq(&lhs_seq, e);
    let rhs = lq_seq(&rhs_seq, e);
    let constant = 1.0 / (1.0 - s);
    let mut rep = RatioReport::new(
        "sequence_hardy",
        vec![0.0],
        vec![lhs],
        vec![rhs],
        Band { lo: 1.0, hi: constant * (1.0 + 1e-12) },
        f64::INFINITY,
        false,
    )
    .note(format!("sigma={s:.12e} constant={constant:.12e}"));
    if e.q < 1.0 {
        rep = rep.note("q < 1: reported, not covered by the interpolation argument");
    }
    Ok(rep)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MonotoneTarget {
    RatioBelow1,
    RatioAbove1,
}

/// An equivalent of b sampled at λ_k with uniformly monotone ratios.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneEquivalent {
    pub seq: DiscreteSeq,
    /// sup (ratio_below_1) or inf (ratio_above_1) of Φ(λ_{k+1})/Φ(λ_k).
    pub ratio_bound: f64,
    /// The bound guaranteed by the construction: max{e^α, e^{−β}} or its mirror.
    pub proof_bound: f64,
    /// max over k of max(Φ/b, b/Φ) at λ_k.
    pub equivalence: f64,
}

/// Monotonized associated functions: with α = ρ_{B₀}/2, β = π_{B∞}/2 (case i),
/// Φ₀(u) = u^α sup_{s∈[u,1]} s^{−α}B₀(s) and Φ∞(u) = u^β inf_{s∈[u,1]} s^{−β}B∞(s),
/// sampled as Φ(λ_k) = Φ₀(e^k) for k < 0 and Φ∞(e^{−k}) for k ≥ 0. Case ii mirrors it.
pub fn monotone_equivalent(
    b: &SlowlyVarying,
    grid: &LambdaGrid,
    target: MonotoneTarget,
) -> Result<MonotoneEquivalent> {
    let idx = b.associated_indices(&IndexConfig::default())?;
    let pair = associated_pair(b);
    let binf = pair
        .binf
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("b must be defined on (0,∞)".into()))?;
    // Exponents for the 0-side and ∞-side; `sup0` selects sup (true) or inf (false).
    let (e0, einf, sup0) = match target {
        MonotoneTarget::RatioBelow1 => {
            if !(idx.zero.rho < 0.0 && 0.0 < idx.infinity.pi) {
                return Err(Error::IndicesViolateHypothesis(format!(
                    "need rho(B0) < 0 < pi(Binf), got {} and {}",
                    idx.zero.rho, idx.infinity.pi
                )));
            }
            (idx.zero.rho / 2.0, idx.infinity.pi / 2.0, true)
        }
        MonotoneTarget::RatioAbove1 => {
            if !(idx.infinity.rho < 0.0 && 0.0 < idx.zero.pi) {
                return Err(Error::IndicesViolateHypothesis(format!(
                    "need rho(Binf) < 0 < pi(B0), got {} and {}",
                    idx.infinity.rho, idx.zero.pi
                )));
            }
            (idx.zero.pi / 2.0, idx.infinity.rho / 2.0, false)
        }
    };
    // Dense sample of s ∈ [u, 1] in ln s, refined 16× between the integers.
    let sub = 16;
    let depth = grid.k_min.unsigned_abs().max(grid.k_max.unsigned_abs()) as usize + 1;
    let ys: Vec<f64> = (0..=depth * sub).map(|i| -(i as f64) / sub as f64).collect();
    // Running extremum from y = 0 downward of s^{-e}B(s).
    let running = |f: &dyn Fn(f64) -> f64, e: f64, take_sup: bool| -> Vec<f64> {
        let mut out = Vec::with_capacity(ys.len());
        let mut acc = if take_sup { f64::NEG_INFINITY } else { f64::INFINITY };
        for &y in &ys {
            let v = (-e * y).exp() * f(y);
            acc = if take_sup { acc.max(v) } else { acc.min(v) };
            out.push(acc);
        }
        out
    };
    let phi0 = running(&|y| pair.b0.eval_ln(y), e0, sup0);
    let phiinf = running(&|y| binf.eval_ln(y), einf, !sup0);
    let value = |k: i64| -> f64 {
        if k < 0 {
            let i = (-k) as usize * sub;
            (e0 * k as f64).exp() * phi0[i]
        } else {
            let i = k as usize * sub;
            (-einf * k as f64).exp() * phiinf[i]
        }
    };
    let seq = DiscreteSeq::from_fn(grid, value);
    let rs: Vec<f64> = seq.values.windows(2).map(|w| w[1] / w[0]).collect();
    let (ratio_bound, proof_bound) = match target {
        MonotoneTarget::RatioBelow1 => (rs.iter().copied().fold(0.0, f64::max), e0.exp().max((-einf).exp())),
        MonotoneTarget::RatioAbove1 => {
            (rs.iter().copied().fold(f64::INFINITY, f64::min), e0.exp().min((-einf).exp()))
        }
    };
    let equivalence = grid
        .ks()
        .map(|k| {
            let r = seq.get(k) / b.eval_ln(grid.ln_lambda(k));
            r.max(1.0 / r)
        })
        .fold(1.0, f64::max);
    Ok(MonotoneEquivalent { seq, ratio_bound, proof_bound, equivalence })
}
