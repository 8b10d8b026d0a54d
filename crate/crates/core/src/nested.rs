//! Nested weighted norms on a shared logarithmic grid.
//!
//! An inner profile N(t,u) = ‖h‖_{L_g((t,u), ds/s)} of a base integrand h is tabulated
//! through left and right cumulative integrals (whichever cancels less is used), and
//! the middle and outer norms are trapezoid sums in the coordinate w = sgn(x)·ln(1+|x|),
//! x = ln t, with exact one-dimensional tails beyond the grid.

use crate::error::{Error, Result};
use crate::norms::{weighted_norm_with, Measure, MeasuredInterval, RISpaceSpec};
use crate::quad::{integrate_line, sup_line, QuadConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub type SyncFn<'a> = &'a (dyn Fn(f64) -> f64 + Sync);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridConfig {
    /// Nodes per decade of t near t = 1 (spacing ln10/per_decade in w).
    pub per_decade: usize,
    /// The grid covers |ln t| ≤ x_reach; beyond it one-dimensional tails take over.
    pub x_reach: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { per_decade: 512, x_reach: 1e6 }
    }
}

fn w_of(x: f64) -> f64 {
    x.signum() * x.abs().ln_1p()
}

fn x_of(w: f64) -> f64 {
    w.signum() * w.abs().exp_m1()
}

/// Grid nodes covering (lo, hi) ∩ [−x_reach, x_reach], including finite ends, 0 and `extra`.
pub fn build_nodes(lo: f64, hi: f64, cfg: &GridConfig, extra: &[f64]) -> Vec<f64> {
    let a = lo.max(-cfg.x_reach);
    let b = hi.min(cfg.x_reach);
    let (wa, wb) = (w_of(a), w_of(b));
    let dw = std::f64::consts::LN_10 / cfg.per_decade as f64;
    let n = ((wb - wa) / dw).ceil() as usize;
    let mut xs: Vec<f64> = (0..=n).map(|i| x_of(wa + (wb - wa) * i as f64 / n as f64)).collect();
    xs[0] = a;
    xs[n] = b;
    if a < 0.0 && b > 0.0 {
        xs.push(0.0);
    }
    xs.extend(extra.iter().copied().filter(|&x| x > a && x < b));
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|p, q| (*p - *q).abs() <= 1e-12 * (1.0 + q.abs()));
    xs
}

/// Tabulated inner norms N(t,u) of a base integrand on a grid.
pub struct Profile {
    pub xs: Vec<f64>,
    pub lo: f64,
    pub hi: f64,
    g: f64,
    /// ∫_{x_0}^{x_i} h^g (finite g) or running data for g = ∞.
    left: Vec<f64>,
    /// ∫_{x_i}^{x_n} h^g.
    right: Vec<f64>,
    left_tail: f64,
    right_tail: f64,
    /// g = ∞: maxima per cell and a sparse table over them.
    sparse: Vec<Vec<f64>>,
}

impl Profile {
    pub fn build(
        h: SyncFn,
        breaks: &[f64],
        lo: f64,
        hi: f64,
        g: &RISpaceSpec,
        nodes: Vec<f64>,
        qcfg: &QuadConfig,
    ) -> Result<Profile> {
        let n = nodes.len();
        if n < 2 {
            return Err(Error::InvalidArgument("grid needs at least two nodes".into()));
        }
        let (x0, xn) = (nodes[0], nodes[n - 1]);
        let brk_lo: Vec<f64> = breaks.iter().copied().filter(|&b| b < x0).collect();
        let brk_hi: Vec<f64> = breaks.iter().copied().filter(|&b| b > xn).collect();
        if g.is_sup() {
            let cells: Vec<f64> = (0..n - 1)
                .into_par_iter()
                .map(|i| {
                    let (a, b) = (nodes[i], nodes[i + 1]);
                    let d = 1e-12 * (b - a);
                    [a + d, 0.25 * (3.0 * a + b), 0.5 * (a + b), 0.25 * (a + 3.0 * b), b - d]
                        .iter()
                        .map(|&x| h(x).abs())
                        .fold(0.0, f64::max)
                })
                .collect();
            if cells.iter().any(|v| v.is_nan()) {
                return Err(Error::QuadratureNonconvergent("NaN in inner supremum".into()));
            }
            let mut sparse = vec![cells];
            let mut len = 1;
            while 2 * len <= n - 1 {
                let prev = sparse.last().unwrap();
                let next: Vec<f64> = (0..prev.len() - len).map(|i| prev[i].max(prev[i + len])).collect();
                sparse.push(next);
                len *= 2;
            }
            let left_tail = if lo < x0 { sup_line(&|x| h(x).abs(), lo, x0, &brk_lo, qcfg)? } else { 0.0 };
            let right_tail = if hi > xn { sup_line(&|x| h(x).abs(), xn, hi, &brk_hi, qcfg)? } else { 0.0 };
            return Ok(Profile {
                xs: nodes,
                lo,
                hi,
                g: g.q,
                left: vec![],
                right: vec![],
                left_tail,
                right_tail,
                sparse,
            });
        }
        let q = g.q;
        let hg = |x: f64| {
            let v = h(x).abs();
            if v == 0.0 { 0.0 } else { v.powf(q) }
        };
        let cells: Vec<f64> = (0..n - 1)
            .into_par_iter()
            .map(|i| crate::quad::integrate(&hg, nodes[i], nodes[i + 1], &[], qcfg))
            .collect::<Result<Vec<f64>>>()?;
        if cells.iter().any(|v| !v.is_finite()) {
            return Err(Error::QuadratureNonconvergent(
                "inner integrand is not integrable on a grid cell".into(),
            ));
        }
        let mut left = vec![0.0; n];
        for i in 0..n - 1 {
            left[i + 1] = left[i] + cells[i];
        }
        let mut right = vec![0.0; n];
        for i in (0..n - 1).rev() {
            right[i] = right[i + 1] + cells[i];
        }
        let left_tail = if lo < x0 { integrate_line(&hg, lo, x0, &brk_lo, qcfg.x_cap, qcfg)? } else { 0.0 };
        let right_tail = if hi > xn { integrate_line(&hg, xn, hi, &brk_hi, qcfg.x_cap, qcfg)? } else { 0.0 };
        Ok(Profile { xs: nodes, lo, hi, g: q, left, right, left_tail, right_tail, sparse: vec![] })
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    fn range_max(&self, i: usize, j: usize) -> f64 {
        // max over cells i..j-1
        if j <= i {
            return 0.0;
        }
        let len = j - i;
        let k = usize::BITS as usize - 1 - len.leading_zeros() as usize;
        let row = &self.sparse[k];
        row[i].max(row[j - (1 << k)])
    }

    fn root(&self, s: f64) -> f64 {
        if s <= 0.0 { 0.0 } else if s.is_infinite() { s } else { s.powf(1.0 / self.g) }
    }

    /// Raw g-th power mass between nodes i ≤ j.
    fn mass(&self, i: usize, j: usize) -> f64 {
        let a = self.left[j] - self.left[i];
        let b = self.right[i] - self.right[j];
        if self.left[j] <= self.right[i] { a } else { b }
    }

    /// N(x_i, x_j) for i ≤ j.
    pub fn between(&self, i: usize, j: usize) -> f64 {
        if self.g.is_infinite() {
            self.range_max(i, j)
        } else {
            self.root(self.mass(i, j).max(0.0))
        }
    }

    /// N(lo, x_j).
    pub fn from_lo(&self, j: usize) -> f64 {
        if self.g.is_infinite() {
            self.left_tail.max(self.range_max(0, j))
        } else {
            self.root(self.left_tail + self.left[j])
        }
    }

    /// N(x_i, hi).
    pub fn to_hi(&self, i: usize) -> f64 {
        if self.g.is_infinite() {
            self.right_tail.max(self.range_max(i, self.len() - 1))
        } else {
            self.root(self.right_tail + self.right[i])
        }
    }

    /// N(lo, hi).
    pub fn total(&self) -> f64 {
        self.from_lo(self.len() - 1).max(if self.g.is_infinite() { self.right_tail } else { 0.0 }).max(
            if self.g.is_infinite() { 0.0 } else { self.root(self.left_tail + self.left[self.len() - 1] + self.right_tail) },
        )
    }

    /// Trapezoid weights in w times the dx/dw factor (1 + |x|) for tilde measures.
    fn tilde_weights(&self) -> Vec<f64> {
        trapezoid_weights(&self.xs, true)
    }
}

/// Trapezoid weights of the nodes in the coordinate w; `tilde` multiplies by dx/dw.
pub fn trapezoid_weights(xs: &[f64], tilde: bool) -> Vec<f64> {
    let n = xs.len();
    let ws: Vec<f64> = xs.iter().map(|&x| w_of(x)).collect();
    (0..n)
        .map(|i| {
            let left = if i > 0 { ws[i] - ws[i - 1] } else { 0.0 };
            let right = if i + 1 < n { ws[i + 1] - ws[i] } else { 0.0 };
            let base = 0.5 * (left + right);
            if tilde { base * (1.0 + xs[i].abs()) } else { base }
        })
        .collect()
}

fn pow_or_zero(v: f64, r: f64) -> f64 {
    if v == 0.0 { 0.0 } else { v.powf(r) }
}

/// ‖w‖ over (a, b) with dt/t; ∞ allowed.
fn weight_tail(w: SyncFn, a: f64, b: f64, r: &RISpaceSpec, qcfg: &QuadConfig) -> Result<f64> {
    if !(b > a) {
        return Ok(0.0);
    }
    weighted_norm_with(&|x| w(x), &MeasuredInterval::from_ln(a, b, Measure::Homogeneous), r, &[0.0], qcfg)
}

fn times(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 { 0.0 } else { a * b }
}

/// M(u_j) = ‖w(t) N(t, u_j)‖_{L_r((lo, u_j), dt/t)} at every node.
pub fn middle_below(p: &Profile, w: SyncFn, r: &RISpaceSpec, qcfg: &QuadConfig) -> Result<Vec<f64>> {
    let n = p.len();
    let wl = weight_tail(w, p.lo, p.xs[0], r, qcfg)?;
    let wv: Vec<f64> = p.xs.iter().map(|&x| w(x)).collect();
    if r.is_sup() {
        return Ok((0..n)
            .into_par_iter()
            .map(|j| {
                let mut m = times(wl, p.between(0, j));
                for i in 0..j {
                    m = m.max(times(wv[i], p.between(i, j)));
                }
                m
            })
            .collect());
    }
    let rq = r.q;
    let tw = p.tilde_weights();
    let coef: Vec<f64> = (0..n).map(|i| tw[i] * pow_or_zero(wv[i], rq)).collect();
    let tail_r = pow_or_zero(wl, rq);
    let same = !p.g.is_infinite() && (rq - p.g).abs() < 1e-15;
    Ok((0..n)
        .into_par_iter()
        .map(|j| {
            let mut s = times(tail_r, pow_or_zero(p.between(0, j), rq));
            for i in 0..j {
                if coef[i] == 0.0 {
                    continue;
                }
                let nn = if same { p.mass(i, j).max(0.0) } else { pow_or_zero(p.between(i, j), rq) };
                s += coef[i] * nn;
            }
            if s.is_infinite() { s } else { s.powf(1.0 / rq) }
        })
        .collect())
}

/// M(u_j) = ‖w(t) N(u_j, t)‖_{L_r((u_j, hi), dt/t)} at every node.
pub fn middle_above(p: &Profile, w: SyncFn, r: &RISpaceSpec, qcfg: &QuadConfig) -> Result<Vec<f64>> {
    let n = p.len();
    let wr = weight_tail(w, p.xs[n - 1], p.hi, r, qcfg)?;
    let wv: Vec<f64> = p.xs.iter().map(|&x| w(x)).collect();
    if r.is_sup() {
        return Ok((0..n)
            .into_par_iter()
            .map(|j| {
                let mut m = times(wr, p.to_hi(j));
                for i in j + 1..n {
                    m = m.max(times(wv[i], p.between(j, i)));
                }
                m
            })
            .collect());
    }
    let rq = r.q;
    let tw = p.tilde_weights();
    let coef: Vec<f64> = (0..n).map(|i| tw[i] * pow_or_zero(wv[i], rq)).collect();
    let tail_r = pow_or_zero(wr, rq);
    let same = !p.g.is_infinite() && (rq - p.g).abs() < 1e-15;
    Ok((0..n)
        .into_par_iter()
        .map(|j| {
            let mut s = times(tail_r, pow_or_zero(p.to_hi(j), rq));
            for i in j + 1..n {
                if coef[i] == 0.0 {
                    continue;
                }
                let nn = if same { p.mass(j, i).max(0.0) } else { pow_or_zero(p.between(j, i), rq) };
                s += coef[i] * nn;
            }
            if s.is_infinite() { s } else { s.powf(1.0 / rq) }
        })
        .collect())
}

/// How V behaves outside the grid.
#[derive(Clone, Copy)]
pub enum Tail<'a> {
    /// Held at a constant.
    Const(f64),
    /// Evaluated exactly.
    Exact(SyncFn<'a>),
}

/// Outer norm ‖c(u) V(u)‖_{L_q(μ)} over (lo, hi) from node values and tail models.
#[allow(clippy::too_many_arguments)]
pub fn outer(
    xs: &[f64],
    vals: &[f64],
    lo: f64,
    hi: f64,
    left: Tail,
    right: Tail,
    c: SyncFn,
    e: &RISpaceSpec,
    measure: Measure,
    qcfg: &QuadConfig,
) -> Result<f64> {
    let n = xs.len();
    let cv: Vec<f64> = xs.iter().map(|&x| c(x)).collect();
    let tail = |a: f64, b: f64, t: Tail| -> Result<f64> {
        if !(b > a) {
            return Ok(0.0);
        }
        let iv = MeasuredInterval::from_ln(a, b, measure);
        match t {
            Tail::Const(v) if v == 0.0 => Ok(0.0),
            Tail::Const(v) => Ok(times(weighted_norm_with(&|x| c(x), &iv, e, &[0.0], qcfg)?, v)),
            Tail::Exact(f) => weighted_norm_with(&|x| times(c(x), f(x)), &iv, e, &[0.0], qcfg),
        }
    };
    let tl = tail(lo, xs[0], left)?;
    let tr = tail(xs[n - 1], hi, right)?;
    if e.is_sup() {
        let m = (0..n).map(|i| times(cv[i], vals[i])).fold(0.0, f64::max);
        return Ok(m.max(tl).max(tr));
    }
    let q = e.q;
    let tw = match measure {
        Measure::Homogeneous => trapezoid_weights(xs, true),
        Measure::LogHomogeneous => trapezoid_weights(xs, false),
        Measure::Lebesgue => {
            let mut t = trapezoid_weights(xs, true);
            for (ti, x) in t.iter_mut().zip(xs) {
                *ti *= x.exp();
            }
            t
        }
    };
    let mut s = pow_or_zero(tl, q) + pow_or_zero(tr, q);
    for i in 0..n {
        s += tw[i] * pow_or_zero(times(cv[i], vals[i]), q);
    }
    Ok(if s.is_infinite() { s } else { s.powf(1.0 / q) })
}
