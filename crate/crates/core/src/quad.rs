//! Adaptive Gauss–Kronrod quadrature on finite intervals, doubling-panel tails for
//! infinite ones, and a sampled supremum with golden-section refinement.

use crate::error::{Error, Result};
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Numeric budgets shared by every quadrature in the crate.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
    /// Largest |x| reached by tails in the logarithmic coordinate x = ln t.
    pub x_cap: f64,
    /// Largest v = ln ℓ(t) reached by tails of hat-measure integrals.
    pub v_cap: f64,
    /// Sampling density of supremum searches (points per decade of t).
    pub sup_per_decade: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            abs_tol: 1e-300,
            rel_tol: 1e-8,
            max_intervals: 4000,
            x_cap: 2f64.powi(50),
            v_cap: 200.0,
            sup_per_decade: 64,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

enum Rule {
    Finite(f64, f64),
    Infinite,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Rule> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut k = 0.0;
    let mut g = 0.0;
    for i in 0..8 {
        let (vals, pair) = if i == 7 {
            let v = f(c);
            ([v, 0.0], false)
        } else {
            ([f(c - h * XGK[i]), f(c + h * XGK[i])], true)
        };
        for v in vals.iter().take(if pair { 2 } else { 1 }) {
            if v.is_nan() {
                return Err(Error::QuadratureNonconvergent(format!(
                    "integrand is NaN near {c:.6e}"
                )));
            }
            if v.is_infinite() {
                return Ok(Rule::Infinite);
            }
        }
        let s = if pair { vals[0] + vals[1] } else { vals[0] };
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    Ok(Rule::Finite(k * h, ((k - g) * h).abs()))
}

/// Integral of `f` over the finite interval [a, b], splitting first at `breaks`.
/// Returns `f64::INFINITY` when the integrand evaluates to infinity.
pub fn integrate<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    breaks: &[f64],
    cfg: &QuadConfig,
) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "finite interval expected, got [{a}, {b}]"
        )));
    }
    if b <= a {
        return Ok(0.0);
    }
    let mut cuts = vec![a];
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    cuts.extend(inner);
    cuts.push(b);

    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut total_err = 0.0;
    for w in cuts.windows(2) {
        match gk15(f, w[0], w[1])? {
            Rule::Infinite => return Ok(f64::INFINITY),
            Rule::Finite(v, e) => {
                total += v;
                total_err += e;
                heap.push(Panel { a: w[0], b: w[1], value: v, err: e });
            }
        }
    }
    while total_err > cfg.abs_tol.max(cfg.rel_tol * total.abs()) {
        if heap.len() >= cfg.max_intervals {
            if total_err <= 1e-5 * total.abs() {
                break;
            }
            return Err(Error::QuadratureNonconvergent(format!(
                "interval budget exhausted on [{a:.6e}, {b:.6e}] (estimate {total:.6e} ± {total_err:.1e})"
            )));
        }
        let p = heap.pop().expect("heap holds at least one panel");
        let m = 0.5 * (p.a + p.b);
        if m <= p.a || m >= p.b {
            // Interval can no longer be split in floating point.
            heap.push(Panel { err: 0.0, ..p });
            total_err -= p.err;
            continue;
        }
        let (l, r) = match (gk15(f, p.a, m)?, gk15(f, m, p.b)?) {
            (Rule::Finite(lv, le), Rule::Finite(rv, re)) => ((lv, le), (rv, re)),
            _ => return Ok(f64::INFINITY),
        };
        total += l.0 + r.0 - p.value;
        total_err += l.1 + r.1 - p.err;
        heap.push(Panel { a: p.a, b: m, value: l.0, err: l.1 });
        heap.push(Panel { a: m, b: p.b, value: r.0, err: r.1 });
    }
    // Re-sum to shed accumulated rounding from the running updates.
    Ok(heap.iter().map(|p| p.value).sum())
}

/// Integral of `f` from `z0` towards `dir * ∞` (dir = ±1) over doubling panels
/// [0,s], [s,2s], [2s,4s], ... measured from `z0`, s = max(1, |z0|), stopping at
/// distance `cap`.
///
/// Converged when three consecutive panels each add less than 1e-14 of the running
/// total; divergent (returns ∞) when three successive doublings each grow the total
/// by at least 1% without decaying, either from the tenth panel on or on reaching the
/// cap. Panels still decaying at the cap are summed as a geometric series.
pub fn integrate_tail<F: Fn(f64) -> f64>(
    f: &F,
    z0: f64,
    dir: f64,
    cap: f64,
    breaks: &[f64],
    cfg: &QuadConfig,
) -> Result<f64> {
    let mut total = 0.0;
    let mut small_run = 0;
    let mut grow_run = 0;
    let mut near = 0.0;
    // Panels scale with the distance from the origin, so an anchor far out does not
    // start with tiny panels that look like growth.
    let mut far = z0.abs().max(1.0);
    let mut panel = 0usize;
    let mut pieces: Vec<f64> = Vec::new();
    loop {
        let far_c = far.min(cap);
        let (za, zb) = if dir > 0.0 {
            (z0 + near, z0 + far_c)
        } else {
            (z0 - far_c, z0 - near)
        };
        let piece = integrate(f, za, zb, breaks, cfg)?;
        if piece.is_infinite() {
            return Ok(f64::INFINITY);
        }
        let before = total;
        total += piece;
        if total > 0.0 && piece <= 1e-14 * total {
            small_run += 1;
        } else {
            small_run = 0;
        }
        if small_run >= 3 {
            return Ok(total);
        }
        let decaying = pieces.last().is_some_and(|&prev| piece < 0.9 * prev);
        if panel >= 10 && before > 0.0 && piece >= 0.01 * before && !decaying {
            grow_run += 1;
        } else {
            grow_run = 0;
        }
        if grow_run >= 3 {
            return Ok(f64::INFINITY);
        }
        if far_c >= cap {
            if total == 0.0 || piece <= 1e-5 * total {
                return Ok(total);
            }
            // Full panels shrinking by a steady factor r < 1 per doubling continue as a
            // geometric series after the last full panel p₁; the final panel may be
            // partial and is already counted.
            if let [.., p3, p2, p1] = pieces[..] {
                let r = (p2 / p3).max(p1 / p2);
                if r < 1.0 {
                    return Ok(total + (p1 * r / (1.0 - r) - piece).max(0.0));
                }
            }
            if history_grows(&pieces, piece) {
                return Ok(f64::INFINITY);
            }
            return Err(Error::QuadratureNonconvergent(format!(
                "tail from {z0:.6e} still contributes {:.3e} of the total at the cap",
                piece / total
            )));
        }
        pieces.push(piece);
        near = far_c;
        far *= 2.0;
        panel += 1;
    }
}

/// Whether the last three panels (the final one being `last`) each grew the running
/// total by at least 1%.
fn history_grows(pieces: &[f64], last: f64) -> bool {
    let mut all: Vec<f64> = pieces.to_vec();
    all.push(last);
    let n = all.len();
    if n < 4 {
        return false;
    }
    (n - 3..n).all(|i| {
        let before: f64 = all[..i].iter().sum();
        before > 0.0 && all[i] >= 0.01 * before
    })
}

/// Integral over a long finite interval (a, b), with panels growing geometrically
/// away from `b` (dir = −1) or from `a` (dir = +1).
pub fn integrate_span<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, dir: f64, cfg: &QuadConfig) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    let len = b - a;
    let mut total = 0.0;
    let mut done = 0.0;
    let mut width = 1.0f64;
    while done < len {
        let next = (done + width).min(len);
        let (lo, hi) = if dir < 0.0 { (b - next, b - done) } else { (a + done, a + next) };
        total += integrate(f, lo, hi, &[], cfg)?;
        if total.is_infinite() {
            return Ok(total);
        }
        done = next;
        width *= 2.0;
    }
    Ok(total)
}

/// Integral of `f` over (a, b) where either end may be infinite; tails start at the
/// outermost breakpoint (or 0) and reach at most `cap` from it.
pub fn integrate_line<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    breaks: &[f64],
    cap: f64,
    cfg: &QuadConfig,
) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    let inside: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    let lo_anchor = if a.is_finite() {
        a
    } else {
        let m = inside.iter().copied().fold(f64::INFINITY, f64::min);
        if m.is_finite() { m } else if b.is_finite() { b.min(0.0) } else { 0.0 }
    };
    let hi_anchor = if b.is_finite() {
        b
    } else {
        let m = inside.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if m.is_finite() { m.max(lo_anchor) } else { lo_anchor.max(0.0) }
    };
    let mut total = integrate(f, lo_anchor, hi_anchor, &inside, cfg)?;
    if !a.is_finite() && total.is_finite() {
        let t = integrate_tail(f, lo_anchor, -1.0, cap, &[], cfg)?;
        total += t;
    }
    if !b.is_finite() && total.is_finite() {
        let t = integrate_tail(f, hi_anchor, 1.0, cap, &[], cfg)?;
        total += t;
    }
    Ok(total)
}

fn golden_max<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..80 {
        if (b - a).abs() <= 1e-13 * (1.0 + a.abs()) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    fc.max(fd)
}

/// Sample points for a supremum search over (a, b) in the coordinate x = ln t:
/// uniform at `per_decade` points per decade for |x| ≤ 60, then uniform in
/// ln(1 + |x|) with the same step out to the tail cap.
pub fn sup_nodes(a: f64, b: f64, per_decade: usize, cap: f64) -> Vec<f64> {
    let step = std::f64::consts::LN_10 / per_decade as f64;
    let w = |x: f64| x.signum() * (x.abs()).ln_1p();
    let winv = |w: f64| w.signum() * w.abs().exp_m1();
    let core = 60.0;
    let lo = if a.is_finite() { a } else { -cap };
    let hi = if b.is_finite() { b } else { cap };
    let mut xs = vec![lo];
    let mut x = lo;
    while x < hi {
        let nx = if x.abs() < core || (x < 0.0 && x + step > -core) {
            x + step
        } else {
            winv(w(x) + step / 4.0).max(x + step)
        };
        x = nx.min(hi);
        xs.push(x);
    }
    xs
}

/// Supremum of `f` over (a, b) in the logarithmic coordinate, with golden-section
/// refinement around the sampled argmax. Returns ∞ when the maximum sits at an
/// infinite end and is still growing there.
pub fn sup_line<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    breaks: &[f64],
    cfg: &QuadConfig,
) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    let mut xs = sup_nodes(a, b, cfg.sup_per_decade, cfg.x_cap);
    for &br in breaks {
        if br > a && br < b {
            let d = 1e-9 * (1.0 + br.abs());
            xs.push(br - d);
            xs.push(br + d);
        }
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let vals: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    if vals.iter().any(|v| v.is_nan()) {
        return Err(Error::QuadratureNonconvergent("NaN in supremum search".into()));
    }
    let (imax, &vmax) = vals
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.total_cmp(y.1))
        .expect("nonempty sample");
    if vmax.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let n = xs.len();
    let at_open_end = (imax == 0 && !a.is_finite()) || (imax == n - 1 && !b.is_finite());
    if at_open_end && vmax > 0.0 {
        let j = if imax == 0 { (imax + 64).min(n - 1) } else { imax.saturating_sub(64) };
        if vmax > vals[j] * (1.0 + 1e-3) {
            return Ok(f64::INFINITY);
        }
    }
    let lo = xs[imax.saturating_sub(1)];
    let hi = xs[(imax + 1).min(n - 1)];
    let refined = if hi > lo { golden_max(f, lo, hi) } else { vmax };
    Ok(vmax.max(refined))
}
