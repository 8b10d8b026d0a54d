//! Decreasing rearrangements and K-functionals for the couple (L₁, L∞) over a
//! probability space, K(t, f) = ∫₀^{min(t,1)} f*(s) ds.

use crate::error::{Error, Result};
use crate::quad::{integrate_line, QuadConfig};
use crate::svfun::{ell_ln, LogFn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;
use std::sync::Arc;

/// Number of samples used to rearrange closure-form functions.
pub const TABLE_SIZE: usize = 1 << 14;

#[derive(Clone)]
pub enum SampleForm {
    /// Evaluable on (0,1) through x = ln s; `decreasing` marks an already nonincreasing f.
    Closure { f: LogFn, decreasing: bool },
    /// Values `values[i]` on [breaks[i], breaks[i+1]); zero outside [breaks[0], breaks[n]).
    PiecewiseConstant { breaks: Vec<f64>, values: Vec<f64> },
    /// Nonincreasing samples at the midpoints (j + 1/2)/N, linearly interpolated and
    /// held constant beyond the first and last midpoint. Produced by rearranging closures.
    Tabulated { values: Vec<f64> },
}

/// A nonnegative measurable function on (0,1).
#[derive(Clone)]
pub struct FunctionSample {
    pub name: String,
    pub form: SampleForm,
    pub nonnegative: bool,
}

impl fmt::Debug for FunctionSample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let form = match &self.form {
            SampleForm::Closure { .. } => "closure",
            SampleForm::PiecewiseConstant { .. } => "piecewise_constant",
            SampleForm::Tabulated { .. } => "tabulated",
        };
        write!(f, "FunctionSample({}, {form})", self.name)
    }
}

impl FunctionSample {
    /// f given as a function of s ∈ (0,1).
    pub fn from_fn(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::from_ln_fn(name, false, move |x: f64| f(x.exp()))
    }

    /// f given as a function of x = ln s.
    pub fn from_ln_fn(
        name: impl Into<String>,
        decreasing: bool,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        FunctionSample {
            name: name.into(),
            form: SampleForm::Closure { f: Arc::new(f), decreasing },
            nonnegative: true,
        }
    }

    pub fn piecewise(name: impl Into<String>, breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breaks.len() != values.len() + 1 {
            return Err(Error::InvalidArgument("need one more breakpoint than values".into()));
        }
        if breaks.windows(2).any(|w| !(w[1] > w[0])) || breaks.first().is_some_and(|&b| b < 0.0)
            || breaks.last().is_some_and(|&b| b > 1.0)
        {
            return Err(Error::InvalidArgument(
                "breakpoints must increase strictly within [0,1]".into(),
            ));
        }
        let nonnegative = values.iter().all(|&v| v >= 0.0);
        Ok(FunctionSample {
            name: name.into(),
            form: SampleForm::PiecewiseConstant { breaks, values },
            nonnegative,
        })
    }

    /// χ_(a,b).
    pub fn indicator(a: f64, b: f64) -> Result<Self> {
        Self::piecewise(format!("chi({a},{b})"), vec![a, b], vec![1.0])
    }

    pub fn constant(c: f64) -> Self {
        FunctionSample::piecewise(format!("const({c})"), vec![0.0, 1.0], vec![c])
            .expect("valid partition")
    }

    pub fn zero() -> Self {
        FunctionSample::piecewise("zero", vec![0.0, 1.0], vec![0.0]).expect("valid partition")
    }

    /// Random step function with 4 to 12 pieces and values in [0, 4).
    pub fn random_piecewise(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(4..=12);
        let mut cuts: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(0.001..0.999)).collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut breaks = vec![0.0];
        breaks.extend(cuts);
        breaks.push(1.0);
        let values = (0..breaks.len() - 1).map(|_| rng.gen_range(0.0..4.0)).collect();
        FunctionSample::piecewise(format!("piecewise(seed={seed})"), breaks, values)
            .expect("sorted random partition")
    }

    /// Parses lines "breakpoint value": each piece starts at its breakpoint and extends
    /// to the next one (or to 1); f = 0 before the first. Blank lines and `#` comments
    /// are ignored; an empty file gives f ≡ 0.
    pub fn parse_text(name: impl Into<String>, text: &str) -> Result<Self> {
        let mut xs = Vec::new();
        let mut vs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let parse = |tok: Option<&str>| -> Result<f64> {
                tok.ok_or_else(|| Error::Parse(format!("line {}: expected two numbers", i + 1)))?
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("line {}: not a number", i + 1)))
            };
            let x = parse(it.next())?;
            let v = parse(it.next())?;
            if it.next().is_some() {
                return Err(Error::Parse(format!("line {}: trailing tokens", i + 1)));
            }
            xs.push(x);
            vs.push(v);
        }
        if xs.is_empty() {
            return Ok(FunctionSample { name: name.into(), ..FunctionSample::zero() });
        }
        if xs.iter().any(|&x| !(0.0..1.0).contains(&x)) || xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Parse("breakpoints must increase strictly within [0,1)".into()));
        }
        xs.push(1.0);
        FunctionSample::piecewise(name, xs, vs).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Value at s ∈ (0,1).
    pub fn eval(&self, s: f64) -> f64 {
        match &self.form {
            SampleForm::Closure { f, .. } => f(s.ln()),
            SampleForm::PiecewiseConstant { breaks, values } => {
                if s < breaks[0] || s >= *breaks.last().unwrap() {
                    return 0.0;
                }
                let i = breaks.partition_point(|&b| b <= s) - 1;
                values[i]
            }
            SampleForm::Tabulated { values } => table_eval(values, s),
        }
    }

    /// Measure of {f > y}, exact for step functions.
    pub fn distribution(&self, y: f64) -> f64 {
        match &self.form {
            SampleForm::PiecewiseConstant { breaks, values } => values
                .iter()
                .enumerate()
                .filter(|(_, &v)| v > y)
                .map(|(i, _)| breaks[i + 1] - breaks[i])
                .sum(),
            _ => {
                let n = TABLE_SIZE;
                (0..n).filter(|&j| self.eval((j as f64 + 0.5) / n as f64) > y).count() as f64
                    / n as f64
            }
        }
    }
}

fn table_eval(values: &[f64], s: f64) -> f64 {
    let n = values.len();
    let pos = s * n as f64 - 0.5;
    if pos <= 0.0 {
        return values[0];
    }
    if pos >= (n - 1) as f64 {
        return if s <= 1.0 { values[n - 1] } else { 0.0 };
    }
    let j = pos.floor() as usize;
    let w = pos - j as f64;
    values[j] * (1.0 - w) + values[j + 1] * w
}

/// The nonincreasing rearrangement f* on (0,1).
pub fn rearrange(f: &FunctionSample) -> Result<FunctionSample> {
    if !f.nonnegative {
        return Err(Error::NotNonnegative);
    }
    let name = format!("{}*", f.name);
    match &f.form {
        SampleForm::PiecewiseConstant { breaks, values } => {
            let mut pieces: Vec<(f64, f64)> = values
                .iter()
                .enumerate()
                .map(|(i, &v)| (v, breaks[i + 1] - breaks[i]))
                .filter(|&(v, len)| v > 0.0 && len > 0.0)
                .collect();
            pieces.sort_by(|a, b| b.0.total_cmp(&a.0));
            let mut merged: Vec<(f64, f64)> = Vec::new();
            for (v, len) in pieces {
                match merged.last_mut() {
                    Some(last) if last.0 == v => last.1 += len,
                    _ => merged.push((v, len)),
                }
            }
            if merged.is_empty() {
                return Ok(FunctionSample { name, ..FunctionSample::zero() });
            }
            let mut nb = vec![0.0];
            let mut acc = 0.0;
            for &(_, len) in &merged {
                acc += len;
                nb.push(acc.min(1.0));
            }
            // Guard against rounding collapsing the last piece.
            nb.dedup();
            let vals: Vec<f64> = merged.iter().map(|p| p.0).take(nb.len() - 1).collect();
            FunctionSample::piecewise(name, nb, vals)
        }
        SampleForm::Closure { decreasing: true, .. } | SampleForm::Tabulated { .. } => {
            Ok(FunctionSample { name, ..f.clone() })
        }
        SampleForm::Closure { f: g, decreasing: false } => {
            let n = TABLE_SIZE;
            let mut vals: Vec<f64> = (0..n).map(|j| g(((j as f64 + 0.5) / n as f64).ln())).collect();
            if vals.iter().any(|v| !(*v >= 0.0) || v.is_infinite()) {
                return Err(Error::NotNonnegative);
            }
            vals.sort_by(|a, b| b.total_cmp(a));
            Ok(FunctionSample { name, form: SampleForm::Tabulated { values: vals }, nonnegative: true })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KSource {
    FromFunction,
    Synthetic,
}

#[derive(Clone)]
enum Profile {
    /// f* = values[i] on [breaks[i], breaks[i+1]); cum[i] = K(breaks[i]).
    Steps { breaks: Vec<f64>, values: Vec<f64>, cum: Vec<f64> },
    /// Tabulated f*; cum[j] = K((j + 1/2)/N).
    Table { values: Vec<f64>, cum: Vec<f64> },
    /// Nonincreasing closure f*, integrated numerically.
    Quad { fstar: LogFn },
    /// K(t) = t^σ ℓ^γ(t) on (0,1].
    Power { sigma: f64, gamma: f64 },
}

/// t ↦ K(t, f; L₁, L∞), constant for t ≥ 1.
#[derive(Clone)]
pub struct KProfile {
    pub name: String,
    pub source: KSource,
    profile: Profile,
}

impl fmt::Debug for KProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "KProfile({})", self.name)
    }
}

/// K-functional of f.
pub fn k_functional(f: &FunctionSample) -> Result<KProfile> {
    let r = rearrange(f)?;
    let profile = match r.form {
        SampleForm::PiecewiseConstant { breaks, values } => {
            let mut cum = vec![0.0];
            for i in 0..values.len() {
                cum.push(cum[i] + values[i] * (breaks[i + 1] - breaks[i]));
            }
            Profile::Steps { breaks, values, cum }
        }
        SampleForm::Tabulated { values } => {
            let n = values.len();
            let h = 1.0 / n as f64;
            let mut cum = vec![values[0] * 0.5 * h];
            for j in 1..n {
                cum.push(cum[j - 1] + 0.5 * h * (values[j - 1] + values[j]));
            }
            Profile::Table { values, cum }
        }
        SampleForm::Closure { f, .. } => Profile::Quad { fstar: f },
    };
    Ok(KProfile { name: f.name.clone(), source: KSource::FromFunction, profile })
}

/// Parameterized families of K-profiles not tied to a particular f.
#[derive(Debug, Clone, PartialEq)]
pub enum SyntheticSpec {
    /// min(1, t)
    Min1t,
    /// t^σ ℓ^γ(t) on (0,1], constant beyond.
    Power { sigma: f64, gamma: f64 },
    /// Piecewise linear concave interpolant through `knots` random points, reaching 1 at t = 1.
    RandomConcave { knots: usize, seed: u64 },
}

pub fn synthetic_kprofile(spec: &SyntheticSpec) -> Result<KProfile> {
    let (name, profile) = match *spec {
        SyntheticSpec::Min1t => (
            "min1t".to_string(),
            Profile::Steps { breaks: vec![0.0, 1.0], values: vec![1.0], cum: vec![0.0, 1.0] },
        ),
        SyntheticSpec::Power { sigma, gamma } => {
            if sigma == 1.0 && gamma == 0.0 {
                (
                    "power(1,0)".to_string(),
                    Profile::Steps { breaks: vec![0.0, 1.0], values: vec![1.0], cum: vec![0.0, 1.0] },
                )
            } else {
                (format!("power({sigma},{gamma})"), Profile::Power { sigma, gamma })
            }
        }
        SyntheticSpec::RandomConcave { knots, seed } => {
            if knots < 2 {
                return Err(Error::InvalidArgument("need at least two knots".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut cuts: Vec<f64> = (0..knots - 1).map(|_| rng.gen_range(0.0..1.0)).collect();
            cuts.push(0.0);
            cuts.push(1.0);
            cuts.sort_by(f64::total_cmp);
            cuts.dedup();
            let mut slopes: Vec<f64> = (0..cuts.len() - 1).map(|_| rng.gen_range(0.05..5.0)).collect();
            slopes.sort_by(|a, b| b.total_cmp(a));
            let mut cum = vec![0.0];
            for i in 0..slopes.len() {
                cum.push(cum[i] + slopes[i] * (cuts[i + 1] - cuts[i]));
            }
            let total = *cum.last().unwrap();
            for s in slopes.iter_mut() {
                *s /= total;
            }
            for c in cum.iter_mut() {
                *c /= total;
            }
            (
                format!("random_concave(knots={knots},seed={seed})"),
                Profile::Steps { breaks: cuts, values: slopes, cum },
            )
        }
    };
    let k = KProfile { name, source: KSource::Synthetic, profile };
    check_invariants(&k).map_err(Error::NotQuasiconcave)?;
    Ok(k)
}

impl KProfile {
    /// K(e^x).
    pub fn eval_ln(&self, x: f64) -> f64 {
        let x = x.min(0.0);
        match &self.profile {
            Profile::Steps { breaks, values, cum } => {
                let t = x.exp();
                let n = values.len();
                if t >= breaks[n] {
                    return cum[n];
                }
                if t <= breaks[0] {
                    return 0.0;
                }
                let i = breaks.partition_point(|&b| b <= t) - 1;
                cum[i] + values[i] * (t - breaks[i])
            }
            Profile::Table { values, cum } => {
                let t = x.exp();
                let n = values.len();
                let h = 1.0 / n as f64;
                let pos = t * n as f64 - 0.5;
                if pos <= 0.0 {
                    return values[0] * t;
                }
                if pos >= (n - 1) as f64 {
                    return cum[n - 1] + values[n - 1] * (t - (n as f64 - 0.5) * h);
                }
                let j = pos.floor() as usize;
                let d = t - (j as f64 + 0.5) * h;
                cum[j] + values[j] * d + (values[j + 1] - values[j]) * d * d / (2.0 * h)
            }
            Profile::Quad { .. } | Profile::Power { .. } => self.ln_eval(x).exp(),
        }
    }

    /// K(t).
    pub fn eval(&self, t: f64) -> f64 {
        self.eval_ln(t.ln())
    }

    /// ln K(e^x), accurate for arbitrarily negative x.
    pub fn ln_eval(&self, x: f64) -> f64 {
        let x = x.min(0.0);
        match &self.profile {
            Profile::Steps { breaks, values, .. } => {
                if breaks[0] == 0.0 && breaks.len() > 1 && x < breaks[1].ln() {
                    values[0].ln() + x
                } else {
                    self.eval_ln(x).ln()
                }
            }
            Profile::Table { values, .. } => {
                if x < (0.5 / values.len() as f64).ln() {
                    values[0].ln() + x
                } else {
                    self.eval_ln(x).ln()
                }
            }
            Profile::Quad { fstar } => {
                // K(e^x) = e^x ∫_{-∞}^0 f*(e^{x+z}) e^z dz
                let cfg = QuadConfig::default();
                let g = |z: f64| fstar(x + z) * z.exp();
                let v = integrate_line(&g, f64::NEG_INFINITY, 0.0, &[], cfg.x_cap, &cfg)
                    .unwrap_or(f64::NAN);
                x + v.ln()
            }
            Profile::Power { sigma, gamma } => sigma * x + gamma * ell_ln(x).ln(),
        }
    }

    /// f*(e^x) (right-continuous), zero for x ≥ 0.
    pub fn fstar_ln(&self, x: f64) -> f64 {
        if x >= 0.0 {
            return 0.0;
        }
        match &self.profile {
            Profile::Steps { breaks, values, .. } => {
                let t = x.exp();
                if t < breaks[0] || t >= *breaks.last().unwrap() {
                    return 0.0;
                }
                values[breaks.partition_point(|&b| b <= t) - 1]
            }
            Profile::Table { values, .. } => table_eval(values, x.exp()),
            Profile::Quad { fstar } => fstar(x),
            Profile::Power { sigma, gamma } => {
                let l = ell_ln(x);
                ((sigma - 1.0) * x).exp() * l.powf(gamma - 1.0) * (sigma * l - gamma)
            }
        }
    }

    /// Logarithms of the kinks of K in (0,1], always including 0.
    pub fn breaks_ln(&self) -> Vec<f64> {
        let mut v: Vec<f64> = match &self.profile {
            Profile::Steps { breaks, .. } => {
                breaks.iter().filter(|&&b| b > 0.0 && b < 1.0).map(|b| b.ln()).collect()
            }
            _ => vec![],
        };
        v.push(0.0);
        v
    }

    /// ‖f‖_{L₁} = K(1).
    pub fn l1_norm(&self) -> f64 {
        self.eval_ln(0.0)
    }

    /// ‖f‖_{L∞} = lim_{t→0} K(t)/t.
    pub fn linf_norm(&self) -> f64 {
        match &self.profile {
            Profile::Steps { values, breaks, .. } => {
                if breaks[0] == 0.0 { values[0] } else { 0.0 }
            }
            Profile::Table { values, .. } => values[0],
            Profile::Quad { fstar } => fstar(-745.0),
            Profile::Power { sigma, gamma } => {
                if *sigma < 1.0 || (*sigma == 1.0 && *gamma > 0.0) { f64::INFINITY } else if *gamma == 0.0 { 1.0 } else { 0.0 }
            }
        }
    }

    /// f* as a function on (0,1): exact for step and tabulated profiles, a decreasing
    /// closure otherwise. Its K-functional is this profile.
    pub fn fstar_sample(&self) -> FunctionSample {
        let name = format!("{}'", self.name);
        match &self.profile {
            Profile::Steps { breaks, values, .. } => {
                FunctionSample::piecewise(name, breaks.clone(), values.clone()).expect("profile breakpoints lie in [0,1]")
            }
            Profile::Table { values, .. } => {
                FunctionSample { name, form: SampleForm::Tabulated { values: values.clone() }, nonnegative: true }
            }
            _ => {
                let k = self.clone();
                FunctionSample::from_ln_fn(name, true, move |x| k.fstar_ln(x))
            }
        }
    }

    /// Pointwise scaled copy c·K.
    pub fn scaled(&self, c: f64) -> KProfile {
        let profile = match &self.profile {
            Profile::Steps { breaks, values, cum } => Profile::Steps {
                breaks: breaks.clone(),
                values: values.iter().map(|v| c * v).collect(),
                cum: cum.iter().map(|v| c * v).collect(),
            },
            Profile::Table { values, cum } => Profile::Table {
                values: values.iter().map(|v| c * v).collect(),
                cum: cum.iter().map(|v| c * v).collect(),
            },
            Profile::Quad { fstar } => {
                let g = fstar.clone();
                Profile::Quad { fstar: Arc::new(move |x| c * g(x)) }
            }
            Profile::Power { sigma, gamma } => {
                let (s, g) = (*sigma, *gamma);
                let fs: LogFn = Arc::new(move |x: f64| {
                    if x >= 0.0 {
                        return 0.0;
                    }
                    let l = ell_ln(x);
                    c * ((s - 1.0) * x).exp() * l.powf(g - 1.0) * (s * l - g)
                });
                Profile::Quad { fstar: fs }
            }
        };
        KProfile { name: format!("{c}*{}", self.name), source: self.source, profile }
    }
}

/// Checks that K is nonnegative, nondecreasing, concave and that K(t)/t is nonincreasing
/// on a log grid of (0, 2]; returns the first violation.
pub fn check_invariants(k: &KProfile) -> std::result::Result<(), String> {
    let xs: Vec<f64> = (0..=600).map(|i| -30.0 + 30.7 * i as f64 / 600.0).collect();
    let ts: Vec<f64> = xs.iter().map(|x| x.exp()).collect();
    let ks: Vec<f64> = xs.iter().map(|&x| k.eval_ln(x)).collect();
    let scale = ks.iter().copied().fold(0.0, f64::max).max(1e-300);
    for i in 0..ks.len() {
        if !(ks[i] >= 0.0) || !ks[i].is_finite() {
            return Err(format!("K({:.3e}) = {} is not a nonnegative number", ts[i], ks[i]));
        }
        if i > 0 {
            if ks[i] < ks[i - 1] - 1e-12 * scale {
                return Err(format!("K decreases near t = {:.3e}", ts[i]));
            }
            if ks[i] / ts[i] > ks[i - 1] / ts[i - 1] * (1.0 + 1e-9) + 1e-300 {
                return Err(format!("K(t)/t increases near t = {:.3e}", ts[i]));
            }
        }
        if i > 0 && i + 1 < ks.len() {
            let s1 = (ks[i] - ks[i - 1]) / (ts[i] - ts[i - 1]);
            let s2 = (ks[i + 1] - ks[i]) / (ts[i + 1] - ts[i]);
            if s2 > s1 * (1.0 + 1e-9) + 1e-12 {
                return Err(format!("K is not concave near t = {:.3e}", ts[i]));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pw(breaks: &[f64], values: &[f64]) -> FunctionSample {
        FunctionSample::piecewise("t", breaks.to_vec(), values.to_vec()).unwrap()
    }

    #[test]
    fn rearrange_examples() {
        let r = rearrange(&FunctionSample::indicator(0.3, 0.7).unwrap()).unwrap();
        for &(s, v) in &[(0.1, 1.0), (0.39, 1.0), (0.41, 0.0), (0.9, 0.0)] {
            assert_eq!(r.eval(s), v);
        }
        let r = rearrange(&pw(&[0.0, 0.25, 0.5, 1.0], &[2.0, 5.0, 1.0])).unwrap();
        for &(s, v) in &[(0.1, 5.0), (0.3, 2.0), (0.7, 1.0)] {
            assert_eq!(r.eval(s), v);
        }
        let r = rearrange(&FunctionSample::from_fn("x", |s| s)).unwrap();
        for &s in &[0.001, 0.3, 0.77, 0.999] {
            assert!((r.eval(s) - (1.0 - s)).abs() < 1e-12);
        }
    }

    #[test]
    fn negative_rejected() {
        let f = pw(&[0.0, 1.0], &[-1.0]);
        assert_eq!(rearrange(&f).unwrap_err(), Error::NotNonnegative);
        assert_eq!(k_functional(&f).unwrap_err(), Error::NotNonnegative);
    }

    #[test]
    fn k_examples() {
        let k = k_functional(&pw(&[0.0, 0.25, 0.5, 1.0], &[2.0, 5.0, 1.0])).unwrap();
        assert!((k.eval(0.5) - 1.75).abs() < 1e-15);
        assert!((k.eval(7.0) - 2.25).abs() < 1e-15);
        let k = k_functional(&FunctionSample::from_fn("x", |s| s)).unwrap();
        for &t in &[0.01, 0.2, 0.6, 0.95] {
            assert!((k.eval(t) - (t - t * t / 2.0)).abs() < 1e-8);
        }
        assert!((k.eval(3.0) - 0.5).abs() < 1e-8);
    }

    #[test]
    fn log_profile() {
        let f = FunctionSample::from_ln_fn("log(1/s)", true, |x: f64| -x);
        let k = k_functional(&f).unwrap();
        for &x in &[-1e4, -50.0, -3.0, -0.2] {
            let want = x + ell_ln(x).ln();
            assert!((k.ln_eval(x) - want).abs() < 1e-9, "{x}");
        }
        assert!((k.eval(1.0) - 1.0).abs() < 1e-9);
        check_invariants(&k).unwrap();
    }

    #[test]
    fn synthetic_profiles() {
        let k = synthetic_kprofile(&SyntheticSpec::Min1t).unwrap();
        assert_eq!(k.eval(2.0), 1.0);
        assert_eq!(k.eval(0.5), 0.5);
        let p = synthetic_kprofile(&SyntheticSpec::Power { sigma: 1.0, gamma: 0.0 }).unwrap();
        let chi = k_functional(&FunctionSample::indicator(0.0, 1.0).unwrap()).unwrap();
        for &t in &[1e-5, 0.3, 1.0, 4.0] {
            assert_eq!(p.eval(t), chi.eval(t));
        }
        let c = synthetic_kprofile(&SyntheticSpec::RandomConcave { knots: 20, seed: 7 }).unwrap();
        check_invariants(&c).unwrap();
        assert!(matches!(
            synthetic_kprofile(&SyntheticSpec::Power { sigma: 1.0, gamma: -1.0 }),
            Err(Error::NotQuasiconcave(_))
        ));
        let p = synthetic_kprofile(&SyntheticSpec::Power { sigma: 0.5, gamma: 0.25 }).unwrap();
        assert!((p.eval(0.25) - 0.5 * ell_ln(0.25f64.ln()).powf(0.25)).abs() < 1e-12);
        // √t·ℓ(t) turns down before t = 1.
        assert!(synthetic_kprofile(&SyntheticSpec::Power { sigma: 0.5, gamma: 1.0 }).is_err());
    }

    #[test]
    fn text_format() {
        let f = FunctionSample::parse_text("f", "# comment\n0.1 2\n0.5 3 # tail\n").unwrap();
        assert_eq!(f.eval(0.05), 0.0);
        assert_eq!(f.eval(0.2), 2.0);
        assert_eq!(f.eval(0.9), 3.0);
        let z = FunctionSample::parse_text("e", "").unwrap();
        assert_eq!(k_functional(&z).unwrap().eval(0.5), 0.0);
        assert!(FunctionSample::parse_text("bad", "0.5 x").is_err());
        assert!(FunctionSample::parse_text("bad", "0.5 1\n0.2 1").is_err());
    }

    #[test]
    fn norms_from_profile() {
        let f = pw(&[0.0, 0.25, 0.5, 1.0], &[2.0, 5.0, 1.0]);
        let k = k_functional(&f).unwrap();
        assert_eq!(k.l1_norm(), 2.25);
        assert_eq!(k.linf_norm(), 5.0);
    }

    #[test]
    fn fstar_sample_reproduces_profile() {
        let ks = [
            synthetic_kprofile(&SyntheticSpec::RandomConcave { knots: 20, seed: 7 }).unwrap(),
            synthetic_kprofile(&SyntheticSpec::Power { sigma: 1.0, gamma: 1.0 }).unwrap(),
            k_functional(&FunctionSample::random_piecewise(4)).unwrap(),
        ];
        for k in &ks {
            let back = k_functional(&k.fstar_sample()).unwrap();
            for &x in &[-40.0, -5.0, -1.0, -0.01, 0.0] {
                let (a, b) = (back.eval_ln(x), k.eval_ln(x));
                assert!((a - b).abs() <= 1e-8 * b, "{} at {x}: {a} vs {b}", k.name);
            }
        }
    }
}
