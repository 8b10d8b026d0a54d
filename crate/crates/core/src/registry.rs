//! Name resolution for weights, test functions and K-profiles.
//!
//! Weight expressions:
//!
//! ```text
//! expr   := factor (('*' | '/') factor)*
//! factor := atom ('^' number)?
//! atom   := number | 'ell' | 'const' | 'const(' number ')'
//!         | 'broken_log(' number ',' number ')' | 'reflect(' expr ')'
//!         | 'unit(' expr ')' | 'compose(' expr ',' expr ')' | '(' expr ')'
//! ```

use crate::error::{Error, Result};
use crate::kcalc::{k_functional, synthetic_kprofile, FunctionSample, KProfile, SyntheticSpec};
use crate::svfun::{sv_compose, SlowlyVarying};

/// Weight names understood by [`parse_weight`], with a one-line description each.
pub const WEIGHT_HELP: &[(&str, &str)] = &[
    ("ell", "1 + |ln t|"),
    ("ell^g", "power of ell, g real"),
    ("const | const(c)", "constant 1 or c"),
    ("broken_log(a,b)", "ell^a on (0,1], ell^b on (1,inf)"),
    ("reflect(w)", "t -> w(1/t)"),
    ("unit(w)", "w restricted to (0,1)"),
    ("compose(w,m)", "t -> w(m(t)) for an almost monotone m"),
    ("w1*w2, w1/w2, c*w", "products, quotients and multiples"),
];

/// Function names understood by [`parse_function`].
pub const FUNCTION_HELP: &[(&str, &str)] = &[
    ("const:c", "f = c on (0,1)"),
    ("zero", "f = 0"),
    ("indicator:a,b", "characteristic function of (a,b)"),
    ("x", "f(x) = x"),
    ("log", "f(x) = ln(1/x)"),
    ("piecewise:seed", "random step function"),
    ("file:path", "lines 'breakpoint value'"),
];

/// K-profile names understood by [`parse_kprofile`].
pub const KPROFILE_HELP: &[(&str, &str)] = &[
    ("min1t", "K(t) = min(1,t)"),
    ("power:s,g", "K(t) = t^s ell^g(t) on (0,1]"),
    ("random_concave:knots,seed", "random concave piecewise linear profile"),
    ("fn:<function>", "K-functional of a named function"),
];

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: &str) -> Result<T> {
        Err(Error::Parse(format!(
            "{msg} at position {} in '{}'",
            self.pos,
            String::from_utf8_lossy(self.s)
        )))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) { Ok(()) } else { self.err(&format!("expected '{}'", c as char)) }
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        if matches!(self.s.get(self.pos), Some(b'+' | b'-')) {
            self.pos += 1;
        }
        while let Some(&c) = self.s.get(self.pos) {
            let exp_sign = matches!(c, b'+' | b'-') && matches!(self.s[self.pos - 1], b'e' | b'E');
            if c.is_ascii_digit() || c == b'.' || c == b'e' || c == b'E' || exp_sign {
                self.pos += 1;
            } else {
                break;
            }
        }
        let txt = std::str::from_utf8(&self.s[start..self.pos]).unwrap_or("");
        match txt.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => {
                self.pos = start;
                self.err("expected a number")
            }
        }
    }

    fn ident(&mut self) -> String {
        self.skip_ws();
        let start = self.pos;
        while let Some(&c) = self.s.get(self.pos) {
            if c.is_ascii_alphanumeric() || c == b'_' {
                self.pos += 1;
            } else {
                break;
            }
        }
        String::from_utf8_lossy(&self.s[start..self.pos]).into_owned()
    }

    fn expr(&mut self) -> Result<SlowlyVarying> {
        let mut acc = self.factor()?;
        loop {
            if self.eat(b'*') {
                acc = acc.mul(&self.factor()?);
            } else if self.eat(b'/') {
                acc = acc.mul(&self.factor()?.powf(-1.0));
            } else {
                return Ok(acc);
            }
        }
    }

    fn exponent(&mut self) -> Result<f64> {
        if self.eat(b'(') {
            let v = self.number()?;
            self.expect(b')')?;
            Ok(v)
        } else {
            self.number()
        }
    }

    fn factor(&mut self) -> Result<SlowlyVarying> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let r = self.exponent()?;
            if let Some((alpha, beta)) = broken_exponents(&base) {
                return Ok(SlowlyVarying::broken_log(alpha * r, beta * r));
            }
            return Ok(base.powf(r));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<SlowlyVarying> {
        match self.peek() {
            None => self.err("unexpected end"),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' || c == b'-' || c == b'+' => {
                Ok(SlowlyVarying::constant(self.number()?))
            }
            Some(_) => {
                let id = self.ident();
                match id.as_str() {
                    "ell" => Ok(SlowlyVarying::ell()),
                    "const" => {
                        if self.eat(b'(') {
                            let c = self.number()?;
                            self.expect(b')')?;
                            if c <= 0.0 {
                                return self.err("constant weight must be positive");
                            }
                            Ok(SlowlyVarying::constant(c))
                        } else {
                            Ok(SlowlyVarying::constant(1.0))
                        }
                    }
                    "broken_log" => {
                        self.expect(b'(')?;
                        let a = self.number()?;
                        self.expect(b',')?;
                        let b = self.number()?;
                        self.expect(b')')?;
                        Ok(SlowlyVarying::broken_log(a, b))
                    }
                    "reflect" => {
                        self.expect(b'(')?;
                        let e = self.expr()?;
                        self.expect(b')')?;
                        Ok(e.reflect())
                    }
                    "unit" => {
                        self.expect(b'(')?;
                        let e = self.expr()?;
                        self.expect(b')')?;
                        Ok(e.on_unit())
                    }
                    "compose" => {
                        self.expect(b'(')?;
                        let b = self.expr()?;
                        self.expect(b',')?;
                        let mu = self.expr()?;
                        self.expect(b')')?;
                        sv_compose(&b, &mu.as_positive())
                    }
                    "" => self.err("expected a weight"),
                    other => self.err(&format!("unknown weight '{other}'")),
                }
            }
        }
    }
}

/// Recovers (α, β) from the names produced by [`SlowlyVarying::broken_log`].
fn broken_exponents(b: &SlowlyVarying) -> Option<(f64, f64)> {
    let n = b.name();
    if n == "ell" {
        return Some((1.0, 1.0));
    }
    if n == "const" {
        return Some((0.0, 0.0));
    }
    if let Some(rest) = n.strip_prefix("ell^") {
        let g = rest.parse().ok()?;
        return Some((g, g));
    }
    let inner = n.strip_prefix("broken_log(")?.strip_suffix(')')?;
    let (a, b) = inner.split_once(',')?;
    Some((a.parse().ok()?, b.parse().ok()?))
}

/// Parses a weight expression; the result is named by the trimmed input.
pub fn parse_weight(s: &str) -> Result<SlowlyVarying> {
    let mut p = Parser { s: s.as_bytes(), pos: 0 };
    let w = p.expr()?;
    if p.peek().is_some() {
        return p.err("trailing input");
    }
    Ok(w.renamed(s.trim()))
}

fn nums(s: &str, n: usize, what: &str) -> Result<Vec<f64>> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Parse(format!("{what}: expected {n} numbers, got '{s}'")))?;
    if v.len() != n {
        return Err(Error::Parse(format!("{what}: expected {n} numbers, got '{s}'")));
    }
    Ok(v)
}

/// ln(1/s) as a nonincreasing closure.
pub fn log_function() -> FunctionSample {
    FunctionSample::from_ln_fn("log", true, |x: f64| (-x).max(0.0))
}

/// f(x) = x on (0,1).
pub fn identity_function() -> FunctionSample {
    FunctionSample::from_fn("x", |s| s)
}

/// Resolves a function name (see [`FUNCTION_HELP`]).
pub fn parse_function(s: &str) -> Result<FunctionSample> {
    let s = s.trim();
    let (head, rest) = s.split_once(':').unwrap_or((s, ""));
    match head {
        "zero" => Ok(FunctionSample::zero()),
        "x" => Ok(identity_function()),
        "log" => Ok(log_function()),
        "const" => {
            let c = nums(rest, 1, "const")?[0];
            if c < 0.0 {
                return Err(Error::Parse("const: value must be nonnegative".into()));
            }
            Ok(FunctionSample::constant(c))
        }
        "indicator" | "chi" => {
            let v = nums(rest, 2, "indicator")?;
            FunctionSample::indicator(v[0], v[1]).map_err(|e| Error::Parse(e.to_string()))
        }
        "piecewise" => {
            let seed = rest
                .trim()
                .trim_start_matches("seed=")
                .parse::<u64>()
                .map_err(|_| Error::Parse(format!("piecewise: bad seed '{rest}'")))?;
            Ok(FunctionSample::random_piecewise(seed))
        }
        "file" => {
            let text = std::fs::read_to_string(rest)?;
            FunctionSample::parse_text(rest, &text)
        }
        _ => Err(Error::Parse(format!("unknown function '{s}'"))),
    }
}

/// Resolves a K-profile name (see [`KPROFILE_HELP`]).
pub fn parse_kprofile(s: &str) -> Result<KProfile> {
    let s = s.trim();
    if let Some(f) = s.strip_prefix("fn:") {
        return k_functional(&parse_function(f)?);
    }
    let (head, rest) = s.split_once(':').unwrap_or((s, ""));
    let spec = match head {
        "min1t" => SyntheticSpec::Min1t,
        "power" => {
            let v = nums(rest, 2, "power")?;
            SyntheticSpec::Power { sigma: v[0], gamma: v[1] }
        }
        "random_concave" => {
            let v = nums(rest, 2, "random_concave")?;
            if v[0] < 0.0 || v[1] < 0.0 || v[0].fract() != 0.0 || v[1].fract() != 0.0 {
                return Err(Error::Parse("random_concave: knots and seed must be integers".into()));
            }
            SyntheticSpec::RandomConcave { knots: v[0] as usize, seed: v[1] as u64 }
        }
        _ => return Err(Error::Parse(format!("unknown K-profile '{s}'"))),
    };
    synthetic_kprofile(&spec)
}
