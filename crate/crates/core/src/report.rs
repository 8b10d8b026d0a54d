//! Ratio reports: the record of one equivalence experiment.

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
}

impl Band {
    pub const UNBOUNDED: Band = Band { lo: 0.0, hi: f64::INFINITY };

    pub fn upper(hi: f64) -> Band {
        Band { lo: 0.0, hi }
    }
}

impl Default for Band {
    fn default() -> Self {
        Band::UNBOUNDED
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
        })
    }
}

/// Growth of the band width allowed when the sweep grid is doubled.
pub const MAX_GROWTH: f64 = 0.05;
/// Default bound on ratio_max / ratio_min.
pub const DEFAULT_WIDTH: f64 = 1e3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub experiment_id: String,
    pub grid: Vec<f64>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub band: Band,
    pub max_width: f64,
    pub one_sided: bool,
    /// Relative growth of the band width on the doubled grid, when measured.
    pub growth: Option<f64>,
    pub divergent: bool,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

impl RatioReport {
    /// Builds the report and its verdict. Points where both sides vanish are skipped;
    /// a non-finite side or a zero denominator sets the divergence flag.
    pub fn new(
        id: impl Into<String>,
        grid: Vec<f64>,
        lhs: Vec<f64>,
        rhs: Vec<f64>,
        band: Band,
        max_width: f64,
        one_sided: bool,
    ) -> Self {
        let mut r = RatioReport {
            experiment_id: id.into(),
            grid,
            lhs,
            rhs,
            ratio_min: f64::NAN,
            ratio_max: f64::NAN,
            band,
            max_width,
            one_sided,
            growth: None,
            divergent: false,
            verdict: Verdict::Fail,
            notes: Vec::new(),
        };
        r.evaluate();
        r
    }

    pub fn ratios(&self) -> Vec<f64> {
        self.lhs.iter().zip(&self.rhs).map(|(l, r)| l / r).collect()
    }

    /// ratio_max / ratio_min.
    pub fn width(&self) -> f64 {
        self.ratio_max / self.ratio_min
    }

    fn evaluate(&mut self) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut skipped = 0;
        self.divergent = false;
        for (l, r) in self.lhs.iter().zip(&self.rhs) {
            if *l == 0.0 && *r == 0.0 {
                skipped += 1;
                continue;
            }
            let q = l / r;
            if !l.is_finite() || !r.is_finite() || !q.is_finite() || q.is_nan() {
                self.divergent = true;
                continue;
            }
            lo = lo.min(q);
            hi = hi.max(q);
        }
        self.notes.retain(|n| !n.starts_with("skipped") && !n.starts_with("divergent"));
        if skipped > 0 {
            self.notes.push(format!("skipped {skipped} points where both sides vanish"));
        }
        if self.divergent {
            self.notes.push("divergent: a side is infinite or the denominator vanishes".into());
        }
        if lo > hi {
            // Nothing measurable: all points skipped (a vacuous 0 = 0 pass) or all divergent.
            self.ratio_min = if self.divergent { f64::INFINITY } else { 1.0 };
            self.ratio_max = self.ratio_min;
        } else {
            self.ratio_min = lo;
            self.ratio_max = hi;
        }
        let ok = if self.divergent {
            false
        } else if self.one_sided {
            self.ratio_max <= self.band.hi
        } else {
            self.ratio_min >= self.band.lo
                && self.ratio_max <= self.band.hi
                && self.width() <= self.max_width
                && self.growth.is_none_or(|g| g < MAX_GROWTH)
        };
        let checks_ok = !self.notes.iter().any(|n| n.starts_with("check failed"));
        self.verdict = if ok && checks_ok { Verdict::Pass } else { Verdict::Fail };
    }

    /// Records the band-width growth against the same experiment on a doubled grid.
    pub fn with_growth(mut self, doubled: &RatioReport) -> Self {
        let g = if self.one_sided {
            doubled.ratio_max / self.ratio_max - 1.0
        } else {
            doubled.width() / self.width() - 1.0
        };
        self.growth = Some(if g.is_nan() { f64::INFINITY } else { g });
        if doubled.divergent {
            self.divergent = true;
        }
        self.notes.push(format!("doubled-grid band growth {:.3e}", self.growth.unwrap()));
        self.evaluate();
        if self.divergent && !self.notes.iter().any(|n| n.starts_with("divergent")) {
            self.notes.push("divergent: doubled grid produced an infinite side".into());
            self.verdict = Verdict::Fail;
        }
        self
    }

    /// Re-evaluates the verdict against another acceptance band.
    pub fn with_band(mut self, band: Band, max_width: f64) -> Self {
        self.band = band;
        self.max_width = max_width;
        self.evaluate();
        self
    }

    pub fn note(mut self, n: impl Into<String>) -> Self {
        self.notes.push(n.into());
        self
    }

    /// Marks the experiment failed with a reason (for checks beyond the ratio band).
    pub fn fail(mut self, why: impl Into<String>) -> Self {
        self.notes.push(format!("check failed: {}", why.into()));
        self.verdict = Verdict::Fail;
        self
    }

    /// CSV of (grid_point, lhs, rhs, ratio) with fixed formatting.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("grid_point,lhs,rhs,ratio\n");
        for i in 0..self.grid.len() {
            let (l, r) = (self.lhs[i], self.rhs[i]);
            let _ = writeln!(
                s,
                "{},{},{},{}",
                fmt_num(self.grid[i]),
                fmt_num(l),
                fmt_num(r),
                fmt_num(if l == 0.0 && r == 0.0 { f64::NAN } else { l / r })
            );
        }
        s
    }

    /// One-line verdict.
    pub fn summary_line(&self) -> String {
        format!(
            "{} {} ratio_min={} ratio_max={} width={}{}",
            self.experiment_id,
            self.verdict,
            fmt_num(self.ratio_min),
            fmt_num(self.ratio_max),
            fmt_num(self.width()),
            if self.one_sided { " one_sided" } else { "" }
        )
    }
}

/// Fixed-width scientific notation used in all CSV output.
pub fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.12e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_rules() {
        let r = RatioReport::new("a", vec![1.0, 2.0], vec![1.0, 3.0], vec![1.0, 1.0], Band::UNBOUNDED, 10.0, false);
        assert_eq!(r.verdict, Verdict::Pass);
        assert_eq!((r.ratio_min, r.ratio_max), (1.0, 3.0));
        let r = RatioReport::new("b", vec![1.0, 2.0], vec![1.0, 30.0], vec![1.0, 1.0], Band::UNBOUNDED, 10.0, false);
        assert_eq!(r.verdict, Verdict::Fail);
        let r = RatioReport::new("c", vec![1.0], vec![f64::INFINITY], vec![1.0], Band::UNBOUNDED, 10.0, false);
        assert!(r.divergent && r.verdict == Verdict::Fail);
        let r = RatioReport::new("d", vec![1.0], vec![0.0], vec![0.0], Band::UNBOUNDED, 10.0, false);
        assert_eq!(r.verdict, Verdict::Pass);
        let r = RatioReport::new("e", vec![1.0, 2.0], vec![0.1, 0.5], vec![1.0, 1.0], Band::upper(1.0), 10.0, true);
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn growth_gate() {
        let a = RatioReport::new("a", vec![1.0, 2.0], vec![1.0, 3.0], vec![1.0, 1.0], Band::UNBOUNDED, 10.0, false);
        let b = RatioReport::new("a", vec![1.0, 2.0], vec![1.0, 3.3], vec![1.0, 1.0], Band::UNBOUNDED, 10.0, false);
        assert_eq!(a.clone().with_growth(&b).verdict, Verdict::Fail);
        assert_eq!(a.clone().with_growth(&a).verdict, Verdict::Pass);
    }

    #[test]
    fn csv_is_stable() {
        let r = RatioReport::new("a", vec![0.5], vec![1.0], vec![3.0], Band::UNBOUNDED, 10.0, false);
        assert_eq!(
            r.to_csv(),
            "grid_point,lhs,rhs,ratio\n5.000000000000e-1,1.000000000000e0,3.000000000000e0,3.333333333333e-1\n"
        );
    }
}
