//! JSON experiment descriptors, their execution and the files they produce.

use crate::dyadic::{make_grid, seq_hardy_check, DiscreteSeq, HardyDirection};
use crate::error::{Error, Result};
use crate::nested::GridConfig;
use crate::norms::RISpaceSpec;
use crate::registry::{parse_kprofile, parse_weight};
use crate::report::{fmt_num, Band, RatioReport, Verdict};
use crate::svfun::SlowlyVarying;
use crate::verify::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    LimitingEstimate,
    SvScaling,
    SvEmbedding,
    LimitHardy,
    SequenceHardy,
    KeyEquivalence,
    DiscreteEquivalence,
    Holmstedt,
    ChangeOfVariables,
    Reiteration,
    ThreeWeightIdentity,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 11] = [
        ExperimentKind::LimitingEstimate,
        ExperimentKind::SvScaling,
        ExperimentKind::SvEmbedding,
        ExperimentKind::LimitHardy,
        ExperimentKind::SequenceHardy,
        ExperimentKind::KeyEquivalence,
        ExperimentKind::DiscreteEquivalence,
        ExperimentKind::Holmstedt,
        ExperimentKind::ChangeOfVariables,
        ExperimentKind::Reiteration,
        ExperimentKind::ThreeWeightIdentity,
    ];

    pub fn name(self) -> String {
        serde_json::to_value(self).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default()
    }

    /// Kinds that sweep t (or u) over a log grid and are re-run on the extended grid.
    pub fn sweeps_grid(self) -> bool {
        !matches!(
            self,
            ExperimentKind::SequenceHardy
                | ExperimentKind::ChangeOfVariables
                | ExperimentKind::Reiteration
                | ExperimentKind::ThreeWeightIdentity
        )
    }
}

/// Acceptance band; a missing `hi` means unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandSpec {
    #[serde(default)]
    pub lo: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_width: Option<f64>,
}

impl BandSpec {
    pub fn band(&self) -> Band {
        Band { lo: self.lo, hi: self.hi.unwrap_or(f64::INFINITY) }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentDescriptor {
    pub id: String,
    pub kind: ExperimentKind,
    #[serde(default)]
    pub params: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<LogGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band: Option<BandSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Expected to be refused by a hypothesis gate or to fail.
    #[serde(default)]
    pub negative_control: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

pub fn default_grid() -> LogGrid {
    LogGrid::new(1e-6, 1e6, 25)
}

impl ExperimentDescriptor {
    pub fn parse(text: &str) -> Result<Self> {
        let d: ExperimentDescriptor =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("descriptor: {e}")))?;
        d.validate()?;
        Ok(d)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| match e {
            Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Checks the grid and that every weight and space name resolves.
    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() || !self.id.chars().all(|c| c.is_ascii_alphanumeric() || "_-.".contains(c)) {
            return Err(Error::Parse(format!("id `{}` must be nonempty [A-Za-z0-9_.-]", self.id)));
        }
        self.grid().validate().map_err(|e| Error::Parse(e.to_string()))?;
        Experiment::from_descriptor(self).map(|_| ())
    }

    pub fn grid(&self) -> LogGrid {
        self.grid.unwrap_or_else(default_grid)
    }
}

fn params<T: for<'de> Deserialize<'de>>(d: &ExperimentDescriptor) -> Result<T> {
    let v = if d.params.is_null() { serde_json::json!({}) } else { d.params.clone() };
    serde_json::from_value(v).map_err(|e| Error::Parse(format!("{} params: {e}", d.kind.name())))
}

fn weight(s: &str) -> Result<SlowlyVarying> {
    parse_weight(s)
}

fn resolution(per_decade: Option<usize>) -> Result<GridConfig> {
    let mut g = experiment_grid();
    if let Some(n) = per_decade {
        if n < 8 {
            return Err(Error::Parse(format!("per_decade must be at least 8, got {n}")));
        }
        g.per_decade = n;
    }
    Ok(g)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LimitingParams {
    b: String,
    e: RISpaceSpec,
    side: Side,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScalingParams {
    b: String,
    alpha: f64,
    e: RISpaceSpec,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EmbeddingParams {
    b: String,
    phi: String,
    e: RISpaceSpec,
    side: Side,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HardyParams {
    b: String,
    e: RISpaceSpec,
    side: HardySide,
    #[serde(default)]
    family: BumpFamily,
    #[serde(default)]
    force: bool,
}

fn default_trials() -> usize {
    100
}

fn default_k_range() -> i64 {
    40
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SeqHardyParams {
    sigma_ratio: f64,
    e: RISpaceSpec,
    direction: HardyDirection,
    #[serde(default = "default_trials")]
    trials: usize,
    #[serde(default = "default_k_range")]
    k_range: i64,
    #[serde(default)]
    seed: Option<u64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NestedParams {
    a: String,
    b: String,
    e: RISpaceSpec,
    f: RISpaceSpec,
    g: RISpaceSpec,
    side: PairSide,
    #[serde(default)]
    family: BumpFamily,
    #[serde(default)]
    per_decade: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HolmstedtParams {
    theta: f64,
    b0: String,
    b1: String,
    a: String,
    e0: RISpaceSpec,
    e1: RISpaceSpec,
    f: RISpaceSpec,
    /// A K-profile name, e.g. `fn:piecewise:3`.
    function: String,
    #[serde(default)]
    per_decade: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CovParams {
    theta: f64,
    b: String,
    phi: String,
    e: RISpaceSpec,
    #[serde(default)]
    seed: Option<u64>,
}

/// η as a number or as `"M1"` / `"M2"`.
#[derive(Deserialize, Clone)]
#[serde(untagged)]
enum EtaSpec {
    Value(f64),
    Named(String),
}

fn default_reiteration_b() -> String {
    "unit(ell^-1)".into()
}

fn default_l2() -> RISpaceSpec {
    RISpaceSpec::lq(2.0)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ReiterationParams {
    alpha: f64,
    beta: f64,
    p: f64,
    eta: EtaSpec,
    #[serde(default)]
    case: Option<ReiterationCase>,
    #[serde(default = "default_reiteration_b")]
    b: String,
    #[serde(default = "default_l2")]
    e: RISpaceSpec,
    #[serde(default)]
    per_decade: Option<usize>,
    #[serde(default)]
    seed: Option<u64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ThreeWeightParams {
    theta: f64,
    a: String,
    b: String,
    c: String,
    e: RISpaceSpec,
    f: RISpaceSpec,
    g: RISpaceSpec,
    side: PairSide,
    #[serde(default)]
    per_decade: Option<usize>,
    #[serde(default)]
    seed: Option<u64>,
}

/// A descriptor with every name resolved.
enum Experiment {
    Limiting(SlowlyVarying, RISpaceSpec, Side),
    Scaling(SlowlyVarying, f64, RISpaceSpec),
    Embedding(SlowlyVarying, crate::svfun::PositiveFn, RISpaceSpec, Side),
    Hardy(SlowlyVarying, RISpaceSpec, HardySide, BumpFamily, bool),
    SeqHardy(SeqHardyParams),
    Key(NestedSetup),
    Discrete(NestedSetup),
    Holmstedt(HolmstedtSetup, String),
    Cov(f64, SlowlyVarying, SlowlyVarying, RISpaceSpec, Option<u64>),
    Reiteration(ReiterationSetup, Option<ReiterationCase>, Option<u64>),
    ThreeWeight(ThreeWeightSetup, Option<u64>),
}

impl Experiment {
    fn from_descriptor(d: &ExperimentDescriptor) -> Result<Self> {
        use ExperimentKind as K;
        Ok(match d.kind {
            K::LimitingEstimate => {
                let p: LimitingParams = params(d)?;
                Experiment::Limiting(weight(&p.b)?, p.e, p.side)
            }
            K::SvScaling => {
                let p: ScalingParams = params(d)?;
                Experiment::Scaling(weight(&p.b)?, p.alpha, p.e)
            }
            K::SvEmbedding => {
                let p: EmbeddingParams = params(d)?;
                Experiment::Embedding(weight(&p.b)?, parse_positive(&p.phi)?, p.e, p.side)
            }
            K::LimitHardy => {
                let p: HardyParams = params(d)?;
                Experiment::Hardy(weight(&p.b)?, p.e, p.side, p.family, p.force)
            }
            K::SequenceHardy => {
                let p: SeqHardyParams = params(d)?;
                if !(p.sigma_ratio > 0.0) || p.k_range < 1 || p.k_range > 40 {
                    return Err(Error::Parse("sequence_hardy needs sigma_ratio > 0 and 1 <= k_range <= 40".into()));
                }
                Experiment::SeqHardy(p)
            }
            K::KeyEquivalence | K::DiscreteEquivalence => {
                let p: NestedParams = params(d)?;
                let s = NestedSetup {
                    a: weight(&p.a)?,
                    b: weight(&p.b)?,
                    e: p.e,
                    f: p.f,
                    g: p.g,
                    side: p.side,
                    family: p.family,
                    resolution: resolution(p.per_decade)?,
                };
                if d.kind == K::KeyEquivalence { Experiment::Key(s) } else { Experiment::Discrete(s) }
            }
            K::Holmstedt => {
                let p: HolmstedtParams = params(d)?;
                parse_kprofile(&p.function)?;
                let s = HolmstedtSetup {
                    theta: p.theta,
                    b0: weight(&p.b0)?,
                    b1: weight(&p.b1)?,
                    a: weight(&p.a)?,
                    e0: p.e0,
                    e1: p.e1,
                    f: p.f,
                    resolution: resolution(p.per_decade)?,
                };
                Experiment::Holmstedt(s, p.function)
            }
            K::ChangeOfVariables => {
                let p: CovParams = params(d)?;
                Experiment::Cov(p.theta, weight(&p.b)?, weight(&p.phi)?, p.e, p.seed)
            }
            K::Reiteration => {
                let p: ReiterationParams = params(d)?;
                let eta = match &p.eta {
                    EtaSpec::Value(v) => *v,
                    EtaSpec::Named(n) => {
                        let (m1, m2) = grand_small_m(p.alpha, p.beta, p.p);
                        match n.to_ascii_lowercase().as_str() {
                            "m1" => m1,
                            "m2" => m2,
                            _ => return Err(Error::Parse(format!("eta `{n}`: expected a number, M1 or M2"))),
                        }
                    }
                };
                let s = ReiterationSetup {
                    alpha: p.alpha,
                    beta: p.beta,
                    p: p.p,
                    eta,
                    b: weight(&p.b)?.on_unit(),
                    e: p.e,
                    resolution: resolution(p.per_decade)?,
                };
                Experiment::Reiteration(s, p.case, p.seed)
            }
            K::ThreeWeightIdentity => {
                let p: ThreeWeightParams = params(d)?;
                let s = ThreeWeightSetup {
                    theta: p.theta,
                    a: weight(&p.a)?,
                    b: weight(&p.b)?,
                    c: weight(&p.c)?,
                    e: p.e,
                    f: p.f,
                    g: p.g,
                    side: p.side,
                    resolution: resolution(p.per_decade)?,
                };
                Experiment::ThreeWeight(s, p.seed)
            }
        })
    }

    fn run(&self, grid: &LogGrid, seed: u64) -> Result<RatioReport> {
        match self {
            Experiment::Limiting(b, e, side) => verify_limiting_estimate(b, e, *side, grid),
            Experiment::Scaling(b, alpha, e) => verify_sv_scaling(b, *alpha, e, grid),
            Experiment::Embedding(b, phi, e, side) => verify_sv_embedding(b, phi, e, *side, grid),
            Experiment::Hardy(b, e, side, fam, force) => verify_limit_hardy(b, e, *side, *fam, grid, *force),
            Experiment::SeqHardy(p) => sequence_hardy_trials(p, p.seed.unwrap_or(seed)),
            Experiment::Key(s) => verify_key_equivalence(s, grid),
            Experiment::Discrete(s) => verify_discrete_equivalence(s, grid),
            Experiment::Holmstedt(s, f) => verify_holmstedt(&parse_kprofile(f)?, s, grid),
            Experiment::Cov(theta, b, phi, e, sd) => {
                verify_change_of_variables(&default_corpus(sd.unwrap_or(seed))?, *theta, b, phi, e)
            }
            Experiment::Reiteration(s, case, sd) => {
                Ok(verify_reiteration(*case, s, &default_corpus(sd.unwrap_or(seed))?)?.report)
            }
            Experiment::ThreeWeight(s, sd) => verify_three_weight_identity(s, &default_corpus(sd.unwrap_or(seed))?),
        }
    }
}

/// Trial 0 is the unit sequence at k = 0 (the extremal geometric example); the other
/// trials are random nonnegative sequences.
fn sequence_hardy_trials(p: &SeqHardyParams, seed: u64) -> Result<RatioReport> {
    let g = make_grid(-p.k_range, p.k_range)?;
    let sigma = DiscreteSeq::from_fn(&g, |k| p.sigma_ratio.powi(k as i32));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lhs = Vec::new();
    let mut rhs = Vec::new();
    let mut band = Band::UNBOUNDED;
    let mut notes = Vec::new();
    for trial in 0..=p.trials {
        let x = if trial == 0 {
            DiscreteSeq::from_fn(&g, |k| if k == 0 { 1.0 } else { 0.0 })
        } else {
            DiscreteSeq::from_fn(&g, |_| if rng.gen::<f64>() < 0.3 { 0.0 } else { rng.gen::<f64>() * 10f64.powf(rng.gen_range(-3.0..3.0)) })
        };
        let r = seq_hardy_check(&sigma, &x, &p.e, p.direction)?;
        if trial == 0 {
            let constant = r.band.hi / (1.0 + 1e-12);
            band = Band { lo: r.band.lo, hi: constant + 1e-9 };
            notes = r.notes.clone();
        }
        lhs.push(r.lhs[0]);
        rhs.push(r.rhs[0]);
    }
    let grid: Vec<f64> = (0..=p.trials).map(|i| i as f64).collect();
    let mut rep = RatioReport::new("sequence_hardy", grid, lhs, rhs, band, f64::INFINITY, false);
    for n in notes {
        rep = rep.note(n);
    }
    Ok(rep)
}

/// Outcome of one descriptor.
#[derive(Debug, Clone)]
pub enum Status {
    Pass,
    Fail,
    HypothesisViolated(String),
    Error(Error),
}

impl Status {
    /// The process exit code of `verify` for this outcome.
    pub fn exit_code(&self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::HypothesisViolated(_) => 4,
            Status::Error(e) => error_exit_code(e),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::HypothesisViolated(_) => "hypothesis_violated",
            Status::Error(Error::QuadratureNonconvergent(_)) | Status::Error(Error::IndexUnstable { .. }) => {
                "quadrature_failure"
            }
            Status::Error(_) => "error",
        }
    }
}

/// 2 for input errors, 3 for numerical failures, 4 for hypothesis gates.
pub fn error_exit_code(e: &Error) -> i32 {
    if e.is_hypothesis() {
        4
    } else {
        match e {
            Error::QuadratureNonconvergent(_) | Error::IndexUnstable { .. } => 3,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub id: String,
    pub negative_control: bool,
    pub status: Status,
    pub report: Option<RatioReport>,
    pub wall_time: f64,
}

impl RunResult {
    /// The verdict line printed by `verify`.
    pub fn verdict_line(&self) -> String {
        match (&self.status, &self.report) {
            (Status::Pass | Status::Fail, Some(r)) => {
                let growth = r.growth.map(|g| format!(" growth={}", fmt_num(g))).unwrap_or_default();
                format!("{}{}", r.summary_line(), growth)
            }
            (Status::HypothesisViolated(m), _) => format!("{} hypothesis_violated ({m})", self.id),
            (Status::Error(e), _) => format!("{} {} ({e})", self.id, self.status.label()),
            _ => format!("{} {}", self.id, self.status.label()),
        }
    }

    /// Whether the outcome is the expected one: a pass for claims, a refusal or a
    /// failure for negative controls.
    pub fn as_expected(&self) -> bool {
        if self.negative_control {
            matches!(self.status, Status::Fail | Status::HypothesisViolated(_))
        } else {
            matches!(self.status, Status::Pass)
        }
    }
}

/// Runs one descriptor: the sweep, then (for grid sweeps) the same sweep on the
/// extended grid to measure band growth.
pub fn run_descriptor(d: &ExperimentDescriptor, seed: u64) -> RunResult {
    let start = Instant::now();
    let out = (|| -> Result<RatioReport> {
        let exp = Experiment::from_descriptor(d)?;
        let grid = d.grid();
        grid.validate().map_err(|e| Error::Parse(e.to_string()))?;
        let mut rep = exp.run(&grid, seed)?;
        if d.kind.sweeps_grid() {
            let ext = exp.run(&grid.extended(), seed)?;
            rep = rep.with_growth(&ext);
        }
        rep.experiment_id = d.id.clone();
        if let Some(b) = d.band {
            let w = b.max_width.unwrap_or(rep.max_width);
            rep = rep.with_band(b.band(), w);
        }
        Ok(rep)
    })();
    let (status, report) = match out {
        Ok(r) => (if r.verdict == Verdict::Pass { Status::Pass } else { Status::Fail }, Some(r)),
        Err(e) if e.is_hypothesis() => (Status::HypothesisViolated(e.to_string()), None),
        Err(e) => (Status::Error(e), None),
    };
    RunResult { id: d.id.clone(), negative_control: d.negative_control, status, report, wall_time: start.elapsed().as_secs_f64() }
}

/// Writes `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Writes `<id>.csv` and `<id>.svg`; returns the paths written.
pub fn write_artifacts(r: &RunResult, dir: &Path, log_x: bool) -> Result<Vec<PathBuf>> {
    let Some(rep) = &r.report else {
        return Ok(Vec::new());
    };
    let csv = dir.join(format!("{}.csv", r.id));
    let svg = dir.join(format!("{}.svg", r.id));
    write_atomic(&csv, &rep.to_csv())?;
    write_atomic(&svg, &ratio_svg(rep, log_x))?;
    Ok(vec![csv, svg])
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Line chart of log₁₀(lhs/rhs) against log₁₀ of the grid point (or the index).
pub fn ratio_svg(r: &RatioReport, log_x: bool) -> String {
    let (w, h, m) = (640.0, 400.0, 60.0);
    let pts: Vec<(f64, f64)> = r
        .grid
        .iter()
        .zip(r.ratios())
        .map(|(&g, q)| (if log_x { g.log10() } else { g }, q.log10()))
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .collect();
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{m}" y="24" font-family="sans-serif" font-size="14">{} ({})</text>"#, esc(&r.experiment_id), r.verdict);
    let (xl, yl) = (if log_x { "log10 grid point" } else { "index" }, "log10 lhs/rhs");
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">{xl}</text>"#, w / 2.0, h - 15.0);
    let _ = writeln!(s, r#"<text x="15" y="{}" font-family="sans-serif" font-size="12" transform="rotate(-90 15 {})" text-anchor="middle">{yl}</text>"#, h / 2.0, h / 2.0);
    let _ = writeln!(s, r#"<rect x="{m}" y="{m}" width="{}" height="{}" fill="none" stroke="black"/>"#, w - 2.0 * m, h - 2.0 * m);
    if pts.is_empty() {
        let _ = writeln!(s, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">no finite ratios</text>"#, w / 2.0, h / 2.0);
        s.push_str("</svg>\n");
        return s;
    }
    let (mut x0, mut x1) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)));
    let (mut y0, mut y1) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.1), b.max(p.1)));
    if x1 - x0 < 1e-12 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if y1 - y0 < 0.1 {
        let c = 0.5 * (y0 + y1);
        y0 = c - 0.05;
        y1 = c + 0.05;
    }
    let px = |x: f64| m + (x - x0) / (x1 - x0) * (w - 2.0 * m);
    let py = |y: f64| h - m - (y - y0) / (y1 - y0) * (h - 2.0 * m);
    for (v, anchor, lbl) in [(y0, py(y0), fmt_tick(y0)), (y1, py(y1), fmt_tick(y1))] {
        let _ = v;
        let _ = writeln!(s, r#"<text x="{}" y="{:.2}" font-family="sans-serif" font-size="10" text-anchor="end">{lbl}</text>"#, m - 4.0, anchor + 3.0);
    }
    for (x, lbl) in [(x0, fmt_tick(x0)), (x1, fmt_tick(x1))] {
        let _ = writeln!(s, r#"<text x="{:.2}" y="{}" font-family="sans-serif" font-size="10" text-anchor="middle">{lbl}</text>"#, px(x), h - m + 14.0);
    }
    for edge in [r.band.lo, r.band.hi] {
        let y = edge.log10();
        if y.is_finite() && y >= y0 && y <= y1 {
            let _ = writeln!(s, r#"<line x1="{m}" x2="{}" y1="{:.2}" y2="{:.2}" stroke="gray" stroke-dasharray="4 3"/>"#, w - m, py(y), py(y));
        }
    }
    let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
    let _ = writeln!(s, r#"<polyline fill="none" stroke="steelblue" stroke-width="1.5" points="{}"/>"#, path.join(" "));
    for &(x, y) in &pts {
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2" fill="steelblue"/>"#, px(x), py(y));
    }
    s.push_str("</svg>\n");
    s
}

fn fmt_tick(v: f64) -> String {
    format!("{v:.3}")
}

/// Results of a campaign, in descriptor-file order.
#[derive(Debug, Clone)]
pub struct CampaignOutcome {
    pub results: Vec<RunResult>,
}

impl CampaignOutcome {
    /// 0 when every claim passes and every negative control is refused or fails, else 1.
    pub fn exit_code(&self) -> i32 {
        if self.results.iter().all(RunResult::as_expected) { 0 } else { 1 }
    }

    pub fn summary_csv(&self) -> String {
        let mut s = String::from("id,verdict,ratio_min,ratio_max,wall_time,role,expected\n");
        for r in &self.results {
            let (lo, hi) = r.report.as_ref().map_or((f64::NAN, f64::NAN), |x| (x.ratio_min, x.ratio_max));
            let _ = writeln!(
                s,
                "{},{},{},{},{:.3},{},{}",
                r.id,
                r.status.label(),
                fmt_num(lo),
                fmt_num(hi),
                r.wall_time,
                if r.negative_control { "negative_control" } else { "claim" },
                if r.as_expected() { "yes" } else { "no" }
            );
        }
        s
    }

    pub fn index_html(&self) -> String {
        let mut s = String::from("<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>campaign</title></head><body>\n");
        s.push_str("<table border=\"1\" cellpadding=\"4\">\n<tr><th>id</th><th>verdict</th><th>role</th><th>expected</th><th>plot</th></tr>\n");
        for r in &self.results {
            let plot = if r.report.is_some() {
                format!("<img src=\"{}.svg\" width=\"320\">", esc(&r.id))
            } else {
                "-".to_string()
            };
            let _ = writeln!(
                s,
                "<tr><td>{}</td><td>{}</td><td>{}</td><td>{}</td><td>{plot}</td></tr>",
                esc(&r.id),
                r.status.label(),
                if r.negative_control { "negative control" } else { "claim" },
                if r.as_expected() { "yes" } else { "no" }
            );
        }
        s.push_str("</table>\n</body></html>\n");
        s
    }
}

/// The `*.json` files of a directory, sorted by name.
pub fn descriptor_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    v.sort();
    Ok(v)
}

/// Loads every descriptor of a directory; parse errors and duplicate ids are errors.
pub fn load_campaign(dir: &Path) -> Result<Vec<ExperimentDescriptor>> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for p in descriptor_files(dir)? {
        let d = ExperimentDescriptor::load(&p)?;
        if !seen.insert(d.id.clone()) {
            return Err(Error::Parse(format!("duplicate experiment id `{}` in {}", d.id, p.display())));
        }
        out.push(d);
    }
    Ok(out)
}

/// Runs the descriptors in parallel and writes per-experiment artifacts plus
/// `summary.csv` and `index.html` into `out_dir`.
pub fn run_campaign(descs: &[ExperimentDescriptor], out_dir: &Path, seed: u64) -> Result<CampaignOutcome> {
    let results: Vec<RunResult> = descs.par_iter().map(|d| run_descriptor(d, seed)).collect();
    for (d, r) in descs.iter().zip(&results) {
        write_artifacts(r, out_dir, d.kind.sweeps_grid())?;
    }
    let outcome = CampaignOutcome { results };
    write_atomic(&out_dir.join("summary.csv"), &outcome.summary_csv())?;
    write_atomic(&out_dir.join("index.html"), &outcome.index_html())?;
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::DEFAULT_WIDTH;

    #[test]
    fn descriptor_round_trip_and_validation() {
        let text = r#"{"id":"lim","kind":"limiting_estimate","params":{"b":"broken_log(-2,1)","e":"Lq:1","side":"zero"},
                       "grid":{"min":1e-6,"max":1e6,"points":13,"scale":"log"},"band":{"lo":0.1,"hi":10}}"#;
        let d = ExperimentDescriptor::parse(text).unwrap();
        assert_eq!(d.kind, ExperimentKind::LimitingEstimate);
        let back = ExperimentDescriptor::parse(&serde_json::to_string(&d).unwrap()).unwrap();
        assert_eq!(back.id, "lim");
        let bad = text.replace("\"points\":13", "\"points\":4");
        assert!(matches!(ExperimentDescriptor::parse(&bad), Err(Error::Parse(_))));
        let bad = text.replace("broken_log(-2,1)", "nonsense(");
        assert!(matches!(ExperimentDescriptor::parse(&bad), Err(Error::Parse(_))));
        assert!(ExperimentDescriptor::parse("{").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(Status::Pass.exit_code(), 0);
        assert_eq!(Status::Fail.exit_code(), 1);
        assert_eq!(Status::Error(Error::Parse("x".into())).exit_code(), 2);
        assert_eq!(Status::Error(Error::QuadratureNonconvergent("x".into())).exit_code(), 3);
        assert_eq!(Status::HypothesisViolated("x".into()).exit_code(), 4);
        assert_eq!(error_exit_code(&Error::CaseGateFailed("x".into())), 4);
    }

    #[test]
    fn gate_refusal_maps_to_hypothesis_status() {
        let d = ExperimentDescriptor::parse(
            r#"{"id":"h","kind":"limit_hardy","params":{"b":"ell","e":"Lq:2","side":"cumulative"},"negative_control":true}"#,
        )
        .unwrap();
        let r = run_descriptor(&d, 0);
        assert_eq!(r.status.exit_code(), 4);
        assert!(r.as_expected());
    }

    #[test]
    fn svg_is_well_formed() {
        let r = RatioReport::new("x", vec![1.0, 10.0, 100.0], vec![1.0, 2.0, 3.0], vec![1.0, 1.0, 1.0], Band::UNBOUNDED, DEFAULT_WIDTH, false);
        let s = ratio_svg(&r, true);
        assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
        assert!(s.contains("polyline"));
    }

    #[test]
    fn sequence_trials_respect_the_constant() {
        let p = SeqHardyParams {
            sigma_ratio: 0.5,
            e: RISpaceSpec::lq(1.0),
            direction: HardyDirection::CumulativeBelow,
            trials: 20,
            k_range: 40,
            seed: Some(1),
        };
        let r = sequence_hardy_trials(&p, 0).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!((r.lhs[0] / r.rhs[0] - 2.0).abs() < 1e-11);
    }
}
