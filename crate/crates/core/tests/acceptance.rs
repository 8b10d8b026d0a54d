//! The acceptance suite: eight criteria, one verdict line each. Exits nonzero when any
//! criterion fails.

use interpnorm::campaign::{load_campaign, run_campaign, run_descriptor, ExperimentKind, RunResult, Status};
use interpnorm::dyadic::{make_grid, seq_hardy_check, DiscreteSeq, HardyDirection};
use interpnorm::kcalc::{k_functional, FunctionSample};
use interpnorm::norms::{lq_integral, Measure, MeasuredInterval, RISpaceSpec};
use interpnorm::quad::QuadConfig;
use interpnorm::report::{Verdict, MAX_GROWTH};
use interpnorm::spaces::{grand_small_norms, norm_l, norm_r, SpaceSpec};
use interpnorm::svfun::SlowlyVarying;
use interpnorm::verify::{
    default_corpus, experiment_grid, verify_reiteration, verify_sv_scaling, LogGrid, ReiterationCase, ReiterationSetup,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

type Outcome = Result<String, String>;

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok { Ok(()) } else { Err(msg()) }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("campaigns/golden")
}

fn golden_runs(kinds: &[ExperimentKind]) -> Result<Vec<(RunResult, bool)>, String> {
    let descs = load_campaign(&golden_dir()).map_err(|e| e.to_string())?;
    let picked: Vec<_> = descs.iter().filter(|d| kinds.contains(&d.kind)).collect();
    if picked.is_empty() {
        return Err("no golden descriptors of the requested kinds".into());
    }
    Ok(picked.into_iter().map(|d| (run_descriptor(d, 0), d.negative_control)).collect())
}

fn exact_kernels() -> Outcome {
    let ts: Vec<f64> = (0..1000).map(|i| (-18.0 + 21.0 * i as f64 / 999.0f64).exp()).collect();
    for s0 in [0.3, 0.5, 1.0] {
        let k = k_functional(&FunctionSample::indicator(0.0, s0).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        for &t in &ts {
            let want = t.min(s0);
            check(rel(k.eval(t), want) <= 1e-12, || format!("K({t}) = {} against min(t,{s0}) = {want}", k.eval(t)))?;
        }
    }
    let g = make_grid(-30, 30).map_err(|e| e.to_string())?;
    check(g.lambda(0) == 1.0, || format!("λ₀ = {}", g.lambda(0)))?;
    let e1 = (std::f64::consts::E - 1.0).exp();
    check(rel(g.lambda(1), e1) <= 1e-14, || format!("λ₁ = {} against e^(e−1) = {e1}", g.lambda(1)))?;
    let cfg = QuadConfig::default();
    let mut worst = 0.0f64;
    for k in g.ks() {
        let (lo, hi) = g.interval_ln(k);
        // Closed form: ∫ dx/(1+|x|) = sgn(x) ln(1+|x|).
        let anti = |x: f64| x.signum() * x.abs().ln_1p();
        let closed = anti(hi) - anti(lo);
        let iv = MeasuredInterval::from_ln(lo, hi, Measure::LogHomogeneous);
        let quad = lq_integral(&|_| 1.0, &iv, 1.0, &[], &cfg).map_err(|e| e.to_string())?;
        worst = worst.max((closed - 1.0).abs()).max((quad - 1.0).abs());
    }
    check(worst <= 1e-10, || format!("block mass off by {worst}"))?;
    Ok(format!("3 indicators × 1000 points, 61 blocks, worst block error {worst:.1e}"))
}

fn identification() -> Outcome {
    let corpus = default_corpus(0).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for ce in &corpus {
        let f = ce.profile.fstar_sample();
        for p in [2.0, 3.0] {
            for alpha in [1.0, 2.0] {
                let (g, s) = grand_small_norms(&f, p, alpha).map_err(|e| e.to_string())?;
                let r = norm_r(&ce.profile, &SpaceSpec::grand_as_r(p, alpha)).map_err(|e| e.to_string())?.value;
                let l = norm_l(&ce.profile, &SpaceSpec::small_as_l(p, alpha)).map_err(|e| e.to_string())?.value;
                let (eg, es) = (rel(r, g.value), rel(l, s.value));
                check(eg <= 1e-3, || format!("{} p={p} α={alpha}: nested {r} against direct grand {}", ce.name, g.value))?;
                check(es <= 1e-3, || format!("{} p={p} α={alpha}: nested {l} against direct small {}", ce.name, s.value))?;
                worst = worst.max(eg).max(es);
            }
        }
    }
    Ok(format!("{} functions × 4 (p,α), worst relative gap {worst:.1e}", corpus.len()))
}

fn scaling_sweeps() -> Outcome {
    let weights = [
        SlowlyVarying::ell_pow(-2.0),
        SlowlyVarying::ell_pow(-1.0),
        SlowlyVarying::ell_pow(1.0),
        SlowlyVarying::ell_pow(2.0),
        SlowlyVarying::broken_log(1.0, -1.0),
        SlowlyVarying::broken_log(-2.0, 1.0),
    ];
    // 97 points resolve the interior minimum near t = 1 for the broken logs.
    let grid = LogGrid::new(1e-6, 1e6, 97);
    let fine = LogGrid::new(1e-6, 1e6, 193);
    let (mut wmax, mut gmax, mut fmax, mut n) = (0.0f64, 0.0f64, 0.0f64, 0);
    let mut failures = Vec::new();
    for b in &weights {
        for alpha in [-1.0, -0.5, 0.5, 1.0] {
            for e in [RISpaceSpec::lq(1.0), RISpaceSpec::lq(2.0), RISpaceSpec::linf()] {
                let base = verify_sv_scaling(b, alpha, &e, &grid).map_err(|e| e.to_string())?;
                let refined = verify_sv_scaling(b, alpha, &e, &fine).map_err(|e| e.to_string())?;
                let ext = verify_sv_scaling(b, alpha, &e, &grid.extended()).map_err(|e| e.to_string())?;
                let r = base.with_growth(&ext);
                let g = r.growth.unwrap_or(f64::INFINITY);
                if r.divergent || r.width() > 1e2 || g >= MAX_GROWTH {
                    failures.push(format!("{} α={alpha} {e}: width {:.4} growth {g:.4}", b.name(), r.width()));
                }
                wmax = wmax.max(r.width());
                gmax = gmax.max(g);
                fmax = fmax.max((refined.width() / r.width() - 1.0).abs());
                n += 1;
            }
        }
    }
    let summary = format!("{n} sweeps, widest band {wmax:.3}, largest span-doubling growth {gmax:.2e}, largest density-doubling change {fmax:.1e}");
    if failures.is_empty() { Ok(summary) } else { Err(format!("{summary}; over 5%: {}", failures.join("; "))) }
}

fn limiting_and_hardy() -> Outcome {
    let runs = golden_runs(&[ExperimentKind::LimitingEstimate, ExperimentKind::LimitHardy])?;
    let (mut claims, mut controls) = (0, 0);
    for (r, control) in &runs {
        if *control {
            let unbounded = r.report.as_ref().is_some_and(|rep| rep.divergent || rep.growth.is_some_and(|g| g + 1.0 > 10.0));
            check(matches!(r.status, Status::HypothesisViolated(_)) || unbounded, || {
                format!("control {} neither refused nor unbounded: {}", r.id, r.verdict_line())
            })?;
            controls += 1;
        } else {
            let rep = r.report.as_ref().ok_or_else(|| format!("{}: {}", r.id, r.verdict_line()))?;
            check(rep.verdict == Verdict::Pass && rep.width() <= 1e3, || r.verdict_line())?;
            claims += 1;
        }
    }
    Ok(format!("{claims} claims pass, {controls} controls refused or unbounded"))
}

fn sequence_hardy() -> Outcome {
    let g = make_grid(-40, 40).map_err(|e| e.to_string())?;
    let sigma = DiscreteSeq::from_fn(&g, |k| 0.5f64.powi(k as i32));
    let l1 = RISpaceSpec::lq(1.0);
    let unit = DiscreteSeq::from_fn(&g, |k| if k == 0 { 1.0 } else { 0.0 });
    let r = seq_hardy_check(&sigma, &unit, &l1, HardyDirection::CumulativeBelow).map_err(|e| e.to_string())?;
    let ratio = r.lhs[0] / r.rhs[0];
    check((ratio - 2.0).abs() <= 1e-11, || format!("geometric example ratio {ratio}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let x = DiscreteSeq::from_fn(&g, |_| if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0.0..1.0) });
        let r = seq_hardy_check(&sigma, &x, &l1, HardyDirection::CumulativeBelow).map_err(|e| e.to_string())?;
        let q = r.lhs[0] / r.rhs[0];
        check(q <= 2.0 + 1e-9, || format!("random sequence ratio {q}"))?;
        worst = worst.max(q);
    }
    Ok(format!("geometric ratio {ratio:.12}, worst of 100 random {worst:.6}"))
}

fn nested_equivalences() -> Outcome {
    let runs = golden_runs(&[
        ExperimentKind::KeyEquivalence,
        ExperimentKind::DiscreteEquivalence,
        ExperimentKind::ThreeWeightIdentity,
    ])?;
    let (mut claims, mut one_sided, mut wmax) = (0, 0, 0.0f64);
    for (r, control) in &runs {
        if *control {
            check(matches!(r.status, Status::HypothesisViolated(_)), || format!("control {}: {}", r.id, r.verdict_line()))?;
            continue;
        }
        let rep = r.report.as_ref().ok_or_else(|| format!("{}: {}", r.id, r.verdict_line()))?;
        check(rep.verdict == Verdict::Pass, || r.verdict_line())?;
        if rep.one_sided {
            one_sided += 1;
        } else {
            check(rep.width() <= 1e3, || r.verdict_line())?;
            wmax = wmax.max(rep.width());
        }
        claims += 1;
    }
    let discrete_i = runs.iter().find(|(r, _)| r.id == "discrete_i_l2").ok_or("discrete_i_l2 missing")?;
    check(discrete_i.0.report.as_ref().is_some_and(|r| !r.one_sided), || "discrete (i) must be two-sided".into())?;
    let discrete_ii = runs.iter().find(|(r, _)| r.id == "discrete_ii_l2").ok_or("discrete_ii_l2 missing")?;
    check(discrete_ii.0.report.as_ref().is_some_and(|r| r.one_sided), || "discrete (ii) must be one-sided".into())?;
    Ok(format!("{claims} claims pass ({one_sided} one-sided), widest two-sided band {wmax:.3}"))
}

fn reiteration() -> Outcome {
    let corpus = default_corpus(0).map_err(|e| e.to_string())?;
    let mut wmax = 0.0f64;
    let mut n = 0;
    for (alpha, beta, p) in [(1.0, 1.0, 2.0), (1.0, 2.0, 2.0), (2.0, 1.0, 3.0)] {
        let m1: f64 = alpha / (alpha - beta + p * beta);
        if (alpha, beta, p) == (1.0, 1.0, 2.0) {
            check(m1 == 0.5, || format!("M₁ = {m1}"))?;
        }
        for eta in [0.0, 0.25, m1, 0.75, 1.0] {
            let expected = if eta == 0.0 {
                ReiterationCase::D
            } else if eta == 1.0 {
                ReiterationCase::E
            } else if eta < m1 {
                ReiterationCase::A
            } else if eta > m1 {
                ReiterationCase::B
            } else {
                ReiterationCase::C
            };
            let s = ReiterationSetup {
                alpha,
                beta,
                p,
                eta,
                b: SlowlyVarying::ell_pow(-1.0).on_unit(),
                e: RISpaceSpec::lq(2.0),
                resolution: experiment_grid(),
            };
            let out = verify_reiteration(None, &s, &corpus).map_err(|e| format!("α={alpha} β={beta} p={p} η={eta}: {e}"))?;
            check(out.case == expected, || format!("η={eta}, M₁={m1}: case {:?} selected, {expected:?} expected", out.case))?;
            check((out.m1 - m1).abs() <= 1e-12 && (out.m2 - m1).abs() <= 1e-12, || format!("M₁ {} M₂ {} against {m1}", out.m1, out.m2))?;
            for (a, b) in out.i1.iter().zip(&out.i2) {
                check(a.max(*b) <= a + b && a + b <= 2.0 * a.max(*b), || format!("sandwich fails for I₁={a}, I₂={b}"))?;
            }
            let rep = &out.report;
            check(rep.verdict == Verdict::Pass && rep.width() <= 1e3, || {
                format!("α={alpha} β={beta} p={p} η={eta}: {}", rep.summary_line())
            })?;
            wmax = wmax.max(rep.width());
            n += 1;
        }
    }
    Ok(format!("{n} configurations × {} functions, widest band {wmax:.3}", corpus.len()))
}

/// CSV files of a directory with summary.csv's wall_time column removed.
fn csv_contents(dir: &Path) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    let mut names: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    names.sort();
    for p in names {
        let text = std::fs::read_to_string(&p).map_err(|e| e.to_string())?;
        let name = p.file_name().unwrap().to_string_lossy().into_owned();
        let text = if name == "summary.csv" {
            let drop = text.lines().next().and_then(|h| h.split(',').position(|c| c == "wall_time"));
            text.lines()
                .map(|l| l.split(',').enumerate().filter(|(i, _)| Some(*i) != drop).map(|(_, c)| c).collect::<Vec<_>>().join(","))
                .collect::<Vec<_>>()
                .join("\n")
        } else {
            text
        };
        out.push((name, text));
    }
    Ok(out)
}

fn determinism() -> Outcome {
    let descs = load_campaign(&golden_dir()).map_err(|e| e.to_string())?;
    let (a, b) = (tempfile::tempdir().map_err(|e| e.to_string())?, tempfile::tempdir().map_err(|e| e.to_string())?);
    let first = run_campaign(&descs, a.path(), 0).map_err(|e| e.to_string())?;
    run_campaign(&descs, b.path(), 0).map_err(|e| e.to_string())?;
    check(first.results.len() == 25, || format!("{} descriptors in the golden campaign", first.results.len()))?;
    check(first.exit_code() == 0, || "golden campaign has unexpected outcomes".into())?;
    let (ca, cb) = (csv_contents(a.path())?, csv_contents(b.path())?);
    check(ca.len() == cb.len(), || "different CSV sets".into())?;
    for ((na, ta), (nb, tb)) in ca.iter().zip(&cb) {
        check(na == nb && ta == tb, || format!("{na} differs between runs"))?;
    }
    Ok(format!("{} CSV files identical across two runs (wall_time excluded)", ca.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Duration); 8] = [
        ("exact kernels", exact_kernels, Duration::from_secs(1)),
        ("grand/small identification", identification, Duration::from_secs(60)),
        ("power-times-weight scaling sweeps", scaling_sweeps, Duration::from_secs(120)),
        ("limiting estimate and Hardy", limiting_and_hardy, Duration::from_secs(120)),
        ("sequence Hardy constant", sequence_hardy, Duration::from_secs(1)),
        ("key, discrete and three-weight equivalences", nested_equivalences, Duration::from_secs(180)),
        ("reiteration", reiteration, Duration::from_secs(300)),
        ("determinism", determinism, Duration::from_secs(900)),
    ];
    let mut failed = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let took = start.elapsed();
        let out = match out {
            Ok(msg) if took > *limit => Err(format!("{msg}; took {:.2}s, limit {}s", took.as_secs_f64(), limit.as_secs())),
            other => other,
        };
        match out {
            Ok(msg) => println!("criterion {} {name}: PASS ({msg}) [{:.2}s]", i + 1, took.as_secs_f64()),
            Err(msg) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({msg}) [{:.2}s]", i + 1, took.as_secs_f64());
            }
        }
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
