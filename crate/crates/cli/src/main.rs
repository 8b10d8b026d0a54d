use clap::{Parser, Subcommand};
use interpnorm::campaign::{
    error_exit_code, load_campaign, run_campaign, run_descriptor, write_artifacts, ExperimentDescriptor, ExperimentKind,
};
use interpnorm::kcalc::{k_functional, KProfile};
use interpnorm::registry::{parse_function, parse_kprofile, FUNCTION_HELP, KPROFILE_HELP, WEIGHT_HELP};
use interpnorm::spaces::{check_nontrivial, norm, SpaceSpec};
use interpnorm::Error;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "interpnorm", version, about = "Norms of limiting interpolation spaces and numerical checks of their equivalences")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compute the norm of one function in one space.
    Norm {
        /// Space, e.g. `grand:p=2,alpha=1` or `theta:0.5,b=const,E=Lq:2`, or JSON.
        #[arg(long)]
        space: String,
        /// Function name (see `list-weights`).
        #[arg(long, conflicts_with = "kprofile", required_unless_present = "kprofile")]
        function: Option<String>,
        /// K-profile name, instead of a function.
        #[arg(long)]
        kprofile: Option<String>,
        /// Print the inner profile as CSV after the value.
        #[arg(long)]
        breakdown: bool,
    },
    /// Run one experiment descriptor; exit 0 pass, 1 fail, 2 bad input, 3 quadrature failure, 4 hypothesis violated.
    Verify {
        descriptor: PathBuf,
        /// Output directory (overrides the descriptor's `output_dir`).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run every `*.json` descriptor of a directory and write summary.csv and index.html.
    Campaign {
        dir: PathBuf,
        #[arg(long, default_value = "campaign-out")]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Weight, function and K-profile names.
    ListWeights,
    /// Space kinds, their parameters and the experiment kinds.
    ListSpaces,
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(error_exit_code(e) as u8)
}

fn cmd_norm(space: &str, function: Option<&str>, kprofile: Option<&str>, breakdown: bool) -> Result<(), Error> {
    let spec: SpaceSpec = space.parse()?;
    let nt = check_nontrivial(&spec);
    if !nt.nontrivial {
        for r in &nt.reasons {
            eprintln!("warning: {r}");
        }
    }
    let k: KProfile = match (function, kprofile) {
        (Some(f), _) => k_functional(&parse_function(f)?)?,
        (None, Some(k)) => parse_kprofile(k)?,
        (None, None) => return Err(Error::Parse("need --function or --kprofile".into())),
    };
    let v = norm(&k, &spec)?;
    println!("{}", v.value);
    if breakdown {
        match &v.breakdown {
            Some(rows) => {
                println!("t,inner");
                for (t, x) in rows {
                    println!("{t:.12e},{x:.12e}");
                }
            }
            None => eprintln!("note: no inner profile for this space kind"),
        }
    }
    Ok(())
}

fn cmd_verify(path: &PathBuf, out: Option<PathBuf>, seed: u64) -> ExitCode {
    let d = match ExperimentDescriptor::load(path) {
        Ok(d) => d,
        Err(e) => return fail(&e),
    };
    let r = run_descriptor(&d, seed);
    let dir = out.or_else(|| d.output_dir.clone()).unwrap_or_else(|| PathBuf::from("reports"));
    if let Err(e) = write_artifacts(&r, &dir, d.kind.sweeps_grid()) {
        return fail(&e);
    }
    println!("{}", r.verdict_line());
    ExitCode::from(r.status.exit_code() as u8)
}

fn cmd_campaign(dir: &PathBuf, out: &PathBuf, seed: u64) -> ExitCode {
    let descs = match load_campaign(dir) {
        Ok(d) => d,
        Err(e) => return fail(&e),
    };
    let outcome = match run_campaign(&descs, out, seed) {
        Ok(o) => o,
        Err(e) => return fail(&e),
    };
    for r in &outcome.results {
        let tag = if r.as_expected() { "" } else { "  [unexpected]" };
        println!("{}{tag}", r.verdict_line());
    }
    let bad = outcome.results.iter().filter(|r| !r.as_expected()).count();
    println!("{} experiments, {} as expected, {} not", outcome.results.len(), outcome.results.len() - bad, bad);
    ExitCode::from(outcome.exit_code() as u8)
}

fn print_table(title: &str, rows: &[(&str, &str)]) {
    println!("{title}:");
    let w = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
    for (name, what) in rows {
        println!("  {name:<w$}  {what}");
    }
}

const SPACE_HELP: &[(&str, &str)] = &[
    ("theta:θ,b=w,E=S", "‖t^-θ b(t) K(t,f)‖_E"),
    ("R:θ,b=w,E=S,a=w,F=S", "outer (b,E) of the inner (a,F) norm over (t,∞)"),
    ("L:θ,b=w,E=S,a=w,F=S", "outer (b,E) of the inner (a,F) norm over (0,t)"),
    ("RL:θ,c=w,E=S,b=w,F=S,a=w,G=S", "three levels, middle over (0,u), inner over (t,u)"),
    ("LR:θ,c=w,E=S,b=w,F=S,a=w,G=S", "three levels, middle over (u,∞), inner over (u,t)"),
    ("grand:p=P,alpha=A", "grand Lebesgue space on (0,1)"),
    ("small:p=P,alpha=A", "small Lebesgue space on (0,1)"),
    ("measure=tilde|hat", "outer measure dt/t or dt/(t ell(t))"),
    ("mode=full_line|ordered_unit", "integrate over (0,∞) or (0,1)"),
    ("integrand=k_functional|rearranged", "t^-θ K(t,f) or t^(1-θ) f*(t)"),
];

const RI_HELP: &[(&str, &str)] = &[("Lq:q", "weighted Lebesgue space, 0 < q ≤ ∞ (Lq:inf)")];

fn main() -> ExitCode {
    if let Some(n) = std::env::var("INTERPNORM_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.cmd {
        Cmd::Norm { space, function, kprofile, breakdown } => {
            match cmd_norm(&space, function.as_deref(), kprofile.as_deref(), breakdown) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => fail(&e),
            }
        }
        Cmd::Verify { descriptor, out, seed } => cmd_verify(&descriptor, out, seed),
        Cmd::Campaign { dir, out, seed } => cmd_campaign(&dir, &out, seed),
        Cmd::ListWeights => {
            print_table("weights", WEIGHT_HELP);
            print_table("functions (--function)", FUNCTION_HELP);
            print_table("K-profiles (--kprofile)", KPROFILE_HELP);
            ExitCode::SUCCESS
        }
        Cmd::ListSpaces => {
            print_table("spaces (--space)", SPACE_HELP);
            print_table("r.i. spaces (E, F, G)", RI_HELP);
            let kinds: Vec<String> = ExperimentKind::ALL.iter().map(|k| k.name()).collect();
            println!("experiment kinds: {}", kinds.join(", "));
            ExitCode::SUCCESS
        }
    }
}
