//! Command-line front end for the pliable index coding toolkit.

mod output;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use picod::chains::{all_covers, full_decoder, mimic_trace};
use picod::codes::{best_scheme, min_field_exponent, scheme_mds, scheme_prefix};
use picod::decode::{is_valid, search_linear_codes, SearchMode, SearchOutcome};
use picod::galois::MAX_W;
use picod::instance::{
    build_complete_s, drop_to_single_s, enhance_to_critical, restrict_fixed_prefix,
};
use picod::mais::{mais_size, min_mais, MinMaisMode};
use picod::verify::{run_check, suite, Budget, CheckArgs, CheckId, Report, Verdict};
use picod::{Assignment, Exec, Instance, LinearCode, SpecS};

use output::{read_to_string, write_csv, write_output};

#[derive(Parser, Debug)]
#[command(
    name = "picod",
    version,
    about = "Pliable index coding for complete--S instances"
)]
struct Cli {
    /// Worker threads; 1 runs every sweep sequentially.
    #[arg(long, global = true, env = "PICOD_WORKERS")]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the complete--S instance.
    Gen(GenArgs),
    /// Apply a reduction to an instance.
    Transform {
        #[command(subcommand)]
        op: TransformOp,
    },
    /// Build a linear code for an instance.
    Encode(EncodeArgs),
    /// Check whether a code satisfies every user.
    Check(CheckCodeArgs),
    /// Search for a valid linear code of a given length.
    Search(SearchArgs),
    /// Decoding-chain covers for an assignment.
    Chains(AssignmentArgs),
    /// MAIS of one assignment.
    Mais(AssignmentArgs),
    /// Minimum MAIS over all (or sampled) assignments.
    MinMais(MinMaisArgs),
    /// Run a certification check.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long)]
    m: u8,
    #[arg(long, requires = "s_max", conflicts_with = "sizes")]
    s_min: Option<u8>,
    #[arg(long, requires = "s_min")]
    s_max: Option<u8>,
    /// Explicit side-information sizes, e.g. `1,3`.
    #[arg(long, value_delimiter = ',')]
    sizes: Vec<u8>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum TransformOp {
    /// Keep users knowing `[1:alpha]` and delete those messages.
    Restrict {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long)]
        alpha: u8,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Keep only users of one side-information size.
    Drop {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long)]
        s: u8,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Pad with dummy messages to a critical instance.
    Enhance {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SchemeArg {
    Prefix,
    Mds,
    Best,
}

#[derive(Args, Debug)]
struct EncodeArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "best")]
    scheme: SchemeArg,
    /// Extra uncoded messages beyond `s_max` for the prefix scheme.
    #[arg(long, default_value_t = 1)]
    t: u8,
    /// Field exponent for the MDS scheme; widened automatically if too small.
    #[arg(long)]
    w: Option<u8>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CheckCodeArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(short, long)]
    code: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SearchArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(long)]
    ell: usize,
    #[arg(long, default_value_t = 1)]
    w: u8,
    /// Largest number of row spaces scanned exhaustively.
    #[arg(long, default_value_t = 1_000_000)]
    budget: u128,
    /// Test random generators instead of scanning.
    #[arg(long)]
    sampled: bool,
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AssignmentArgs {
    #[arg(short, long)]
    input: PathBuf,
    /// Desired message of each user in canonical user order, e.g. `2,1,1`.
    #[arg(long)]
    assignment: String,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MinMaisArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(long)]
    sampled: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Exhaustive: largest assignment count. Sampled: number of samples.
    #[arg(long, default_value_t = 1_000_000)]
    budget: u128,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum VerifyTarget {
    Theorem,
    Achievability,
    Claim1,
    Claim2,
    Claim3,
    Claim4,
    Lemma1,
    Reductions,
    Enhancement,
    Search,
    All,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SuiteArg {
    Desk,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(value_enum)]
    check: VerifyTarget,
    #[arg(long)]
    s: Option<u8>,
    #[arg(long)]
    m: Option<u8>,
    #[arg(long)]
    s_min: Option<u8>,
    #[arg(long)]
    s_max: Option<u8>,
    /// Rows for lemma1, code length for search.
    #[arg(long)]
    n: Option<u8>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest exhaustive enumeration.
    #[arg(long, default_value_t = 1_000_000)]
    budget: u128,
    /// Samples drawn when an exhaustive scan is over budget; 0 disables sampling.
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    /// Wall-clock limit per check in seconds; 0 means none.
    #[arg(long, default_value_t = 60)]
    time_limit: u64,
    #[arg(long, value_enum, default_value = "desk")]
    suite: SuiteArg,
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Append one summary row per report.
    #[arg(long)]
    csv: Option<PathBuf>,
}

/// How a successful run ends.
enum Status {
    Ok,
    Fail,
    Budget,
}

impl Status {
    fn of(verdict: Verdict) -> Status {
        match verdict {
            Verdict::Pass => Status::Ok,
            Verdict::Fail => Status::Fail,
            Verdict::Budget => Status::Budget,
        }
    }

    fn code(self) -> ExitCode {
        match self {
            Status::Ok => ExitCode::SUCCESS,
            Status::Fail => ExitCode::from(1),
            Status::Budget => ExitCode::from(3),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(status) => status.code(),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn setup_exec(workers: Option<usize>) -> Result<(Exec, usize)> {
    let workers = match workers {
        Some(0) => bail!("--workers must be at least 1"),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    #[cfg(feature = "parallel")]
    if workers > 1 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .context("starting the worker pool")?;
        return Ok((Exec::Parallel, workers));
    }
    #[cfg(not(feature = "parallel"))]
    let _ = workers;
    Ok((Exec::Sequential, 1))
}

fn load_instance(path: &Path) -> Result<Instance> {
    Instance::from_json(&read_to_string(path)?)
        .with_context(|| format!("reading instance {}", path.display()))
}

fn load_assignment(inst: &Instance, text: &str) -> Result<Assignment> {
    let d = Assignment::parse(text)?;
    d.validate(inst)?;
    Ok(d)
}

fn run(cli: Cli) -> Result<Status> {
    let (exec, workers) = setup_exec(cli.workers)?;
    match cli.command {
        Command::Gen(a) => {
            let sizes: BTreeSet<u8> = match (a.s_min, a.s_max) {
                (Some(lo), Some(hi)) => SpecS::new(lo, hi).sizes(),
                _ if !a.sizes.is_empty() => a.sizes.iter().copied().collect(),
                _ => bail!("gen needs --s-min and --s-max, or --sizes"),
            };
            let inst = build_complete_s(a.m, &sizes)?;
            write_output(a.output.as_ref(), &inst.to_json_pretty())?;
        }
        Command::Transform { op } => {
            let (out, text) = match op {
                TransformOp::Restrict {
                    input,
                    alpha,
                    output,
                } => (
                    output,
                    restrict_fixed_prefix(&load_instance(&input)?, alpha)?.to_json_pretty(),
                ),
                TransformOp::Drop { input, s, output } => (
                    output,
                    drop_to_single_s(&load_instance(&input)?, s)?.to_json_pretty(),
                ),
                TransformOp::Enhance { input, output } => {
                    let inst = load_instance(&input)?;
                    let spec = inst.size_range().context("instance has no users")?;
                    (output, enhance_to_critical(&inst, spec)?.0.to_json_pretty())
                }
            };
            write_output(out.as_ref(), &text)?;
        }
        Command::Encode(a) => {
            let inst = load_instance(&a.input)?;
            let needed = min_field_exponent(inst.m() as usize);
            let w = a.w.unwrap_or(needed);
            if w > MAX_W {
                bail!("--w must be at most {MAX_W}");
            }
            if w < needed {
                eprintln!(
                    "note: widening GF(2^{w}) to GF(2^{needed}) to fit {} evaluation points",
                    inst.m()
                );
            }
            let w = w.max(needed);
            let code = match a.scheme {
                SchemeArg::Prefix => scheme_prefix(&inst, a.t)?,
                SchemeArg::Mds => scheme_mds(&inst, w)?,
                SchemeArg::Best => best_scheme(&inst, a.t, w)?,
            };
            write_output(a.output.as_ref(), &serde_json::to_string_pretty(&code)?)?;
        }
        Command::Check(a) => {
            let inst = load_instance(&a.input)?;
            let code = LinearCode::from_json(&read_to_string(&a.code)?)
                .with_context(|| format!("reading code {}", a.code.display()))?;
            let validity = is_valid(&code, &inst)?;
            let valid = validity.valid;
            let mut out = serde_json::to_value(&validity)?;
            out["length"] = code.len().into();
            write_output(a.output.as_ref(), &serde_json::to_string_pretty(&out)?)?;
            return Ok(if valid { Status::Ok } else { Status::Fail });
        }
        Command::Search(a) => {
            let inst = load_instance(&a.input)?;
            let mode = if a.sampled {
                SearchMode::Sampled {
                    seed: a.seed,
                    samples: a.samples,
                }
            } else {
                SearchMode::Exhaustive { budget: a.budget }
            };
            let config = json!({"ell": a.ell, "w": a.w, "budget": a.budget.to_string(), "sampled": a.sampled,
                "samples": a.samples, "seed": a.seed, "workers": workers});
            let (out, status) = match search_linear_codes(&inst, a.ell, a.w, mode, exec)? {
                SearchOutcome::Found {
                    code,
                    index,
                    scanned,
                } => (
                    json!({"outcome": "found", "code": code, "index": index.to_string(), "scanned": scanned.to_string()}),
                    Status::Ok,
                ),
                SearchOutcome::NoneExists { scanned } => (
                    json!({"outcome": "none", "scanned": scanned.to_string()}),
                    Status::Ok,
                ),
                SearchOutcome::Budget { required, budget } => (
                    json!({"outcome": "budget", "required": required.to_string(), "budget": budget.to_string()}),
                    Status::Budget,
                ),
                SearchOutcome::NotFoundInSamples { samples } => (
                    json!({"outcome": "not_found_in_samples", "samples": samples}),
                    Status::Ok,
                ),
            };
            let mut out = out;
            out["config"] = config;
            write_output(a.output.as_ref(), &serde_json::to_string_pretty(&out)?)?;
            return Ok(status);
        }
        Command::Chains(a) => {
            let inst = load_instance(&a.input)?;
            let d = load_assignment(&inst, &a.assignment)?;
            let covers: Vec<Value> = all_covers(&inst, &d)
                .into_iter()
                .map(|c| {
                    let (_, trace) = mimic_trace(&inst, &d, c.user);
                    let mut v = serde_json::to_value(c).expect("cover serializes");
                    v["trace"] = trace.into();
                    v
                })
                .collect();
            let mut out = json!({"assignment": d, "covers": covers});
            if inst.is_critical() {
                out["full_decoder"] = serde_json::to_value(full_decoder(&inst, &d)?)?;
            }
            write_output(a.output.as_ref(), &serde_json::to_string_pretty(&out)?)?;
        }
        Command::Mais(a) => {
            let inst = load_instance(&a.input)?;
            let d = load_assignment(&inst, &a.assignment)?;
            write_output(
                a.output.as_ref(),
                &serde_json::to_string_pretty(&mais_size(&inst, &d))?,
            )?;
        }
        Command::MinMais(a) => {
            let inst = load_instance(&a.input)?;
            let mode = if a.sampled {
                MinMaisMode::Sampled {
                    seed: a.seed,
                    samples: u64::try_from(a.budget).context("--budget too large")?,
                }
            } else {
                MinMaisMode::Exhaustive { budget: a.budget }
            };
            let r = match min_mais(&inst, mode, exec) {
                Err(picod::PicodError::Budget { required, budget }) => {
                    let out = json!({"mode": "budget", "required": required.to_string(), "budget": budget.to_string()});
                    write_output(a.output.as_ref(), &serde_json::to_string_pretty(&out)?)?;
                    return Ok(Status::Budget);
                }
                r => r?,
            };
            let out = json!({
                "min": r.min,
                "witness": r.witness,
                "mode": if r.is_exhaustive() { "exhaustive" } else { "sampled" },
                "evaluated": r.evaluated,
                "histogram": r.histogram,
                "config": {"seed": a.seed, "budget": a.budget.to_string(), "sampled": a.sampled, "workers": workers},
            });
            write_output(a.output.as_ref(), &serde_json::to_string_pretty(&out)?)?;
        }
        Command::Verify(a) => return verify(a, exec, workers),
    }
    Ok(Status::Ok)
}

fn verify(a: VerifyArgs, exec: Exec, workers: usize) -> Result<Status> {
    let budget = Budget {
        max_evaluations: a.budget,
        time_limit: (a.time_limit > 0).then(|| Duration::from_secs(a.time_limit)),
        samples: a.samples,
        seed: a.seed,
    };
    let config = json!({
        "check": format!("{:?}", a.check).to_lowercase(),
        "s": a.s, "m": a.m, "s_min": a.s_min, "s_max": a.s_max, "n": a.n,
        "seed": a.seed,
        "budget": a.budget.to_string(),
        "samples": a.samples,
        "time_limit_s": a.time_limit,
        "workers": workers,
    });
    let reports: Vec<Report> = if a.check == VerifyTarget::All {
        let SuiteArg::Desk = a.suite;
        suite::desk_suite(budget, exec)?
    } else {
        let id = check_id(a.check);
        let args = CheckArgs {
            s: a.s,
            m: a.m,
            s_min: a.s_min,
            s_max: a.s_max,
            n: a.n,
        };
        vec![run_check(id, &args, budget, exec)?]
    };
    let reports: Vec<Report> = reports
        .into_iter()
        .map(|mut r| {
            r.config = Some(config.clone());
            r
        })
        .collect();
    let status = if reports.iter().any(|r| r.verdict == Verdict::Fail) {
        Status::Fail
    } else if reports.iter().any(|r| r.verdict == Verdict::Budget) {
        Status::Budget
    } else {
        Status::Ok
    };
    let text = if a.check == VerifyTarget::All {
        let verdict = match status {
            Status::Ok => "pass",
            Status::Fail => "fail",
            Status::Budget => "budget",
        };
        serde_json::to_string_pretty(
            &json!({"suite": "desk", "verdict": verdict, "config": config, "reports": reports}),
        )?
    } else {
        reports[0].to_json()
    };
    write_output(a.output.as_ref(), &text)?;
    if let Some(path) = &a.csv {
        write_csv(path, &reports)?;
    }
    for r in &reports {
        if r.verdict != Verdict::Pass {
            eprintln!("{}: {:?}", r.check_id.as_str(), r.verdict);
        }
    }
    Ok(if reports.len() == 1 {
        Status::of(reports[0].verdict)
    } else {
        status
    })
}

fn check_id(t: VerifyTarget) -> CheckId {
    match t {
        VerifyTarget::Theorem => CheckId::Theorem,
        VerifyTarget::Achievability => CheckId::Achievability,
        VerifyTarget::Claim1 => CheckId::Claim1,
        VerifyTarget::Claim2 => CheckId::Claim2,
        VerifyTarget::Claim3 => CheckId::Claim3,
        VerifyTarget::Claim4 => CheckId::Claim4,
        VerifyTarget::Lemma1 => CheckId::Lemma1,
        VerifyTarget::Reductions => CheckId::Reductions,
        VerifyTarget::Enhancement => CheckId::Enhancement,
        VerifyTarget::Search => CheckId::Search,
        VerifyTarget::All => unreachable!("handled by the suite"),
    }
}
