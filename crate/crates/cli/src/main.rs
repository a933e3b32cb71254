use std::fs;
use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use capacheck_core::engine::CapabilityReport;
use capacheck_core::enumeration::{self, CensusConfig, DEFAULT_BUDGET};
use capacheck_core::oracle::{selftest, SelfTestConfig};
use capacheck_core::presentation::parse_input;
use capacheck_core::suites::{run_suite, SuiteConfig, SUITES};
use capacheck_core::{is_capable, Error, PhiStructure, Prime};

/// `println!` that tolerates a closed stdout (e.g. piping into `head`).
macro_rules! out {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($t)*);
    }};
}

const SCHEMA: &str = "capacheck/1";
const BUDGET_ENV: &str = "CAPACHECK_BUDGET";

#[derive(Parser, Debug)]
#[command(
    name = "capacheck",
    version,
    about = "Capability of class-two groups of odd prime exponent"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide capability of the group given by a presentation or raw-V file.
    Check {
        file: PathBuf,
        /// Generator count, for raw-V files whose header omits it.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        p: Option<u32>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Dump the bases of V and W and the phi matrices.
    Phi {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: u32,
    },
    /// Check every subspace of V (or a uniform sample per dimension).
    Census {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: u32,
        /// Dimensions of X to visit, as `k` or `a..b` (inclusive).
        #[arg(long, value_parser = parse_dims)]
        dims: Option<RangeInclusive<usize>>,
        /// Uniform samples per dimension instead of an exhaustive sweep.
        #[arg(long)]
        sample: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Maximum number of subspaces to visit (default 1e8, or $CAPACHECK_BUDGET).
        #[arg(long)]
        budget: Option<u128>,
        /// Checkpoint file; an existing one is resumed.
        #[arg(long)]
        resume: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Histogram of dim Y_X over k-dimensional subspaces X.
    Dimy {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: u32,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        sample: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        budget: Option<u128>,
    },
    /// Validate the class-three collection engine.
    Oracle {
        #[arg(long)]
        selftest: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Run a named property suite.
    Verify {
        #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(SUITES))]
        suite: String,
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        p: u32,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn parse_dims(s: &str) -> Result<RangeInclusive<usize>, String> {
    let bad = || format!("expected `k` or `a..b`, found `{s}`");
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (a, b.strip_prefix('=').unwrap_or(b)),
        None => (s, s),
    };
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b.trim().parse().map_err(|_| bad())?;
    if a > b {
        return Err(format!("empty range `{s}`"));
    }
    Ok(a..=b)
}

/// Outcome of a command that ran to completion.
enum Outcome {
    Ok,
    /// A suite, audit or self-test reported failures.
    Failed,
}

#[derive(Debug)]
enum CliError {
    Core(Error),
    Usage(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(m) => f.write_str(m),
        }
    }
}

fn prime(p: u32) -> Result<Prime, CliError> {
    Prime::new(p).map_err(|e| CliError::Usage(format!("--p {p}: {e}")))
}

fn budget(flag: Option<u128>) -> Result<u128, CliError> {
    if let Some(b) = flag {
        return Ok(b);
    }
    match std::env::var(BUDGET_ENV) {
        Ok(v) => v
            .trim()
            .parse::<f64>()
            .ok()
            .filter(|b| b.is_finite() && *b >= 0.0)
            .map(|b| b as u128)
            .ok_or_else(|| CliError::Usage(format!("{BUDGET_ENV}=`{v}` is not a count"))),
        Err(_) => Ok(DEFAULT_BUDGET),
    }
}

fn print_json(v: &Value) {
    out!(
        "{}",
        serde_json::to_string_pretty(v).expect("values serialize")
    );
}

fn with_schema(command: &str, body: Value) -> Value {
    let mut out = json!({ "schema": SCHEMA, "command": command });
    if let (Value::Object(o), Value::Object(b)) = (&mut out, body) {
        o.extend(b);
    }
    out
}

fn verdict_sentence(r: &CapabilityReport) -> String {
    if r.capable {
        format!("X = Z_X (dim {}), therefore G is capable.", r.dim_x)
    } else {
        format!(
            "X != Z_X (dim X = {}, dim Z_X = {}), therefore G is not capable.",
            r.dim_x, r.dim_z
        )
    }
}

fn check(
    file: &PathBuf,
    n: Option<usize>,
    p: Option<u32>,
    format: Format,
) -> Result<Outcome, CliError> {
    let text = fs::read_to_string(file)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", file.display())))?;
    let input = parse_input(&text, n, p)?;
    let ps = PhiStructure::build(input.n(), input.prime())?;
    let x = input.to_subspace()?;
    let report = is_capable(&ps, &x)?;
    let names = report.witness_strings(&ps);
    match format {
        Format::Json => {
            let mut body = serde_json::to_value(&report).map_err(Error::from)?;
            body["witness_names"] = json!(names);
            body["verdict"] = json!(verdict_sentence(&report));
            print_json(&with_schema("check", body));
        }
        Format::Text => {
            out!("n = {}, p = {}", report.n, report.p);
            out!(
                "dim X = {}, dim Y_X = {}, dim Z_X = {}",
                report.dim_x,
                report.dim_y,
                report.dim_z
            );
            out!("{}", verdict_sentence(&report));
            if !names.is_empty() {
                out!("witnesses in Z_X mod X:");
                for w in &names {
                    out!("  {w}");
                }
            }
            out!(
                "dim Z(G)/[G,G] = {}, rank bound {}",
                report.central_dim,
                if report.hn_ok { "met" } else { "not met" }
            );
        }
        Format::Csv => {
            out!("n,p,dim_x,dim_y,dim_z,capable,central_dim,hn_ok,sufficient_hit");
            out!(
                "{},{},{},{},{},{},{},{},{}",
                report.n,
                report.p,
                report.dim_x,
                report.dim_y,
                report.dim_z,
                report.capable,
                report.central_dim,
                report.hn_ok,
                report.sufficient_hit
            );
        }
    }
    Ok(Outcome::Ok)
}

fn phi(n: usize, p: u32) -> Result<Outcome, CliError> {
    let ps = PhiStructure::build(n, prime(p)?)?;
    let idx = ps.index();
    let maps: Vec<Value> = (1..=n)
        .map(|r| {
            let cols: Vec<Value> = (0..ps.dim_v())
                .map(|c| json!(ps.phi_column(r, c)))
                .collect();
            json!({ "r": r, "columns": cols })
        })
        .collect();
    print_json(&with_schema(
        "phi",
        json!({
            "n": n,
            "p": p,
            "dim_v": ps.dim_v(),
            "dim_w": ps.dim_w(),
            "pair_order": idx.pairs().iter().map(|x| x.to_string()).collect::<Vec<_>>(),
            "triple_order": idx.triples().iter().map(|x| x.to_string()).collect::<Vec<_>>(),
            "phi": maps,
        }),
    ));
    Ok(Outcome::Ok)
}

#[allow(clippy::too_many_arguments)]
fn census(
    n: usize,
    p: u32,
    dims: Option<RangeInclusive<usize>>,
    sample: Option<u64>,
    seed: u64,
    workers: usize,
    budget_flag: Option<u128>,
    resume: Option<PathBuf>,
    format: Format,
) -> Result<Outcome, CliError> {
    let p = prime(p)?;
    let mut cfg = CensusConfig::new(n, p);
    cfg.dims = dims;
    cfg.sample = sample;
    cfg.seed = seed;
    cfg.workers = workers;
    cfg.budget = budget(budget_flag)?;
    cfg.checkpoint = resume;
    let report = enumeration::census(&cfg)?;
    match format {
        Format::Json => {
            let body = serde_json::to_value(&report).map_err(Error::from)?;
            let mut out = with_schema("census", body);
            out["total"] = json!(report.total());
            out["capable_total"] = json!(report.capable());
            out["non_capable_total"] = json!(report.non_capable());
            print_json(&out);
        }
        Format::Csv => out!("{}", report.to_csv().trim_end()),
        Format::Text => {
            out!(
                "n = {}, p = {}, {}",
                report.n,
                report.p,
                if report.exhaustive {
                    "exhaustive"
                } else {
                    "sampled"
                }
            );
            out!(
                "{:>4} {:>12} {:>12} {:>12}",
                "k",
                "total",
                "capable",
                "non-capable"
            );
            for s in &report.dims {
                out!(
                    "{:>4} {:>12} {:>12} {:>12}",
                    s.k,
                    s.total,
                    s.capable,
                    s.non_capable
                );
            }
            for (rule, c) in &report.violation_counts {
                out!("{rule}: {c} violations");
            }
        }
    }
    Ok(if report.violation_total() == 0 {
        Outcome::Ok
    } else {
        Outcome::Failed
    })
}

fn oracle(run: bool, format: Format) -> Result<Outcome, CliError> {
    if !run {
        return Err(CliError::Usage(
            "oracle: nothing to do (pass --selftest)".into(),
        ));
    }
    let rows = selftest(&SelfTestConfig::default())?;
    let ok = rows.iter().all(|r| r.passed());
    match format {
        Format::Json => print_json(&with_schema(
            "oracle",
            json!({ "passed": ok, "rows": rows }),
        )),
        Format::Csv => {
            out!("check,n,p,trials,failures");
            for r in &rows {
                out!("{},{},{},{},{}", r.check, r.n, r.p, r.trials, r.failures);
            }
        }
        Format::Text => {
            out!(
                "{:<28} {:>2} {:>2} {:>7} {:>8}  result",
                "check",
                "n",
                "p",
                "trials",
                "failures"
            );
            for r in &rows {
                out!(
                    "{:<28} {:>2} {:>2} {:>7} {:>8}  {}",
                    r.check,
                    r.n,
                    r.p,
                    r.trials,
                    r.failures,
                    if r.passed() { "pass" } else { "FAIL" }
                );
            }
        }
    }
    Ok(if ok { Outcome::Ok } else { Outcome::Failed })
}

fn verify(suite: &str, n: usize, p: u32, samples: usize, seed: u64) -> Result<Outcome, CliError> {
    let cfg = SuiteConfig {
        n,
        p: prime(p)?,
        samples,
        seed,
    };
    let report = run_suite(suite, &cfg)?;
    let passed = report.passed();
    let mut body = serde_json::to_value(&report).map_err(Error::from)?;
    body["passed"] = json!(passed);
    print_json(&with_schema("verify", body));
    Ok(if passed { Outcome::Ok } else { Outcome::Failed })
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Check { file, n, p, format } => check(&file, n, p, format),
        Command::Phi { n, p } => phi(n, p),
        Command::Census {
            n,
            p,
            dims,
            sample,
            seed,
            workers,
            budget,
            resume,
            format,
        } => census(n, p, dims, sample, seed, workers, budget, resume, format),
        Command::Dimy {
            n,
            p,
            k,
            sample,
            seed,
            budget: b,
        } => {
            let hist = enumeration::dimy_profile(n, prime(p)?, k, sample, seed, budget(b)?)?;
            print_json(&with_schema(
                "dimy",
                json!({ "n": n, "p": p, "k": k, "sample": sample, "histogram": hist }),
            ));
            Ok(Outcome::Ok)
        }
        Command::Oracle { selftest, format } => oracle(selftest, format),
        Command::Verify {
            suite,
            n,
            p,
            samples,
            seed,
        } => verify(&suite, n, p, samples, seed),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Failed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
