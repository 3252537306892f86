use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use boostlab::booster::{fmt_f, reference_metrics, ReferenceTrace};
use boostlab::oracle::GridSpec;
use boostlab::verify::{run_suite, Suite};
use boostlab::{
    decompose, exp_loss, near_optimal_solution, parse_dataset, rate_constants, run, BoostTrace,
    Combination, Decomposition, Error, NamedInstance, Result, TerminalStatus, Variant,
};

const EXIT_ERROR: u8 = 1;
const EXIT_PERFECT_SEPARATION: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "boostlab", version, about = "AdaBoost convergence-rate laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Plain,
    Scaled,
}

#[derive(Subcommand)]
enum Command {
    /// Run AdaBoost on a dataset and write the trace and reports.
    Run(RunArgs),
    /// Compute the zero-loss/finite-loss decomposition and rate constants.
    Decompose {
        #[arg(long)]
        dataset: String,
        /// JSON report path (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a verification battery and print a pass/fail table.
    Verify {
        /// trace-identities | rate-bounds | lower-bounds | decomposition-consistency
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    /// three-example | triangular:M | nonintegral:NU | mint-triangular:M |
    /// mint-mumax:M | random:M:N:ternary|continuous[:SEED] | file:PATH
    #[arg(long)]
    dataset: String,
    #[arg(long, value_enum, default_value = "plain")]
    variant: VariantArg,
    #[arg(long, default_value_t = 100)]
    rounds: usize,
    /// Stop once the loss is within this of the reference loss.
    #[arg(long, requires = "reference", conflicts_with = "stop_loss")]
    target_eps: Option<f64>,
    /// Stop once the loss is at most this value.
    #[arg(long)]
    stop_loss: Option<f64>,
    /// Reference combination: comma-separated weights or auto:near-optimal:EPS.
    #[arg(long)]
    reference: Option<String>,
    /// Grid for distance estimates as LO,HI,RESOLUTION,LEVELS (at most 3 columns).
    #[arg(long, requires = "reference")]
    distance_grid: Option<String>,
    /// Attach the decomposition (adds loss_Z and loss_F to the trace).
    #[arg(long)]
    decompose: bool,
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
    /// Round, loss, edge and rate-envelope CSV.
    #[arg(long)]
    plot_data: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Decompose { dataset, out, seed } => cmd_decompose(&dataset, out.as_deref(), seed),
        Command::Verify { suite, seed } => match suite.parse::<Suite>() {
            Ok(s) => Ok(cmd_verify(s, effective_seed(seed))),
            Err(e) => {
                eprintln!("error: {e}");
                eprintln!(
                    "valid suites: {}",
                    Suite::ALL.map(|s| s.name()).join(", ")
                );
                return ExitCode::from(EXIT_USAGE);
            }
        },
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn effective_seed(flag: u64) -> u64 {
    match std::env::var("BOOSTLAB_SEED") {
        Ok(v) => v.trim().parse().unwrap_or_else(|_| {
            log::warn!("ignoring unparsable BOOSTLAB_SEED `{v}`");
            flag
        }),
        Err(_) => flag,
    }
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents)
        .map_err(|e| Error::InvalidArgument(format!("cannot write {}: {e}", path.display())))
}

fn parse_reference(
    source: &str,
    inst: &NamedInstance,
    dec: &mut Option<Decomposition>,
    seed: u64,
) -> Result<Combination> {
    if let Some(eps) = source.strip_prefix("auto:near-optimal:") {
        let eps: f64 = eps
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad epsilon in `{source}`")))?;
        let d = match dec.take() {
            Some(d) => d,
            None => decompose(&inst.matrix, seed)?,
        };
        let lam = near_optimal_solution(&inst.matrix, &d, eps)?;
        *dec = Some(d);
        return Ok(lam);
    }
    let w: Vec<f64> = source
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::InvalidArgument(format!("bad reference `{source}`")))?;
    if w.len() != inst.matrix.cols() {
        return Err(Error::DimensionMismatch {
            expected: inst.matrix.cols(),
            got: w.len(),
        });
    }
    Ok(Combination(w))
}

fn parse_grid(source: &str, n: usize) -> Result<GridSpec> {
    let bad = || Error::InvalidArgument(format!("bad grid `{source}`; expected LO,HI,RES,LEVELS"));
    let parts: Vec<&str> = source.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(bad());
    }
    let lo: f64 = parts[0].parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].parse().map_err(|_| bad())?;
    let res: usize = parts[2].parse().map_err(|_| bad())?;
    let levels: usize = parts[3].parse().map_err(|_| bad())?;
    Ok(GridSpec::cube(n, lo, hi, res, levels))
}

fn opt(v: Option<f64>) -> Value {
    match v {
        Some(x) if x.is_finite() => json!(x),
        _ => Value::Null,
    }
}

fn plot_csv(trace: &BoostTrace, dec: &Decomposition, m: usize, n: usize) -> String {
    let rc = rate_constants(dec, m, n);
    let floor = dec.k_f / m as f64;
    let mut out = String::from("t,loss,delta,envelope\n");
    out.push_str(&format!("0,{},,\n", fmt_f(trace.initial_loss)));
    for rec in &trace.records {
        let env = rc.c.map(|c| fmt_f(floor + c / rec.t as f64)).unwrap_or_default();
        out.push_str(&format!("{},{},{},{}\n", rec.t, fmt_f(rec.loss), fmt_f(rec.delta), env));
    }
    out
}

fn cmd_run(args: RunArgs) -> Result<ExitCode> {
    let seed = effective_seed(args.seed);
    let inst = parse_dataset(&args.dataset, seed)?;
    let m = &inst.matrix;
    let variant = match args.variant {
        VariantArg::Plain => Variant::Plain,
        VariantArg::Scaled => Variant::Scaled,
    };
    let mut dec = if args.decompose || args.plot_data.is_some() {
        Some(decompose(m, seed)?)
    } else {
        None
    };
    let reference = match &args.reference {
        Some(s) => Some(parse_reference(s, &inst, &mut dec, seed)?),
        None => None,
    };
    let stop = match (args.target_eps, &reference) {
        (Some(eps), Some(star)) => Some(exp_loss(m, star)? + eps),
        _ => args.stop_loss,
    };
    let attach = if args.decompose { dec.as_ref() } else { None };
    let trace = run(m, args.rounds, variant, stop, attach)?;

    let grid = match &args.distance_grid {
        Some(g) => Some(parse_grid(g, m.cols())?),
        None => None,
    };
    let metrics: Option<ReferenceTrace> = match &reference {
        Some(star) => Some(reference_metrics(m, &trace, star, grid.as_ref())?),
        None => None,
    };

    if let Some(p) = &args.trace {
        write(p, &trace.to_csv(metrics.as_ref()))?;
    }
    if let (Some(p), Some(d)) = (&args.plot_data, &dec) {
        write(p, &plot_csv(&trace, d, m.rows(), m.cols()))?;
    }

    let final_loss = trace.loss_at(trace.len());
    let mut summary = json!({
        "dataset": inst.name,
        "m": m.rows(),
        "N": m.cols(),
        "variant": variant,
        "rounds_requested": args.rounds,
        "rounds_run": trace.len(),
        "status": trace.status,
        "seed": seed,
        "initial_loss": trace.initial_loss,
        "final_loss": final_loss,
        "final_l1_norm": trace.final_weights.l1_norm(),
        "final_weights": trace.final_weights.as_slice(),
        "stop_loss": opt(stop),
    });
    if let (Some(star), Some(rt)) = (&reference, &metrics) {
        let b = rt.b;
        let mut r = json!({
            "lambda_star": star.as_slice(),
            "B": b,
            "target_loss": rt.target_loss,
            "R_final": rt.r.last(),
        });
        if let Some(eps) = args.target_eps {
            r["rounds_bound_plain"] = opt(Some(13.0 * b.powi(6) * eps.powi(-5)));
            r["rounds_bound_scaled"] = opt(Some(3.0 * b * b / eps));
        }
        summary["reference"] = r;
    }
    if let Some(d) = &dec {
        let rc = rate_constants(d, m.rows(), m.cols());
        summary["decomposition"] = json!({
            "regime": rc.regime,
            "K_F": d.k_f,
            "inf_loss": d.k_f / m.rows() as f64,
            "C": opt(rc.c),
            "ln_C": opt(rc.ln_c),
        });
    }
    let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    match &args.report {
        Some(p) => write(p, &(text + "\n"))?,
        None => println!("{text}"),
    }
    Ok(match trace.status {
        TerminalStatus::PerfectSeparation => {
            eprintln!("perfect separation after {} rounds", trace.len());
            ExitCode::from(EXIT_PERFECT_SEPARATION)
        }
        _ => ExitCode::SUCCESS,
    })
}

fn cmd_decompose(dataset: &str, out: Option<&Path>, seed: u64) -> Result<ExitCode> {
    let seed = effective_seed(seed);
    let inst = parse_dataset(dataset, seed)?;
    let dec = decompose(&inst.matrix, seed)?;
    let report = dec.report(&inst.matrix, inst.row_labels.as_deref());
    let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    match out {
        Some(p) => write(p, &text)?,
        None => print!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(suite: Suite, seed: u64) -> ExitCode {
    let report = run_suite(suite, seed);
    print!("{}", report.table());
    if report.passed() {
        println!("{suite}: all checks passed");
        ExitCode::SUCCESS
    } else {
        println!("{suite}: FAILED");
        ExitCode::from(EXIT_ERROR)
    }
}
