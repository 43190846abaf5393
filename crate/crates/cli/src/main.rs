use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use findep::analysis::{chi_square_gof, tally, GofReport};
use findep::eden::{eden_run, eden_sample};
use findep::insertion::{necklace_sample, sample_replicates};
use findep::recurrence::{
    cycle_law_with, is_theorem_pair, line_window_law_with, EnumOptions, DEFAULT_BUDGET,
};
use findep::verify::{run_all, run_suite, Suite, SuiteReport, VerifyOptions};
use findep::{Error, ExactDist, RngStream, Word};

/// Version of every JSON document this tool writes.
const SCHEMA_VERSION: u32 = 1;

const AFTER_HELP: &str = "\
Configuration precedence: command-line flags, then FINDEP_* environment \
variables (shown next to each flag), then defaults.

Exit codes: 0 success, 1 verification or goodness-of-fit failure, \
2 usage error or invalid parameters, 3 resource budget exceeded.";

#[derive(Parser)]
#[command(name = "findep", version, about = "Exact laws, samplers and checks for finitely dependent colorings", after_help = AFTER_HELP)]
struct Cli {
    /// Output format.
    #[arg(
        long,
        global = true,
        value_enum,
        env = "FINDEP_FORMAT",
        default_value = "json"
    )]
    format: Format,

    /// Write data here instead of stdout.
    #[arg(long, global = true, env = "FINDEP_OUT")]
    out: Option<PathBuf>,

    /// Worker threads (default: available parallelism). Results do not
    /// depend on this.
    #[arg(long, global = true, env = "FINDEP_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Exact law by enumeration.
    #[command(subcommand)]
    Exact(ExactCommand),
    /// Monte Carlo samples from a growth process.
    Sample(SampleArgs),
    /// Run verification suites.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct BudgetArg {
    /// Largest number of words an enumeration may visit.
    #[arg(long, env = "FINDEP_BUDGET", default_value_t = DEFAULT_BUDGET)]
    budget: u128,
}

#[derive(Subcommand)]
enum ExactCommand {
    /// Law of the coloring of the n-cycle.
    Cycle {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        q: u8,
        /// Also canonicalize colors in memo keys.
        #[arg(long)]
        color_canonical_memo: bool,
        #[command(flatten)]
        budget: BudgetArg,
    },
    /// Law of n consecutive sites of the line coloring for (k, q).
    Line {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        q: u8,
        #[command(flatten)]
        budget: BudgetArg,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Sampler {
    Necklace,
    Eden,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Emit {
    /// One state per replicate.
    Samples,
    /// Counts per observed state.
    Counts,
    /// Only the goodness-of-fit report.
    None,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(value_enum)]
    sampler: Sampler,
    /// Cycle length.
    #[arg(long)]
    n: usize,
    #[arg(long)]
    q: u8,
    #[arg(long, env = "FINDEP_REPS", default_value_t = 1000)]
    reps: usize,
    #[arg(long, env = "FINDEP_SEED", default_value_t = 0)]
    seed: u64,
    /// Test the samples against the exact law; exit 1 if rejected.
    #[arg(long)]
    gof: bool,
    /// Significance level of the test.
    #[arg(long, env = "FINDEP_ALPHA", default_value_t = findep::analysis::DEFAULT_ALPHA)]
    alpha: f64,
    #[arg(long, value_enum, default_value = "samples")]
    emit: Emit,
    /// Eden only: write the final state of replicate 0 as JSON.
    #[arg(long)]
    snapshot: Option<PathBuf>,
    #[command(flatten)]
    budget: BudgetArg,
}

#[derive(Args)]
struct VerifyArgs {
    /// `all` or one of: partition, mobius, shift, symmetry, restriction,
    /// kdep, coupling, window, marginals, kernels, blockfactor-stat.
    suite: String,
    /// Largest n checked.
    #[arg(long, env = "FINDEP_MAX_N")]
    max_n: Option<usize>,
    /// kdep: cycle length of a single check.
    #[arg(long)]
    n: Option<usize>,
    /// kdep: number of colors of a single check.
    #[arg(long)]
    q: Option<u8>,
    /// kdep: dependence range of a single check.
    #[arg(long)]
    k: Option<usize>,
}

enum Failure {
    /// A check or test ran and was rejected.
    Rejected,
    Usage(String),
    Budget(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::BudgetExceeded { .. } | Error::Overflow => Failure::Budget(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match &cli.command {
        Command::Exact(cmd) => exact(&cli, cmd),
        Command::Sample(args) => sample(&cli, args),
        Command::Verify(args) => verify(&cli, args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Rejected) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Budget(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn write_output(cli: &Cli, text: &str) -> Result<(), Failure> {
    match &cli.out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Failure::Usage(format!("cannot write to stdout: {e}")))
        }
    }
}

fn json_text(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn exact(cli: &Cli, cmd: &ExactCommand) -> Result<(), Failure> {
    let (law, meta): (ExactDist<Word>, Value) = match cmd {
        ExactCommand::Cycle {
            n,
            q,
            color_canonical_memo,
            budget,
        } => {
            let opts = EnumOptions {
                budget: budget.budget,
                color_canonical_memo: *color_canonical_memo,
            };
            let law = cycle_law_with(*n, *q, &opts)?;
            (law, json!({ "model": "cycle", "n": n, "q": q }))
        }
        ExactCommand::Line { n, k, q, budget } => {
            if *q < 3 {
                return Err(Error::TooFewColors { q: *q, min: 3 }.into());
            }
            let opts = EnumOptions {
                budget: budget.budget,
                ..EnumOptions::default()
            };
            let law = line_window_law_with(*n, *k, *q, &opts)?;
            let theorem = is_theorem_pair(*k, *q);
            if !theorem {
                eprintln!("note: (k, q) = ({k}, {q}) is not one of (1, 4), (2, 3); the window law is formal");
            }
            (
                law,
                json!({ "model": "line", "n": n, "k": k, "q": q, "theorem_grade": theorem }),
            )
        }
    };
    let text = match cli.format {
        Format::Csv => law.to_csv(),
        Format::Json => {
            let mut doc = json!({
                "schema_version": SCHEMA_VERSION,
                "kind": "exact-distribution",
                "support_size": law.len(),
                "states": law.to_json(),
            });
            merge(&mut doc, meta);
            json_text(&doc)
        }
    };
    write_output(cli, &text)
}

fn merge(doc: &mut Value, extra: Value) {
    if let (Value::Object(d), Value::Object(e)) = (doc, extra) {
        d.extend(e);
    }
}

fn sample(cli: &Cli, args: &SampleArgs) -> Result<(), Failure> {
    if args.snapshot.is_some() && args.sampler == Sampler::Necklace {
        return Err(Failure::Usage(
            "--snapshot applies to the eden sampler only".into(),
        ));
    }
    if args.reps == 0 {
        return Err(Failure::Usage("--reps must be at least 1".into()));
    }
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(Error::InvalidAlpha(args.alpha).into());
    }
    let (n, q) = (args.n, args.q);
    // exact law first, so a budget problem surfaces before sampling
    let law = if args.gof {
        let opts = EnumOptions {
            budget: args.budget.budget,
            ..EnumOptions::default()
        };
        Some(cycle_law_with(n, q, &opts)?)
    } else {
        None
    };
    let samples = match args.sampler {
        Sampler::Necklace => sample_replicates(args.reps, args.seed, |r| necklace_sample(n, q, r))?,
        Sampler::Eden => sample_replicates(args.reps, args.seed, |r| eden_sample(n, q, r))?,
    };
    if let Some(path) = &args.snapshot {
        let (state, _) = eden_run(n, q, &mut RngStream::new(args.seed, 0))?;
        let doc = json!({
            "schema_version": SCHEMA_VERSION,
            "kind": "eden-snapshot",
            "seed": args.seed,
            "replicate": 0,
            "state": state.to_json(),
        });
        fs::write(path, json_text(&doc))
            .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
    }
    let counts = tally(&samples);
    let report: Option<GofReport> = match &law {
        Some(law) => Some(chi_square_gof(&counts, law, args.alpha)?.with_seed(args.seed)),
        None => None,
    };
    if let Some(r) = &report {
        eprintln!(
            "gof: statistic={:.4} dof={} p={:.6} alpha={} -> {}",
            r.statistic,
            r.dof,
            r.p_value,
            r.alpha,
            if r.pass { "pass" } else { "fail" }
        );
        if let Some(d) = &r.diagnostic {
            eprintln!("gof: {d}");
        }
    }
    let sampler = match args.sampler {
        Sampler::Necklace => "necklace",
        Sampler::Eden => "eden",
    };
    let text = match cli.format {
        Format::Csv => match args.emit {
            Emit::Samples => {
                let mut s = String::from("replicate,state\n");
                for (j, x) in samples.iter().enumerate() {
                    s.push_str(&format!("{j},{}\n", csv_field(&x.to_text(q))));
                }
                s
            }
            Emit::Counts => {
                let mut s = String::from("state,count\n");
                for (x, c) in &counts {
                    s.push_str(&format!("{},{c}\n", csv_field(&x.to_text(q))));
                }
                s
            }
            Emit::None => String::new(),
        },
        Format::Json => {
            let mut doc = json!({
                "schema_version": SCHEMA_VERSION,
                "kind": "samples",
                "sampler": sampler,
                "n": n,
                "q": q,
                "reps": args.reps,
                "seed": args.seed,
            });
            let body = match args.emit {
                Emit::Samples => json!({
                    "samples": samples.iter().map(|x| x.to_text(q)).collect::<Vec<_>>()
                }),
                Emit::Counts => json!({
                    "counts": counts.iter().map(|(x, c)| json!({ "state": x.to_text(q), "count": c })).collect::<Vec<_>>()
                }),
                Emit::None => json!({}),
            };
            merge(&mut doc, body);
            if let Some(r) = &report {
                merge(&mut doc, json!({ "gof": r }));
            }
            json_text(&doc)
        }
    };
    write_output(cli, &text)?;
    match report {
        Some(r) if !r.pass => Err(Failure::Rejected),
        _ => Ok(()),
    }
}

fn verify(cli: &Cli, args: &VerifyArgs) -> Result<(), Failure> {
    let reports: Vec<SuiteReport> = if args.suite == "all" {
        if args.n.is_some() || args.q.is_some() || args.k.is_some() {
            return Err(Failure::Usage(
                "--n, --q and --k apply to `verify kdep` only".into(),
            ));
        }
        run_all(args.max_n)?
    } else {
        let suite: Suite = args.suite.parse().map_err(|_| {
            Failure::Usage(format!(
                "unknown suite {:?}; try `findep verify --help`",
                args.suite
            ))
        })?;
        if suite != Suite::Kdep && (args.n.is_some() || args.q.is_some() || args.k.is_some()) {
            return Err(Failure::Usage(
                "--n, --q and --k apply to `verify kdep` only".into(),
            ));
        }
        let opts = VerifyOptions {
            max_n: args.max_n,
            n: args.n,
            q: args.q,
            k: args.k,
        };
        vec![run_suite(suite, &opts)?]
    };
    for r in &reports {
        let passed = r.checks.iter().filter(|c| c.pass).count();
        eprintln!(
            "{}: {} ({passed}/{} checks, {} ms)",
            r.suite,
            if r.pass { "PASS" } else { "FAIL" },
            r.checks.len(),
            r.elapsed_ms
        );
        if r.suite == Suite::BlockfactorStat {
            for detail in r.checks.iter().filter_map(|c| c.detail.as_deref()) {
                eprintln!("  {detail}");
            }
        }
        if let Some(cx) = &r.counterexample {
            eprintln!("  counterexample: {cx}");
        }
    }
    let all_pass = reports.iter().all(|r| r.pass);
    let text = match cli.format {
        Format::Csv => {
            let mut s = String::from("suite,check,pass,detail\n");
            for r in &reports {
                for c in &r.checks {
                    s.push_str(&format!(
                        "{},{},{},{}\n",
                        r.suite,
                        csv_field(&c.label),
                        c.pass,
                        csv_field(c.detail.as_deref().unwrap_or(""))
                    ));
                }
            }
            s
        }
        Format::Json => json_text(&json!({
            "schema_version": SCHEMA_VERSION,
            "kind": "verify-report",
            "pass": all_pass,
            "suites": reports,
        })),
    };
    write_output(cli, &text)?;
    if all_pass {
        Ok(())
    } else {
        Err(Failure::Rejected)
    }
}
