use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qfst::{
    builtin, eval_amplitude, exhaustive_check, parse_machine_text, sample_outcomes,
    serialize_machine, validate_machine, CheckOptions, F1Oracle, Machine, Run, SimError, Simulator,
    BUILTIN_NAMES,
};

#[derive(Parser)]
#[command(
    name = "qfst",
    version,
    about = "Simulate and verify one-way quantum finite-state transducers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Machine definition file (.qfst)
    #[arg(long, short = 'm')]
    machine: Option<PathBuf>,
    /// Built-in machine: f1 or f1-classical
    #[arg(long)]
    builtin: Option<String>,
}

#[derive(Args)]
struct WordArgs {
    #[command(flatten)]
    source: Source,
    /// Input word, without end markers
    #[arg(long)]
    input: String,
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Check a machine definition
    Validate {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        json: bool,
    },
    /// Output distribution for one input
    Run(WordArgs),
    /// Accept/reject probabilities, ignoring outputs
    Recognize(WordArgs),
    /// Draw outcomes from the exact distribution
    Sample {
        #[command(flatten)]
        word: WordArgs,
        #[arg(long, default_value_t = 1000)]
        n: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Exhaustive bounded-error check against w c w -> w
    Check {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 7)]
        max_len: usize,
        /// Probability every input must reach, as an amplitude expression
        #[arg(long, default_value = "2/3")]
        threshold: String,
        /// Letters of w
        #[arg(long, default_value = "ab")]
        letters: String,
        #[arg(long, default_value_t = 'c')]
        separator: char,
        /// Violations listed in the JSON report
        #[arg(long, default_value_t = 20)]
        limit: usize,
        #[arg(long)]
        json: bool,
    },
    /// Print a built-in machine as .qfst text
    ExportBuiltin { name: String },
}

enum Failure {
    /// exit 1
    Rejected(String),
    /// exit 2
    Usage(String),
}

type Outcome = Result<(), Failure>;

fn load(source: &Source) -> Result<Machine, Failure> {
    match (&source.machine, &source.builtin) {
        (Some(path), None) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            parse_machine_text(&text).map_err(|e| {
                Failure::Usage(format!(
                    "{}:{}:{}: {}",
                    path.display(),
                    e.line,
                    e.column,
                    e.kind
                ))
            })
        }
        (None, Some(name)) => builtin(name).ok_or_else(|| {
            Failure::Usage(format!(
                "unknown builtin `{name}` (known: {})",
                BUILTIN_NAMES.join(", ")
            ))
        }),
        _ => Err(Failure::Usage(
            "give exactly one of --machine or --builtin".into(),
        )),
    }
}

fn simulator(m: &Machine) -> Result<Simulator<'_, f64>, Failure> {
    Simulator::new(m).map_err(sim_failure)
}

fn sim_failure(e: SimError) -> Failure {
    match e {
        SimError::Invalid(_) => Failure::Rejected(e.to_string()),
        _ => Failure::Usage(e.to_string()),
    }
}

fn print_json(v: &serde_json::Value) {
    println!(
        "{}",
        serde_json::to_string(v).expect("json values serialize")
    );
}

/// Clamps float noise so tables never show `-0.0000`.
fn prob(p: f64) -> f64 {
    p.max(0.0)
}

fn fmt_output(w: &str) -> String {
    format!("{w:?}")
}

fn run_table(r: &Run) {
    println!("input: {}", fmt_output(&r.input));
    println!("{:<12} {:<16} {:>10}", "outcome", "output", "prob");
    for (w, p) in &r.accept {
        println!("{:<12} {:<16} {:>10.4}", "accept", fmt_output(w), prob(*p));
    }
    println!("{:<12} {:<16} {:>10.4}", "reject", "", prob(r.reject));
    println!(
        "{:<12} {:<16} {:>10.4}",
        "unresolved",
        "",
        prob(r.unresolved)
    );
}

fn validate(source: &Source, json: bool) -> Outcome {
    let m = load(source)?;
    let report = validate_machine(&m);
    if json {
        print_json(&serde_json::json!({
            "machine": m.name,
            "ok": report.ok,
            "issues": report.issues.iter().map(|i| serde_json::json!({
                "severity": format!("{:?}", i.severity).to_lowercase(),
                "location": i.location,
                "message": i.message,
                "residual": i.residual,
            })).collect::<Vec<_>>(),
        }));
    } else {
        eprint!("{report}");
        println!("{}: {}", m.name, if report.ok { "ok" } else { "invalid" });
    }
    if report.ok {
        Ok(())
    } else {
        Err(Failure::Rejected(format!("{} failed validation", m.name)))
    }
}

fn run_word(args: &WordArgs) -> Result<Run, Failure> {
    let m = load(&args.source)?;
    simulator(&m)?.run_any(&args.input).map_err(sim_failure)
}

fn threads_from_env() -> Result<Option<usize>, Failure> {
    match std::env::var("QFST_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(0) | Err(_) => Err(Failure::Usage(format!(
                "QFST_THREADS must be a positive integer, got `{v}`"
            ))),
            Ok(k) => Ok(Some(k)),
        },
        Err(_) => Ok(None),
    }
}

fn execute(cli: Cli) -> Outcome {
    match cli.command {
        Command::Validate { source, json } => validate(&source, json),
        Command::Run(args) => {
            let r = run_word(&args)?;
            if args.json {
                print_json(&r.to_json());
            } else {
                run_table(&r);
            }
            Ok(())
        }
        Command::Recognize(args) => {
            let r = run_word(&args)?;
            let (a, rej, u) = r.recognition();
            if args.json {
                let p = |v: f64| qfst::simulator::round_sig(v, 12);
                print_json(&serde_json::json!({
                    "input": r.input,
                    "accept": p(a),
                    "reject": p(rej),
                    "unresolved": p(u),
                }));
            } else {
                println!("input: {}", fmt_output(&r.input));
                println!(
                    "accept     {:.4}\nreject     {:.4}\nunresolved {:.4}",
                    prob(a),
                    prob(rej),
                    prob(u)
                );
            }
            Ok(())
        }
        Command::Sample { word, n, seed } => {
            let r = run_word(&word)?;
            let counts = sample_outcomes(&r, n, seed).map_err(|e| Failure::Usage(e.to_string()))?;
            if word.json {
                let counts: BTreeMap<String, u64> =
                    counts.iter().map(|(k, v)| (k.to_string(), *v)).collect();
                print_json(&serde_json::json!({
                    "input": r.input,
                    "n": n,
                    "seed": seed,
                    "counts": counts,
                }));
            } else {
                println!("input: {}  n = {n}  seed = {seed}", fmt_output(&r.input));
                println!(
                    "{:<20} {:>10} {:>10} {:>10}",
                    "outcome", "count", "freq", "exact"
                );
                for (label, p) in qfst::sample::outcome_probabilities(&r) {
                    let c = counts.get(&label).copied().unwrap_or(0);
                    println!(
                        "{:<20} {:>10} {:>10.4} {:>10.4}",
                        label.to_string(),
                        c,
                        c as f64 / n as f64,
                        prob(p)
                    );
                }
            }
            Ok(())
        }
        Command::Check {
            source,
            max_len,
            threshold,
            letters,
            separator,
            limit,
            json,
        } => {
            let m = load(&source)?;
            let t = eval_amplitude::<f64>(&threshold)
                .map_err(|e| Failure::Usage(format!("--threshold: {e}")))?;
            if t.im != 0.0 || !(0.0..=1.0).contains(&t.re) {
                return Err(Failure::Usage(
                    "--threshold must be a real number in [0, 1]".into(),
                ));
            }
            let oracle = F1Oracle {
                letters: letters.chars().collect(),
                separator,
            };
            let opts = CheckOptions {
                max_len,
                threshold: t.re,
                threads: threads_from_env()?,
            };
            let report = exhaustive_check(&m, &oracle, &opts).map_err(|e| match e {
                qfst::CheckError::Sim(s) => sim_failure(s),
                other => Failure::Usage(other.to_string()),
            })?;
            if json {
                print_json(&report.to_json(limit));
            } else {
                println!(
                    "{} inputs, {} violations",
                    report.checked_inputs,
                    report.violations.len()
                );
                let show = |v: Option<f64>| v.map_or("n/a".to_string(), |p| format!("{p:.4}"));
                println!(
                    "min accept on defined:   {}",
                    show(report.min_accept_on_defined)
                );
                println!(
                    "min reject on undefined: {}",
                    show(report.min_reject_on_undefined)
                );
                for v in report.violations.iter().take(limit) {
                    let expected = match &v.expected {
                        qfst::Expected::Defined(w) => format!("defined {}", fmt_output(w)),
                        qfst::Expected::Undefined => "undefined".into(),
                    };
                    println!(
                        "  {:<12} {:<16} accept {:.4} reject {:.4}",
                        fmt_output(&v.input),
                        expected,
                        v.observed.accept_total(),
                        v.observed.reject
                    );
                }
            }
            if report.passed() {
                Ok(())
            } else {
                Err(Failure::Rejected(format!(
                    "{} violations",
                    report.violations.len()
                )))
            }
        }
        Command::ExportBuiltin { name } => {
            let m: Machine = builtin(&name).ok_or_else(|| {
                Failure::Usage(format!(
                    "unknown builtin `{name}` (known: {})",
                    BUILTIN_NAMES.join(", ")
                ))
            })?;
            print!("{}", serialize_machine(&m));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Rejected(msg)) => {
            eprintln!("qfst: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("qfst: {msg}");
            ExitCode::from(2)
        }
    }
}
