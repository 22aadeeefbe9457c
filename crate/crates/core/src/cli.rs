//! Command-line front end. Output streams carry only JSON, JSON Lines or CSV;
//! diagnostics go to the error stream.
//!
//! Exit codes: 0 success (or feasible for `solve`), 1 infeasible, 2 usage or
//! input error, 3 node cap reached.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_bigint::BigUint;

use crate::bounds::{k_of_r, lemma1_prob_bound, lemma2_violation_bound, node_count_lower_bound};
use crate::error::{Error, Result};
use crate::harness::{run_experiment_with, summarize, ExperimentConfig, DEFAULT_NODE_CAP};
use crate::instance::{generate_instance, GeneratorConfig, Instance, Rounding};
use crate::oracles::property_report;
use crate::params::{parse_unit_ratio, Constants, Exponent, Ratio};
use crate::solver::{solve, BranchOrder, FirstChild, SolveConfig, Verdict};

pub const VERSION: &str = concat!(
    env!("CARGO_PKG_VERSION"),
    " (prng: ChaCha8 via rand_chacha 0.9 seed_from_u64; trial seeds: SplitMix64)"
);

pub const EXIT_OK: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CAPPED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "subsum-bnb", version = VERSION, about = "Hard subset-sum instances for ordinary branch-and-bound")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a random instance as JSON.
    Gen(GenArgs),
    /// Run branch-and-bound on an instance file.
    Solve(SolveArgs),
    /// Check the structural properties of an instance.
    Verify(VerifyArgs),
    /// Print the analytic bounds as CSV.
    Bounds(BoundsArgs),
    /// Run a Monte Carlo sweep.
    Exp(ExpArgs),
}

fn ratio_arg(s: &str) -> std::result::Result<Ratio, String> {
    parse_unit_ratio(s).map_err(|e| e.to_string())
}

fn exponent_arg(s: &str) -> std::result::Result<Exponent, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn positive_biguint(s: &str) -> std::result::Result<BigUint, String> {
    match s.parse::<BigUint>() {
        Ok(m) if m > BigUint::from(0u32) && s.bytes().all(|b| b.is_ascii_digit()) => Ok(m),
        _ => Err(format!("`{s}` is not a positive integer")),
    }
}

fn rounding_arg(s: &str) -> std::result::Result<Rounding, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=100_000))]
    n: u64,
    /// Right-hand-side ratio as p/q.
    #[arg(long, value_parser = ratio_arg)]
    r: Ratio,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "floor", value_parser = rounding_arg)]
    rounding: Rounding,
    /// Coefficient upper bound replacing ⌊10^{n/2}⌋.
    #[arg(long, value_parser = positive_biguint)]
    m_override: Option<BigUint>,
    /// Write to a file instead of standard output.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SolveArgs {
    /// Instance file, or `-` for standard input.
    #[arg(default_value = "-")]
    input: String,
    /// given, ascending, descending or random:<seed>.
    #[arg(long, default_value = "given", value_parser = |s: &str| s.parse::<BranchOrder>().map_err(|e| e.to_string()))]
    order: BranchOrder,
    /// zero or one.
    #[arg(long, default_value = "zero", value_parser = |s: &str| s.parse::<FirstChild>().map_err(|e| e.to_string()))]
    first_child: FirstChild,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=crate::solver::MAX_NODE_CAP))]
    node_cap: Option<u64>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(default_value = "-")]
    input: String,
    #[arg(long, default_value = "0.9", value_parser = exponent_arg)]
    epsilon: Exponent,
    #[arg(long, default_value = "0.5", value_parser = exponent_arg)]
    k: Exponent,
    /// Also check Property 1 on every small index set (n ≤ 30, m ≤ 6).
    #[arg(long)]
    exhaustive: bool,
}

#[derive(Debug, Args)]
struct BoundsArgs {
    /// One or more sizes, comma separated.
    #[arg(long, value_delimiter = ',', required = true, value_parser = clap::value_parser!(u64).range(1..))]
    n: Vec<u64>,
    #[arg(long, default_value = "1/2", value_parser = ratio_arg)]
    r: Ratio,
    #[arg(long, default_value = "0.9", value_parser = exponent_arg)]
    epsilon: Exponent,
    #[arg(long, default_value = "0.5", value_parser = exponent_arg)]
    k: Exponent,
}

#[derive(Debug, Args)]
struct ExpArgs {
    /// JSON experiment config. Inline sweep flags are rejected alongside it.
    #[arg(long, conflicts_with_all = ["n", "r", "epsilon", "k", "trials", "seed", "node_cap", "no_cap", "rounding", "timings"])]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', value_parser = clap::value_parser!(usize))]
    n: Vec<usize>,
    #[arg(long, value_parser = ratio_arg)]
    r: Option<Ratio>,
    #[arg(long, value_parser = exponent_arg)]
    epsilon: Option<Exponent>,
    #[arg(long, value_parser = exponent_arg)]
    k: Option<Exponent>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, conflicts_with = "no_cap")]
    node_cap: Option<u64>,
    /// Run every search to completion.
    #[arg(long)]
    no_cap: bool,
    #[arg(long, value_parser = rounding_arg)]
    rounding: Option<Rounding>,
    /// Worker threads; does not affect the output.
    #[arg(long)]
    parallelism: Option<usize>,
    /// Record solve wall time (makes the record stream non-reproducible).
    #[arg(long)]
    timings: bool,
    #[arg(long, default_value = "records.jsonl")]
    jsonl: PathBuf,
    #[arg(long, default_value = "summary.csv")]
    csv: PathBuf,
}

impl ExpArgs {
    fn to_config(&self) -> Result<ExperimentConfig> {
        let mut cfg = if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::param(format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| Error::param(format!("{}: {e}", path.display())))?
        } else {
            let trials = self
                .trials
                .ok_or_else(|| Error::param("--trials is required without --config"))?;
            let mut cfg = ExperimentConfig::new(self.n.clone(), trials, self.seed.unwrap_or(0));
            if let Some(r) = self.r {
                cfg.r = r;
            }
            if let Some(e) = self.epsilon {
                cfg.epsilon = e;
            }
            if let Some(k) = self.k {
                cfg.k = k;
            }
            cfg.node_cap = if self.no_cap {
                None
            } else {
                Some(self.node_cap.unwrap_or(DEFAULT_NODE_CAP))
            };
            cfg.rounding = self.rounding.unwrap_or_default();
            cfg.record_timings = self.timings;
            cfg
        };
        if let Some(p) = self.parallelism {
            cfg.parallelism = p;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn read_input(path: &str, stdin: &mut dyn Read) -> Result<String> {
    let mut text = String::new();
    if path == "-" {
        stdin.read_to_string(&mut text)?;
    } else {
        File::open(Path::new(path))?.read_to_string(&mut text)?;
    }
    Ok(text)
}

fn load_instance(path: &str, stdin: &mut dyn Read) -> Result<Instance> {
    let text = read_input(path, stdin)?;
    Instance::from_json(text.trim_end())
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(
    args: I,
    stdin: &mut dyn Read,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                return EXIT_USAGE;
            }
            let _ = write!(stdout, "{text}");
            return EXIT_OK;
        }
    };
    match dispatch(cli.command, stdin, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn dispatch(
    cmd: Command,
    stdin: &mut dyn Read,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32> {
    match cmd {
        Command::Gen(args) => {
            let cfg = GeneratorConfig {
                n: args.n as usize,
                r: args.r,
                rounding: args.rounding,
                seed: args.seed,
                m_override: args.m_override,
            };
            let json = generate_instance(&cfg)?.to_json();
            match args.output {
                Some(path) => std::fs::write(path, format!("{json}\n"))?,
                None => writeln!(stdout, "{json}")?,
            }
            Ok(EXIT_OK)
        }
        Command::Solve(args) => {
            let inst = load_instance(&args.input, stdin)?;
            let report = solve(
                &inst,
                &SolveConfig {
                    order: args.order,
                    first_child: args.first_child,
                    node_cap: args.node_cap,
                },
            )?;
            writeln!(stdout, "{}", report.to_json())?;
            Ok(match report.verdict {
                Verdict::Feasible(_) => EXIT_OK,
                Verdict::Infeasible => EXIT_INFEASIBLE,
                Verdict::Capped => EXIT_CAPPED,
            })
        }
        Command::Verify(args) => {
            let consts = Constants::new(args.epsilon, args.k)?;
            let inst = load_instance(&args.input, stdin)?;
            let report = property_report(&inst, &consts, args.exhaustive)?;
            writeln!(stdout, "{}", serde_json::to_string(&report)?)?;
            Ok(EXIT_OK)
        }
        Command::Bounds(args) => {
            Constants::new(args.epsilon, args.k)?;
            let (eps, k) = (args.epsilon.to_f64(), args.k.to_f64());
            let kr = k_of_r(args.r)?;
            writeln!(
                stdout,
                "n,k_r,lemma2_bound,lemma2_vacuous,lemma1_bound,lemma1_ln,lemma1_vacuous,node_lower_bound,node_lower_bound_log2"
            )?;
            for n in args.n {
                let l2 = lemma2_violation_bound(n, args.r)?;
                let l1 = lemma1_prob_bound(n, eps, k)?;
                let nb = node_count_lower_bound(n, eps)?;
                writeln!(
                    stdout,
                    "{n},{kr},{:e},{},{:e},{},{},{},{}",
                    l2.value, l2.vacuous, l1.value, l1.ln_value, l1.vacuous, nb.value, nb.log2
                )?;
            }
            Ok(EXIT_OK)
        }
        Command::Exp(args) => {
            let cfg = args.to_config()?;
            let mut jsonl = BufWriter::new(File::create(&args.jsonl)?);
            let mut records = Vec::new();
            let outcome = run_experiment_with(&cfg, |rec| {
                writeln!(jsonl, "{}", rec.to_json())?;
                jsonl.flush()?;
                records.push(rec.clone());
                Ok(())
            });
            jsonl.flush()?;
            outcome?;
            let csv = summarize(&records, &cfg)?.to_csv();
            std::fs::write(&args.csv, &csv)?;
            write!(stdout, "{csv}")?;
            writeln!(
                stderr,
                "wrote {} records to {} and summary to {}",
                records.len(),
                args.jsonl.display(),
                args.csv.display()
            )?;
            Ok(EXIT_OK)
        }
    }
}
