//! `nsw`: solve, check, generate and benchmark Nash-welfare allocations.
//!
//! Exit codes: 0 success, 1 input error, 2 infeasible instance, 3 property
//! violation.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use nsw_core::bench::{self, BenchConfig, Suite};
use nsw_core::binary::{solve_binary, TraceStep};
use nsw_core::gen;
use nsw_core::identical::solve_identical;
use nsw_core::io::{allocation_to_json, parse_allocation, parse_instance, InstanceDocument, UtilityMode};
use nsw_core::model::{validate_allocation, Allocation, ConcaveProfile};
use nsw_core::oracle::{brute_force, DEFAULT_BUDGET};
use nsw_core::welfare::{check_ef, check_efx, evaluate, EnvyCheck};
use nsw_core::SolveError;

#[derive(Parser, Debug)]
#[command(name = "nsw", version, about = "Nash social welfare allocation tools")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Instance document to read.
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Where to write the primary output (stdout if omitted).
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Seed for generators and benchmark sweeps.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Suppress the human-readable report.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute an allocation with one of the greedy solvers.
    Solve(SolveArgs),
    /// Check EF, EFx or report NSW for a given allocation.
    Check(CheckArgs),
    /// Generate an instance document.
    Gen(GenArgs),
    /// Exhaustive optimum for small instances.
    Oracle(OracleArgs),
    /// Run a benchmark suite and write a CSV report.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Algo {
    Identical,
    Binary,
}

#[derive(Args, Debug)]
struct UtilityFlags {
    /// Use the document's "caps" (binary budget-additive utilities).
    #[arg(long, conflicts_with = "concave")]
    caps: bool,
    /// Use the document's "concave" utility tables.
    #[arg(long)]
    concave: bool,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(long, value_enum)]
    algo: Algo,
    #[command(flatten)]
    utility: UtilityFlags,
    /// Starting allocation for the binary solver.
    #[arg(long)]
    start: Option<PathBuf>,
    /// Write the binary solver's per-iteration trace as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Property {
    Ef,
    Efx,
    Nsw,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(long)]
    allocation: PathBuf,
    #[arg(long, value_enum)]
    property: Property,
    #[command(flatten)]
    utility: UtilityFlags,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FamilyArg {
    RandomBinary,
    RandomIdentical,
    TightEfx,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long)]
    m: usize,
    /// Bernoulli probability for random-binary.
    #[arg(long, default_value_t = 0.5)]
    density: f64,
    /// Largest shared value for random-identical.
    #[arg(long, default_value_t = 20)]
    max_value: u64,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    #[command(flatten)]
    utility: UtilityFlags,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SuiteArg {
    IdenticalRatio,
    BinaryExact,
    ConcaveExact,
    TightnessSweep,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::IdenticalRatio => Suite::IdenticalRatio,
            SuiteArg::BinaryExact => Suite::BinaryExact,
            SuiteArg::ConcaveExact => Suite::ConcaveExact,
            SuiteArg::TightnessSweep => Suite::TightnessSweep,
        }
    }
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long, value_enum)]
    suite: SuiteArg,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    n_min: Option<usize>,
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long)]
    m_min: Option<usize>,
    #[arg(long)]
    m_max: Option<usize>,
    #[arg(long)]
    max_value: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
}

/// An error carrying its exit code.
#[derive(Debug)]
struct Exit(u8, String);

const EXIT_INPUT: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_VIOLATION: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let code = match err.downcast_ref::<Exit>() {
                Some(Exit(code, msg)) => {
                    if !msg.is_empty() {
                        eprintln!("{msg}");
                    }
                    *code
                }
                None => {
                    eprintln!("error: {err:#}");
                    EXIT_INPUT
                }
            };
            ExitCode::from(code)
        }
    }
}

impl std::fmt::Display for Exit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.1)
    }
}

impl std::error::Error for Exit {}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Solve(a) => cmd_solve(&cli.global, a),
        Command::Check(a) => cmd_check(&cli.global, a),
        Command::Gen(a) => cmd_gen(&cli.global, a),
        Command::Oracle(a) => cmd_oracle(&cli.global, a),
        Command::Bench(a) => cmd_bench(&cli.global, a),
    }
}

fn read_instance(g: &Global) -> Result<InstanceDocument> {
    let path = g.input.as_ref().context("--input is required")?;
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_instance(&text).with_context(|| format!("parsing {}", path.display()))
}

fn read_allocation(path: &Path, doc: &InstanceDocument) -> Result<Allocation> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let inst = &doc.instance;
    parse_allocation(&text, inst.num_agents(), inst.num_goods())
        .with_context(|| format!("parsing {}", path.display()))
}

fn select_profile(doc: &InstanceDocument, flags: &UtilityFlags) -> Result<Option<ConcaveProfile>> {
    match (&doc.utility, flags.caps, flags.concave) {
        (_, false, false) => Ok(None),
        (UtilityMode::Caps(_), true, _) | (UtilityMode::Concave(_), _, true) => Ok(doc.profile()),
        (_, true, _) => bail!("--caps given but the instance has no \"caps\""),
        (_, _, true) => bail!("--concave given but the instance has no \"concave\" tables"),
    }
}

fn emit(g: &Global, contents: &str) -> Result<()> {
    match &g.output {
        Some(path) => fs::write(path, contents).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn report(g: &Global, line: impl std::fmt::Display) {
    if !g.quiet {
        println!("{line}");
    }
}

fn trace_csv(trace: &[TraceStep]) -> String {
    let mut out = String::from("iteration,from_agent,to_agent,path_len,zeros,product_num,product_den\n");
    for s in trace {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            s.iteration,
            s.from + 1,
            s.to + 1,
            s.path_len,
            s.value.zero_count(),
            s.value.positive_product().numer(),
            s.value.positive_product().denom()
        ));
    }
    out
}

fn cmd_solve(g: &Global, a: &SolveArgs) -> Result<()> {
    let doc = read_instance(g)?;
    let inst = &doc.instance;
    let profile = select_profile(&doc, &a.utility)?;
    let (alloc, value) = match a.algo {
        Algo::Identical => {
            if profile.is_some() || a.start.is_some() || a.trace.is_some() {
                bail!("--caps, --concave, --start and --trace apply to --algo binary only");
            }
            let alloc = solve_identical(inst).map_err(|e| Exit(EXIT_INPUT, e.to_string()))?;
            let value = evaluate(inst, None, &alloc)?;
            (alloc, value)
        }
        Algo::Binary => {
            let start = a.start.as_deref().map(|p| read_allocation(p, &doc)).transpose()?;
            let out = match solve_binary(inst, start.as_ref(), profile.as_ref()) {
                Ok(out) => out,
                Err(e @ SolveError::Infeasible { .. }) => {
                    bail!(Exit(EXIT_INFEASIBLE, e.to_string()))
                }
                Err(e) => bail!(Exit(EXIT_INPUT, e.to_string())),
            };
            if let Some(path) = &a.trace {
                fs::write(path, trace_csv(&out.trace))
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            (out.allocation, out.value)
        }
    };
    emit(g, &allocation_to_json(&alloc))?;
    report(g, &value);
    Ok(())
}

fn cmd_check(g: &Global, a: &CheckArgs) -> Result<()> {
    let doc = read_instance(g)?;
    let inst = &doc.instance;
    let alloc = read_allocation(&a.allocation, &doc)?;
    validate_allocation(inst, &alloc)?;
    let (name, result) = match a.property {
        Property::Nsw => {
            let profile = select_profile(&doc, &a.utility)?;
            let value = evaluate(inst, profile.as_ref(), &alloc)?;
            emit(g, &format!("{value}\n"))?;
            return Ok(());
        }
        Property::Ef => ("EF", check_ef(inst, &alloc)),
        Property::Efx => ("EFx", check_efx(inst, &alloc)),
    };
    match result {
        EnvyCheck::Pass => {
            emit(g, &format!("{name}: pass\n"))?;
            Ok(())
        }
        EnvyCheck::Violation(w) => {
            emit(g, &format!("{name}: violation: {w}\n"))?;
            bail!(Exit(EXIT_VIOLATION, String::new()))
        }
    }
}

fn cmd_gen(g: &Global, a: &GenArgs) -> Result<()> {
    let doc = match a.family {
        FamilyArg::RandomBinary => {
            if a.n == 0 || a.m == 0 {
                bail!("--n and --m must be positive");
            }
            if !(0.0..=1.0).contains(&a.density) {
                bail!("--density must lie in [0, 1]");
            }
            gen::random_binary(a.n, a.m, a.density, g.seed)
        }
        FamilyArg::RandomIdentical => {
            if a.n == 0 || a.m == 0 || a.max_value == 0 {
                bail!("--n, --m and --max-value must be positive");
            }
            gen::random_identical(a.n, a.m, a.max_value, g.seed)
        }
        FamilyArg::TightEfx => gen::tight_efx(a.m).context("--m must be even and at least 4")?,
    };
    emit(g, &doc.to_json())
}

fn cmd_oracle(g: &Global, a: &OracleArgs) -> Result<()> {
    let doc = read_instance(g)?;
    let profile = select_profile(&doc, &a.utility)?;
    let result = brute_force(&doc.instance, profile.as_ref(), a.budget)?;
    emit(g, &allocation_to_json(&result.best))?;
    report(g, &result.value);
    report(g, format!("explored {} assignments", result.explored));
    Ok(())
}

fn cmd_bench(g: &Global, a: &BenchArgs) -> Result<()> {
    let mut cfg = BenchConfig::defaults(a.suite.into());
    cfg.seed = g.seed;
    cfg.budget = a.budget;
    if let Some(v) = a.count {
        cfg.count = v;
    }
    if let Some(v) = a.n_min {
        cfg.n_min = v;
    }
    if let Some(v) = a.n_max {
        cfg.n_max = v;
    }
    if let Some(v) = a.m_min {
        cfg.m_min = v;
    }
    if let Some(v) = a.m_max {
        cfg.m_max = v;
    }
    if let Some(v) = a.max_value {
        cfg.max_value = v;
    }
    let rows = bench::run(&cfg)?;
    emit(g, &bench::to_csv(&rows))?;
    if !g.quiet && g.output.is_some() {
        let exact = rows.iter().filter(|r| r.exact_ratio_ok).count();
        let min = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
        println!("{} rows, {} exact-check passes, min ratio {}", rows.len(), exact, min);
    }
    Ok(())
}
