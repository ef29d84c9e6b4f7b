//! `gridloss` command-line front-end.
//!
//! Exit codes: 0 success, 1 usage, 2 parse/validation, 3 non-convergence,
//! 4 file I/O.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use gridloss::cases::IEEE30_CASE;
use gridloss::ga::{run_ga, run_ga_with_workers, GaConfig};
use gridloss::report::{Format, OpfReport, Render, RunManifest, SolutionSummary, SolveReport, StrategyReport, YbusReport};
use gridloss::{analyze, build_ybus, compare, load_network, solve, Error, Network, SolverOptions, Strategy};

const EXIT_USAGE: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_NOT_CONVERGED: u8 = 3;
const EXIT_IO: u8 = 4;

/// Path token selecting the bundled IEEE 30-bus case.
const BUILTIN_IEEE30: &str = "@ieee30";

#[derive(Parser)]
#[command(name = "gridloss", version, about = "Load flow, loss analysis and GA optimal power flow")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the load flow and report voltages, branch losses and totals.
    Solve {
        /// Case file, or `@ieee30` for the bundled case.
        case: String,
        #[command(flatten)]
        common: Common,
    },
    /// Compare loss-reduction strategies against the base case.
    Strategy {
        case: String,
        /// e.g. `load-share:from=5,to=4,frac=0.15`, `q-inject:bus=30,mvar=1.0`,
        /// `tap:from=4,to=12,tap=1.0`
        #[arg(required = true)]
        specs: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Minimize real line loss with the genetic algorithm.
    Opf {
        case: String,
        /// GA configuration file; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Number of runs, with seeds seed, seed+1, ...
        #[arg(long, default_value_t = 1)]
        repeat: usize,
        /// First seed (overrides the configuration file).
        #[arg(long)]
        seed: Option<u64>,
        /// Strategy applied to the network before optimizing.
        #[arg(long)]
        strategy: Option<String>,
        /// Fitness evaluation threads (default: all cores).
        #[arg(long)]
        workers: Option<usize>,
        /// Write the per-generation history CSV here.
        #[arg(long)]
        history: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Bus admittance matrix utilities.
    Ybus {
        #[command(subcommand)]
        action: YbusAction,
    },
}

#[derive(Subcommand)]
enum YbusAction {
    /// Nonzero entries as `i,j,g,b`.
    Dump {
        case: String,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Table,
    Csv,
    Json,
}

#[derive(Args)]
struct Common {
    #[arg(long, value_enum, default_value = "table")]
    format: FormatArg,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write an SVG bar chart.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Convergence tolerance, per-unit.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Keep generator buses voltage-controlled regardless of reactive limits.
    #[arg(long)]
    no_q_limits: bool,
}

impl Common {
    fn format(&self) -> Format {
        match self.format {
            FormatArg::Table => Format::Table,
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }

    fn options(&self) -> Result<SolverOptions, Failure> {
        let mut o = SolverOptions::default();
        if let Some(t) = self.tol {
            o.tolerance = t;
        }
        if let Some(m) = self.max_iter {
            o.max_iterations = m;
        }
        o.enforce_q_limits = !self.no_q_limits;
        o.validate().map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
        Ok(o)
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io(_) => EXIT_IO,
            Error::SingularJacobian { .. } => EXIT_NOT_CONVERGED,
            _ => EXIT_INVALID,
        };
        Failure::new(code, e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let argv: Vec<String> = std::env::args().collect();
    match cli.command {
        Command::Solve { case, common } => cmd_solve(argv, &case, &common),
        Command::Strategy { case, specs, common } => cmd_strategy(argv, &case, &specs, &common),
        Command::Opf { case, config, repeat, seed, strategy, workers, history, common } => {
            let opf = OpfArgs { config, repeat, seed, strategy, workers, history };
            cmd_opf(argv, &case, &opf, &common)
        }
        Command::Ybus { action: YbusAction::Dump { case, common } } => cmd_ybus(argv, &case, &common),
    }
}

/// Raw bytes of a case argument plus the parsed, validated network.
fn load_case(path: &str) -> Result<(Vec<u8>, Network), Failure> {
    let bytes = if path == BUILTIN_IEEE30 {
        IEEE30_CASE.as_bytes().to_vec()
    } else {
        std::fs::read(path).map_err(|e| Failure::new(EXIT_IO, format!("{path}: {e}")))?
    };
    let network = load_network(&bytes).map_err(|e| Failure::new(EXIT_INVALID, format!("{path}: {e}")))?;
    Ok((bytes, network))
}

fn parse_strategies(specs: &[String]) -> Result<Vec<Strategy>, Failure> {
    specs.iter().map(|s| s.parse::<Strategy>().map_err(Failure::from)).collect()
}

/// Write the report (and chart) only once everything has been computed.
fn emit(common: &Common, text: &str, svg: Option<String>) -> Result<(), Failure> {
    let write = |path: &PathBuf, body: &str| {
        std::fs::write(path, body).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))
    };
    match &common.out {
        Some(path) => write(path, text)?,
        None => print!("{text}"),
    }
    if let (Some(path), Some(svg)) = (&common.svg, svg) {
        write(path, &svg)?;
    }
    Ok(())
}

fn cmd_solve(argv: Vec<String>, case: &str, common: &Common) -> Result<u8, Failure> {
    let options = common.options()?;
    let (bytes, network) = load_case(case)?;
    let solution = solve(&network, &options)?;
    let report = SolveReport {
        manifest: RunManifest::new(argv, case, &bytes, options),
        solution: SolutionSummary::new(&network, &solution),
    };
    emit(common, &report.render(common.format()), Some(report.svg()))?;
    if solution.converged {
        Ok(0)
    } else {
        eprintln!(
            "error: no convergence after {} iterations (mismatch {:.3e} pu)",
            solution.iterations,
            solution.final_mismatch()
        );
        Ok(EXIT_NOT_CONVERGED)
    }
}

fn cmd_strategy(argv: Vec<String>, case: &str, specs: &[String], common: &Common) -> Result<u8, Failure> {
    let options = common.options()?;
    let strategies = parse_strategies(specs)?;
    let (bytes, network) = load_case(case)?;
    let rows = compare(&network, &strategies, &options)?;
    let report = StrategyReport {
        manifest: RunManifest::new(argv, case, &bytes, options).with_strategies(&strategies),
        rows,
    };
    emit(common, &report.render(common.format()), Some(report.svg()))?;
    let failed: Vec<&str> = report.rows.iter().filter(|r| !r.converged).map(|r| r.label.as_str()).collect();
    if failed.is_empty() {
        Ok(0)
    } else {
        eprintln!("error: no convergence for: {}", failed.join(", "));
        Ok(EXIT_NOT_CONVERGED)
    }
}

struct OpfArgs {
    config: Option<PathBuf>,
    repeat: usize,
    seed: Option<u64>,
    strategy: Option<String>,
    workers: Option<usize>,
    history: Option<PathBuf>,
}

fn cmd_opf(argv: Vec<String>, case: &str, args: &OpfArgs, common: &Common) -> Result<u8, Failure> {
    let options = common.options()?;
    if args.repeat == 0 {
        return Err(Failure::new(EXIT_USAGE, "--repeat must be at least 1"));
    }
    let strategy = args.strategy.as_deref().map(str::parse::<Strategy>).transpose()?;
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))?;
            GaConfig::parse(&text)?
        }
        None => GaConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.rng_seed = seed;
    }
    let (bytes, base) = load_case(case)?;
    let network = match &strategy {
        Some(s) => s.apply(&base)?,
        None => base,
    };

    let nr_base_loss_mw = match solve(&network, &options) {
        Ok(sol) if sol.converged => analyze(&network, &sol).total_p_loss_mw,
        _ => f64::NAN,
    };
    let seeds: Vec<u64> = (0..args.repeat as u64).map(|k| config.rng_seed.wrapping_add(k)).collect();
    let mut results = Vec::with_capacity(seeds.len());
    for &seed in &seeds {
        let cfg = config.clone().with_seed(seed);
        let result = match args.workers {
            Some(w) => run_ga_with_workers(&network, &cfg, &options, w)?,
            None => run_ga(&network, &cfg, &options)?,
        };
        results.push(result);
    }

    let mut manifest = RunManifest::new(argv, case, &bytes, options).with_ga_config(&config);
    if let Some(s) = &strategy {
        manifest = manifest.with_strategies(std::slice::from_ref(s));
    }
    let report = OpfReport::new(manifest, nr_base_loss_mw, &seeds, &results, &config);
    if let Some(path) = &args.history {
        std::fs::write(path, report.history_csv())
            .map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))?;
    }
    emit(common, &report.render(common.format()), Some(report.svg()))?;
    if report.runs.iter().all(|r| r.best_loss_mw.is_finite()) {
        Ok(0)
    } else {
        eprintln!("error: some runs found no converging candidate");
        Ok(EXIT_NOT_CONVERGED)
    }
}

fn cmd_ybus(argv: Vec<String>, case: &str, common: &Common) -> Result<u8, Failure> {
    let options = common.options()?;
    let (bytes, network) = load_case(case)?;
    let ybus = build_ybus(&network);
    let report = YbusReport::new(RunManifest::new(argv, case, &bytes, options), &network, &ybus);
    emit(common, &report.render(common.format()), None)?;
    Ok(0)
}
