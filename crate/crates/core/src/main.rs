use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use ris_swipt::config::{Scenario, ScenarioConfig};
use ris_swipt::oracle::{oracle_as, oracle_ds, oracle_ps, oracle_ts};
use ris_swipt::solvers::{certify, solve, Method, SwiptInputs};
use ris_swipt::sweep::{self, Preset, SweepAxis, SweepRun, SweepSpec};
use ris_swipt::verify::{self, DEFAULT_GRID_STEPS};

/// Overrides the number of worker threads (defaults to the core count).
const WORKERS_ENV: &str = "RIS_SWIPT_WORKERS";

const EXIT_USAGE: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_VERIFY_FAILED: u8 = 3;

#[derive(Parser)]
#[command(
    name = "ris-swipt",
    version,
    about = "SWIPT control-link planning for reconfigurable intelligent surfaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve every configured receiver at one transmit power.
    Solve(SolveArgs),
    /// Sweep transmit power, update energy or planning bias with Monte Carlo campaigns.
    Sweep(SweepArgs),
    /// Check the closed-form solvers against brute-force oracles on random inputs.
    Verify(VerifyArgs),
    /// Print the default scenario configuration.
    Defaults,
}

#[derive(Args)]
struct Common {
    /// Scenario configuration (JSON). Defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum DataFormat {
    Csv,
    Json,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    common: Common,
    /// Transmit power override in dBm.
    #[arg(long, allow_negative_numbers = true)]
    p_t_dbm: Option<f64>,
    #[arg(long, value_enum, default_value = "text")]
    format: ReportFormat,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Figure preset: fig1, fig2 or fig3.
    #[arg(long, conflicts_with_all = ["axis", "from", "to", "steps"])]
    preset: Option<String>,
    /// Sweep axis: p_t_dbm, e0_j or bias_stds.
    #[arg(long, requires_all = ["from", "to", "steps"])]
    axis: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    from: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    to: Option<f64>,
    /// Number of points including both endpoints.
    #[arg(long)]
    steps: Option<usize>,
    /// Campaign seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Trials per campaign override.
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, value_enum, default_value = "csv")]
    format: DataFormat,
}

#[derive(Args)]
struct VerifyArgs {
    /// Number of random problems to check.
    #[arg(long, default_value_t = 1000)]
    n_random: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Grid resolution of the PS and DS oracles.
    #[arg(long, default_value_t = DEFAULT_GRID_STEPS)]
    grid_steps: usize,
    /// Re-check a single input previously printed by a failing run.
    #[arg(long, conflicts_with = "n_random")]
    replay: Option<PathBuf>,
    /// Swap in a deliberately wrong PS solver (harness self-test).
    #[arg(long, hide = true)]
    inject_fault: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = configure_workers() {
        eprintln!("error: {e:#}");
        return ExitCode::from(EXIT_USAGE);
    }
    let result = match cli.command {
        Command::Solve(args) => run_solve(args),
        Command::Sweep(args) => run_sweep(args),
        Command::Verify(args) => run_verify(args),
        Command::Defaults => run_defaults(),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn configure_workers() -> anyhow::Result<()> {
    let Ok(value) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .parse()
        .with_context(|| format!("{WORKERS_ENV}={value} is not a thread count"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()?;
    Ok(())
}

fn load_config(path: Option<&Path>) -> anyhow::Result<ScenarioConfig> {
    match path {
        Some(p) => ScenarioConfig::load(p).with_context(|| format!("{}", p.display())),
        None => Ok(ScenarioConfig::default()),
    }
}

fn open_out(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

#[derive(serde::Serialize)]
struct SolveRow {
    method: Method,
    feasible: bool,
    l: usize,
    fraction: f64,
    param_name: &'static str,
    param: f64,
    total_energy_j: f64,
    certified: bool,
    oracle_l: usize,
}

fn oracle_l(method: Method, inputs: &SwiptInputs) -> anyhow::Result<usize> {
    Ok(match method {
        Method::Ts => oracle_ts(inputs),
        Method::Ps => oracle_ps(inputs, DEFAULT_GRID_STEPS)?,
        Method::Ds => oracle_ds(inputs, DEFAULT_GRID_STEPS)?,
        Method::As => oracle_as(inputs),
    })
}

fn run_solve(args: SolveArgs) -> anyhow::Result<u8> {
    let mut config = load_config(args.common.config.as_deref())?;
    if let Some(p) = args.p_t_dbm {
        config.p_t_dbm = p;
    }
    let scenario = Scenario::new(config)?;
    let inputs = scenario.inputs();
    let mut rows = Vec::new();
    for &method in &scenario.config.methods {
        let sol = solve(method, &inputs)?;
        rows.push(SolveRow {
            method,
            feasible: sol.feasible,
            l: sol.l,
            fraction: sol.fraction(),
            param_name: sol.share.name(),
            param: sol.share.value(),
            total_energy_j: sol.total_energy,
            certified: certify(&inputs, &sol).passed(),
            oracle_l: oracle_l(method, &inputs)?,
        });
    }
    let mut out = open_out(args.common.out.as_deref())?;
    match args.format {
        ReportFormat::Json => {
            #[derive(serde::Serialize)]
            struct Report<'a> {
                p_t_dbm: f64,
                p_r_w: f64,
                snr_max: f64,
                methods: &'a [SolveRow],
            }
            serde_json::to_writer_pretty(
                &mut out,
                &Report {
                    p_t_dbm: scenario.config.p_t_dbm,
                    p_r_w: inputs.p_r,
                    snr_max: inputs.snr_max(),
                    methods: &rows,
                },
            )?;
            writeln!(out)?;
        }
        ReportFormat::Text => {
            writeln!(
                out,
                "P_t = {} dBm, P_r = {:e} W, SNR_max = {:.3} dB, E_max = {:e} J",
                scenario.config.p_t_dbm,
                inputs.p_r,
                10.0 * inputs.snr_max().log10(),
                inputs.e_max()
            )?;
            writeln!(
                out,
                "{:<6} {:<8} {:>5} {:>8}  {:<8} {:>12}  {:>14}  {:<9} {:>8}",
                "method",
                "feasible",
                "L",
                "fraction",
                "param",
                "value",
                "energy_j",
                "certified",
                "oracle_L"
            )?;
            for r in &rows {
                writeln!(
                    out,
                    "{:<6} {:<8} {:>5} {:>8.4}  {:<8} {:>12.6}  {:>14.6e}  {:<9} {:>8}",
                    r.method.as_str(),
                    r.feasible,
                    r.l,
                    r.fraction,
                    r.param_name,
                    r.param,
                    r.total_energy_j,
                    r.certified,
                    r.oracle_l
                )?;
            }
        }
    }
    out.flush()?;
    Ok(if rows.iter().any(|r| r.feasible) {
        0
    } else {
        EXIT_INFEASIBLE
    })
}

fn run_sweep(args: SweepArgs) -> anyhow::Result<u8> {
    let mut config = load_config(args.common.config.as_deref())?;
    if let Some(seed) = args.seed {
        config.fluctuation.seed = seed;
    }
    if let Some(trials) = args.trials {
        config.fluctuation.n_trials = trials;
    }
    let scenario = Scenario::new(config)?;
    let records = match (&args.preset, &args.axis) {
        (Some(preset), None) => sweep::run_preset(&scenario, preset.parse::<Preset>()?)?,
        (None, Some(axis)) => {
            let spec = SweepSpec {
                axis: axis.parse::<SweepAxis>()?,
                from: args.from.context("--from is required")?,
                to: args.to.context("--to is required")?,
                steps: args.steps.context("--steps is required")?,
            };
            let run = SweepRun {
                spec,
                p_t_dbm: None,
                bias_stds: None,
            };
            sweep::run_sweep(&scenario, &run)?
        }
        _ => bail!("sweep needs either --preset or --axis/--from/--to/--steps"),
    };
    let mut out = open_out(args.common.out.as_deref())?;
    match args.format {
        DataFormat::Csv => sweep::write_csv(&records, &mut out)?,
        DataFormat::Json => sweep::write_json(&records, &mut out)?,
    }
    out.flush()?;
    Ok(0)
}

fn run_verify(args: VerifyArgs) -> anyhow::Result<u8> {
    let solver: &verify::Solver<'_> = if args.inject_fault {
        &verify::perturbed_solve
    } else {
        &solve
    };
    let report = match &args.replay {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            let inputs: SwiptInputs =
                serde_json::from_str(&text).with_context(|| format!("{}", path.display()))?;
            let (failures, n_checks) = verify::check_inputs(&inputs, args.grid_steps, solver)?;
            verify::VerifyReport {
                n_inputs: 1,
                n_checks,
                failures,
            }
        }
        None => verify::verify_with(args.n_random, args.seed, args.grid_steps, solver)?,
    };
    let mut out = io::stdout().lock();
    for f in &report.failures {
        writeln!(out, "FAIL {}: {}", f.check, f.detail)?;
        writeln!(out, "  replay: {}", serde_json::to_string(&f.inputs)?)?;
    }
    writeln!(
        out,
        "{}: {} inputs, {} checks, {} failures",
        if report.passed() { "PASS" } else { "FAIL" },
        report.n_inputs,
        report.n_checks,
        report.failures.len()
    )?;
    Ok(if report.passed() {
        0
    } else {
        EXIT_VERIFY_FAILED
    })
}

fn run_defaults() -> anyhow::Result<u8> {
    println!("{}", ScenarioConfig::default().to_json_pretty()?);
    Ok(0)
}
