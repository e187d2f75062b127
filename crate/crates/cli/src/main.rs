//! Command-line interface: instance generation, single runs, Monte-Carlo
//! sweeps, and property verification.
//!
//! Exit codes: 0 on success (for `verify`, only when every property passed),
//! 1 on errors, 2 on usage errors (clap), 3 when a single run exhausted its
//! activation budget before reaching stability.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};

use hksim_core::runner::DEFAULT_MAX_STEPS;
use hksim_core::verify::{run_all, run_suite, PropertyReport, Suite};
use hksim_core::{
    export_csv_path, fit_scaling_exponent, gen_complete_random, gen_dumbbell, gen_path,
    instances::dumbbell_uniform_movement, load_instance, potential, run_sweep, run_until_stable,
    runner::write_trace, save_instance, HksState, RunConfig, SweepConfig, Topology,
};

#[derive(Parser)]
#[command(
    name = "hksim",
    about = "Asynchronous bounded-confidence opinion dynamics: simulator and experiment harness",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance and optionally write it to a file.
    Gen(GenArgs),
    /// Run random activations on an instance until delta-stability.
    Run(RunArgs),
    /// Run a Monte-Carlo sweep over instance sizes and export a CSV.
    Sweep(SweepArgs),
    /// Check the analytical properties behind the simulator.
    #[command(after_help = SUITE_HELP)]
    Verify(VerifyArgs),
}

const SUITE_HELP: &str = "\
Suite names follow the customary lemma/theorem numbering of the potential-descent
analysis of this model; the mapping is fixed here to guard against numbering drift:
  lemma1  projection laws: edge length preserved, influence network equal,
          per-agent movement dominated
  lemma2  one-dimensional cut-movement bound and the longest-edge chain
  lemma4  per-activation potential drop bound (equality when the influence
          network is unchanged) and potential monotonicity
  lemma5  expected potential drop floor 2*lambda^2/(n*|E_t|) on dense-influence
          complete-graph states, plus sum |N|*||m|| >= 2*lambda everywhere
  thm2    complete social network: influence components with edges <= eps/2
          are cliques (and eps/2-stability implies eps/2-equilibrium)
  thm5    dumbbell closed form: uniform movement m_hat and expected drop
          (n/8 + 7/2 - 2/n) * m_hat^2
  all     every suite above";

#[derive(Args)]
struct GenArgs {
    /// Instance family.
    #[arg(value_enum)]
    topology: GenTopology,
    /// Number of agents.
    #[arg(long)]
    n: usize,
    /// Confidence bound.
    #[arg(long)]
    epsilon: f64,
    /// Position seed (complete-random only).
    #[arg(long)]
    seed: Option<u64>,
    /// Opinion-space dimension (complete-random only).
    #[arg(long, default_value_t = 1)]
    dimension: usize,
    /// Side of the position cube (complete-random only; defaults to epsilon).
    #[arg(long)]
    spread: Option<f64>,
    /// Dumbbell: keep the full quadratic social network instead of reducing
    /// it to the initially active edges.
    #[arg(long)]
    full_social: bool,
    /// Output instance file.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenTopology {
    Path,
    Dumbbell,
    CompleteRandom,
}

#[derive(Args)]
struct RunArgs {
    /// Instance file.
    #[arg(short, long)]
    input: PathBuf,
    /// Stability bound.
    #[arg(long)]
    delta: f64,
    /// Activation-stream seed.
    #[arg(long)]
    seed: u64,
    /// Activation budget.
    #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
    max_steps: u64,
    /// Write a step,phi trace CSV to this file.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Trace sampling stride.
    #[arg(long, default_value_t = 100)]
    trace_every: u64,
}

#[derive(Args)]
struct SweepArgs {
    /// Instance family.
    #[arg(long, value_enum)]
    topology: SweepTopology,
    /// Comma-separated agent counts.
    #[arg(long, value_delimiter = ',', required = true)]
    sizes: Vec<usize>,
    /// Independent runs per size.
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 100.0)]
    epsilon: f64,
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    /// Base seed; per-trial seeds derive from it deterministically.
    #[arg(long, default_value_t = 0)]
    base_seed: u64,
    /// Worker threads (results are independent of this).
    #[arg(long, default_value_t = default_jobs())]
    jobs: usize,
    /// Per-trial activation budget.
    #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
    max_steps: u64,
    /// Dimension (complete-random only).
    #[arg(long, default_value_t = 1)]
    dimension: usize,
    /// Position spread (complete-random only).
    #[arg(long)]
    spread: Option<f64>,
    /// Output CSV path.
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepTopology {
    Path,
    DumbbellReduced,
    DumbbellFull,
    CompleteRandom,
}

impl From<SweepTopology> for Topology {
    fn from(t: SweepTopology) -> Topology {
        match t {
            SweepTopology::Path => Topology::Path,
            SweepTopology::DumbbellReduced => Topology::DumbbellReduced,
            SweepTopology::DumbbellFull => Topology::DumbbellFull,
            SweepTopology::CompleteRandom => Topology::CompleteRandom,
        }
    }
}

#[derive(Args)]
struct VerifyArgs {
    /// Which suite to run.
    #[arg(long, value_enum, default_value = "all")]
    suite: SuiteArg,
    /// Cases per property.
    #[arg(long, default_value_t = 10_000)]
    fuzz_iters: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Lemma1,
    Lemma2,
    Lemma4,
    Lemma5,
    Thm2,
    Thm5,
    All,
}

fn default_jobs() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Verify(args) => cmd_verify(args),
    }
}

fn cmd_gen(args: GenArgs) -> anyhow::Result<ExitCode> {
    let state: HksState = match args.topology {
        GenTopology::Path => gen_path(args.n, args.epsilon)?,
        GenTopology::Dumbbell => gen_dumbbell(args.n, args.epsilon, args.full_social)?,
        GenTopology::CompleteRandom => {
            let seed = args
                .seed
                .ok_or_else(|| anyhow::anyhow!("complete-random requires --seed"))?;
            gen_complete_random(
                args.n,
                args.dimension,
                args.epsilon,
                args.spread.unwrap_or(args.epsilon),
                seed,
            )?
        }
    };
    let mut summary = format!(
        "n={} edges={} active_edges={} phi0={}",
        state.n(),
        state.graph().edge_count(),
        state.active_edge_count(),
        potential(&state)
    );
    if matches!(args.topology, GenTopology::Dumbbell) {
        summary.push_str(&format!(
            " m_hat={}",
            dumbbell_uniform_movement(args.n, args.epsilon)?
        ));
    }
    if let Some(path) = &args.output {
        save_instance(&state, path)?;
        summary.push_str(&format!(" wrote={}", path.display()));
    }
    println!("{summary}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_run(args: RunArgs) -> anyhow::Result<ExitCode> {
    let mut state = load_instance(&args.input)?;
    let config = RunConfig {
        delta: args.delta,
        max_steps: args.max_steps,
        seed: args.seed,
        record_potential_every: args.trace.as_ref().map(|_| args.trace_every),
        record_first_moves: false,
        check_social_stability: false,
    };
    let report = run_until_stable(&mut state, &config)?;
    match report.steps_to_stable {
        Some(steps) => println!("steps_to_stable={steps}"),
        None => println!("steps_to_stable=none"),
    }
    println!("censored={}", report.censored());
    println!("initial_potential={}", report.initial_potential);
    println!("final_potential={}", report.final_potential);
    if let Some(path) = &args.trace {
        let file =
            std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        write_trace(&report, std::io::BufWriter::new(file))?;
        println!("trace={}", path.display());
    }
    if report.censored() {
        // Distinct from both success and usage errors.
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(args: SweepArgs) -> anyhow::Result<ExitCode> {
    let config = SweepConfig {
        topology: args.topology.into(),
        sizes: args.sizes,
        trials: args.trials,
        epsilon: args.epsilon,
        delta: args.delta,
        base_seed: args.base_seed,
        jobs: args.jobs,
        max_steps: args.max_steps,
        dimension: args.dimension,
        spread: args.spread,
    };
    let result = run_sweep(&config)?;
    export_csv_path(&result, &args.output)?;
    let censored: usize = result.cells.iter().map(|c| c.censored).sum();
    println!(
        "wrote {} ({} rows, {} censored)",
        args.output.display(),
        result.rows.len(),
        censored
    );
    match fit_scaling_exponent(&result) {
        Ok(fit) => println!("exponent={} r_squared={}", fit.exponent, fit.r_squared),
        Err(e) => println!("exponent=unavailable ({e})"),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: VerifyArgs) -> anyhow::Result<ExitCode> {
    let reports: Vec<PropertyReport> = match args.suite {
        SuiteArg::Lemma1 => run_suite(Suite::ProjectionLaws, args.fuzz_iters, args.seed)?,
        SuiteArg::Lemma2 => run_suite(Suite::CutBound, args.fuzz_iters, args.seed)?,
        SuiteArg::Lemma4 => run_suite(Suite::DropBound, args.fuzz_iters, args.seed)?,
        SuiteArg::Lemma5 => run_suite(Suite::ExpectedDropFloor, args.fuzz_iters, args.seed)?,
        SuiteArg::Thm2 => run_suite(Suite::CliqueComponents, args.fuzz_iters, args.seed)?,
        SuiteArg::Thm5 => run_suite(Suite::DumbbellClosedForm, args.fuzz_iters, args.seed)?,
        SuiteArg::All => run_all(args.fuzz_iters, args.seed)?,
    };
    let mut all_passed = true;
    for r in &reports {
        if r.passed {
            println!("PASS {} cases={} {}", r.property, r.cases, r.detail);
        } else {
            all_passed = false;
            println!("FAIL {} cases={}: {}", r.property, r.cases, r.detail);
        }
    }
    Ok(if all_passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}
