use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nonlocal_core::config::{Config, Overrides};
use nonlocal_core::diagnostics::{InvariantMonitor, InvariantReport};
use nonlocal_core::harness::{refine_fixed_delta, refine_joint_limit, Regime, StudyReport};
use nonlocal_core::io;
use nonlocal_core::kernel::{compute_weights, Kernel, Profile};
use nonlocal_core::scheme::{OutputSchedule, Solver};

#[derive(Parser)]
#[command(name = "nonlocal", version, about = "Nonlocal conservation law solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single simulation and write the solution snapshots.
    Run(Common),
    /// Run a refinement study (regime taken from the config).
    Study(Common),
    /// Run a simulation and check every invariant at every step.
    Check(Common),
    /// Print the quadrature weights for a kernel and grid spacing.
    Weights {
        #[arg(long, default_value = "uniform")]
        profile: String,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        dx: f64,
    },
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct Common {
    /// Configuration file.
    #[arg(long, short)]
    config: PathBuf,
    #[arg(long)]
    dx: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Flux family key.
    #[arg(long)]
    flux: Option<String>,
    #[arg(long = "T")]
    final_time: Option<f64>,
    #[arg(long)]
    levels: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    threads: Option<usize>,
}

impl Common {
    fn load(&self) -> nonlocal_core::Result<Config> {
        let overrides = Overrides {
            dx: self.dx,
            delta: self.delta,
            flux: self.flux.clone(),
            final_time: self.final_time,
            levels: self.levels,
            out: self.out.clone(),
            threads: self.threads,
        };
        Config::load(&self.config, &overrides)
    }
}

enum Outcome {
    Pass,
    Fail,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Run(c) => c.load().and_then(|cfg| run(&cfg)),
        Command::Study(c) => c.load().and_then(|cfg| study(&cfg)),
        Command::Check(c) => c.load().and_then(|cfg| check(&cfg)),
        Command::Weights { profile, delta, dx } => weights(profile, *delta, *dx),
    };
    match result {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn print_reports(reports: &[InvariantReport]) -> Outcome {
    let mut ok = true;
    for r in reports {
        ok &= r.passed;
        println!(
            "{:<14} {}  violation {:.3e} (tolerance {:.3e})",
            r.name,
            if r.passed { "PASS" } else { "FAIL" },
            r.violation,
            r.tolerance
        );
    }
    if ok {
        Outcome::Pass
    } else {
        Outcome::Fail
    }
}

fn simulate(cfg: &Config, schedule: &OutputSchedule) -> nonlocal_core::Result<(nonlocal_core::Trajectory, Vec<InvariantReport>, usize)> {
    let scheme = cfg.scheme_config()?;
    let problem = cfg.problem()?;
    let initial = problem.initial_state(cfg.grid.dx)?;
    let solver = Solver::new(scheme, cfg.grid.dx)?.with_workers(cfg.workers())?;
    let mut monitor = InvariantMonitor::new(&initial, &solver.weights, &scheme.flux, cfg.study.check_entropy);
    let mut steps = 0;
    let traj = solver.run_observed(initial, schedule, |p, n, i| {
        monitor.observe(p, n, i);
        steps = i;
    })?;
    Ok((traj, monitor.finish()?, steps))
}

fn run(cfg: &Config) -> nonlocal_core::Result<Outcome> {
    let schedule = OutputSchedule::uniform(cfg.scheme.final_time, cfg.scheme.snapshots);
    let (traj, reports, steps) = simulate(cfg, &schedule)?;
    let dir = Path::new(&cfg.output.dir);
    io::write_solution_csv(&traj, &dir.join("solution.csv"))?;
    io::write_run_summary(&cfg.echo(), cfg.scheme.final_time, steps, &reports, &dir.join("summary.json"))?;
    println!("{steps} steps to T = {}; wrote {}", cfg.scheme.final_time, dir.join("solution.csv").display());
    Ok(print_reports(&reports))
}

fn check(cfg: &Config) -> nonlocal_core::Result<Outcome> {
    let (_, reports, steps) = simulate(cfg, &OutputSchedule::uniform(cfg.scheme.final_time, 2))?;
    let dir = Path::new(&cfg.output.dir);
    io::write_run_summary(&cfg.echo(), cfg.scheme.final_time, steps, &reports, &dir.join("check.json"))?;
    println!("checked {steps} steps");
    Ok(print_reports(&reports))
}

fn study(cfg: &Config) -> nonlocal_core::Result<Outcome> {
    let scheme = cfg.scheme_config()?;
    let problem = cfg.problem()?;
    let options = cfg.study_options();
    let report: StudyReport = match cfg.regime()? {
        Regime::FixedDelta => refine_fixed_delta(&problem, &scheme, cfg.grid.dx, cfg.study.levels, &options)?,
        Regime::JointLimit => {
            refine_joint_limit(&problem, &scheme, cfg.study.coupling, cfg.grid.dx, cfg.study.levels, &options)?
        }
    };
    let dir = Path::new(&cfg.output.dir);
    io::write_study(&report, &cfg.echo(), &dir.join("study.json"))?;
    io::write_study_csv(&report, &dir.join("study.csv"))?;
    io::emit_plot_data(&report, &dir.join("plot.dat"))?;
    print!("{}", io::study_csv(&report));
    let ok = report.monotone && report.invariants_passed;
    println!(
        "monotone: {}  invariants: {}",
        report.monotone,
        if report.invariants_passed { "PASS" } else { "FAIL" }
    );
    Ok(if ok { Outcome::Pass } else { Outcome::Fail })
}

fn weights(profile: &str, delta: f64, dx: f64) -> nonlocal_core::Result<Outcome> {
    let kernel = Kernel::new(delta, Profile::from_key(profile)?)?;
    let w = compute_weights(&kernel, dx)?;
    println!("# profile {} delta {} dx {} r {}", profile, io::fmt17(delta), io::fmt17(dx), w.r);
    println!("k,W_k");
    for (k, wk) in w.iter() {
        println!("{k},{}", io::fmt17(wk));
    }
    println!("# dx * sum k W_k = {}", io::fmt17(w.moment()));
    Ok(Outcome::Pass)
}
