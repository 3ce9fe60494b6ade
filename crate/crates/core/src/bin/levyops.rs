//! Command-line front end.
//!
//! Exit codes: 0 when everything computed passes, 1 when a computation ran
//! (or a measure was rejected) but a check failed, 2 for usage and
//! configuration errors.

use std::fs;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::info;
use serde::Serialize;

use levyops::config::{RunConfig, SymbolConfig};
use levyops::measure::CheckGrids;
use levyops::solver::{apriori_ratio, residual, solve, Comparison, EvolutionProblem, NormSpec};
use levyops::symbol::{certify_lower_bound, certify_upper_bound, symbol_table, write_symbol_table, Symbol};
use levyops::verify::{
    boundedness_experiment, counterexample_run, estimate_sweep, montecarlo_check, weighted_sweep, ExperimentReport,
};
use levyops::{plot, Error};

const RESIDUAL_TOLERANCE: f64 = 1e-8;

#[derive(Parser)]
#[command(name = "levyops", version, about = "Levy-operator symbols, solver and verification experiments")]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Overrides the `seed` key of the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Also write SVG charts where the experiment has one.
    #[arg(long, global = true)]
    plots: bool,
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the structural assumptions of the measure or schedule.
    Validate,
    /// Tabulate the symbol and certify its upper and lower constants.
    Symbol,
    /// Solve the periodic evolution problem and check the residual.
    Solve,
    /// Run one verification experiment.
    Experiment {
        #[arg(value_enum)]
        name: ExperimentName,
    },
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum ExperimentName {
    EstimateSweep,
    WeightedSweep,
    Counterexample,
    Montecarlo,
    MaximalBoundedness,
}

impl ExperimentName {
    fn id(self) -> &'static str {
        match self {
            ExperimentName::EstimateSweep => "estimate_sweep",
            ExperimentName::WeightedSweep => "weighted_sweep",
            ExperimentName::Counterexample => "counterexample",
            ExperimentName::Montecarlo => "montecarlo",
            ExperimentName::MaximalBoundedness => "maximal_boundedness",
        }
    }
}

#[derive(Serialize)]
struct Manifest {
    command: String,
    seed: u64,
    config_path: String,
    outputs: Vec<String>,
    config: String,
}

struct Run {
    cfg: RunConfig,
    text: String,
    path: String,
    seed: u64,
    out: PathBuf,
    plots: bool,
}

impl Run {
    fn load(cli: &Cli, required: bool) -> Result<Self, Error> {
        let (cfg, text, path) = match &cli.config {
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
                (RunConfig::parse(&text)?, text, p.display().to_string())
            }
            None if required => return Err(Error::Config("this subcommand needs --config".into())),
            None => (RunConfig::default(), String::new(), String::new()),
        };
        let seed = cli.seed.or(cfg.seed).unwrap_or(0);
        Ok(Run { cfg, text, path, seed, out: cli.out.clone(), plots: cli.plots })
    }

    fn create(&self, name: &str) -> Result<(BufWriter<fs::File>, String), Error> {
        fs::create_dir_all(&self.out)?;
        let path = self.out.join(name);
        Ok((BufWriter::new(fs::File::create(&path)?), path.display().to_string()))
    }

    fn manifest(&self, command: &str, outputs: Vec<String>) -> Result<(), Error> {
        let m = Manifest {
            command: command.to_string(),
            seed: self.seed,
            config_path: self.path.clone(),
            outputs,
            config: self.text.clone(),
        };
        let text = toml::to_string(&m).map_err(|e| Error::Config(e.to_string()))?;
        fs::create_dir_all(&self.out)?;
        fs::write(self.out.join("manifest.toml"), text)?;
        Ok(())
    }
}

fn validate(run: &Run) -> Result<bool, Error> {
    let schedule = run.cfg.schedule(None)?;
    let grids = run.cfg.grid.clone().unwrap_or_default().build(schedule.dim())?;
    let (mut w, csv_path) = run.create("assumptions.csv")?;
    let mut table = csv::Writer::from_writer(&mut w);
    table.write_record(["piece", "start_t", "end_t", "lambda_hat", "nondegen_hat", "cancellation_max", "pass"])?;
    let mut all = true;
    for (i, piece) in schedule.pieces().iter().enumerate() {
        let rep = piece.measure.check_assumptions(&grids)?;
        println!("piece {i} [{}, {}): {}", piece.start, piece.end, piece.measure);
        println!("{rep}");
        all &= rep.passes();
        table.write_record([
            i.to_string(),
            format!("{:e}", piece.start),
            format!("{:e}", piece.end),
            format!("{:.12e}", rep.lambda_hat),
            format!("{:.12e}", rep.nondegen_hat),
            format!("{:.12e}", rep.cancellation_max),
            rep.passes().to_string(),
        ])?;
    }
    table.flush()?;
    drop(table);
    run.manifest("validate", vec![csv_path])?;
    println!("result: {}", if all { "pass" } else { "FAIL" });
    Ok(all)
}

fn symbol(run: &Run) -> Result<bool, Error> {
    let schedule = run.cfg.schedule(None)?;
    let grids: CheckGrids = run.cfg.grid.clone().unwrap_or_default().build(schedule.dim())?;
    let sc: SymbolConfig = run.cfg.symbol.clone().unwrap_or_default();
    let mut sym = Symbol::time_dependent(schedule).with_mode(sc.mode.into());
    if let Some(b) = sc.error_budget {
        sym = sym.with_error_budget(b);
    }
    let rows = symbol_table(&sym, sc.time_t, &grids.frequencies)?;
    let (w, csv_path) = run.create("symbol.csv")?;
    write_symbol_table(w, &rows)?;
    let upper = certify_upper_bound(&sym, &grids.frequencies)?;
    let lower = certify_lower_bound(&sym, &grids.frequencies)?;
    println!("frequencies = {}", grids.frequencies.len());
    println!("upper constant sup |m|/|xi|^sigma = {:.12e} at {:?} (finite: {})", upper.constant, upper.argmax, upper.finite);
    println!("lower constant inf -Re m/|xi|^sigma = {:.12e} at {:?} (positive: {})", lower.constant, lower.argmin, lower.positive);
    println!("chain -Re m >= N/3: min ratio {:.6e} (holds: {})", lower.chain_min_ratio, lower.chain_holds);
    let ok = upper.finite && lower.positive && lower.chain_holds;
    run.manifest("symbol", vec![csv_path])?;
    println!("result: {}", if ok { "pass" } else { "FAIL" });
    Ok(ok)
}

fn solve_cmd(run: &Run) -> Result<bool, Error> {
    let sc = run.cfg.solve.clone().ok_or_else(|| Error::Config("solve needs a [solve] section".into()))?;
    if run.cfg.measure.is_some() && sc.horizon_t.is_none() {
        return Err(Error::Config("[solve] needs horizon_t with a single [measure]".into()));
    }
    let schedule = run.cfg.schedule(sc.horizon_t)?;
    let forcing = run.cfg.forcing.clone().unwrap_or(levyops::config::ForcingConfig::Zero).build(
        schedule.dim(),
        sc.n,
        schedule.horizon(),
        run.seed,
    )?;
    let problem = EvolutionProblem::new(schedule, sc.lambda, forcing, sc.substeps)?;
    info!("solving n = {}, horizon = {}, lambda = {}", problem.n(), problem.horizon(), sc.lambda);
    let traj = solve(&problem)?;
    let res = residual(&traj, &problem)?;
    let name = if problem.dim() == 1 { "trajectory.csv" } else { "trajectory.bin" };
    let (w, path) = run.create(name)?;
    if problem.dim() == 1 {
        traj.write_csv(w)?;
    } else {
        traj.write_binary(w)?;
    }
    let last = traj.final_state();
    println!("time levels = {}", traj.times.len());
    println!("final max |u| = {:.12e}", last.max_abs());
    println!("final ||u||_2 = {:.12e}", last.l2_norm());
    println!("residual = {res:.3e} (tolerance {RESIDUAL_TOLERANCE:e})");
    if !problem.forcing.is_zero() {
        let r = apriori_ratio(&traj, &problem, &Comparison::Fractional, &NormSpec::lp(sc.p))?;
        println!(
            "p = {}: ||u_t||/||f|| = {:.6e}, ||(-Delta)^(sigma/2) u||/||f|| = {:.6e}, lambda||u||/||f|| = {:.6e}",
            sc.p, r.time_derivative, r.comparison, r.damping
        );
    }
    run.manifest("solve", vec![path])?;
    let ok = res < RESIDUAL_TOLERANCE;
    println!("result: {}", if ok { "pass" } else { "FAIL" });
    Ok(ok)
}

fn experiment(run: &Run, name: ExperimentName) -> Result<bool, Error> {
    let c = &run.cfg;
    let report: ExperimentReport = match name {
        ExperimentName::EstimateSweep => estimate_sweep(&c.estimate_sweep.clone().unwrap_or_default().build(run.seed)?)?,
        ExperimentName::WeightedSweep => weighted_sweep(&c.weighted_sweep.clone().unwrap_or_default().build(run.seed)?)?,
        ExperimentName::Counterexample => counterexample_run(&c.counterexample.clone().unwrap_or_default().build()?)?,
        ExperimentName::Montecarlo => montecarlo_check(&c.montecarlo.clone().unwrap_or_default().build(run.seed)?)?,
        ExperimentName::MaximalBoundedness => {
            boundedness_experiment(&c.maximal_boundedness.clone().unwrap_or_default().build(run.seed)?)?
        }
    };
    let (w, csv_path) = run.create(&format!("{}.csv", name.id()))?;
    report.write_csv(w)?;
    let mut outputs = vec![csv_path];
    if run.plots {
        outputs.extend(plot::plot_report(&report, &run.out)?.iter().map(|p| p.display().to_string()));
    }
    run.manifest(&format!("experiment {}", name.id()), outputs)?;
    println!("seed = {}", run.seed);
    println!("{report}");
    println!("wall time = {:.3} s", report.wall_time.as_secs_f64());
    Ok(report.passes())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidMeasure(_) | Error::Rejected(_) | Error::AssumptionFailed(_) | Error::NonHermitian { .. } => 1,
        Error::InvalidArgument(_) | Error::Config(_) | Error::Plot(_) | Error::Io(_) | Error::Csv(_) => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let outcome = match &cli.command {
        Command::Validate => Run::load(&cli, true).and_then(|r| validate(&r)),
        Command::Symbol => Run::load(&cli, true).and_then(|r| symbol(&r)),
        Command::Solve => Run::load(&cli, true).and_then(|r| solve_cmd(&r)),
        Command::Experiment { name } => Run::load(&cli, false).and_then(|r| experiment(&r, *name)),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
