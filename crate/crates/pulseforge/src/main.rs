use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pulseforge::io::{self, TimePoint};
use pulseforge::runner::{default_axis, SweepSource};
use pulseforge::{fidelity_sweep, run_and_persist, simulate, time_sweep, AppError, Parallel, ScenarioConfig};
use pulseforge_core::scp::IterRecord;

#[derive(Parser)]
#[command(name = "pulseforge", version, about = "Robust two-qubit gate pulse optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its result directory.
    Optimize {
        #[arg(long)]
        config: PathBuf,
        /// Suppress per-iteration progress on stderr.
        #[arg(long)]
        quiet: bool,
    },
    /// Evaluate a pulse over a grid of parameter values.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Pulse CSV; omit together with --target to sweep the target itself.
        #[arg(long, required_unless_present = "target")]
        pulse: Option<PathBuf>,
        /// Repeat for a second axis (nu_a1 or nu_a2).
        #[arg(long = "axis", required = true, num_args = 1)]
        axes: Vec<String>,
        #[arg(long, default_value_t = 11)]
        points: usize,
        /// Use U = W instead of propagating a pulse.
        #[arg(long, conflicts_with = "pulse")]
        target: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-pixel evolution of |+y>|+y> under a pulse.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        pulse: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Best fidelity against total gate time.
    Timesweep {
        #[arg(long)]
        config: PathBuf,
        /// start:stop:step (inclusive) or a comma-separated list, in ns.
        #[arg(long)]
        times: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        quiet: bool,
    },
}

fn parse_times(s: &str) -> Result<Vec<f64>, AppError> {
    let bad = || AppError::Config(format!("cannot parse --times '{s}'"));
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let v: Vec<f64> = parts.iter().map(|p| p.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?;
        let (start, stop, step) = (v[0], v[1], v[2]);
        if !(step > 0.0) || !(stop >= start) {
            return Err(bad());
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        return Ok((0..=n).map(|i| start + step * i as f64).collect());
    }
    s.split(',').map(|p| p.trim().parse().map_err(|_| bad())).collect()
}

fn progress(quiet: bool) -> impl FnMut(&str, &IterRecord) {
    move |stage, r| {
        if !quiet && (r.iter % 10 == 0) {
            eprintln!("[{stage}] iter {:4}  F_wc {:.6}  rho {:.3e}", r.iter, r.worst_case, r.trust_radius);
        }
    }
}

fn output(out: Option<&Path>, write: impl FnOnce(&mut dyn Write) -> csv::Result<()>) -> Result<(), AppError> {
    match out {
        Some(path) => {
            let mut f = File::create(path).map_err(|e| AppError::Io { path: path.into(), source: e })?;
            write(&mut f).map_err(|e| AppError::Io { path: path.into(), source: e.into() })
        }
        None => write(&mut std::io::stdout().lock())
            .map_err(|e| AppError::Io { path: "<stdout>".into(), source: e.into() }),
    }
}

fn run(cli: Cli) -> Result<(), AppError> {
    match cli.command {
        Command::Optimize { config, quiet } => {
            let cfg = ScenarioConfig::load(&config)?;
            let map = Parallel::from_env()?;
            let (outcome, dir) = run_and_persist(&cfg, &map, map.threads(), &mut progress(quiet))?;
            let r = &outcome.record;
            println!("{}: worst-case F = {:.6}", r.scenario, r.worst_case.unwrap_or(f64::NAN));
            if let Some(v) = &r.verification {
                println!("verification grid ({} points/axis): min F = {:.6}", v.n_points, v.min);
            }
            println!("results in {}", dir.display());
        }
        Command::Sweep { config, pulse, axes, points, target, out } => {
            let cfg = ScenarioConfig::load(&config)?;
            let axes = axes.iter().map(|a| default_axis(&cfg, a)).collect::<Result<Vec<_>, _>>()?;
            let map = Parallel::from_env()?;
            let p;
            let source = match (&pulse, target) {
                (Some(path), false) => {
                    p = io::read_pulse(path, cfg.pulse.quadratures)?;
                    SweepSource::Pulse(&p)
                }
                _ => SweepSource::Target,
            };
            let rows = fidelity_sweep(&cfg, source, &axes, points, &map)?;
            output(out.as_deref(), |w| io::write_sweep_to(w, &rows))?;
        }
        Command::Simulate { config, pulse, out } => {
            let cfg = ScenarioConfig::load(&config)?;
            let p = io::read_pulse(&pulse, cfg.pulse.quadratures)?;
            let trace = simulate(&cfg, &p)?;
            output(out.as_deref(), |w| io::write_evolution_to(w, &trace))?;
        }
        Command::Timesweep { config, times, out, quiet } => {
            let cfg = ScenarioConfig::load(&config)?;
            let times = parse_times(&times)?;
            let map = Parallel::from_env()?;
            let runs = time_sweep(&cfg, &times, &map, &mut progress(quiet))?;
            let points: Vec<TimePoint> =
                runs.iter().map(|r| TimePoint { total_time: r.total_time, fidelity: r.result.worst_case }).collect();
            output(out.as_deref(), |w| io::write_time_sweep_to(w, &points))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
