//! Scenario execution and result persistence.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use pulseforge_core::dynamics::{evolve_trace, fidelity, plus_y_plus_y, ControlProblem, EvolutionTrace};
use pulseforge_core::model::SystemParams;
use pulseforge_core::pulse::{clamp_check, flat_top_gaussian, Pulse};
use pulseforge_core::scp::{
    sample_grid, scp_optimize_with, worst_case, IterRecord, OptResult, SampleGrid, SampleMap, SampleSet, Uncertainty,
    UncertaintySpec,
};
use serde::{Deserialize, Serialize};

use crate::config::{param_id, AxisConfig, ModelKind, Plan, ScenarioConfig};
use crate::error::{AppError, Result};
use crate::io::{self, SweepRow, TimePoint};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn build_problem(model: ModelKind, p: &SystemParams, bound: f64) -> pulseforge_core::Result<ControlProblem> {
    match model {
        ModelKind::TwoLevel => ControlProblem::two_level(p, bound),
        ModelKind::Multilevel => ControlProblem::multilevel(p, bound),
    }
}

/// System parameters every sample is derived from. With
/// `fix_drive_to_nominal` the drive frequency is pinned to the value the
/// nominal model picks, so perturbed samples see a detuned drive.
pub fn base_params(cfg: &ScenarioConfig) -> Result<SystemParams> {
    let mut p = cfg.system.params();
    if cfg.fix_drive_to_nominal && p.nu_d.is_none() {
        p.nu_d = Some(build_problem(cfg.model, &p, cfg.pulse.bound)?.nu_d);
    }
    Ok(p)
}

pub fn sample_set(cfg: &ScenarioConfig, grid: &SampleGrid, filtered: bool) -> Result<SampleSet> {
    let set = SampleSet::build(grid, |p| build_problem(cfg.model, p, cfg.pulse.bound))?;
    Ok(set.with_filter(if filtered { cfg.filter_spec() } else { None })?)
}

/// Flat-top seed (or the configured seed file) for a pulse of `total_time`.
pub fn seed_pulse(cfg: &ScenarioConfig, total_time: f64) -> Result<Pulse> {
    let pc = &cfg.pulse;
    let n = pc.pixels_for_time(total_time)?;
    let seed = match &pc.seed.file {
        Some(path) => {
            let p = io::read_pulse(path, pc.quadratures)?;
            if p.n_pixels() != n || (p.total_time - total_time).abs() > 1e-9 * total_time {
                return Err(AppError::Config(format!(
                    "seed file {} has {} pixels over {} ns, expected {n} over {total_time} ns",
                    path.display(),
                    p.n_pixels(),
                    p.total_time
                )));
            }
            Pulse::new(total_time, pc.quadratures, p.as_slice().to_vec())?
        }
        None => {
            let tau = total_time / n as f64;
            let ramp_pixels = ((pc.seed.ramp / tau).round() as usize).min(n / 2);
            flat_top_gaussian(n, total_time, pc.seed.peak, ramp_pixels)?.with_quadratures(pc.quadratures)?
        }
    };
    let report = clamp_check(&seed, pc.bound);
    if !report.within_bounds {
        return Err(AppError::Config(format!(
            "seed pulse exceeds the {} GHz bound at (quadrature, pixel) {:?}",
            pc.bound, report.violations
        )));
    }
    Ok(seed)
}

/// What a sweep evaluates at each grid point.
#[derive(Debug, Clone, Copy)]
pub enum SweepSource<'a> {
    Pulse(&'a Pulse),
    /// U := W, bypassing propagation.
    Target,
}

fn axis_spec(base: &SystemParams, axes: &[AxisConfig], n_points: usize) -> Result<UncertaintySpec> {
    let entries = axes
        .iter()
        .map(|a| {
            let param = param_id(&a.param)?;
            Ok(Uncertainty { param, center: base.get(param), half_width: a.half_width, n_samples: n_points })
        })
        .collect::<Result<Vec<_>>>()?;
    let spec = UncertaintySpec::new(entries);
    spec.validate().map_err(|e| AppError::Config(format!("sweep axes: {e}")))?;
    Ok(spec)
}

/// Half-width for a sweep axis: verification axes first, then the
/// optimization ranges, then the built-in defaults.
pub fn default_axis(cfg: &ScenarioConfig, name: &str) -> Result<AxisConfig> {
    let id = param_id(name)?;
    if let Some(a) = cfg.verification.axes.iter().find(|a| a.param == name) {
        return Ok(a.clone());
    }
    if let Some(u) = cfg.uncertainty.iter().find(|u| u.param == name) {
        return Ok(AxisConfig { param: name.into(), half_width: u.half_width });
    }
    let half_width = match id {
        pulseforge_core::model::ParamId::NuA1 => crate::scenario::NU_A1_HALF_WIDTH,
        pulseforge_core::model::ParamId::NuA2 => crate::scenario::NU_A2_HALF_WIDTH,
    };
    Ok(AxisConfig { param: name.into(), half_width })
}

/// F over a dense tensor grid of the given axes, with the scenario filter.
pub fn fidelity_sweep<M: SampleMap>(
    cfg: &ScenarioConfig,
    source: SweepSource<'_>,
    axes: &[AxisConfig],
    n_points: usize,
    map: &M,
) -> Result<Vec<SweepRow>> {
    if axes.is_empty() || axes.len() > 2 {
        return Err(AppError::Config("a sweep needs one or two axes".into()));
    }
    let base = base_params(cfg)?;
    let grid = sample_grid(&axis_spec(&base, axes, n_points)?, &base)?;
    let set = sample_set(cfg, &grid, true)?;
    let fs = match source {
        SweepSource::Pulse(p) => worst_case(&set, p, map)?.1,
        SweepSource::Target => set.problems.iter().map(|cp| fidelity(cp, &cp.embedded_target())).collect(),
    };
    Ok(grid
        .coords
        .iter()
        .zip(fs)
        .map(|(c, fidelity)| SweepRow { param1: c[0], param2: c.get(1).copied(), fidelity })
        .collect())
}

/// Evolution of |+y⟩|+y⟩ under the pulse as the hardware would play it.
pub fn simulate(cfg: &ScenarioConfig, pulse: &Pulse) -> Result<EvolutionTrace> {
    let base = base_params(cfg)?;
    let cp = build_problem(cfg.model, &base, cfg.pulse.bound)?;
    let played = match cfg.filter_spec() {
        Some(f) => f.transfer(pulse.n_pixels(), pulse.total_time)?.filter_pulse(pulse)?,
        None => pulse.clone(),
    };
    Ok(evolve_trace(&cp, &played, &plus_y_plus_y())?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub name: String,
    pub filtered: bool,
    #[serde(rename = "seed_worst_case_F")]
    pub seed_worst_case: f64,
    #[serde(rename = "worst_case_F")]
    pub worst_case: f64,
    pub iterations: usize,
    pub accepted_steps: usize,
    pub termination: String,
    pub monotone: bool,
}

impl StageRecord {
    fn new(name: &str, filtered: bool, r: &OptResult) -> Self {
        StageRecord {
            name: name.into(),
            filtered,
            seed_worst_case: r.initial_worst_case,
            worst_case: r.worst_case,
            iterations: r.trace.len(),
            accepted_steps: r.accepted_steps(),
            termination: r.termination.as_str().into(),
            monotone: r.is_monotone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    /// Uncertain parameter values in GHz, keyed by parameter name.
    pub params: BTreeMap<String, f64>,
    #[serde(rename = "F")]
    pub fidelity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationRecord {
    pub axes: Vec<AxisConfig>,
    pub n_points: usize,
    #[serde(rename = "min_F")]
    pub min: f64,
    #[serde(rename = "nominal_F")]
    pub nominal: f64,
    #[serde(rename = "max_F")]
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeRecord {
    #[serde(rename = "T_ns")]
    pub total_time: f64,
    pub n_pixels: usize,
    #[serde(rename = "F")]
    pub fidelity: f64,
    pub iterations: usize,
    pub termination: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub scenario: String,
    /// "ok" or "failed".
    pub status: String,
    pub error: Option<String>,
    pub toolkit_version: String,
    pub wall_clock_s: f64,
    pub threads: usize,
    pub config: ScenarioConfig,
    pub stages: Vec<StageRecord>,
    #[serde(rename = "worst_case_F")]
    pub worst_case: Option<f64>,
    #[serde(rename = "nominal_F")]
    pub nominal: Option<f64>,
    /// Fidelity of the unfiltered optimum once the filter is applied.
    #[serde(rename = "unfiltered_optimum_filtered_F")]
    pub unfiltered_optimum_filtered: Option<f64>,
    pub samples: Vec<SampleRecord>,
    pub verification: Option<VerificationRecord>,
    pub time_sweep: Vec<TimeRecord>,
    pub warnings: Vec<String>,
    /// File names inside the run directory.
    pub artifacts: BTreeMap<String, String>,
}

impl ResultRecord {
    fn empty(cfg: &ScenarioConfig, threads: usize) -> Self {
        ResultRecord {
            scenario: cfg.scenario.clone(),
            status: "failed".into(),
            error: None,
            toolkit_version: VERSION.into(),
            wall_clock_s: 0.0,
            threads,
            config: cfg.clone(),
            stages: Vec::new(),
            worst_case: None,
            nominal: None,
            unfiltered_optimum_filtered: None,
            samples: Vec::new(),
            verification: None,
            time_sweep: Vec::new(),
            warnings: Vec::new(),
            artifacts: BTreeMap::new(),
        }
    }

    /// Every stage's accepted worst case rose strictly.
    pub fn monotone(&self) -> bool {
        self.stages.iter().all(|s| s.monotone)
    }
}

/// Everything a run produced, in memory.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub record: ResultRecord,
    pub initial: Pulse,
    /// Final stage (the longest time for a time sweep).
    pub result: OptResult,
    /// Earlier stages, in order.
    pub previous: Vec<OptResult>,
    pub sweep: Vec<SweepRow>,
    pub evolution: EvolutionTrace,
    pub time_points: Vec<TimePoint>,
}

/// Observer of optimizer progress: (stage name, iteration).
pub type Progress<'a> = &'a mut dyn FnMut(&str, &IterRecord);

fn optimize_stage<M: SampleMap>(
    cfg: &ScenarioConfig,
    set: &SampleSet,
    seed: &Pulse,
    name: &str,
    map: &M,
    progress: &mut Progress<'_>,
) -> Result<OptResult> {
    Ok(scp_optimize_with(set, seed, &cfg.opt_config(), map, |r| progress(name, r))?)
}

/// One optimization of a time sweep.
#[derive(Debug, Clone)]
pub struct TimeRun {
    pub name: String,
    /// ns
    pub total_time: f64,
    pub seed: Pulse,
    pub result: OptResult,
}

fn time_sweep_with<M: SampleMap>(
    cfg: &ScenarioConfig,
    set: &SampleSet,
    times: &[f64],
    map: &M,
    progress: &mut Progress<'_>,
) -> Result<Vec<TimeRun>> {
    times
        .iter()
        .map(|&t| {
            let seed = seed_pulse(cfg, t)?;
            let name = format!("T={t}ns");
            let result = optimize_stage(cfg, set, &seed, &name, map, progress)?;
            Ok(TimeRun { name, total_time: t, seed, result })
        })
        .collect()
}

/// Independent optimizations, one per total time, each from a flat-top seed
/// on the configured pixel width. An empty list gives an empty sweep.
pub fn time_sweep<M: SampleMap>(
    cfg: &ScenarioConfig,
    times: &[f64],
    map: &M,
    mut progress: Progress<'_>,
) -> Result<Vec<TimeRun>> {
    if cfg.model != ModelKind::Multilevel || cfg.pulse.pixel_dt.is_none() {
        return Err(AppError::Config("a time sweep needs the multilevel model and pulse.pixel_dt_ns".into()));
    }
    if times.iter().any(|t| !(*t > 0.0)) {
        return Err(AppError::Config("times must be positive".into()));
    }
    let base = base_params(cfg)?;
    let grid = sample_grid(&cfg.uncertainty_spec()?, &base)?;
    let set = sample_set(cfg, &grid, cfg.filter.is_some())?;
    time_sweep_with(cfg, &set, times, map, &mut progress)
}

/// Runs a scenario without touching the filesystem (except a seed file).
pub fn run_scenario<M: SampleMap>(cfg: &ScenarioConfig, map: &M, mut progress: Progress<'_>) -> Result<Outcome> {
    run_inner(cfg, map, &mut progress, 0)
}

fn run_inner<M: SampleMap>(
    cfg: &ScenarioConfig,
    map: &M,
    progress: &mut Progress<'_>,
    threads: usize,
) -> Result<Outcome> {
    cfg.validate()?;
    let start = Instant::now();
    let base = base_params(cfg)?;
    let grid = sample_grid(&cfg.uncertainty_spec()?, &base)?;
    let mut record = ResultRecord::empty(cfg, threads);
    let filtered = cfg.filter.is_some();

    let mut previous = Vec::new();
    let mut time_points = Vec::new();
    let (initial, result, set) = match cfg.plan {
        Plan::Single => {
            let set = sample_set(cfg, &grid, filtered)?;
            let seed = seed_pulse(cfg, cfg.pulse.total_time)?;
            let r = optimize_stage(cfg, &set, &seed, "optimize", map, progress)?;
            record.stages.push(StageRecord::new("optimize", filtered, &r));
            (seed, r, set)
        }
        Plan::UnfilteredThenFiltered => {
            let plain = sample_set(cfg, &grid, false)?;
            let seed = seed_pulse(cfg, cfg.pulse.total_time)?;
            let first = optimize_stage(cfg, &plain, &seed, "unfiltered", map, progress)?;
            record.stages.push(StageRecord::new("unfiltered", false, &first));
            let set = sample_set(cfg, &grid, true)?;
            record.unfiltered_optimum_filtered = Some(worst_case(&set, &first.pulse, map)?.0);
            let second = optimize_stage(cfg, &set, &first.pulse, "filtered", map, progress)?;
            record.stages.push(StageRecord::new("filtered", true, &second));
            previous.push(first);
            (seed, second, set)
        }
        Plan::TimeSweep => {
            let set = sample_set(cfg, &grid, filtered)?;
            let mut last = None;
            for run in time_sweep_with(cfg, &set, &cfg.times, map, progress)? {
                let r = &run.result;
                record.stages.push(StageRecord::new(&run.name, filtered, r));
                time_points.push(TimePoint { total_time: run.total_time, fidelity: r.worst_case });
                record.time_sweep.push(TimeRecord {
                    total_time: run.total_time,
                    n_pixels: run.seed.n_pixels(),
                    fidelity: r.worst_case,
                    iterations: r.trace.len(),
                    termination: r.termination.as_str().into(),
                });
                if let Some(prev) = last.replace((run.seed, run.result)) {
                    previous.push(prev.1);
                }
            }
            let (seed, r) = last.ok_or_else(|| AppError::Config("times_ns is empty".into()))?;
            (seed, r, set)
        }
    };

    record.worst_case = Some(result.worst_case);
    record.nominal = Some(result.fidelities[grid.nominal]);
    record.samples = grid
        .coords
        .iter()
        .zip(&result.fidelities)
        .map(|(c, &f)| SampleRecord {
            params: grid.params.iter().zip(c).map(|(p, &v)| (p.name().to_owned(), v)).collect(),
            fidelity: f,
        })
        .collect();
    record.warnings = set.problems[grid.nominal].warnings.iter().map(|w| w.to_string()).collect();

    let v = &cfg.verification;
    let sweep = if v.axes.is_empty() {
        Vec::new()
    } else {
        fidelity_sweep(cfg, SweepSource::Pulse(&result.pulse), &v.axes, v.n_points, map)?
    };
    if !sweep.is_empty() {
        let fs = sweep.iter().map(|r| r.fidelity);
        record.verification = Some(VerificationRecord {
            axes: v.axes.clone(),
            n_points: v.n_points,
            min: fs.clone().fold(f64::INFINITY, f64::min),
            nominal: sweep[sweep.len() / 2].fidelity,
            max: fs.fold(f64::NEG_INFINITY, f64::max),
        });
    }
    let evolution = simulate(cfg, &result.pulse)?;
    record.status = "ok".into();
    record.wall_clock_s = start.elapsed().as_secs_f64();
    Ok(Outcome { record, initial, result, previous, sweep, evolution, time_points })
}

/// `<output_dir>/<scenario>/<UTC timestamp>`, made unique if it already exists.
pub fn run_dir(cfg: &ScenarioConfig) -> PathBuf {
    let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%S%.3fZ").to_string();
    let base = cfg.output_dir.join(&cfg.scenario);
    let mut dir = base.join(&stamp);
    let mut k = 1;
    while dir.exists() {
        dir = base.join(format!("{stamp}-{k}"));
        k += 1;
    }
    dir
}

fn write_json(path: &Path, record: &ResultRecord) -> Result<()> {
    let text = serde_json::to_string_pretty(record).map_err(|e| AppError::io(path, e.into()))?;
    std::fs::write(path, text + "\n").map_err(|e| AppError::io(path, e))
}

/// Writes every artifact of `outcome` into `dir`.
pub fn persist(outcome: &mut Outcome, dir: &Path) -> Result<()> {
    let mut files: Vec<(&str, &str)> = vec![
        ("pulse_initial", "pulse_initial.csv"),
        ("pulse_optimal", "pulse_optimal.csv"),
        ("trace", "trace.csv"),
        ("sweep", "sweep.csv"),
        ("evolution", "evolution.csv"),
    ];
    io::write_pulse(&dir.join("pulse_initial.csv"), &outcome.initial)?;
    io::write_pulse(&dir.join("pulse_optimal.csv"), &outcome.result.pulse)?;
    io::write_trace(&dir.join("trace.csv"), &outcome.result.trace)?;
    io::write_sweep(&dir.join("sweep.csv"), &outcome.sweep)?;
    io::write_evolution(&dir.join("evolution.csv"), &outcome.evolution)?;
    if outcome.record.config.plan == Plan::UnfilteredThenFiltered {
        io::write_trace(&dir.join("trace_unfiltered.csv"), &outcome.previous[0].trace)?;
        files.push(("trace_unfiltered", "trace_unfiltered.csv"));
    }
    if outcome.record.config.plan == Plan::TimeSweep {
        io::write_time_sweep(&dir.join("time_sweep.csv"), &outcome.time_points)?;
        files.push(("time_sweep", "time_sweep.csv"));
    }
    outcome.record.artifacts = files.into_iter().map(|(k, v)| (k.to_owned(), v.to_owned())).collect();
    write_json(&dir.join("result.json"), &outcome.record)
}

/// Runs and persists. On a numerical failure a `result.json` flagged
/// `failed` is still written before the error is returned.
pub fn run_and_persist<M: SampleMap>(
    cfg: &ScenarioConfig,
    map: &M,
    threads: usize,
    mut progress: Progress<'_>,
) -> Result<(Outcome, PathBuf)> {
    cfg.validate()?;
    let dir = run_dir(cfg);
    std::fs::create_dir_all(&dir).map_err(|e| AppError::io(&dir, e))?;
    let start = Instant::now();
    match run_inner(cfg, map, &mut progress, threads) {
        Ok(mut outcome) => {
            persist(&mut outcome, &dir)?;
            Ok((outcome, dir))
        }
        Err(e) => {
            let mut rec = ResultRecord::empty(cfg, threads);
            rec.error = Some(e.to_string());
            rec.wall_clock_s = start.elapsed().as_secs_f64();
            write_json(&dir.join("result.json"), &rec)?;
            Err(e)
        }
    }
}

pub fn read_record(path: &Path) -> Result<ResultRecord> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| AppError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| AppError::parse(path, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario;
    use pulseforge_core::scp::Sequential;

    fn quiet() -> impl FnMut(&str, &IterRecord) {
        |_, _| {}
    }

    #[test]
    fn drive_is_pinned_to_nominal() {
        let cfg = scenario::defaults("two_level_robust_1d").unwrap();
        let base = base_params(&cfg).unwrap();
        let nominal = ControlProblem::two_level(&cfg.system.params(), 0.3).unwrap();
        assert_eq!(base.nu_d, Some(nominal.nu_d));
        let free = ScenarioConfig { fix_drive_to_nominal: false, ..cfg };
        assert_eq!(base_params(&free).unwrap().nu_d, None);
    }

    #[test]
    fn seed_ramp_rounds_to_pixels() {
        let cfg = scenario::defaults("two_level_nominal").unwrap();
        let s = seed_pulse(&cfg, 200.0).unwrap();
        assert_eq!(s.n_pixels(), 16);
        // 87.5 ns at 12.5 ns per pixel: seven ramp pixels, two plateau pixels
        assert_eq!(s.amp(0, 7), 0.25);
        assert!(s.amp(0, 6) < 0.25);
        let m = scenario::defaults("multilevel_nominal").unwrap();
        let s = seed_pulse(&m, 199.0).unwrap();
        assert_eq!((s.n_pixels(), s.quadratures()), (100, 2));
        assert!(s.quadrature(1).iter().all(|&y| y == 0.0));
    }

    #[test]
    fn target_sweep_is_identically_one() {
        let cfg = scenario::defaults("two_level_robust_2d").unwrap();
        let rows = fidelity_sweep(&cfg, SweepSource::Target, &cfg.verification.axes, 5, &Sequential).unwrap();
        assert_eq!(rows.len(), 25);
        for r in rows {
            assert!((r.fidelity - 1.0).abs() < 1e-12);
            assert!(r.param2.is_some());
        }
    }

    #[test]
    fn short_run_records_and_persists() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = scenario::defaults("two_level_filtered_reopt").unwrap();
        cfg.optimizer.max_iterations = 5;
        cfg.output_dir = dir.path().to_path_buf();
        let (out, run) = run_and_persist(&cfg, &Sequential, 1, &mut quiet()).unwrap();
        assert_eq!(out.record.stages.len(), 2);
        assert!(out.record.monotone());
        assert!(out.record.unfiltered_optimum_filtered.is_some());
        for f in ["result.json", "pulse_initial.csv", "pulse_optimal.csv", "trace.csv", "sweep.csv", "trace_unfiltered.csv"] {
            assert!(run.join(f).exists(), "{f}");
        }
        let rec = read_record(&run.join("result.json")).unwrap();
        assert_eq!(rec, out.record);
        assert_eq!(io::read_trace(&run.join("trace.csv")).unwrap(), out.result.trace);
    }
}
