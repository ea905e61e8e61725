//! Worst-case fidelity evaluation and the trust-region optimization loop.

use alloc::vec;
use alloc::vec::Vec;

use super::grid::SampleGrid;
use super::step::maximin_step;
use crate::dynamics::{fidelity_and_gradient, pulse_fidelity, ControlProblem, Evaluation};
use crate::model::SystemParams;
use crate::pulse::{clamp_check, FilterSpec, Pulse, TransferMatrix};
use crate::{Error, Result};

/// Runs independent per-sample work, returning results in index order.
pub trait SampleMap {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// In-order evaluation on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl SampleMap for Sequential {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).map(f).collect()
    }
}

/// Control problems for every parameter sample, optionally seen through a filter.
#[derive(Debug, Clone)]
pub struct SampleSet {
    pub problems: Vec<ControlProblem>,
    pub filter: Option<FilterSpec>,
}

impl SampleSet {
    /// Builds one problem per grid point.
    pub fn build(
        grid: &SampleGrid,
        mut builder: impl FnMut(&SystemParams) -> Result<ControlProblem>,
    ) -> Result<Self> {
        let problems = grid
            .points
            .iter()
            .enumerate()
            .map(|(index, p)| builder(p).map_err(|e| Error::Sample { index, source: alloc::boxed::Box::new(e) }))
            .collect::<Result<Vec<_>>>()?;
        SampleSet::new(problems, None)
    }

    pub fn new(problems: Vec<ControlProblem>, filter: Option<FilterSpec>) -> Result<Self> {
        let first = problems.first().ok_or_else(|| Error::InvalidInput("no parameter samples".into()))?;
        if problems.iter().any(|p| p.bound != first.bound || p.quadratures() != first.quadratures()) {
            return Err(Error::InvalidInput("samples disagree on bound or quadratures".into()));
        }
        if let Some(f) = &filter {
            f.validate()?;
        }
        Ok(SampleSet { problems, filter })
    }

    pub fn with_filter(mut self, filter: Option<FilterSpec>) -> Result<Self> {
        if let Some(f) = &filter {
            f.validate()?;
        }
        self.filter = filter;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.problems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.problems.is_empty()
    }

    pub fn bound(&self) -> f64 {
        self.problems[0].bound
    }

    pub fn transfer(&self, p: &Pulse) -> Result<Option<TransferMatrix>> {
        self.filter.map(|f| f.transfer(p.n_pixels(), p.total_time)).transpose()
    }

    /// Fidelity of sample `i`; the pulse is filtered first when a filter is set.
    pub fn fidelity(&self, i: usize, p: &Pulse, transfer: Option<&TransferMatrix>) -> Result<f64> {
        let cp = &self.problems[i];
        match transfer {
            Some(t) => pulse_fidelity(cp, &t.filter_pulse(p)?),
            None => pulse_fidelity(cp, p),
        }
    }

    /// Fidelity and gradient with respect to the unfiltered amplitudes.
    pub fn evaluate(&self, i: usize, p: &Pulse, transfer: Option<&TransferMatrix>) -> Result<Evaluation> {
        let cp = &self.problems[i];
        match transfer {
            None => fidelity_and_gradient(cp, p),
            Some(t) => {
                let fine = t.filter_pulse(p)?;
                let mut ev = fidelity_and_gradient(cp, &fine)?;
                let n_fine = fine.n_pixels();
                let mut coarse = Vec::with_capacity(p.as_slice().len());
                for q in 0..p.quadratures() {
                    coarse.extend(t.apply_transpose(&ev.gradient[q * n_fine..(q + 1) * n_fine]));
                }
                ev.gradient = coarse;
                Ok(ev)
            }
        }
    }
}

fn tag<T>(index: usize, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Sample { index, source: alloc::boxed::Box::new(e) })
}

/// (min F, per-sample F).
pub fn worst_case<M: SampleMap>(set: &SampleSet, p: &Pulse, map: &M) -> Result<(f64, Vec<f64>)> {
    let transfer = set.transfer(p)?;
    let fs = map
        .map(set.len(), |i| tag(i, set.fidelity(i, p, transfer.as_ref())))
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
    Ok((fs.iter().copied().fold(f64::INFINITY, f64::min), fs))
}

fn evaluate_all<M: SampleMap>(set: &SampleSet, p: &Pulse, map: &M) -> Result<Vec<Evaluation>> {
    let transfer = set.transfer(p)?;
    map.map(set.len(), |i| tag(i, set.evaluate(i, p, transfer.as_ref()))).into_iter().collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptConfig {
    /// GHz
    pub trust_radius_init: f64,
    pub expand_factor: f64,
    pub shrink_factor: f64,
    /// GHz
    pub trust_radius_min: f64,
    pub max_iterations: usize,
    pub stall_tolerance: f64,
    pub stall_window: usize,
}

impl Default for OptConfig {
    fn default() -> Self {
        OptConfig::for_bound(crate::pulse::DEFAULT_BOUND)
    }
}

impl OptConfig {
    /// Defaults with ρ₀ = 0.1·bound.
    pub fn for_bound(bound: f64) -> Self {
        OptConfig {
            trust_radius_init: 0.1 * bound,
            expand_factor: 1.5,
            shrink_factor: 0.5,
            trust_radius_min: 1e-5,
            max_iterations: 300,
            stall_tolerance: 1e-7,
            stall_window: 10,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.trust_radius_init > 0.0
            && self.trust_radius_min > 0.0
            && 0.0 < self.shrink_factor
            && self.shrink_factor < 1.0
            && 1.0 < self.expand_factor
            && self.expand_factor.is_finite()
            && self.stall_tolerance >= 0.0
            && self.stall_window >= 1;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(alloc::format!("invalid optimizer settings {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Trust radius fell below its floor.
    RadiusFloor,
    IterationLimit,
    /// Worst case improved by less than the tolerance over the stall window.
    Stall,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::RadiusFloor => "radius_floor",
            Termination::IterationLimit => "iteration_limit",
            Termination::Stall => "stall",
        }
    }
}

/// One optimizer iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterRecord {
    pub iter: usize,
    pub accepted: bool,
    /// Worst case at the iterate kept after this iteration.
    pub worst_case: f64,
    /// Radius the step was taken with.
    pub trust_radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptResult {
    pub pulse: Pulse,
    pub fidelities: Vec<f64>,
    pub worst_case: f64,
    pub initial_worst_case: f64,
    pub trace: Vec<IterRecord>,
    pub termination: Termination,
}

impl OptResult {
    pub fn accepted_steps(&self) -> usize {
        self.trace.iter().filter(|r| r.accepted).count()
    }

    /// Accepted worst-case values rise strictly, starting above the seed.
    pub fn is_monotone(&self) -> bool {
        let mut last = self.initial_worst_case;
        for r in self.trace.iter().filter(|r| r.accepted) {
            if !(r.worst_case > last) {
                return false;
            }
            last = r.worst_case;
        }
        true
    }
}

pub fn scp_optimize<M: SampleMap>(
    set: &SampleSet,
    seed: &Pulse,
    cfg: &OptConfig,
    map: &M,
) -> Result<OptResult> {
    scp_optimize_with(set, seed, cfg, map, |_| {})
}

/// Trust-region loop: linearize every sample at θ, solve the max-min LP for
/// θ̃, accept and expand when the true worst case improves, otherwise shrink.
pub fn scp_optimize_with<M: SampleMap>(
    set: &SampleSet,
    seed: &Pulse,
    cfg: &OptConfig,
    map: &M,
    mut observer: impl FnMut(&IterRecord),
) -> Result<OptResult> {
    cfg.validate()?;
    let bound = set.bound();
    let report = clamp_check(seed, bound);
    if !report.within_bounds {
        return Err(Error::InvalidInput(alloc::format!(
            "seed pulse exceeds the {bound} GHz bound at {} pixels",
            report.violations.len()
        )));
    }
    let mut pulse = seed.clone();
    let mut evals = evaluate_all(set, &pulse, map)?;
    let mut fs: Vec<f64> = evals.iter().map(|e| e.fidelity).collect();
    let mut wc = fs.iter().copied().fold(f64::INFINITY, f64::min);
    let initial_worst_case = wc;
    let mut rho = cfg.trust_radius_init;
    let mut trace = Vec::new();
    let mut accepted_history = vec![wc];

    let termination = loop {
        if rho < cfg.trust_radius_min {
            break Termination::RadiusFloor;
        }
        if trace.len() >= cfg.max_iterations {
            break Termination::IterationLimit;
        }
        let grads: Vec<Vec<f64>> = evals.iter().map(|e| e.gradient.clone()).collect();
        let step = maximin_step(&fs, &grads, pulse.as_slice(), bound, rho)?;
        let mut accepted = false;
        if step.increment.iter().any(|&d| d != 0.0) {
            let mut trial_amps = pulse.as_slice().to_vec();
            for (a, d) in trial_amps.iter_mut().zip(&step.increment) {
                *a = (*a + d).clamp(-bound, bound);
            }
            let trial = pulse.with_amps(trial_amps)?;
            let trial_evals = evaluate_all(set, &trial, map)?;
            let trial_fs: Vec<f64> = trial_evals.iter().map(|e| e.fidelity).collect();
            let trial_wc = trial_fs.iter().copied().fold(f64::INFINITY, f64::min);
            if trial_wc > wc {
                pulse = trial;
                evals = trial_evals;
                fs = trial_fs;
                wc = trial_wc;
                accepted = true;
            }
        }
        let record = IterRecord { iter: trace.len() + 1, accepted, worst_case: wc, trust_radius: rho };
        observer(&record);
        trace.push(record);
        if accepted {
            rho *= cfg.expand_factor;
            accepted_history.push(wc);
            let n = accepted_history.len();
            if n > cfg.stall_window && wc - accepted_history[n - 1 - cfg.stall_window] < cfg.stall_tolerance {
                break Termination::Stall;
            }
        } else {
            rho *= cfg.shrink_factor;
        }
    };
    Ok(OptResult { pulse, fidelities: fs, worst_case: wc, initial_worst_case, trace, termination })
}
