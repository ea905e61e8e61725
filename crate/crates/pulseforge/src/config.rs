//! JSON scenario configuration. Every physical key carries its unit.

use std::path::{Path, PathBuf};

use pulseforge_core::model::{ParamId, SystemParams};
use pulseforge_core::pulse::{pixels_for, FilterSpec};
use pulseforge_core::scp::{OptConfig, Uncertainty, UncertaintySpec};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{AppError, Result};
use crate::scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    TwoLevel,
    Multilevel,
}

/// How the optimizer stages are arranged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Plan {
    /// One optimization with the configured filter and samples.
    Single,
    /// Optimize without the filter, measure the filtered fidelity of that
    /// optimum, then re-optimize through the filter from it.
    UnfilteredThenFiltered,
    /// Independent nominal optimizations for each entry of `times_ns`.
    TimeSweep,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    #[serde(rename = "nu_r_GHz")]
    pub nu_r: f64,
    #[serde(rename = "nu_a1_GHz")]
    pub nu_a1: f64,
    #[serde(rename = "nu_a2_GHz")]
    pub nu_a2: f64,
    #[serde(rename = "g1_GHz")]
    pub g1: f64,
    #[serde(rename = "g2_GHz")]
    pub g2: f64,
    #[serde(rename = "delta1_GHz")]
    pub delta1: f64,
    #[serde(rename = "delta2_GHz")]
    pub delta2: f64,
    /// Derived from the nominal model when absent.
    #[serde(rename = "nu_d_GHz")]
    pub nu_d: Option<f64>,
    pub n_transmon: usize,
    pub n_cavity: usize,
}

impl From<SystemParams> for SystemConfig {
    fn from(p: SystemParams) -> Self {
        SystemConfig {
            nu_r: p.nu_r,
            nu_a1: p.nu_a1,
            nu_a2: p.nu_a2,
            g1: p.g1,
            g2: p.g2,
            delta1: p.delta1,
            delta2: p.delta2,
            nu_d: p.nu_d,
            n_transmon: p.n_transmon,
            n_cavity: p.n_cavity,
        }
    }
}

impl SystemConfig {
    pub fn params(&self) -> SystemParams {
        SystemParams {
            nu_r: self.nu_r,
            nu_a1: self.nu_a1,
            nu_a2: self.nu_a2,
            g1: self.g1,
            g2: self.g2,
            delta1: self.delta1,
            delta2: self.delta2,
            nu_d: self.nu_d,
            n_transmon: self.n_transmon,
            n_cavity: self.n_cavity,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedConfig {
    #[serde(rename = "peak_GHz")]
    pub peak: f64,
    /// Length of each Gaussian ramp; rounded to whole pixels.
    #[serde(rename = "ramp_ns")]
    pub ramp: f64,
    /// Pulse CSV to start from instead of the flat-top shape.
    pub file: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseConfig {
    #[serde(rename = "total_time_ns")]
    pub total_time: f64,
    /// Exactly one of `n_pixels` and `pixel_dt_ns` must be set.
    pub n_pixels: Option<usize>,
    #[serde(rename = "pixel_dt_ns")]
    pub pixel_dt: Option<f64>,
    pub quadratures: usize,
    #[serde(rename = "bound_GHz")]
    pub bound: f64,
    pub seed: SeedConfig,
}

impl PulseConfig {
    pub fn pixels_for_time(&self, total_time: f64) -> Result<usize> {
        match (self.n_pixels, self.pixel_dt) {
            (Some(n), None) if n > 0 => Ok(n),
            (None, Some(dt)) if dt > 0.0 && dt.is_finite() => Ok(pixels_for(total_time, dt)),
            (Some(_), Some(_)) => Err(AppError::Config(
                "pulse: set only one of n_pixels and pixel_dt_ns (null the other)".into(),
            )),
            _ => Err(AppError::Config("pulse: need a positive n_pixels or pixel_dt_ns".into())),
        }
    }

    pub fn n_pixels(&self) -> Result<usize> {
        self.pixels_for_time(self.total_time)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterConfig {
    #[serde(rename = "sigma_ns")]
    pub sigma: f64,
    pub oversample: usize,
}

impl Default for FilterConfig {
    fn default() -> Self {
        let f = FilterSpec::default();
        FilterConfig { sigma: f.sigma, oversample: f.oversample }
    }
}

impl FilterConfig {
    pub fn spec(&self) -> FilterSpec {
        FilterSpec { sigma: self.sigma, oversample: self.oversample }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UncertaintyConfig {
    pub param: String,
    /// Defaults to the system value.
    #[serde(rename = "center_GHz", default)]
    pub center: Option<f64>,
    #[serde(rename = "half_width_GHz")]
    pub half_width: f64,
    pub n_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerConfig {
    /// Defaults to a tenth of the amplitude bound.
    #[serde(rename = "trust_radius_init_GHz")]
    pub trust_radius_init: Option<f64>,
    pub expand_factor: f64,
    pub shrink_factor: f64,
    #[serde(rename = "trust_radius_min_GHz")]
    pub trust_radius_min: f64,
    pub max_iterations: usize,
    pub stall_tolerance: f64,
    pub stall_window: usize,
}

impl OptimizerConfig {
    pub fn with_max_iterations(max_iterations: usize) -> Self {
        let d = OptConfig::default();
        OptimizerConfig {
            trust_radius_init: None,
            expand_factor: d.expand_factor,
            shrink_factor: d.shrink_factor,
            trust_radius_min: d.trust_radius_min,
            max_iterations,
            stall_tolerance: d.stall_tolerance,
            stall_window: d.stall_window,
        }
    }

    pub fn opt_config(&self, bound: f64) -> OptConfig {
        OptConfig {
            trust_radius_init: self.trust_radius_init.unwrap_or(0.1 * bound),
            expand_factor: self.expand_factor,
            shrink_factor: self.shrink_factor,
            trust_radius_min: self.trust_radius_min,
            max_iterations: self.max_iterations,
            stall_tolerance: self.stall_tolerance,
            stall_window: self.stall_window,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisConfig {
    pub param: String,
    #[serde(rename = "half_width_GHz")]
    pub half_width: f64,
}

/// Dense grid the result is re-evaluated on after optimization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerificationConfig {
    pub n_points: usize,
    pub axes: Vec<AxisConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: String,
    pub model: ModelKind,
    pub plan: Plan,
    pub system: SystemConfig,
    pub pulse: PulseConfig,
    pub filter: Option<FilterConfig>,
    pub uncertainty: Vec<UncertaintyConfig>,
    pub optimizer: OptimizerConfig,
    pub verification: VerificationConfig,
    /// Only used by the time-sweep plan.
    #[serde(rename = "times_ns")]
    pub times: Vec<f64>,
    /// Keep the drive at the nominal qubit-1 frequency for every sample.
    pub fix_drive_to_nominal: bool,
    pub output_dir: PathBuf,
}

pub(crate) fn param_id(name: &str) -> Result<ParamId> {
    ParamId::parse(name)
        .ok_or_else(|| AppError::Config(format!("unknown parameter '{name}' (expected nu_a1 or nu_a2)")))
}

impl ScenarioConfig {
    /// Registered defaults for `id`, with `overrides` merged on top.
    pub fn from_value(overrides: Value) -> Result<Self> {
        let id = overrides
            .get("scenario")
            .and_then(Value::as_str)
            .ok_or_else(|| AppError::Config("missing string key 'scenario'".into()))?
            .to_owned();
        let mut merged = serde_json::to_value(scenario::defaults(&id)?)
            .map_err(|e| AppError::Config(e.to_string()))?;
        merge(&mut merged, overrides);
        let cfg: ScenarioConfig =
            serde_json::from_value(merged).map_err(|e| AppError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| AppError::Config(format!("invalid JSON: {e}")))?;
        Self::from_value(v)
    }

    /// Reads a config file; relative seed paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| AppError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text).map_err(|e| match e {
            AppError::Config(m) => AppError::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        if let (Some(file), Some(dir)) = (&cfg.pulse.seed.file, path.parent()) {
            if file.is_relative() {
                cfg.pulse.seed.file = Some(dir.join(file));
            }
        }
        if let Some(file) = &cfg.pulse.seed.file {
            if !file.exists() {
                return Err(AppError::Config(format!("seed pulse file {} does not exist", file.display())));
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !scenario::REGISTERED.contains(&self.scenario.as_str()) {
            return Err(scenario::unknown(&self.scenario));
        }
        let p = &self.pulse;
        if !(p.total_time > 0.0) || !p.total_time.is_finite() {
            return Err(AppError::Config("pulse.total_time_ns must be positive".into()));
        }
        p.n_pixels()?;
        let expected_q = match self.model {
            ModelKind::TwoLevel => 1,
            ModelKind::Multilevel => 2,
        };
        if p.quadratures != expected_q {
            return Err(AppError::Config(format!(
                "pulse.quadratures = {} but the {:?} model has {expected_q}",
                p.quadratures, self.model
            )));
        }
        if !(p.bound > 0.0) || !(p.seed.peak.abs() <= p.bound) || !(p.seed.ramp >= 0.0) {
            return Err(AppError::Config(
                "pulse: need bound_GHz > 0, |peak_GHz| <= bound_GHz and ramp_ns >= 0".into(),
            ));
        }
        if let Some(f) = &self.filter {
            f.spec().validate().map_err(|e| AppError::Config(format!("filter: {e}")))?;
        }
        self.uncertainty_spec()?.validate().map_err(|e| AppError::Config(format!("uncertainty: {e}")))?;
        self.optimizer
            .opt_config(p.bound)
            .validate()
            .map_err(|e| AppError::Config(format!("optimizer: {e}")))?;
        let v = &self.verification;
        if v.n_points == 0 || v.n_points % 2 == 0 || v.axes.len() > 2 {
            return Err(AppError::Config(
                "verification: n_points must be odd and at most two axes are allowed".into(),
            ));
        }
        for a in &v.axes {
            param_id(&a.param)?;
            if !(a.half_width >= 0.0) {
                return Err(AppError::Config("verification: half_width_GHz must be non-negative".into()));
            }
        }
        if self.plan == Plan::TimeSweep && self.model != ModelKind::Multilevel {
            return Err(AppError::Config("the time-sweep plan needs the multilevel model".into()));
        }
        if self.plan == Plan::TimeSweep && p.pixel_dt.is_none() {
            return Err(AppError::Config("the time-sweep plan needs pulse.pixel_dt_ns".into()));
        }
        if self.plan == Plan::UnfilteredThenFiltered && self.filter.is_none() {
            return Err(AppError::Config("the unfiltered_then_filtered plan needs a filter".into()));
        }
        if self.times.iter().any(|t| !(*t > 0.0)) {
            return Err(AppError::Config("times_ns entries must be positive".into()));
        }
        self.system.params().validate().map_err(|e| AppError::Config(format!("system: {e}")))?;
        Ok(())
    }

    pub fn uncertainty_spec(&self) -> Result<UncertaintySpec> {
        let mut entries = Vec::with_capacity(self.uncertainty.len());
        for u in &self.uncertainty {
            let param = param_id(&u.param)?;
            let center = u.center.unwrap_or_else(|| self.system.params().get(param));
            entries.push(Uncertainty { param, center, half_width: u.half_width, n_samples: u.n_samples });
        }
        Ok(UncertaintySpec::new(entries))
    }

    pub fn filter_spec(&self) -> Option<FilterSpec> {
        self.filter.map(|f| f.spec())
    }

    pub fn opt_config(&self) -> OptConfig {
        self.optimizer.opt_config(self.pulse.bound)
    }
}

/// Recursive object merge; anything that is not an object on both sides is replaced.
pub fn merge(base: &mut Value, overlay: Value) {
    match (base, overlay) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}
