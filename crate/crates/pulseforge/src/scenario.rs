//! Registered scenarios and their default configurations.

use std::path::PathBuf;

use pulseforge_core::model::SystemParams;
use pulseforge_core::pulse::DEFAULT_BOUND;

use crate::config::{
    AxisConfig, FilterConfig, ModelKind, OptimizerConfig, Plan, PulseConfig, ScenarioConfig, SeedConfig,
    UncertaintyConfig, VerificationConfig,
};
use crate::error::AppError;

pub const REGISTERED: [&str; 9] = [
    "two_level_nominal",
    "two_level_100px",
    "two_level_filtered_reopt",
    "two_level_robust_1d",
    "two_level_robust_2d",
    "multilevel_time_sweep",
    "multilevel_nominal",
    "multilevel_robust_1d",
    "multilevel_robust_2d",
];

pub const MAX_ITERATIONS: usize = 500;

/// GHz
pub const NU_A2_HALF_WIDTH: f64 = 0.05;
pub const NU_A1_HALF_WIDTH: f64 = 0.005;

pub(crate) fn unknown(id: &str) -> AppError {
    AppError::Config(format!("unknown scenario '{id}'; registered: {}", REGISTERED.join(", ")))
}

fn axis(param: &str, half_width: f64) -> AxisConfig {
    AxisConfig { param: param.into(), half_width }
}

fn samples(param: &str, half_width: f64, n_samples: usize) -> UncertaintyConfig {
    UncertaintyConfig { param: param.into(), center: None, half_width, n_samples }
}

fn two_level(id: &str, n_pixels: usize) -> ScenarioConfig {
    ScenarioConfig {
        scenario: id.into(),
        model: ModelKind::TwoLevel,
        plan: Plan::Single,
        system: SystemParams::default().into(),
        pulse: PulseConfig {
            total_time: 200.0,
            n_pixels: Some(n_pixels),
            pixel_dt: None,
            quadratures: 1,
            bound: DEFAULT_BOUND,
            seed: SeedConfig { peak: 0.25, ramp: 87.5, file: None },
        },
        filter: None,
        uncertainty: Vec::new(),
        optimizer: OptimizerConfig::with_max_iterations(MAX_ITERATIONS),
        verification: VerificationConfig { n_points: 11, axes: vec![axis("nu_a2", NU_A2_HALF_WIDTH)] },
        times: Vec::new(),
        fix_drive_to_nominal: true,
        output_dir: PathBuf::from("results"),
    }
}

fn multilevel(id: &str, total_time: f64) -> ScenarioConfig {
    ScenarioConfig {
        model: ModelKind::Multilevel,
        pulse: PulseConfig {
            total_time,
            n_pixels: None,
            pixel_dt: Some(2.0),
            quadratures: 2,
            bound: DEFAULT_BOUND,
            seed: SeedConfig { peak: 0.25, ramp: 20.0, file: None },
        },
        ..two_level(id, 1)
    }
}

/// Default configuration of a registered scenario.
pub fn defaults(id: &str) -> Result<ScenarioConfig, AppError> {
    let one_d = || vec![samples("nu_a2", NU_A2_HALF_WIDTH, 11)];
    let two_d = || vec![samples("nu_a2", NU_A2_HALF_WIDTH, 5), samples("nu_a1", NU_A1_HALF_WIDTH, 5)];
    let two_d_axes = || vec![axis("nu_a2", NU_A2_HALF_WIDTH), axis("nu_a1", NU_A1_HALF_WIDTH)];
    let cfg = match id {
        "two_level_nominal" => two_level(id, 16),
        "two_level_100px" => two_level(id, 100),
        "two_level_filtered_reopt" => ScenarioConfig {
            plan: Plan::UnfilteredThenFiltered,
            filter: Some(FilterConfig::default()),
            ..two_level(id, 16)
        },
        "two_level_robust_1d" => ScenarioConfig { uncertainty: one_d(), ..two_level(id, 100) },
        "two_level_robust_2d" => {
            let mut c = ScenarioConfig {
                filter: Some(FilterConfig::default()),
                uncertainty: two_d(),
                ..two_level(id, 100)
            };
            c.verification.axes = two_d_axes();
            c
        }
        "multilevel_time_sweep" => {
            ScenarioConfig { plan: Plan::TimeSweep, times: vec![50.0, 100.0, 150.0, 200.0], ..multilevel(id, 200.0) }
        }
        "multilevel_nominal" => multilevel(id, 199.0),
        "multilevel_robust_1d" => ScenarioConfig { uncertainty: one_d(), ..multilevel(id, 199.0) },
        "multilevel_robust_2d" => {
            let mut c = ScenarioConfig { uncertainty: two_d(), ..multilevel(id, 199.0) };
            c.verification.axes = two_d_axes();
            c
        }
        _ => return Err(unknown(id)),
    };
    Ok(cfg)
}
