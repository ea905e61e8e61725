use alloc::vec::Vec;
use core::fmt;

use crate::{Error, Result};

/// Physical parameters, all as linear frequencies ν = ω/2π in GHz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub nu_r: f64,
    pub nu_a1: f64,
    pub nu_a2: f64,
    pub g1: f64,
    pub g2: f64,
    /// Transmon anharmonicities (negative for transmons).
    pub delta1: f64,
    pub delta2: f64,
    /// Drive frequency; derived from the model when `None`.
    pub nu_d: Option<f64>,
    pub n_transmon: usize,
    pub n_cavity: usize,
}

impl Default for SystemParams {
    /// The device used throughout: a 6.44 GHz cavity with qubits at 4.50 and
    /// 4.85 GHz.
    fn default() -> Self {
        SystemParams {
            nu_r: 6.44,
            nu_a1: 4.50,
            nu_a2: 4.85,
            g1: 0.133,
            g2: 0.133,
            delta1: -0.160,
            delta2: -0.170,
            nu_d: None,
            n_transmon: 4,
            n_cavity: 5,
        }
    }
}

/// Parameters that may carry an uncertainty range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ParamId {
    NuA1,
    NuA2,
}

impl ParamId {
    pub fn name(self) -> &'static str {
        match self {
            ParamId::NuA1 => "nu_a1",
            ParamId::NuA2 => "nu_a2",
        }
    }

    pub fn parse(s: &str) -> Option<ParamId> {
        match s {
            "nu_a1" => Some(ParamId::NuA1),
            "nu_a2" => Some(ParamId::NuA2),
            _ => None,
        }
    }
}

impl fmt::Display for ParamId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Non-fatal modelling diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    /// g/|Δ| above the dispersive threshold for the given qubit.
    WeakDispersion { qubit: usize, ratio: f64 },
    /// Drive too far from the cavity for the rotating-wave approximation.
    RwaValidity { ratio: f64 },
    /// |J/Δ₁₂| not small.
    StrongExchange { ratio: f64 },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::WeakDispersion { qubit, ratio } => {
                write!(f, "qubit {qubit}: g/|Δ| = {ratio:.3} exceeds the dispersive threshold 0.2")
            }
            Warning::RwaValidity { ratio } => {
                write!(f, "|ν_d − ν_r|/ν_d = {ratio:.3}; rotating-wave approximation is doubtful")
            }
            Warning::StrongExchange { ratio } => write!(f, "|J/Δ₁₂| = {ratio:.3} is not small"),
        }
    }
}

pub const DISPERSIVE_THRESHOLD: f64 = 0.2;

impl SystemParams {
    pub fn get(&self, id: ParamId) -> f64 {
        match id {
            ParamId::NuA1 => self.nu_a1,
            ParamId::NuA2 => self.nu_a2,
        }
    }

    pub fn set(&mut self, id: ParamId, value: f64) {
        match id {
            ParamId::NuA1 => self.nu_a1 = value,
            ParamId::NuA2 => self.nu_a2 = value,
        }
    }

    /// Hard checks plus dispersive-regime warnings.
    pub fn validate(&self) -> Result<Vec<Warning>> {
        if self.n_transmon < 2 {
            return Err(Error::InvalidInput(alloc::format!(
                "n_transmon must be at least 2 (got {})",
                self.n_transmon
            )));
        }
        if self.n_cavity < 1 {
            return Err(Error::InvalidInput("n_cavity must be at least 1".into()));
        }
        let all = [self.nu_r, self.nu_a1, self.nu_a2, self.g1, self.g2, self.delta1, self.delta2];
        if all.iter().any(|x| !x.is_finite()) || self.nu_d.is_some_and(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite system parameter".into()));
        }
        let mut warnings = Vec::new();
        for (qubit, g, nu) in [(1, self.g1, self.nu_a1), (2, self.g2, self.nu_a2)] {
            let detuning = (nu - self.nu_r).abs();
            let ratio = if detuning == 0.0 { f64::INFINITY } else { g.abs() / detuning };
            if ratio > DISPERSIVE_THRESHOLD {
                warnings.push(Warning::WeakDispersion { qubit, ratio });
            }
        }
        Ok(warnings)
    }
}

/// Derived quantities of the effective two-qubit cross-resonance model (GHz).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveParams {
    /// ν_aj − ν_r
    pub detuning1: f64,
    pub detuning2: f64,
    /// Cavity-mediated exchange coupling.
    pub j: f64,
    /// ν′_a1 − ν′_a2
    pub delta12: f64,
    /// Cavity-shifted (empty-cavity) qubit frequencies.
    pub nu_shifted_a1: f64,
    pub nu_shifted_a2: f64,
    /// Frequencies after the exchange shift as well.
    pub nu_tilde_a1: f64,
    pub nu_tilde_a2: f64,
    /// The drive frequency these were evaluated at.
    pub nu_d: f64,
    /// 2g_j/(ν_r − ν_d)
    pub drive_prefactor1: f64,
    pub drive_prefactor2: f64,
}

impl EffectiveParams {
    pub fn exchange_ratio(&self) -> f64 {
        self.j / self.delta12
    }
}

/// Dispersive and Schrieffer–Wolff effective parameters, with the cavity
/// photon number set to zero. Uses `p.nu_d` when given, otherwise drives at
/// the fully shifted qubit-1 frequency.
pub fn effective_params(p: &SystemParams) -> Result<EffectiveParams> {
    let detuning1 = p.nu_a1 - p.nu_r;
    let detuning2 = p.nu_a2 - p.nu_r;
    if detuning1 == 0.0 {
        return Err(Error::ZeroDetuning("qubit 1 is resonant with the cavity (Δ₁ = 0)"));
    }
    if detuning2 == 0.0 {
        return Err(Error::ZeroDetuning("qubit 2 is resonant with the cavity (Δ₂ = 0)"));
    }
    let j = p.g1 * p.g2 * (detuning1 + detuning2) / (2.0 * detuning1 * detuning2);
    let nu_shifted_a1 = p.nu_a1 + p.g1 * p.g1 / detuning1;
    let nu_shifted_a2 = p.nu_a2 + p.g2 * p.g2 / detuning2;
    let delta12 = nu_shifted_a1 - nu_shifted_a2;
    if delta12 == 0.0 {
        return Err(Error::ZeroDetuning("shifted qubits are degenerate (Δ₁₂ = 0)"));
    }
    let exchange_shift = j * j / delta12;
    let nu_tilde_a1 = nu_shifted_a1 + exchange_shift;
    let nu_tilde_a2 = nu_shifted_a2 - exchange_shift;
    let nu_d = p.nu_d.unwrap_or(nu_tilde_a1);
    let cavity_drive_detuning = p.nu_r - nu_d;
    if cavity_drive_detuning == 0.0 {
        return Err(Error::ZeroDetuning("drive is resonant with the cavity (ν_r = ν_d)"));
    }
    Ok(EffectiveParams {
        detuning1,
        detuning2,
        j,
        delta12,
        nu_shifted_a1,
        nu_shifted_a2,
        nu_tilde_a1,
        nu_tilde_a2,
        nu_d,
        drive_prefactor1: 2.0 * p.g1 / cavity_drive_detuning,
        drive_prefactor2: 2.0 * p.g2 / cavity_drive_detuning,
    })
}
