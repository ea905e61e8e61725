//! Piecewise-constant pulses and the Gaussian hardware filter.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Default amplitude bound on each quadrature, GHz.
pub const DEFAULT_BOUND: f64 = 0.30;

/// Piecewise-constant control amplitudes c = ε/2π in GHz on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Pulse {
    pub total_time: f64,
    n_pixels: usize,
    quadratures: usize,
    /// Row-major quadratures × n_pixels.
    amps: Vec<f64>,
}

impl Pulse {
    pub fn new(total_time: f64, quadratures: usize, amps: Vec<f64>) -> Result<Self> {
        if !(total_time > 0.0) || !total_time.is_finite() {
            return Err(Error::InvalidInput(alloc::format!("total time {total_time} ns must be positive")));
        }
        if !(1..=2).contains(&quadratures) {
            return Err(Error::InvalidInput(alloc::format!("{quadratures} quadratures (need 1 or 2)")));
        }
        if amps.is_empty() || amps.len() % quadratures != 0 {
            return Err(Error::InvalidInput("amplitude count does not fill the quadratures".into()));
        }
        if amps.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidInput("non-finite pulse amplitude".into()));
        }
        Ok(Pulse { total_time, n_pixels: amps.len() / quadratures, quadratures, amps })
    }

    pub fn zeros(total_time: f64, n_pixels: usize, quadratures: usize) -> Result<Self> {
        Self::new(total_time, quadratures, vec![0.0; n_pixels * quadratures])
    }

    pub fn constant(total_time: f64, n_pixels: usize, value: f64) -> Result<Self> {
        Self::new(total_time, 1, vec![value; n_pixels])
    }

    #[inline]
    pub fn n_pixels(&self) -> usize {
        self.n_pixels
    }

    #[inline]
    pub fn quadratures(&self) -> usize {
        self.quadratures
    }

    /// Pixel width τ = T/N.
    #[inline]
    pub fn tau(&self) -> f64 {
        self.total_time / self.n_pixels as f64
    }

    #[inline]
    pub fn amp(&self, quadrature: usize, pixel: usize) -> f64 {
        self.amps[quadrature * self.n_pixels + pixel]
    }

    #[inline]
    pub fn set_amp(&mut self, quadrature: usize, pixel: usize, value: f64) {
        self.amps[quadrature * self.n_pixels + pixel] = value;
    }

    pub fn quadrature(&self, q: usize) -> &[f64] {
        &self.amps[q * self.n_pixels..(q + 1) * self.n_pixels]
    }

    /// Flattened control vector θ (quadrature-major).
    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.amps
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.amps
    }

    /// Same grid, new amplitudes.
    pub fn with_amps(&self, amps: Vec<f64>) -> Result<Self> {
        if amps.len() != self.amps.len() {
            return Err(Error::DimensionMismatch {
                expected: self.amps.len(),
                found: amps.len(),
                what: "pulse amplitudes",
            });
        }
        Pulse::new(self.total_time, self.quadratures, amps)
    }

    /// Pads with a zero second quadrature (or keeps the first only).
    pub fn with_quadratures(&self, quadratures: usize) -> Result<Self> {
        let mut amps = self.quadrature(0).to_vec();
        if quadratures == 2 {
            amps.extend(if self.quadratures == 2 {
                self.quadrature(1).to_vec()
            } else {
                vec![0.0; self.n_pixels]
            });
        }
        Pulse::new(self.total_time, quadratures, amps)
    }

    /// Start time of each pixel, ns.
    pub fn pixel_start(&self, k: usize) -> f64 {
        k as f64 * self.tau()
    }

    pub fn max_abs(&self) -> f64 {
        self.amps.iter().fold(0.0, |m, a| m.max(a.abs()))
    }

    /// Projects every amplitude onto [−bound, bound].
    pub fn clamp(&mut self, bound: f64) {
        for a in self.amps.iter_mut() {
            *a = a.clamp(-bound, bound);
        }
    }
}

/// round(T/dt) pixels (at least one); the pixel width is then T/N exactly.
pub fn pixels_for(total_time: f64, pixel_dt: f64) -> usize {
    libm::round(total_time / pixel_dt).max(1.0) as usize
}

/// Gaussian turn-on, flat top at `peak`, mirrored Gaussian turn-off.
///
/// The ramp is exp(−(t − t_ramp)²/2σ²) with σ = ramp_pixels·τ/2, sampled at
/// pixel centres, where t_ramp is the end of the ramp.
pub fn flat_top_gaussian(
    n_pixels: usize,
    total_time: f64,
    peak: f64,
    ramp_pixels: usize,
) -> Result<Pulse> {
    if n_pixels == 0 || 2 * ramp_pixels > n_pixels {
        return Err(Error::InvalidInput(alloc::format!(
            "ramp of {ramp_pixels} pixels does not fit twice into {n_pixels} pixels"
        )));
    }
    let tau = total_time / n_pixels as f64;
    let sigma = ramp_pixels as f64 * tau / 2.0;
    let ramp_end = ramp_pixels as f64 * tau;
    let mut amps = vec![peak; n_pixels];
    for k in 0..ramp_pixels {
        let t = (k as f64 + 0.5) * tau;
        let v = peak * libm::exp(-(t - ramp_end) * (t - ramp_end) / (2.0 * sigma * sigma));
        amps[k] = v;
        amps[n_pixels - 1 - k] = v;
    }
    Pulse::new(total_time, 1, amps)
}

/// Gaussian low-pass filter: σ in ns and `oversample` fine pixels per pixel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSpec {
    pub sigma: f64,
    pub oversample: usize,
}

impl Default for FilterSpec {
    fn default() -> Self {
        FilterSpec { sigma: 1.0, oversample: 5 }
    }
}

impl FilterSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(Error::InvalidInput(alloc::format!("filter sigma {} ns", self.sigma)));
        }
        if self.oversample == 0 {
            return Err(Error::InvalidInput("filter oversample must be at least 1".into()));
        }
        Ok(())
    }

    /// Dense transfer matrix for a pulse of `n_pixels` over `total_time`.
    pub fn transfer(&self, n_pixels: usize, total_time: f64) -> Result<TransferMatrix> {
        self.validate()?;
        let m = self.oversample;
        let n_fine = n_pixels * m;
        let tau = total_time / n_pixels as f64;
        let fine_tau = tau / m as f64;
        let scale = core::f64::consts::SQRT_2 * self.sigma;
        let mut data = vec![0.0; n_fine * n_pixels];
        for l in 0..n_fine {
            let t_l = (l as f64 + 0.5) * fine_tau;
            for k in 0..n_pixels {
                let (lo, hi) = (k as f64 * tau - t_l, (k + 1) as f64 * tau - t_l);
                data[l * n_pixels + k] = if self.sigma == 0.0 {
                    if lo < 0.0 && hi > 0.0 { 1.0 } else { 0.0 }
                } else {
                    0.5 * (libm::erf(hi / scale) - libm::erf(lo / scale))
                };
            }
        }
        Ok(TransferMatrix { rows: n_fine, cols: n_pixels, oversample: m, data })
    }
}

/// s_l = Σ_k T_{l,k} c_k from coarse pixels to fine pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrix {
    pub rows: usize,
    pub cols: usize,
    pub oversample: usize,
    data: Vec<f64>,
}

impl TransferMatrix {
    #[inline]
    pub fn get(&self, l: usize, k: usize) -> f64 {
        self.data[l * self.cols + k]
    }

    pub fn row_sum(&self, l: usize) -> f64 {
        self.data[l * self.cols..(l + 1) * self.cols].iter().sum()
    }

    pub fn apply(&self, coarse: &[f64]) -> Vec<f64> {
        assert_eq!(coarse.len(), self.cols);
        (0..self.rows)
            .map(|l| self.data[l * self.cols..(l + 1) * self.cols].iter().zip(coarse).map(|(t, c)| t * c).sum())
            .collect()
    }

    /// Tᵀ·fine, used to pull gradients back onto the coarse pixels.
    pub fn apply_transpose(&self, fine: &[f64]) -> Vec<f64> {
        assert_eq!(fine.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (l, &f) in fine.iter().enumerate() {
            for (o, t) in out.iter_mut().zip(&self.data[l * self.cols..(l + 1) * self.cols]) {
                *o += t * f;
            }
        }
        out
    }

    pub fn filter_pulse(&self, p: &Pulse) -> Result<Pulse> {
        if p.n_pixels() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: p.n_pixels(),
                what: "filter input pixels",
            });
        }
        let mut amps = Vec::with_capacity(self.rows * p.quadratures());
        for q in 0..p.quadratures() {
            amps.extend(self.apply(p.quadrature(q)));
        }
        Pulse::new(p.total_time, p.quadratures(), amps)
    }
}

/// Filtered pulse on the fine grid (n_pixels·m pixels, same total time).
pub fn apply_filter(p: &Pulse, f: &FilterSpec) -> Result<Pulse> {
    f.transfer(p.n_pixels(), p.total_time)?.filter_pulse(p)
}

/// Outcome of an amplitude-bound check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClampReport {
    pub within_bounds: bool,
    /// Offending (quadrature, pixel) pairs.
    pub violations: Vec<(usize, usize)>,
}

/// Closed-interval check |amp| ≤ bound on every pixel.
pub fn clamp_check(p: &Pulse, bound: f64) -> ClampReport {
    let mut violations = Vec::new();
    for q in 0..p.quadratures() {
        for (k, a) in p.quadrature(q).iter().enumerate() {
            if a.abs() > bound {
                violations.push((q, k));
            }
        }
    }
    ClampReport { within_bounds: violations.is_empty(), violations }
}
