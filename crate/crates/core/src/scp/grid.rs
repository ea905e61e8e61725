//! Deterministic sampling of parameter-uncertainty ranges.

use alloc::vec;
use alloc::vec::Vec;

use crate::model::{ParamId, SystemParams};
use crate::{Error, Result};

/// One uncertain parameter sampled on a uniform inclusive grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Uncertainty {
    pub param: ParamId,
    /// GHz
    pub center: f64,
    /// GHz
    pub half_width: f64,
    /// Odd; the center is always a sample.
    pub n_samples: usize,
}

impl Uncertainty {
    pub fn validate(&self) -> Result<()> {
        if !(self.half_width >= 0.0) || !self.half_width.is_finite() || !self.center.is_finite() {
            return Err(Error::InvalidInput(alloc::format!(
                "{}: center {} ± {} GHz is not a valid range",
                self.param,
                self.center,
                self.half_width
            )));
        }
        if self.n_samples == 0 || self.n_samples % 2 == 0 {
            return Err(Error::InvalidInput(alloc::format!(
                "{}: n_samples = {} must be odd",
                self.param,
                self.n_samples
            )));
        }
        Ok(())
    }

    /// center + half_width·(2i/(n−1) − 1), i = 0..n.
    pub fn values(&self) -> Vec<f64> {
        let n = self.n_samples;
        if n == 1 {
            return vec![self.center];
        }
        let mid = (n - 1) / 2;
        (0..n)
            .map(|i| {
                if i == mid {
                    self.center
                } else {
                    self.center + self.half_width * (i as f64 - mid as f64) / mid as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct UncertaintySpec {
    pub entries: Vec<Uncertainty>,
}

impl UncertaintySpec {
    pub fn new(entries: Vec<Uncertainty>) -> Self {
        UncertaintySpec { entries }
    }

    pub fn validate(&self) -> Result<()> {
        for (i, e) in self.entries.iter().enumerate() {
            e.validate()?;
            if self.entries[..i].iter().any(|o| o.param == e.param) {
                return Err(Error::InvalidInput(alloc::format!("{} listed twice", e.param)));
            }
        }
        Ok(())
    }
}

/// Cartesian product of the sampled parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleGrid {
    pub points: Vec<SystemParams>,
    /// Uncertain parameter values of each point, in spec order.
    pub coords: Vec<Vec<f64>>,
    pub params: Vec<ParamId>,
    pub nominal: usize,
}

impl SampleGrid {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Single-point grid at `base`.
    pub fn single(base: SystemParams) -> Self {
        SampleGrid { points: vec![base], coords: vec![Vec::new()], params: Vec::new(), nominal: 0 }
    }
}

/// Lexicographic product: the first parameter varies slowest.
pub fn sample_grid(spec: &UncertaintySpec, base: &SystemParams) -> Result<SampleGrid> {
    spec.validate()?;
    let axes: Vec<Vec<f64>> = spec.entries.iter().map(Uncertainty::values).collect();
    let total: usize = axes.iter().map(Vec::len).product();
    let mut points = Vec::with_capacity(total);
    let mut coords = Vec::with_capacity(total);
    let mut nominal = 0;
    for flat in 0..total {
        let mut rem = flat;
        let mut idx = vec![0; axes.len()];
        for a in (0..axes.len()).rev() {
            idx[a] = rem % axes[a].len();
            rem /= axes[a].len();
        }
        let mut p = *base;
        let mut c = Vec::with_capacity(axes.len());
        for (a, e) in spec.entries.iter().enumerate() {
            p.set(e.param, axes[a][idx[a]]);
            c.push(axes[a][idx[a]]);
        }
        if idx.iter().zip(&axes).all(|(&i, ax)| i == (ax.len() - 1) / 2) {
            nominal = flat;
        }
        points.push(p);
        coords.push(c);
    }
    Ok(SampleGrid { points, coords, params: spec.entries.iter().map(|e| e.param).collect(), nominal })
}
