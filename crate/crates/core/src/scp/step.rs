//! Linearized worst-case step inside an ∞-norm trust region.

use alloc::vec;
use alloc::vec::Vec;

use super::simplex::{solve, LinearProgram};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub increment: Vec<f64>,
    /// Predicted worst case minᵢ(Fᵢ + gᵢᵀθ̃).
    pub predicted: f64,
}

/// Solves  max t  s.t.  t ≤ Fᵢ + gᵢᵀθ̃,  ‖θ̃‖_∞ ≤ ρ,  −bound ≤ θ + θ̃ ≤ bound.
///
/// θ̃ is split as x⁺ − x⁻ and t as min F + u, so the origin is a basic
/// feasible point of the resulting program.
pub fn maximin_step(
    fidelities: &[f64],
    grads: &[Vec<f64>],
    current: &[f64],
    bound: f64,
    trust_radius: f64,
) -> Result<Step> {
    if fidelities.is_empty() || fidelities.len() != grads.len() {
        return Err(Error::DimensionMismatch {
            expected: fidelities.len().max(1),
            found: grads.len(),
            what: "maximin gradients",
        });
    }
    let p = current.len();
    for g in grads {
        if g.len() != p {
            return Err(Error::DimensionMismatch { expected: p, found: g.len(), what: "maximin gradient length" });
        }
    }
    if !(trust_radius >= 0.0) || !(bound >= 0.0) {
        return Err(Error::InvalidInput("trust radius and bound must be non-negative".into()));
    }
    let f_min = fidelities.iter().copied().fold(f64::INFINITY, f64::min);
    let lo: Vec<f64> = current.iter().map(|&c| (-trust_radius).max(-bound - c).min(0.0)).collect();
    let hi: Vec<f64> = current.iter().map(|&c| trust_radius.min(bound - c).max(0.0)).collect();
    if trust_radius == 0.0 || (lo.iter().all(|&l| l == 0.0) && hi.iter().all(|&h| h == 0.0)) {
        return Ok(Step { increment: vec![0.0; p], predicted: f_min });
    }

    // Variables: u, x⁺ (p), x⁻ (p).
    let n = 1 + 2 * p;
    let mut objective = vec![0.0; n];
    objective[0] = 1.0;
    let mut upper = vec![f64::INFINITY; n];
    upper[1..=p].copy_from_slice(&hi);
    for (u, l) in upper[1 + p..].iter_mut().zip(&lo) {
        *u = -l;
    }
    let mut rows = Vec::with_capacity(grads.len());
    let mut rhs = Vec::with_capacity(grads.len());
    for (g, &f) in grads.iter().zip(fidelities) {
        let mut row = vec![0.0; n];
        row[0] = 1.0;
        for k in 0..p {
            row[1 + k] = -g[k];
            row[1 + p + k] = g[k];
        }
        rows.push(row);
        rhs.push(f - f_min);
    }
    let sol = solve(&LinearProgram { objective, rows, rhs, upper })?;
    let increment: Vec<f64> =
        (0..p).map(|k| (sol.x[1 + k] - sol.x[1 + p + k]).clamp(lo[k], hi[k])).collect();
    let predicted = grads
        .iter()
        .zip(fidelities)
        .map(|(g, &f)| f + g.iter().zip(&increment).map(|(a, b)| a * b).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    Ok(Step { increment, predicted })
}
