//! Dense two-phase simplex for bounded variables.
//!
//! Solves  max cᵀx  subject to  Ax ≤ b,  0 ≤ x ≤ u  (u may be +∞).

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

const PIVOT_TOL: f64 = 1e-11;
const COST_TOL: f64 = 1e-12;
/// Consecutive degenerate pivots before switching to Bland's rule.
const BLAND_AFTER: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    /// Row-major constraint rows, each of length `objective.len()`.
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub pivots: usize,
}

struct Tableau {
    m: usize,
    n: usize,
    /// m × n, equal to B⁻¹A
    t: Vec<f64>,
    /// Current values of the basic variables.
    beta: Vec<f64>,
    basis: Vec<usize>,
    upper: Vec<f64>,
    at_upper: Vec<bool>,
    is_basic: Vec<bool>,
    pivots: usize,
    max_pivots: usize,
}

impl Tableau {
    fn value(&self, j: usize) -> f64 {
        if self.at_upper[j] { self.upper[j] } else { 0.0 }
    }

    fn reduced_costs(&self, c: &[f64]) -> Vec<f64> {
        let mut d = c.to_vec();
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = c[b];
            if cb != 0.0 {
                for (dj, tij) in d.iter_mut().zip(&self.t[i * self.n..(i + 1) * self.n]) {
                    *dj -= cb * tij;
                }
            }
        }
        d
    }

    fn pivot(&mut self, r: usize, e: usize) {
        let n = self.n;
        let p = self.t[r * n + e];
        for v in &mut self.t[r * n..(r + 1) * n] {
            *v /= p;
        }
        let row: Vec<f64> = self.t[r * n..(r + 1) * n].to_vec();
        for i in 0..self.m {
            if i != r {
                let f = self.t[i * n + e];
                if f != 0.0 {
                    for (v, rv) in self.t[i * n..(i + 1) * n].iter_mut().zip(&row) {
                        *v -= f * rv;
                    }
                }
            }
        }
    }

    /// Maximizes cᵀx from the current basic feasible point.
    fn optimize(&mut self, c: &[f64]) -> Result<()> {
        let mut degenerate = 0usize;
        loop {
            if self.pivots >= self.max_pivots {
                return Err(Error::SimplexIterationLimit(self.pivots));
            }
            let d = self.reduced_costs(c);
            let bland = degenerate >= BLAND_AFTER;
            let mut entering: Option<(usize, f64)> = None;
            for j in 0..self.n {
                if self.is_basic[j] || self.upper[j] == 0.0 {
                    continue;
                }
                let gain = if self.at_upper[j] { -d[j] } else { d[j] };
                if gain > COST_TOL {
                    if bland {
                        entering = Some((j, gain));
                        break;
                    }
                    if entering.map_or(true, |(_, g)| gain > g) {
                        entering = Some((j, gain));
                    }
                }
            }
            let Some((e, _)) = entering else { return Ok(()) };
            let dir = if self.at_upper[e] { -1.0 } else { 1.0 };

            // Ratio test: x_e moves by dir·Δ, basic i moves by −dir·t_ie·Δ.
            let mut step = self.upper[e];
            let mut leave: Option<(usize, bool)> = None;
            for i in 0..self.m {
                let delta = dir * self.t[i * self.n + e];
                let b = self.basis[i];
                let limit = if delta > PIVOT_TOL {
                    self.beta[i].max(0.0) / delta
                } else if delta < -PIVOT_TOL && self.upper[b].is_finite() {
                    (self.upper[b] - self.beta[i]).max(0.0) / -delta
                } else {
                    continue;
                };
                let better = match leave {
                    None => limit < step,
                    Some((r, _)) => {
                        limit < step || (limit == step && bland && self.basis[i] < self.basis[r])
                    }
                };
                if better {
                    step = limit;
                    leave = Some((i, delta < 0.0));
                }
            }
            if step.is_infinite() {
                return Err(Error::Unbounded);
            }
            degenerate = if step == 0.0 { degenerate + 1 } else { 0 };
            self.pivots += 1;
            for i in 0..self.m {
                self.beta[i] -= dir * self.t[i * self.n + e] * step;
            }
            match leave {
                None => self.at_upper[e] = !self.at_upper[e],
                Some((r, to_upper)) => {
                    let entering_value = self.value(e) + dir * step;
                    let out = self.basis[r];
                    self.pivot(r, e);
                    self.is_basic[out] = false;
                    self.at_upper[out] = to_upper;
                    self.is_basic[e] = true;
                    self.at_upper[e] = false;
                    self.basis[r] = e;
                    self.beta[r] = entering_value;
                }
            }
        }
    }
}

/// Two-phase bounded-variable simplex with Dantzig pricing (lowest index on
/// ties) and Bland's rule after repeated degenerate pivots.
pub fn solve(lp: &LinearProgram) -> Result<LpSolution> {
    let nv = lp.objective.len();
    let m = lp.rows.len();
    if lp.rhs.len() != m {
        return Err(Error::DimensionMismatch { expected: m, found: lp.rhs.len(), what: "LP right-hand side" });
    }
    if lp.upper.len() != nv {
        return Err(Error::DimensionMismatch { expected: nv, found: lp.upper.len(), what: "LP bounds" });
    }
    for row in &lp.rows {
        if row.len() != nv {
            return Err(Error::DimensionMismatch { expected: nv, found: row.len(), what: "LP row" });
        }
    }
    let finite = |x: &f64| x.is_finite();
    if !lp.objective.iter().all(finite)
        || !lp.rhs.iter().all(finite)
        || !lp.rows.iter().flatten().all(finite)
        || lp.upper.iter().any(|u| u.is_nan() || *u < 0.0)
    {
        return Err(Error::InvalidInput("LP data must be finite with non-negative bounds".into()));
    }

    // Columns: structural | slacks | artificials (for negative right-hand sides).
    let negative: Vec<usize> = (0..m).filter(|&i| lp.rhs[i] < 0.0).collect();
    let n = nv + m + negative.len();
    let mut t = vec![0.0; m * n];
    let mut beta = vec![0.0; m];
    let mut basis = vec![0; m];
    let mut upper = lp.upper.clone();
    upper.extend(core::iter::repeat(f64::INFINITY).take(m + negative.len()));
    let mut art = 0;
    for i in 0..m {
        let sign = if lp.rhs[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..nv {
            t[i * n + j] = sign * lp.rows[i][j];
        }
        t[i * n + nv + i] = sign;
        beta[i] = sign * lp.rhs[i];
        if sign < 0.0 {
            t[i * n + nv + m + art] = 1.0;
            basis[i] = nv + m + art;
            art += 1;
        } else {
            basis[i] = nv + i;
        }
    }
    let mut is_basic = vec![false; n];
    for &b in &basis {
        is_basic[b] = true;
    }
    let mut tab = Tableau {
        m,
        n,
        t,
        beta,
        basis,
        upper,
        at_upper: vec![false; n],
        is_basic,
        pivots: 0,
        max_pivots: 50 * (m + n).max(10),
    };

    if !negative.is_empty() {
        let mut c1 = vec![0.0; n];
        for c in &mut c1[nv + m..] {
            *c = -1.0;
        }
        tab.optimize(&c1)?;
        let infeasibility: f64 =
            (0..m).filter(|&i| tab.basis[i] >= nv + m).map(|i| tab.beta[i]).sum();
        let scale = 1.0 + lp.rhs.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        if infeasibility > 1e-9 * scale {
            return Err(Error::Infeasible);
        }
        // Artificials are pinned at zero for phase two.
        for u in &mut tab.upper[nv + m..] {
            *u = 0.0;
        }
    }

    let mut c2 = lp.objective.clone();
    c2.resize(n, 0.0);
    tab.optimize(&c2)?;

    let mut x: Vec<f64> = (0..nv).map(|j| tab.value(j)).collect();
    for (i, &b) in tab.basis.iter().enumerate() {
        if b < nv {
            x[b] = tab.beta[i];
        }
    }
    for (xj, &u) in x.iter_mut().zip(&lp.upper) {
        *xj = xj.clamp(0.0, u);
    }
    let objective = x.iter().zip(&lp.objective).map(|(a, b)| a * b).sum();
    Ok(LpSolution { x, objective, pivots: tab.pivots })
}
