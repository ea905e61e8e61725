//! Unitary propagators U = exp(−iHτ) and their exact derivatives.

use alloc::vec;
use alloc::vec::Vec;

use super::eig::{eig_hermitian, HermitianEigen};
use super::operator::matmul_into;
use super::Operator;
use crate::{Error, Result, C64};

/// Eigenvalue gaps below this use the coincident-eigenvalue limit of the
/// divided difference.
pub const DEGENERACY_GAP: f64 = 1e-9;

/// exp(−iHτ) held in the eigenbasis of H, so that derivatives with respect to
/// any perturbation of H are available without another decomposition.
#[derive(Debug, Clone)]
pub struct SpectralPropagator {
    pub eigen: HermitianEigen,
    pub tau: f64,
    /// e^{−iλ_k τ}
    pub phases: Vec<C64>,
}

impl SpectralPropagator {
    pub fn new(h: &Operator, tau: f64) -> Result<Self> {
        let eigen = eig_hermitian(h)?;
        let phases = eigen.values.iter().map(|&l| cis(-l * tau)).collect();
        Ok(SpectralPropagator { eigen, tau, phases })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.phases.len()
    }

    #[inline]
    pub fn vectors(&self) -> &Operator {
        &self.eigen.vectors
    }

    pub fn unitary(&self) -> Operator {
        let tau = self.tau;
        self.eigen.reconstruct_with(|l| cis(-l * tau))
    }

    /// Divided difference of λ ↦ e^{−iλτ} at (λ_m, λ_n).
    #[inline]
    pub fn gamma(&self, m: usize, n: usize) -> C64 {
        divided_difference(self.eigen.values[m], self.eigen.values[n], self.tau)
    }

    /// V†·op·V.
    pub fn to_eigenbasis(&self, op: &Operator) -> Operator {
        let v = self.vectors();
        v.adjoint().matmul(op).matmul(v)
    }

    /// ∂U/∂c for H → H + c·h_c, evaluated at c = 0.
    pub fn derivative(&self, h_c: &Operator) -> Operator {
        let n = self.dim();
        let mut k = self.to_eigenbasis(h_c);
        for m in 0..n {
            for j in 0..n {
                k[(m, j)] *= self.gamma(m, j);
            }
        }
        let v = self.vectors();
        v.matmul(&k).matmul(&v.adjoint())
    }

    /// Applies U to the `cols` columns of the row-major n×cols block `x`.
    pub fn apply_block(&self, x: &[C64], cols: usize) -> Vec<C64> {
        let n = self.dim();
        let v = self.vectors().as_slice();
        let vh = self.vectors().adjoint();
        let mut tmp = vec![C64::new(0.0, 0.0); n * cols];
        matmul_into(vh.as_slice(), x, &mut tmp, n, n, cols);
        for (r, ph) in self.phases.iter().enumerate() {
            for z in &mut tmp[r * cols..(r + 1) * cols] {
                *z *= ph;
            }
        }
        let mut out = vec![C64::new(0.0, 0.0); n * cols];
        matmul_into(v, &tmp, &mut out, n, n, cols);
        out
    }

    /// Right-multiplies the row-major rows×n block `y` by U.
    pub fn right_apply_block(&self, y: &[C64], rows: usize) -> Vec<C64> {
        let n = self.dim();
        let v = self.vectors();
        let mut tmp = vec![C64::new(0.0, 0.0); rows * n];
        matmul_into(y, v.as_slice(), &mut tmp, rows, n, n);
        for r in 0..rows {
            for (z, ph) in tmp[r * n..(r + 1) * n].iter_mut().zip(&self.phases) {
                *z *= ph;
            }
        }
        let vh = v.adjoint();
        let mut out = vec![C64::new(0.0, 0.0); rows * n];
        matmul_into(&tmp, vh.as_slice(), &mut out, rows, n, n);
        out
    }
}

#[inline]
fn cis(theta: f64) -> C64 {
    let (s, c) = libm::sincos(theta);
    C64::new(c, s)
}

/// (e^{−iaτ} − e^{−ibτ})/(a − b), written as e^{−i(a+b)τ/2}·(−2i sin((a−b)τ/2))/(a − b)
/// to avoid cancellation; gaps under [`DEGENERACY_GAP`] take the limit −iτe^{−iaτ}.
#[inline]
pub fn divided_difference(a: f64, b: f64, tau: f64) -> C64 {
    let mid = cis(-0.5 * (a + b) * tau);
    let gap = a - b;
    if gap.abs() < DEGENERACY_GAP {
        mid * C64::new(0.0, -tau)
    } else {
        mid * C64::new(0.0, -2.0 * libm::sin(0.5 * gap * tau) / gap)
    }
}

/// exp(−ihτ) for Hermitian `h` (rad/ns) and τ in ns.
pub fn propagator(h: &Operator, tau: f64) -> Result<Operator> {
    Ok(SpectralPropagator::new(h, tau)?.unitary())
}

/// U = exp(−iHτ) with H = h0 + Σ_j amps_j·controls_j, and ∂U/∂amps_j for each j.
pub fn propagator_with_derivatives(
    h0: &Operator,
    controls: &[Operator],
    amps: &[f64],
    tau: f64,
) -> Result<(Operator, Vec<Operator>)> {
    if controls.len() != amps.len() {
        return Err(Error::DimensionMismatch {
            expected: controls.len(),
            found: amps.len(),
            what: "control amplitudes",
        });
    }
    let mut h = h0.clone();
    for (c, &a) in controls.iter().zip(amps) {
        if c.dim() != h0.dim() {
            return Err(Error::DimensionMismatch {
                expected: h0.dim(),
                found: c.dim(),
                what: "control operator",
            });
        }
        h.add_scaled(C64::new(a, 0.0), c);
    }
    let sp = SpectralPropagator::new(&h, tau)?;
    let du = controls.iter().map(|c| sp.derivative(c)).collect();
    Ok((sp.unitary(), du))
}
