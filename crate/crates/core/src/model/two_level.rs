//! Effective 4-level cross-resonance model in the frame rotating at ν_d.
//!
//! Basis order |q1 q2⟩ = |00⟩, |01⟩, |10⟩, |11⟩ with σz = diag(+1, −1).

use super::{EffectiveParams, SystemParams};
use crate::numkit::{kron, pauli, Operator};
use crate::{C64, TWO_PI};

/// Σ_j (Δ̃_j/2)·σz_j with Δ̃_j = 2π(ν̃_aj − ν_d), in rad/ns.
pub fn two_level_drift(_p: &SystemParams, eff: &EffectiveParams) -> Operator {
    let (sz, id) = (pauli::z(), pauli::identity());
    let d1 = TWO_PI * (eff.nu_tilde_a1 - eff.nu_d);
    let d2 = TWO_PI * (eff.nu_tilde_a2 - eff.nu_d);
    let mut h = kron(&sz, &id).scale_real(0.5 * d1);
    h.add_scaled(C64::new(0.5 * d2, 0.0), &kron(&id, &sz));
    h.with_label("H0 two-level")
}

/// Dimensionless control operator; multiplied by 2π·c(t) with c in GHz.
///
/// pref₁(σx1 + (J/Δ₁₂)σz1σx2) + pref₂(σx2 − (J/Δ₁₂)σx1σz2)
pub fn two_level_control(_p: &SystemParams, eff: &EffectiveParams) -> Operator {
    let (sx, sz, id) = (pauli::x(), pauli::z(), pauli::identity());
    let ratio = eff.exchange_ratio();
    let (p1, p2) = (eff.drive_prefactor1, eff.drive_prefactor2);
    let mut h = kron(&sx, &id).scale_real(p1);
    h.add_scaled(C64::new(p1 * ratio, 0.0), &kron(&sz, &sx));
    h.add_scaled(C64::new(p2, 0.0), &kron(&id, &sx));
    h.add_scaled(C64::new(-p2 * ratio, 0.0), &kron(&sx, &sz));
    h.with_label("Hc two-level")
}

/// Rank-4 projector of the two-level model: the identity.
pub fn two_level_projector() -> Operator {
    Operator::identity(4)
}
