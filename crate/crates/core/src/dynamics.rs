//! Piecewise-constant propagation, subspace gate fidelity with its exact
//! gradient, and state-evolution diagnostics.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;

use crate::model::{
    computational_projector, dress, duffing_hamiltonian, effective_params, rotating_frame,
    two_level_control, two_level_drift, BareDims, SystemParams, Warning,
};
use crate::numkit::{kron, matmul_into, pauli, Operator, SpectralPropagator, StateVector};
use crate::pulse::Pulse;
use crate::{Error, Result, C64, TWO_PI};

/// Dimension of the computational subspace.
pub const SUBSPACE_DIM: usize = 4;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Everything needed to turn a pulse into a gate fidelity for one parameter set.
#[derive(Debug, Clone)]
pub struct ControlProblem {
    /// rad/ns
    pub h_drift: Operator,
    /// Dimensionless; pixel k contributes 2π·amps[q][k]·h_controls[q].
    pub h_controls: Vec<Operator>,
    /// Rank-4 projector Ô onto the computational states.
    pub projector: Operator,
    /// Full-space indices of |00⟩, |01⟩, |10⟩, |11⟩.
    pub comp_indices: [usize; 4],
    /// 4×4 target on the computational subspace.
    pub target: Operator,
    /// Amplitude bound, GHz.
    pub bound: f64,
    /// Drive frequency of the rotating frame, GHz.
    pub nu_d: f64,
    pub warnings: Vec<Warning>,
}

impl ControlProblem {
    pub fn new(
        h_drift: Operator,
        h_controls: Vec<Operator>,
        comp_indices: [usize; 4],
        target: Operator,
        bound: f64,
    ) -> Result<Self> {
        let n = h_drift.dim();
        if !h_drift.is_hermitian(1e-12) {
            return Err(Error::NotHermitian { asymmetry: h_drift.hermitian_defect() });
        }
        if h_controls.is_empty() || h_controls.len() > 2 {
            return Err(Error::InvalidInput(alloc::format!(
                "{} control operators (need 1 or 2)",
                h_controls.len()
            )));
        }
        for h in &h_controls {
            if h.dim() != n {
                return Err(Error::DimensionMismatch { expected: n, found: h.dim(), what: "control operator" });
            }
            if !h.is_hermitian(1e-12) {
                return Err(Error::NotHermitian { asymmetry: h.hermitian_defect() });
            }
        }
        if target.dim() != SUBSPACE_DIM {
            return Err(Error::DimensionMismatch { expected: SUBSPACE_DIM, found: target.dim(), what: "target" });
        }
        if target.unitarity_defect() > 1e-10 {
            return Err(Error::InvalidInput("target is not unitary".into()));
        }
        for (a, &c) in comp_indices.iter().enumerate() {
            if c >= n || comp_indices[..a].contains(&c) {
                return Err(Error::InvalidInput(alloc::format!("bad computational indices {comp_indices:?}")));
            }
        }
        if !(bound > 0.0) {
            return Err(Error::InvalidInput(alloc::format!("amplitude bound {bound} must be positive")));
        }
        let mut projector = Operator::zeros(n);
        for &c in &comp_indices {
            projector[(c, c)] = C64::new(1.0, 0.0);
        }
        Ok(ControlProblem {
            h_drift,
            h_controls,
            projector: projector.with_label("O computational"),
            comp_indices,
            target,
            bound,
            nu_d: 0.0,
            warnings: Vec::new(),
        })
    }

    /// Effective 4-level model with one real drive quadrature.
    pub fn two_level(p: &SystemParams, bound: f64) -> Result<Self> {
        let mut warnings = p.validate()?;
        let eff = effective_params(p)?;
        let ratio = eff.exchange_ratio().abs();
        if ratio >= 1.0 {
            warnings.push(Warning::StrongExchange { ratio });
        }
        let mut cp = ControlProblem::new(
            two_level_drift(p, &eff),
            vec![two_level_control(p, &eff)],
            [0, 1, 2, 3],
            target_unitary(),
            bound,
        )?;
        cp.nu_d = eff.nu_d;
        cp.warnings = warnings;
        Ok(cp)
    }

    /// Duffing transmons plus cavity in the dressed rotating frame, two drive
    /// quadratures. Drives at the dressed qubit-1 frequency unless `p.nu_d` is set.
    pub fn multilevel(p: &SystemParams, bound: f64) -> Result<Self> {
        let mut warnings = p.validate()?;
        let (h_static, a_op) = duffing_hamiltonian(p)?;
        let db = dress(&h_static, BareDims::of(p))?;
        let nu_d = p.nu_d.unwrap_or_else(|| db.qubit1_frequency());
        let frame = rotating_frame(&db, &h_static, &a_op, nu_d)?;
        warnings.extend(frame.warnings);
        let mut cp = ControlProblem::new(
            frame.h_drift,
            vec![frame.h_x, frame.h_y],
            db.comp_indices,
            target_unitary(),
            bound,
        )?;
        cp.projector = computational_projector(&db);
        cp.nu_d = nu_d;
        cp.warnings = warnings;
        Ok(cp)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.h_drift.dim()
    }

    #[inline]
    pub fn quadratures(&self) -> usize {
        self.h_controls.len()
    }

    /// W placed on the computational indices, zero elsewhere.
    pub fn embedded_target(&self) -> Operator {
        let mut w = Operator::zeros(self.dim());
        for (a, &ca) in self.comp_indices.iter().enumerate() {
            for (b, &cb) in self.comp_indices.iter().enumerate() {
                w[(ca, cb)] = self.target[(a, b)];
            }
        }
        w
    }

    /// H(t_k) in rad/ns for the given per-quadrature amplitudes (GHz).
    pub fn pixel_hamiltonian(&self, amps: &[f64]) -> Operator {
        let mut h = self.h_drift.clone();
        for (hc, &a) in self.h_controls.iter().zip(amps) {
            if a != 0.0 {
                h.add_scaled(C64::new(TWO_PI * a, 0.0), hc);
            }
        }
        h
    }

    fn check_pulse(&self, p: &Pulse) -> Result<()> {
        if p.quadratures() != self.quadratures() {
            return Err(Error::DimensionMismatch {
                expected: self.quadratures(),
                found: p.quadratures(),
                what: "pulse quadratures",
            });
        }
        Ok(())
    }

    fn pixel_propagator(&self, p: &Pulse, k: usize) -> Result<SpectralPropagator> {
        let amps: Vec<f64> = (0..p.quadratures()).map(|q| p.amp(q, k)).collect();
        SpectralPropagator::new(&self.pixel_hamiltonian(&amps), p.tau())
    }

    /// n×4 block whose columns are the computational basis vectors.
    fn comp_block(&self) -> Vec<C64> {
        let mut x = vec![ZERO; self.dim() * SUBSPACE_DIM];
        for (b, &c) in self.comp_indices.iter().enumerate() {
            x[c * SUBSPACE_DIM + b] = C64::new(1.0, 0.0);
        }
        x
    }

    /// tr(W†·ÔUÔ)/n_s from the computational columns of U.
    fn overlap_from_columns(&self, cols: &[C64]) -> C64 {
        let mut z = ZERO;
        for (a, &ca) in self.comp_indices.iter().enumerate() {
            for b in 0..SUBSPACE_DIM {
                z += self.target[(a, b)].conj() * cols[ca * SUBSPACE_DIM + b];
            }
        }
        z / SUBSPACE_DIM as f64
    }
}

/// exp(−iπ/4·σx⊗σz) = (I − iσx⊗σz)/√2.
pub fn target_unitary() -> Operator {
    let xz = kron(&pauli::x(), &pauli::z());
    let mut w = Operator::identity(4).scale_real(FRAC_1_SQRT_2);
    w.add_scaled(C64::new(0.0, -FRAC_1_SQRT_2), &xz);
    w.with_label("W")
}

/// |+y⟩ ⊗ |+y⟩ with |+y⟩ = (|0⟩ + i|1⟩)/√2.
pub fn plus_y_plus_y() -> StateVector {
    let plus_y = StateVector::normalized(vec![C64::new(1.0, 0.0), C64::new(0.0, 1.0)]).unwrap();
    plus_y.kron(&plus_y)
}

/// |Φ⁻⟩ = (|00⟩ − |11⟩)/√2.
pub fn bell_phi_minus() -> StateVector {
    StateVector::normalized(vec![
        C64::new(1.0, 0.0),
        ZERO,
        ZERO,
        C64::new(-1.0, 0.0),
    ])
    .unwrap()
}

/// Full propagator and running products U_k…U_1.
#[derive(Debug, Clone)]
pub struct Propagation {
    pub total: Operator,
    pub prefixes: Vec<Operator>,
}

pub fn propagate(cp: &ControlProblem, p: &Pulse) -> Result<Propagation> {
    cp.check_pulse(p)?;
    let mut total = Operator::identity(cp.dim());
    let mut prefixes = Vec::with_capacity(p.n_pixels());
    for k in 0..p.n_pixels() {
        total = cp.pixel_propagator(p, k)?.unitary().matmul(&total);
        prefixes.push(total.clone());
    }
    Ok(Propagation { total, prefixes })
}

/// F = |tr(W†ÔUÔ)/n_s|².
pub fn fidelity(cp: &ControlProblem, u_total: &Operator) -> f64 {
    gate_overlap(cp, u_total).norm_sqr().min(1.0)
}

/// tr(W†ÔUÔ)/n_s.
pub fn gate_overlap(cp: &ControlProblem, u_total: &Operator) -> C64 {
    let mut z = ZERO;
    for (a, &ca) in cp.comp_indices.iter().enumerate() {
        for (b, &cb) in cp.comp_indices.iter().enumerate() {
            z += cp.target[(a, b)].conj() * u_total[(ca, cb)];
        }
    }
    z / SUBSPACE_DIM as f64
}

/// Fidelity of a pulse; propagates only the computational columns.
pub fn pulse_fidelity(cp: &ControlProblem, p: &Pulse) -> Result<f64> {
    cp.check_pulse(p)?;
    let mut cols = cp.comp_block();
    for k in 0..p.n_pixels() {
        cols = cp.pixel_propagator(p, k)?.apply_block(&cols, SUBSPACE_DIM);
    }
    Ok(cp.overlap_from_columns(&cols).norm_sqr().min(1.0))
}

/// Fidelity and its gradient with respect to every amplitude (quadrature-major,
/// like [`Pulse::as_slice`]), GHz⁻¹.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub fidelity: f64,
    pub overlap: C64,
    pub gradient: Vec<f64>,
}

/// Exact gradient by forward propagation of the computational columns and
/// backward propagation of the target rows, with the spectral derivative of
/// each pixel propagator.
pub fn fidelity_and_gradient(cp: &ControlProblem, p: &Pulse) -> Result<Evaluation> {
    cp.check_pulse(p)?;
    let (n, s, n_px) = (cp.dim(), SUBSPACE_DIM, p.n_pixels());

    let mut props = Vec::with_capacity(n_px);
    let mut forward = Vec::with_capacity(n_px + 1);
    forward.push(cp.comp_block());
    for k in 0..n_px {
        let sp = cp.pixel_propagator(p, k)?;
        let next = sp.apply_block(&forward[k], s);
        forward.push(next);
        props.push(sp);
    }
    let z = cp.overlap_from_columns(&forward[n_px]);

    // rows of W†E^T/n_s, then B_{k−1} = B_k U_k
    let mut back = vec![ZERO; s * n];
    for (a, &ca) in cp.comp_indices.iter().enumerate() {
        for b in 0..s {
            back[b * n + ca] = cp.target[(a, b)].conj() / s as f64;
        }
    }

    let n_q = cp.quadratures();
    let mut gradient = vec![0.0; n_q * n_px];
    let mut l = vec![ZERO; n * s];
    let mut r = vec![ZERO; s * n];
    let mut g = vec![ZERO; n * n];
    let mut tmp = vec![ZERO; n * n];
    let mut zmat = vec![ZERO; n * n];
    for k in (0..n_px).rev() {
        let sp = &props[k];
        let v = sp.vectors();
        let vh = v.adjoint();
        matmul_into(vh.as_slice(), &forward[k], &mut l, n, n, s);
        matmul_into(&back, v.as_slice(), &mut r, s, n, n);
        // G_mn = Γ_mn·(L R)_nm
        for m in 0..n {
            for j in 0..n {
                let mut lr = ZERO;
                for c in 0..s {
                    lr += l[j * s + c] * r[c * n + m];
                }
                g[m * n + j] = sp.gamma(m, j) * lr;
            }
        }
        // Z = conj(V)·G·Vᵀ so that dz = Σ_ij (∂H)_ij Z_ij
        let vc = v.conj();
        let vt = v.transpose();
        matmul_into(vc.as_slice(), &g, &mut tmp, n, n, n);
        matmul_into(&tmp, vt.as_slice(), &mut zmat, n, n, n);
        for (q, hc) in cp.h_controls.iter().enumerate() {
            let dz: C64 = hc
                .as_slice()
                .iter()
                .zip(&zmat)
                .filter(|(h, _)| h.re != 0.0 || h.im != 0.0)
                .map(|(h, zz)| h * zz)
                .sum::<C64>()
                * TWO_PI;
            gradient[q * n_px + k] = 2.0 * (z.conj() * dz).re;
        }
        back = sp.right_apply_block(&back, s);
    }
    Ok(Evaluation { fidelity: z.norm_sqr().min(1.0), overlap: z, gradient })
}

/// ∂F/∂c_q(t_k), quadrature-major.
pub fn fidelity_gradient(cp: &ControlProblem, p: &Pulse) -> Result<Vec<f64>> {
    Ok(fidelity_and_gradient(cp, p)?.gradient)
}

/// 2|ad − bc| for amplitudes of |00⟩, |01⟩, |10⟩, |11⟩.
pub fn entanglement(amps: [C64; 4]) -> f64 {
    let [a, b, c, d] = amps;
    (2.0 * (a * d - b * c).norm()).min(1.0)
}

/// Per-step diagnostics of a state driven by a pulse; index 0 is the initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionTrace {
    pub times: Vec<f64>,
    /// Full-space state after each step.
    pub states: Vec<Vec<C64>>,
    pub entanglement: Vec<f64>,
    pub bell_fidelity: Vec<f64>,
    pub leakage: Vec<f64>,
}

impl EvolutionTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Evolves `initial` (full-space, or 4-dimensional and embedded on the
/// computational states) through every pixel.
pub fn evolve_trace(cp: &ControlProblem, p: &Pulse, initial: &StateVector) -> Result<EvolutionTrace> {
    cp.check_pulse(p)?;
    let n = cp.dim();
    let mut psi = if initial.dim() == n {
        initial.amplitudes.clone()
    } else if initial.dim() == SUBSPACE_DIM {
        let mut v = vec![ZERO; n];
        for (a, &c) in cp.comp_indices.iter().enumerate() {
            v[c] = initial.amplitudes[a];
        }
        v
    } else {
        return Err(Error::DimensionMismatch { expected: n, found: initial.dim(), what: "initial state" });
    };
    let norm = libm::sqrt(psi.iter().map(|z| z.norm_sqr()).sum::<f64>());
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidInput(alloc::format!("initial state norm {norm} is not 1")));
    }
    let bell = bell_phi_minus();
    let mut trace = EvolutionTrace {
        times: Vec::new(),
        states: Vec::new(),
        entanglement: Vec::new(),
        bell_fidelity: Vec::new(),
        leakage: Vec::new(),
    };
    let mut record = |t: f64, psi: &[C64]| {
        let comp: [C64; 4] = core::array::from_fn(|a| psi[cp.comp_indices[a]]);
        let inside: f64 = comp.iter().map(|z| z.norm_sqr()).sum();
        let leak = (1.0 - inside).clamp(0.0, 1.0);
        let ent = if inside > 0.0 { entanglement(comp.map(|z| z / libm::sqrt(inside))) } else { 0.0 };
        let ov: C64 = bell.amplitudes.iter().zip(&comp).map(|(b, z)| b.conj() * z).sum();
        trace.times.push(t);
        trace.states.push(psi.to_vec());
        trace.entanglement.push(ent);
        trace.bell_fidelity.push(ov.norm_sqr().min(1.0));
        trace.leakage.push(leak);
    };
    record(0.0, &psi);
    for k in 0..p.n_pixels() {
        psi = cp.pixel_propagator(p, k)?.apply_block(&psi, 1);
        record((k + 1) as f64 * p.tau(), &psi);
    }
    Ok(trace)
}
