//! Two Duffing transmons exchange-coupled to one cavity mode, its dressed
//! eigenbasis, and the drive operators in the frame rotating at ν_d.

use alloc::vec;
use alloc::vec::Vec;

use super::{SystemParams, Warning};
use crate::numkit::{eig_hermitian, Operator};
use crate::{Error, Result, C64, TWO_PI};

/// Largest Hilbert space the dense model will build.
pub const MAX_DIM: usize = 4096;

/// Bare product-state label (transmon 1 level, transmon 2 level, photon number).
pub type BareLabel = (usize, usize, usize);

/// Bare labels of the computational states |00⟩, |01⟩, |10⟩, |11⟩ with an empty cavity.
pub const COMPUTATIONAL_LABELS: [BareLabel; 4] = [(0, 0, 0), (0, 1, 0), (1, 0, 0), (1, 1, 0)];

/// Truncations of the bare product basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BareDims {
    pub n_cavity: usize,
    pub n_t1: usize,
    pub n_t2: usize,
}

impl BareDims {
    pub fn of(p: &SystemParams) -> Self {
        BareDims { n_cavity: p.n_cavity, n_t1: p.n_transmon, n_t2: p.n_transmon }
    }

    pub fn total(&self) -> usize {
        self.n_cavity * self.n_t1 * self.n_t2
    }

    /// Index of |j1, j2, n⟩; transmon 1 is the most significant factor.
    pub fn index(&self, (j1, j2, n): BareLabel) -> usize {
        (j1 * self.n_t2 + j2) * self.n_cavity + n
    }

    pub fn label(&self, index: usize) -> BareLabel {
        let n = index % self.n_cavity;
        let rest = index / self.n_cavity;
        (rest / self.n_t2, rest % self.n_t2, n)
    }

    pub fn excitations(&self, index: usize) -> usize {
        let (j1, j2, n) = self.label(index);
        j1 + j2 + n
    }
}

/// Static Duffing Hamiltonian (rad/ns) and the cavity annihilation operator,
/// both in the bare product basis.
pub fn duffing_hamiltonian(p: &SystemParams) -> Result<(Operator, Operator)> {
    p.validate()?;
    let dims = BareDims::of(p);
    let dim = dims.n_cavity.saturating_mul(dims.n_t1).saturating_mul(dims.n_t2);
    if dim > MAX_DIM {
        return Err(Error::DimensionTooLarge { dim, max: MAX_DIM });
    }
    let mut h = Operator::zeros(dim);
    let mut a = Operator::zeros(dim);
    let sqrt = |k: usize| libm::sqrt(k as f64);
    for idx in 0..dim {
        let (j1, j2, n) = dims.label(idx);
        let duffing = |nu: f64, delta: f64, j: usize| {
            let j = j as f64;
            nu * j + 0.5 * delta * j * (j - 1.0)
        };
        let e = p.nu_r * n as f64 + duffing(p.nu_a1, p.delta1, j1) + duffing(p.nu_a2, p.delta2, j2);
        h[(idx, idx)] = C64::new(TWO_PI * e, 0.0);
        if n > 0 {
            a[(dims.index((j1, j2, n - 1)), idx)] = C64::new(sqrt(n), 0.0);
        }
        // g_j (a† c_j + h.c.): |j1, j2, n⟩ → |j1 − 1, j2, n + 1⟩
        if n + 1 < dims.n_cavity {
            if j1 > 0 {
                let to = dims.index((j1 - 1, j2, n + 1));
                let amp = TWO_PI * p.g1 * sqrt(n + 1) * sqrt(j1);
                h[(to, idx)] = C64::new(amp, 0.0);
                h[(idx, to)] = C64::new(amp, 0.0);
            }
            if j2 > 0 {
                let to = dims.index((j1, j2 - 1, n + 1));
                let amp = TWO_PI * p.g2 * sqrt(n + 1) * sqrt(j2);
                h[(to, idx)] = C64::new(amp, 0.0);
                h[(idx, to)] = C64::new(amp, 0.0);
            }
        }
    }
    Ok((h.with_label("H static (bare)"), a.with_label("a (bare)")))
}

/// Eigenbasis of the static Hamiltonian with each dressed state tied to the
/// bare state it overlaps most.
#[derive(Debug, Clone)]
pub struct DressedBasis {
    pub dims: BareDims,
    /// Ascending dressed energies, GHz.
    pub energies: Vec<f64>,
    /// Columns are dressed states in the bare basis.
    pub vectors: Operator,
    /// Bare label of each dressed state.
    pub labels: Vec<BareLabel>,
    /// Dressed index of each bare index (inverse of `labels`).
    pub dressed_of_bare: Vec<usize>,
    /// Total excitation number carried by each dressed state.
    pub excitations: Vec<usize>,
    /// Dressed indices of |00,0⟩, |01,0⟩, |10,0⟩, |11,0⟩.
    pub comp_indices: [usize; 4],
    /// |⟨bare|dressed⟩|² for each computational state.
    pub comp_overlaps: [f64; 4],
}

impl DressedBasis {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn dressed_index(&self, label: BareLabel) -> usize {
        self.dressed_of_bare[self.dims.index(label)]
    }

    pub fn energy(&self, label: BareLabel) -> f64 {
        self.energies[self.dressed_index(label)]
    }

    /// Dressed transition frequency E(to) − E(from), GHz.
    pub fn transition(&self, from: BareLabel, to: BareLabel) -> f64 {
        self.energy(to) - self.energy(from)
    }

    /// Dressed 0–1 frequency of transmon 1 with the other subsystems empty.
    pub fn qubit1_frequency(&self) -> f64 {
        self.transition((0, 0, 0), (1, 0, 0))
    }

    pub fn qubit2_frequency(&self) -> f64 {
        self.transition((0, 0, 0), (0, 1, 0))
    }
}

/// Diagonalizes the static Hamiltonian. When it conserves the total excitation
/// number each excitation block is diagonalized separately.
pub fn dress(h_static: &Operator, dims: BareDims) -> Result<DressedBasis> {
    let dim = h_static.dim();
    if dims.total() != dim {
        return Err(Error::DimensionMismatch { expected: dims.total(), found: dim, what: "dress" });
    }
    let conserving = (0..dim).all(|i| {
        (0..dim).all(|j| {
            dims.excitations(i) == dims.excitations(j) || h_static[(i, j)] == C64::new(0.0, 0.0)
        })
    });

    // (energy rad/ns, vector in bare basis, excitation number or None)
    let mut states: Vec<(f64, Vec<C64>, Option<usize>)> = Vec::with_capacity(dim);
    if conserving {
        let max_n = (0..dim).map(|i| dims.excitations(i)).max().unwrap_or(0);
        for n in 0..=max_n {
            let members: Vec<usize> = (0..dim).filter(|&i| dims.excitations(i) == n).collect();
            if members.is_empty() {
                continue;
            }
            let block = Operator::from_fn(members.len(), |r, c| h_static[(members[r], members[c])]);
            let eig = eig_hermitian(&block)?;
            for (k, &e) in eig.values.iter().enumerate() {
                let mut v = vec![C64::new(0.0, 0.0); dim];
                for (r, &m) in members.iter().enumerate() {
                    v[m] = eig.vectors[(r, k)];
                }
                states.push((e, v, Some(n)));
            }
        }
    } else {
        let eig = eig_hermitian(h_static)?;
        for (k, &e) in eig.values.iter().enumerate() {
            let v = (0..dim).map(|r| eig.vectors[(r, k)]).collect();
            states.push((e, v, None));
        }
    }
    // Stable sort keeps block order for exact ties.
    states.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut vectors = Operator::zeros(dim);
    for (k, (_, v, _)) in states.iter().enumerate() {
        for (r, z) in v.iter().enumerate() {
            vectors[(r, k)] = *z;
        }
    }

    // Greedy maximal-overlap assignment, each bare label used once.
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(dim * dim);
    for d in 0..dim {
        for b in 0..dim {
            let w = vectors[(b, d)].norm_sqr();
            if w > 0.0 {
                pairs.push((w, d, b));
            }
        }
    }
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut bare_of_dressed = vec![usize::MAX; dim];
    let mut dressed_of_bare = vec![usize::MAX; dim];
    for &(_, d, b) in &pairs {
        if bare_of_dressed[d] == usize::MAX && dressed_of_bare[b] == usize::MAX {
            bare_of_dressed[d] = b;
            dressed_of_bare[b] = d;
        }
    }
    // States with no non-zero overlap left over (only possible for exact zeros).
    let free: Vec<usize> = (0..dim).filter(|&b| dressed_of_bare[b] == usize::MAX).collect();
    let mut free_bare = free.into_iter();
    for d in 0..dim {
        if bare_of_dressed[d] == usize::MAX {
            let b = free_bare.next().expect("assignment is a bijection");
            bare_of_dressed[d] = b;
            dressed_of_bare[b] = d;
        }
    }

    let mut comp_indices = [0usize; 4];
    let mut comp_overlaps = [0.0f64; 4];
    for (k, &label) in COMPUTATIONAL_LABELS.iter().enumerate() {
        if label.0 >= dims.n_t1 || label.1 >= dims.n_t2 {
            return Err(Error::InvalidInput("transmon truncation below 2 levels".into()));
        }
        let b = dims.index(label);
        let d = dressed_of_bare[b];
        let overlap = vectors[(b, d)].norm_sqr();
        if overlap <= 0.5 {
            return Err(Error::AmbiguousDressing { label, overlap });
        }
        comp_indices[k] = d;
        comp_overlaps[k] = overlap;
    }

    let excitations = states
        .iter()
        .enumerate()
        .map(|(d, s)| s.2.unwrap_or_else(|| dims.excitations(bare_of_dressed[d])))
        .collect();
    Ok(DressedBasis {
        dims,
        energies: states.iter().map(|s| s.0 / TWO_PI).collect(),
        vectors,
        labels: bare_of_dressed.iter().map(|&b| dims.label(b)).collect(),
        dressed_of_bare,
        excitations,
        comp_indices,
        comp_overlaps,
    })
}

/// Drift and two drive quadratures in the dressed basis, rotating at ν_d.
#[derive(Debug, Clone)]
pub struct RotatingFrame {
    /// 2π·(E_d − ν_d·N_d) on the diagonal, rad/ns.
    pub h_drift: Operator,
    /// ā† + ā
    pub h_x: Operator,
    /// i(ā† − ā)
    pub h_y: Operator,
    pub warnings: Vec<Warning>,
}

pub const RWA_THRESHOLD: f64 = 0.5;

pub fn rotating_frame(
    db: &DressedBasis,
    h_static: &Operator,
    a_op: &Operator,
    nu_d: f64,
) -> Result<RotatingFrame> {
    let n = db.dim();
    for (op, what) in [(h_static, "static Hamiltonian"), (a_op, "cavity operator")] {
        if op.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: op.dim(), what });
        }
    }
    let v = &db.vectors;
    let vh = v.adjoint();
    let h_dressed = vh.matmul(h_static).matmul(v);
    let diag: Vec<f64> = (0..n)
        .map(|k| h_dressed[(k, k)].re - TWO_PI * nu_d * db.excitations[k] as f64)
        .collect();
    let h_drift = Operator::real_diagonal(&diag).with_label("H0 dressed rotating");

    let a_bar = vh.matmul(a_op).matmul(v);
    let a_bar_dag = a_bar.adjoint();
    let h_x = (&a_bar_dag + &a_bar).with_label("Hx");
    let h_y = (&a_bar_dag - &a_bar).scale(C64::new(0.0, 1.0)).with_label("Hy");

    let mut warnings = Vec::new();
    let nu_r = {
        // cavity frequency from the dressed |0,0,1⟩ level when available
        if db.dims.n_cavity > 1 { db.transition((0, 0, 0), (0, 0, 1)) } else { nu_d }
    };
    if nu_d != 0.0 {
        let ratio = (nu_d - nu_r).abs() / nu_d.abs();
        if ratio > RWA_THRESHOLD {
            warnings.push(Warning::RwaValidity { ratio });
        }
    }
    Ok(RotatingFrame { h_drift, h_x, h_y, warnings })
}

/// Ô = Σ |d⟩⟨d| over the four computational dressed states, in the dressed basis.
pub fn computational_projector(db: &DressedBasis) -> Operator {
    let mut p = Operator::zeros(db.dim());
    for &d in &db.comp_indices {
        p[(d, d)] = C64::new(1.0, 0.0);
    }
    p.with_label("O computational")
}
