use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Index, IndexMut, Mul, Sub};

use crate::{Error, Result, C64};

/// Dense complex square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    dim: usize,
    data: Vec<C64>,
    pub label: Option<String>,
}

impl Operator {
    pub fn zeros(dim: usize) -> Self {
        Operator { dim, data: vec![C64::new(0.0, 0.0); dim * dim], label: None }
    }

    pub fn identity(dim: usize) -> Self {
        let mut op = Self::zeros(dim);
        for i in 0..dim {
            op[(i, i)] = C64::new(1.0, 0.0);
        }
        op
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Operator { dim, data, label: None }
    }

    /// Builds from row-major entries; `entries.len()` must be a perfect square.
    pub fn from_rows(entries: Vec<C64>) -> Result<Self> {
        let dim = libm::round(libm::sqrt(entries.len() as f64)) as usize;
        if dim * dim != entries.len() || dim == 0 {
            return Err(Error::InvalidInput(alloc::format!(
                "{} entries do not form a square matrix",
                entries.len()
            )));
        }
        Ok(Operator { dim, data: entries, label: None })
    }

    pub fn from_real_rows(entries: &[f64]) -> Result<Self> {
        Self::from_rows(entries.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn diagonal(diag: &[C64]) -> Self {
        let mut op = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            op[(i, i)] = d;
        }
        op
    }

    pub fn real_diagonal(diag: &[f64]) -> Self {
        let mut op = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            op[(i, i)] = C64::new(d, 0.0);
        }
        op
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        Operator::from_fn(n, |i, j| self.data[j * n + i].conj())
    }

    pub fn transpose(&self) -> Self {
        let n = self.dim;
        Operator::from_fn(n, |i, j| self.data[j * n + i])
    }

    pub fn conj(&self) -> Self {
        Operator { dim: self.dim, data: self.data.iter().map(|z| z.conj()).collect(), label: None }
    }

    pub fn scale(&self, s: C64) -> Self {
        Operator { dim: self.dim, data: self.data.iter().map(|&z| z * s).collect(), label: None }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Operator { dim: self.dim, data: self.data.iter().map(|&z| z * s).collect(), label: None }
    }

    /// `self += s * other`.
    pub fn add_scaled(&mut self, s: C64, other: &Operator) {
        assert_eq!(self.dim, other.dim, "add_scaled: dimension mismatch");
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// max |A_ij - B_ij|.
    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise |A - A†| relative to max |A| (zero for the zero matrix).
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.dim;
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let d = (self.data[i * n + j] - self.data[j * n + i].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst / scale
    }

    pub fn is_hermitian(&self, rel_tol: f64) -> bool {
        self.hermitian_defect() <= rel_tol
    }

    /// max |U†U - I|.
    pub fn unitarity_defect(&self) -> f64 {
        self.adjoint().matmul(self).max_abs_diff(&Operator::identity(self.dim))
    }

    pub fn matmul(&self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim, rhs.dim, "matmul: dimension mismatch");
        let n = self.dim;
        let mut out = vec![C64::new(0.0, 0.0); n * n];
        matmul_into(&self.data, &rhs.data, &mut out, n, n, n);
        Operator { dim: n, data: out, label: None }
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.dim, v.len(), "apply: dimension mismatch");
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Commutator `self·rhs − rhs·self`.
    pub fn commutator(&self, rhs: &Operator) -> Operator {
        &self.matmul(rhs) - &rhs.matmul(self)
    }
}

/// `out (r×c) = a (r×k) · b (k×c)`, all row-major; `out` is overwritten.
pub(crate) fn matmul_into(a: &[C64], b: &[C64], out: &mut [C64], r: usize, k: usize, c: usize) {
    debug_assert_eq!(a.len(), r * k);
    debug_assert_eq!(b.len(), k * c);
    debug_assert_eq!(out.len(), r * c);
    for z in out.iter_mut() {
        *z = C64::new(0.0, 0.0);
    }
    for i in 0..r {
        let out_row = &mut out[i * c..(i + 1) * c];
        for (p, &aip) in a[i * k..(i + 1) * k].iter().enumerate() {
            if aip.re == 0.0 && aip.im == 0.0 {
                continue;
            }
            for (o, &bpj) in out_row.iter_mut().zip(&b[p * c..(p + 1) * c]) {
                *o += aip * bpj;
            }
        }
    }
}

/// Kronecker product; entry ((i·b.dim+k),(j·b.dim+l)) = a(i,j)·b(k,l).
pub fn kron(a: &Operator, b: &Operator) -> Operator {
    let (na, nb) = (a.dim, b.dim);
    Operator::from_fn(na * nb, |r, c| a[(r / nb, c / nb)] * b[(r % nb, c % nb)])
}

impl Index<(usize, usize)> for Operator {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for Operator {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim, rhs.dim, "add: dimension mismatch");
        Operator {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
            label: None,
        }
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim, rhs.dim, "sub: dimension mismatch");
        Operator {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
            label: None,
        }
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        self.matmul(rhs)
    }
}

/// Pure-state amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub amplitudes: Vec<C64>,
    /// Set for states produced by a projection; their norm may be below one.
    pub projected: bool,
}

impl StateVector {
    /// Wraps amplitudes that must already be normalized to 1e-10.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let sv = StateVector { amplitudes, projected: false };
        let norm = sv.norm();
        if sv.amplitudes.is_empty() || (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidInput(alloc::format!("state norm {norm} is not 1")));
        }
        Ok(sv)
    }

    pub fn normalized(mut amplitudes: Vec<C64>) -> Result<Self> {
        let norm = libm::sqrt(amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>());
        if norm == 0.0 {
            return Err(Error::InvalidInput("cannot normalize the zero vector".into()));
        }
        for z in amplitudes.iter_mut() {
            *z /= norm;
        }
        Ok(StateVector { amplitudes, projected: false })
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut amplitudes = vec![C64::new(0.0, 0.0); dim];
        amplitudes[index] = C64::new(1.0, 0.0);
        StateVector { amplitudes, projected: false }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>())
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn kron(&self, other: &StateVector) -> StateVector {
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amps.push(a * b);
            }
        }
        StateVector { amplitudes: amps, projected: self.projected || other.projected }
    }
}

/// Pauli matrices and the 2×2 identity.
pub mod pauli {
    use super::Operator;
    use crate::C64;

    pub fn identity() -> Operator {
        Operator::identity(2)
    }

    pub fn x() -> Operator {
        Operator::from_real_rows(&[0.0, 1.0, 1.0, 0.0]).unwrap().with_label("sx")
    }

    pub fn y() -> Operator {
        let (z, i) = (C64::new(0.0, 0.0), C64::new(0.0, 1.0));
        Operator::from_rows(alloc::vec![z, -i, i, z]).unwrap().with_label("sy")
    }

    /// diag(+1, −1) on (|0⟩, |1⟩).
    pub fn z() -> Operator {
        Operator::from_real_rows(&[1.0, 0.0, 0.0, -1.0]).unwrap().with_label("sz")
    }
}
