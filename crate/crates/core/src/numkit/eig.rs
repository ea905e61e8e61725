//! Hermitian eigendecomposition.
//!
//! Complex Householder reduction to a Hermitian tridiagonal matrix, a diagonal
//! phase change that makes the off-diagonal real, then implicit QL on the real
//! symmetric tridiagonal with eigenvector accumulation.

use alloc::vec;
use alloc::vec::Vec;

use super::Operator;
use crate::{Error, Result, C64};

/// Relative Hermiticity tolerance applied to every input.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Eigenpairs of a Hermitian operator. Eigenvalues ascending; eigenvectors are
/// the columns of `vectors`.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: Operator,
}

impl HermitianEigen {
    /// V·diag(f(λ))·V†.
    pub fn reconstruct_with(&self, mut f: impl FnMut(f64) -> C64) -> Operator {
        let n = self.values.len();
        let v = self.vectors.as_slice();
        let weights: Vec<C64> = self.values.iter().map(|&l| f(l)).collect();
        let mut out = Operator::zeros(n);
        let o = out.as_mut_slice();
        // out = (V·W)·V†, with V·W scaled columnwise.
        let mut vw = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for k in 0..n {
                vw[i * n + k] = v[i * n + k] * weights[k];
            }
        }
        let vh: Vec<C64> = {
            let mut t = vec![C64::new(0.0, 0.0); n * n];
            for i in 0..n {
                for j in 0..n {
                    t[j * n + i] = v[i * n + j].conj();
                }
            }
            t
        };
        super::operator::matmul_into(&vw, &vh, o, n, n, n);
        out
    }
}

pub fn eig_hermitian(h: &Operator) -> Result<HermitianEigen> {
    if h.as_slice().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidInput("non-finite matrix entry".into()));
    }
    let defect = h.hermitian_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian { asymmetry: defect });
    }
    let n = h.dim();
    let mut a: Vec<C64> = h.as_slice().to_vec();
    let mut q = Operator::identity(n);
    tridiagonalize(&mut a, q.as_mut_slice(), n);

    let mut diag: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
    let mut off = vec![0.0; n];
    let mut phase = vec![C64::new(1.0, 0.0); n];
    for i in 0..n.saturating_sub(1) {
        let e = a[(i + 1) * n + i];
        let r = e.norm();
        off[i] = r;
        phase[i + 1] = if r > 0.0 { phase[i] * (e / r) } else { phase[i] };
    }

    // zt rows are the real eigenvectors of the phase-rotated tridiagonal.
    let mut zt = vec![0.0; n * n];
    for i in 0..n {
        zt[i * n + i] = 1.0;
    }
    tql2(&mut diag, &mut off, &mut zt, n)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));

    // V = Q·D·Z
    let qs = q.as_slice();
    let mut qd = vec![C64::new(0.0, 0.0); n * n];
    for r in 0..n {
        for k in 0..n {
            qd[r * n + k] = qs[r * n + k] * phase[k];
        }
    }
    let mut vectors = Operator::zeros(n);
    let vs = vectors.as_mut_slice();
    for (col, &src) in order.iter().enumerate() {
        let z = &zt[src * n..(src + 1) * n];
        for r in 0..n {
            let row = &qd[r * n..(r + 1) * n];
            let mut acc = C64::new(0.0, 0.0);
            for (x, &zk) in row.iter().zip(z) {
                acc += x * zk;
            }
            vs[r * n + col] = acc;
        }
    }
    let values = order.iter().map(|&i| diag[i]).collect();
    Ok(HermitianEigen { values, vectors })
}

/// In-place Householder reduction of the Hermitian `a` (row-major n×n) to
/// tridiagonal form; `q` accumulates the unitary so that A = Q·T·Q†.
fn tridiagonalize(a: &mut [C64], q: &mut [C64], n: usize) {
    let mut v = vec![C64::new(0.0, 0.0); n];
    let mut p = vec![C64::new(0.0, 0.0); n];
    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let lo = k + 1;
        let tail: f64 = (lo + 1..n).map(|i| a[i * n + k].norm_sqr()).sum();
        if tail == 0.0 {
            continue;
        }
        let x0 = a[lo * n + k];
        let sigma = libm::sqrt(tail + x0.norm_sqr());
        let ph = if x0.norm() > 0.0 { x0 / x0.norm() } else { C64::new(1.0, 0.0) };
        let alpha = -ph * sigma;

        let v = &mut v[..m];
        for (t, i) in (lo..n).enumerate() {
            v[t] = a[i * n + k];
        }
        v[0] -= alpha;
        let vnorm = libm::sqrt(v.iter().map(|z| z.norm_sqr()).sum::<f64>());
        for z in v.iter_mut() {
            *z /= vnorm;
        }

        // Trailing block B = a[lo.., lo..]: B ← H·B·H with H = I − 2vv†.
        let p = &mut p[..m];
        for (t, i) in (lo..n).enumerate() {
            let row = &a[i * n + lo..i * n + n];
            p[t] = row.iter().zip(v.iter()).map(|(b, x)| b * x).sum();
        }
        let c: C64 = v.iter().zip(p.iter()).map(|(x, y)| x.conj() * y).sum();
        for (pt, vt) in p.iter_mut().zip(v.iter()) {
            *pt -= c.re * vt;
        }
        for (t, i) in (lo..n).enumerate() {
            let (vi2, wi2) = (v[t] * 2.0, p[t] * 2.0);
            let row = &mut a[i * n + lo..i * n + n];
            for (s, b) in row.iter_mut().enumerate() {
                *b -= vi2 * p[s].conj() + wi2 * v[s].conj();
            }
        }
        a[lo * n + k] = alpha;
        a[k * n + lo] = alpha.conj();
        for i in lo + 1..n {
            a[i * n + k] = C64::new(0.0, 0.0);
            a[k * n + i] = C64::new(0.0, 0.0);
        }

        // Q ← Q·H
        for r in 0..n {
            let row = &mut q[r * n + lo..r * n + n];
            let s: C64 = row.iter().zip(v.iter()).map(|(x, y)| x * y).sum::<C64>() * 2.0;
            for (x, y) in row.iter_mut().zip(v.iter()) {
                *x -= s * y.conj();
            }
        }
    }
}

/// Implicit QL with Wilkinson-style shifts on a real symmetric tridiagonal.
/// `e[i]` couples `d[i]` and `d[i+1]`; rows of `zt` are rotated alongside.
fn tql2(d: &mut [f64], e: &mut [f64], zt: &mut [f64], n: usize) -> Result<()> {
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    let eps = f64::EPSILON;
    let max_iter = 60 * n.max(10);
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m == n {
            m = n - 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > max_iter {
                    return Err(Error::EigenNoConvergence);
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = libm::hypot(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    let h = c * p;
                    r = libm::hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    let (head, tail) = zt.split_at_mut((i + 1) * n);
                    let zi = &mut head[i * n..];
                    let zi1 = &mut tail[..n];
                    for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                        let hb = *b;
                        *b = s * *a + c * hb;
                        *a = c * *a - s * hb;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}
