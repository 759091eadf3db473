//! Dense complex matrices, Hermitian operators and small eigenproblems.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

const HERMITIAN_TOL: f64 = 1e-9;
const IMAG_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix", into = "RawMatrix")]
pub struct ComplexMatrix {
    dim: usize,
    entries: Vec<C64>,
}

#[derive(Serialize, Deserialize)]
struct RawMatrix {
    dim: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl TryFrom<RawMatrix> for ComplexMatrix {
    type Error = Error;

    fn try_from(raw: RawMatrix) -> Result<Self> {
        if raw.re.len() != raw.im.len() {
            return Err(Error::DimensionMismatch { expected: raw.re.len(), found: raw.im.len() });
        }
        let entries = raw.re.iter().zip(&raw.im).map(|(&re, &im)| C64::new(re, im)).collect();
        ComplexMatrix::new(raw.dim, entries)
    }
}

impl From<ComplexMatrix> for RawMatrix {
    fn from(m: ComplexMatrix) -> Self {
        RawMatrix {
            dim: m.dim,
            re: m.entries.iter().map(|z| z.re).collect(),
            im: m.entries.iter().map(|z| z.im).collect(),
        }
    }
}

impl ComplexMatrix {
    /// Row-major construction; `entries.len()` must equal `dim * dim`.
    pub fn new(dim: usize, entries: Vec<C64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("matrix dimension must be positive".into()));
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: entries.len() });
        }
        Ok(Self { dim, entries })
    }

    pub fn zeros(dim: usize) -> Self {
        Self { dim, entries: vec![C64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                entries.push(f(i, j));
            }
        }
        Self { dim, entries }
    }

    pub fn from_real(dim: usize, values: &[f64]) -> Result<Self> {
        Self::new(dim, values.iter().map(|&v| C64::new(v, 0.0)).collect())
    }

    /// The rank-one operator |u⟩⟨v|.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        assert_eq!(u.len(), v.len(), "outer product of unequal vectors");
        Self::from_fn(u.len(), |i, j| u[i] * v[j].conj())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.entries[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: C64) {
        self.entries[i * self.dim + j] = value;
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.get(j, i).conj())
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "matmul dimension mismatch");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.entries[i * n + k];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.entries[i * n + j] += a * rhs.entries[k * n + j];
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "add dimension mismatch");
        let entries = self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect();
        Self { dim: self.dim, entries }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "sub dimension mismatch");
        let entries = self.entries.iter().zip(&rhs.entries).map(|(a, b)| a - b).collect();
        Self { dim: self.dim, entries }
    }

    pub fn scale(&self, k: f64) -> Self {
        Self { dim: self.dim, entries: self.entries.iter().map(|a| a * k).collect() }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise distance to another matrix of the same size.
    pub fn max_abs_diff(&self, rhs: &Self) -> f64 {
        self.sub(rhs).max_abs()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest |A - A†| entry.
    pub fn hermitian_residual(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComplexMatrix", into = "ComplexMatrix")]
pub struct HermitianOperator {
    base: ComplexMatrix,
}

impl TryFrom<ComplexMatrix> for HermitianOperator {
    type Error = Error;

    fn try_from(m: ComplexMatrix) -> Result<Self> {
        Self::new(m)
    }
}

impl From<HermitianOperator> for ComplexMatrix {
    fn from(h: HermitianOperator) -> Self {
        h.base
    }
}

impl HermitianOperator {
    /// Symmetrizes `(A + A†)/2`; rejects inputs whose asymmetry exceeds 1e-9.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let residual = m.hermitian_residual();
        if !(residual <= HERMITIAN_TOL) {
            return Err(Error::NotHermitian { residual });
        }
        Ok(Self::symmetrized(&m))
    }

    fn symmetrized(m: &ComplexMatrix) -> Self {
        let n = m.dim();
        let base = ComplexMatrix::from_fn(n, |i, j| {
            if i == j {
                C64::new(m.get(i, i).re, 0.0)
            } else {
                (m.get(i, j) + m.get(j, i).conj()) * 0.5
            }
        });
        Self { base }
    }

    /// Wraps `K H K†`, which is Hermitian by construction.
    pub fn congruence(k: &ComplexMatrix, h: &HermitianOperator) -> Self {
        Self::symmetrized(&k.matmul(&h.base).matmul(&k.adjoint()))
    }

    /// Wraps `K† H K`.
    pub fn adjoint_congruence(k: &ComplexMatrix, h: &HermitianOperator) -> Self {
        Self::symmetrized(&k.adjoint().matmul(&h.base).matmul(k))
    }

    pub fn from_real(dim: usize, values: &[f64]) -> Result<Self> {
        Self::new(ComplexMatrix::from_real(dim, values)?)
    }

    pub fn zeros(dim: usize) -> Self {
        Self { base: ComplexMatrix::zeros(dim) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { base: ComplexMatrix::identity(dim) }
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        Self {
            base: ComplexMatrix::from_fn(n, |i, j| {
                if i == j {
                    C64::new(values[i], 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            }),
        }
    }

    /// The projector-like operator |v⟩⟨v| (not normalized).
    pub fn ket_bra(v: &[C64]) -> Self {
        Self::symmetrized(&ComplexMatrix::outer(v, v))
    }

    /// Single-entry symmetric unit: E_ij + E_ji for i ≠ j, E_ii otherwise.
    pub fn symmetric_unit(dim: usize, i: usize, j: usize) -> Self {
        let mut m = ComplexMatrix::zeros(dim);
        m.set(i, j, C64::new(1.0, 0.0));
        m.set(j, i, C64::new(1.0, 0.0));
        Self { base: m }
    }

    /// Antisymmetric imaginary unit: i(E_ji − E_ij) for i ≠ j.
    pub fn antisymmetric_unit(dim: usize, i: usize, j: usize) -> Self {
        assert_ne!(i, j);
        let mut m = ComplexMatrix::zeros(dim);
        m.set(i, j, C64::new(0.0, -1.0));
        m.set(j, i, C64::new(0.0, 1.0));
        Self { base: m }
    }

    pub fn pauli_x() -> Self {
        Self::symmetric_unit(2, 0, 1)
    }

    pub fn pauli_y() -> Self {
        Self::antisymmetric_unit(2, 0, 1)
    }

    pub fn pauli_z() -> Self {
        Self::diag(&[1.0, -1.0])
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.base
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.base.get(i, j)
    }

    pub fn trace(&self) -> f64 {
        self.base.trace().re
    }

    pub fn add(&self, rhs: &Self) -> Self {
        Self { base: self.base.add(&rhs.base) }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        Self { base: self.base.sub(&rhs.base) }
    }

    pub fn scale(&self, k: f64) -> Self {
        Self { base: self.base.scale(k) }
    }

    /// Adds `k` times `rhs` in place.
    pub fn axpy(&mut self, k: f64, rhs: &Self) {
        assert_eq!(self.dim(), rhs.dim(), "axpy dimension mismatch");
        for (a, b) in self.base.entries.iter_mut().zip(&rhs.base.entries) {
            *a += b * k;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.base.entries.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    pub fn is_real(&self) -> bool {
        self.base.entries.iter().all(|z| z.im == 0.0)
    }

    /// Real-symmetric embedding `[[Re, −Im], [Im, Re]]` of size 2n.
    pub fn real_embedding(&self) -> Vec<f64> {
        let n = self.dim();
        let m = 2 * n;
        let mut out = vec![0.0; m * m];
        for i in 0..n {
            for j in 0..n {
                let z = self.get(i, j);
                out[i * m + j] = z.re;
                out[(i + n) * m + j + n] = z.re;
                out[i * m + j + n] = -z.im;
                out[(i + n) * m + j] = z.im;
            }
        }
        out
    }

    /// Inverse of [`real_embedding`](Self::real_embedding), averaging the redundant copies.
    pub fn from_real_embedding(n: usize, embedded: &[f64]) -> Result<Self> {
        let m = 2 * n;
        if embedded.len() != m * m {
            return Err(Error::DimensionMismatch { expected: m * m, found: embedded.len() });
        }
        let base = ComplexMatrix::from_fn(n, |i, j| {
            let re = 0.5 * (embedded[i * m + j] + embedded[(i + n) * m + j + n]);
            let im = 0.5 * (embedded[(i + n) * m + j] - embedded[i * m + j + n]);
            C64::new(re, im)
        });
        Self::new(base)
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let n = self.dim();
        if self.is_real() {
            let a: Vec<f64> = self.base.entries.iter().map(|z| z.re).collect();
            return sym_eigen(n, &a).0;
        }
        let (vals, _) = sym_eigen(2 * n, &self.real_embedding());
        vals.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect()
    }

    /// Eigenvalues ascending with orthonormal eigenvectors.
    pub fn eigen(&self) -> (Vec<f64>, Vec<Vec<C64>>) {
        let n = self.dim();
        if self.is_real() {
            let a: Vec<f64> = self.base.entries.iter().map(|z| z.re).collect();
            let (vals, vecs) = sym_eigen(n, &a);
            let cols = (0..n).map(|k| (0..n).map(|i| C64::new(vecs[i * n + k], 0.0)).collect()).collect();
            return (vals, cols);
        }
        // Each eigenvalue appears twice in the embedding as (a; b) and (−b; a),
        // both mapping to multiples of the complex vector a + ib.
        let m = 2 * n;
        let (vals, vecs) = sym_eigen(m, &self.real_embedding());
        let mut out_vals = Vec::with_capacity(n);
        let mut out_vecs: Vec<Vec<C64>> = Vec::with_capacity(n);
        for k in 0..m {
            let mut v: Vec<C64> = (0..n).map(|i| C64::new(vecs[i * m + k], vecs[(i + n) * m + k])).collect();
            for u in &out_vecs {
                let proj: C64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                v.iter_mut().zip(u).for_each(|(b, a)| *b -= proj * a);
            }
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > 0.5 && out_vecs.len() < n {
                v.iter_mut().for_each(|z| *z /= norm);
                out_vecs.push(v);
                out_vals.push(vals[k]);
            }
        }
        (out_vals, out_vecs)
    }

    /// `V† H V` for the columns `V`.
    pub fn restrict(&self, cols: &[Vec<C64>]) -> HermitianOperator {
        let k = cols.len();
        let hv: Vec<Vec<C64>> = cols.iter().map(|c| self.base.apply(c)).collect();
        let m = ComplexMatrix::from_fn(k, |i, j| cols[i].iter().zip(&hv[j]).map(|(a, b)| a.conj() * b).sum());
        Self::new(m).expect("restriction of a Hermitian operator")
    }

    /// `V H V†` for the columns `V`, mapping back from a restricted space.
    pub fn extend(&self, cols: &[Vec<C64>], n: usize) -> HermitianOperator {
        let k = cols.len();
        let m = ComplexMatrix::from_fn(n, |i, j| {
            let mut acc = C64::new(0.0, 0.0);
            for a in 0..k {
                for b in 0..k {
                    acc += cols[a][i] * self.get(a, b) * cols[b][j].conj();
                }
            }
            acc
        });
        Self::new(m).expect("extension of a Hermitian operator")
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.eigenvalues().last().expect("nonempty spectrum")
    }

    pub fn spectral_norm(&self) -> f64 {
        let ev = self.eigenvalues();
        ev[0].abs().max(ev[ev.len() - 1].abs())
    }
}

pub fn min_eigenvalue(h: &HermitianOperator) -> f64 {
    h.min_eigenvalue()
}

/// Tr[A·B] for Hermitian A and B.
pub fn frobenius_inner(a: &HermitianOperator, b: &HermitianOperator) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    let n = a.dim();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += a.get(i, j) * b.get(j, i);
        }
    }
    let scale = 1.0 + a.base.frobenius_norm() * b.base.frobenius_norm();
    if acc.im.abs() > IMAG_TOL * scale {
        return Err(Error::NotHermitian { residual: acc.im.abs() });
    }
    Ok(acc.re)
}

/// Cyclic Jacobi eigensolver for a real symmetric row-major matrix.
///
/// Returns eigenvalues ascending and eigenvectors stored column-wise
/// (`vecs[i * n + k]` is component `i` of eigenvector `k`).
pub fn sym_eigen(n: usize, a: &[f64]) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    for i in 0..n {
        for j in 0..i {
            let avg = 0.5 * (m[i * n + j] + m[j * n + i]);
            m[i * n + j] = avg;
            m[j * n + i] = avg;
        }
    }
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    if n > 1 {
        for _sweep in 0..100 {
            let mut off = 0.0;
            let mut diag = 0.0;
            for i in 0..n {
                diag += m[i * n + i] * m[i * n + i];
                for j in (i + 1)..n {
                    off += m[i * n + j] * m[i * n + j];
                }
            }
            if off <= f64::EPSILON * f64::EPSILON * 1e-4 * (diag + off) || off == 0.0 {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = m[p * n + q];
                    if apq == 0.0 {
                        continue;
                    }
                    let app = m[p * n + p];
                    let aqq = m[q * n + q];
                    let theta = (aqq - app) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let mkp = m[k * n + p];
                        let mkq = m[k * n + q];
                        m[k * n + p] = c * mkp - s * mkq;
                        m[k * n + q] = s * mkp + c * mkq;
                    }
                    for k in 0..n {
                        let mpk = m[p * n + k];
                        let mqk = m[q * n + k];
                        m[p * n + k] = c * mpk - s * mqk;
                        m[q * n + k] = s * mpk + c * mqk;
                    }
                    m[p * n + q] = 0.0;
                    m[q * n + p] = 0.0;
                    for k in 0..n {
                        let vkp = v[k * n + p];
                        let vkq = v[k * n + q];
                        v[k * n + p] = c * vkp - s * vkq;
                        v[k * n + q] = s * vkp + c * vkq;
                    }
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| m[x * n + x].total_cmp(&m[y * n + y]));
    let vals = order.iter().map(|&k| m[k * n + k]).collect();
    let mut vecs = vec![0.0; n * n];
    for (col, &k) in order.iter().enumerate() {
        for i in 0..n {
            vecs[i * n + col] = v[i * n + k];
        }
    }
    (vals, vecs)
}
