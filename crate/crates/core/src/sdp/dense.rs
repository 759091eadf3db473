//! Row-major dense kernels for the interior-point solver.

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0f64; 4];
    let chunks = n / 4;
    for c in 0..chunks {
        let i = 4 * c;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut tail = 0.0;
    for i in 4 * chunks..n {
        tail += a[i] * b[i];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

pub(crate) fn matmul(n: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    out
}

pub(crate) fn transpose(n: usize, a: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            out[j * n + i] = a[i * n + j];
        }
    }
    out
}

/// `A · B · Aᵀ`.
pub(crate) fn congruence(n: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    let ab = matmul(n, a, b);
    let mut out = matmul(n, &ab, &transpose(n, a));
    symmetrize(n, &mut out);
    out
}

pub(crate) fn symmetrize(n: usize, a: &mut [f64]) {
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (a[i * n + j] + a[j * n + i]);
            a[i * n + j] = v;
            a[j * n + i] = v;
        }
    }
}

pub(crate) fn inner(a: &[f64], b: &[f64]) -> f64 {
    dot(a, b)
}

pub(crate) fn frob_norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Lower Cholesky factor of a small positive definite matrix.
pub(crate) fn cholesky_small(n: usize, a: &[f64]) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let s = a[i * n + j] - dot(&l[i * n..i * n + j], &l[j * n..j * n + j]);
            if i == j {
                if !(s > 0.0) {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Some(l)
}

pub(crate) fn lower_inverse(n: usize, l: &[f64]) -> Vec<f64> {
    let mut inv = vec![0.0; n * n];
    for col in 0..n {
        for i in col..n {
            let mut s = if i == col { 1.0 } else { 0.0 };
            for k in col..i {
                s -= l[i * n + k] * inv[k * n + col];
            }
            inv[i * n + col] = s / l[i * n + i];
        }
    }
    inv
}

const FROZEN: f64 = 1e64;

/// Dense Cholesky factorization of the Schur complement.
///
/// Pivots that collapse relative to their original diagonal mark linearly
/// dependent rows; those directions are frozen rather than aborting.
pub(crate) struct SchurFactor {
    n: usize,
    l: Vec<f64>,
}

impl SchurFactor {
    pub(crate) fn factor(n: usize, mut a: Vec<f64>) -> Option<Self> {
        let diag: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
        let scale = diag.iter().cloned().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        for i in 0..n {
            let (head, tail) = a.split_at_mut(i * n);
            let row_i = &mut tail[..n];
            for j in 0..i {
                let row_j = &head[j * n..j * n + j];
                let s = row_i[j] - dot(&row_i[..j], row_j);
                row_i[j] = s / head[j * n + j];
            }
            let s = row_i[i] - dot(&row_i[..i], &row_i[..i]);
            if !s.is_finite() {
                return None;
            }
            if s <= 1e-14 * diag[i].max(1e-30 * scale) {
                row_i[i] = FROZEN;
            } else {
                row_i[i] = s.sqrt();
            }
            for v in &mut row_i[i + 1..] {
                *v = 0.0;
            }
        }
        Some(Self { n, l: a })
    }

    #[cfg(test)]
    fn frozen(&self) -> usize {
        (0..self.n).filter(|&i| self.l[i * self.n + i] == FROZEN).count()
    }

    pub(crate) fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut z = rhs.to_vec();
        for i in 0..n {
            let s = z[i] - dot(&self.l[i * n..i * n + i], &z[..i]);
            z[i] = s / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = z[i];
            for k in (i + 1)..n {
                s -= self.l[k * n + i] * z[k];
            }
            z[i] = s / self.l[i * n + i];
        }
        z
    }
}
