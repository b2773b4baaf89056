//! Dense Hermitian eigendecomposition by cyclic complex Jacobi rotations.

use num_complex::Complex64;

use crate::error::{Error, Result};

const HERMITIAN_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;
const OFF_DIAG_REL_TOL: f64 = 1e-13;

/// Square Hermitian matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl HermitianMatrix {
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::arg(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                entries.len()
            )));
        }
        for i in 0..dim {
            if entries[i * dim + i].im.abs() > HERMITIAN_TOL {
                return Err(Error::arg(format!("diagonal entry {i} is not real")));
            }
            for j in (i + 1)..dim {
                let a = entries[i * dim + j];
                let b = entries[j * dim + i];
                if (a - b.conj()).norm() > HERMITIAN_TOL {
                    return Err(Error::arg(format!(
                        "entries ({i},{j}) and ({j},{i}) are not conjugate"
                    )));
                }
            }
        }
        Ok(HermitianMatrix { dim, entries })
    }

    /// `scale · B B^H` for a row-major `rows × cols` matrix `B`.
    pub fn gram_rows(b: &[Complex64], rows: usize, cols: usize, scale: f64) -> Self {
        assert_eq!(b.len(), rows * cols);
        let mut entries = vec![Complex64::new(0.0, 0.0); rows * rows];
        for i in 0..rows {
            let ri = &b[i * cols..(i + 1) * cols];
            for j in i..rows {
                let rj = &b[j * cols..(j + 1) * cols];
                let s: Complex64 = ri.iter().zip(rj).map(|(x, y)| x * y.conj()).sum();
                entries[i * rows + j] = s * scale;
                entries[j * rows + i] = s.conj() * scale;
            }
            entries[i * rows + i].im = 0.0;
        }
        HermitianMatrix { dim: rows, entries }
    }

    /// `scale · B^H B` for a row-major `rows × cols` matrix `B`.
    pub fn gram_cols(b: &[Complex64], rows: usize, cols: usize, scale: f64) -> Self {
        assert_eq!(b.len(), rows * cols);
        let mut entries = vec![Complex64::new(0.0, 0.0); cols * cols];
        for r in 0..rows {
            let row = &b[r * cols..(r + 1) * cols];
            for i in 0..cols {
                let xi = row[i].conj();
                if xi == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in i..cols {
                    entries[i * cols + j] += xi * row[j];
                }
            }
        }
        for i in 0..cols {
            entries[i * cols + i] = Complex64::new(entries[i * cols + i].re * scale, 0.0);
            for j in (i + 1)..cols {
                let v = entries[i * cols + j] * scale;
                entries[i * cols + j] = v;
                entries[j * cols + i] = v.conj();
            }
        }
        HermitianMatrix { dim: cols, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.dim + j]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i).re).sum()
    }
}

/// Eigenvalues in descending order with orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct HermitianEig {
    pub eigenvalues: Vec<f64>,
    /// Column `k` is the eigenvector of `eigenvalues[k]`; stored row-major
    /// (`vectors[i * dim + k]`).
    vectors: Vec<Complex64>,
    dim: usize,
}

impl HermitianEig {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Eigenvector `k` as a contiguous vector.
    pub fn eigenvector(&self, k: usize) -> Vec<Complex64> {
        (0..self.dim)
            .map(|i| self.vectors[i * self.dim + k])
            .collect()
    }

    pub fn vector_entry(&self, i: usize, k: usize) -> Complex64 {
        self.vectors[i * self.dim + k]
    }
}

/// Full decomposition `A = V Λ V^H`.
///
/// Each eigenvector's phase is fixed so that its largest-magnitude entry (the
/// first one on ties) is real and positive.
pub fn hermitian_eig(matrix: &HermitianMatrix) -> Result<HermitianEig> {
    let n = matrix.dim;
    let mut a = matrix.entries.clone();
    let mut v = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        v[i * n + i] = Complex64::new(1.0, 0.0);
        a[i * n + i].im = 0.0;
    }

    let fro: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let threshold = OFF_DIAG_REL_TOL * fro;
    let off = |a: &[Complex64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += 2.0 * a[i * n + j].norm_sqr();
            }
        }
        s.sqrt()
    };

    let mut converged = off(&a) <= threshold;
    let mut sweeps = 0;
    while !converged && sweeps < MAX_SWEEPS {
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, n, p, q);
            }
        }
        sweeps += 1;
        converged = off(&a) <= threshold;
    }
    if !converged {
        return Err(Error::Numeric(format!(
            "Jacobi eigensolver did not converge after {MAX_SWEEPS} sweeps (off-diagonal norm {:e})",
            off(&a)
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].re.total_cmp(&a[i * n + i].re));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[i * n + i].re).collect();
    let mut vectors = vec![Complex64::new(0.0, 0.0); n * n];
    for (k, &src) in order.iter().enumerate() {
        let mut best = 0;
        let mut best_mag = -1.0;
        for i in 0..n {
            let mag = v[i * n + src].norm();
            if mag > best_mag * (1.0 + 1e-12) {
                best = i;
                best_mag = mag;
            }
        }
        let pivot = v[best * n + src];
        let phase = pivot.conj() / pivot.norm();
        for i in 0..n {
            vectors[i * n + k] = v[i * n + src] * phase;
        }
        vectors[best * n + k] = Complex64::new(vectors[best * n + k].norm(), 0.0);
    }
    Ok(HermitianEig {
        eigenvalues,
        vectors,
        dim: n,
    })
}

/// One Jacobi rotation annihilating `a[p][q]`.
///
/// With `a_pq = r e^{iφ}` the rotation is `U = Q R Q^H`, `Q = diag(1, e^{-iφ})`
/// on the `(p, q)` plane and `R` the real symmetric Jacobi rotation of
/// `[[a_pp, r], [r, a_qq]]`.
fn rotate(a: &mut [Complex64], v: &mut [Complex64], n: usize, p: usize, q: usize) {
    let apq = a[p * n + q];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let app = a[p * n + p].re;
    let aqq = a[q * n + q].re;
    // skip rotations that cannot change the diagonal in floating point
    if r < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        a[p * n + q] = Complex64::new(0.0, 0.0);
        a[q * n + p] = Complex64::new(0.0, 0.0);
        return;
    }
    let phase = apq / r; // e^{iφ}
    let zeta = (aqq - app) / (2.0 * r);
    let t = if zeta >= 0.0 {
        1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
    } else {
        -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    // U_pp = c, U_pq = s e^{iφ}, U_qp = -s e^{-iφ}, U_qq = c
    let u_pq = phase * s;
    let u_qp = -phase.conj() * s;

    // A <- A U (columns p, q)
    for k in 0..n {
        let akp = a[k * n + p];
        let akq = a[k * n + q];
        a[k * n + p] = akp * c + akq * u_qp;
        a[k * n + q] = akp * u_pq + akq * c;
    }
    // A <- U^H A (rows p, q)
    for k in 0..n {
        let apk = a[p * n + k];
        let aqk = a[q * n + k];
        a[p * n + k] = apk * c + aqk * u_qp.conj();
        a[q * n + k] = apk * u_pq.conj() + aqk * c;
    }
    a[p * n + p] = Complex64::new(app - t * r, 0.0);
    a[q * n + q] = Complex64::new(aqq + t * r, 0.0);
    a[p * n + q] = Complex64::new(0.0, 0.0);
    a[q * n + p] = Complex64::new(0.0, 0.0);

    for k in 0..n {
        let vkp = v[k * n + p];
        let vkq = v[k * n + q];
        v[k * n + p] = vkp * c + vkq * u_qp;
        v[k * n + q] = vkp * u_pq + vkq * c;
    }
}
