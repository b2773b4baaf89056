//! Parameter vectors, multi-index layout and the Kronecker algebra shared by
//! every other module.
//!
//! Coefficients are stored in row-major order with the first variable varying
//! slowest, i.e. the order of `(0..=M_1) ⊗ (0..=M_2) ⊗ … ⊗ (0..=M_n)`. All
//! index arithmetic goes through [`DimVector::linear_index`] and
//! [`DimVector::strides`].

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Absolute tolerance on `‖c‖² − 1/(2π)^n`.
pub const NORM_TOLERANCE: f64 = 1e-12;

/// Below this modulus the leading coefficient has no usable phase.
pub const PHASE_EPS: f64 = 1e-14;

/// Number of terms `(M_1, …, M_n)` of each trigonometric sum.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DimVector(Vec<usize>);

impl DimVector {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::arg("dimension vector must have at least one entry"));
        }
        dims.iter()
            .try_fold(1usize, |acc, &m| acc.checked_mul(m + 1))
            .ok_or_else(|| Error::arg("parameter vector length overflows usize"))?;
        Ok(DimVector(dims))
    }

    /// `n` copies of the same order.
    pub fn uniform(n_vars: usize, order: usize) -> Result<Self> {
        Self::new(vec![order; n_vars])
    }

    pub fn n_vars(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// `M_s` for the variable at position `var` (0-based).
    pub fn order(&self, var: usize) -> usize {
        self.0[var]
    }

    /// `∏ (M_s + 1)`.
    pub fn total_len(&self) -> usize {
        self.0.iter().map(|m| m + 1).product()
    }

    /// Row-major strides: `stride[s] = ∏_{t>s} (M_t + 1)`.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.0.len()];
        for s in (0..self.0.len().saturating_sub(1)).rev() {
            strides[s] = strides[s + 1] * (self.0[s + 1] + 1);
        }
        strides
    }

    /// Position of the coefficient `c_{k_1 … k_n}` in the flat vector.
    pub fn linear_index(&self, multi_index: &[usize]) -> Result<usize> {
        let out_of_range = || Error::Index {
            index: multi_index.to_vec(),
            dims: self.0.clone(),
        };
        if multi_index.len() != self.0.len() {
            return Err(out_of_range());
        }
        let mut idx = 0;
        for (&k, &m) in multi_index.iter().zip(&self.0) {
            if k > m {
                return Err(out_of_range());
            }
            idx = idx * (m + 1) + k;
        }
        Ok(idx)
    }

    /// Inverse of [`linear_index`](Self::linear_index).
    pub fn multi_index(&self, mut idx: usize) -> Result<Vec<usize>> {
        if idx >= self.total_len() {
            return Err(Error::Index {
                index: vec![idx],
                dims: self.0.clone(),
            });
        }
        let mut out = vec![0; self.0.len()];
        for s in (0..self.0.len()).rev() {
            let base = self.0[s] + 1;
            out[s] = idx % base;
            idx /= base;
        }
        Ok(out)
    }

    /// Dimension vector of the variables at `vars` (0-based), in that order.
    pub fn select(&self, vars: &[usize]) -> Result<DimVector> {
        let dims = vars
            .iter()
            .map(|&v| {
                self.0
                    .get(v)
                    .copied()
                    .ok_or_else(|| Error::arg(format!("variable {} out of range", v + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        DimVector::new(dims)
    }

    /// Number of free real parameters of a model on these dims: one complex
    /// sphere constraint and one phase convention are removed.
    pub fn free_parameters(&self) -> usize {
        2 * self.total_len() - 2
    }
}

impl std::fmt::Display for DimVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|m| m.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// `(a ⊗ b)[i·len(b) + j] = a[i]·b[j]`.
pub fn kronecker(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &x in a {
        out.extend(b.iter().map(|&y| x * y));
    }
    out
}

/// Kronecker product of all factors, left to right.
pub fn kronecker_all<'a, I>(factors: I) -> Vec<Complex64>
where
    I: IntoIterator<Item = &'a [Complex64]>,
{
    let mut out = vec![Complex64::new(1.0, 0.0)];
    for f in factors {
        out = kronecker(&out, f);
    }
    out
}

/// Kronecker product written into a preallocated buffer.
///
/// `out` must have length `∏ len(f)`; `factors` may be empty (gives `[1]`).
pub(crate) fn kronecker_into(factors: &[&[Complex64]], out: &mut [Complex64]) {
    out[0] = Complex64::new(1.0, 0.0);
    let mut len = 1;
    for f in factors {
        let flen = f.len();
        // expand in place from the back so earlier entries are read before overwritten
        for i in (0..len).rev() {
            let x = out[i];
            for j in (0..flen).rev() {
                out[i * flen + j] = x * f[j];
            }
        }
        len *= flen;
    }
    debug_assert_eq!(len, out.len());
}

pub(crate) fn norm_sqr(c: &[Complex64]) -> f64 {
    c.iter().map(|z| z.norm_sqr()).sum()
}

/// `(2π)^{-n}`, the squared norm every parameter vector must have.
pub fn target_norm_sqr(n_vars: usize) -> f64 {
    TAU.powi(-(n_vars as i32))
}

/// Result of [`normalize`].
#[derive(Debug, Clone)]
pub struct Normalized {
    pub coeffs: Vec<Complex64>,
    /// False when `|c[0]|` was too small to define a phase; the vector was
    /// only rescaled.
    pub phase_fixed: bool,
}

/// Scale `c` onto the sphere `‖c‖² = (2π)^{-n}` and rotate its global phase
/// so that `c[0]` is real and nonnegative.
pub fn normalize(c: &[Complex64], n_vars: usize) -> Result<Normalized> {
    let norm = norm_sqr(c).sqrt();
    if c.is_empty() || !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::Degenerate(
            "cannot normalize a zero or non-finite parameter vector".into(),
        ));
    }
    let scale = target_norm_sqr(n_vars).sqrt() / norm;
    let lead = c[0].norm();
    let phase_fixed = lead * scale >= PHASE_EPS;
    let rot = if phase_fixed {
        c[0].conj() / lead
    } else {
        Complex64::new(1.0, 0.0)
    };
    let factor = rot * scale;
    let mut coeffs: Vec<Complex64> = c.iter().map(|&z| z * factor).collect();
    // below the phase threshold only c[0] itself is projected onto the
    // nonnegative axis; the rest of the vector keeps its phase
    coeffs[0] = Complex64::new(coeffs[0].norm(), 0.0);
    Ok(Normalized {
        coeffs,
        phase_fixed,
    })
}

/// A multivariate nonnegative trigonometric sums distribution: the dimension
/// vector together with a parameter vector on the constraint sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct MnntsParams {
    dims: DimVector,
    coeffs: Vec<Complex64>,
}

impl MnntsParams {
    /// Validate an already-normalized parameter vector.
    pub fn new(dims: DimVector, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != dims.total_len() {
            return Err(Error::arg(format!(
                "parameter vector has {} entries, dims {} need {}",
                coeffs.len(),
                dims,
                dims.total_len()
            )));
        }
        if coeffs
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::arg("parameter vector has non-finite entries"));
        }
        let target = target_norm_sqr(dims.n_vars());
        let norm = norm_sqr(&coeffs);
        if (norm - target).abs() > NORM_TOLERANCE {
            return Err(Error::arg(format!(
                "squared norm {norm:e} differs from (2π)^-n = {target:e}"
            )));
        }
        if coeffs[0].im != 0.0 || coeffs[0].re < 0.0 {
            return Err(Error::arg(
                "leading coefficient must be real and nonnegative",
            ));
        }
        Ok(MnntsParams { dims, coeffs })
    }

    /// Normalize an arbitrary nonzero vector and wrap it.
    pub fn from_unnormalized(dims: DimVector, coeffs: &[Complex64]) -> Result<Self> {
        if coeffs.len() != dims.total_len() {
            return Err(Error::arg(format!(
                "parameter vector has {} entries, dims {} need {}",
                coeffs.len(),
                dims,
                dims.total_len()
            )));
        }
        let n = dims.n_vars();
        let Normalized { coeffs, .. } = normalize(coeffs, n)?;
        Ok(MnntsParams { dims, coeffs })
    }

    /// The uniform distribution on the torus with the given dims.
    pub fn uniform(dims: DimVector) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); dims.total_len()];
        coeffs[0] = Complex64::new(target_norm_sqr(dims.n_vars()).sqrt(), 0.0);
        MnntsParams { dims, coeffs }
    }

    pub fn dims(&self) -> &DimVector {
        &self.dims
    }

    pub fn n_vars(&self) -> usize {
        self.dims.n_vars()
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Reorder the variables: output variable `j` is input variable
    /// `perm[j]` (0-based).
    pub fn permute_vars(&self, perm: &[usize]) -> Result<MnntsParams> {
        let n = self.n_vars();
        check_permutation(perm, n)?;
        let new_dims = self.dims.select(perm)?;
        let old_strides = self.dims.strides();
        // stride in the old layout of each new position
        let gather: Vec<usize> = perm.iter().map(|&p| old_strides[p]).collect();
        let coeffs = gather_permuted(&self.coeffs, &new_dims, &gather);
        Ok(MnntsParams {
            dims: new_dims,
            coeffs,
        })
    }
}

/// Walks the new layout in row-major order and reads the old layout through
/// `gather` strides.
fn gather_permuted(src: &[Complex64], new_dims: &DimVector, gather: &[usize]) -> Vec<Complex64> {
    let n = new_dims.n_vars();
    let total = new_dims.total_len();
    let mut out = Vec::with_capacity(total);
    let mut counter = vec![0usize; n];
    let mut offset = 0usize;
    for _ in 0..total {
        out.push(src[offset]);
        for s in (0..n).rev() {
            counter[s] += 1;
            offset += gather[s];
            if counter[s] <= new_dims.order(s) {
                break;
            }
            offset -= gather[s] * counter[s];
            counter[s] = 0;
        }
    }
    out
}

pub(crate) fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(Error::arg(format!(
            "permutation has {} entries for {} variables",
            perm.len(),
            n
        )));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::arg(format!("{perm:?} is not a permutation")));
        }
        seen[p] = true;
    }
    Ok(())
}

/// Inverse of a 0-based permutation.
pub fn inverse_permutation(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (i, &p) in perm.iter().enumerate() {
        inv[p] = i;
    }
    inv
}
