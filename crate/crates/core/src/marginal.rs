//! Marginal distributions of variable subsets.
//!
//! With the kept block permuted to the front, the parameter vector reshapes
//! into a `K × L` matrix `B` (kept multi-index by row, integrated-out
//! multi-index by column). The marginal density is `e^H C e` with
//! `C = (2π)^{|out|} B B^H`; its eigenpairs give a finite mixture of
//! lower-dimensional models with weights `p_m = (2π)^{|keep|} λ_m`.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::density::{density_unchecked, AnglePoint};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, HermitianMatrix};
use crate::params::{normalize, DimVector, MnntsParams};

/// A marginal density written as `Σ_m probs[m] · f(θ; components[m])`.
#[derive(Debug, Clone)]
pub struct MarginalMixture {
    keep: Vec<usize>,
    dims: DimVector,
    probs: Vec<f64>,
    components: Vec<MnntsParams>,
}

impl MarginalMixture {
    /// Assemble a mixture directly. `probs` must be nonnegative and sum to one
    /// within `1e-10`.
    pub fn new(dims: DimVector, probs: Vec<f64>, components: Vec<MnntsParams>) -> Result<Self> {
        if probs.is_empty() || probs.len() != components.len() {
            return Err(Error::arg("mixture needs one probability per component"));
        }
        if probs.iter().any(|&p| !(p >= 0.0)) {
            return Err(Error::arg("mixture probabilities must be nonnegative"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::arg(format!("mixture probabilities sum to {total}")));
        }
        if components.iter().any(|c| c.dims() != &dims) {
            return Err(Error::arg("mixture components must share the mixture dims"));
        }
        let keep = (0..dims.n_vars()).collect();
        Ok(MarginalMixture {
            keep,
            dims,
            probs,
            components,
        })
    }

    /// Variables of the joint model this marginal covers (0-based, ascending).
    pub fn keep(&self) -> &[usize] {
        &self.keep
    }

    pub fn dims(&self) -> &DimVector {
        &self.dims
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn components(&self) -> &[MnntsParams] {
        &self.components
    }

    /// Drop components whose probability is below `threshold`, renormalizing
    /// the remaining weights.
    pub fn truncated(&self, threshold: f64) -> MarginalMixture {
        let mut probs = Vec::new();
        let mut components = Vec::new();
        for (p, c) in self.probs.iter().zip(&self.components) {
            if *p >= threshold {
                probs.push(*p);
                components.push(c.clone());
            }
        }
        if probs.is_empty() {
            // keep the dominant component
            probs.push(self.probs[0]);
            components.push(self.components[0].clone());
        }
        let total: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= total);
        MarginalMixture {
            keep: self.keep.clone(),
            dims: self.dims.clone(),
            probs,
            components,
        }
    }

    /// Mixture density at `x` (coordinates of the kept variables).
    pub fn density(&self, x: &AnglePoint) -> Result<f64> {
        if x.len() != self.dims.n_vars() {
            return Err(Error::arg(format!(
                "point has {} components, marginal has {} variables",
                x.len(),
                self.dims.n_vars()
            )));
        }
        Ok(self.density_unchecked(x.as_slice()))
    }

    pub(crate) fn density_unchecked(&self, theta: &[f64]) -> f64 {
        self.probs
            .iter()
            .zip(&self.components)
            .filter(|(p, _)| **p > 0.0)
            .map(|(p, c)| p * density_unchecked(c, theta))
            .sum()
    }
}

/// Alias of [`MarginalMixture::density`].
pub fn mixture_density(m: &MarginalMixture, x: &AnglePoint) -> Result<f64> {
    m.density(x)
}

/// Validate a set of 0-based variable indices and return it sorted.
pub(crate) fn sorted_subset(vars: &[usize], n: usize, what: &str) -> Result<Vec<usize>> {
    if vars.is_empty() {
        return Err(Error::arg(format!("{what} set is empty")));
    }
    let mut sorted = vars.to_vec();
    sorted.sort_unstable();
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            return Err(Error::arg(format!(
                "{what} set repeats variable {}",
                w[0] + 1
            )));
        }
    }
    if let Some(&last) = sorted.last() {
        if last >= n {
            return Err(Error::arg(format!(
                "{what} set names variable {} but the model has {n}",
                last + 1
            )));
        }
    }
    Ok(sorted)
}

/// Complement of a sorted subset of `0..n`.
pub(crate) fn complement(sorted: &[usize], n: usize) -> Vec<usize> {
    (0..n)
        .filter(|v| sorted.binary_search(v).is_err())
        .collect()
}

/// Marginal distribution of the variables in `keep` (0-based; any order,
/// returned ascending).
///
/// The mixture has `min(K, L)` components, where `K` and `L` are the
/// parameter-block sizes of the kept and integrated-out variables; all other
/// eigenvalues of `C` vanish identically.
pub fn marginal(p: &MnntsParams, keep: &[usize]) -> Result<MarginalMixture> {
    let n = p.n_vars();
    let keep = sorted_subset(keep, n, "keep")?;
    if keep.len() == n {
        return Ok(MarginalMixture {
            keep,
            dims: p.dims().clone(),
            probs: vec![1.0],
            components: vec![p.clone()],
        });
    }
    let out = complement(&keep, n);
    let perm: Vec<usize> = keep.iter().chain(&out).copied().collect();
    let permuted = p.permute_vars(&perm)?;
    let keep_dims = p.dims().select(&keep)?;
    let rows = keep_dims.total_len();
    let cols = permuted.coeffs().len() / rows;
    let b = permuted.coeffs();
    let out_scale = TAU.powi(out.len() as i32);
    let keep_scale = TAU.powi(keep.len() as i32);

    let (eigenvalues, vectors) = if rows <= cols {
        let c = HermitianMatrix::gram_rows(b, rows, cols, out_scale);
        let eig = hermitian_eig(&c)?;
        let vectors: Vec<Vec<Complex64>> = (0..rows).map(|k| eig.eigenvector(k)).collect();
        (eig.eigenvalues, vectors)
    } else {
        // same nonzero spectrum from the smaller L × L Gram matrix; map each
        // eigenvector w to B w
        let g = HermitianMatrix::gram_cols(b, rows, cols, out_scale);
        let eig = hermitian_eig(&g)?;
        let scale = g.trace().max(f64::MIN_POSITIVE);
        let mut vectors: Vec<Vec<Complex64>> = Vec::with_capacity(cols);
        for k in 0..cols {
            let w = eig.eigenvector(k);
            let mut v: Vec<Complex64> = (0..rows)
                .map(|i| {
                    b[i * cols..(i + 1) * cols]
                        .iter()
                        .zip(&w)
                        .map(|(x, y)| x * y)
                        .sum()
                })
                .collect();
            if eig.eigenvalues[k] > 1e-14 * scale {
                let nv = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                v.iter_mut().for_each(|z| *z /= nv);
            } else {
                v = orthogonal_fill(&vectors, rows);
            }
            vectors.push(v);
        }
        (eig.eigenvalues, vectors)
    };

    let probs: Vec<f64> = eigenvalues
        .iter()
        .map(|&l| (l * keep_scale).max(0.0))
        .collect();
    let components = vectors
        .iter()
        .map(|v| {
            let coeffs = normalize(v, keep.len())?.coeffs;
            MnntsParams::new(keep_dims.clone(), coeffs)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MarginalMixture {
        keep,
        dims: keep_dims,
        probs,
        components,
    })
}

/// Mixture density on the uniform grid `θ_j = 2πj/N`, one row per point:
/// the angles followed by the density. With two variables the first varies
/// slowest.
pub fn density_grid(m: &MarginalMixture, n: usize) -> Result<Vec<Vec<f64>>> {
    if n == 0 {
        return Err(Error::arg("grid needs at least one point"));
    }
    let axis: Vec<f64> = (0..n).map(|j| TAU * j as f64 / n as f64).collect();
    match m.dims().n_vars() {
        1 => Ok(axis
            .iter()
            .map(|&t| vec![t, m.density_unchecked(&[t])])
            .collect()),
        2 => Ok(axis
            .iter()
            .flat_map(|&a| axis.iter().map(move |&b| (a, b)))
            .map(|(a, b)| vec![a, b, m.density_unchecked(&[a, b])])
            .collect()),
        k => Err(Error::arg(format!(
            "density grid needs one or two variables, got {k}"
        ))),
    }
}

/// A unit vector orthogonal to all of `basis`, by Gram–Schmidt on the
/// standard basis.
fn orthogonal_fill(basis: &[Vec<Complex64>], dim: usize) -> Vec<Complex64> {
    let mut best = vec![Complex64::new(0.0, 0.0); dim];
    let mut best_norm = -1.0;
    for i in 0..dim {
        let mut v = vec![Complex64::new(0.0, 0.0); dim];
        v[i] = Complex64::new(1.0, 0.0);
        for _ in 0..2 {
            for u in basis {
                let proj: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                v.iter_mut().zip(u).for_each(|(x, a)| *x -= proj * a);
            }
        }
        let nv = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if nv > best_norm {
            best_norm = nv;
            best = v;
        }
        if nv > 0.5 {
            break;
        }
    }
    best.iter_mut().for_each(|z| *z /= best_norm);
    best
}
