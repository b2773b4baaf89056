//! Conditional distributions given fixed values of some variables.
//!
//! Fixing `θ_C = θ*_C` contracts the parameter vector with the conjugated
//! moment vector of the conditioning block,
//! `c* = (I ⊗ e*_C^H) c`, and the conditional is `c*` renormalized onto the
//! sphere of the free variables. The norm of the contraction carries the
//! marginal density of the conditioning block:
//! `f_C(θ*_C) = (2π)^{|free|} ‖c*‖²`.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::dataset::reduce_angle;
use crate::density::moment_vector;
use crate::error::{Error, Result};
use crate::marginal::complement;
use crate::params::{normalize, MnntsParams};

/// Conditional densities are refused where the conditioning block's marginal
/// density is below this value.
pub const DEGENERACY_THRESHOLD: f64 = 1e-12;

/// Fixed values of the conditioning variables, keyed by 0-based index.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConditionalSpec {
    given: BTreeMap<usize, f64>,
}

impl ConditionalSpec {
    pub fn new() -> Self {
        Self::default()
    }

    /// Build from `(variable, angle)` pairs; repeated variables are an error.
    pub fn from_pairs(pairs: &[(usize, f64)]) -> Result<Self> {
        let mut spec = ConditionalSpec::new();
        for &(var, angle) in pairs {
            if spec.given.contains_key(&var) {
                return Err(Error::arg(format!("variable {} is fixed twice", var + 1)));
            }
            spec = spec.with(var, angle);
        }
        Ok(spec)
    }

    pub fn with(mut self, var: usize, angle: f64) -> Self {
        self.given.insert(var, reduce_angle(angle));
        self
    }

    pub fn vars(&self) -> Vec<usize> {
        self.given.keys().copied().collect()
    }

    pub fn angles(&self) -> Vec<f64> {
        self.given.values().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.given.len()
    }

    pub fn is_empty(&self) -> bool {
        self.given.is_empty()
    }
}

/// Result of contracting the joint vector at the conditioning point.
pub(crate) struct Contraction {
    pub free: Vec<usize>,
    pub coeffs: Vec<Complex64>,
    /// Marginal density of the conditioning block at the conditioning point.
    pub block_density: f64,
}

pub(crate) fn contract(p: &MnntsParams, spec: &ConditionalSpec) -> Result<Contraction> {
    let n = p.n_vars();
    if spec.is_empty() {
        return Err(Error::arg("conditioning set is empty"));
    }
    let given = spec.vars();
    if let Some(&bad) = given.iter().find(|&&v| v >= n) {
        return Err(Error::arg(format!(
            "conditioning variable {} but the model has {n}",
            bad + 1
        )));
    }
    if given.len() >= n {
        return Err(Error::arg("at least one variable must remain free"));
    }
    let free = complement(&given, n);
    let perm: Vec<usize> = free.iter().chain(&given).copied().collect();
    let permuted = p.permute_vars(&perm)?;
    let given_dims = p.dims().select(&given)?;
    let e_star = moment_vector(&given_dims, &spec.angles());
    let width = e_star.len();
    let coeffs: Vec<Complex64> = permuted
        .coeffs()
        .chunks_exact(width)
        .map(|slice| slice.iter().zip(&e_star).map(|(c, e)| c * e.conj()).sum())
        .collect();
    let norm_sqr: f64 = coeffs.iter().map(|z| z.norm_sqr()).sum();
    let block_density = TAU.powi(free.len() as i32) * norm_sqr;
    Ok(Contraction {
        free,
        coeffs,
        block_density,
    })
}

/// Parameters of the distribution of the free variables (in ascending
/// order) given `spec`.
pub fn conditional(p: &MnntsParams, spec: &ConditionalSpec) -> Result<MnntsParams> {
    let Contraction {
        free,
        coeffs,
        block_density,
    } = contract(p, spec)?;
    if !(block_density >= DEGENERACY_THRESHOLD) {
        return Err(Error::DegenerateConditioning {
            density: block_density,
        });
    }
    let free_dims = p.dims().select(&free)?;
    let coeffs = normalize(&coeffs, free.len())?.coeffs;
    MnntsParams::new(free_dims, coeffs)
}

/// Marginal density of the conditioning block at its fixed values.
pub fn conditioning_density(p: &MnntsParams, spec: &ConditionalSpec) -> Result<f64> {
    Ok(contract(p, spec)?.block_density)
}
