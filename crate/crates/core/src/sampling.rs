//! Random variates from MNNTS models.
//!
//! Univariate draws invert the closed-form distribution function by
//! bisection. Multivariate draws use the chain rule: `θ_1` from the marginal
//! mixture of the first variable, then each following variable from the
//! first-variable marginal of the conditional given everything drawn so far.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::conditional::{conditional, ConditionalSpec};
use crate::dataset::{reduce_angle, AngularDataset};
use crate::density::UnivariateCdf;
use crate::error::{Error, Result};
use crate::marginal::marginal;
use crate::params::{DimVector, MnntsParams};
use crate::rng::SplitMix64;

const BISECTION_STEPS: usize = 60;
const MAX_RETRIES: usize = 100;

/// Smallest `θ` with `F(θ) ≥ u`, to within `2π · 2^-60`.
fn invert_cdf(cdf: &UnivariateCdf, u: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, TAU);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if cdf.eval(mid) < u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    reduce_angle(0.5 * (lo + hi))
}

/// Draws from a univariate model by inverse-transform sampling.
pub fn sample_univariate(p: &MnntsParams, rng: &mut SplitMix64, count: usize) -> Result<Vec<f64>> {
    let cdf = UnivariateCdf::new(p)?;
    Ok((0..count)
        .map(|_| invert_cdf(&cdf, rng.uniform()))
        .collect())
}

/// A univariate mixture ready for sampling.
struct UnivariateMixture {
    probs: Vec<f64>,
    cdfs: Vec<UnivariateCdf>,
}

impl UnivariateMixture {
    fn first_variable(p: &MnntsParams) -> Result<Self> {
        let m = marginal(p, &[0])?;
        let mut probs = Vec::with_capacity(m.probs().len());
        let mut cdfs = Vec::new();
        for (prob, comp) in m.probs().iter().zip(m.components()) {
            if *prob > 0.0 {
                probs.push(*prob);
                cdfs.push(UnivariateCdf::new(comp)?);
            }
        }
        Ok(UnivariateMixture { probs, cdfs })
    }

    fn draw(&self, rng: &mut SplitMix64) -> f64 {
        // a single component consumes no selection variate
        let k = if self.cdfs.len() == 1 {
            0
        } else {
            select_component(&self.probs, rng)
        };
        invert_cdf(&self.cdfs[k], rng.uniform())
    }
}

/// Index of the mixture component chosen by one uniform draw.
pub fn select_component(probs: &[f64], rng: &mut SplitMix64) -> usize {
    let total: f64 = probs.iter().sum();
    let u = rng.uniform() * total;
    let mut acc = 0.0;
    for (k, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return k;
        }
    }
    probs.len() - 1
}

/// `count` draws of the full random vector.
pub fn sample(p: &MnntsParams, rng: &mut SplitMix64, count: usize) -> Result<AngularDataset> {
    let n = p.n_vars();
    let names = AngularDataset::default_names(n);
    if n == 1 {
        let values = sample_univariate(p, rng, count)?;
        return AngularDataset::from_flat(names, values);
    }
    let first = UnivariateMixture::first_variable(p)?;
    let mut values = Vec::with_capacity(count * n);
    let mut row = Vec::with_capacity(n);
    for _ in 0..count {
        let mut attempts = 0;
        loop {
            row.clear();
            match draw_chain(p, &first, rng, &mut row) {
                Ok(()) => break,
                Err(Error::DegenerateConditioning { .. }) if attempts + 1 < MAX_RETRIES => {
                    attempts += 1;
                }
                Err(e) => return Err(e),
            }
        }
        values.extend_from_slice(&row);
    }
    AngularDataset::from_flat(names, values)
}

fn draw_chain(
    p: &MnntsParams,
    first: &UnivariateMixture,
    rng: &mut SplitMix64,
    row: &mut Vec<f64>,
) -> Result<()> {
    let theta = first.draw(rng);
    row.push(theta);
    let mut current = conditional(p, &ConditionalSpec::new().with(0, theta))?;
    loop {
        if current.n_vars() == 1 {
            let cdf = UnivariateCdf::new(&current)?;
            row.push(invert_cdf(&cdf, rng.uniform()));
            return Ok(());
        }
        let theta = UnivariateMixture::first_variable(&current)?.draw(rng);
        row.push(theta);
        current = conditional(&current, &ConditionalSpec::new().with(0, theta))?;
    }
}

/// A random model with complex Gaussian coefficients, normalized.
pub fn random_params(dims: &DimVector, rng: &mut SplitMix64) -> MnntsParams {
    let raw: Vec<Complex64> = (0..dims.total_len())
        .map(|_| Complex64::new(rng.normal(), rng.normal()))
        .collect();
    MnntsParams::from_unnormalized(dims.clone(), &raw).expect("gaussian vector is nonzero")
}
