//! Parameter estimation from data.
//!
//! * [`fit_md`]: the normalized mean resultant of the observed moment vectors
//!   `e_k = ⊗_s (1, e^{iθ_ks}, …, e^{iM_sθ_ks})`. Closed form, one pass.
//! * [`fit_ml`]: maximum likelihood by projected gradient ascent on the unit
//!   sphere with an Armijo backtracking line search, started from the MD fit.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::dataset::AngularDataset;
use crate::density::{log_likelihood, trig_moments_into, DENSITY_FLOOR};
use crate::error::{Error, Result};
use crate::params::{kronecker_into, DimVector, MnntsParams};

/// Moment vectors are cached when `n_obs · ∏(M_s+1)` is at most this.
const CACHE_LIMIT: usize = 1 << 22;
const MD_DEGENERACY: f64 = 1e-14;
const ARMIJO: f64 = 1e-4;
const SHRINK: f64 = 0.5;
const MIN_STEP: f64 = 1e-20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Md,
    Ml,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "md" => Ok(Method::Md),
            "ml" => Ok(Method::Ml),
            other => Err(Error::arg(format!("unknown estimation method {other:?}"))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Md => "md",
            Method::Ml => "ml",
        })
    }
}

#[derive(Debug, Clone)]
pub struct FitReport {
    pub params: MnntsParams,
    pub method: Method,
    pub loglik: f64,
    /// Observations whose fitted density fell below the log-likelihood floor.
    pub underflows: usize,
    pub iterations: usize,
    pub converged: bool,
    /// Norm of the Riemannian gradient of the mean log-likelihood on the unit
    /// sphere at the returned point (ML only).
    pub grad_norm: Option<f64>,
    /// Log-likelihood after each accepted ML step, starting with the initial
    /// point.
    pub trace: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct MlOptions {
    pub init: Option<MnntsParams>,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for MlOptions {
    fn default() -> Self {
        MlOptions {
            init: None,
            max_iter: 1000,
            tol: 1e-8,
        }
    }
}

fn check_data(data: &AngularDataset, dims: &DimVector) -> Result<()> {
    if data.n_vars() != dims.n_vars() {
        return Err(Error::arg(format!(
            "dataset has {} variables but dims {} describe {}",
            data.n_vars(),
            dims,
            dims.n_vars()
        )));
    }
    if data.n_obs() == 0 {
        return Err(Error::data("dataset has no observations"));
    }
    Ok(())
}

/// Source of per-observation moment vectors; cached when small enough.
struct Moments<'a> {
    data: &'a AngularDataset,
    dims: &'a DimVector,
    cache: Option<Vec<Complex64>>,
}

impl<'a> Moments<'a> {
    fn new(data: &'a AngularDataset, dims: &'a DimVector, allow_cache: bool) -> Self {
        let len = dims.total_len();
        let mut m = Moments {
            data,
            dims,
            cache: None,
        };
        if allow_cache && data.n_obs().saturating_mul(len) <= CACHE_LIMIT {
            let mut cache = Vec::with_capacity(data.n_obs() * len);
            m.for_each(|_, e| cache.extend_from_slice(e));
            m.cache = Some(cache);
        }
        m
    }

    /// Calls `f(row_index, e_row)` in row order.
    fn for_each<F: FnMut(usize, &[Complex64])>(&self, mut f: F) {
        let len = self.dims.total_len();
        if let Some(cache) = &self.cache {
            for (i, e) in cache.chunks_exact(len).enumerate() {
                f(i, e);
            }
            return;
        }
        let n = self.dims.n_vars();
        let mut per_var: Vec<Vec<Complex64>> = vec![Vec::new(); n];
        let mut scratch = vec![Complex64::new(0.0, 0.0); len];
        for (i, row) in self.data.rows().enumerate() {
            for s in 0..n {
                trig_moments_into(row[s], self.dims.order(s), &mut per_var[s]);
            }
            let refs: Vec<&[Complex64]> = per_var.iter().map(|v| v.as_slice()).collect();
            kronecker_into(&refs, &mut scratch);
            f(i, &scratch);
        }
    }
}

/// Average of the observed moment vectors, `(1/n) Σ_k e_k` (not normalized).
pub fn mean_resultant(data: &AngularDataset, dims: &DimVector) -> Result<Vec<Complex64>> {
    check_data(data, dims)?;
    let mut sum = vec![Complex64::new(0.0, 0.0); dims.total_len()];
    Moments::new(data, dims, false).for_each(|_, e| {
        sum.iter_mut().zip(e).for_each(|(s, x)| *s += x);
    });
    let inv = 1.0 / data.n_obs() as f64;
    sum.iter_mut().for_each(|s| *s *= inv);
    Ok(sum)
}

/// Mean-resultant estimator.
pub fn fit_md(data: &AngularDataset, dims: &DimVector) -> Result<FitReport> {
    let resultant = mean_resultant(data, dims)?;
    let norm = resultant.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm < MD_DEGENERACY {
        return Err(Error::data("mean resultant of the moment vectors is zero"));
    }
    let params = MnntsParams::from_unnormalized(dims.clone(), &resultant)?;
    let ll = log_likelihood(&params, data)?;
    Ok(FitReport {
        params,
        method: Method::Md,
        loglik: ll.value,
        underflows: ll.underflows,
        iterations: 1,
        converged: true,
        grad_norm: None,
        trace: Vec::new(),
    })
}

/// `Σ_k ln |c^H e_k|²` for an arbitrary (not necessarily normalized) `c`.
/// Densities below the floor contribute `ln(1e-300)`.
pub fn raw_log_likelihood(
    coeffs: &[Complex64],
    dims: &DimVector,
    data: &AngularDataset,
) -> Result<f64> {
    check_data(data, dims)?;
    check_len(coeffs, dims)?;
    let mut total = 0.0;
    Moments::new(data, dims, false).for_each(|_, e| {
        total += log_term(dot_conj(coeffs, e).norm_sqr());
    });
    Ok(total)
}

/// Euclidean gradient of [`raw_log_likelihood`] packed as complex numbers
/// (`∂/∂re + i ∂/∂im` per coordinate): `2 Σ_k e_k e_k^H c / |c^H e_k|²`.
pub fn log_likelihood_gradient(
    coeffs: &[Complex64],
    dims: &DimVector,
    data: &AngularDataset,
) -> Result<Vec<Complex64>> {
    check_data(data, dims)?;
    check_len(coeffs, dims)?;
    let mut grad = vec![Complex64::new(0.0, 0.0); coeffs.len()];
    Moments::new(data, dims, false).for_each(|_, e| {
        let z = dot_conj(coeffs, e);
        let d = z.norm_sqr();
        if d > DENSITY_FLOOR {
            let w = z.conj() * (2.0 / d);
            grad.iter_mut().zip(e).for_each(|(g, x)| *g += x * w);
        }
    });
    Ok(grad)
}

fn check_len(coeffs: &[Complex64], dims: &DimVector) -> Result<()> {
    if coeffs.len() != dims.total_len() {
        return Err(Error::arg(format!(
            "parameter vector has {} entries, dims {} need {}",
            coeffs.len(),
            dims,
            dims.total_len()
        )));
    }
    Ok(())
}

/// `c^H e`.
fn dot_conj(c: &[Complex64], e: &[Complex64]) -> Complex64 {
    c.iter().zip(e).map(|(c, e)| c.conj() * e).sum()
}

fn log_term(d: f64) -> f64 {
    if d <= DENSITY_FLOOR {
        DENSITY_FLOOR.ln()
    } else {
        d.ln()
    }
}

/// Mean log-likelihood on the unit sphere and its Euclidean gradient.
struct Objective<'a> {
    moments: Moments<'a>,
    n_obs: f64,
}

impl Objective<'_> {
    fn value(&self, u: &[Complex64]) -> f64 {
        let mut total = 0.0;
        self.moments
            .for_each(|_, e| total += log_term(dot_conj(u, e).norm_sqr()));
        total / self.n_obs
    }

    fn value_and_gradient(&self, u: &[Complex64], grad: &mut [Complex64]) -> f64 {
        grad.iter_mut().for_each(|g| *g = Complex64::new(0.0, 0.0));
        let mut total = 0.0;
        let scale = 2.0 / self.n_obs;
        self.moments.for_each(|_, e| {
            let z = dot_conj(u, e);
            let d = z.norm_sqr();
            total += log_term(d);
            if d > DENSITY_FLOOR {
                let w = z.conj() * (scale / d);
                grad.iter_mut().zip(e).for_each(|(g, x)| *g += x * w);
            }
        });
        total / self.n_obs
    }
}

fn unit(v: &mut [Complex64]) {
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|z| *z /= n);
}

/// Maximum likelihood on the constraint sphere.
///
/// Runs on the unit sphere `u = (2π)^{n/2} c`, where the log-likelihood
/// differs from the mean objective only by constants. Each iteration takes
/// the Riemannian gradient `R = G − Re(u^H G) u`, tries the retraction
/// `normalize(u + tR)` starting at `t = 1` and halves `t` until the Armijo
/// condition holds. Stops when `‖R‖ < tol` or after `max_iter` iterations.
pub fn fit_ml(data: &AngularDataset, dims: &DimVector, options: &MlOptions) -> Result<FitReport> {
    check_data(data, dims)?;
    if !(options.tol > 0.0) {
        return Err(Error::arg("tolerance must be positive"));
    }
    let init = match &options.init {
        Some(p) => {
            if p.dims() != dims {
                return Err(Error::arg(format!(
                    "initial model has dims {}, expected {}",
                    p.dims(),
                    dims
                )));
            }
            p.clone()
        }
        None => fit_md(data, dims)?.params,
    };
    let n_vars = dims.n_vars();
    let n_obs = data.n_obs() as f64;
    let offset = -n_obs * n_vars as f64 * TAU.ln();
    let objective = Objective {
        moments: Moments::new(data, dims, true),
        n_obs,
    };

    let mut u: Vec<Complex64> = init.coeffs().to_vec();
    unit(&mut u);
    let len = u.len();
    let mut grad = vec![Complex64::new(0.0, 0.0); len];
    let mut candidate = vec![Complex64::new(0.0, 0.0); len];
    let mut value = objective.value_and_gradient(&u, &mut grad);
    let mut trace = vec![value * n_obs + offset];
    let mut iterations = 0;
    let mut converged = false;
    let mut grad_norm;

    loop {
        let radial: f64 = u.iter().zip(&grad).map(|(a, g)| (a.conj() * g).re).sum();
        grad.iter_mut().zip(&u).for_each(|(g, a)| *g -= a * radial);
        grad_norm = grad.iter().map(|g| g.norm_sqr()).sum::<f64>().sqrt();
        if !grad_norm.is_finite() || !value.is_finite() {
            return Err(Error::Numeric(format!(
                "non-finite gradient at ML iteration {iterations}"
            )));
        }
        if grad_norm < options.tol {
            converged = true;
            break;
        }
        if iterations >= options.max_iter {
            break;
        }

        let slope = grad_norm * grad_norm;
        let mut step = 1.0;
        let mut accepted = None;
        while step >= MIN_STEP {
            candidate
                .iter_mut()
                .zip(u.iter().zip(&grad))
                .for_each(|(c, (a, g))| *c = a + g * step);
            unit(&mut candidate);
            let v = objective.value(&candidate);
            if v >= value + ARMIJO * step * slope {
                accepted = Some(v);
                break;
            }
            step *= SHRINK;
        }
        let Some(_) = accepted else {
            // no ascent possible at working precision
            break;
        };
        std::mem::swap(&mut u, &mut candidate);
        iterations += 1;
        value = objective.value_and_gradient(&u, &mut grad);
        trace.push(value * n_obs + offset);
    }

    let params = MnntsParams::from_unnormalized(dims.clone(), &u)?;
    let ll = log_likelihood(&params, data)?;
    Ok(FitReport {
        params,
        method: Method::Ml,
        loglik: ll.value,
        underflows: ll.underflows,
        iterations,
        converged,
        grad_norm: Some(grad_norm),
        trace,
    })
}

/// Fit with either estimator using default ML options.
pub fn fit(data: &AngularDataset, dims: &DimVector, method: Method) -> Result<FitReport> {
    match method {
        Method::Md => fit_md(data, dims),
        Method::Ml => fit_ml(data, dims, &MlOptions::default()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{density, moment_vector, AnglePoint};
    use crate::params::kronecker;
    use crate::rng::SplitMix64;

    fn dataset(rows: &[Vec<f64>]) -> AngularDataset {
        AngularDataset::new(AngularDataset::default_names(rows[0].len()), rows).unwrap()
    }

    fn random_rows(n: usize, vars: usize, rng: &mut SplitMix64) -> Vec<Vec<f64>> {
        (0..n)
            .map(|_| (0..vars).map(|_| rng.uniform() * TAU).collect())
            .collect()
    }

    #[test]
    fn md_single_observation_peaks_at_the_observation() {
        let theta = 2.1;
        let dims = DimVector::new(vec![3]).unwrap();
        let fit = fit_md(&dataset(&[vec![theta]]), &dims).unwrap();
        let e = moment_vector(&dims, &[theta]);
        // ĉ ∝ e
        let ratio = fit.params.coeffs()[1] / e[1];
        for (c, x) in fit.params.coeffs().iter().zip(&e) {
            assert!((c - x * ratio).norm() < 1e-14);
        }
        let at = density(&fit.params, &AnglePoint::new(&[theta])).unwrap();
        for i in 0..720 {
            let t = TAU * i as f64 / 720.0;
            assert!(density(&fit.params, &AnglePoint::new(&[t])).unwrap() <= at + 1e-14);
        }
    }

    #[test]
    fn md_order_zero_is_uniform() {
        let mut rng = SplitMix64::new(1);
        let rows = random_rows(30, 3, &mut rng);
        let dims = DimVector::new(vec![0, 0, 0]).unwrap();
        let fit = fit_md(&dataset(&rows), &dims).unwrap();
        assert_eq!(fit.params, MnntsParams::uniform(dims));
    }

    #[test]
    fn md_linearity_over_halves() {
        let mut rng = SplitMix64::new(2);
        let rows = random_rows(40, 2, &mut rng);
        let dims = DimVector::new(vec![2, 1]).unwrap();
        let a = mean_resultant(&dataset(&rows[..25]), &dims).unwrap();
        let b = mean_resultant(&dataset(&rows[25..]), &dims).unwrap();
        let pooled: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x * 25.0 + y * 15.0).collect();
        let expected = MnntsParams::from_unnormalized(dims.clone(), &pooled).unwrap();
        let fit = fit_md(&dataset(&rows), &dims).unwrap();
        for (x, y) in fit.params.coeffs().iter().zip(expected.coeffs()) {
            assert!((x - y).norm() < 1e-14);
        }
    }

    #[test]
    fn md_permutation_equivariance() {
        let mut rng = SplitMix64::new(3);
        let rows = random_rows(50, 3, &mut rng);
        let dims = DimVector::new(vec![1, 2, 3]).unwrap();
        let fit = fit_md(&dataset(&rows), &dims).unwrap();
        let perm = [2, 0, 1];
        let permuted_rows: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| perm.iter().map(|&p| r[p]).collect())
            .collect();
        let permuted_dims = dims.select(&perm).unwrap();
        let fit_perm = fit_md(&dataset(&permuted_rows), &permuted_dims).unwrap();
        let expected = fit.params.permute_vars(&perm).unwrap();
        for _ in 0..20 {
            let t: Vec<f64> = (0..3).map(|_| rng.uniform() * TAU).collect();
            let x = AnglePoint::new(&t);
            let a = density(&fit_perm.params, &x).unwrap();
            let b = density(&expected, &x).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = SplitMix64::new(4);
        let dims = DimVector::new(vec![2, 1]).unwrap();
        let rows = random_rows(25, 2, &mut rng);
        let ds = dataset(&rows);
        let c: Vec<Complex64> = (0..6)
            .map(|_| Complex64::new(rng.normal(), rng.normal()))
            .collect();
        let grad = log_likelihood_gradient(&c, &dims, &ds).unwrap();
        let h = 1e-6;
        for j in 0..c.len() {
            for imag in [false, true] {
                let delta = if imag {
                    Complex64::new(0.0, h)
                } else {
                    Complex64::new(h, 0.0)
                };
                let mut plus = c.clone();
                plus[j] += delta;
                let mut minus = c.clone();
                minus[j] -= delta;
                let fd = (raw_log_likelihood(&plus, &dims, &ds).unwrap()
                    - raw_log_likelihood(&minus, &dims, &ds).unwrap())
                    / (2.0 * h);
                let analytic = if imag { grad[j].im } else { grad[j].re };
                assert!(
                    (fd - analytic).abs() <= 1e-5 * analytic.abs().max(1.0),
                    "{fd} vs {analytic}"
                );
            }
        }
    }

    #[test]
    fn ml_from_single_observation_optimum() {
        let dims = DimVector::new(vec![2]).unwrap();
        let ds = dataset(&[vec![0.9]]);
        let init = fit_md(&ds, &dims).unwrap().params;
        let fit = fit_ml(
            &ds,
            &dims,
            &MlOptions {
                init: Some(init),
                ..MlOptions::default()
            },
        )
        .unwrap();
        assert!(fit.iterations <= 1);
        assert!(fit.converged);
        assert!(fit.grad_norm.unwrap() < 1e-8);
    }

    #[test]
    fn ml_improves_on_md_with_monotone_trace() {
        let mut rng = SplitMix64::new(5);
        let dims = DimVector::new(vec![2, 2]).unwrap();
        let a = MnntsParams::from_unnormalized(
            DimVector::new(vec![2]).unwrap(),
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(0.6, 0.2),
                Complex64::new(0.1, -0.3),
            ],
        )
        .unwrap();
        let truth =
            MnntsParams::from_unnormalized(dims.clone(), &kronecker(a.coeffs(), a.coeffs()))
                .unwrap();
        let ds =
            crate::sampling::sample(&truth, &mut SplitMix64::new(rng.next_u64()), 300).unwrap();
        let md = fit_md(&ds, &dims).unwrap();
        let ml = fit_ml(&ds, &dims, &MlOptions::default()).unwrap();
        assert!(ml.loglik >= md.loglik - 1e-9);
        assert!(ml.trace.windows(2).all(|w| w[1] >= w[0] - 1e-9));
        assert!((ml.trace[0] - md.loglik).abs() < 1e-6);
        let check = log_likelihood(&ml.params, &ds).unwrap().value;
        assert!((check - ml.loglik).abs() < 1e-10);
    }

    #[test]
    fn ml_rejects_bad_options() {
        let dims = DimVector::new(vec![1]).unwrap();
        let ds = dataset(&[vec![0.1], vec![0.2]]);
        let bad = MlOptions {
            tol: 0.0,
            ..MlOptions::default()
        };
        assert!(fit_ml(&ds, &dims, &bad).is_err());
        let wrong_init = MlOptions {
            init: Some(MnntsParams::uniform(DimVector::new(vec![2]).unwrap())),
            ..MlOptions::default()
        };
        assert!(fit_ml(&ds, &dims, &wrong_init).is_err());
    }

    #[test]
    fn dims_must_match_data() {
        let ds = dataset(&[vec![0.1, 0.2]]);
        assert!(fit_md(&ds, &DimVector::new(vec![1]).unwrap()).is_err());
    }
}
