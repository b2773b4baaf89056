//! Density evaluation: `f(θ) = |c^H (e_1 ⊗ … ⊗ e_n)|²` with
//! `e_s = (1, e^{iθ_s}, …, e^{i M_s θ_s})`.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::dataset::{reduce_angle, AngularDataset};
use crate::error::{Error, Result};
use crate::params::{kronecker_into, DimVector, MnntsParams};

/// Densities below this floor are treated as underflow in log-likelihoods.
pub const DENSITY_FLOOR: f64 = 1e-300;

/// A point on the torus; components are reduced to `[0, 2π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnglePoint(Vec<f64>);

impl AnglePoint {
    pub fn new(theta: &[f64]) -> Self {
        AnglePoint(theta.iter().map(|&t| reduce_angle(t)).collect())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<&[f64]> for AnglePoint {
    fn from(theta: &[f64]) -> Self {
        AnglePoint::new(theta)
    }
}

/// `(1, e^{iθ}, …, e^{iMθ})`, built by repeated multiplication.
pub fn trig_moments(theta: f64, order: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(order + 1);
    trig_moments_into(theta, order, &mut out);
    out
}

pub(crate) fn trig_moments_into(theta: f64, order: usize, out: &mut Vec<Complex64>) {
    out.clear();
    let step = Complex64::from_polar(1.0, theta);
    let mut z = Complex64::new(1.0, 0.0);
    out.push(z);
    for _ in 0..order {
        z *= step;
        out.push(z);
    }
}

/// Full moment vector `e_1 ⊗ … ⊗ e_n` at `theta`.
pub fn moment_vector(dims: &DimVector, theta: &[f64]) -> Vec<Complex64> {
    let per_var: Vec<Vec<Complex64>> = theta
        .iter()
        .enumerate()
        .map(|(s, &t)| trig_moments(t, dims.order(s)))
        .collect();
    let refs: Vec<&[Complex64]> = per_var.iter().map(|v| v.as_slice()).collect();
    let mut out = vec![Complex64::new(0.0, 0.0); dims.total_len()];
    kronecker_into(&refs, &mut out);
    out
}

fn check_point(p: &MnntsParams, n: usize) -> Result<()> {
    if n != p.n_vars() {
        return Err(Error::arg(format!(
            "point has {n} components, model has {} variables",
            p.n_vars()
        )));
    }
    Ok(())
}

/// `c^H (e_1 ⊗ … ⊗ e_n)`, contracting one variable at a time from the last.
pub(crate) fn inner_product(coeffs: &[Complex64], dims: &DimVector, theta: &[f64]) -> Complex64 {
    let n = dims.n_vars();
    let last = n - 1;
    let e = trig_moments(theta[last], dims.order(last));
    let width = e.len();
    let mut acc: Vec<Complex64> = coeffs
        .chunks_exact(width)
        .map(|block| block.iter().zip(&e).map(|(c, e)| c.conj() * e).sum())
        .collect();
    for s in (0..last).rev() {
        let e = trig_moments(theta[s], dims.order(s));
        let width = e.len();
        acc = acc
            .chunks_exact(width)
            .map(|block| block.iter().zip(&e).map(|(a, e)| a * e).sum())
            .collect();
    }
    debug_assert_eq!(acc.len(), 1);
    acc[0]
}

/// Density at `x`.
pub fn density(p: &MnntsParams, x: &AnglePoint) -> Result<f64> {
    check_point(p, x.len())?;
    Ok(density_unchecked(p, x.as_slice()))
}

pub(crate) fn density_unchecked(p: &MnntsParams, theta: &[f64]) -> f64 {
    clip_density(inner_product(p.coeffs(), p.dims(), theta).norm_sqr())
}

fn clip_density(v: f64) -> f64 {
    if v < 0.0 {
        0.0
    } else {
        v
    }
}

/// Density from the explicit double sum
/// `Σ_k Σ_m c̄_k c_m exp(i Σ_s (k_s − m_s) θ_s)`; quadratic cost, for
/// cross-checking [`density`].
pub fn sum_form_density(p: &MnntsParams, x: &AnglePoint) -> Result<f64> {
    check_point(p, x.len())?;
    let dims = p.dims();
    let theta = x.as_slice();
    let total = dims.total_len();
    let multi: Vec<Vec<usize>> = (0..total)
        .map(|i| dims.multi_index(i).expect("index in range"))
        .collect();
    let c = p.coeffs();
    let mut sum = Complex64::new(0.0, 0.0);
    for (k, mk) in multi.iter().enumerate() {
        for (m, mm) in multi.iter().enumerate() {
            let phase: f64 = mk
                .iter()
                .zip(mm)
                .zip(theta)
                .map(|((&a, &b), &t)| (a as f64 - b as f64) * t)
                .sum();
            sum += c[k].conj() * c[m] * Complex64::from_polar(1.0, phase);
        }
    }
    Ok(clip_density(sum.re))
}

/// Log-likelihood together with the number of observations whose density
/// fell below [`DENSITY_FLOOR`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLikelihood {
    pub value: f64,
    pub underflows: usize,
}

pub fn log_likelihood(p: &MnntsParams, data: &AngularDataset) -> Result<LogLikelihood> {
    if data.n_vars() != p.n_vars() {
        return Err(Error::arg(format!(
            "dataset has {} variables, model has {}",
            data.n_vars(),
            p.n_vars()
        )));
    }
    if data.n_obs() == 0 {
        return Err(Error::data("dataset has no observations"));
    }
    let mut value = 0.0;
    let mut underflows = 0;
    for row in data.rows() {
        let d = density_unchecked(p, row);
        if d <= DENSITY_FLOOR {
            underflows += 1;
            value += DENSITY_FLOOR.ln();
        } else {
            value += d.ln();
        }
    }
    Ok(LogLikelihood { value, underflows })
}

/// Distribution function of a univariate model, `F(θ) = ∫_0^θ f`.
///
/// Writing `f(θ) = a_0 + 2 Re Σ_{d≥1} a_d e^{idθ}` with
/// `a_d = Σ_k c̄_k c_{k−d}`, the antiderivative is
/// `a_0 θ + 2 Re Σ_{d≥1} a_d (e^{idθ} − 1)/(id)`.
#[derive(Debug, Clone)]
pub struct UnivariateCdf {
    a0: f64,
    lags: Vec<Complex64>,
}

impl UnivariateCdf {
    pub fn new(p: &MnntsParams) -> Result<Self> {
        if p.n_vars() != 1 {
            return Err(Error::arg(format!(
                "distribution function needs a univariate model, got {} variables",
                p.n_vars()
            )));
        }
        let c = p.coeffs();
        let order = c.len() - 1;
        let a0 = c.iter().map(|z| z.norm_sqr()).sum();
        let lags = (1..=order)
            .map(|d| (d..=order).map(|k| c[k].conj() * c[k - d]).sum())
            .collect();
        Ok(UnivariateCdf { a0, lags })
    }

    /// `F(θ)` for `θ ∈ [0, 2π]`, clipped to `[0, 1]`.
    pub fn eval(&self, theta: f64) -> f64 {
        let theta = theta.clamp(0.0, TAU);
        let mut v = self.a0 * theta;
        let step = Complex64::from_polar(1.0, theta);
        let mut z = Complex64::new(1.0, 0.0);
        for (d, a) in self.lags.iter().enumerate() {
            z *= step;
            let d = (d + 1) as f64;
            // (z − 1)/(i d) = −i (z − 1)/d
            let term = a * (z - 1.0) * Complex64::new(0.0, -1.0 / d);
            v += 2.0 * term.re;
        }
        v.clamp(0.0, 1.0)
    }

    /// Density of the same model, from the lag coefficients.
    pub fn density(&self, theta: f64) -> f64 {
        let step = Complex64::from_polar(1.0, theta);
        let mut z = Complex64::new(1.0, 0.0);
        let mut v = self.a0;
        for a in &self.lags {
            z *= step;
            v += 2.0 * (a * z).re;
        }
        clip_density(v)
    }
}

/// `F(θ)` of a univariate model.
pub fn cdf_univariate(p: &MnntsParams, theta: f64) -> Result<f64> {
    if !(0.0..=TAU).contains(&theta) {
        return Err(Error::arg(format!("angle {theta} outside [0, 2π]")));
    }
    Ok(UnivariateCdf::new(p)?.eval(theta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::normalize;
    use crate::rng::SplitMix64;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_params(dims: Vec<usize>, rng: &mut SplitMix64) -> MnntsParams {
        let dims = DimVector::new(dims).unwrap();
        let raw: Vec<Complex64> = (0..dims.total_len())
            .map(|_| c(rng.normal(), rng.normal()))
            .collect();
        MnntsParams::from_unnormalized(dims, &raw).unwrap()
    }

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-15
    }

    #[test]
    fn trig_moment_examples() {
        assert_eq!(trig_moments(0.0, 3), vec![c(1.0, 0.0); 4]);
        let v = trig_moments(PI, 2);
        assert!(close(v[0], c(1.0, 0.0)) && close(v[1], c(-1.0, 0.0)) && close(v[2], c(1.0, 0.0)));
        let v = trig_moments(PI / 2.0, 3);
        let expected = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)];
        for (a, b) in v.iter().zip(&expected) {
            assert!(close(*a, *b));
        }
    }

    #[test]
    fn trig_moments_have_unit_modulus() {
        let v = trig_moments(2.345, 40);
        for (k, z) in v.iter().enumerate() {
            assert!((z.norm() - 1.0).abs() < 1e-12);
            assert!((z - Complex64::from_polar(1.0, 2.345 * k as f64)).norm() < 1e-12);
        }
    }

    #[test]
    fn uniform_densities() {
        let p = MnntsParams::uniform(DimVector::new(vec![0]).unwrap());
        for &t in &[0.0, 1.0, 5.0] {
            assert!((density(&p, &AnglePoint::new(&[t])).unwrap() - 1.0 / TAU).abs() < 1e-15);
            assert!(
                (sum_form_density(&p, &AnglePoint::new(&[t])).unwrap() - 1.0 / TAU).abs() < 1e-15
            );
        }
        let p = MnntsParams::uniform(DimVector::new(vec![0, 0]).unwrap());
        let v = density(&p, &AnglePoint::new(&[0.3, 4.0])).unwrap();
        assert!((v - 1.0 / (TAU * TAU)).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch() {
        let p = MnntsParams::uniform(DimVector::new(vec![1, 1]).unwrap());
        assert!(matches!(
            density(&p, &AnglePoint::new(&[0.3])),
            Err(Error::Argument(_))
        ));
        assert!(sum_form_density(&p, &AnglePoint::new(&[0.3, 1.0, 2.0])).is_err());
    }

    #[test]
    fn hand_expanded_bivariate_order_one() {
        // M = (1,1): with d_jk = conj(c_jk),
        // c^H e = d00 + d01 e^{iθ2} + d10 e^{iθ1} + d11 e^{i(θ1+θ2)}
        let mut rng = SplitMix64::new(21);
        let p = random_params(vec![1, 1], &mut rng);
        let d: Vec<Complex64> = p.coeffs().iter().map(|z| z.conj()).collect();
        for _ in 0..20 {
            let t1 = rng.uniform() * TAU;
            let t2 = rng.uniform() * TAU;
            let e1 = Complex64::from_polar(1.0, t1);
            let e2 = Complex64::from_polar(1.0, t2);
            let z = d[0] + d[1] * e2 + d[2] * e1 + d[3] * e1 * e2;
            let x = AnglePoint::new(&[t1, t2]);
            assert!((sum_form_density(&p, &x).unwrap() - z.norm_sqr()).abs() < 1e-13);
            assert!((density(&p, &x).unwrap() - z.norm_sqr()).abs() < 1e-13);
        }
    }

    #[test]
    fn periodicity() {
        let mut rng = SplitMix64::new(4);
        let p = random_params(vec![2, 1, 3], &mut rng);
        for _ in 0..50 {
            let t: Vec<f64> = (0..3).map(|_| rng.uniform() * TAU).collect();
            let shifted: Vec<f64> = t
                .iter()
                .map(|&x| x + TAU * (rng.below(11) as f64 - 5.0))
                .collect();
            let a = density(&p, &AnglePoint::new(&t)).unwrap();
            let b = density(&p, &AnglePoint::new(&shifted)).unwrap();
            assert!((a - b).abs() < 1e-12 * a.max(1.0));
        }
    }

    #[test]
    fn normalize_preserves_density_under_phase_rotation() {
        let mut rng = SplitMix64::new(8);
        let dims = DimVector::new(vec![2, 2]).unwrap();
        let raw: Vec<Complex64> = (0..9).map(|_| c(rng.normal(), rng.normal())).collect();
        let norm: f64 = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        // scaled but not rotated
        let scaled: Vec<Complex64> = raw.iter().map(|z| z / (norm * TAU)).collect();
        let rotated = normalize(&raw, 2).unwrap().coeffs;
        let p = MnntsParams::new(dims.clone(), rotated).unwrap();
        for _ in 0..10 {
            let t = [rng.uniform() * TAU, rng.uniform() * TAU];
            let a = inner_product(&scaled, &dims, &t).norm_sqr();
            let b = density(&p, &AnglePoint::new(&t)).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn log_likelihood_uniform_and_single() {
        let p = MnntsParams::uniform(DimVector::new(vec![0]).unwrap());
        let rows: Vec<Vec<f64>> = (0..7).map(|i| vec![i as f64 * 0.7]).collect();
        let ds = AngularDataset::new(AngularDataset::default_names(1), &rows).unwrap();
        let ll = log_likelihood(&p, &ds).unwrap();
        assert!((ll.value + 7.0 * TAU.ln()).abs() < 1e-12);
        assert_eq!(ll.underflows, 0);

        let mut rng = SplitMix64::new(2);
        let q = random_params(vec![3], &mut rng);
        let ds = AngularDataset::new(AngularDataset::default_names(1), &[vec![1.25]]).unwrap();
        let expected = density(&q, &AnglePoint::new(&[1.25])).unwrap().ln();
        assert!((log_likelihood(&q, &ds).unwrap().value - expected).abs() < 1e-12);
    }

    #[test]
    fn log_likelihood_counts_underflow() {
        // c ∝ (1, -1): density ∝ |1 − e^{iθ}|², zero at θ = 0
        let dims = DimVector::new(vec![1]).unwrap();
        let p = MnntsParams::from_unnormalized(dims, &[c(1.0, 0.0), c(-1.0, 0.0)]).unwrap();
        let ds =
            AngularDataset::new(AngularDataset::default_names(1), &[vec![0.0], vec![PI]]).unwrap();
        let ll = log_likelihood(&p, &ds).unwrap();
        assert_eq!(ll.underflows, 1);
        let expected = DENSITY_FLOOR.ln() + density(&p, &AnglePoint::new(&[PI])).unwrap().ln();
        assert!((ll.value - expected).abs() < 1e-9);
    }

    #[test]
    fn log_likelihood_row_order_invariant() {
        let mut rng = SplitMix64::new(13);
        let p = random_params(vec![2, 1], &mut rng);
        let mut rows: Vec<Vec<f64>> = (0..200)
            .map(|_| vec![rng.uniform() * TAU, rng.uniform() * TAU])
            .collect();
        let a = log_likelihood(
            &p,
            &AngularDataset::new(AngularDataset::default_names(2), &rows).unwrap(),
        )
        .unwrap();
        rows.reverse();
        rows.swap(3, 150);
        let b = log_likelihood(
            &p,
            &AngularDataset::new(AngularDataset::default_names(2), &rows).unwrap(),
        )
        .unwrap();
        assert!((a.value - b.value).abs() < 1e-12 * a.value.abs());
    }

    #[test]
    fn cdf_uniform_is_linear() {
        let p = MnntsParams::uniform(DimVector::new(vec![0]).unwrap());
        for &t in &[0.0, 0.5, 3.0, TAU] {
            assert!((cdf_univariate(&p, t).unwrap() - t / TAU).abs() < 1e-15);
        }
    }

    #[test]
    fn cdf_endpoints_monotone_and_matches_quadrature() {
        let mut rng = SplitMix64::new(17);
        for order in 1..=4 {
            let p = random_params(vec![order], &mut rng);
            let cdf = UnivariateCdf::new(&p).unwrap();
            assert_eq!(cdf.eval(0.0), 0.0);
            assert!((cdf.eval(TAU) - 1.0).abs() < 1e-12);
            let grid: Vec<f64> = (0..=1000)
                .map(|i| cdf.eval(TAU * i as f64 / 1000.0))
                .collect();
            assert!(grid.windows(2).all(|w| w[1] >= w[0] - 1e-15));
            // composite Simpson on 2000 panels of [0, 1.7]
            let upper = 1.7;
            let n = 2000;
            let h = upper / n as f64;
            let mut s = 0.0;
            for i in 0..=n {
                let w = if i == 0 || i == n {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                s += w * density(&p, &AnglePoint::new(&[i as f64 * h])).unwrap();
            }
            s *= h / 3.0;
            assert!((cdf.eval(upper) - s).abs() < 1e-9, "order {order}");
            // lag-form density agrees with the direct one
            let t = 2.2;
            assert!((cdf.density(t) - density(&p, &AnglePoint::new(&[t])).unwrap()).abs() < 1e-13);
        }
    }

    #[test]
    fn cdf_rejects_multivariate_and_out_of_range() {
        let p = MnntsParams::uniform(DimVector::new(vec![1, 1]).unwrap());
        assert!(cdf_univariate(&p, 1.0).is_err());
        let q = MnntsParams::uniform(DimVector::new(vec![1]).unwrap());
        assert!(cdf_univariate(&q, -0.1).is_err());
        assert!(cdf_univariate(&q, 7.0).is_err());
    }
}
