//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::TAU;

use num_complex::Complex64;

/// All multi-indices `k` with `0 ≤ k_s ≤ dims[s]`, first variable slowest.
pub fn multi_indices(dims: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &m in dims {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..=m).map(move |k| {
                    let mut v = prefix.clone();
                    v.push(k);
                    v
                })
            })
            .collect();
    }
    out
}

/// `|Σ_k conj(c_k) exp(i k·θ)|²` by direct summation.
pub fn direct_density(dims: &[usize], coeffs: &[Complex64], theta: &[f64]) -> f64 {
    let z: Complex64 = multi_indices(dims)
        .iter()
        .zip(coeffs)
        .map(|(k, c)| {
            let phase: f64 = k.iter().zip(theta).map(|(&k, &t)| k as f64 * t).sum();
            c.conj() * Complex64::from_polar(1.0, phase)
        })
        .sum();
    z.norm_sqr()
}

/// Uniform grid `2πj/n`.
pub fn grid(n: usize) -> Vec<f64> {
    (0..n).map(|j| TAU * j as f64 / n as f64).collect()
}

/// Points per axis for which the uniform rule integrates a trigonometric
/// polynomial of degree `m` exactly.
pub fn exact_points(m: usize) -> usize {
    2 * m + 2
}

/// Integral over the variables with `fixed[s] == None` of `f`, the other
/// variables held at their values, on exact uniform grids.
pub fn integrate_free<F>(dims: &[usize], fixed: &[Option<f64>], f: F) -> f64
where
    F: Fn(&[f64]) -> f64,
{
    let axes: Vec<Vec<f64>> = dims
        .iter()
        .zip(fixed)
        .map(|(&m, fx)| match fx {
            Some(t) => vec![*t],
            None => grid(exact_points(m)),
        })
        .collect();
    let weight: f64 = dims
        .iter()
        .zip(fixed)
        .map(|(&m, fx)| {
            if fx.is_some() {
                1.0
            } else {
                TAU / exact_points(m) as f64
            }
        })
        .product();
    let mut idx = vec![0usize; dims.len()];
    let mut point = vec![0.0; dims.len()];
    let mut total = 0.0;
    loop {
        for s in 0..dims.len() {
            point[s] = axes[s][idx[s]];
        }
        total += f(&point);
        let mut s = dims.len();
        loop {
            if s == 0 {
                return total * weight;
            }
            s -= 1;
            idx[s] += 1;
            if idx[s] < axes[s].len() {
                break;
            }
            idx[s] = 0;
        }
    }
}

/// `∫_a^b exp(i d θ) dθ`.
pub fn exp_integral(d: i64, a: f64, b: f64) -> Complex64 {
    if d == 0 {
        Complex64::new(b - a, 0.0)
    } else {
        let i_d = Complex64::new(0.0, d as f64);
        (Complex64::from_polar(1.0, d as f64 * b) - Complex64::from_polar(1.0, d as f64 * a)) / i_d
    }
}

/// Exact probability of the box `Π [lo_s, hi_s]` from the expansion
/// `f = Σ_k Σ_m conj(c_k) c_m exp(i (k − m)·θ)`.
pub fn box_probability(dims: &[usize], coeffs: &[Complex64], lo: &[f64], hi: &[f64]) -> f64 {
    let idx = multi_indices(dims);
    let mut total = Complex64::new(0.0, 0.0);
    for (k, ck) in idx.iter().zip(coeffs) {
        for (m, cm) in idx.iter().zip(coeffs) {
            let mut w = ck.conj() * cm;
            for s in 0..dims.len() {
                w *= exp_integral(k[s] as i64 - m[s] as i64, lo[s], hi[s]);
            }
            total += w;
        }
    }
    total.re
}

/// Kolmogorov distribution upper tail `P(K > λ)`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..200 {
        let term = (-2.0 * (j * j) as f64 * lambda * lambda).exp();
        sum += if j % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Asymptotic p-value of the one-sample KS statistic `d` from `n` draws.
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let rn = (n as f64).sqrt();
    kolmogorov_sf((rn + 0.12 + 0.11 / rn) * d)
}
