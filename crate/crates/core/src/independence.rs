//! Independence between blocks of variables.
//!
//! Two blocks are independent exactly when the joint parameter vector (with
//! the blocks laid out consecutively) is the Kronecker product of the block
//! vectors, i.e. when the reshaped `K × L` coefficient matrix has rank one.

use num_complex::Complex64;

use crate::dataset::AngularDataset;
use crate::error::{Error, Result};
use crate::estimate::{fit, Method};
use crate::marginal::{marginal, sorted_subset};
use crate::params::{kronecker_all, DimVector, MnntsParams};
use crate::special::chi_squared_sf;

/// Clip threshold for slightly negative likelihood-ratio statistics.
const NEGATIVE_LR_TOLERANCE: f64 = 1e-6;

/// Joint model of independent blocks: dims are concatenated and the
/// parameter vector is the Kronecker product of the block vectors.
pub fn product_model(blocks: &[MnntsParams]) -> Result<MnntsParams> {
    if blocks.len() < 2 {
        return Err(Error::arg("a product model needs at least two blocks"));
    }
    let dims: Vec<usize> = blocks
        .iter()
        .flat_map(|b| b.dims().as_slice().iter().copied())
        .collect();
    let dims = DimVector::new(dims)?;
    let coeffs = kronecker_all(blocks.iter().map(|b| b.coeffs()));
    // product of nonnegative reals stays real; drop a possible -0.0 imaginary part
    let mut coeffs: Vec<Complex64> = coeffs;
    coeffs[0] = Complex64::new(coeffs[0].re, 0.0);
    MnntsParams::new(dims, coeffs)
}

/// A partition of the variables into two nonempty blocks (0-based indices).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub first: Vec<usize>,
    pub second: Vec<usize>,
}

impl Split {
    pub fn new(first: Vec<usize>, second: Vec<usize>, n_vars: usize) -> Result<Self> {
        let first = sorted_subset(&first, n_vars, "first block")?;
        let second = sorted_subset(&second, n_vars, "second block")?;
        if first.len() + second.len() != n_vars
            || first.iter().any(|v| second.binary_search(v).is_ok())
        {
            return Err(Error::arg(format!(
                "blocks {:?} and {:?} do not partition {n_vars} variables",
                first.iter().map(|v| v + 1).collect::<Vec<_>>(),
                second.iter().map(|v| v + 1).collect::<Vec<_>>()
            )));
        }
        Ok(Split { first, second })
    }

    /// Parse `"1,2|3,4"` (1-based).
    pub fn parse(text: &str, n_vars: usize) -> Result<Self> {
        let (a, b) = text
            .split_once('|')
            .ok_or_else(|| Error::arg(format!("split {text:?} must look like 1,2|3")))?;
        Split::new(parse_var_list(a)?, parse_var_list(b)?, n_vars)
    }
}

/// Parse a comma-separated list of 1-based variable numbers into 0-based
/// indices.
pub fn parse_var_list(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|t| {
            let t = t.trim();
            match t.parse::<usize>() {
                Ok(v) if v >= 1 => Ok(v - 1),
                _ => Err(Error::arg(format!("bad variable number {t:?}"))),
            }
        })
        .collect()
}

/// Leading mixing probability of the marginal of the first block. Equals one
/// exactly when the two blocks are independent.
pub fn independence_score(p: &MnntsParams, split: &Split) -> Result<f64> {
    if split.first.len() + split.second.len() != p.n_vars() {
        return Err(Error::arg("split does not match the model's variables"));
    }
    let m = marginal(p, &split.first)?;
    Ok(m.probs()[0].clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndependenceTestResult {
    pub lr_statistic: f64,
    pub df: usize,
    pub p_value: f64,
    pub loglik_full: f64,
    pub loglik_indep: f64,
    /// Fits were not likelihood maximizers (MD), so the chi-squared reference
    /// distribution is only approximate.
    pub approximate: bool,
    /// The raw statistic was below `-1e-6` before being clipped to zero.
    pub clipped: bool,
}

impl std::fmt::Display for IndependenceTestResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "statistic={:.6} df={} p_value={:.6e}",
            self.lr_statistic, self.df, self.p_value
        )?;
        if self.approximate {
            f.write_str(" (approximate)")?;
        }
        Ok(())
    }
}

/// Likelihood-ratio test of independence between the two blocks of `split`.
///
/// Degrees of freedom count `2∏(M_s+1) − 2` free real parameters per fitted
/// vector: `df = free(full) − free(block 1) − free(block 2)`.
pub fn lr_test(
    data: &AngularDataset,
    dims: &DimVector,
    split: &Split,
    method: Method,
) -> Result<IndependenceTestResult> {
    if data.n_vars() != dims.n_vars() {
        return Err(Error::arg(format!(
            "dataset has {} variables, dims {} describe {}",
            data.n_vars(),
            dims,
            dims.n_vars()
        )));
    }
    if data.n_obs() < 2 {
        return Err(Error::data(
            "independence test needs at least two observations",
        ));
    }
    if split.first.len() + split.second.len() != dims.n_vars() {
        return Err(Error::arg("split does not match the data's variables"));
    }
    let df = lr_degrees_of_freedom(dims, split)?;
    let full = fit(data, dims, method)?;
    let mut loglik_indep = 0.0;
    for block in [&split.first, &split.second] {
        let sub = data.select_columns(block)?;
        let sub_dims = dims.select(block)?;
        loglik_indep += fit(&sub, &sub_dims, method)?.loglik;
    }
    let raw = 2.0 * (full.loglik - loglik_indep);
    let clipped = raw < -NEGATIVE_LR_TOLERANCE;
    let lr_statistic = raw.max(0.0);
    Ok(IndependenceTestResult {
        lr_statistic,
        df,
        p_value: chi_squared_sf(lr_statistic, df as f64),
        loglik_full: full.loglik,
        loglik_indep,
        approximate: method == Method::Md,
        clipped,
    })
}

/// `free(full) − free(block 1) − free(block 2)`; must be at least one.
pub fn lr_degrees_of_freedom(dims: &DimVector, split: &Split) -> Result<usize> {
    let full = dims.free_parameters();
    let a = dims.select(&split.first)?.free_parameters();
    let b = dims.select(&split.second)?.free_parameters();
    match full.checked_sub(a + b) {
        Some(df) if df >= 1 => Ok(df),
        _ => Err(Error::arg(format!(
            "dims {dims} leave no degrees of freedom for an independence test"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{density, AnglePoint};
    use crate::rng::SplitMix64;
    use crate::sampling::random_params;
    use std::f64::consts::TAU;

    #[test]
    fn two_uniforms() {
        let u = MnntsParams::uniform(DimVector::new(vec![0]).unwrap());
        let joint = product_model(&[u.clone(), u]).unwrap();
        assert_eq!(
            joint,
            MnntsParams::uniform(DimVector::new(vec![0, 0]).unwrap())
        );
    }

    #[test]
    fn product_factorizes() {
        let mut rng = SplitMix64::new(1);
        let a = random_params(&DimVector::new(vec![2]).unwrap(), &mut rng);
        let b = random_params(&DimVector::new(vec![1, 2]).unwrap(), &mut rng);
        let joint = product_model(&[a.clone(), b.clone()]).unwrap();
        for _ in 0..100 {
            let t: Vec<f64> = (0..3).map(|_| rng.uniform() * TAU).collect();
            let lhs = density(&joint, &AnglePoint::new(&t)).unwrap();
            let rhs = density(&a, &AnglePoint::new(&t[..1])).unwrap()
                * density(&b, &AnglePoint::new(&t[1..])).unwrap();
            assert!((lhs - rhs).abs() < 1e-12);
        }
        let split = Split::new(vec![0], vec![1, 2], 3).unwrap();
        assert!((independence_score(&joint, &split).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn score_is_symmetric_and_detects_dependence() {
        let mut rng = SplitMix64::new(2);
        let p = random_params(&DimVector::new(vec![2, 3]).unwrap(), &mut rng);
        let ab = independence_score(&p, &Split::new(vec![0], vec![1], 2).unwrap()).unwrap();
        let ba = independence_score(&p, &Split::new(vec![1], vec![0], 2).unwrap()).unwrap();
        assert!((ab - ba).abs() < 1e-10);
        assert!(ab < 1.0 - 1e-6);
    }

    #[test]
    fn split_parsing() {
        let s = Split::parse("1,3|2", 3).unwrap();
        assert_eq!(s.first, vec![0, 2]);
        assert_eq!(s.second, vec![1]);
        assert!(Split::parse("1|1", 2).is_err());
        assert!(Split::parse("1|2", 3).is_err());
        assert!(Split::parse("1,2", 2).is_err());
        assert!(Split::parse("0|1", 2).is_err());
    }

    #[test]
    fn degrees_of_freedom() {
        let dims = DimVector::new(vec![3, 3]).unwrap();
        let split = Split::new(vec![0], vec![1], 2).unwrap();
        assert_eq!(lr_degrees_of_freedom(&dims, &split).unwrap(), 18);
        let dims = DimVector::new(vec![2, 2]).unwrap();
        assert_eq!(lr_degrees_of_freedom(&dims, &split).unwrap(), 8);
        let dims = DimVector::new(vec![0, 3]).unwrap();
        assert!(lr_degrees_of_freedom(&dims, &split).is_err());
    }

    #[test]
    fn lr_test_needs_two_rows() {
        let dims = DimVector::new(vec![1, 1]).unwrap();
        let ds = AngularDataset::new(AngularDataset::default_names(2), &[vec![0.1, 0.2]]).unwrap();
        let split = Split::new(vec![0], vec![1], 2).unwrap();
        assert!(matches!(
            lr_test(&ds, &dims, &split, Method::Md),
            Err(Error::Data(_))
        ));
    }

    #[test]
    fn md_test_is_labelled_approximate() {
        let mut rng = SplitMix64::new(3);
        let p = random_params(&DimVector::new(vec![1, 1]).unwrap(), &mut rng);
        let ds = crate::sampling::sample(&p, &mut rng, 200).unwrap();
        let split = Split::new(vec![0], vec![1], 2).unwrap();
        let r = lr_test(&ds, p.dims(), &split, Method::Md).unwrap();
        assert!(r.approximate);
        assert_eq!(r.df, 2);
        assert!(r.to_string().ends_with("(approximate)"));
        assert!((0.0..=1.0).contains(&r.p_value));
    }
}
