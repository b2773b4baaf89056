//! Synthetic wind-direction style data.
//!
//! Each day has a regional prevailing direction drawn from a two-regime
//! mixture; each station reports it shifted by a station offset plus local
//! wrapped-normal noise.

use std::f64::consts::TAU;

use crate::dataset::{reduce_angle, AngularDataset};
use crate::error::{Error, Result};
use crate::rng::SplitMix64;

pub const STATION_NAMES: [&str; 7] = ["ST1", "ST2", "ST3", "ST4", "ST5", "ST6", "ST7"];

/// `n_obs` rows of `n_vars` correlated directions, in radians.
pub fn wind_like(n_obs: usize, n_vars: usize, rng: &mut SplitMix64) -> Result<AngularDataset> {
    if n_vars == 0 || n_obs == 0 {
        return Err(Error::arg(
            "synthetic data needs at least one row and one variable",
        ));
    }
    let offsets: Vec<f64> = (0..n_vars).map(|s| 0.35 * s as f64).collect();
    let spreads: Vec<f64> = (0..n_vars).map(|s| 0.4 + 0.1 * (s % 3) as f64).collect();
    let mut values = Vec::with_capacity(n_obs * n_vars);
    for _ in 0..n_obs {
        let regime = if rng.uniform() < 0.7 {
            0.6 * TAU / 4.0
        } else {
            2.6 * TAU / 4.0
        };
        let prevailing = regime + 0.5 * rng.normal();
        for s in 0..n_vars {
            values.push(reduce_angle(
                prevailing + offsets[s] + spreads[s] * rng.normal(),
            ));
        }
    }
    let names = if n_vars <= STATION_NAMES.len() {
        STATION_NAMES[..n_vars]
            .iter()
            .map(|s| s.to_string())
            .collect()
    } else {
        AngularDataset::default_names(n_vars)
    };
    AngularDataset::from_flat(names, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::summary::circular_correlation;

    #[test]
    fn shape_and_dependence() {
        let ds = wind_like(500, 7, &mut SplitMix64::new(1)).unwrap();
        assert_eq!((ds.n_obs(), ds.n_vars()), (500, 7));
        let r = circular_correlation(&ds.column(0), &ds.column(1)).unwrap();
        assert!(r > 0.2);
    }

    #[test]
    fn deterministic() {
        let a = wind_like(50, 3, &mut SplitMix64::new(9)).unwrap();
        let b = wind_like(50, 3, &mut SplitMix64::new(9)).unwrap();
        assert_eq!(a, b);
    }
}
