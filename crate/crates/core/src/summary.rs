//! Descriptive circular statistics.

use std::f64::consts::{PI, TAU};

use crate::dataset::reduce_angle;
use crate::error::{Error, Result};

const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircularSummary {
    pub mean_direction: f64,
    pub resultant_length: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
}

/// Arc length between two angles, in `[0, π]`.
pub fn arc_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// `(Σ cos θ, Σ sin θ)`.
fn resultant(column: &[f64]) -> (f64, f64) {
    column
        .iter()
        .fold((0.0, 0.0), |(c, s), &t| (c + t.cos(), s + t.sin()))
}

/// Circular mean direction in `[0, 2π)`.
pub fn mean_direction(column: &[f64]) -> f64 {
    let (c, s) = resultant(column);
    reduce_angle(s.atan2(c))
}

/// Circular median: the data point minimizing the total arc distance to all
/// points. Ties go to the smallest angle.
pub fn circular_median(column: &[f64]) -> Result<f64> {
    median_of(column)
}

fn median_of(points: &[f64]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::data("circular median of an empty sample"));
    }
    let mut candidates: Vec<f64> = points.iter().map(|&t| reduce_angle(t)).collect();
    candidates.sort_by(f64::total_cmp);
    let cost_at = |m: f64| points.iter().map(|&t| arc_distance(t, m)).sum::<f64>();
    let mut best = candidates[0];
    let mut best_cost = cost_at(best);
    for &m in &candidates[1..] {
        let cost = cost_at(m);
        if cost < best_cost - TIE_TOLERANCE * best_cost.max(1.0) {
            best = m;
            best_cost = cost;
        }
    }
    Ok(best)
}

/// Mean direction, resultant length, median and quartiles of one column.
///
/// Quartiles are the circular medians of the two half-circles on either side
/// of the median: offsets `wrap(θ − median)` in `[−π, 0]` for `q1` and in
/// `[0, π)` for `q3`; the median belongs to both halves.
pub fn circular_summary(column: &[f64]) -> Result<CircularSummary> {
    if column.is_empty() {
        return Err(Error::data("circular summary of an empty column"));
    }
    let (c, s) = resultant(column);
    let n = column.len() as f64;
    let median = median_of(column)?;
    let offset = |t: f64| {
        let d = (t - median).rem_euclid(TAU);
        if d >= PI {
            d - TAU
        } else {
            d
        }
    };
    let lower: Vec<f64> = column
        .iter()
        .copied()
        .filter(|&t| offset(t) <= 0.0)
        .collect();
    let upper: Vec<f64> = column
        .iter()
        .copied()
        .filter(|&t| offset(t) >= 0.0)
        .collect();
    Ok(CircularSummary {
        mean_direction: reduce_angle(s.atan2(c)),
        resultant_length: ((c * c + s * s).sqrt() / n).clamp(0.0, 1.0),
        median,
        q1: median_of(&lower)?,
        q3: median_of(&upper)?,
    })
}

/// Jammalamadaka–SenGupta circular correlation,
/// `Σ sin(a−ā) sin(b−b̄) / √(Σ sin²(a−ā) Σ sin²(b−b̄))`.
pub fn circular_correlation(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::data(format!(
            "columns have different lengths ({} and {})",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(Error::data(
            "circular correlation needs at least two observations",
        ));
    }
    let ma = mean_direction(a);
    let mb = mean_direction(b);
    let (mut num, mut sa, mut sb) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        let u = (x - ma).sin();
        let v = (y - mb).sin();
        num += u * v;
        sa += u * u;
        sb += v * v;
    }
    let floor = 1e-24 * a.len() as f64;
    if !(sa > floor && sb > floor) {
        return Err(Error::data(
            "a column has zero sine dispersion about its mean",
        ));
    }
    Ok((num / (sa * sb).sqrt()).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    #[test]
    fn concentrated_sample() {
        let s = circular_summary(&[PI / 2.0; 5]).unwrap();
        assert!((s.mean_direction - PI / 2.0).abs() < 1e-15);
        assert!((s.resultant_length - 1.0).abs() < 1e-15);
        assert_eq!(s.median, PI / 2.0);
    }

    #[test]
    fn antipodal_pair() {
        let s = circular_summary(&[0.0, PI]).unwrap();
        assert!(s.resultant_length < 1e-15);
    }

    #[test]
    fn small_median() {
        assert_eq!(circular_median(&[0.1, 0.2, 0.3]).unwrap(), 0.2);
        // across zero
        let m = circular_median(&[6.2, 0.1, 0.2]).unwrap();
        assert_eq!(m, 0.1);
    }

    #[test]
    fn median_brute_force() {
        let mut rng = SplitMix64::new(1);
        let pts: Vec<f64> = (0..31)
            .map(|_| (rng.normal() * 0.7 + 1.0).rem_euclid(TAU))
            .collect();
        let m = circular_median(&pts).unwrap();
        let cost = |c: f64| pts.iter().map(|&t| arc_distance(t, c)).sum::<f64>();
        for &c in &pts {
            assert!(cost(m) <= cost(c) + 1e-12);
        }
    }

    #[test]
    fn quartiles_bracket_median() {
        let pts: Vec<f64> = (0..9).map(|i| 1.0 + 0.1 * i as f64).collect();
        let s = circular_summary(&pts).unwrap();
        assert!((s.median - 1.4).abs() < 1e-12);
        assert!((s.q1 - 1.2).abs() < 1e-12);
        assert!((s.q3 - 1.6).abs() < 1e-12);
    }

    #[test]
    fn order_invariant() {
        let mut rng = SplitMix64::new(2);
        let mut pts: Vec<f64> = (0..40).map(|_| rng.uniform() * TAU).collect();
        let a = circular_summary(&pts).unwrap();
        pts.reverse();
        pts.swap(1, 30);
        let b = circular_summary(&pts).unwrap();
        assert_eq!(a.median, b.median);
        assert_eq!(a.q1, b.q1);
        assert_eq!(a.q3, b.q3);
        assert!((a.mean_direction - b.mean_direction).abs() < 1e-12);
    }

    #[test]
    fn correlation_identities() {
        let mut rng = SplitMix64::new(3);
        let a: Vec<f64> = (0..50).map(|_| rng.uniform() * TAU).collect();
        assert!((circular_correlation(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        let neg: Vec<f64> = a.iter().map(|&x| (-x).rem_euclid(TAU)).collect();
        assert!((circular_correlation(&a, &neg).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn correlation_rotation_invariant() {
        let mut rng = SplitMix64::new(4);
        let a: Vec<f64> = (0..60).map(|_| rng.uniform() * TAU).collect();
        let b: Vec<f64> = a.iter().map(|&x| x + 0.5 * rng.normal()).collect();
        let r = circular_correlation(&a, &b).unwrap();
        let a2: Vec<f64> = a.iter().map(|&x| (x + 1.3).rem_euclid(TAU)).collect();
        let b2: Vec<f64> = b.iter().map(|&x| (x - 2.9).rem_euclid(TAU)).collect();
        assert!((circular_correlation(&a2, &b2).unwrap() - r).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        assert!(circular_summary(&[]).is_err());
        assert!(circular_correlation(&[0.1], &[0.2]).is_err());
        assert!(circular_correlation(&[0.1, 0.2], &[0.2]).is_err());
        assert!(circular_correlation(&[1.0, 1.0, 1.0], &[0.2, 0.5, 0.9]).is_err());
    }
}
