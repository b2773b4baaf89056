use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// Unit of angles in an input file. Internally everything is radians.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AngleUnit {
    Degrees,
    #[default]
    Radians,
}

impl std::str::FromStr for AngleUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "degrees" | "deg" => Ok(AngleUnit::Degrees),
            "radians" | "rad" => Ok(AngleUnit::Radians),
            other => Err(Error::arg(format!("unknown angle unit {other:?}"))),
        }
    }
}

/// Reduce an angle to `[0, 2π)`.
pub fn reduce_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Convert an angle in `unit` to radians in `[0, 2π)`.
pub fn to_radians(value: f64, unit: AngleUnit) -> f64 {
    match unit {
        AngleUnit::Radians => reduce_angle(value),
        AngleUnit::Degrees => {
            let d = value.rem_euclid(360.0);
            let d = if d >= 360.0 { 0.0 } else { d };
            reduce_angle(d.to_radians())
        }
    }
}

/// Observations of `n_vars` circular variables, one row per observation,
/// stored row-major in radians.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularDataset {
    var_names: Vec<String>,
    values: Vec<f64>,
    source_unit: AngleUnit,
}

impl AngularDataset {
    /// Build from rows of radians; every value is reduced to `[0, 2π)`.
    pub fn new(var_names: Vec<String>, rows: &[Vec<f64>]) -> Result<Self> {
        let n_vars = var_names.len();
        if n_vars == 0 {
            return Err(Error::data("dataset needs at least one variable"));
        }
        let mut values = Vec::with_capacity(rows.len() * n_vars);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n_vars {
                return Err(Error::data(format!(
                    "row {} has {} values, expected {n_vars}",
                    i + 1,
                    row.len()
                )));
            }
            for &x in row {
                if !x.is_finite() {
                    return Err(Error::data(format!("row {} has a non-finite value", i + 1)));
                }
                values.push(reduce_angle(x));
            }
        }
        Ok(AngularDataset {
            var_names,
            values,
            source_unit: AngleUnit::Radians,
        })
    }

    /// Build from a flat row-major buffer of radians.
    pub fn from_flat(var_names: Vec<String>, values: Vec<f64>) -> Result<Self> {
        let n_vars = var_names.len();
        if n_vars == 0 || !values.len().is_multiple_of(n_vars) {
            return Err(Error::data(format!(
                "{} values do not fill rows of {n_vars} variables",
                values.len()
            )));
        }
        if values.iter().any(|x| !x.is_finite()) {
            return Err(Error::data("dataset has non-finite values"));
        }
        let values = values.into_iter().map(reduce_angle).collect();
        Ok(AngularDataset {
            var_names,
            values,
            source_unit: AngleUnit::Radians,
        })
    }

    /// Default names `V1, V2, …`.
    pub fn default_names(n_vars: usize) -> Vec<String> {
        (1..=n_vars).map(|i| format!("V{i}")).collect()
    }

    pub(crate) fn with_source_unit(mut self, unit: AngleUnit) -> Self {
        self.source_unit = unit;
        self
    }

    pub fn var_names(&self) -> &[String] {
        &self.var_names
    }

    pub fn source_unit(&self) -> AngleUnit {
        self.source_unit
    }

    pub fn n_vars(&self) -> usize {
        self.var_names.len()
    }

    pub fn n_obs(&self) -> usize {
        self.values.len() / self.var_names.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.n_vars();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.n_vars())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn column(&self, var: usize) -> Vec<f64> {
        self.rows().map(|r| r[var]).collect()
    }

    /// Dataset restricted to the variables `vars` (0-based), in that order.
    pub fn select_columns(&self, vars: &[usize]) -> Result<AngularDataset> {
        if let Some(&bad) = vars.iter().find(|&&v| v >= self.n_vars()) {
            return Err(Error::arg(format!("variable {} out of range", bad + 1)));
        }
        let names = vars.iter().map(|&v| self.var_names[v].clone()).collect();
        let mut values = Vec::with_capacity(self.n_obs() * vars.len());
        for row in self.rows() {
            values.extend(vars.iter().map(|&v| row[v]));
        }
        Ok(AngularDataset {
            var_names: names,
            values,
            source_unit: self.source_unit,
        })
    }
}
