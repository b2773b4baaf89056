//! CSV datasets and JSON model files.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dataset::{to_radians, AngleUnit, AngularDataset};
use crate::error::{Error, Result};
use crate::estimate::FitReport;
use crate::params::{DimVector, MnntsParams};

pub const FORMAT_VERSION: u32 = 1;

/// Result of reading an angle CSV.
#[derive(Debug, Clone)]
pub struct Ingested {
    pub dataset: AngularDataset,
    /// Rows skipped because they contained the missing-value token.
    pub dropped: usize,
    /// Per-column `(min, max)` in radians after reduction.
    pub ranges: Vec<(f64, f64)>,
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::data(format!("malformed CSV: {other:?}")),
    }
}

/// Read a CSV with a header row of variable names and one observation per
/// line. Rows containing `missing_token` in any cell are dropped.
pub fn ingest_csv(path: &Path, unit: AngleUnit, missing_token: &str) -> Result<Ingested> {
    let file = File::open(path)?;
    ingest_reader(BufReader::new(file), unit, missing_token)
}

pub fn ingest_reader<R: Read>(reader: R, unit: AngleUnit, missing_token: &str) -> Result<Ingested> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let names: Vec<String> = rdr
        .headers()
        .map_err(csv_error)?
        .iter()
        .map(str::to_string)
        .collect();
    if names.is_empty() || names.iter().all(String::is_empty) {
        return Err(Error::data("CSV has no header row"));
    }
    let n_vars = names.len();
    let mut values = Vec::new();
    let mut dropped = 0;
    let mut row = Vec::with_capacity(n_vars);
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(csv_error)?;
        // data rows are numbered from 1, after the header
        let line = i + 1;
        if record.len() != n_vars {
            return Err(Error::data(format!(
                "row {line} has {} cells, header has {n_vars}",
                record.len()
            )));
        }
        if record.iter().any(|cell| cell == missing_token) {
            dropped += 1;
            continue;
        }
        row.clear();
        for (j, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| {
                Error::data(format!(
                    "row {line}, column {} ({}): cannot parse {cell:?}",
                    j + 1,
                    names[j]
                ))
            })?;
            if !v.is_finite() {
                return Err(Error::data(format!(
                    "row {line}, column {} ({}): non-finite value {cell:?}",
                    j + 1,
                    names[j]
                )));
            }
            row.push(to_radians(v, unit));
        }
        values.extend_from_slice(&row);
    }
    if values.is_empty() {
        return Err(Error::data(
            "no complete rows remain after dropping missing values",
        ));
    }
    let dataset = AngularDataset::from_flat(names, values)?.with_source_unit(unit);
    let ranges = (0..n_vars)
        .map(|j| {
            dataset
                .rows()
                .map(|r| r[j])
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
                    (lo.min(x), hi.max(x))
                })
        })
        .collect();
    Ok(Ingested {
        dataset,
        dropped,
        ranges,
    })
}

/// Write a dataset in radians. Values use the shortest representation that
/// parses back to the same double.
pub fn write_dataset(path: &Path, data: &AngularDataset) -> Result<()> {
    let rows = data.rows().map(|r| r.to_vec());
    write_table(path, data.var_names(), rows)
}

/// Write a numeric table with a header row.
pub fn write_table<S, I>(path: &Path, header: &[S], rows: I) -> Result<()>
where
    S: AsRef<str>,
    I: IntoIterator<Item = Vec<f64>>,
{
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    write_table_to(&mut w, header, rows)?;
    w.flush()?;
    Ok(())
}

pub fn write_table_to<W, S, I>(w: W, header: &[S], rows: I) -> Result<()>
where
    W: Write,
    S: AsRef<str>,
    I: IntoIterator<Item = Vec<f64>>,
{
    let mut wtr = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w);
    wtr.write_record(header.iter().map(|s| s.as_ref()))
        .map_err(csv_error)?;
    for row in rows {
        wtr.write_record(row.iter().map(|x| x.to_string()))
            .map_err(csv_error)?;
    }
    wtr.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelMetadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loglik: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_obs: Option<usize>,
    #[serde(default)]
    pub var_names: Vec<String>,
}

/// On-disk model: dims plus real and imaginary parts of the coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub dims: Vec<usize>,
    pub c_re: Vec<f64>,
    pub c_im: Vec<f64>,
    #[serde(default)]
    pub metadata: ModelMetadata,
}

impl ModelFile {
    pub fn from_params(p: &MnntsParams, metadata: ModelMetadata) -> Self {
        ModelFile {
            format_version: FORMAT_VERSION,
            dims: p.dims().as_slice().to_vec(),
            c_re: p.coeffs().iter().map(|c| c.re).collect(),
            c_im: p.coeffs().iter().map(|c| c.im).collect(),
            metadata,
        }
    }

    pub fn from_fit(fit: &FitReport, var_names: &[String], n_obs: usize) -> Self {
        let loglik = fit.loglik.is_finite().then_some(fit.loglik);
        ModelFile::from_params(
            &fit.params,
            ModelMetadata {
                method: Some(fit.method.to_string()),
                loglik,
                n_obs: Some(n_obs),
                var_names: var_names.to_vec(),
            },
        )
    }

    /// Validated parameters.
    pub fn params(&self) -> Result<MnntsParams> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::data(format!(
                "unsupported model format version {}",
                self.format_version
            )));
        }
        let dims = DimVector::new(self.dims.clone()).map_err(|e| Error::data(e.to_string()))?;
        let len = dims.total_len();
        if self.c_re.len() != len || self.c_im.len() != len {
            return Err(Error::data(format!(
                "dims {dims} need {len} coefficients, file has {} real and {} imaginary",
                self.c_re.len(),
                self.c_im.len()
            )));
        }
        if !self.metadata.var_names.is_empty() && self.metadata.var_names.len() != dims.n_vars() {
            return Err(Error::data("metadata var_names length does not match dims"));
        }
        let coeffs = self
            .c_re
            .iter()
            .zip(&self.c_im)
            .map(|(&re, &im)| Complex64::new(re, im))
            .collect();
        MnntsParams::new(dims, coeffs).map_err(|e| Error::data(format!("invalid model: {e}")))
    }

    /// Variable names from the metadata, or `V1..Vn`.
    pub fn var_names(&self) -> Vec<String> {
        if self.metadata.var_names.len() == self.dims.len() {
            self.metadata.var_names.clone()
        } else {
            AngularDataset::default_names(self.dims.len())
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| Error::Numeric(format!("cannot serialize model: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::data(format!("invalid model file: {e}")))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        ModelFile::from_json(&text)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = self.to_json()?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;
    use crate::sampling::random_params;
    use std::f64::consts::TAU;

    fn ingest(text: &str, unit: AngleUnit) -> Result<Ingested> {
        ingest_reader(text.as_bytes(), unit, "NA")
    }

    #[test]
    fn drops_missing_rows() {
        let r = ingest("a,b\n10,20\nNA,30\n40,50\n", AngleUnit::Degrees).unwrap();
        assert_eq!(r.dataset.n_obs(), 2);
        assert_eq!(r.dropped, 1);
        assert_eq!(r.dataset.var_names(), &["a".to_string(), "b".to_string()]);
        assert_eq!(r.dataset.source_unit(), AngleUnit::Degrees);
    }

    #[test]
    fn full_turn_is_zero() {
        let r = ingest("a\n360.0\n", AngleUnit::Degrees).unwrap();
        assert_eq!(r.dataset.values(), &[0.0]);
        assert_eq!(r.ranges, vec![(0.0, 0.0)]);
    }

    #[test]
    fn bad_cell_reports_location() {
        let err = ingest("a,b\n1,2\n3,x\n", AngleUnit::Radians).unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, Error::Data(_)));
        assert!(msg.contains("row 2") && msg.contains("column 2"), "{msg}");
    }

    #[test]
    fn empty_result_is_data_error() {
        assert!(matches!(
            ingest("a\nNA\n", AngleUnit::Radians),
            Err(Error::Data(_))
        ));
        assert!(matches!(
            ingest("a\n", AngleUnit::Radians),
            Err(Error::Data(_))
        ));
    }

    #[test]
    fn ragged_row_rejected() {
        assert!(matches!(
            ingest("a,b\n1\n", AngleUnit::Radians),
            Err(Error::Data(_))
        ));
    }

    #[test]
    fn dataset_roundtrip_is_bitwise() {
        let mut rng = SplitMix64::new(1);
        let rows: Vec<Vec<f64>> = (0..200)
            .map(|_| (0..3).map(|_| rng.uniform() * TAU).collect())
            .collect();
        let ds = AngularDataset::new(AngularDataset::default_names(3), &rows).unwrap();
        let mut buf = Vec::new();
        write_table_to(&mut buf, ds.var_names(), ds.rows().map(|r| r.to_vec())).unwrap();
        let back = ingest_reader(&buf[..], AngleUnit::Radians, "NA")
            .unwrap()
            .dataset;
        let bits = |d: &AngularDataset| d.values().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&ds), bits(&back));
    }

    #[test]
    fn model_roundtrip_is_bitwise() {
        let mut rng = SplitMix64::new(2);
        for dims in [vec![3], vec![2, 1, 3], vec![0, 4]] {
            let p = random_params(&DimVector::new(dims).unwrap(), &mut rng);
            let file = ModelFile::from_params(&p, ModelMetadata::default());
            let back = ModelFile::from_json(&file.to_json().unwrap())
                .unwrap()
                .params()
                .unwrap();
            for (a, b) in p.coeffs().iter().zip(back.coeffs()) {
                assert_eq!(a.re.to_bits(), b.re.to_bits());
                assert_eq!(a.im.to_bits(), b.im.to_bits());
            }
        }
    }

    #[test]
    fn model_validation() {
        let p = MnntsParams::uniform(DimVector::new(vec![1]).unwrap());
        let mut file = ModelFile::from_params(&p, ModelMetadata::default());
        file.c_re.push(0.0);
        assert!(matches!(file.params(), Err(Error::Data(_))));
        let mut file = ModelFile::from_params(&p, ModelMetadata::default());
        file.c_re[0] *= 2.0;
        assert!(matches!(file.params(), Err(Error::Data(_))));
        let mut file = ModelFile::from_params(&p, ModelMetadata::default());
        file.format_version = 99;
        assert!(file.params().is_err());
        assert!(ModelFile::from_json("{").is_err());
    }
}
