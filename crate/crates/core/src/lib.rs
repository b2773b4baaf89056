//! Multivariate nonnegative trigonometric sums (MNNTS) distributions on the
//! hypertorus: densities, marginal and conditional distributions, estimation,
//! independence testing and sampling.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conditional;
pub mod dataset;
pub mod density;
pub mod error;
pub mod estimate;
pub mod independence;
pub mod io;
pub mod linalg;
pub mod marginal;
pub mod params;
pub mod rng;
pub mod sampling;
pub mod special;
pub mod summary;
pub mod synth;

pub use conditional::{conditional, conditioning_density, ConditionalSpec};
pub use dataset::{AngleUnit, AngularDataset};
pub use density::{cdf_univariate, density, log_likelihood, AnglePoint, UnivariateCdf};
pub use error::{Error, Result};
pub use estimate::{fit, fit_md, fit_ml, FitReport, Method, MlOptions};
pub use independence::{independence_score, lr_test, product_model, IndependenceTestResult, Split};
pub use io::{ingest_csv, ModelFile, ModelMetadata};
pub use marginal::{marginal, MarginalMixture};
pub use params::{DimVector, MnntsParams};
pub use rng::SplitMix64;
pub use sampling::{random_params, sample, sample_univariate};
pub use summary::{circular_correlation, circular_summary, CircularSummary};
