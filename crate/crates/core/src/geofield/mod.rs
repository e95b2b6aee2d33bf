//! Synthetic geostatistical populations.
//!
//! A population is the sum of a spatially correlated covariate field `x` and
//! an independent residual field `delta`, both Gaussian with spherical
//! covariance, plus a constant shift. The squared correlation between `x` and
//! the total `z` is controlled by the split of the total variance between
//! the two sills. A third covariate, `x_uncorr`, is white noise with its
//! linear trend on `z` removed.

mod covariance;
mod field;
mod population;
mod variogram;

pub use covariance::{spherical_cov, CovarianceSpec};
pub use field::{
    generate_field, generate_field_with, Field, FieldMethod, DENSE_MAX_CELLS, MAX_EMBEDDING_FACTOR, MIN_GRID_SIDE,
};
pub use population::{build_population, decorrelate, Population, PopulationSpec, MIN_CELLS_PER_SAMPLE};
pub use variogram::{empirical_semivariogram, SemivariogramBin};
