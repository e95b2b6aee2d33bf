//! Design-based and model-assisted estimation of spatial means, with a
//! simulation laboratory to measure their bias, interval coverage and
//! precision on synthetic geostatistical populations.
//!
//! The crate is organized bottom-up:
//!
//! * [`geofield`] builds calibrated synthetic populations.
//! * [`sampling`] draws simple random samples of grid cells.
//! * [`estimators`] holds the sample-mean (HTE) and simple regression (SRE)
//!   estimators, their variance estimators and confidence intervals.
//! * [`montecarlo`] runs scenario grids and summarizes them.
//!
//! ```
//! use mrv_lab::estimators::{hte, sre, VarianceMethod};
//!
//! let x = [0.0, 1.0, 2.0, 3.0];
//! let z = [1.0, 2.0, 2.0, 3.0];
//! let plain = hte(&z).unwrap();
//! let assisted = sre(&x, &z, 2.0, VarianceMethod::GWeight).unwrap();
//! assert_eq!(plain.point, 2.0);
//! assert!((assisted.point - 2.3).abs() < 1e-12);
//! ```

// Argument checks are written as `!(x > 0.0)` on purpose so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimators;
pub mod geofield;
pub mod montecarlo;
pub mod sampling;
pub mod seed;
pub mod stats;
pub mod tdist;

pub use error::{Error, Result};
