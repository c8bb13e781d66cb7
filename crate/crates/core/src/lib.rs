//! Soil characterization toolkit.
//!
//! * [`measurement`]: two-probe resistivity, calibration table loading and
//!   the field/lab/IoT agreement report.
//! * [`salinity`]: per-moisture exponential resistivity models, their fit
//!   and closed-form inversion to salinity.
//! * [`ann`]: a 4→H→1 tanh network trained by Levenberg-Marquardt with
//!   early stopping.
//! * [`suitability`]: optimum-range checks producing a suitability verdict.
//!
//! The `examples/` directory has one runnable program per capability.

pub mod ann;
pub mod fixtures;
pub mod format;
pub mod measurement;
pub mod salinity;
pub mod suitability;

pub use measurement::{cross_section_area, resistivity, ProbeGeometry, ResistivitySample, SoilReading};
pub use salinity::{fit_exponential, ExponentialModel, ModelBank, PointSelection};
pub use suitability::{analyze, Decision, OptimumRanges, Problem};
