//! Bundled data files.

use crate::measurement::{self, AgreementRow, ResistivitySample};

/// Resistivity/salinity calibration table, six moisture levels by eleven
/// salinity steps.
pub const TABLE2_CSV: &str = include_str!("../data/table2.csv");

/// Field meter vs laboratory vs IoT probe readings for pH, moisture and
/// temperature.
pub const AGREEMENT_CSV: &str = include_str!("../data/agreement.csv");

/// Example optimum ranges. Not agronomic guidance.
pub const RANGES_EXAMPLE: &str = include_str!("../data/ranges.example");

/// Bowl cross section used to build the calibration table, in m².
pub const TABLE_AREA_M2: f64 = 0.00784;
/// Probe spacing used to build the calibration table, in m.
pub const TABLE_SPACING_M: f64 = 0.05;

pub fn calibration() -> Vec<ResistivitySample> {
    measurement::load_calibration(TABLE2_CSV.as_bytes()).expect("bundled calibration table is valid")
}

pub fn agreement() -> Vec<AgreementRow> {
    measurement::load_agreement(AGREEMENT_CSV.as_bytes()).expect("bundled agreement table is valid")
}
