//! Physical measurement types, the two-probe resistivity relation and the
//! calibration / method-agreement data carriers.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Read;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MeasurementError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("row {row}: {message}")]
    Parse { row: usize, message: String },
}

pub type Result<T> = std::result::Result<T, MeasurementError>;

fn domain(msg: impl Into<String>) -> MeasurementError {
    MeasurementError::Domain(msg.into())
}

/// Geometry of the two-probe bowl: probe spacing `L` and bowl radius `r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeGeometry {
    electrode_spacing: f64,
    container_radius: f64,
}

impl ProbeGeometry {
    pub fn new(electrode_spacing: f64, container_radius: f64) -> Result<Self> {
        if !(electrode_spacing > 0.0 && electrode_spacing.is_finite()) {
            return Err(domain(format!("electrode spacing must be > 0, got {electrode_spacing}")));
        }
        if !(container_radius > 0.0 && container_radius.is_finite()) {
            return Err(domain(format!("container radius must be > 0, got {container_radius}")));
        }
        Ok(Self { electrode_spacing, container_radius })
    }

    pub fn electrode_spacing(&self) -> f64 {
        self.electrode_spacing
    }

    pub fn container_radius(&self) -> f64 {
        self.container_radius
    }

    /// Full-precision bowl cross section.
    pub fn area(&self) -> f64 {
        PI * self.container_radius * self.container_radius
    }

    pub fn resistivity(&self, resistance_kohm: f64) -> Result<f64> {
        resistivity(resistance_kohm, self.area(), self.electrode_spacing)
    }
}

/// Cross-sectional area `π r²` of a round container, in m².
pub fn cross_section_area(radius_m: f64) -> Result<f64> {
    if !(radius_m >= 0.0) || !radius_m.is_finite() {
        return Err(domain(format!("radius must be >= 0, got {radius_m}")));
    }
    Ok(PI * radius_m * radius_m)
}

/// Two-probe resistivity `ρ = R·A / L`, evaluated as `R·(A/L)` so the cell
/// constant is formed once. Units follow the resistance: kΩ in, kΩ·m out.
pub fn resistivity(resistance_kohm: f64, area_m2: f64, spacing_m: f64) -> Result<f64> {
    if !(area_m2 > 0.0) || !area_m2.is_finite() {
        return Err(domain(format!("area must be > 0, got {area_m2}")));
    }
    if !(spacing_m > 0.0) || !spacing_m.is_finite() {
        return Err(domain(format!("spacing must be > 0, got {spacing_m}")));
    }
    if !(resistance_kohm >= 0.0) || !resistance_kohm.is_finite() {
        return Err(domain(format!("resistance must be >= 0, got {resistance_kohm}")));
    }
    Ok(resistance_kohm * (area_m2 / spacing_m))
}

/// One row of the resistivity/salinity calibration table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResistivitySample {
    pub moisture_pct: f64,
    pub sample_no: u32,
    pub sand_pct: f64,
    pub silt_pct: f64,
    pub clay_pct: f64,
    pub salinity_pct: f64,
    pub resistance_kohm: f64,
    pub resistivity_kohm_m: f64,
}

impl ResistivitySample {
    fn validate(&self) -> std::result::Result<(), String> {
        let finite = [
            self.moisture_pct,
            self.sand_pct,
            self.silt_pct,
            self.clay_pct,
            self.salinity_pct,
            self.resistance_kohm,
            self.resistivity_kohm_m,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err("non-finite value".into());
        }
        if !(0.0..=100.0).contains(&self.salinity_pct) {
            return Err(format!("salinity {} outside 0..=100", self.salinity_pct));
        }
        if !(0.0..=100.0).contains(&self.moisture_pct) {
            return Err(format!("moisture {} outside 0..=100", self.moisture_pct));
        }
        if self.resistance_kohm <= 0.0 {
            return Err(format!("resistance must be > 0, got {}", self.resistance_kohm));
        }
        if self.resistivity_kohm_m <= 0.0 {
            return Err(format!("resistivity must be > 0, got {}", self.resistivity_kohm_m));
        }
        let total = self.sand_pct + self.silt_pct + self.clay_pct;
        if (total - 100.0).abs() > 1e-6 {
            return Err(format!("particle fractions sum to {total}, expected 100"));
        }
        Ok(())
    }
}

/// Reads calibration rows from CSV. Row numbers in errors are 1-based data
/// rows (the header is row 0).
pub fn load_calibration<R: Read>(source: R) -> Result<Vec<ResistivitySample>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let mut out = Vec::new();
    for (idx, rec) in reader.deserialize::<ResistivitySample>().enumerate() {
        let row = idx + 1;
        let sample = rec.map_err(|e| MeasurementError::Parse { row, message: e.to_string() })?;
        sample.validate().map_err(|message| MeasurementError::Parse { row, message })?;
        out.push(sample);
    }
    Ok(out)
}

/// Distinct moisture levels present in a calibration set, ascending.
pub fn moisture_levels(samples: &[ResistivitySample]) -> Vec<f64> {
    let mut levels: Vec<f64> = Vec::new();
    for s in samples {
        if !levels.contains(&s.moisture_pct) {
            levels.push(s.moisture_pct);
        }
    }
    levels.sort_by(f64::total_cmp);
    levels
}

/// `(salinity, resistivity)` pairs of one moisture level, in file order.
pub fn points_at_moisture(samples: &[ResistivitySample], moisture_pct: f64) -> Vec<(f64, f64)> {
    samples
        .iter()
        .filter(|s| s.moisture_pct == moisture_pct)
        .map(|s| (s.salinity_pct, s.resistivity_kohm_m))
        .collect()
}

/// A live soil observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoilReading {
    pub moisture_pct: f64,
    pub ph: f64,
    pub temperature_c: f64,
    #[serde(default = "Utc::now")]
    pub timestamp: DateTime<Utc>,
}

impl SoilReading {
    pub fn new(moisture_pct: f64, ph: f64, temperature_c: f64, timestamp: DateTime<Utc>) -> Result<Self> {
        let r = Self { moisture_pct, ph, temperature_c, timestamp };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=14.0).contains(&self.ph) {
            return Err(domain(format!("pH {} outside 0..=14", self.ph)));
        }
        if !(0.0..=100.0).contains(&self.moisture_pct) {
            return Err(domain(format!("moisture {} outside 0..=100", self.moisture_pct)));
        }
        if !self.temperature_c.is_finite() {
            return Err(domain("temperature must be finite"));
        }
        Ok(())
    }
}

/// Reads readings from a telemetry feed export. Columns are matched by the
/// labels `moisture_pct`, `ph`, `temperature_c` and `created_at`; rows with a
/// missing value are skipped.
pub fn readings_from_feed_csv<R: Read>(source: R) -> Result<Vec<SoilReading>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let headers = reader
        .headers()
        .map_err(|e| MeasurementError::Parse { row: 0, message: e.to_string() })?
        .clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| MeasurementError::Parse { row: 0, message: format!("missing column {name}") })
    };
    let (c_m, c_ph, c_t, c_at) = (col("moisture_pct")?, col("ph")?, col("temperature_c")?, col("created_at")?);
    let mut out = Vec::new();
    for (idx, rec) in reader.records().enumerate() {
        let row = idx + 1;
        let rec = rec.map_err(|e| MeasurementError::Parse { row, message: e.to_string() })?;
        let field = |c: usize| rec.get(c).unwrap_or("");
        if [c_m, c_ph, c_t].iter().any(|&c| field(c).is_empty()) {
            continue;
        }
        let num = |c: usize| {
            field(c)
                .parse::<f64>()
                .map_err(|e| MeasurementError::Parse { row, message: format!("{}: {e}", &headers[c]) })
        };
        let timestamp = DateTime::parse_from_rfc3339(field(c_at))
            .map_err(|e| MeasurementError::Parse { row, message: format!("created_at: {e}") })?
            .with_timezone(&Utc);
        let reading = SoilReading::new(num(c_m)?, num(c_ph)?, num(c_t)?, timestamp)
            .map_err(|e| MeasurementError::Parse { row, message: e.to_string() })?;
        out.push(reading);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parameter {
    Ph,
    Moisture,
    Temperature,
}

impl std::fmt::Display for Parameter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Parameter::Ph => "ph",
            Parameter::Moisture => "moisture",
            Parameter::Temperature => "temperature",
        })
    }
}

/// A field-meter reading: either a point value or a reported range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FieldValue {
    Scalar(f64),
    Interval { low: f64, high: f64 },
}

impl FieldValue {
    pub fn from_bounds(low: f64, high: f64) -> Result<Self> {
        if low > high {
            return Err(domain(format!("interval lower bound {low} exceeds upper bound {high}")));
        }
        Ok(if low == high { FieldValue::Scalar(low) } else { FieldValue::Interval { low, high } })
    }

    pub fn contains(&self, v: f64) -> bool {
        match *self {
            FieldValue::Scalar(x) => x == v,
            FieldValue::Interval { low, high } => (low..=high).contains(&v),
        }
    }
}

/// One sample compared across field meter, laboratory and the IoT probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementRow {
    pub parameter: Parameter,
    pub sample_label: String,
    pub field_value: FieldValue,
    pub lab_value: f64,
    pub iot_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowAgreement {
    pub parameter: Parameter,
    pub sample_label: String,
    pub spread: f64,
    /// Only set for interval field readings.
    pub within_field_interval: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgreementReport {
    pub rows: Vec<RowAgreement>,
    pub max_spread: BTreeMap<Parameter, f64>,
}

impl AgreementReport {
    /// True when every interval-valued row has both lab and IoT values inside
    /// the field range.
    pub fn all_within_intervals(&self, parameter: Parameter) -> bool {
        self.rows
            .iter()
            .filter(|r| r.parameter == parameter)
            .filter_map(|r| r.within_field_interval)
            .all(|b| b)
    }
}

/// Largest pairwise absolute difference in a set of readings.
pub fn spread(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if values.is_empty() {
        0.0
    } else {
        max - min
    }
}

pub fn method_agreement(rows: &[AgreementRow]) -> Result<AgreementReport> {
    if rows.is_empty() {
        return Err(domain("agreement report needs at least one row"));
    }
    let mut max_spread: BTreeMap<Parameter, f64> = BTreeMap::new();
    let rows = rows
        .iter()
        .map(|r| {
            let (spread, within) = match r.field_value {
                FieldValue::Scalar(f) => (spread(&[f, r.lab_value, r.iot_value]), None),
                fv @ FieldValue::Interval { .. } => (
                    (r.lab_value - r.iot_value).abs(),
                    Some(fv.contains(r.lab_value) && fv.contains(r.iot_value)),
                ),
            };
            let entry = max_spread.entry(r.parameter).or_insert(0.0);
            *entry = entry.max(spread);
            RowAgreement {
                parameter: r.parameter,
                sample_label: r.sample_label.clone(),
                spread,
                within_field_interval: within,
            }
        })
        .collect();
    Ok(AgreementReport { rows, max_spread })
}

#[derive(Deserialize)]
struct AgreementRecord {
    parameter: Parameter,
    sample_label: String,
    field_low: f64,
    field_high: f64,
    lab_value: f64,
    iot_value: f64,
}

/// Reads the `parameter,sample_label,field_low,field_high,lab_value,iot_value`
/// CSV; equal bounds encode a scalar field reading.
pub fn load_agreement<R: Read>(source: R) -> Result<Vec<AgreementRow>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let mut out = Vec::new();
    for (idx, rec) in reader.deserialize::<AgreementRecord>().enumerate() {
        let row = idx + 1;
        let rec = rec.map_err(|e| MeasurementError::Parse { row, message: e.to_string() })?;
        let field_value = FieldValue::from_bounds(rec.field_low, rec.field_high)
            .map_err(|e| MeasurementError::Parse { row, message: e.to_string() })?;
        out.push(AgreementRow {
            parameter: rec.parameter,
            sample_label: rec.sample_label,
            field_value,
            lab_value: rec.lab_value,
            iot_value: rec.iot_value,
        });
    }
    Ok(out)
}
