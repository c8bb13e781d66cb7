//! Probe geometry to resistivity, then a pass over the bundled calibration table.
//!
//! cargo run -p soilsense --example resistivity -- 150

use soilsense::format::significant;
use soilsense::{fixtures, resistivity, ProbeGeometry};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let resistance: f64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(150.0);

    let rho = resistivity(resistance, fixtures::TABLE_AREA_M2, fixtures::TABLE_SPACING_M)?;
    println!("R = {resistance} kΩ, A = {} m², L = {} m", fixtures::TABLE_AREA_M2, fixtures::TABLE_SPACING_M);
    println!("ρ = {} kΩ·m", significant(rho, 6));

    let probe = ProbeGeometry::new(0.05, 0.05)?;
    println!("cylindrical container r = 5 cm: A = {:.6} m², ρ = {} kΩ·m", probe.area(), significant(probe.resistivity(resistance)?, 6));

    let rows = fixtures::calibration();
    let worst = rows
        .iter()
        .map(|r| {
            let rho = resistivity(r.resistance_kohm, fixtures::TABLE_AREA_M2, fixtures::TABLE_SPACING_M).unwrap();
            (rho - r.resistivity_kohm_m).abs() / r.resistivity_kohm_m
        })
        .fold(0.0, f64::max);
    println!("{} calibration rows, worst relative mismatch {worst:.2e}", rows.len());
    Ok(())
}
