//! Estimate salinity from a resistivity reading using the nearest model.
//!
//! cargo run -p soilsense --example invert_salinity -- <moisture %> <resistivity kΩ·m>

use soilsense::format::significant;
use soilsense::salinity::ModelError;
use soilsense::{fixtures, ExponentialModel, ModelBank, PointSelection};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<f64>());
    let moisture = args.next().transpose()?.unwrap_or(5.0);
    let rho = args.next().transpose()?.unwrap_or(23.52);

    let bank = ModelBank::fit(&fixtures::calibration(), None, PointSelection::default())?;
    let model = bank.select(moisture)?;
    println!("using the {}% model (A = {:.4}, B = {:.6})", model.moisture_pct, model.amplitude, model.decay);
    report(model, rho);

    let reference = ExponentialModel::new(26.213, 0.007, 5.0)?;
    println!("with A = 26.213, B = 0.007:");
    report(&reference, rho);
    Ok(())
}

fn report(model: &ExponentialModel, rho: f64) {
    match model.invert_salinity(rho) {
        Ok(inv) if inv.out_of_calibration => {
            println!("  salinity ≈ {} % (beyond the calibrated 0-100% range)", significant(inv.salinity_pct, 4))
        }
        Ok(inv) => println!("  salinity ≈ {} %", significant(inv.salinity_pct, 4)),
        Err(e @ (ModelError::AboveCalibration { .. } | ModelError::BelowCalibration { .. })) => {
            println!("  out of calibration: {e}")
        }
        Err(e) => println!("  error: {e}"),
    }
}
