//! Fit one exponential model per moisture level and save the bank.
//!
//! cargo run -p soilsense --example fit_models -- [bank.json]

use soilsense::salinity::r_squared;
use soilsense::{fixtures, measurement, ModelBank, PointSelection};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let samples = fixtures::calibration();
    let bank = ModelBank::fit(&samples, None, PointSelection::default())?;

    println!("{:>9} {:>12} {:>10} {:>8} {:>3}", "moisture", "A", "B", "R²", "n");
    for m in bank.models() {
        let flag = if m.is_low_confidence() { "  low confidence" } else { "" };
        println!(
            "{:>8}% {:>12.6} {:>10.6} {:>8.4} {:>3}{flag}",
            m.moisture_pct,
            m.amplitude,
            m.decay,
            m.r_squared.unwrap_or(f64::NAN),
            m.n_points
        );
    }

    // the 20% curve turns upward at 100% salinity; compare with a fit that keeps it
    let all = ModelBank::fit(&samples, Some(&[20.0]), PointSelection::All)?;
    let m = &all.models()[0];
    let pts = measurement::points_at_moisture(&samples, 20.0);
    println!("20% with all {} points: A = {:.5}, B = {:.6}, R² = {:.4}", pts.len(), m.amplitude, m.decay, r_squared(m, &pts)?);

    if let Some(path) = std::env::args().nth(1) {
        bank.save(&path)?;
        println!("wrote {path}");
    }
    Ok(())
}
