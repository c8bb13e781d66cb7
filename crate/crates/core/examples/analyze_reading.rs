//! Check a soil reading against optimum ranges.
//!
//! cargo run -p soilsense --example analyze_reading -- <ph> <moisture %> <temperature °C>

use chrono::Utc;
use soilsense::suitability::OptimumRanges;
use soilsense::{analyze, fixtures, SoilReading};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let v: Vec<f64> = std::env::args().skip(1).map(|a| a.parse()).collect::<Result<_, _>>()?;
    let (ph, moisture, temperature) = match v[..] {
        [a, b, c] => (a, b, c),
        _ => (4.8, 35.0, 27.0),
    };
    let ranges = OptimumRanges::from_json(fixtures::RANGES_EXAMPLE)?;
    let reading = SoilReading::new(moisture, ph, temperature, Utc::now())?;

    println!("pH {ph}, moisture {moisture}%, temperature {temperature} °C");
    println!(
        "ranges: pH [{}, {}], moisture [{}, {}], temperature [{}, {}]",
        ranges.ph.min, ranges.ph.max, ranges.moisture_pct.min, ranges.moisture_pct.max, ranges.temperature_c.min,
        ranges.temperature_c.max
    );
    let decision = analyze(&reading, &ranges);
    println!("{}", if decision.suitable { "SUITABLE" } else { "UNSUITABLE" });
    for p in &decision.problems {
        println!("  {p}");
    }
    Ok(())
}
