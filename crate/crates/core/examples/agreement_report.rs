//! Compare field meter, laboratory and probe readings for the bundled samples.

use soilsense::fixtures;
use soilsense::format::compact;
use soilsense::measurement::{method_agreement, Parameter};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let report = method_agreement(&fixtures::agreement())?;
    println!("{:<12} {:<6} {:>7}  field interval", "parameter", "sample", "spread");
    for row in &report.rows {
        let within = match row.within_field_interval {
            Some(true) => "contains lab and probe",
            Some(false) => "MISSES lab or probe",
            None => "-",
        };
        println!("{:<12} {:<6} {:>7.2}  {within}", format!("{:?}", row.parameter), row.sample_label, row.spread);
    }
    println!();
    for (param, max) in &report.max_spread {
        println!("max {param:?} spread: {}", compact(*max, 6));
    }
    println!("moisture readings inside field intervals: {}", report.all_within_intervals(Parameter::Moisture));
    Ok(())
}
