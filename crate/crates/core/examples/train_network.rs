//! Synthesize a training set, train the salinity network and report fit quality.
//!
//! cargo run --release -p soilsense --example train_network -- [seed] [hidden units]

use soilsense::ann::{
    error_histogram, evaluate, synthesize_training_set, train, SynthesisConfig, TrainingConfig, HISTOGRAM_BINS,
};
use soilsense::fixtures;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(7);
    let hidden: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(10);

    let dataset = synthesize_training_set(&fixtures::calibration(), &SynthesisConfig { seed, ..Default::default() })?;
    let config = TrainingConfig { seed, hidden_units: hidden, ..Default::default() };
    let (net, report) = train(&config, &dataset)?;

    println!("{} samples, H = {hidden}, seed {seed}", dataset.len());
    println!("stopped after {} epochs ({}), best epoch {}", report.epochs(), report.stop_reason, report.best_epoch);
    println!("best validation MSE {:.6}", report.best_val_mse);

    let (tr, va, te) = report.split.select(&dataset);
    for (name, part) in [("train", &tr), ("validation", &va), ("test", &te), ("all", &dataset)] {
        let e = evaluate(&net, part)?;
        println!("{name:>10}: n = {:>3}, mse {:.5}, r {:.4}, r² {:.4}", part.len(), e.mse, e.r, e.r_squared);
    }

    let hist = error_histogram(&net, &dataset, HISTOGRAM_BINS)?;
    println!("error histogram (target - output, salinity %):");
    for (i, count) in hist.counts.iter().enumerate() {
        println!("  [{:>7.2}, {:>7.2}) {}", hist.bin_edges[i], hist.bin_edges[i + 1], "#".repeat(*count));
    }
    Ok(())
}
