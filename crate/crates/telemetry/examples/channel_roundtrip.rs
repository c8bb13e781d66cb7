//! Start a local service, push a few probe readings over HTTP, read them back
//! and run the exported feed through the suitability rules.
//!
//! cargo run -p soilsense-telemetry --example channel_roundtrip

use std::sync::Arc;

use soilsense::suitability::OptimumRanges;
use soilsense::{analyze, fixtures, measurement};
use soilsense_telemetry::http::BackgroundServer;
use soilsense_telemetry::{FieldMap, Store};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join(format!("soilsense-demo-{}", std::process::id()));
    let store = Arc::new(Store::open(&dir)?);
    let fields: FieldMap = [("field1", "moisture_pct"), ("field2", "ph"), ("field3", "temperature_c")]
        .into_iter()
        .map(|(s, l)| (s.to_string(), l.to_string()))
        .collect();
    let channel = store.create_channel("greenhouse bed 3", fields, false)?;
    println!("channel {} write key {} read key {}", channel.id, channel.write_key, channel.read_key);

    let server = BackgroundServer::start(Arc::clone(&store), "127.0.0.1:0".parse()?)?;
    let base = format!("http://{}", server.local_addr());
    for (m, ph, t) in [(64.0, 6.1, 24.5), (58.5, 5.2, 25.0), (71.0, 6.8, 36.2)] {
        let url = format!("{base}/update?api_key={}&field1={m}&field2={ph}&field3={t}", channel.write_key);
        let id = ureq::get(&url).call()?.body_mut().read_to_string()?;
        println!("ingested entry {id}");
    }
    let feed = ureq::get(&format!("{base}/channels/{}/feeds.json?api_key={}&results=2", channel.id, channel.read_key))
        .call()?
        .body_mut()
        .read_to_string()?;
    println!("last two: {feed}");
    server.stop()?;

    let csv = store.export_feed_csv(channel.id, Some(&channel.read_key))?;
    print!("{csv}");
    let ranges = OptimumRanges::from_json(fixtures::RANGES_EXAMPLE)?;
    for reading in measurement::readings_from_feed_csv(csv.as_bytes())? {
        let d = analyze(&reading, &ranges);
        let tags: Vec<&str> = d.problems.iter().map(|p| p.tag()).collect();
        println!("{} {}", reading.timestamp, if d.suitable { "suitable".to_string() } else { tags.join(", ") });
    }
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
