use std::net::SocketAddr;
use std::sync::Arc;

use serde_json::Value;
use soilsense_telemetry::http::BackgroundServer;
use soilsense_telemetry::{FieldMap, Store};

fn agent() -> ureq::Agent {
    ureq::Agent::config_builder().http_status_as_error(false).build().into()
}

fn get(url: &str) -> (u16, String) {
    let mut resp = agent().get(url).call().unwrap();
    (resp.status().as_u16(), resp.body_mut().read_to_string().unwrap())
}

fn post(url: &str) -> (u16, String) {
    let mut resp = agent().post(url).send_empty().unwrap();
    (resp.status().as_u16(), resp.body_mut().read_to_string().unwrap())
}

fn fields() -> FieldMap {
    [("field1", "moisture_pct"), ("field2", "ph")].into_iter().map(|(s, l)| (s.into(), l.into())).collect()
}

fn localhost() -> SocketAddr {
    "127.0.0.1:0".parse().unwrap()
}

#[test]
fn update_and_feed_over_http() {
    let dir = tempfile::tempdir().unwrap();
    let store = Arc::new(Store::open(dir.path()).unwrap());
    let c = store.create_channel("plot", fields(), false).unwrap();
    let server = BackgroundServer::start(Arc::clone(&store), localhost()).unwrap();
    let base = format!("http://{}", server.local_addr());

    assert_eq!(get(&format!("{base}/update?api_key={}&field1=41.5&field2=6.1", c.write_key)), (200, "1".into()));
    assert_eq!(post(&format!("{base}/update?api_key={}&field1=40", c.write_key)), (200, "2".into()));

    assert_eq!(get(&format!("{base}/update?api_key={}&field1=1", c.read_key)), (401, "0".into()));
    assert_eq!(get(&format!("{base}/update?field1=1")), (401, "0".into()));
    assert_eq!(get(&format!("{base}/update?api_key={}&field7=1", c.write_key)), (400, "0".into()));
    assert_eq!(get(&format!("{base}/update?api_key={}&field1=wet", c.write_key)), (400, "0".into()));

    let (status, body) = get(&format!("{base}/channels/{}/feeds.json?api_key={}&results=5", c.id, c.read_key));
    assert_eq!(status, 200);
    let doc: Value = serde_json::from_str(&body).unwrap();
    assert_eq!(doc["channel"]["field1"], "moisture_pct");
    assert_eq!(doc["channel"]["last_entry_id"], 2);
    let feeds = doc["feeds"].as_array().unwrap();
    assert_eq!(feeds.len(), 2);
    assert_eq!(feeds[0]["field1"], 41.5);
    assert_eq!(feeds[0]["field2"], 6.1);
    assert_eq!(feeds[1]["entry_id"], 2);
    assert!(feeds[1].get("field2").is_none());

    let (_, body) = get(&format!("{base}/channels/{}/feeds.json?api_key={}&results=1", c.id, c.read_key));
    let doc: Value = serde_json::from_str(&body).unwrap();
    assert_eq!(doc["feeds"].as_array().unwrap().len(), 1);

    assert_eq!(get(&format!("{base}/channels/{}/feeds.json?api_key={}", c.id, c.write_key)), (401, "-1".into()));
    assert_eq!(get(&format!("{base}/channels/{}/feeds.json", c.id)), (401, "-1".into()));
    assert_eq!(get(&format!("{base}/channels/77/feeds.json?api_key={}", c.read_key)), (404, "-1".into()));
    server.stop().unwrap();
}

#[test]
fn restart_keeps_feed() {
    let dir = tempfile::tempdir().unwrap();
    let c = {
        let store = Arc::new(Store::open(dir.path()).unwrap());
        let c = store.create_channel("plot", fields(), false).unwrap();
        let server = BackgroundServer::start(store, localhost()).unwrap();
        for k in 1..=3 {
            let url = format!("http://{}/update?api_key={}&field1={k}", server.local_addr(), c.write_key);
            assert_eq!(get(&url), (200, k.to_string()));
        }
        server.stop().unwrap();
        c
    };
    let store = Arc::new(Store::open(dir.path()).unwrap());
    let server = BackgroundServer::start(store, localhost()).unwrap();
    let (_, body) = get(&format!("http://{}/channels/{}/feeds.json?api_key={}", server.local_addr(), c.id, c.read_key));
    let doc: Value = serde_json::from_str(&body).unwrap();
    let values: Vec<f64> = doc["feeds"].as_array().unwrap().iter().map(|f| f["field1"].as_f64().unwrap()).collect();
    assert_eq!(values, [1.0, 2.0, 3.0]);
}

#[test]
fn occupied_port_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let store = Arc::new(Store::open(dir.path()).unwrap());
    let first = BackgroundServer::start(Arc::clone(&store), localhost()).unwrap();
    assert!(BackgroundServer::start(store, first.local_addr()).is_err());
}
