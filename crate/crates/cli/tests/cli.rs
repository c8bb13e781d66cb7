use std::io::{BufRead, BufReader};
use std::path::Path;
use std::process::{Child, Command, Output, Stdio};

use serde_json::Value;

fn soilsense(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_soilsense")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn resistivity_command() {
    let o = soilsense(&["resistivity", "--resistance", "150", "--area", "0.00784", "--spacing", "0.05"]);
    assert_eq!((code(&o), stdout(&o).trim()), (0, "23.5200"));
    let o = soilsense(&["resistivity", "--resistance", "0", "--area", "0.00784", "--spacing", "0.05"]);
    assert_eq!(stdout(&o).trim(), "0.00000");
    let o = soilsense(&["resistivity", "--resistance", "150", "--area", "0.00784", "--spacing", "0"]);
    assert_eq!(code(&o), 3);
    assert_eq!(code(&soilsense(&["resistivity", "--resistance", "150", "--spacing", "0.05"])), 2);
    assert_eq!(code(&soilsense(&["resistivity", "--resistance", "abc", "--area", "1", "--spacing", "1"])), 2);
    let o = soilsense(&["--format", "csv", "resistivity", "--resistance", "150", "--area", "0.00784", "--spacing", "0.05"]);
    assert_eq!(stdout(&o), "resistivity_kohm_m\n23.52\n");
}

#[test]
fn fit_command() {
    let dir = tempfile::tempdir().unwrap();
    let bank = dir.path().join("bank.json");
    let o = soilsense(&["fit", "--out", p(&bank)]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    let rows: Vec<&str> = out.lines().skip(1).collect();
    assert_eq!(rows.len(), 6);
    for (row, low) in rows.iter().zip([false, false, false, true, true, true]) {
        assert_eq!(row.contains("low-confidence"), low, "{row}");
    }
    assert!(bank.exists());

    let o = soilsense(&["--format", "csv", "fit", "--moisture", "5"]);
    let out = stdout(&o);
    let cells: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
    let (a, b, r2): (f64, f64, f64) = (cells[1].parse().unwrap(), cells[2].parse().unwrap(), cells[3].parse().unwrap());
    assert!((a / 26.213 - 1.0).abs() <= 0.03);
    assert!((b / 0.007 - 1.0).abs() <= 0.05);
    assert!((r2 - 0.98).abs() <= 0.02);

    assert_eq!(code(&soilsense(&["fit", "--moisture", "15"])), 3);
    let empty = dir.path().join("empty.csv");
    std::fs::write(&empty, "").unwrap();
    assert_eq!(code(&soilsense(&["fit", "--data", p(&empty)])), 3);
}

#[test]
fn invert_command() {
    let dir = tempfile::tempdir().unwrap();
    let bank = dir.path().join("bank.json");
    std::fs::write(&bank, r#"{"models":[{"moisture_pct":5.0,"amplitude":26.213,"decay":0.007,"r_squared":null}]}"#)
        .unwrap();
    let run = |rho: &str| soilsense(&["invert", "--bank", p(&bank), "--moisture", "5", "--resistivity", rho]);
    let o = run("26.213");
    assert_eq!((code(&o), stdout(&o).trim()), (0, "0.000"));
    let o = run("23.52");
    assert_eq!((code(&o), stdout(&o).trim()), (0, "15.49"));
    let o = run("30");
    assert_eq!(code(&o), 3);
    assert!(!String::from_utf8_lossy(&o.stderr).is_empty());

    // 105% implied salinity: printed, with a warning on stderr only
    let rho = format!("{}", 26.213 * (-0.007f64 * 105.0).exp());
    let o = run(&rho);
    assert_eq!((code(&o), stdout(&o).trim()), (0, "105.0"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
    assert_eq!(code(&run(&format!("{}", 26.213 * (-0.007f64 * 120.0).exp()))), 3);

    let missing = dir.path().join("none.json");
    assert_eq!(code(&soilsense(&["invert", "--bank", p(&missing), "--moisture", "5", "--resistivity", "1"])), 3);
}

fn write_smooth_dataset(path: &Path) {
    // salinity is a smooth function of moisture and resistivity only
    let mut csv = String::from("moisture_pct,ph,temperature_c,resistivity_kohm_m,salinity_pct\n");
    for i in 0..60 {
        let m = [5.0, 10.0, 20.0][i % 3];
        let sal = (i * 37 % 101) as f64;
        let rho = 20.0 / m * (-0.01 * sal).exp();
        csv.push_str(&format!("{m},{},{},{rho},{sal}\n", 4.0 + (i % 5) as f64 * 0.1, 22.0));
    }
    std::fs::write(path, csv).unwrap();
}

#[test]
fn train_and_predict_commands() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.csv");
    write_smooth_dataset(&data);
    let net = dir.path().join("net.json");
    let report = dir.path().join("report.csv");
    let o = soilsense(&[
        "--format", "csv", "train", "--data", p(&data), "--hidden", "4", "--patience", "20",
        "--out", p(&net), "--report", p(&report),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    let summary: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
    let best_epoch: usize = summary[3].parse().unwrap();
    let report_text = std::fs::read_to_string(&report).unwrap();
    assert!(report_text.starts_with("epoch,mse_train,mse_val,mse_test\n"));
    assert!(report_text.lines().count() > best_epoch + 1);

    // dataset row i=3: moisture 5, salinity 10
    let rho = 20.0 / 5.0 * (-0.01f64 * 10.0).exp();
    let o = soilsense(&["--format", "csv", "predict", "--model", p(&net), "--input", &format!("5,4.3,22,{rho}")]);
    assert_eq!(code(&o), 0);
    let pred: f64 = stdout(&o).lines().nth(1).unwrap().parse().unwrap();
    assert!((pred - 10.0).abs() <= 5.0, "{pred}");

    assert_eq!(code(&soilsense(&["predict", "--model", p(&net), "--input", "5,4.3,22"])), 2);
    let tiny = dir.path().join("tiny.csv");
    std::fs::write(&tiny, "moisture_pct,ph,temperature_c,resistivity_kohm_m,salinity_pct\n5,4,22,1,1\n5,4,22,2,2\n").unwrap();
    assert_eq!(code(&soilsense(&["train", "--data", p(&tiny), "--out", p(&net), "--report", p(&report)])), 3);
    assert_eq!(code(&soilsense(&["train", "--out", p(&net)])), 2);
}

#[test]
fn stalled_training_exits_numeric_with_report() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("flat.csv");
    let mut csv = String::from("moisture_pct,ph,temperature_c,resistivity_kohm_m,salinity_pct\n");
    // identical inputs with conflicting targets: the error cannot fall below a floor
    for i in 0..30 {
        csv.push_str(&format!("5,4,22,1,{}\n", if i % 2 == 0 { 0 } else { 100 }));
    }
    std::fs::write(&data, csv).unwrap();
    let net = dir.path().join("net.json");
    let report = dir.path().join("report.csv");
    let o = soilsense(&[
        "train", "--data", p(&data), "--hidden", "2", "--patience", "100000", "--out", p(&net), "--report", p(&report),
    ]);
    assert_eq!(code(&o), 4, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(net.exists() && report.exists());
}

#[test]
fn analyze_command() {
    let dir = tempfile::tempdir().unwrap();
    let ranges = dir.path().join("ranges.json");
    std::fs::write(&ranges, r#"{"ph":[5.5,7.0],"moisture_pct":[60,80],"temperature_c":[21,35]}"#).unwrap();
    let reading = |name: &str, body: &str| {
        let path = dir.path().join(name);
        std::fs::write(&path, body).unwrap();
        path
    };
    let good = reading("good.json", r#"{"moisture_pct":70,"ph":7.0,"temperature_c":25}"#);
    let o = soilsense(&["analyze", "--reading", p(&good), "--ranges", p(&ranges)]);
    assert_eq!((code(&o), stdout(&o)), (0, "SUITABLE\n".to_string()));

    let poor = reading("poor.json", r#"{"moisture_pct":35,"ph":4.8,"temperature_c":25}"#);
    let o = soilsense(&["analyze", "--reading", p(&poor), "--ranges", p(&ranges)]);
    assert_eq!((code(&o), stdout(&o)), (1, "UNSUITABLE\nlow-ph\nlow-moisture\n".to_string()));

    let feed = reading(
        "feed.csv",
        "entry_id,created_at,moisture_pct,ph,temperature_c\n1,2024-01-01T00:00:00Z,70,6,25\n2,2024-01-01T00:01:00Z,70,6,40\n",
    );
    let o = soilsense(&["analyze", "--reading", p(&feed), "--ranges", p(&ranges)]);
    assert_eq!((code(&o), stdout(&o)), (1, "UNSUITABLE\nhigh-temperature\n".to_string()));

    let inverted = dir.path().join("inverted.json");
    std::fs::write(&inverted, r#"{"ph":[7.0,5.5],"moisture_pct":[60,80],"temperature_c":[21,35]}"#).unwrap();
    assert_eq!(code(&soilsense(&["analyze", "--reading", p(&good), "--ranges", p(&inverted)])), 3);
    let broken = reading("broken.json", "{\"ph\": ");
    assert_eq!(code(&soilsense(&["analyze", "--reading", p(&broken), "--ranges", p(&ranges)])), 3);
}

#[test]
fn agreement_command() {
    let o = soilsense(&["report-agreement"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    let spread = |name: &str| {
        out.lines().find(|l| l.starts_with(name)).unwrap().split_whitespace().nth(1).unwrap().to_string()
    };
    assert_eq!(spread("ph"), "0.2");
    assert_eq!(spread("temperature"), "2");
}

struct Served(Child);

impl Drop for Served {
    fn drop(&mut self) {
        let _ = self.0.kill();
        let _ = self.0.wait();
    }
}

fn serve(data_dir: &Path) -> (Served, String) {
    let mut child = Command::new(env!("CARGO_BIN_EXE_soilsense"))
        .args(["serve", "--port", "0", "--data-dir", p(data_dir)])
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stderr.take().unwrap()).read_line(&mut line).unwrap();
    let base = line.trim().strip_prefix("listening on ").expect("listening line").to_string();
    (Served(child), base)
}

fn http_get(url: &str) -> (u16, String) {
    let agent: ureq::Agent = ureq::Agent::config_builder().http_status_as_error(false).build().into();
    let mut r = agent.get(url).call().unwrap();
    (r.status().as_u16(), r.body_mut().read_to_string().unwrap())
}

#[test]
fn serve_channel_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let o = soilsense(&["--format", "csv", "channel-create", "--data-dir", p(dir.path()), "--name", "bed"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    let cells: Vec<String> = out.lines().nth(1).unwrap().split(',').map(String::from).collect();
    let (id, write_key, read_key) = (&cells[0], &cells[1], &cells[2]);

    {
        let (_server, base) = serve(dir.path());
        assert_eq!(http_get(&format!("{base}/update?api_key={write_key}&field1=64.5&field2=6.2")), (200, "1".into()));
        let (status, body) = http_get(&format!("{base}/channels/{id}/feeds.json?api_key={read_key}&results=1"));
        assert_eq!(status, 200);
        let doc: Value = serde_json::from_str(&body).unwrap();
        assert_eq!(doc["feeds"][0]["field1"], 64.5);
        assert_eq!(doc["feeds"][0]["field2"], 6.2);
    }

    let o = soilsense(&["channel-export", "--data-dir", p(dir.path()), "--id", id, "--read-key", read_key]);
    let out = stdout(&o);
    assert!(out.starts_with("entry_id,created_at,moisture_pct,ph,temperature_c\n1,"));
    assert!(out.trim_end().ends_with(",64.5,6.2,"));
}

#[test]
fn serve_on_busy_port_is_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let busy = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let port = busy.local_addr().unwrap().port().to_string();
    let o = soilsense(&["serve", "--port", &port, "--data-dir", p(dir.path())]);
    assert_eq!(code(&o), 3);
}
