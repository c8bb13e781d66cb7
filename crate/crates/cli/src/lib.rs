//! `soilsense` command-line front end.
//!
//! Exit codes: 0 success or suitable, 1 unsuitable, 2 usage error, 3 data or
//! validation error, 4 numeric failure.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use soilsense::ann::{self, AnnError, Network, StopReason, SynthesisConfig, TrainingConfig};
use soilsense::format::{compact, significant};
use soilsense::measurement::{self, MeasurementError, Parameter};
use soilsense::salinity::ModelError;
use soilsense::suitability::{self, RangesError};
use soilsense::{analyze, fixtures, ModelBank, PointSelection, ProbeGeometry, ResistivitySample, SoilReading};
use soilsense_telemetry::{FieldMap, Store, TelemetryError};
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_UNSUITABLE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
            CliError::Numeric(_) => EXIT_NUMERIC,
        }
    }
}

macro_rules! data_error {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Data(e.to_string())
            }
        }
    )*};
}
data_error!(MeasurementError, ModelError, RangesError, TelemetryError, io::Error, serde_json::Error);

impl From<AnnError> for CliError {
    fn from(e: AnnError) -> Self {
        match e {
            AnnError::Numeric(_) | AnnError::UndefinedCorrelation => CliError::Numeric(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

type CmdResult = Result<i32, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    /// Aligned text, 6 significant digits.
    Human,
    /// CSV with a header row and full-precision numbers.
    Csv,
}

#[derive(Parser)]
#[command(name = "soilsense", version, about = "Soil resistivity, salinity and suitability tools")]
struct Cli {
    #[arg(long, value_enum, global = true, default_value_t = OutputFormat::Human)]
    format: OutputFormat,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Resistivity (kΩ·m) from a probe resistance reading.
    Resistivity(ResistivityArgs),
    /// Fit exponential resistivity/salinity models per moisture level.
    Fit(FitArgs),
    /// Estimate salinity from resistivity with a saved model bank.
    Invert(InvertArgs),
    /// Train the salinity network.
    Train(TrainArgs),
    /// Run a trained network on one input.
    Predict(PredictArgs),
    /// Check a soil reading against optimum ranges.
    Analyze(AnalyzeArgs),
    /// Run the telemetry HTTP service.
    Serve(ServeArgs),
    /// Per-parameter spread between field meter, laboratory and probe.
    ReportAgreement(AgreementArgs),
    /// Create a telemetry channel in a data directory.
    ChannelCreate(ChannelCreateArgs),
    /// Print a channel's feed as CSV.
    ChannelExport(ChannelExportArgs),
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct ResistivityArgs {
    /// Measured resistance, kΩ.
    #[arg(long)]
    resistance: f64,
    /// Electrode spacing, m.
    #[arg(long)]
    spacing: f64,
    /// Cross-section area, m².
    #[arg(long, required_unless_present = "radius", conflicts_with = "radius")]
    area: Option<f64>,
    /// Container radius, m; the area is πr².
    #[arg(long)]
    radius: Option<f64>,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct FitArgs {
    /// Calibration CSV; defaults to the bundled table.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Moisture level to fit; repeat for several. Defaults to every level.
    #[arg(long)]
    moisture: Vec<f64>,
    /// Write the model bank here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Keep points past the first resistivity reversal.
    #[arg(long)]
    keep_all: bool,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct InvertArgs {
    #[arg(long)]
    bank: PathBuf,
    #[arg(long)]
    moisture: f64,
    /// kΩ·m
    #[arg(long)]
    resistivity: f64,
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["data", "synthesize"]))]
struct TrainArgs {
    /// Dataset CSV: moisture_pct,ph,temperature_c,resistivity_kohm_m,salinity_pct.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Build the dataset from calibration rows instead.
    #[arg(long)]
    synthesize: bool,
    /// Calibration CSV for --synthesize; defaults to the bundled table.
    #[arg(long, requires = "synthesize")]
    calibration: Option<PathBuf>,
    /// Seeds synthesis, the split and the initial weights.
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    hidden: usize,
    #[arg(long)]
    max_epochs: Option<usize>,
    #[arg(long)]
    patience: Option<usize>,
    /// Scale resistivity linearly instead of on a log axis.
    #[arg(long)]
    linear_resistivity: bool,
    #[arg(long, default_value = "network.json")]
    out: PathBuf,
    /// Per-epoch MSE history.
    #[arg(long, default_value = "train_report.csv")]
    report: PathBuf,
    /// Also write the dataset that was trained on.
    #[arg(long)]
    save_dataset: Option<PathBuf>,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    /// moisture %, pH, temperature °C, resistivity kΩ·m
    #[arg(long, value_name = "M,PH,T,RHO", allow_hyphen_values = true)]
    input: String,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// JSON reading, or a feed CSV export (its latest complete row is used).
    #[arg(long)]
    reading: PathBuf,
    #[arg(long)]
    ranges: PathBuf,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: std::net::IpAddr,
    #[arg(long)]
    data_dir: PathBuf,
}

#[derive(Args)]
struct AgreementArgs {
    /// Agreement CSV; defaults to the bundled comparison data.
    #[arg(long)]
    data: Option<PathBuf>,
}

#[derive(Args)]
struct ChannelCreateArgs {
    #[arg(long)]
    data_dir: PathBuf,
    #[arg(long)]
    name: String,
    /// SLOT=LABEL, e.g. field1=moisture_pct. Defaults to moisture, pH and temperature in slots 1-3.
    #[arg(long = "field", value_name = "SLOT=LABEL")]
    fields: Vec<String>,
    /// Allow reads without a key.
    #[arg(long)]
    public: bool,
}

#[derive(Args)]
struct ChannelExportArgs {
    #[arg(long)]
    data_dir: PathBuf,
    #[arg(long)]
    id: u64,
    #[arg(long)]
    read_key: Option<String>,
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let fmt = cli.format;
    let result = match cli.command {
        Command::Resistivity(a) => cmd_resistivity(a, fmt),
        Command::Fit(a) => cmd_fit(a, fmt),
        Command::Invert(a) => cmd_invert(a, fmt),
        Command::Train(a) => cmd_train(a, fmt),
        Command::Predict(a) => cmd_predict(a, fmt),
        Command::Analyze(a) => cmd_analyze(a, fmt),
        Command::Serve(a) => cmd_serve(a),
        Command::ReportAgreement(a) => cmd_report_agreement(a, fmt),
        Command::ChannelCreate(a) => cmd_channel_create(a, fmt),
        Command::ChannelExport(a) => cmd_channel_export(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn open(path: &Path) -> Result<File, CliError> {
    File::open(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn load_calibration(path: Option<&Path>) -> Result<Vec<ResistivitySample>, CliError> {
    let rows = match path {
        Some(p) => measurement::load_calibration(open(p)?)?,
        None => fixtures::calibration(),
    };
    if rows.is_empty() {
        return Err(CliError::Data("calibration data has no rows".into()));
    }
    Ok(rows)
}

fn cmd_resistivity(a: ResistivityArgs, fmt: OutputFormat) -> CmdResult {
    let rho = match (a.area, a.radius) {
        (Some(area), _) => soilsense::resistivity(a.resistance, area, a.spacing)?,
        (None, Some(radius)) => ProbeGeometry::new(a.spacing, radius)?.resistivity(a.resistance)?,
        (None, None) => return Err(CliError::Usage("give --area or --radius".into())),
    };
    match fmt {
        OutputFormat::Human => println!("{}", significant(rho, 6)),
        OutputFormat::Csv => println!("resistivity_kohm_m\n{rho}"),
    }
    Ok(EXIT_OK)
}

fn cmd_fit(a: FitArgs, fmt: OutputFormat) -> CmdResult {
    let samples = load_calibration(a.data.as_deref())?;
    let selection = if a.keep_all { PointSelection::All } else { PointSelection::TruncateAtReversal };
    let levels = (!a.moisture.is_empty()).then_some(a.moisture.as_slice());
    let bank = ModelBank::fit(&samples, levels, selection)?;
    match fmt {
        OutputFormat::Human => {
            println!("{:>8} {:>12} {:>12} {:>10} {:>3}", "moisture", "A", "B", "R2", "n");
            for m in bank.models() {
                let r2 = m.r_squared.map_or("-".into(), |r| significant(r, 6));
                let mark = if m.is_low_confidence() { "  low-confidence" } else { "" };
                println!(
                    "{:>8} {:>12} {:>12} {:>10} {:>3}{mark}",
                    compact(m.moisture_pct, 6),
                    significant(m.amplitude, 6),
                    significant(m.decay, 6),
                    r2,
                    m.n_points
                );
            }
        }
        OutputFormat::Csv => {
            println!("moisture_pct,amplitude,decay,r_squared,n_points,low_confidence");
            for m in bank.models() {
                let r2 = m.r_squared.map_or(String::new(), |r| r.to_string());
                println!("{},{},{},{r2},{},{}", m.moisture_pct, m.amplitude, m.decay, m.n_points, m.is_low_confidence());
            }
        }
    }
    if let Some(out) = &a.out {
        bank.save(out)?;
        eprintln!("wrote {}", out.display());
    }
    Ok(EXIT_OK)
}

fn cmd_invert(a: InvertArgs, fmt: OutputFormat) -> CmdResult {
    let bank = ModelBank::load(&a.bank).map_err(|e| CliError::Data(format!("{}: {e}", a.bank.display())))?;
    let model = bank.select(a.moisture)?;
    if model.moisture_pct != a.moisture {
        eprintln!("note: using the model calibrated at {}% moisture", model.moisture_pct);
    }
    if model.is_low_confidence() {
        eprintln!("warning: the {}% model has a low R²; treat the estimate as rough", model.moisture_pct);
    }
    let inv = model.invert_salinity(a.resistivity)?;
    if inv.out_of_calibration {
        eprintln!("warning: implied salinity {:.2}% lies beyond the calibrated 0-100% range", inv.salinity_pct);
    }
    match fmt {
        OutputFormat::Human => println!("{}", significant(inv.salinity_pct, 4)),
        OutputFormat::Csv => println!(
            "salinity_pct,model_moisture_pct,out_of_calibration\n{},{},{}",
            inv.salinity_pct, model.moisture_pct, inv.out_of_calibration
        ),
    }
    Ok(EXIT_OK)
}

fn cmd_train(a: TrainArgs, fmt: OutputFormat) -> CmdResult {
    let dataset = if let Some(path) = &a.data {
        ann::data::load_dataset(open(path)?)?
    } else {
        let cal = load_calibration(a.calibration.as_deref())?;
        ann::synthesize_training_set(&cal, &SynthesisConfig { seed: a.seed, ..Default::default() })?
    };
    if let Some(path) = &a.save_dataset {
        fs::write(path, ann::data::dataset_to_csv(&dataset))?;
    }
    let defaults = TrainingConfig::default();
    let config = TrainingConfig {
        hidden_units: a.hidden,
        seed: a.seed,
        max_epochs: a.max_epochs.unwrap_or(defaults.max_epochs),
        patience: a.patience.unwrap_or(defaults.patience),
        log_resistivity: !a.linear_resistivity,
        ..defaults
    };
    let (net, report) = ann::train(&config, &dataset)?;
    net.save(&a.out)?;
    fs::write(&a.report, report.to_csv())?;

    let (tr, _, te) = report.split.select(&dataset);
    let r2 = |part: &[ann::Sample]| match ann::evaluate(&net, part) {
        Ok(e) => Some(e.r_squared),
        Err(_) => None,
    };
    let (train_r2, test_r2) = (r2(&tr), r2(&te));
    match fmt {
        OutputFormat::Human => {
            let show = |v: Option<f64>| v.map_or("undefined".to_string(), |v| significant(v, 6));
            println!("samples          {}", dataset.len());
            println!("epochs           {} ({})", report.epochs(), report.stop_reason);
            println!("best_epoch       {}", report.best_epoch);
            println!("best_val_mse     {}", significant(report.best_val_mse, 6));
            println!("train_r_squared  {}", show(train_r2));
            println!("test_r_squared   {}", show(test_r2));
        }
        OutputFormat::Csv => {
            let show = |v: Option<f64>| v.map_or(String::new(), |v| v.to_string());
            println!("samples,epochs,stop_reason,best_epoch,best_val_mse,train_r_squared,test_r_squared");
            println!(
                "{},{},{},{},{},{},{}",
                dataset.len(),
                report.epochs(),
                report.stop_reason,
                report.best_epoch,
                report.best_val_mse,
                show(train_r2),
                show(test_r2)
            );
        }
    }
    if report.stop_reason == StopReason::MuOverflow {
        return Err(CliError::Numeric(format!(
            "damping exceeded {:e} without a training step; best network and report written",
            config.mu_max
        )));
    }
    Ok(EXIT_OK)
}

fn parse_input(raw: &str) -> Result<[f64; 4], CliError> {
    let parts: Vec<&str> = raw.split(',').map(str::trim).collect();
    let values: [&str; 4] = parts
        .try_into()
        .map_err(|p: Vec<&str>| CliError::Usage(format!("--input needs 4 comma-separated values, got {}", p.len())))?;
    let mut out = [0.0; 4];
    for (slot, v) in out.iter_mut().zip(values) {
        *slot = v.parse().map_err(|_| CliError::Usage(format!("--input: {v:?} is not a number")))?;
    }
    Ok(out)
}

fn cmd_predict(a: PredictArgs, fmt: OutputFormat) -> CmdResult {
    let input = parse_input(&a.input)?;
    let net = Network::load(&a.model).map_err(|e| CliError::Data(format!("{}: {e}", a.model.display())))?;
    let scaled = net.normalizer.apply_inputs(&input);
    let names = ["moisture", "pH", "temperature", "resistivity"];
    for (name, z) in names.iter().zip(scaled) {
        if !(-1.0 - 1e-9..=1.0 + 1e-9).contains(&z) {
            eprintln!("warning: {name} lies outside the training range; the estimate is an extrapolation");
        }
    }
    let salinity = net.forward(&input)?;
    match fmt {
        OutputFormat::Human => println!("{}", significant(salinity, 6)),
        OutputFormat::Csv => println!("salinity_pct\n{salinity}"),
    }
    Ok(EXIT_OK)
}

fn load_reading(path: &Path) -> Result<SoilReading, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    if text.trim_start().starts_with('{') {
        let r: SoilReading = serde_json::from_str(&text)?;
        r.validate()?;
        Ok(r)
    } else {
        measurement::readings_from_feed_csv(text.as_bytes())?
            .pop()
            .ok_or_else(|| CliError::Data(format!("{}: no complete reading", path.display())))
    }
}

fn cmd_analyze(a: AnalyzeArgs, fmt: OutputFormat) -> CmdResult {
    let reading = load_reading(&a.reading)?;
    let ranges =
        suitability::load_ranges(&a.ranges).map_err(|e| CliError::Data(format!("{}: {e}", a.ranges.display())))?;
    let decision = analyze(&reading, &ranges);
    let tags: Vec<&str> = decision.problems.iter().map(|p| p.tag()).collect();
    match fmt {
        OutputFormat::Human => {
            println!("{}", if decision.suitable { "SUITABLE" } else { "UNSUITABLE" });
            for t in &tags {
                println!("{t}");
            }
        }
        OutputFormat::Csv => println!("suitable,problems\n{},{}", decision.suitable, tags.join(";")),
    }
    Ok(if decision.suitable { EXIT_OK } else { EXIT_UNSUITABLE })
}

fn cmd_serve(a: ServeArgs) -> CmdResult {
    let store = Arc::new(Store::open(&a.data_dir)?);
    let addr = SocketAddr::new(a.host, a.port);
    let listener =
        std::net::TcpListener::bind(addr).map_err(|e| CliError::Data(format!("cannot listen on {addr}: {e}")))?;
    listener.set_nonblocking(true)?;
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::from_std(listener)?;
        eprintln!("listening on http://{}", listener.local_addr()?);
        soilsense_telemetry::http::serve(listener, store, async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
    })?;
    Ok(EXIT_OK)
}

fn cmd_report_agreement(a: AgreementArgs, fmt: OutputFormat) -> CmdResult {
    let rows = match &a.data {
        Some(p) => measurement::load_agreement(open(p)?)?,
        None => fixtures::agreement(),
    };
    let report = measurement::method_agreement(&rows)?;
    let has_intervals = |p: Parameter| report.rows.iter().any(|r| r.parameter == p && r.within_field_interval.is_some());
    match fmt {
        OutputFormat::Human => {
            println!("{:<12} {:>10}  field interval", "parameter", "max_spread");
            for (&p, &max) in &report.max_spread {
                let inside = match (has_intervals(p), report.all_within_intervals(p)) {
                    (false, _) => "-",
                    (true, true) => "lab and probe inside",
                    (true, false) => "outside",
                };
                println!("{:<12} {:>10}  {inside}", p.to_string(), compact(max, 6));
            }
        }
        OutputFormat::Csv => {
            println!("parameter,max_spread,within_field_interval");
            for (&p, &max) in &report.max_spread {
                let inside = if has_intervals(p) { report.all_within_intervals(p).to_string() } else { String::new() };
                println!("{p},{max},{inside}");
            }
        }
    }
    Ok(EXIT_OK)
}

fn cmd_channel_create(a: ChannelCreateArgs, fmt: OutputFormat) -> CmdResult {
    let fields: FieldMap = if a.fields.is_empty() {
        [("field1", "moisture_pct"), ("field2", "ph"), ("field3", "temperature_c")]
            .into_iter()
            .map(|(s, l)| (s.to_string(), l.to_string()))
            .collect()
    } else {
        a.fields
            .iter()
            .map(|f| {
                f.split_once('=')
                    .map(|(s, l)| (s.trim().to_string(), l.trim().to_string()))
                    .ok_or_else(|| CliError::Usage(format!("--field {f:?} is not SLOT=LABEL")))
            })
            .collect::<Result<_, _>>()?
    };
    let store = Store::open(&a.data_dir)?;
    let c = store.create_channel(&a.name, fields, a.public)?;
    let mut out = io::stdout().lock();
    match fmt {
        OutputFormat::Human => {
            writeln!(out, "id         {}", c.id)?;
            writeln!(out, "write_key  {}", c.write_key)?;
            writeln!(out, "read_key   {}", c.read_key)?;
        }
        OutputFormat::Csv => writeln!(out, "id,write_key,read_key\n{},{},{}", c.id, c.write_key, c.read_key)?,
    }
    Ok(EXIT_OK)
}

fn cmd_channel_export(a: ChannelExportArgs) -> CmdResult {
    let store = Store::open(&a.data_dir)?;
    print!("{}", store.export_feed_csv(a.id, a.read_key.as_deref())?);
    Ok(EXIT_OK)
}
