//! The `cqsim` command line.
//!
//! Every subcommand is a thin shell over the library. Settings may also come from a TOML
//! (or `.json`) file passed as `--config`: keys are flag names (`p_query` or `p-query`),
//! either at top level or inside a `[generate]`, `[run]`, ... section. Flags on the command
//! line override file values.
//!
//! Exit codes: 0 success, 1 invalid input (bad flag, config value or dataset), 2 runtime
//! failure.

use std::ffi::OsString;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, CommandFactory, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::executor::{self, QueryRegistry, RunConfig, RunReport};
use crate::generator::{self, GenerationConfig, Parallelism};
use crate::geo::{GeoPoint, PRINCES_BRIDGE};
use crate::harness;
use crate::ingest::{self, LoadConfig};
use crate::stats::{self, QueryVolumeConfig};
use crate::store::{self, TemplateStore};
use crate::time;

#[derive(Debug, Parser)]
#[command(name = "cqsim", version, about = "Context-query workload generator and replay engine for smart parking", args_override_self = true)]
pub struct Cli {
    /// Master seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Settings file (TOML, or JSON by extension); flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write seeded synthetic datasets.
    Bootstrap(BootstrapArgs),
    /// Generate a week of templates into a store.
    Generate(GenerateArgs),
    /// Write crowd distributions, availability and the distance-span table as JSON.
    Analyze(AnalyzeArgs),
    /// Export a store as CSV.
    Export(ExportArgs),
    /// Replay a store against an HTTP endpoint.
    Run(RunArgs),
    /// Serve the validation sink until Ctrl-C.
    Sink(SinkArgs),
    /// Compare a sink log with the store.
    Report(ReportArgs),
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct CenterArgs {
    #[arg(long, default_value_t = PRINCES_BRIDGE.lat, allow_negative_numbers = true)]
    pub center_lat: f64,
    #[arg(long, default_value_t = PRINCES_BRIDGE.lng, allow_negative_numbers = true)]
    pub center_lng: f64,
}

impl CenterArgs {
    fn point(&self) -> Result<GeoPoint> {
        GeoPoint::new(self.center_lat, self.center_lng).map_err(|_| {
            Error::domain("center", format!("({}, {}) is not a coordinate", self.center_lat, self.center_lng))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Args)]
#[command(args_override_self = true)]
pub struct BootstrapArgs {
    #[arg(long, default_value = "data")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub places: usize,
    #[arg(long, default_value_t = 40)]
    pub carparks: usize,
    #[arg(long, default_value_t = 200)]
    pub vehicles: usize,
    #[arg(long, default_value_t = 2000.0)]
    pub radius: f64,
    #[command(flatten)]
    pub center: CenterArgs,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct DataArgs {
    /// Directory holding places.json, carparks.csv and vehicles.csv.
    #[arg(long, default_value = "data")]
    pub data: PathBuf,
    #[arg(long)]
    pub places_file: Option<PathBuf>,
    #[arg(long)]
    pub carparks_file: Option<PathBuf>,
    #[arg(long)]
    pub vehicles_file: Option<PathBuf>,
    /// Optional 7x24 traffic-volume matrix (JSON).
    #[arg(long)]
    pub traffic_file: Option<PathBuf>,
    #[command(flatten)]
    pub center: CenterArgs,
}

impl DataArgs {
    fn load(&self) -> Result<ingest::DatasetBundle> {
        let cfg = LoadConfig { center: self.center.point()?, traffic_path: self.traffic_file.clone() };
        let pick = |o: &Option<PathBuf>, name: &str| o.clone().unwrap_or_else(|| self.data.join(name));
        ingest::load_datasets(
            &pick(&self.places_file, ingest::PLACES_FILE),
            &pick(&self.carparks_file, ingest::CARPARKS_FILE),
            &pick(&self.vehicles_file, ingest::VEHICLES_FILE),
            &cfg,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct VolumeArgs {
    /// Crowd multiplier.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Probability that a crowd member queries.
    #[arg(long)]
    pub p_query: Option<f64>,
}

impl VolumeArgs {
    fn apply(&self, v: &mut QueryVolumeConfig) {
        if let Some(a) = self.alpha {
            v.alpha = a;
        }
        if let Some(p) = self.p_query {
            v.p_query = p;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct SpanArgs {
    /// Derive distance means from simulated availability instead of the published table.
    #[arg(long)]
    pub derive_spans: bool,
    /// Keep the printed 0.005 non-dominant share for 01:00-05:00.
    #[arg(long)]
    pub verbatim_row5: bool,
    #[arg(long)]
    pub k_min: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Args)]
#[command(args_override_self = true)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub volume: VolumeArgs,
    #[command(flatten)]
    pub spans: SpanArgs,
    /// Store directory to write.
    #[arg(long, default_value = "store")]
    pub out: PathBuf,
    /// Origin radius around the center, meters.
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub rating_prob: Option<f64>,
    #[arg(long)]
    pub price_prob: Option<f64>,
    #[arg(long)]
    pub duration_prob: Option<f64>,
    #[arg(long)]
    pub vehicle_mod_fraction: Option<f64>,
    #[arg(long)]
    pub per_param_mod_prob: Option<f64>,
    #[arg(long)]
    pub max_height_mod: Option<f64>,
    #[arg(long)]
    pub max_length_mod: Option<f64>,
    #[arg(long)]
    pub max_width_mod: Option<f64>,
    #[arg(long)]
    pub price_mean: Option<f64>,
    #[arg(long)]
    pub price_sd: Option<f64>,
    #[arg(long)]
    pub locality_rate_min: Option<f64>,
    #[arg(long)]
    pub locality_rate_max: Option<f64>,
    /// Rush windows as `start-end` hours, comma separated, e.g. `7-9,16-18`.
    #[arg(long)]
    pub rush: Option<String>,
    #[arg(long)]
    pub random_group_max: Option<usize>,
    #[arg(long)]
    pub query_id: Option<String>,
    /// Worker threads; does not affect output.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Run every stage on the calling thread; does not affect output.
    #[arg(long)]
    pub sequential: bool,
}

fn parse_rush(s: &str) -> Result<Vec<(u8, u8)>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let (a, b) = p
                .trim()
                .split_once('-')
                .ok_or_else(|| Error::domain("rush", format!("`{p}` is not start-end")))?;
            let h = |x: &str| x.trim().parse::<u8>().map_err(|_| Error::domain("rush", format!("`{p}` is not start-end")));
            Ok((h(a)?, h(b)?))
        })
        .collect()
}

impl GenerateArgs {
    pub fn generation_config(&self, seed: Option<u64>) -> Result<GenerationConfig> {
        let mut c = GenerationConfig::default();
        if let Some(s) = seed {
            c.seed = s;
        }
        self.volume.apply(&mut c.volume);
        c.origin_center = Some(self.data.center.point()?);
        let set = |dst: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *dst = v;
            }
        };
        set(&mut c.origin_radius_m, self.radius);
        set(&mut c.cond_probs.rating, self.rating_prob);
        set(&mut c.cond_probs.price, self.price_prob);
        set(&mut c.cond_probs.duration, self.duration_prob);
        set(&mut c.vehicle_mod_fraction, self.vehicle_mod_fraction);
        set(&mut c.per_param_mod_prob, self.per_param_mod_prob);
        set(&mut c.max_mod.height_m, self.max_height_mod);
        set(&mut c.max_mod.length_m, self.max_length_mod);
        set(&mut c.max_mod.width_m, self.max_width_mod);
        set(&mut c.onstreet_price.mean, self.price_mean);
        set(&mut c.onstreet_price.sd, self.price_sd);
        set(&mut c.locality_rate_range.0, self.locality_rate_min);
        set(&mut c.locality_rate_range.1, self.locality_rate_max);
        if let Some(r) = &self.rush {
            c.rush_windows = Some(parse_rush(r)?);
        }
        if let Some(n) = self.random_group_max {
            c.random_group_max = n;
        }
        if let Some(q) = &self.query_id {
            c.query_id = q.clone();
        }
        c.spans.use_published_table = !self.spans.derive_spans;
        c.spans.verbatim_row5 = self.spans.verbatim_row5;
        if let Some(k) = self.spans.k_min {
            c.k_min = k;
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq, Args)]
#[command(args_override_self = true)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub volume: VolumeArgs,
    #[command(flatten)]
    pub spans: SpanArgs,
    /// Directory for crowd.json, availability.json and spans.json.
    #[arg(long, default_value = "analysis")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args)]
#[command(args_override_self = true)]
pub struct ExportArgs {
    #[arg(long, default_value = "store")]
    pub store: PathBuf,
    #[arg(long, default_value = "templates.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args)]
#[command(args_override_self = true)]
pub struct RunArgs {
    #[arg(long, default_value = "store")]
    pub store: PathBuf,
    #[arg(long, default_value = "http://127.0.0.1:8080/query")]
    pub endpoint: String,
    /// Simulated seconds per wall-clock second.
    #[arg(long, default_value_t = 1.0)]
    pub compression: f64,
    #[arg(long, default_value_t = 600)]
    pub window_seconds: u32,
    /// Start as `day:hh:mm[:ss]`, day 0-6 or a name.
    #[arg(long, default_value = "0:00:00")]
    pub start: String,
    /// Simulated duration: seconds, or with an s/m/h/d suffix. Defaults to the rest of the week.
    #[arg(long)]
    pub duration: Option<String>,
    #[arg(long, default_value_t = 64)]
    pub max_in_flight: usize,
    #[arg(long, default_value_t = 10_000)]
    pub timeout_ms: u64,
    /// Registry file (JSON map query_id -> text); defaults to the built-in queries.
    #[arg(long)]
    pub registry: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

pub fn parse_duration(s: &str) -> Result<u32> {
    let s = s.trim();
    let (num, mult) = match s.char_indices().last() {
        Some((i, 's')) => (&s[..i], 1),
        Some((i, 'm')) => (&s[..i], 60),
        Some((i, 'h')) => (&s[..i], 3600),
        Some((i, 'd')) => (&s[..i], 86_400),
        _ => (s, 1),
    };
    num.parse::<u32>()
        .ok()
        .and_then(|n| n.checked_mul(mult))
        .ok_or_else(|| Error::domain("duration", format!("`{s}` is not a duration")))
}

impl RunArgs {
    pub fn run_config(&self) -> Result<RunConfig> {
        let start = time::parse_day_clock(&self.start)?;
        let duration = match &self.duration {
            Some(d) => parse_duration(d)?,
            None => time::SECONDS_PER_WEEK - start,
        };
        let c = RunConfig {
            endpoint: self.endpoint.clone(),
            window_seconds: self.window_seconds,
            compression: self.compression,
            start,
            duration,
            max_in_flight: self.max_in_flight,
            request_timeout_ms: self.timeout_ms,
            ..RunConfig::default()
        };
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq, Args)]
#[command(args_override_self = true)]
pub struct SinkArgs {
    #[arg(long, default_value = "127.0.0.1")]
    pub addr: IpAddr,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "sink.ndjson")]
    pub log: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub response_delay_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Args)]
#[command(args_override_self = true)]
pub struct ReportArgs {
    #[arg(long, default_value = "store")]
    pub store: PathBuf,
    #[arg(long, default_value = "sink.ndjson")]
    pub log: PathBuf,
    /// Report written by `run`; supplies the replay clock.
    #[arg(long, default_value = "run.json")]
    pub run_report: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

// ---- settings file ------------------------------------------------------------------

fn scalar_to_string(key: &str, v: &serde_json::Value) -> Result<Option<String>> {
    use serde_json::Value;
    match v {
        Value::Bool(true) => Ok(Some(String::new())),
        Value::Bool(false) | Value::Null => Ok(None),
        Value::Number(n) => Ok(Some(n.to_string())),
        Value::String(s) => Ok(Some(s.clone())),
        _ => Err(Error::domain(format!("config.{key}"), "expected a scalar value")),
    }
}

fn read_settings(path: &Path) -> Result<serde_json::Map<String, serde_json::Value>> {
    let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
        _ => e.into(),
    })?;
    let value: serde_json::Value = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).map_err(|e| Error::schema(path.display().to_string(), "config", e.to_string()))?
    } else {
        let t: toml::Table = toml::from_str(&text)
            .map_err(|e| Error::schema(path.display().to_string(), "config", e.to_string()))?;
        serde_json::to_value(t)?
    };
    match value {
        serde_json::Value::Object(m) => Ok(m),
        _ => Err(Error::schema(path.display().to_string(), "config", "expected a table")),
    }
}

struct FlagInfo {
    takes_value: bool,
}

fn flags_of(sub: &str) -> Option<std::collections::BTreeMap<String, FlagInfo>> {
    let cmd = Cli::command();
    let sc = cmd.get_subcommands().find(|c| c.get_name() == sub)?;
    Some(
        sc.get_arguments()
            .filter_map(|a| {
                a.get_long().map(|l| (l.to_string(), FlagInfo { takes_value: a.get_action().takes_values() }))
            })
            .collect(),
    )
}

/// Turn settings-file entries into `(global args, subcommand args)`.
fn settings_args(path: &Path, sub: &str) -> Result<(Vec<String>, Vec<String>)> {
    let settings = read_settings(path)?;
    let subcommands: Vec<String> = Cli::command().get_subcommands().map(|c| c.get_name().to_string()).collect();
    let mine = flags_of(sub).unwrap_or_default();
    let mut globals = Vec::new();
    let mut args = Vec::new();
    let mut push = |key: &str, v: &serde_json::Value, strict: bool| -> Result<()> {
        let flag = key.replace('_', "-");
        if flag == "seed" {
            if let Some(s) = scalar_to_string(key, v)? {
                globals.extend(["--seed".to_string(), s]);
            }
            return Ok(());
        }
        match mine.get(&flag) {
            Some(info) => {
                if let Some(s) = scalar_to_string(key, v)? {
                    args.push(format!("--{flag}"));
                    if info.takes_value {
                        args.push(s);
                    } else if !s.is_empty() {
                        return Err(Error::domain(format!("config.{key}"), "expected true or false"));
                    }
                }
                Ok(())
            }
            None if strict => Err(Error::domain(format!("config.{key}"), format!("`{sub}` has no such setting"))),
            None => {
                let known = subcommands.iter().any(|s| flags_of(s).is_some_and(|f| f.contains_key(&flag)));
                if known {
                    Ok(())
                } else {
                    Err(Error::domain(format!("config.{key}"), "unknown setting"))
                }
            }
        }
    };
    for (key, v) in &settings {
        if v.is_object() {
            if !subcommands.contains(key) {
                return Err(Error::domain(format!("config.{key}"), "unknown section"));
            }
            continue;
        }
        push(key, v, false)?;
    }
    if let Some(serde_json::Value::Object(section)) = settings.get(sub) {
        for (key, v) in section {
            push(key, v, true)?;
        }
    }
    Ok((globals, args))
}

/// Insert settings-file arguments so that command-line flags come after (and win).
fn merge_settings(argv: &[OsString], cli: &Cli) -> Result<Option<Vec<OsString>>> {
    let Some(path) = &cli.config else { return Ok(None) };
    let sub = subcommand_name(&cli.command);
    let (globals, sub_args) = settings_args(path, sub)?;
    // position of the subcommand token: skip global options and their values
    let mut i = 1;
    while i < argv.len() {
        let t = argv[i].to_string_lossy();
        if t == "--seed" || t == "--config" {
            i += 2;
        } else if t.starts_with("--seed=") || t.starts_with("--config=") {
            i += 1;
        } else {
            break;
        }
    }
    let mut out: Vec<OsString> = vec![argv[0].clone()];
    out.extend(globals.into_iter().map(OsString::from));
    out.extend(argv[1..=i.min(argv.len() - 1)].iter().cloned());
    out.extend(sub_args.into_iter().map(OsString::from));
    out.extend(argv[(i + 1).min(argv.len())..].iter().cloned());
    Ok(Some(out))
}

fn subcommand_name(c: &Command) -> &'static str {
    match c {
        Command::Bootstrap(_) => "bootstrap",
        Command::Generate(_) => "generate",
        Command::Analyze(_) => "analyze",
        Command::Export(_) => "export",
        Command::Run(_) => "run",
        Command::Sink(_) => "sink",
        Command::Report(_) => "report",
    }
}

/// Parse argv including any settings file. Clap errors pass through untouched.
pub fn parse_args(argv: &[OsString]) -> std::result::Result<Result<Cli>, clap::Error> {
    let cli = Cli::try_parse_from(argv)?;
    match merge_settings(argv, &cli) {
        Ok(None) => Ok(Ok(cli)),
        Ok(Some(merged)) => Cli::try_parse_from(&merged).map(Ok),
        Err(e) => Ok(Err(e)),
    }
}

// ---- commands -----------------------------------------------------------------------

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn cmd_bootstrap(a: &BootstrapArgs, seed: u64) -> Result<()> {
    let b = ingest::bootstrap_fixtures(seed, a.places, a.carparks, a.vehicles, a.center.point()?, a.radius, &a.out)?;
    print_json(&serde_json::json!({
        "out": a.out,
        "seed": seed,
        "places": b.places.len(),
        "carparks": b.carparks.len(),
        "vehicles": b.vehicles.len(),
    }))
}

fn cmd_generate(a: &GenerateArgs, seed: Option<u64>) -> Result<()> {
    let cfg = a.generation_config(seed)?;
    let bundle = a.data.load()?;
    let mode = if a.sequential { Parallelism::Sequential } else { Parallelism::Rayon };
    let workload = match a.threads {
        Some(0) => return Err(Error::domain("threads", "must be >= 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::domain("threads", e.to_string()))?
            .install(|| generator::generate_with(&bundle, &cfg, mode))?,
        None => generator::generate_with(&bundle, &cfg, mode)?,
    };
    let s = store::persist(&workload, &a.out)?;
    print_json(s.manifest())
}

fn cmd_analyze(a: &AnalyzeArgs, seed: u64) -> Result<()> {
    let bundle = a.data.load()?;
    let mut volume = QueryVolumeConfig::default();
    a.volume.apply(&mut volume);
    volume.validate()?;
    let crowd = stats::crowd_distributions(&bundle, &volume)?;
    let availability = stats::availability_profile(&bundle.carparks);
    let span_cfg = stats::SpanConfig {
        use_published_table: !a.spans.derive_spans,
        verbatim_row5: a.spans.verbatim_row5,
        ..Default::default()
    };
    let spans = stats::derive_distance_spans(&bundle, seed, a.spans.k_min.unwrap_or(2), &span_cfg)?;
    std::fs::create_dir_all(&a.out)?;
    write_json(&a.out.join("crowd.json"), &crowd)?;
    write_json(&a.out.join("availability.json"), &availability)?;
    write_json(&a.out.join("spans.json"), &spans)?;
    print_json(&serde_json::json!({
        "out": a.out,
        "total_queries": crowd.total(),
        "by_day": crowd.by_day,
        "spans": spans.spans.iter().map(|s| serde_json::json!({
            "span": s.label(),
            "expected_distance_m": s.expected_distance(),
        })).collect::<Vec<_>>(),
    }))
}

fn cmd_export(a: &ExportArgs) -> Result<()> {
    let s = TemplateStore::open(&a.store)?;
    let n = s.export_csv(&a.out)?;
    print_json(&serde_json::json!({ "out": a.out, "rows": n }))
}

fn cmd_run(a: &RunArgs) -> Result<()> {
    let cfg = a.run_config()?;
    let s = TemplateStore::open(&a.store)?;
    let registry = match &a.registry {
        Some(p) => QueryRegistry::load(p)?,
        None => QueryRegistry::builtin(),
    };
    registry.check_store(&s)?;
    let report = executor::run_blocking(&s, &registry, &cfg)?;
    if let Some(p) = &a.report {
        write_json(p, &report)?;
    }
    print_json(&serde_json::json!({
        "complete": report.complete,
        "clock": report.clock,
        "summary": report.summary,
    }))
}

fn cmd_sink(a: &SinkArgs) -> Result<()> {
    let n = harness::serve_sink(SocketAddr::new(a.addr, a.port), &a.log, Duration::from_millis(a.response_delay_ms))?;
    eprintln!("sink stopped after {n} requests");
    Ok(())
}

fn cmd_report(a: &ReportArgs) -> Result<()> {
    let s = TemplateStore::open(&a.store)?;
    let log = harness::read_log(&a.log)?;
    let text = std::fs::read_to_string(&a.run_report).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingFile(a.run_report.clone()),
        _ => e.into(),
    })?;
    let run: RunReport = serde_json::from_str(&text)
        .map_err(|e| Error::schema(a.run_report.display().to_string(), "run report", e.to_string()))?;
    let report = harness::fidelity_report(&s, &log, &run.clock);
    match &a.out {
        Some(p) => {
            write_json(p, &report)?;
            print_json(&serde_json::json!({
                "out": p,
                "scheduled": report.scheduled,
                "observed": report.observed,
                "missing": report.missing_ids.len(),
                "duplicates": report.duplicate_ids.len(),
                "within_epsilon_fraction": report.within_epsilon_fraction,
                "per_hour_exact": report.per_hour_exact,
            }))
        }
        None => print_json(&report),
    }
}

pub fn execute(cli: &Cli) -> Result<()> {
    let seed = cli.seed;
    match &cli.command {
        Command::Bootstrap(a) => cmd_bootstrap(a, seed.unwrap_or(1)),
        Command::Generate(a) => cmd_generate(a, seed),
        Command::Analyze(a) => cmd_analyze(a, seed.unwrap_or(1)),
        Command::Export(a) => cmd_export(a),
        Command::Run(a) => cmd_run(a),
        Command::Sink(a) => cmd_sink(a),
        Command::Report(a) => cmd_report(a),
    }
}

pub fn exit_code(e: &Error) -> u8 {
    if e.is_validation() {
        1
    } else {
        2
    }
}

/// Entry point for the binary: parse, run, map the outcome to an exit code.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match parse_args(&argv) {
        Ok(Ok(cli)) => cli,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
