//! Replays a template store against an HTTP endpoint under time compression.
//!
//! One scheduling loop owns the simulated clock. Every `window_seconds` of simulated time it
//! fetches the next window from the store and arms a one-shot trigger per record. Fired
//! triggers are published on a [`TriggerBus`]; the dispatcher subscribes, renders the query
//! and POSTs it under a `max_in_flight` bound. Dispatch outcomes flow to a single collector,
//! which owns the [`DispatchRecord`] list.
//!
//! Simulated instants map to wall time linearly:
//! `wall = wall_origin + (sim - start) / compression`.

pub mod registry;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use tokio::sync::{mpsc, Semaphore};
use tokio::task::JoinSet;
use tokio::time::Instant;
use tokio_util::sync::CancellationToken;

pub use registry::{render, QueryRegistry};

use crate::error::{Error, Result};
use crate::generator::TemplateRecord;
use crate::store::TemplateStore;
use crate::time::SECONDS_PER_WEEK;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub endpoint: String,
    /// Fetch window `m`, simulated seconds.
    pub window_seconds: u32,
    /// Simulated seconds per wall-clock second.
    pub compression: f64,
    /// Week instant the replay starts at.
    pub start: u32,
    /// Simulated seconds to replay.
    pub duration: u32,
    pub max_in_flight: usize,
    pub request_timeout_ms: u64,
    /// Wall-clock head start for each window fetch, capped at half a window.
    pub fetch_lead_ms: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            endpoint: "http://127.0.0.1:8080/query".into(),
            window_seconds: 600,
            compression: 1.0,
            start: 0,
            duration: SECONDS_PER_WEEK,
            max_in_flight: 64,
            request_timeout_ms: 10_000,
            fetch_lead_ms: 50,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window_seconds == 0 {
            return Err(Error::domain("window_seconds", "must be > 0"));
        }
        if !(self.compression >= 1.0 && self.compression.is_finite()) {
            return Err(Error::domain("compression", format!("{} must be >= 1", self.compression)));
        }
        if self.start >= SECONDS_PER_WEEK {
            return Err(Error::domain("start", "must fall inside the week"));
        }
        if self.duration == 0 {
            return Err(Error::domain("duration", "must be > 0"));
        }
        if u64::from(self.start) + u64::from(self.duration) > u64::from(SECONDS_PER_WEEK) {
            return Err(Error::domain("duration", "start + duration runs past the end of the week"));
        }
        if self.max_in_flight == 0 {
            return Err(Error::domain("max_in_flight", "must be >= 1"));
        }
        if self.request_timeout_ms == 0 {
            return Err(Error::domain("request_timeout_ms", "must be > 0"));
        }
        let ok = reqwest::Url::parse(&self.endpoint)
            .map(|u| matches!(u.scheme(), "http" | "https") && u.host().is_some())
            .unwrap_or(false);
        if !ok {
            return Err(Error::domain("endpoint", format!("`{}` is not an http(s) URL", self.endpoint)));
        }
        Ok(())
    }

    /// Allowed simulated-time dispatch error: one second up to 60x, proportional above.
    pub fn epsilon(&self) -> f64 {
        (self.compression / 60.0).max(1.0)
    }

    pub fn end(&self) -> u32 {
        self.start + self.duration
    }
}

/// Ties simulated time to wall-clock time for one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplayClock {
    /// Unix time in ns that corresponds to simulated instant `start`.
    pub wall_origin_unix_ns: u64,
    pub start: u32,
    pub duration: u32,
    pub compression: f64,
    pub epsilon: f64,
}

impl ReplayClock {
    pub fn sim_at_unix_ns(&self, unix_ns: u64) -> f64 {
        let dt = (unix_ns as f64 - self.wall_origin_unix_ns as f64) / 1e9;
        f64::from(self.start) + dt * self.compression
    }

    pub fn end(&self) -> u32 {
        self.start + self.duration
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DispatchStatus {
    Success { code: u16 },
    HttpError { code: u16 },
    Timeout,
    TransportError { message: String },
    RenderError { message: String },
    /// The run was cancelled before the trigger fired.
    Cancelled,
}

impl DispatchStatus {
    pub fn is_success(&self) -> bool {
        matches!(self, DispatchStatus::Success { .. })
    }

    /// True when a request left the executor.
    pub fn was_sent(&self) -> bool {
        !matches!(self, DispatchStatus::RenderError { .. } | DispatchStatus::Cancelled)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispatchRecord {
    pub template_id: u64,
    /// Scheduled week instant.
    pub scheduled_at: u32,
    /// Wall-clock dispatch instant, ns since the run's wall origin.
    pub dispatch_wall_ns: u64,
    /// Dispatch instant mapped back to simulated time.
    pub dispatch_sim: f64,
    /// Simulated instant the trigger fired; dispatch follows once a request slot is free.
    pub fired_sim: f64,
    pub status: DispatchStatus,
    pub latency_ms: f64,
    /// Already due when its window was fetched.
    pub late: bool,
}

impl DispatchRecord {
    pub fn sim_error(&self) -> f64 {
        self.dispatch_sim - f64::from(self.scheduled_at)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub windows_fetched: u64,
    pub fetched: u64,
    pub dispatched: u64,
    pub succeeded: u64,
    pub failed: u64,
    pub cancelled: u64,
    pub late: u64,
    pub within_epsilon: u64,
    pub within_epsilon_fraction: f64,
    pub max_abs_sim_error: f64,
    pub max_in_flight_observed: usize,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub clock: ReplayClock,
    /// False when the run was cancelled before every window was replayed.
    pub complete: bool,
    pub summary: RunSummary,
    pub records: Vec<DispatchRecord>,
}

/// A trigger that has fired.
#[derive(Debug, Clone)]
pub struct Firing {
    pub record: Arc<TemplateRecord>,
    pub late: bool,
    pub fired_at: Instant,
}

/// Minimal publish-subscribe fan-out for trigger firings.
#[derive(Debug, Default, Clone)]
pub struct TriggerBus {
    subscribers: Vec<mpsc::UnboundedSender<Firing>>,
}

impl TriggerBus {
    pub fn subscribe(&mut self) -> mpsc::UnboundedReceiver<Firing> {
        let (tx, rx) = mpsc::unbounded_channel();
        self.subscribers.push(tx);
        rx
    }

    pub fn publish(&self, firing: Firing) {
        for s in &self.subscribers {
            let _ = s.send(firing.clone());
        }
    }
}

fn unix_ns_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_nanos() as u64).unwrap_or(0)
}

#[derive(Serialize)]
struct Envelope<'a> {
    query: &'a str,
    template_id: u64,
    scheduled_at: u32,
}

struct Timing {
    origin: Instant,
    start: u32,
    compression: f64,
}

impl Timing {
    fn wall_at(&self, sim: u32) -> Instant {
        let secs = f64::from(sim.saturating_sub(self.start)) / self.compression;
        self.origin + Duration::from_secs_f64(secs)
    }

    fn elapsed_ns(&self, at: Instant) -> u64 {
        at.saturating_duration_since(self.origin).as_nanos() as u64
    }

    fn sim_of(&self, at: Instant) -> f64 {
        f64::from(self.start) + at.saturating_duration_since(self.origin).as_secs_f64() * self.compression
    }
}

/// Replay `[start, start + duration)` of `store` against `config.endpoint`.
///
/// Transport and HTTP failures are recorded per template and never abort the run.
/// Cancelling `cancel` stops scheduling; armed triggers are recorded as cancelled and the
/// report is marked incomplete.
pub async fn run(
    store: &TemplateStore,
    registry: &QueryRegistry,
    config: &RunConfig,
    cancel: CancellationToken,
) -> Result<RunReport> {
    config.validate()?;
    let window_records = store.fetch_range(config.start, config.end());
    let used: std::collections::BTreeSet<&str> = window_records.iter().map(|r| r.query_id.as_str()).collect();
    let missing: Vec<String> = used.into_iter().filter(|q| !registry.contains(q)).map(String::from).collect();
    if !missing.is_empty() {
        return Err(Error::StoreRegistryMismatch(missing));
    }

    let client = reqwest::Client::builder()
        .timeout(Duration::from_millis(config.request_timeout_ms))
        .pool_max_idle_per_host(config.max_in_flight)
        .build()
        .map_err(|e| Error::Http(e.to_string()))?;
    let endpoint = reqwest::Url::parse(&config.endpoint).map_err(|e| Error::domain("endpoint", e.to_string()))?;
    let registry = Arc::new(registry.clone());

    // head start so the first window is armed before it is due
    let lead = Duration::from_millis(config.fetch_lead_ms)
        .min(Duration::from_secs_f64(f64::from(config.window_seconds) / config.compression / 2.0));
    let origin = Instant::now() + lead;
    let origin_unix_ns = unix_ns_now() + lead.as_nanos() as u64;
    let timing = Arc::new(Timing { origin, start: config.start, compression: config.compression });

    let (done_tx, mut done_rx) = mpsc::unbounded_channel::<DispatchRecord>();
    let collector = tokio::spawn(async move {
        let mut out = Vec::new();
        while let Some(r) = done_rx.recv().await {
            out.push(r);
        }
        out
    });

    let mut bus = TriggerBus::default();
    let mut firings = bus.subscribe();
    let in_flight = Arc::new(AtomicUsize::new(0));
    let peak = Arc::new(AtomicUsize::new(0));

    let dispatcher = {
        let sem = Arc::new(Semaphore::new(config.max_in_flight));
        let done_tx = done_tx.clone();
        let timing = timing.clone();
        let (in_flight, peak) = (in_flight.clone(), peak.clone());
        tokio::spawn(async move {
            let mut requests = JoinSet::new();
            while let Some(f) = firings.recv().await {
                let permit = sem.clone().acquire_owned().await.expect("semaphore open");
                let record = f.record;
                let rendered = registry.render(&record);
                let sent_at = Instant::now();
                let base = DispatchRecord {
                    template_id: record.id,
                    scheduled_at: record.instant(),
                    dispatch_wall_ns: timing.elapsed_ns(sent_at),
                    dispatch_sim: timing.sim_of(sent_at),
                    fired_sim: timing.sim_of(f.fired_at),
                    status: DispatchStatus::Cancelled,
                    latency_ms: 0.0,
                    late: f.late,
                };
                let query = match rendered {
                    Ok(q) => q,
                    Err(e) => {
                        let _ = done_tx.send(DispatchRecord {
                            status: DispatchStatus::RenderError { message: e.to_string() },
                            ..base
                        });
                        continue;
                    }
                };
                let body = serde_json::to_vec(&Envelope {
                    query: &query,
                    template_id: record.id,
                    scheduled_at: base.scheduled_at,
                })
                .expect("envelope serializes");
                let request = client
                    .post(endpoint.clone())
                    .header(reqwest::header::CONTENT_TYPE, "application/json")
                    .body(body);
                let now = in_flight.fetch_add(1, Ordering::SeqCst) + 1;
                peak.fetch_max(now, Ordering::SeqCst);
                let (done_tx, in_flight) = (done_tx.clone(), in_flight.clone());
                requests.spawn(async move {
                    let status = match request.send().await {
                        Ok(resp) if resp.status().is_success() => DispatchStatus::Success { code: resp.status().as_u16() },
                        Ok(resp) => DispatchStatus::HttpError { code: resp.status().as_u16() },
                        Err(e) if e.is_timeout() => DispatchStatus::Timeout,
                        Err(e) => DispatchStatus::TransportError { message: e.to_string() },
                    };
                    in_flight.fetch_sub(1, Ordering::SeqCst);
                    drop(permit);
                    let _ = done_tx.send(DispatchRecord {
                        status,
                        latency_ms: sent_at.elapsed().as_secs_f64() * 1e3,
                        ..base
                    });
                });
            }
            while requests.join_next().await.is_some() {}
        })
    };

    // scheduling loop
    let mut triggers = JoinSet::new();
    let mut windows = 0u64;
    let mut fetched = 0u64;
    let mut complete = true;
    let mut window_start = config.start;
    let end = config.end();
    while window_start < end {
        let fetch_at = timing.wall_at(window_start).checked_sub(lead).unwrap_or(timing.origin);
        tokio::select! {
            _ = cancel.cancelled() => { complete = false; break; }
            _ = tokio::time::sleep_until(fetch_at) => {}
        }
        let window_end = window_start.saturating_add(config.window_seconds).min(end);
        let batch = store.fetch_range(window_start, window_end);
        windows += 1;
        fetched += batch.len() as u64;
        let now = Instant::now();
        for r in batch {
            let due = timing.wall_at(r.instant());
            let late = due <= now;
            let record = Arc::new(r.clone());
            let (bus, cancel, done_tx, timing) = (bus.clone(), cancel.clone(), done_tx.clone(), timing.clone());
            triggers.spawn(async move {
                if !late {
                    tokio::select! {
                        _ = cancel.cancelled() => {
                            let at = Instant::now();
                            let _ = done_tx.send(DispatchRecord {
                                template_id: record.id,
                                scheduled_at: record.instant(),
                                dispatch_wall_ns: timing.elapsed_ns(at),
                                dispatch_sim: timing.sim_of(at),
                                fired_sim: timing.sim_of(at),
                                status: DispatchStatus::Cancelled,
                                latency_ms: 0.0,
                                late: false,
                            });
                            return;
                        }
                        _ = tokio::time::sleep_until(due) => {}
                    }
                }
                bus.publish(Firing { record, late, fired_at: Instant::now() });
            });
        }
        window_start = window_end;
    }
    while triggers.join_next().await.is_some() {}
    if cancel.is_cancelled() {
        complete = false;
    }
    drop(bus);
    dispatcher.await.map_err(|e| Error::Http(format!("dispatcher task failed: {e}")))?;
    drop(done_tx);
    let mut records = collector.await.map_err(|e| Error::Http(format!("collector task failed: {e}")))?;
    records.sort_by_key(|r| (r.scheduled_at, r.template_id));

    let eps = config.epsilon();
    let dispatched = records.iter().filter(|r| r.status.was_sent()).count() as u64;
    let within = records
        .iter()
        .filter(|r| r.status.was_sent() && r.sim_error().abs() <= eps)
        .count() as u64;
    let summary = RunSummary {
        windows_fetched: windows,
        fetched,
        dispatched,
        succeeded: records.iter().filter(|r| r.status.is_success()).count() as u64,
        failed: records.iter().filter(|r| r.status.was_sent() && !r.status.is_success()).count() as u64,
        cancelled: records.iter().filter(|r| r.status == DispatchStatus::Cancelled).count() as u64,
        late: records.iter().filter(|r| r.late).count() as u64,
        within_epsilon: within,
        within_epsilon_fraction: if dispatched == 0 { 1.0 } else { within as f64 / dispatched as f64 },
        max_abs_sim_error: records
            .iter()
            .filter(|r| r.status.was_sent())
            .map(|r| r.sim_error().abs())
            .fold(0.0, f64::max),
        max_in_flight_observed: peak.load(Ordering::SeqCst),
        wall_seconds: Instant::now().saturating_duration_since(origin).as_secs_f64(),
    };
    Ok(RunReport {
        config: config.clone(),
        clock: ReplayClock {
            wall_origin_unix_ns: origin_unix_ns,
            start: config.start,
            duration: config.duration,
            compression: config.compression,
            epsilon: eps,
        },
        complete,
        summary,
        records,
    })
}

/// [`run`] on a fresh multi-threaded runtime, cancelled by Ctrl-C.
pub fn run_blocking(store: &TemplateStore, registry: &QueryRegistry, config: &RunConfig) -> Result<RunReport> {
    let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    rt.block_on(async {
        let cancel = CancellationToken::new();
        let on_signal = cancel.clone();
        tokio::spawn(async move {
            if tokio::signal::ctrl_c().await.is_ok() {
                on_signal.cancel();
            }
        });
        run(store, registry, config, cancel).await
    })
}
