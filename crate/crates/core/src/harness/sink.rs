use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use axum::body::Bytes;
use axum::extract::State;
use axum::http::StatusCode;
use axum::routing::post;
use axum::Router;
use serde::{Deserialize, Serialize};
use tokio::sync::oneshot;
use tokio::task::JoinHandle;

use crate::error::{Error, Result};

/// One line of the sink log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SinkEntry {
    /// Receive instant, Unix ns.
    pub recv_ns: u64,
    pub template_id: Option<u64>,
    pub scheduled_at: Option<u32>,
    /// Status the sink answered with.
    pub status: u16,
    /// Parse failure description for malformed bodies.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Deserialize)]
struct Envelope {
    #[allow(dead_code)]
    query: String,
    template_id: u64,
    scheduled_at: u32,
}

#[derive(Debug, Clone)]
pub struct SinkConfig {
    pub addr: SocketAddr,
    pub log_path: PathBuf,
    pub response_delay: Duration,
}

struct AppState {
    log: std::sync::mpsc::Sender<SinkEntry>,
    delay: Duration,
}

/// A running sink. Dropping it without [`SinkServer::shutdown`] leaves the server running
/// until the runtime stops.
pub struct SinkServer {
    addr: SocketAddr,
    stop: Option<oneshot::Sender<()>>,
    server: JoinHandle<std::io::Result<()>>,
    writer: std::thread::JoinHandle<std::io::Result<u64>>,
}

fn unix_ns_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_nanos() as u64).unwrap_or(0)
}

async fn receive(State(state): State<Arc<AppState>>, body: Bytes) -> StatusCode {
    let recv_ns = unix_ns_now();
    let entry = match serde_json::from_slice::<Envelope>(&body) {
        Ok(env) => SinkEntry {
            recv_ns,
            template_id: Some(env.template_id),
            scheduled_at: Some(env.scheduled_at),
            status: 200,
            error: None,
        },
        Err(e) => SinkEntry {
            recv_ns,
            template_id: None,
            scheduled_at: None,
            status: 400,
            error: Some(format!("parse error: {e}")),
        },
    };
    let status = StatusCode::from_u16(entry.status).expect("valid status");
    let _ = state.log.send(entry);
    if !state.delay.is_zero() {
        tokio::time::sleep(state.delay).await;
    }
    status
}

impl SinkServer {
    /// Bind and start serving. Every POST path is accepted.
    pub async fn start(config: SinkConfig) -> Result<SinkServer> {
        let listener = tokio::net::TcpListener::bind(config.addr)
            .await
            .map_err(|source| Error::BindFailure { addr: config.addr.to_string(), source })?;
        let addr = listener.local_addr()?;
        if let Some(dir) = config.log_path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let file = std::fs::OpenOptions::new().create(true).append(true).open(&config.log_path)?;

        // single writer thread; flushes whenever it catches up with the queue
        let (log_tx, log_rx) = std::sync::mpsc::channel::<SinkEntry>();
        let writer = std::thread::Builder::new().name("sink-log".into()).spawn(move || {
            let mut out = std::io::BufWriter::new(file);
            let mut n = 0u64;
            while let Ok(mut entry) = log_rx.recv() {
                loop {
                    serde_json::to_writer(&mut out, &entry)?;
                    out.write_all(b"\n")?;
                    n += 1;
                    match log_rx.try_recv() {
                        Ok(next) => entry = next,
                        Err(_) => break,
                    }
                }
                out.flush()?;
            }
            out.flush()?;
            Ok(n)
        })?;

        let state = Arc::new(AppState { log: log_tx, delay: config.response_delay });
        let app = Router::new()
            .route("/", post(receive))
            .route("/{*path}", post(receive))
            .with_state(state);
        let (stop_tx, stop_rx) = oneshot::channel::<()>();
        let server = tokio::spawn(async move {
            axum::serve(listener, app)
                .with_graceful_shutdown(async {
                    let _ = stop_rx.await;
                })
                .await
        });
        Ok(SinkServer { addr, stop: Some(stop_tx), server, writer })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    /// Endpoint URL for the executor.
    pub fn url(&self) -> String {
        format!("http://{}/query", self.addr)
    }

    /// Stop accepting, drain in-flight requests and flush the log. Returns lines written.
    pub async fn shutdown(mut self) -> Result<u64> {
        if let Some(stop) = self.stop.take() {
            let _ = stop.send(());
        }
        self.server.await.map_err(|e| Error::Http(e.to_string()))??;
        let writer = self.writer;
        let written = tokio::task::spawn_blocking(move || writer.join())
            .await
            .map_err(|e| Error::Http(e.to_string()))?
            .map_err(|_| Error::Http("sink log writer panicked".into()))??;
        Ok(written)
    }

    /// Serve until `stop` resolves.
    pub async fn run_until<F: std::future::Future<Output = ()>>(self, stop: F) -> Result<u64> {
        stop.await;
        self.shutdown().await
    }
}

/// Run a sink until Ctrl-C on the current thread's runtime.
pub fn serve_sink(addr: SocketAddr, log_path: &Path, response_delay: Duration) -> Result<u64> {
    let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    rt.block_on(async {
        let server = SinkServer::start(SinkConfig {
            addr,
            log_path: log_path.to_path_buf(),
            response_delay,
        })
        .await?;
        eprintln!("sink listening on {} (log: {})", server.url(), log_path.display());
        server
            .run_until(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
    })
}

pub fn read_log(path: &Path) -> Result<Vec<SinkEntry>> {
    let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
        _ => e.into(),
    })?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::schema(format!("sink log line {}", i + 1), "entry", e.to_string()))
        })
        .collect()
}
