//! HTTP front end.
//!
//! - `GET|POST /update?api_key=<write key>&field1=<v>…` answers with the new
//!   entry id as plain text, or `0` on failure.
//! - `GET /channels/<id>/feeds.json?api_key=<read key>&results=<n>` answers
//!   with `{"channel": …, "feeds": […]}`, or `-1` on failure.

use std::future::Future;
use std::io;
use std::net::SocketAddr;
use std::sync::Arc;
use std::thread::JoinHandle;

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{json, Map, Value};
use tokio::sync::oneshot;

use crate::{Store, TelemetryError};

/// Feed length when `results` is not given.
pub const DEFAULT_RESULTS: usize = 100;

pub fn router(store: Arc<Store>) -> Router {
    Router::new()
        .route("/update", get(update).post(update))
        .route("/channels/{id}/feeds.json", get(feeds))
        .with_state(store)
}

fn status_of(e: &TelemetryError) -> StatusCode {
    match e {
        TelemetryError::Unauthorized => StatusCode::UNAUTHORIZED,
        TelemetryError::NoSuchChannel(_) => StatusCode::NOT_FOUND,
        TelemetryError::Validation(_) => StatusCode::BAD_REQUEST,
        _ => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

async fn update(State(store): State<Arc<Store>>, Query(params): Query<Vec<(String, String)>>) -> Response {
    let mut key = None;
    let mut values = Vec::new();
    for (name, raw) in params {
        if name == "api_key" {
            key = Some(raw);
            continue;
        }
        match raw.trim().parse::<f64>() {
            Ok(v) => values.push((name, v)),
            Err(_) => return (StatusCode::BAD_REQUEST, "0").into_response(),
        }
    }
    let Some(key) = key else {
        return (StatusCode::UNAUTHORIZED, "0").into_response();
    };
    // the append syncs to disk, keep it off the async workers
    let result = tokio::task::spawn_blocking(move || store.ingest(&key, values)).await;
    match result {
        Ok(Ok(id)) => id.to_string().into_response(),
        Ok(Err(e)) => (status_of(&e), "0").into_response(),
        Err(_) => (StatusCode::INTERNAL_SERVER_ERROR, "0").into_response(),
    }
}

#[derive(Deserialize)]
struct FeedQuery {
    api_key: Option<String>,
    results: Option<usize>,
}

async fn feeds(State(store): State<Arc<Store>>, Path(id): Path<u64>, Query(q): Query<FeedQuery>) -> Response {
    let key = q.api_key.as_deref();
    let body = store.channel_info(id, key).and_then(|channel| {
        let entries = store.read_feed(id, key, q.results.unwrap_or(DEFAULT_RESULTS))?;
        let last = store.read_feed(id, key, 1)?.first().map(|e| e.entry_id);
        let mut meta = Map::new();
        meta.insert("id".into(), json!(channel.id));
        meta.insert("name".into(), json!(channel.name));
        for (slot, label) in &channel.field_map {
            meta.insert(slot.clone(), json!(label));
        }
        meta.insert("last_entry_id".into(), json!(last));
        let feeds: Vec<Value> = entries
            .into_iter()
            .map(|e| {
                let mut row = Map::new();
                row.insert("entry_id".into(), json!(e.entry_id));
                row.insert("created_at".into(), json!(e.created_at));
                for (slot, v) in e.values {
                    row.insert(slot, json!(v));
                }
                Value::Object(row)
            })
            .collect();
        Ok(json!({ "channel": meta, "feeds": feeds }))
    });
    match body {
        Ok(v) => Json(v).into_response(),
        Err(e) => (status_of(&e), "-1").into_response(),
    }
}

/// Serves `store` on an already bound listener until `shutdown` resolves.
pub async fn serve(
    listener: tokio::net::TcpListener,
    store: Arc<Store>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> io::Result<()> {
    axum::serve(listener, router(store)).with_graceful_shutdown(shutdown).await
}

/// A server on its own thread and runtime, for embedding in synchronous
/// programs and tests. Dropping it shuts the server down.
pub struct BackgroundServer {
    addr: SocketAddr,
    shutdown: Option<oneshot::Sender<()>>,
    thread: Option<JoinHandle<io::Result<()>>>,
}

impl BackgroundServer {
    /// Binds `addr` before returning, so a port clash is reported here.
    pub fn start(store: Arc<Store>, addr: SocketAddr) -> io::Result<Self> {
        let std_listener = std::net::TcpListener::bind(addr)?;
        std_listener.set_nonblocking(true)?;
        let addr = std_listener.local_addr()?;
        let (tx, rx) = oneshot::channel::<()>();
        let thread = std::thread::spawn(move || {
            let rt = tokio::runtime::Builder::new_multi_thread().worker_threads(2).enable_all().build()?;
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::from_std(std_listener)?;
                serve(listener, store, async move {
                    let _ = rx.await;
                })
                .await
            })
        });
        Ok(Self { addr, shutdown: Some(tx), thread: Some(thread) })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    /// Stops accepting connections and waits for in-flight requests.
    pub fn stop(mut self) -> io::Result<()> {
        self.shutdown_and_join()
    }

    fn shutdown_and_join(&mut self) -> io::Result<()> {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        match self.thread.take() {
            Some(t) => t.join().map_err(|_| io::Error::other("server thread panicked"))?,
            None => Ok(()),
        }
    }
}

impl Drop for BackgroundServer {
    fn drop(&mut self) {
        let _ = self.shutdown_and_join();
    }
}
