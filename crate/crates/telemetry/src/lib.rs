//! Keyed telemetry channels.
//!
//! A [`Store`] keeps channels, each with a write key, a read key and up to
//! eight numbered field slots, and an append-only feed of entries per
//! channel. The [`http`] module exposes it over a small HTTP API in the
//! `/update` + `/channels/<id>/feeds.json` style used by hosted IoT
//! dashboards.

mod channel;
mod export;
pub mod http;
mod store;

pub use channel::{Channel, FeedEntry, FieldMap, MAX_FIELDS};
pub use export::{parse_feed_csv, ExportedFeed, ExportedRow};
pub use store::Store;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TelemetryError {
    #[error("unauthorized")]
    Unauthorized,
    #[error("no channel with id {0}")]
    NoSuchChannel(u64),
    #[error("invalid request: {0}")]
    Validation(String),
    #[error("corrupt store: {0}")]
    Corrupt(String),
    #[error("I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("CSV: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, TelemetryError>;
