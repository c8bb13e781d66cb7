use std::collections::BTreeMap;

use chrono::{DateTime, SecondsFormat, Utc};

use crate::channel::{Channel, FeedEntry};
use crate::{Result, TelemetryError};

pub(crate) fn to_csv(channel: &Channel, entries: &[FeedEntry]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let slots: Vec<(&str, &str)> = channel.slots().collect();
    let mut header = vec!["entry_id", "created_at"];
    header.extend(slots.iter().map(|(_, label)| *label));
    w.write_record(&header)?;
    for e in entries {
        let mut row = vec![e.entry_id.to_string(), e.created_at.to_rfc3339_opts(SecondsFormat::AutoSi, true)];
        row.extend(slots.iter().map(|(slot, _)| e.values.get(*slot).map_or(String::new(), |v| v.to_string())));
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| TelemetryError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// A feed export read back into memory, keyed by label instead of slot.
#[derive(Debug, Clone, PartialEq)]
pub struct ExportedFeed {
    pub labels: Vec<String>,
    pub rows: Vec<ExportedRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExportedRow {
    pub entry_id: u64,
    pub created_at: DateTime<Utc>,
    pub values: BTreeMap<String, f64>,
}

pub fn parse_feed_csv(text: &str) -> Result<ExportedFeed> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers()?.clone();
    if header.get(0) != Some("entry_id") || header.get(1) != Some("created_at") {
        return Err(TelemetryError::Validation("header must start with entry_id,created_at".into()));
    }
    let labels: Vec<String> = header.iter().skip(2).map(str::to_string).collect();
    let mut rows = Vec::new();
    for (n, rec) in r.records().enumerate() {
        let rec = rec?;
        let bad = |what: &str| TelemetryError::Validation(format!("row {}: bad {what}", n + 1));
        let entry_id = rec[0].parse().map_err(|_| bad("entry_id"))?;
        let created_at = DateTime::parse_from_rfc3339(&rec[1]).map_err(|_| bad("created_at"))?.with_timezone(&Utc);
        let mut values = BTreeMap::new();
        for (label, cell) in labels.iter().zip(rec.iter().skip(2)) {
            if !cell.is_empty() {
                values.insert(label.clone(), cell.parse().map_err(|_| bad(label))?);
            }
        }
        rows.push(ExportedRow { entry_id, created_at, values });
    }
    Ok(ExportedFeed { labels, rows })
}
