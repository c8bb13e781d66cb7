use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Result, TelemetryError};

pub const MAX_FIELDS: usize = 8;

/// Slot name (`field1` … `field8`) to semantic label, e.g. `field1 → moisture_pct`.
pub type FieldMap = BTreeMap<String, String>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Channel {
    pub id: u64,
    pub name: String,
    pub write_key: String,
    pub read_key: String,
    pub field_map: FieldMap,
    /// Public channels can be read without a key.
    #[serde(default)]
    pub public: bool,
}

impl Channel {
    /// Labels in slot order.
    pub fn labels(&self) -> Vec<&str> {
        self.slots().map(|(_, label)| label).collect()
    }

    pub(crate) fn slots(&self) -> impl Iterator<Item = (&str, &str)> {
        let mut slots: Vec<_> = self.field_map.iter().map(|(s, l)| (s.as_str(), l.as_str())).collect();
        slots.sort_by_key(|(s, _)| slot_number(s));
        slots.into_iter()
    }

    pub(crate) fn can_read(&self, key: Option<&str>) -> bool {
        self.public || key == Some(self.read_key.as_str())
    }
}

/// `field3` → `Some(3)`.
pub(crate) fn slot_number(slot: &str) -> Option<usize> {
    let n: usize = slot.strip_prefix("field")?.parse().ok()?;
    (1..=MAX_FIELDS).contains(&n).then_some(n)
}

pub(crate) fn validate_field_map(map: &FieldMap) -> Result<()> {
    if map.is_empty() {
        return Err(TelemetryError::Validation("a channel needs at least one field".into()));
    }
    if map.len() > MAX_FIELDS {
        return Err(TelemetryError::Validation(format!("{} fields requested, at most {MAX_FIELDS} allowed", map.len())));
    }
    for (slot, label) in map {
        if slot_number(slot).is_none() {
            return Err(TelemetryError::Validation(format!("{slot:?} is not one of field1..field{MAX_FIELDS}")));
        }
        if label.is_empty() || label.contains([',', '"', '\n', '\r']) {
            return Err(TelemetryError::Validation(format!("label {label:?} for {slot} must be non-empty plain text")));
        }
    }
    let mut labels: Vec<&String> = map.values().collect();
    labels.sort();
    labels.dedup();
    if labels.len() != map.len() {
        return Err(TelemetryError::Validation("field labels must be distinct".into()));
    }
    Ok(())
}

const KEY_LEN: usize = 16;
const KEY_CHARS: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";

pub(crate) fn random_key(rng: &mut impl Rng) -> String {
    (0..KEY_LEN).map(|_| KEY_CHARS[rng.random_range(0..KEY_CHARS.len())] as char).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedEntry {
    pub entry_id: u64,
    pub created_at: DateTime<Utc>,
    /// Populated slots only.
    pub values: BTreeMap<String, f64>,
}
