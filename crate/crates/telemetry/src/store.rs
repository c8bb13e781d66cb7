use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, MutexGuard, PoisonError, RwLock, RwLockReadGuard, RwLockWriteGuard};

use chrono::Utc;
use serde::{Deserialize, Serialize};

use crate::channel::{random_key, slot_number, validate_field_map, Channel, FeedEntry, FieldMap};
use crate::export;
use crate::{Result, TelemetryError};

const MANIFEST: &str = "manifest.json";

#[derive(Serialize, Deserialize, Default)]
struct Manifest {
    channels: Vec<Channel>,
}

struct ChannelLog {
    channel: Channel,
    entries: RwLock<Vec<FeedEntry>>,
    /// Held for the whole append so entry ids are handed out in file order.
    writer: Mutex<File>,
}

#[derive(Default)]
struct Registry {
    channels: BTreeMap<u64, Arc<ChannelLog>>,
    by_write_key: HashMap<String, u64>,
}

/// Channel registry plus one append-only `channel-<id>.jsonl` feed file per
/// channel under a data directory.
///
/// Appends are flushed and synced before `ingest` returns. Writes to one
/// channel are serialized; readers see a consistent prefix of the feed and
/// never block on the disk.
pub struct Store {
    dir: PathBuf,
    registry: RwLock<Registry>,
}

fn read<T>(l: &RwLock<T>) -> RwLockReadGuard<'_, T> {
    l.read().unwrap_or_else(PoisonError::into_inner)
}

fn write<T>(l: &RwLock<T>) -> RwLockWriteGuard<'_, T> {
    l.write().unwrap_or_else(PoisonError::into_inner)
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(PoisonError::into_inner)
}

impl Store {
    /// Opens or initializes a store, replaying every channel's feed file.
    pub fn open(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(&dir)?;
        let manifest: Manifest = match fs::read_to_string(dir.join(MANIFEST)) {
            Ok(text) => serde_json::from_str(&text)?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Manifest::default(),
            Err(e) => return Err(e.into()),
        };
        let mut registry = Registry::default();
        for channel in manifest.channels {
            let path = feed_path(&dir, channel.id);
            let entries = replay(&path)?;
            let writer = OpenOptions::new().create(true).append(true).open(&path)?;
            if registry.channels.contains_key(&channel.id) {
                return Err(TelemetryError::Corrupt(format!("channel id {} listed twice", channel.id)));
            }
            registry.by_write_key.insert(channel.write_key.clone(), channel.id);
            let log = ChannelLog { channel, entries: RwLock::new(entries), writer: Mutex::new(writer) };
            registry.channels.insert(log.channel.id, Arc::new(log));
        }
        Ok(Self { dir, registry: RwLock::new(registry) })
    }

    pub fn data_dir(&self) -> &Path {
        &self.dir
    }

    pub fn create_channel(&self, name: &str, field_map: FieldMap, public: bool) -> Result<Channel> {
        validate_field_map(&field_map)?;
        let mut reg = write(&self.registry);
        let id = reg.channels.keys().next_back().map_or(1, |last| last + 1);
        let mut rng = rand::rng();
        let taken = |k: &str, reg: &Registry| {
            reg.channels.values().any(|c| c.channel.write_key == k || c.channel.read_key == k)
        };
        let write_key = loop {
            let k = random_key(&mut rng);
            if !taken(&k, &reg) {
                break k;
            }
        };
        let read_key = loop {
            let k = random_key(&mut rng);
            if k != write_key && !taken(&k, &reg) {
                break k;
            }
        };
        let channel = Channel { id, name: name.to_string(), write_key, read_key, field_map, public };

        let path = feed_path(&self.dir, id);
        File::create(&path)?.sync_all()?;
        let mut channels: Vec<Channel> = reg.channels.values().map(|c| c.channel.clone()).collect();
        channels.push(channel.clone());
        self.write_manifest(&Manifest { channels })?;

        let writer = OpenOptions::new().append(true).open(&path)?;
        reg.by_write_key.insert(channel.write_key.clone(), id);
        let log = ChannelLog { channel: channel.clone(), entries: RwLock::new(Vec::new()), writer: Mutex::new(writer) };
        reg.channels.insert(id, Arc::new(log));
        Ok(channel)
    }

    fn write_manifest(&self, manifest: &Manifest) -> Result<()> {
        let tmp = self.dir.join(format!("{MANIFEST}.tmp"));
        let mut f = BufWriter::new(File::create(&tmp)?);
        serde_json::to_writer_pretty(&mut f, manifest)?;
        f.write_all(b"\n")?;
        f.into_inner().map_err(|e| e.into_error())?.sync_all()?;
        fs::rename(&tmp, self.dir.join(MANIFEST))?;
        Ok(())
    }

    /// Appends an entry stamped with the current time and returns its id.
    pub fn ingest<K, I>(&self, write_key: &str, values: I) -> Result<u64>
    where
        K: Into<String>,
        I: IntoIterator<Item = (K, f64)>,
    {
        let log = {
            let reg = read(&self.registry);
            let id = *reg.by_write_key.get(write_key).ok_or(TelemetryError::Unauthorized)?;
            Arc::clone(&reg.channels[&id])
        };
        let mut populated = std::collections::BTreeMap::new();
        for (slot, v) in values {
            let slot = slot.into();
            if slot_number(&slot).is_none() || !log.channel.field_map.contains_key(&slot) {
                return Err(TelemetryError::Validation(format!("channel {} has no slot {slot:?}", log.channel.id)));
            }
            if !v.is_finite() {
                return Err(TelemetryError::Validation(format!("{slot} must be a finite number")));
            }
            if populated.insert(slot.clone(), v).is_some() {
                return Err(TelemetryError::Validation(format!("{slot} given more than once")));
            }
        }
        if populated.is_empty() {
            return Err(TelemetryError::Validation("no field values given".into()));
        }

        let mut file = lock(&log.writer);
        let entry_id = read(&log.entries).last().map_or(1, |e| e.entry_id + 1);
        let entry = FeedEntry { entry_id, created_at: Utc::now(), values: populated };
        let mut line = serde_json::to_vec(&entry)?;
        line.push(b'\n');
        file.write_all(&line)?;
        file.sync_data()?;
        write(&log.entries).push(entry);
        Ok(entry_id)
    }

    fn readable(&self, channel_id: u64, read_key: Option<&str>) -> Result<Arc<ChannelLog>> {
        let reg = read(&self.registry);
        let log = reg.channels.get(&channel_id).ok_or(TelemetryError::NoSuchChannel(channel_id))?;
        if !log.channel.can_read(read_key) {
            return Err(TelemetryError::Unauthorized);
        }
        Ok(Arc::clone(log))
    }

    /// Channel metadata with both keys blanked, for feed responses.
    pub fn channel_info(&self, channel_id: u64, read_key: Option<&str>) -> Result<Channel> {
        let log = self.readable(channel_id, read_key)?;
        Ok(Channel { write_key: String::new(), read_key: String::new(), ..log.channel.clone() })
    }

    /// The most recent `last_n` entries, oldest first.
    pub fn read_feed(&self, channel_id: u64, read_key: Option<&str>, last_n: usize) -> Result<Vec<FeedEntry>> {
        let log = self.readable(channel_id, read_key)?;
        let entries = read(&log.entries);
        Ok(entries[entries.len().saturating_sub(last_n)..].to_vec())
    }

    /// Whole feed as CSV: `entry_id,created_at,<labels in slot order>`.
    pub fn export_feed_csv(&self, channel_id: u64, read_key: Option<&str>) -> Result<String> {
        let log = self.readable(channel_id, read_key)?;
        let entries = read(&log.entries);
        export::to_csv(&log.channel, &entries)
    }

    /// Every channel including keys; for local administration only.
    pub fn channels(&self) -> Vec<Channel> {
        read(&self.registry).channels.values().map(|c| c.channel.clone()).collect()
    }
}

fn feed_path(dir: &Path, id: u64) -> PathBuf {
    dir.join(format!("channel-{id}.jsonl"))
}

/// Loads a feed file. A final line without a newline is a torn append from
/// a crash; it is dropped and the file truncated back to the last full line.
fn replay(path: &Path) -> Result<Vec<FeedEntry>> {
    let bytes = match fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e.into()),
    };
    let complete = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
    if complete < bytes.len() {
        OpenOptions::new().write(true).open(path)?.set_len(complete as u64)?;
    }
    let mut entries: Vec<FeedEntry> = Vec::new();
    for (n, line) in bytes[..complete].split(|&b| b == b'\n').enumerate() {
        if line.is_empty() {
            continue;
        }
        let entry: FeedEntry = serde_json::from_slice(line)
            .map_err(|e| TelemetryError::Corrupt(format!("{}:{}: {e}", path.display(), n + 1)))?;
        if entries.last().is_some_and(|prev| entry.entry_id <= prev.entry_id) {
            return Err(TelemetryError::Corrupt(format!("{}:{}: entry ids out of order", path.display(), n + 1)));
        }
        entries.push(entry);
    }
    Ok(entries)
}
