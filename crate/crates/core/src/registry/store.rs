use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use super::{
    is_duplicate, merge, query_nearby, DedupConfig, DuplicateCheck, PotholeRecord, Upsert,
};
use crate::error::{Error, Result};

/// Append-only JSON-lines pothole store. Every mutation appends the full
/// record; on load the last line per id wins. A final line without its
/// newline is treated as a torn write: it is dropped with a warning and cut
/// off before the next append.
#[derive(Debug, Default)]
pub struct PotholeStore {
    path: Option<PathBuf>,
    records: BTreeMap<u64, PotholeRecord>,
    /// Byte length of the file up to the last complete line.
    valid_len: u64,
    torn_tail: bool,
}

impl PotholeStore {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Loads the store at `path`; a missing file is an empty store.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut store = Self {
            path: Some(path.clone()),
            ..Self::default()
        };
        let text = match std::fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(store),
            Err(e) => return Err(e.into()),
        };

        let mut offset = 0usize;
        for (lineno, chunk) in text.split_inclusive('\n').enumerate() {
            let complete = chunk.ends_with('\n');
            let line = chunk.trim_end_matches(['\n', '\r']);
            if line.trim().is_empty() {
                if complete {
                    offset += chunk.len();
                }
                continue;
            }
            if !complete {
                log::warn!(
                    "{}: ignoring incomplete final line {}",
                    path.display(),
                    lineno + 1
                );
                store.torn_tail = true;
                break;
            }
            let rec: PotholeRecord = serde_json::from_str(line).map_err(|e| {
                Error::InvalidArgument(format!("{}: line {}: {e}", path.display(), lineno + 1))
            })?;
            rec.validate()?;
            store.records.insert(rec.id, rec);
            offset += chunk.len();
        }
        store.valid_len = offset as u64;
        Ok(store)
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, id: u64) -> Option<&PotholeRecord> {
        self.records.get(&id)
    }

    /// Records in id order.
    pub fn records(&self) -> impl Iterator<Item = &PotholeRecord> {
        self.records.values()
    }

    pub fn is_duplicate(
        &self,
        candidate: &PotholeRecord,
        cfg: &DedupConfig,
    ) -> Result<DuplicateCheck> {
        is_duplicate(candidate, self.records.values(), cfg)
    }

    pub fn query_nearby(
        &self,
        lat: f64,
        lon: f64,
        radius_m: f64,
    ) -> Result<Vec<(f64, &PotholeRecord)>> {
        query_nearby(self.records.values(), lat, lon, radius_m)
    }

    /// Merges `obs` into its duplicate or stores it under a fresh id. The
    /// in-memory view changes only after the line reached disk.
    pub fn upsert(&mut self, obs: PotholeRecord, cfg: &DedupConfig) -> Result<Upsert> {
        obs.validate()?;
        let check = self.is_duplicate(&obs, cfg)?;
        let (record, outcome) = match check.matched {
            Some(id) => {
                let merged = merge(&self.records[&id], &obs);
                (merged, Upsert::Merged(id))
            }
            None => {
                let id = self.records.keys().next_back().map_or(1, |k| k + 1);
                let rec = PotholeRecord {
                    id,
                    sightings: 1,
                    ..obs
                };
                (rec, Upsert::Created(id))
            }
        };
        self.persist(&record)?;
        self.records.insert(record.id, record);
        Ok(outcome)
    }

    fn persist(&mut self, record: &PotholeRecord) -> Result<()> {
        let Some(path) = &self.path else {
            return Ok(());
        };
        let mut line = serde_json::to_string(record)?;
        line.push('\n');
        let mut file = OpenOptions::new().create(true).append(true).open(path)?;
        if self.torn_tail {
            truncate(path, self.valid_len)?;
            self.torn_tail = false;
        }
        file.write_all(line.as_bytes())?;
        file.sync_data()?;
        self.valid_len += line.len() as u64;
        Ok(())
    }
}

fn truncate(path: &Path, len: u64) -> Result<()> {
    File::options().write(true).open(path)?.set_len(len)?;
    Ok(())
}
