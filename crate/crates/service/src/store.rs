//! Append-only session storage: `<root>/<session>/bundle.json` holds the
//! bundle document as submitted and `events.jsonl` one event per line.

use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use sagex_core::es::{HeuristicOrder, Interaction};
use sagex_core::model::Mode;
use serde::{Deserialize, Serialize};
use thiserror::Error;

const BUNDLE_FILE: &str = "bundle.json";
const EVENTS_FILE: &str = "events.jsonl";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum EventKind {
    Created {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mode: Option<Mode>,
        heuristic_order: String,
    },
    Interaction {
        interaction: Interaction,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub seq: u64,
    pub timestamp_ms: u64,
    #[serde(flatten)]
    pub kind: EventKind,
}

impl Event {
    pub fn now(seq: u64, kind: EventKind) -> Self {
        let timestamp_ms = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_millis() as u64)
            .unwrap_or(0);
        Event {
            seq,
            timestamp_ms,
            kind,
        }
    }
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("storage i/o on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("corrupt event log {path} line {line}: {message}")]
    Corrupt { path: PathBuf, line: usize, message: String },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// A session as found on disk.
#[derive(Debug)]
pub struct StoredSession {
    pub id: String,
    pub document: String,
    pub mode: Option<Mode>,
    pub heuristic_order: HeuristicOrder,
    pub events: Vec<Event>,
}

#[derive(Debug, Clone)]
pub struct Store {
    root: PathBuf,
}

impl Store {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(io_err(&root))?;
        Ok(Store { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn dir(&self, id: &str) -> PathBuf {
        self.root.join(id)
    }

    /// Writes the bundle and the creation event, both synced.
    pub fn create(&self, id: &str, document: &str, created: &Event) -> Result<(), StoreError> {
        let dir = self.dir(id);
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        let bundle = dir.join(BUNDLE_FILE);
        let mut f = File::create(&bundle).map_err(io_err(&bundle))?;
        f.write_all(document.as_bytes()).map_err(io_err(&bundle))?;
        f.sync_all().map_err(io_err(&bundle))?;
        self.append(id, created)
    }

    /// Appends one event and syncs it to disk before returning.
    pub fn append(&self, id: &str, event: &Event) -> Result<(), StoreError> {
        let path = self.dir(id).join(EVENTS_FILE);
        let mut line = serde_json::to_string(event).expect("events serialize");
        line.push('\n');
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(io_err(&path))?;
        f.write_all(line.as_bytes()).map_err(io_err(&path))?;
        f.sync_data().map_err(io_err(&path))
    }

    pub fn session_ids(&self) -> Result<Vec<String>, StoreError> {
        let mut ids = Vec::new();
        for entry in fs::read_dir(&self.root).map_err(io_err(&self.root))? {
            let entry = entry.map_err(io_err(&self.root))?;
            if entry.path().join(EVENTS_FILE).is_file() {
                ids.push(entry.file_name().to_string_lossy().into_owned());
            }
        }
        ids.sort();
        Ok(ids)
    }

    /// Reads a session back. A torn final line (crash mid-write) is dropped;
    /// a bad line anywhere else is an error.
    pub fn load(&self, id: &str) -> Result<StoredSession, StoreError> {
        let dir = self.dir(id);
        let bundle = dir.join(BUNDLE_FILE);
        let document = fs::read_to_string(&bundle).map_err(io_err(&bundle))?;
        let path = dir.join(EVENTS_FILE);
        let file = File::open(&path).map_err(io_err(&path))?;
        let lines: Vec<String> = BufReader::new(file)
            .lines()
            .collect::<Result<_, _>>()
            .map_err(io_err(&path))?;
        let corrupt = |line: usize, message: String| StoreError::Corrupt {
            path: path.clone(),
            line,
            message,
        };
        let mut events = Vec::with_capacity(lines.len());
        for (i, text) in lines.iter().enumerate() {
            match serde_json::from_str::<Event>(text) {
                Ok(e) => events.push(e),
                Err(_) if i + 1 == lines.len() => break,
                Err(e) => return Err(corrupt(i + 1, e.to_string())),
            }
        }
        let Some(Event {
            kind: EventKind::Created { mode, heuristic_order },
            ..
        }) = events.first().cloned()
        else {
            return Err(corrupt(1, "log does not start with a creation event".into()));
        };
        let heuristic_order = heuristic_order.parse().map_err(|e: String| corrupt(1, e))?;
        Ok(StoredSession {
            id: id.to_string(),
            document,
            mode,
            heuristic_order,
            events,
        })
    }
}
