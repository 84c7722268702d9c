//! Append-only event log. One JSON object per line, tagged by `event`.
//!
//! `session_created` fields:
//! - `session_id`, `rater_id`, `corpus`: identifiers.
//! - `methods`: configured methods in request order.
//! - `seed`: the requested seed.
//! - `samples`: sample ids in presentation order.
//! - `labels`: per presented sample, the method behind label A, B, … in order.
//! - `timestamp_ms`: wall clock, informational only.
//!
//! `ranking` fields:
//! - `session_id`, `rater_id`, `corpus`, `sample_id`.
//! - `ranking`: unblinded method names, best first.
//! - `idempotency_key`: client-supplied key or null.
//! - `timestamp_ms`.
//!
//! Standings are never stored; they are recomputed from these events.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    SessionCreated {
        session_id: String,
        rater_id: String,
        corpus: String,
        methods: Vec<String>,
        seed: u64,
        samples: Vec<String>,
        labels: Vec<Vec<String>>,
        timestamp_ms: u64,
    },
    Ranking {
        session_id: String,
        rater_id: String,
        corpus: String,
        sample_id: String,
        ranking: Vec<String>,
        idempotency_key: Option<String>,
        timestamp_ms: u64,
    },
}

pub struct EventLog {
    path: PathBuf,
    file: File,
}

impl EventLog {
    pub fn open(path: &Path) -> std::io::Result<Self> {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent)?;
        }
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(EventLog {
            path: path.to_path_buf(),
            file,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Writes and syncs one line before returning.
    pub fn append(&mut self, event: &Event) -> std::io::Result<()> {
        let mut line = serde_json::to_string(event).map_err(std::io::Error::other)?;
        line.push('\n');
        self.file.write_all(line.as_bytes())?;
        self.file.sync_data()
    }
}

/// Reads every event in order. A missing file is an empty log.
pub fn read_events(path: &Path) -> std::io::Result<Vec<Event>> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e),
    };
    let mut events = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let event = serde_json::from_str(&line)
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, format!("line {}: {e}", n + 1)))?;
        events.push(event);
    }
    Ok(events)
}
