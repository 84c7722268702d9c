use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use slider_core::metrics::{kendalls_w, EloTable, RankingSet};

use crate::events::{read_events, Event, EventLog};

/// Raster shown next to the candidates, if present in a sample directory.
pub const ORIGINAL_FILE: &str = "original.png";
const MAX_METHODS: usize = 26;

#[derive(Debug, thiserror::Error)]
pub enum ArenaError {
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("method {method:?} has no output for sample {sample:?}")]
    MissingOutput { method: String, sample: String },
    #[error("rater {rater:?} already ranked sample {sample:?}")]
    DuplicateSubmission { rater: String, sample: String },
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("event log: {0}")]
    Log(#[from] std::io::Error),
    #[error("event log replay: {0}")]
    Replay(String),
}

impl ArenaError {
    pub fn kind(&self) -> &'static str {
        match self {
            ArenaError::InvalidRequest(_) => "InvalidRequest",
            ArenaError::NotFound(_) => "NotFound",
            ArenaError::MissingOutput { .. } => "MissingOutput",
            ArenaError::DuplicateSubmission { .. } => "DuplicateSubmission",
            ArenaError::InvalidPermutation(_) => "InvalidPermutation",
            ArenaError::Log(_) => "EventLog",
            ArenaError::Replay(_) => "Replay",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct CreateSession {
    pub rater_id: String,
    pub corpus: String,
    pub methods: Vec<String>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct SubmitRanking {
    pub sample_id: String,
    /// Blind labels, best first.
    pub ranking: Vec<String>,
    #[serde(default)]
    pub idempotency_key: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Progress {
    pub done: usize,
    pub total: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SessionCreated {
    pub session_id: String,
    pub rater_id: String,
    pub samples: usize,
    pub candidates_per_sample: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Candidate {
    pub label: String,
    pub image_url: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonPage {
    pub index: usize,
    pub sample_id: String,
    pub original_url: Option<String>,
    pub candidates: Vec<Candidate>,
}

/// Per-sample label assignments, only revealed once a session is complete.
#[derive(Debug, Clone, Serialize)]
pub struct Reveal {
    pub sample_id: String,
    pub labels: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct NextView {
    pub session_id: String,
    pub complete: bool,
    pub progress: Progress,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample: Option<ComparisonPage>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reveal: Option<Vec<Reveal>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SubmitAck {
    pub accepted: bool,
    /// True when the same idempotency key was already accepted.
    pub duplicate: bool,
    pub pairs_applied: usize,
    pub progress: Progress,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodStanding {
    pub method: String,
    pub elo: f64,
    pub top_rank_pct: f64,
    pub rankings: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Leaderboard {
    /// Highest Elo first; ties by name.
    pub methods: Vec<MethodStanding>,
    /// Mean per-sample concordance over raters with completed sessions;
    /// null until some sample has two such raters.
    pub kendalls_w: Option<f64>,
    pub completed_raters: usize,
    pub total_rankings: usize,
    pub rating_sum: f64,
}

#[derive(Debug, Clone)]
struct Session {
    rater_id: String,
    corpus: String,
    methods: Vec<String>,
    samples: Vec<String>,
    labels: Vec<Vec<String>>,
    ranked: Vec<bool>,
}

impl Session {
    fn progress(&self) -> Progress {
        Progress {
            done: self.ranked.iter().filter(|&&r| r).count(),
            total: self.samples.len(),
        }
    }

    fn is_complete(&self) -> bool {
        self.ranked.iter().all(|&r| r)
    }
}

#[derive(Debug, Clone)]
struct Record {
    session_id: String,
    corpus: String,
    sample_id: String,
    ranking: Vec<String>,
}

/// Session, ranking and rating state. Every mutation is written to the event
/// log before it is applied, so reopening the log restores the same state.
pub struct Arena {
    corpora_root: PathBuf,
    sessions: BTreeMap<String, Session>,
    records: Vec<Record>,
    submitted: HashMap<(String, String, String), Option<String>>,
    elo: EloTable,
    log: Option<EventLog>,
}

pub fn label(i: usize) -> String {
    char::from(b'A' + i as u8).to_string()
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

fn safe_component(name: &str) -> bool {
    !name.is_empty()
        && name != "."
        && name != ".."
        && !name.contains(['/', '\\'])
        && !name.starts_with('.')
}

fn rater_seed(rater_id: &str, seed: u64) -> u64 {
    let digest = Sha256::digest(rater_id.as_bytes());
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes")) ^ seed
}

fn list_samples(corpus_dir: &Path) -> Result<Vec<String>, ArenaError> {
    let mut samples = Vec::new();
    for entry in std::fs::read_dir(corpus_dir)? {
        let entry = entry?;
        if entry.file_type()?.is_dir() {
            if let Some(name) = entry.file_name().to_str().filter(|n| safe_component(n)) {
                samples.push(name.to_string());
            }
        }
    }
    samples.sort();
    Ok(samples)
}

impl Arena {
    /// Opens the arena over `corpora_root` (one subdirectory per corpus, one
    /// per sample inside it, holding `<method>.png` renderings). With a log
    /// path, existing events are replayed and new ones appended.
    pub fn open(corpora_root: &Path, log_path: Option<&Path>) -> Result<Self, ArenaError> {
        let mut arena = Arena {
            corpora_root: corpora_root.to_path_buf(),
            sessions: BTreeMap::new(),
            records: Vec::new(),
            submitted: HashMap::new(),
            elo: EloTable::with_defaults::<&str>(&[]),
            log: None,
        };
        if let Some(path) = log_path {
            for event in read_events(path)? {
                arena.apply(&event)?;
            }
            arena.log = Some(EventLog::open(path)?);
        }
        Ok(arena)
    }

    pub fn log_path(&self) -> Option<&Path> {
        self.log.as_ref().map(EventLog::path)
    }

    fn record(&mut self, event: Event) -> Result<(), ArenaError> {
        if let Some(log) = &mut self.log {
            log.append(&event)?;
        }
        self.apply(&event)
    }

    fn apply(&mut self, event: &Event) -> Result<(), ArenaError> {
        match event {
            Event::SessionCreated {
                session_id,
                rater_id,
                corpus,
                methods,
                samples,
                labels,
                ..
            } => {
                if labels.len() != samples.len() {
                    return Err(ArenaError::Replay(format!("session {session_id}: label table size")));
                }
                for m in methods {
                    self.elo.add_method(m);
                }
                self.sessions.insert(
                    session_id.clone(),
                    Session {
                        rater_id: rater_id.clone(),
                        corpus: corpus.clone(),
                        methods: methods.clone(),
                        samples: samples.clone(),
                        labels: labels.clone(),
                        ranked: vec![false; samples.len()],
                    },
                );
            }
            Event::Ranking {
                session_id,
                rater_id,
                corpus,
                sample_id,
                ranking,
                idempotency_key,
                ..
            } => {
                let session = self
                    .sessions
                    .get_mut(session_id)
                    .ok_or_else(|| ArenaError::Replay(format!("ranking for unknown session {session_id}")))?;
                let idx = session
                    .samples
                    .iter()
                    .position(|s| s == sample_id)
                    .ok_or_else(|| ArenaError::Replay(format!("sample {sample_id} not in session {session_id}")))?;
                session.ranked[idx] = true;
                self.elo
                    .record_ranking(ranking)
                    .map_err(|e| ArenaError::Replay(e.to_string()))?;
                self.submitted.insert(
                    (rater_id.clone(), corpus.clone(), sample_id.clone()),
                    idempotency_key.clone(),
                );
                self.records.push(Record {
                    session_id: session_id.clone(),
                    corpus: corpus.clone(),
                    sample_id: sample_id.clone(),
                    ranking: ranking.clone(),
                });
            }
        }
        Ok(())
    }

    pub fn create_session(&mut self, req: &CreateSession) -> Result<SessionCreated, ArenaError> {
        if req.rater_id.trim().is_empty() {
            return Err(ArenaError::InvalidRequest("rater_id is empty".into()));
        }
        if req.methods.len() < 2 {
            return Err(ArenaError::InvalidRequest(format!(
                "at least 2 methods required, got {}",
                req.methods.len()
            )));
        }
        if req.methods.len() > MAX_METHODS {
            return Err(ArenaError::InvalidRequest(format!("at most {MAX_METHODS} methods")));
        }
        let distinct: BTreeSet<&String> = req.methods.iter().collect();
        if distinct.len() != req.methods.len() {
            return Err(ArenaError::InvalidRequest("duplicate method".into()));
        }
        if let Some(bad) = req.methods.iter().find(|m| !safe_component(m)) {
            return Err(ArenaError::InvalidRequest(format!("bad method name {bad:?}")));
        }
        if !safe_component(&req.corpus) {
            return Err(ArenaError::InvalidRequest(format!("bad corpus name {:?}", req.corpus)));
        }
        let corpus_dir = self.corpora_root.join(&req.corpus);
        if !corpus_dir.is_dir() {
            return Err(ArenaError::NotFound(format!("corpus {:?}", req.corpus)));
        }
        let mut samples = list_samples(&corpus_dir)?;
        if samples.is_empty() {
            return Err(ArenaError::InvalidRequest(format!("corpus {:?} has no samples", req.corpus)));
        }
        for sample in &samples {
            for method in &req.methods {
                if !corpus_dir.join(sample).join(format!("{method}.png")).is_file() {
                    return Err(ArenaError::MissingOutput {
                        method: method.clone(),
                        sample: sample.clone(),
                    });
                }
            }
        }

        let mut rng = ChaCha8Rng::seed_from_u64(rater_seed(&req.rater_id, req.seed));
        samples.shuffle(&mut rng);
        let labels: Vec<Vec<String>> = samples
            .iter()
            .map(|_| {
                let mut order = req.methods.clone();
                order.shuffle(&mut rng);
                order
            })
            .collect();

        let id_source = format!("{}\n{}\n{}\n{}", req.rater_id, req.corpus, req.seed, self.sessions.len());
        let digest = Sha256::digest(id_source.as_bytes());
        let session_id: String = digest[..8].iter().map(|b| format!("{b:02x}")).collect();

        let n = samples.len();
        self.record(Event::SessionCreated {
            session_id: session_id.clone(),
            rater_id: req.rater_id.clone(),
            corpus: req.corpus.clone(),
            methods: req.methods.clone(),
            seed: req.seed,
            samples,
            labels,
            timestamp_ms: now_ms(),
        })?;
        Ok(SessionCreated {
            session_id,
            rater_id: req.rater_id.clone(),
            samples: n,
            candidates_per_sample: req.methods.len(),
        })
    }

    fn session(&self, id: &str) -> Result<&Session, ArenaError> {
        self.sessions
            .get(id)
            .ok_or_else(|| ArenaError::NotFound(format!("session {id:?}")))
    }

    /// The first unranked sample in presentation order, or the reveal table
    /// once every sample is ranked.
    pub fn next(&self, session_id: &str) -> Result<NextView, ArenaError> {
        let s = self.session(session_id)?;
        let progress = s.progress();
        let Some(index) = s.ranked.iter().position(|&r| !r) else {
            let reveal = s
                .samples
                .iter()
                .zip(&s.labels)
                .map(|(sample_id, methods)| Reveal {
                    sample_id: sample_id.clone(),
                    labels: methods.iter().enumerate().map(|(i, m)| (label(i), m.clone())).collect(),
                })
                .collect();
            return Ok(NextView {
                session_id: session_id.to_string(),
                complete: true,
                progress,
                sample: None,
                reveal: Some(reveal),
            });
        };
        let sample_id = &s.samples[index];
        let has_original = self.corpora_root.join(&s.corpus).join(sample_id).join(ORIGINAL_FILE).is_file();
        let url = |l: &str| format!("/images/{session_id}/{index}/{l}");
        Ok(NextView {
            session_id: session_id.to_string(),
            complete: false,
            progress,
            sample: Some(ComparisonPage {
                index,
                sample_id: sample_id.clone(),
                original_url: has_original.then(|| url("original")),
                candidates: (0..s.methods.len())
                    .map(|i| Candidate {
                        label: label(i),
                        image_url: url(&label(i)),
                    })
                    .collect(),
            }),
            reveal: None,
        })
    }

    /// Resolves a blinded image URL to a file.
    pub fn image_path(&self, session_id: &str, index: usize, which: &str) -> Result<PathBuf, ArenaError> {
        let s = self.session(session_id)?;
        let sample = s
            .samples
            .get(index)
            .ok_or_else(|| ArenaError::NotFound(format!("sample index {index}")))?;
        let dir = self.corpora_root.join(&s.corpus).join(sample);
        if which == "original" {
            return Ok(dir.join(ORIGINAL_FILE));
        }
        let method = (0..s.methods.len())
            .position(|i| label(i) == which)
            .map(|i| &s.labels[index][i])
            .ok_or_else(|| ArenaError::NotFound(format!("label {which:?}")))?;
        Ok(dir.join(format!("{method}.png")))
    }

    pub fn submit(&mut self, session_id: &str, req: &SubmitRanking) -> Result<SubmitAck, ArenaError> {
        let s = self.session(session_id)?;
        let index = s
            .samples
            .iter()
            .position(|x| *x == req.sample_id)
            .ok_or_else(|| ArenaError::NotFound(format!("sample {:?} in session {session_id:?}", req.sample_id)))?;
        let key = (s.rater_id.clone(), s.corpus.clone(), req.sample_id.clone());
        if let Some(previous) = self.submitted.get(&key) {
            if previous.is_some() && *previous == req.idempotency_key {
                return Ok(SubmitAck {
                    accepted: true,
                    duplicate: true,
                    pairs_applied: 0,
                    progress: s.progress(),
                });
            }
            return Err(ArenaError::DuplicateSubmission {
                rater: key.0,
                sample: key.2,
            });
        }

        let n = s.methods.len();
        if req.ranking.len() != n {
            return Err(ArenaError::InvalidPermutation(format!(
                "expected {n} labels, got {}",
                req.ranking.len()
            )));
        }
        let mut seen = vec![false; n];
        let mut methods = Vec::with_capacity(n);
        for l in &req.ranking {
            let i = (0..n)
                .position(|i| label(i) == *l)
                .ok_or_else(|| ArenaError::InvalidPermutation(format!("unknown label {l:?}")))?;
            if std::mem::replace(&mut seen[i], true) {
                return Err(ArenaError::InvalidPermutation(format!("label {l:?} repeated")));
            }
            methods.push(s.labels[index][i].clone());
        }

        let rater_id = s.rater_id.clone();
        let corpus = s.corpus.clone();
        self.record(Event::Ranking {
            session_id: session_id.to_string(),
            rater_id,
            corpus,
            sample_id: req.sample_id.clone(),
            ranking: methods,
            idempotency_key: req.idempotency_key.clone(),
            timestamp_ms: now_ms(),
        })?;
        Ok(SubmitAck {
            accepted: true,
            duplicate: false,
            pairs_applied: n * (n - 1) / 2,
            progress: self.session(session_id)?.progress(),
        })
    }

    pub fn leaderboard(&self) -> Leaderboard {
        let completed: BTreeMap<&str, &Session> = self
            .sessions
            .iter()
            .filter(|(_, s)| s.is_complete())
            .map(|(id, s)| (id.as_str(), s))
            .collect();
        standings(&self.elo, &self.records, &completed)
    }
}

/// (corpus, sample, sorted method set) a ranking belongs to.
type GroupKey = (String, String, Vec<String>);

fn standings(elo: &EloTable, records: &[Record], completed: &BTreeMap<&str, &Session>) -> Leaderboard {
    let mut firsts: BTreeMap<&str, usize> = BTreeMap::new();
    let mut appearances: BTreeMap<&str, usize> = BTreeMap::new();
    for r in records {
        if let Some(first) = r.ranking.first() {
            *firsts.entry(first).or_default() += 1;
        }
        for m in &r.ranking {
            *appearances.entry(m).or_default() += 1;
        }
    }
    let mut methods: Vec<MethodStanding> = elo
        .ratings
        .iter()
        .map(|(m, &rating)| {
            let n = appearances.get(m.as_str()).copied().unwrap_or(0);
            let top = firsts.get(m.as_str()).copied().unwrap_or(0);
            MethodStanding {
                method: m.clone(),
                elo: rating,
                top_rank_pct: if n == 0 { 0.0 } else { 100.0 * top as f64 / n as f64 },
                rankings: n,
            }
        })
        .collect();
    methods.sort_by(|a, b| b.elo.total_cmp(&a.elo).then_with(|| a.method.cmp(&b.method)));

    // Group completed raters' rankings by sample and method set; W is the mean
    // over groups with at least two raters.
    let mut groups: BTreeMap<GroupKey, Vec<(&str, &Vec<String>)>> = BTreeMap::new();
    for r in records {
        if let Some(s) = completed.get(r.session_id.as_str()) {
            let mut set = s.methods.clone();
            set.sort();
            groups
                .entry((r.corpus.clone(), r.sample_id.clone(), set))
                .or_default()
                .push((s.rater_id.as_str(), &r.ranking));
        }
    }
    let ws: Vec<f64> = groups
        .into_iter()
        .filter(|(_, rows)| rows.iter().map(|(rater, _)| *rater).collect::<BTreeSet<_>>().len() >= 2)
        .filter_map(|((_, _, set), rows)| {
            let orderings: Vec<Vec<&str>> = rows.iter().map(|(_, o)| o.iter().map(String::as_str).collect()).collect();
            let ranks = RankingSet::from_orderings(&set, &orderings).ok()?;
            kendalls_w(&ranks).ok()
        })
        .collect();
    let raters: BTreeSet<&str> = completed.values().map(|s| s.rater_id.as_str()).collect();

    Leaderboard {
        methods,
        kendalls_w: (!ws.is_empty()).then(|| ws.iter().sum::<f64>() / ws.len() as f64),
        completed_raters: raters.len(),
        total_rankings: records.len(),
        rating_sum: elo.rating_sum(),
    }
}

/// Recomputes standings offline from a log: a fresh Elo table fed every
/// stored ranking in order, independent of any running service.
pub fn replay_standings(events: &[Event]) -> Result<Leaderboard, ArenaError> {
    let mut elo = EloTable::with_defaults::<&str>(&[]);
    let mut sessions: BTreeMap<String, Session> = BTreeMap::new();
    let mut records = Vec::new();
    for event in events {
        match event {
            Event::SessionCreated {
                session_id,
                rater_id,
                corpus,
                methods,
                samples,
                labels,
                ..
            } => {
                for m in methods {
                    elo.add_method(m);
                }
                sessions.insert(
                    session_id.clone(),
                    Session {
                        rater_id: rater_id.clone(),
                        corpus: corpus.clone(),
                        methods: methods.clone(),
                        samples: samples.clone(),
                        labels: labels.clone(),
                        ranked: vec![false; samples.len()],
                    },
                );
            }
            Event::Ranking {
                session_id,
                corpus,
                sample_id,
                ranking,
                ..
            } => {
                let s = sessions
                    .get_mut(session_id)
                    .ok_or_else(|| ArenaError::Replay(format!("unknown session {session_id}")))?;
                if let Some(i) = s.samples.iter().position(|x| x == sample_id) {
                    s.ranked[i] = true;
                }
                elo.record_ranking(ranking).map_err(|e| ArenaError::Replay(e.to_string()))?;
                records.push(Record {
                    session_id: session_id.clone(),
                    corpus: corpus.clone(),
                    sample_id: sample_id.clone(),
                    ranking: ranking.clone(),
                });
            }
        }
    }
    let completed = sessions
        .iter()
        .filter(|(_, s)| s.is_complete())
        .map(|(id, s)| (id.as_str(), s))
        .collect();
    Ok(standings(&elo, &records, &completed))
}
