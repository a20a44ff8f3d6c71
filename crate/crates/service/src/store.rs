//! Session storage: live sessions in memory, optional JSON snapshots on disk.

use std::fs;
use std::path::PathBuf;
use std::sync::{Arc, Mutex as StdMutex};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use dashmap::DashMap;
use serde::{Deserialize, Serialize};
use tokio::sync::Mutex;

use searchsynth_core::corpus::Corpus;
use searchsynth_core::transcript::Transcript;
use searchsynth_core::{
    parse_spec, Point, Problem, ProblemConfig, SessionConfig, SessionState, SessionStatus,
    SynthError,
};

use crate::error::ApiError;

/// Sessions idle for longer than this are evicted.
pub const DEFAULT_TTL: Duration = Duration::from_secs(24 * 60 * 60);

const SNAPSHOT_SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// A person answers every query.
    #[default]
    HumanOracle,
    /// The service holds a target and may answer on the player's behalf.
    HiddenTargetDemo,
}

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub ttl: Duration,
    pub snapshot_dir: Option<PathBuf>,
    /// Allowed CORS origin; any origin when unset.
    pub cors_origin: Option<String>,
    pub problem: ProblemConfig,
    pub session: SessionConfig,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            ttl: DEFAULT_TTL,
            snapshot_dir: None,
            cors_origin: None,
            problem: ProblemConfig::default(),
            session: SessionConfig::default(),
        }
    }
}

/// Where a session's specification came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpecSource {
    Corpus(String),
    Uploaded { name: String, source: String },
}

impl SpecSource {
    pub fn name(&self) -> &str {
        match self {
            SpecSource::Corpus(name) => name,
            SpecSource::Uploaded { name, .. } => name,
        }
    }
}

pub struct Session {
    pub id: String,
    pub spec: SpecSource,
    pub mode: Mode,
    pub target: Option<Point>,
    pub created: SystemTime,
    last_activity: StdMutex<SystemTime>,
    /// Mutating requests take this with `try_lock`; a second writer gets 409.
    pub state: Arc<Mutex<SessionState>>,
}

impl Session {
    pub fn touch(&self) {
        *self.last_activity.lock().unwrap() = SystemTime::now();
    }

    pub fn last_activity(&self) -> SystemTime {
        *self.last_activity.lock().unwrap()
    }

    fn expired(&self, ttl: Duration) -> bool {
        SystemTime::now()
            .duration_since(self.last_activity())
            .is_ok_and(|idle| idle > ttl)
    }
}

pub fn unix_secs(t: SystemTime) -> u64 {
    t.duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

/// What is written to disk after every mutation. Sessions are restored by
/// replaying `answers`, which reproduces the state exactly.
#[derive(Debug, Serialize, Deserialize)]
pub struct Snapshot {
    pub schema: u32,
    pub id: String,
    pub spec: SpecSource,
    pub mode: Mode,
    pub target: Option<Point>,
    pub seed: u64,
    pub sample_budget: usize,
    pub max_rounds: Option<usize>,
    pub created_unix: u64,
    pub answers: Vec<(Point, String)>,
    pub transcript: Transcript,
}

pub struct Store {
    pub config: ServiceConfig,
    pub corpus: Arc<Corpus>,
    problems: DashMap<String, Arc<Problem>>,
    sessions: DashMap<String, Arc<Session>>,
}

impl Store {
    pub fn new(corpus: Corpus, config: ServiceConfig) -> Store {
        Store {
            config,
            corpus: Arc::new(corpus),
            problems: DashMap::new(),
            sessions: DashMap::new(),
        }
    }

    /// Compiles a corpus entry once and shares it between sessions.
    pub fn corpus_problem(&self, name: &str) -> Result<Arc<Problem>, ApiError> {
        if let Some(p) = self.problems.get(name) {
            return Ok(p.clone());
        }
        let spec = self
            .corpus
            .spec_by_name(name)
            .map_err(|_| ApiError::UnknownSpec(name.to_string()))?;
        let p = Arc::new(
            Problem::compile(spec, &self.config.problem)
                .map_err(|e| ApiError::InvalidSpec(e.to_string()))?,
        );
        self.problems.insert(name.to_string(), p.clone());
        Ok(p)
    }

    pub fn problem_for(&self, spec: &SpecSource) -> Result<Arc<Problem>, ApiError> {
        match spec {
            SpecSource::Corpus(name) => self.corpus_problem(name),
            SpecSource::Uploaded { name, source } => {
                let parsed =
                    parse_spec(name, source).map_err(|e| ApiError::InvalidSpec(e.to_string()))?;
                Problem::compile(parsed, &self.config.problem)
                    .map(Arc::new)
                    .map_err(|e| ApiError::InvalidSpec(e.to_string()))
            }
        }
    }

    pub fn insert(&self, session: Arc<Session>) {
        self.sessions.insert(session.id.clone(), session);
    }

    /// The live session `id`; expired sessions are evicted on the way.
    pub fn get(&self, id: &str) -> Result<Arc<Session>, ApiError> {
        let s = self
            .sessions
            .get(id)
            .map(|s| s.clone())
            .ok_or_else(|| ApiError::UnknownSession(id.to_string()))?;
        if s.expired(self.config.ttl) {
            self.remove(id);
            return Err(ApiError::UnknownSession(id.to_string()));
        }
        s.touch();
        Ok(s)
    }

    fn remove(&self, id: &str) {
        self.sessions.remove(id);
        if let Some(dir) = &self.config.snapshot_dir {
            let _ = fs::remove_file(dir.join(format!("{id}.json")));
        }
    }

    pub fn len(&self) -> usize {
        self.sessions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sessions.is_empty()
    }

    /// Drops every session idle for longer than the TTL. Returns how many.
    pub fn evict_expired(&self) -> usize {
        let ttl = self.config.ttl;
        let stale: Vec<String> = self
            .sessions
            .iter()
            .filter(|s| s.expired(ttl))
            .map(|s| s.id.clone())
            .collect();
        for id in &stale {
            self.remove(id);
        }
        stale.len()
    }

    /// Writes the snapshot of `session` if a snapshot directory is set.
    /// Failures are reported but never fail the request.
    pub fn save(&self, session: &Session, state: &SessionState) {
        let Some(dir) = &self.config.snapshot_dir else {
            return;
        };
        let spec = state.problem().spec();
        let snap = Snapshot {
            schema: SNAPSHOT_SCHEMA,
            id: session.id.clone(),
            spec: session.spec.clone(),
            mode: session.mode,
            target: session.target.clone(),
            seed: state.config().select.seed,
            sample_budget: state.config().select.sample_budget,
            max_rounds: state.config().max_rounds,
            created_unix: unix_secs(session.created),
            answers: state
                .answers()
                .into_iter()
                .map(|(q, o)| (q, spec.outcomes[o].clone()))
                .collect(),
            transcript: Transcript::from_session(state, session.target.as_ref(), false),
        };
        let path = dir.join(format!("{}.json", session.id));
        let tmp = path.with_extension("json.tmp");
        let written = fs::create_dir_all(dir)
            .and_then(|_| fs::write(&tmp, serde_json::to_vec_pretty(&snap).unwrap()))
            .and_then(|_| fs::rename(&tmp, &path));
        if let Err(e) = written {
            eprintln!("snapshot {}: {e}", path.display());
        }
    }

    /// Rebuilds every session found in the snapshot directory. Returns the
    /// number restored; unreadable snapshots are skipped with a message.
    pub fn restore(&self) -> usize {
        let Some(dir) = &self.config.snapshot_dir else {
            return 0;
        };
        let Ok(listing) = fs::read_dir(dir) else {
            return 0;
        };
        let mut n = 0;
        for entry in listing.flatten() {
            let path = entry.path();
            if path.extension().is_none_or(|e| e != "json") {
                continue;
            }
            match self.restore_one(&path) {
                Ok(()) => n += 1,
                Err(e) => eprintln!("skipping snapshot {}: {e}", path.display()),
            }
        }
        n
    }

    fn restore_one(&self, path: &std::path::Path) -> Result<(), String> {
        let text = fs::read_to_string(path).map_err(|e| e.to_string())?;
        let snap: Snapshot = serde_json::from_str(&text).map_err(|e| e.to_string())?;
        if snap.schema != SNAPSHOT_SCHEMA {
            return Err(format!("unsupported schema {}", snap.schema));
        }
        let problem = self.problem_for(&snap.spec).map_err(|e| e.to_string())?;
        let mut config = self.config.session.clone();
        config.select.seed = snap.seed;
        config.select.sample_budget = snap.sample_budget;
        config.max_rounds = snap.max_rounds;
        let mut state = SessionState::new(problem, config).map_err(|e| e.to_string())?;
        for (q, label) in &snap.answers {
            match state.observe_label(q, label) {
                Ok(()) | Err(SynthError::Inconsistent(_)) => {}
                Err(e) => return Err(e.to_string()),
            }
        }
        debug_assert!(state.status() != SessionStatus::Running || state.pending().is_some());
        let created = UNIX_EPOCH + Duration::from_secs(snap.created_unix);
        self.insert(Arc::new(Session::new(
            snap.id,
            snap.spec,
            snap.mode,
            snap.target,
            created,
            state,
        )));
        Ok(())
    }
}

impl Session {
    pub fn new(
        id: String,
        spec: SpecSource,
        mode: Mode,
        target: Option<Point>,
        created: SystemTime,
        state: SessionState,
    ) -> Session {
        Session {
            id,
            spec,
            mode,
            target,
            created,
            last_activity: StdMutex::new(SystemTime::now()),
            state: Arc::new(Mutex::new(state)),
        }
    }
}

/// A fresh opaque session id.
pub fn new_id() -> String {
    format!("{:032x}", rand::random::<u128>())
}
