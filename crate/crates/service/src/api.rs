//! Request and response bodies, and the handlers behind them.

use std::sync::Arc;
use std::time::SystemTime;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::Json;
use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use searchsynth_core::synth::InconsistencyReport;
use searchsynth_core::transcript::{Transcript, TranscriptRound};
use searchsynth_core::{HiddenTarget, Oracle, Point, SessionState, SessionStatus, SynthError};

use crate::error::ApiError;
use crate::store::{new_id, unix_secs, Mode, Session, SpecSource, Store};

pub type AppState = Arc<Store>;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    /// Name of a corpus entry. Exactly one of `spec` and `source` is given.
    pub spec: Option<String>,
    /// Program text of an uploaded specification.
    pub source: Option<String>,
    /// Name for an uploaded specification.
    pub name: Option<String>,
    #[serde(default)]
    pub mode: Mode,
    /// Hidden target for demo mode; drawn with `seed` when absent.
    pub target: Option<Point>,
    pub seed: Option<u64>,
    pub sample_budget: Option<usize>,
    pub max_rounds: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Answer {
    /// Outcome label. May be omitted in demo mode, where the hidden target
    /// answers.
    pub outcome: Option<String>,
    /// The query being answered. When given it must equal the pending query.
    pub query: Option<Point>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PendingQuery {
    pub query: Point,
    pub entropy_bits: f64,
    pub counts: Vec<u64>,
    pub sampled: bool,
}

/// Everything a client needs to render a session.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SessionView {
    pub id: String,
    pub spec: String,
    pub mode: Mode,
    pub status: String,
    pub outcomes: Vec<String>,
    pub pending: Option<PendingQuery>,
    pub candidates: usize,
    /// The surviving targets once the session has stopped.
    pub final_candidates: Option<Vec<Point>>,
    pub rounds: Vec<TranscriptRound>,
    pub entropy_history: Vec<f64>,
    pub inconsistency: Option<InconsistencyReport>,
    pub target: Option<Point>,
    pub created_unix: u64,
    pub last_activity_unix: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpecSummary {
    pub name: String,
    pub family: String,
    pub outcomes: Vec<String>,
    pub target_dim: usize,
    pub query_dim: usize,
    pub targets: u64,
    pub queries: u64,
    pub slow: bool,
}

fn parse_body<T: DeserializeOwned + Default>(body: &Bytes) -> Result<T, ApiError> {
    if body.iter().all(u8::is_ascii_whitespace) {
        return Ok(T::default());
    }
    serde_json::from_slice(body).map_err(|e| ApiError::BadRequest(e.to_string()))
}

pub fn session_view(session: &Session, state: &SessionState) -> SessionView {
    let t = Transcript::from_session(state, session.target.as_ref(), false);
    let running = state.status() == SessionStatus::Running;
    SessionView {
        id: session.id.clone(),
        spec: session.spec.name().to_string(),
        mode: session.mode,
        status: t.status,
        outcomes: t.outcomes,
        pending: state.pending().map(|p| PendingQuery {
            query: p.query.clone(),
            entropy_bits: p.entropy_bits,
            counts: p.distribution.counts.clone(),
            sampled: state.sampled(),
        }),
        candidates: state.candidates().len(),
        final_candidates: (!running).then_some(t.final_candidates),
        entropy_history: t.rounds.iter().map(|r| r.entropy_bits).collect(),
        rounds: t.rounds,
        inconsistency: t.inconsistency,
        target: session.target.clone(),
        created_unix: unix_secs(session.created),
        last_activity_unix: unix_secs(session.last_activity()),
    }
}

async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, ApiError> + Send + 'static,
) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))?
}

pub async fn list_specs(State(app): State<AppState>) -> Result<Json<Vec<SpecSummary>>, ApiError> {
    let corpus = app.corpus.clone();
    let specs = blocking(move || {
        corpus
            .entries()
            .iter()
            .map(|e| {
                let spec = corpus
                    .spec(e)
                    .map_err(|err| ApiError::Internal(err.to_string()))?;
                Ok(SpecSummary {
                    name: e.name.clone(),
                    family: e.family.clone(),
                    outcomes: spec.outcomes.clone(),
                    target_dim: spec.target_dim(),
                    query_dim: spec.query_dim(),
                    targets: e.expected.targets,
                    queries: e.expected.queries,
                    slow: e.slow,
                })
            })
            .collect::<Result<Vec<_>, ApiError>>()
    })
    .await?;
    Ok(Json(specs))
}

pub async fn create_session(
    State(app): State<AppState>,
    body: Bytes,
) -> Result<(StatusCode, Json<SessionView>), ApiError> {
    let req: CreateSession = parse_body(&body)?;
    let spec = match (req.spec, req.source) {
        (Some(name), None) => SpecSource::Corpus(name),
        (None, Some(source)) => SpecSource::Uploaded {
            name: req.name.unwrap_or_else(|| "uploaded".to_string()),
            source,
        },
        _ => {
            return Err(ApiError::BadRequest(
                "give exactly one of `spec` and `source`".to_string(),
            ))
        }
    };
    let mut config = app.config.session.clone();
    if let Some(seed) = req.seed {
        config.select.seed = seed;
    }
    if let Some(budget) = req.sample_budget {
        config.select.sample_budget = budget;
    }
    if req.max_rounds.is_some() {
        config.max_rounds = req.max_rounds;
    }
    let (mode, wanted) = (req.mode, req.target);
    let store = app.clone();
    let view = blocking(move || {
        let problem = store.problem_for(&spec)?;
        let target = match (mode, wanted) {
            (Mode::HumanOracle, None) => None,
            (Mode::HumanOracle, Some(_)) => {
                return Err(ApiError::BadRequest(
                    "a target is only accepted in hidden-target-demo mode".to_string(),
                ))
            }
            (Mode::HiddenTargetDemo, Some(t)) => {
                if problem.targets().binary_search(&t).is_err() {
                    return Err(ApiError::InvalidTarget(t));
                }
                Some(t)
            }
            (Mode::HiddenTargetDemo, None) => {
                let mut rng = ChaCha8Rng::seed_from_u64(config.select.seed);
                problem.targets().choose(&mut rng).cloned()
            }
        };
        let state =
            SessionState::new(problem, config).map_err(|e| ApiError::Internal(e.to_string()))?;
        let session = Arc::new(Session::new(
            new_id(),
            spec,
            mode,
            target,
            SystemTime::now(),
            state,
        ));
        let state = session.state.try_lock().expect("fresh session is unshared");
        store.save(&session, &state);
        let v = session_view(&session, &state);
        drop(state);
        store.insert(session);
        Ok(v)
    })
    .await?;
    Ok((StatusCode::CREATED, Json(view)))
}

pub async fn get_session(
    State(app): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<SessionView>, ApiError> {
    let session = app.get(&id)?;
    let state = session.state.lock().await;
    Ok(Json(session_view(&session, &state)))
}

fn status_name(s: SessionStatus) -> &'static str {
    match s {
        SessionStatus::Running => "running",
        SessionStatus::Converged => "converged",
        SessionStatus::Inconsistent => "inconsistent",
    }
}

pub async fn post_answer(
    State(app): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<SessionView>, ApiError> {
    let session = app.get(&id)?;
    let answer: Answer = parse_body(&body)?;
    let mut state = session
        .state
        .clone()
        .try_lock_owned()
        .map_err(|_| ApiError::Busy)?;
    let pending = match state.pending() {
        Some(p) if state.status() == SessionStatus::Running => p.query.clone(),
        _ => return Err(ApiError::NoPendingQuery(status_name(state.status()))),
    };
    let spec = state.problem().spec();
    let outcome = match (answer.outcome, &session.target) {
        (Some(label), _) => spec
            .outcome_index(&label)
            .ok_or_else(|| ApiError::UnknownOutcome {
                label,
                declared: spec.outcomes.clone(),
            })?,
        (None, Some(t)) => HiddenTarget::new(t.clone())
            .answer(spec, &pending)
            .map_err(|e| ApiError::Internal(e.to_string()))?,
        (None, None) => {
            return Err(ApiError::BadRequest("`outcome` is required".to_string()));
        }
    };
    if let Some(q) = answer.query {
        if q != pending {
            return Err(ApiError::StaleQuery {
                answered: q,
                pending,
            });
        }
    }
    let store = app.clone();
    let view = blocking(move || {
        match state.observe(&pending, outcome) {
            // An inconsistent answer is recorded and reported in the view.
            Ok(()) | Err(SynthError::Inconsistent(_)) => {}
            Err(e) => return Err(ApiError::Internal(e.to_string())),
        }
        store.save(&session, &state);
        Ok(session_view(&session, &state))
    })
    .await?;
    Ok(Json(view))
}
