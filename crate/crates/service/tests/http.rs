use std::sync::Arc;
use std::time::Duration;

use axum::body::Body;
use axum::http::{header, Request, Response, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use searchsynth_core::corpus::Corpus;
use searchsynth_core::lang::evaluate_label;
use searchsynth_core::{run_session, Problem, ProblemConfig, Replay, SessionConfig};
use searchsynth_service::{router, ServiceConfig, SessionView, Store};

fn app_with(config: ServiceConfig) -> (Router, Arc<Store>) {
    let store = Arc::new(Store::new(Corpus::load_default().unwrap(), config));
    (router(store.clone()), store)
}

fn app() -> Router {
    app_with(ServiceConfig::default()).0
}

async fn send(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req
            .header(header::CONTENT_TYPE, "application/json")
            .body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    decode(resp).await
}

async fn decode(resp: Response<Body>) -> (StatusCode, Value) {
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let v = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap()
    };
    (status, v)
}

async fn create(app: &Router, body: Value) -> SessionView {
    let (status, v) = send(app, "POST", "/sessions", Some(body)).await;
    assert_eq!(status, StatusCode::CREATED, "{v}");
    serde_json::from_value(v).unwrap()
}

async fn answer(app: &Router, id: &str, body: Value) -> (StatusCode, Value) {
    send(app, "POST", &format!("/sessions/{id}/answers"), Some(body)).await
}

fn assert_error(v: &Value, code: &str) {
    assert_eq!(v["error"], code, "{v}");
    assert!(v["message"].as_str().is_some_and(|m| !m.is_empty()));
}

#[tokio::test]
async fn lmh27_walkthrough() {
    let app = app();
    let s = create(&app, json!({"spec": "lmh27"})).await;
    assert_eq!(s.outcomes, ["Low", "Middle", "High"]);
    assert_eq!(s.pending.as_ref().unwrap().query, vec![10, 18]);
    assert!((s.pending.as_ref().unwrap().entropy_bits - 3f64.log2()).abs() < 1e-9);
    assert_eq!(s.candidates, 27);
    assert!(s.rounds.is_empty());
    assert_eq!(s.status, "running");

    let (status, v) = answer(&app, &s.id, json!({"outcome": "Low"})).await;
    assert_eq!(status, StatusCode::OK, "{v}");
    let after: SessionView = serde_json::from_value(v).unwrap();
    assert_eq!(after.pending.unwrap().query, vec![4, 6]);
    assert_eq!(after.candidates, 9);
    assert_eq!(after.entropy_history.len(), 1);

    let (status, v) = send(&app, "GET", &format!("/sessions/{}", s.id), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["candidates"], 9);
    assert_eq!(v["rounds"][0]["outcome"], "Low");
}

#[tokio::test]
async fn unknown_things_are_404() {
    let app = app();
    let (status, v) = send(&app, "POST", "/sessions", Some(json!({"spec": "nonesuch"}))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_error(&v, "unknown_spec");
    let (status, v) = send(&app, "GET", "/sessions/feedface", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_error(&v, "unknown_session");
    let (status, v) = answer(&app, "feedface", json!({"outcome": "Low"})).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_error(&v, "unknown_session");
}

#[tokio::test]
async fn uploaded_specs_are_compiled_or_rejected() {
    let app = app();
    let (status, v) = send(
        &app,
        "POST",
        "/sessions",
        Some(json!({"source": "targets t in 1..4\nevaluate { return 1 +"})),
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_error(&v, "invalid_spec");

    let src = "targets t in 1..8\nqueries q in 1..8\noutcomes \"Below\", \"AtOrAbove\"\n\
               evaluate { if t < q { return \"Below\" }; return \"AtOrAbove\" }";
    let s = create(&app, json!({"source": src, "name": "halving"})).await;
    assert_eq!(s.spec, "halving");
    assert_eq!(s.candidates, 8);
    assert_eq!(s.pending.unwrap().query, vec![5]);
}

#[tokio::test]
async fn malformed_bodies_are_400() {
    let app = app();
    let req = Request::post("/sessions")
        .header(header::CONTENT_TYPE, "application/json")
        .body(Body::from("{not json"))
        .unwrap();
    let (status, v) = decode(app.clone().oneshot(req).await.unwrap()).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_error(&v, "bad_request");
    let (status, v) = send(&app, "POST", "/sessions", Some(json!({}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_error(&v, "bad_request");
}

#[tokio::test]
async fn undeclared_labels_are_422_and_change_nothing() {
    let app = app();
    let s = create(&app, json!({"spec": "lmh27"})).await;
    let (status, v) = answer(&app, &s.id, json!({"outcome": "Banana"})).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_error(&v, "unknown_outcome");
    let (_, v) = send(&app, "GET", &format!("/sessions/{}", s.id), None).await;
    assert_eq!(v["candidates"], 27);
    assert_eq!(v["rounds"].as_array().unwrap().len(), 0);
}

#[tokio::test]
async fn answers_for_a_stale_query_are_409() {
    let app = app();
    let s = create(&app, json!({"spec": "lmh27"})).await;
    let (status, v) = answer(&app, &s.id, json!({"outcome": "Low", "query": [4, 6]})).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_error(&v, "stale_query");
    let (status, _) = answer(&app, &s.id, json!({"outcome": "Low", "query": [10, 18]})).await;
    assert_eq!(status, StatusCode::OK);
}

#[tokio::test]
async fn answering_after_convergence_is_409() {
    let app = app();
    let s = create(
        &app,
        json!({"spec": "lowhigh5", "mode": "hidden-target-demo", "target": [2]}),
    )
    .await;
    let mut last = Value::Null;
    for _ in 0..10 {
        let (status, v) = answer(&app, &s.id, json!({})).await;
        if status == StatusCode::CONFLICT {
            assert_error(&v, "no_pending_query");
            break;
        }
        assert_eq!(status, StatusCode::OK, "{v}");
        last = v;
    }
    assert_eq!(last["status"], "converged");
    assert_eq!(last["final_candidates"], json!([[2]]));
    assert!(last["pending"].is_null());
    let (status, v) = answer(&app, &s.id, json!({"outcome": "Low"})).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_error(&v, "no_pending_query");
}

#[tokio::test]
async fn movie_ranking_converges_to_the_consistent_permutation() {
    let app = app();
    let s = create(&app, json!({"spec": "movierank3"})).await;
    assert_eq!(s.outcomes, ["First", "Second"]);
    let mut view = s.clone();
    let mut answers = 0;
    // The viewer prefers movie 1, then 2, then 3.
    while let Some(p) = view.pending.clone() {
        let label = if p.query[0] < p.query[1] {
            "First"
        } else {
            "Second"
        };
        let (status, v) = answer(&app, &s.id, json!({"outcome": label})).await;
        assert_eq!(status, StatusCode::OK, "{v}");
        view = serde_json::from_value(v).unwrap();
        answers += 1;
    }
    assert_eq!(view.status, "converged");
    assert_eq!(view.final_candidates, Some(vec![vec![1, 2, 3]]));
    assert!(answers <= 3, "{answers} answers");
}

#[tokio::test]
async fn contradictory_answers_report_an_inconsistency() {
    let app = app();
    let s = create(&app, json!({"spec": "smm2"})).await;
    let mut view = s.clone();
    // Answer consistently with (3, 5) until some outcome has no candidate,
    // then give that outcome.
    let impossible = loop {
        let p = view
            .pending
            .clone()
            .expect("an impossible outcome turns up first");
        if let Some(o) = p.counts.iter().position(|&c| c == 0) {
            break view.outcomes[o].clone();
        }
        let spec = Corpus::load_default()
            .unwrap()
            .spec_by_name("smm2")
            .unwrap();
        let label = evaluate_label(&spec, &p.query, &[3, 5])
            .unwrap()
            .to_string();
        let (status, v) = answer(&app, &s.id, json!({"outcome": label})).await;
        assert_eq!(status, StatusCode::OK);
        view = serde_json::from_value(v).unwrap();
    };
    let answered = view.rounds.len();
    let (status, v) = answer(&app, &s.id, json!({"outcome": impossible})).await;
    assert_eq!(status, StatusCode::OK, "{v}");
    assert_eq!(v["status"], "inconsistent");
    let round = v["inconsistency"]["round"].as_u64().unwrap() as usize;
    assert!((1..=answered + 1).contains(&round));
    assert!(!v["inconsistency"]["alternatives"]
        .as_array()
        .unwrap()
        .is_empty());
    let (status, v) = answer(&app, &s.id, json!({"outcome": "r0"})).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_error(&v, "no_pending_query");
}

#[tokio::test]
async fn demo_mode_checks_its_target() {
    let app = app();
    let (status, v) = send(
        &app,
        "POST",
        "/sessions",
        Some(json!({"spec": "lmh27", "mode": "hidden-target-demo", "target": [99]})),
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_error(&v, "invalid_target");
    let (status, v) = send(
        &app,
        "POST",
        "/sessions",
        Some(json!({"spec": "lmh27", "target": [5]})),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_error(&v, "bad_request");
    let (status, v) = answer(&app, "x", json!({"outcome": "Low", "extra": 1})).await;
    assert_eq!(status, StatusCode::NOT_FOUND, "{v}");
}

#[tokio::test]
async fn fresh_sessions_report_every_target() {
    let app = app();
    let s = create(&app, json!({"spec": "smm2"})).await;
    assert_eq!(s.candidates, 36);
    assert!(s.rounds.is_empty());
    assert!(s.final_candidates.is_none());
}

#[tokio::test]
async fn expired_sessions_are_404() {
    let (app, store) = app_with(ServiceConfig {
        ttl: Duration::from_millis(100),
        ..Default::default()
    });
    let s = create(&app, json!({"spec": "lmh27"})).await;
    let (status, _) = send(&app, "GET", &format!("/sessions/{}", s.id), None).await;
    assert_eq!(status, StatusCode::OK);
    tokio::time::sleep(Duration::from_millis(250)).await;
    let (status, v) = send(&app, "GET", &format!("/sessions/{}", s.id), None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_error(&v, "unknown_session");
    assert!(store.is_empty());

    let other = create(&app, json!({"spec": "lmh27"})).await;
    tokio::time::sleep(Duration::from_millis(250)).await;
    assert_eq!(store.evict_expired(), 1);
    let (status, _) = send(&app, "GET", &format!("/sessions/{}", other.id), None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn specs_are_listed() {
    let app = app();
    let (status, v) = send(&app, "GET", "/specs", None).await;
    assert_eq!(status, StatusCode::OK);
    let specs = v.as_array().unwrap();
    assert!(specs.len() >= 30);
    let lmh = specs.iter().find(|s| s["name"] == "lmh27").unwrap();
    assert_eq!(lmh["outcomes"], json!(["Low", "Middle", "High"]));
    assert_eq!(lmh["query_dim"], 2);
    assert_eq!(lmh["targets"], 27);
}

#[tokio::test]
async fn cors_headers_are_sent() {
    let app = app();
    let req = Request::get("/specs")
        .header(header::ORIGIN, "http://localhost:5173")
        .body(Body::empty())
        .unwrap();
    let resp = app.oneshot(req).await.unwrap();
    assert_eq!(resp.headers()[header::ACCESS_CONTROL_ALLOW_ORIGIN], "*");
}

/// Answers given over HTTP, replayed offline, reproduce the same queries.
#[tokio::test]
async fn offline_replay_reproduces_the_served_queries() {
    let app = app();
    let corpus = Corpus::load_default().unwrap();
    for (name, targets) in [
        ("lmh27", vec![vec![1], vec![5], vec![14], vec![27]]),
        ("smm2", vec![vec![1, 1], vec![3, 6], vec![6, 2]]),
        ("movierank4", vec![vec![4, 3, 2, 1], vec![2, 4, 1, 3]]),
    ] {
        let spec = corpus.spec_by_name(name).unwrap();
        let problem = Arc::new(Problem::compile(spec.clone(), &ProblemConfig::default()).unwrap());
        for t in targets {
            let s = create(&app, json!({"spec": name})).await;
            let mut view = s.clone();
            let mut served = Vec::new();
            let mut labels = Vec::new();
            while let Some(p) = view.pending.clone() {
                let label = evaluate_label(&spec, &p.query, &t).unwrap().to_string();
                let (status, v) =
                    answer(&app, &s.id, json!({"outcome": label, "query": p.query})).await;
                assert_eq!(status, StatusCode::OK);
                served.push(p.query);
                labels.push(label);
                view = serde_json::from_value(v).unwrap();
            }
            assert_eq!(view.final_candidates, Some(vec![t.clone()]));
            let offline = run_session(
                problem.clone(),
                &mut Replay::new(labels),
                &SessionConfig::default(),
            )
            .unwrap();
            let replayed: Vec<_> = offline
                .transcript()
                .iter()
                .map(|r| r.query.clone())
                .collect();
            assert_eq!(replayed, served, "{name} {t:?}");
        }
    }
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_answers_to_one_session_admit_exactly_one() {
    let app = app();
    for _ in 0..5 {
        let s = create(&app, json!({"spec": "smm3"})).await;
        let q = s.pending.unwrap().query;
        let posts: Vec<_> = ["r0", "r1", "r2", "r3", "r0", "r1", "r2", "r3"]
            .into_iter()
            .map(|label| {
                let app = app.clone();
                let uri = format!("/sessions/{}/answers", s.id);
                let body = json!({"outcome": label, "query": q}).to_string();
                tokio::spawn(async move {
                    let req = Request::post(uri)
                        .header(header::CONTENT_TYPE, "application/json")
                        .body(Body::from(body))
                        .unwrap();
                    app.oneshot(req).await.unwrap().status()
                })
            })
            .collect();
        let mut ok = 0;
        for p in posts {
            match p.await.unwrap() {
                StatusCode::OK => ok += 1,
                StatusCode::CONFLICT => {}
                other => panic!("unexpected {other}"),
            }
        }
        assert_eq!(ok, 1);
        let (_, v) = send(&app, "GET", &format!("/sessions/{}", s.id), None).await;
        assert_eq!(v["rounds"].as_array().unwrap().len(), 1);
    }
}

#[tokio::test]
async fn snapshots_restore_sessions() {
    let dir = tempfile::tempdir().unwrap();
    let config = ServiceConfig {
        snapshot_dir: Some(dir.path().to_path_buf()),
        ..Default::default()
    };
    let (app, _) = app_with(config.clone());
    let s = create(&app, json!({"spec": "lmh27"})).await;
    let (_, v) = answer(&app, &s.id, json!({"outcome": "Low"})).await;
    let before: SessionView = serde_json::from_value(v).unwrap();
    assert!(dir.path().join(format!("{}.json", s.id)).exists());

    let (app2, store2) = app_with(config);
    assert_eq!(store2.restore(), 1);
    let (status, v) = send(&app2, "GET", &format!("/sessions/{}", s.id), None).await;
    assert_eq!(status, StatusCode::OK);
    let after: SessionView = serde_json::from_value(v).unwrap();
    assert_eq!(after.pending.unwrap().query, before.pending.unwrap().query);
    assert_eq!(after.rounds, before.rounds);
    assert_eq!(after.candidates, 9);
    assert_eq!(after.created_unix, before.created_unix);
}
