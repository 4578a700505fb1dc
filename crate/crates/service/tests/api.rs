use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use segdesc_core::io::{bundled, ReportDocument};
use segdesc_service::{router, SessionStore};
use serde_json::Value;
use tower::ServiceExt;

fn app() -> Router {
    router(Arc::new(SessionStore::new()))
}

async fn call(app: &Router, method: &str, uri: &str, body: &str) -> (StatusCode, Vec<u8>) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(Body::from(body.to_string()))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    (status, resp.into_body().collect().await.unwrap().to_bytes().to_vec())
}

fn json(bytes: &[u8]) -> Value {
    serde_json::from_slice(bytes).unwrap()
}

async fn create(app: &Router, dataset: &str) -> String {
    let (status, body) = call(app, "POST", "/sessions", bundled(dataset).unwrap()).await;
    assert_eq!(status, StatusCode::CREATED);
    let v = json(&body);
    assert_eq!(v["revision"], 0);
    v["id"].as_str().unwrap().to_string()
}

#[tokio::test]
async fn two_creates_give_distinct_ids() {
    let app = app();
    let a = create(&app, "sales-manager-iter2").await;
    let b = create(&app, "sales-manager-iter2").await;
    assert_ne!(a, b);
    let (status, body) = call(&app, "GET", &format!("/sessions/{a}"), "").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(json(&body)["comparisons"], serde_json::json!(["a6~a9", "a9>a8", "a8>a7"]));
}

#[tokio::test]
async fn malformed_epsilon_names_the_field() {
    let doc = bundled("sales-manager").unwrap().replace("\"0.01\"", "\"bogus\"");
    let (status, body) = call(&app(), "POST", "/sessions", &doc).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(json(&body)["location"].as_str().unwrap().contains("epsilon"));
}

#[tokio::test]
async fn revision_loop_flips_the_verdict() {
    let app = app();
    let id = create(&app, "sales-manager-iter1").await;
    let uri = format!("/sessions/{id}/comparisons");

    let (status, body) = call(&app, "POST", &uri, "{}").await;
    assert_eq!(status, StatusCode::OK);
    let v = json(&body);
    assert_eq!((v["revision"].clone(), v["report"]["feasible"].clone()), (0.into(), false.into()));

    let (status, _) = call(&app, "POST", &uri, r#"{"add":["a4>a4"]}"#).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = call(&app, "POST", &uri, r#"{"add":["a4>zz"]}"#).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let (status, body) = call(&app, "POST", &uri, r#"{"remove":["a8>a14","a14>a7"]}"#).await;
    assert_eq!(status, StatusCode::OK);
    let v = json(&body);
    assert_eq!((v["revision"].clone(), v["report"]["feasible"].clone()), (1.into(), true.into()));
}

#[tokio::test]
async fn analyses_are_stored_and_replayed() {
    let app = app();
    let id = create(&app, "sales-manager-iter2").await;
    let uri = format!("/sessions/{id}/analyses");

    let (status, body) = call(&app, "POST", &uri, r#"{"kind":"reduct","pair":["a14","a1"]}"#).await;
    assert_eq!(status, StatusCode::OK);
    let report = ReportDocument::from_json(std::str::from_utf8(&body).unwrap()).unwrap();
    assert_eq!(report.reducts, [vec!["a6~a9".to_string()]]);

    let (status, body) = call(&app, "POST", &uri, r#"{"kind":"reduct","pair":["a1","a14"]}"#).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(json(&body)["error"].as_str().unwrap().contains("relation not necessary"));

    let (status, first) = call(&app, "POST", &uri, r#"{"kind":"relations","possible":true}"#).await;
    assert_eq!(status, StatusCode::OK);
    let (status, again) = call(&app, "GET", &format!("{uri}/1"), "").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(first, again);
    let (status, _) = call(&app, "GET", &format!("{uri}/7"), "").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = call(&app, "POST", "/sessions/nope/analyses", r#"{"kind":"bounds"}"#).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn cached_and_fresh_answers_agree() {
    let app = app();
    let id = create(&app, "sales-manager-iter2").await;
    let uri = format!("/sessions/{id}/analyses");
    let (_, first) = call(&app, "POST", &uri, r#"{"kind":"bounds"}"#).await;
    let (_, second) = call(&app, "POST", &uri, r#"{"kind":"bounds"}"#).await;
    assert_eq!(first, second);
    let other = create(&app, "sales-manager-iter2").await;
    let (_, fresh) = call(&app, "POST", &format!("/sessions/{other}/analyses"), r#"{"kind":"bounds"}"#).await;
    assert_eq!(first, fresh);
}
