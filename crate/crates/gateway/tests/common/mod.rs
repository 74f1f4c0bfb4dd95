#![allow(dead_code)]

use std::path::PathBuf;
use std::time::Duration;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::response::Response;
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;
use vigen_core::database::load_manifest;
use vigen_core::engine::{load_steps, AnimationParams};
use vigen_core::extraction::{Lexicon, RuleExtractor, RuleSet};
use vigen_gateway::{Gateway, GatewayConfig, SessionSetup};

pub fn data(file: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/pneumatic").join(file)
}

pub fn setup() -> SessionSetup {
    let lexicon = Lexicon::load(data("lexicon.json")).unwrap();
    let rules = RuleSet::load(data("extractor.json")).unwrap();
    SessionSetup {
        db: load_manifest(data("manifest.json")).unwrap(),
        steps: load_steps(data("steps.txt")).unwrap(),
        lexicon: lexicon.clone(),
        extractor: Box::new(RuleExtractor::new(lexicon, rules)),
        params: AnimationParams::default(),
    }
}

pub fn pneumatic() -> Gateway {
    pneumatic_with(GatewayConfig::default())
}

pub fn pneumatic_with(config: GatewayConfig) -> Gateway {
    Gateway::with_session(config, setup())
}

pub async fn send(gw: &Gateway, method: &str, uri: &str, content_type: Option<&str>, body: &str) -> Response {
    let mut req = Request::builder().method(method).uri(uri);
    if let Some(ct) = content_type {
        req = req.header("content-type", ct);
    }
    gw.router().oneshot(req.body(Body::from(body.to_owned())).unwrap()).await.unwrap()
}

pub async fn call(
    gw: &Gateway,
    method: &str,
    uri: &str,
    content_type: Option<&str>,
    body: &str,
) -> (StatusCode, Value) {
    let resp = send(gw, method, uri, content_type, body).await;
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap())
}

pub async fn get(gw: &Gateway, uri: &str) -> (StatusCode, Value) {
    call(gw, "GET", uri, None, "").await
}

pub async fn post(gw: &Gateway, uri: &str) -> (StatusCode, Value) {
    call(gw, "POST", uri, None, "").await
}

pub async fn post_text(gw: &Gateway, body: &str) -> (StatusCode, Value) {
    call(gw, "POST", "/extraction", Some("text/plain"), body).await
}

/// Reads newline-delimited JSON from a streaming body.
pub struct Lines {
    body: Body,
    buf: Vec<u8>,
}

impl Lines {
    pub fn new(resp: Response) -> Self {
        Self { body: resp.into_body(), buf: Vec::new() }
    }

    /// Next line, `Ok(None)` at end of stream, `Err(())` if nothing arrives in time.
    pub async fn next(&mut self, wait: Duration) -> Result<Option<Value>, ()> {
        loop {
            if let Some(pos) = self.buf.iter().position(|&b| b == b'\n') {
                let line: Vec<u8> = self.buf.drain(..=pos).collect();
                return Ok(Some(serde_json::from_slice(&line).unwrap()));
            }
            match tokio::time::timeout(wait, self.body.frame()).await {
                Err(_) => return Err(()),
                Ok(None) => return Ok(None),
                Ok(Some(frame)) => {
                    if let Ok(data) = frame.unwrap().into_data() {
                        self.buf.extend_from_slice(&data);
                    }
                }
            }
        }
    }
}

/// Applies event deltas to a scene document by hand, keyed on (name, index).
pub fn fold(events: &[Value]) -> Value {
    let mut instances: std::collections::BTreeMap<(String, u64), Value> = Default::default();
    let mut scene = serde_json::json!({});
    for e in events {
        assert_eq!(e["event"], "delta");
        for inst in e["changed"].as_array().unwrap() {
            let key = (inst["name"].as_str().unwrap().to_owned(), inst["index"].as_u64().unwrap());
            instances.insert(key, inst.clone());
        }
        scene["revision"] = e["revision"].clone();
        scene["step_cursor"] = e["step_cursor"].clone();
        scene["current_clip"] = e["clip"].clone();
        scene["instruction"] = e["instruction"].clone();
    }
    scene["instances"] = Value::Array(instances.into_values().collect());
    scene
}
