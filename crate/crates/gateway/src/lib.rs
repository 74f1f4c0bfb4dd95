//! HTTP gateway around one training session.
//!
//! All mutations (`POST /extraction`, `POST /session/next`,
//! `POST /session/previous`) go through a bounded queue to a single owner
//! thread. Each committed mutation bumps the revision, is appended to the
//! event log and fanned out to `GET /events` subscribers. Reads
//! (`GET /scene`, `/steps`, `/manifest`) never wait on the queue.

mod body;
mod owner;

use std::future::Future;
use std::sync::mpsc::{self, SyncSender, TrySendError};
use std::sync::{Arc, OnceLock, RwLock};
use std::thread;

use axum::body::{Body, Bytes};
use axum::extract::{Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures_util::stream::{self, StreamExt};
use serde::Deserialize;
use serde_json::{json, Value};
use tokio::sync::broadcast::error::RecvError;
use tokio::sync::{broadcast, oneshot, watch};
use vigen_core::engine::{AnimationParams, TrainingSession};
use vigen_core::extraction::{parse_llm_output, resolve_names, Extractor, Lexicon, RawTriple};
use vigen_core::model::{AssemblyStep, ExtractionResult};
use vigen_core::Database;

pub use body::{ApiError, Delta, Mutation};
use owner::{Command, Committed, Event, Op, Owner};

#[derive(Debug, Clone)]
pub struct GatewayConfig {
    /// Mutations waiting beyond this are rejected with 409.
    pub queue_capacity: usize,
    /// Events buffered per stream subscriber before it is dropped.
    pub event_buffer: usize,
}

impl Default for GatewayConfig {
    fn default() -> Self {
        Self { queue_capacity: 128, event_buffer: 256 }
    }
}

/// Everything the session owner needs.
pub struct SessionSetup {
    pub db: Database,
    pub steps: Vec<AssemblyStep>,
    pub lexicon: Lexicon,
    pub extractor: Box<dyn Extractor>,
    pub params: AnimationParams,
}

struct Ready {
    commands: SyncSender<Command>,
    committed: watch::Receiver<Arc<Committed>>,
    events: broadcast::Sender<Event>,
    log: Arc<RwLock<Vec<Event>>>,
    steps: Vec<AssemblyStep>,
    manifest: Value,
    lexicon: Lexicon,
}

struct Inner {
    config: GatewayConfig,
    ready: OnceLock<Ready>,
    shutdown: watch::Sender<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlreadyInitialized;

/// Cheap to clone; all clones share one session.
#[derive(Clone)]
pub struct Gateway {
    inner: Arc<Inner>,
}

impl Gateway {
    /// A gateway that answers 503 until [`Gateway::initialize`] is called.
    pub fn new(config: GatewayConfig) -> Self {
        let (shutdown, _) = watch::channel(false);
        Self { inner: Arc::new(Inner { config, ready: OnceLock::new(), shutdown }) }
    }

    pub fn with_session(config: GatewayConfig, setup: SessionSetup) -> Self {
        let gw = Self::new(config);
        gw.initialize(setup).expect("fresh gateway");
        gw
    }

    /// Starts the session owner. Fails if a session is already loaded.
    pub fn initialize(&self, setup: SessionSetup) -> Result<(), AlreadyInitialized> {
        if self.inner.ready.get().is_some() {
            return Err(AlreadyInitialized);
        }
        let SessionSetup { db, steps, lexicon, extractor, params } = setup;
        let manifest = serde_json::from_str(&db.to_json()).expect("manifest json");
        let session = TrainingSession::new(&db, steps.clone());
        let (events, _) = broadcast::channel(self.inner.config.event_buffer.max(1));
        let log = Arc::new(RwLock::new(Vec::new()));
        let (committed_tx, committed) =
            watch::channel(Arc::new(Committed { revision: 0, scene: session.scene().clone() }));
        let mut owner = Owner {
            db,
            session,
            extractor,
            params,
            revision: 0,
            committed: committed_tx,
            events: events.clone(),
            log: log.clone(),
        };
        owner.publish_initial();
        let (commands, rx) = mpsc::sync_channel(self.inner.config.queue_capacity);
        let ready = Ready { commands, committed, events, log, steps, manifest, lexicon };
        if self.inner.ready.set(ready).is_err() {
            return Err(AlreadyInitialized);
        }
        thread::Builder::new().name("session-owner".into()).spawn(move || owner.run(rx)).expect("spawn session owner");
        Ok(())
    }

    pub fn is_ready(&self) -> bool {
        self.inner.ready.get().is_some()
    }

    /// Ends every open event stream; further streams close immediately.
    pub fn shutdown(&self) {
        self.inner.shutdown.send_replace(true);
    }

    pub fn router(&self) -> Router {
        Router::new()
            .route("/extraction", post(post_extraction))
            .route("/session/next", post(post_next))
            .route("/session/previous", post(post_previous))
            .route("/scene", get(get_scene))
            .route("/steps", get(get_steps))
            .route("/manifest", get(get_manifest))
            .route("/events", get(get_events))
            .with_state(self.clone())
    }

    fn ready(&self) -> Result<&Ready, ApiError> {
        self.inner.ready.get().ok_or_else(ApiError::not_ready)
    }
}

/// Serves until `signal` resolves, then closes event streams and drains.
pub async fn serve(
    listener: tokio::net::TcpListener,
    gateway: Gateway,
    signal: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    let gw = gateway.clone();
    axum::serve(listener, gateway.router())
        .with_graceful_shutdown(async move {
            signal.await;
            gw.shutdown();
        })
        .await
}

async fn submit(gw: &Gateway, op: Op) -> Result<Mutation, ApiError> {
    let ready = gw.ready()?;
    let (reply, rx) = oneshot::channel();
    ready.commands.try_send(Command { op, reply }).map_err(|e| match e {
        TrySendError::Full(_) => ApiError::conflict("Busy", "mutation queue is full"),
        TrySendError::Disconnected(_) => shutting_down(),
    })?;
    rx.await.map_err(|_| shutting_down())?
}

fn shutting_down() -> ApiError {
    ApiError::new(StatusCode::SERVICE_UNAVAILABLE, "ShuttingDown", "session owner has stopped")
}

fn parse_triple(headers: &HeaderMap, body: &[u8], lexicon: &Lexicon) -> Result<ExtractionResult, ApiError> {
    let is_json = headers
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.trim_start().starts_with("application/json"));
    let parsed = if is_json {
        let raw: RawTriple = serde_json::from_slice(body)
            .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "BadBody", e.to_string()))?;
        raw.canonicalize()
    } else {
        let text = std::str::from_utf8(body)
            .map_err(|_| ApiError::new(StatusCode::BAD_REQUEST, "BadBody", "body is not UTF-8"))?;
        parse_llm_output(text)
    };
    parsed.and_then(|t| resolve_names(&t, lexicon)).map_err(|e| ApiError::extraction(&e))
}

async fn post_extraction(State(gw): State<Gateway>, headers: HeaderMap, body: Bytes) -> Result<Mutation, ApiError> {
    let triple = parse_triple(&headers, &body, &gw.ready()?.lexicon)?;
    submit(&gw, Op::Apply(triple)).await
}

async fn post_next(State(gw): State<Gateway>) -> Result<Mutation, ApiError> {
    submit(&gw, Op::Next).await
}

async fn post_previous(State(gw): State<Gateway>) -> Result<Mutation, ApiError> {
    submit(&gw, Op::Previous).await
}

async fn get_scene(State(gw): State<Gateway>) -> Result<Json<Value>, ApiError> {
    let committed = gw.ready()?.committed.borrow().clone();
    let mut v = serde_json::to_value(&committed.scene).expect("scene serializes");
    v["revision"] = json!(committed.revision);
    Ok(Json(v))
}

async fn get_steps(State(gw): State<Gateway>) -> Result<Json<Value>, ApiError> {
    Ok(Json(json!({ "steps": gw.ready()?.steps })))
}

async fn get_manifest(State(gw): State<Gateway>) -> Result<Json<Value>, ApiError> {
    Ok(Json(gw.ready()?.manifest.clone()))
}

#[derive(Debug, Deserialize)]
struct EventsQuery {
    since: Option<u64>,
}

struct Tail {
    rx: broadcast::Receiver<Event>,
    shutdown: watch::Receiver<bool>,
    last: Option<u64>,
    done: bool,
}

impl Tail {
    async fn next_line(&mut self) -> Option<Bytes> {
        if self.done {
            return None;
        }
        loop {
            let received = tokio::select! {
                _ = self.shutdown.wait_for(|stop| *stop) => return None,
                r = self.rx.recv() => r,
            };
            match received {
                Ok(e) if self.last.is_some_and(|l| e.revision <= l) => continue,
                Ok(e) => {
                    self.last = Some(e.revision);
                    return Some(e.line);
                }
                Err(RecvError::Lagged(_)) => {
                    self.done = true;
                    let mut line = serde_json::to_vec(&json!({ "event": "gap", "revision": self.last })).unwrap();
                    line.push(b'\n');
                    return Some(line.into());
                }
                Err(RecvError::Closed) => return None,
            }
        }
    }
}

/// Newline-delimited JSON: the logged deltas after `since` (all of them
/// when absent), then live ones. A subscriber that falls behind gets a
/// `gap` line and the stream ends; it should re-read `/scene`.
async fn get_events(State(gw): State<Gateway>, Query(q): Query<EventsQuery>) -> Result<Response, ApiError> {
    let ready = gw.ready()?;
    let rx = ready.events.subscribe();
    let backlog: Vec<Event> = ready
        .log
        .read()
        .expect("event log poisoned")
        .iter()
        .filter(|e| q.since.is_none_or(|s| e.revision > s))
        .cloned()
        .collect();
    let last = backlog.last().map(|e| e.revision).or(q.since);
    let tail = Tail { rx, shutdown: gw.inner.shutdown.subscribe(), last, done: false };
    let live = stream::unfold(tail, |mut t| async move { t.next_line().await.map(|line| (line, t)) });
    let lines =
        stream::iter(backlog.into_iter().map(|e| e.line)).chain(live).map(Ok::<_, std::convert::Infallible>).fuse();
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], Body::from_stream(lines)).into_response())
}
