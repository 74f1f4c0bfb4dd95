//! Request and response bodies.

use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use bytes::Bytes;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use vigen_core::engine::EngineError;
use vigen_core::extraction::ExtractError;
use vigen_core::model::{ActiveInstruction, AnimationClip, AssemblyStep, ExtractionResult, InstanceEntry, SceneState};

/// What one committed mutation changed. Folding every delta from revision 0
/// onto an empty scene reproduces the current scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Delta {
    pub revision: u64,
    pub step_cursor: usize,
    pub changed: Vec<InstanceEntry>,
    pub clip: Option<AnimationClip>,
    pub instruction: Option<ActiveInstruction>,
}

impl Delta {
    pub fn new(revision: u64, before: &SceneState, after: &SceneState) -> Self {
        Self {
            revision,
            step_cursor: after.step_cursor,
            changed: crate::owner::changed(before, after),
            clip: after.current_clip.clone(),
            instruction: after.instruction.clone(),
        }
    }

    pub fn apply(&self, scene: &mut SceneState) {
        for e in &self.changed {
            scene.instances.insert(e.key(), e.state);
        }
        scene.step_cursor = self.step_cursor;
        scene.current_clip = self.clip.clone();
        scene.instruction = self.instruction.clone();
    }

    pub(crate) fn event_line(&self) -> Bytes {
        let mut v = serde_json::to_value(self).expect("delta serializes");
        v["event"] = json!("delta");
        let mut line = serde_json::to_vec(&v).expect("value serializes");
        line.push(b'\n');
        line.into()
    }
}

/// Reply to a successful POST.
#[derive(Debug, Clone)]
pub struct Mutation {
    pub delta: Delta,
    pub step: Option<AssemblyStep>,
    pub triple: Option<ExtractionResult>,
}

impl IntoResponse for Mutation {
    fn into_response(self) -> Response {
        let mut v = serde_json::to_value(&self.delta).expect("delta serializes");
        v["status"] = json!("ok");
        v["step"] = json!(self.step);
        v["triple"] = json!(self.triple);
        Json(v).into_response()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub status: StatusCode,
    pub kind: String,
    pub message: String,
    pub raw: Option<String>,
    pub step: Option<usize>,
}

impl ApiError {
    pub fn new(status: StatusCode, kind: &str, message: impl Into<String>) -> Self {
        Self { status, kind: kind.to_owned(), message: message.into(), raw: None, step: None }
    }

    pub fn conflict(kind: &str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::CONFLICT, kind, message)
    }

    pub fn not_ready() -> Self {
        Self::new(StatusCode::SERVICE_UNAVAILABLE, "NotReady", "session is still loading")
    }

    pub fn extraction(e: &ExtractError) -> Self {
        let status = match e.root() {
            ExtractError::Timeout => StatusCode::GATEWAY_TIMEOUT,
            ExtractError::Transport(_) => StatusCode::BAD_GATEWAY,
            _ => StatusCode::BAD_REQUEST,
        };
        let mut err = Self::new(status, e.kind(), e.root().to_string());
        if let ExtractError::BadResponse { raw, .. } = e {
            err.raw = Some(raw.clone());
        }
        err
    }

    pub fn engine(e: EngineError) -> Self {
        Self::new(StatusCode::BAD_REQUEST, e.kind(), e.to_string())
    }

    pub fn with_step(mut self, step: usize) -> Self {
        self.step = Some(step);
        self
    }

    pub fn to_json(&self) -> Value {
        let mut error = json!({ "kind": self.kind, "message": self.message });
        if let Some(raw) = &self.raw {
            error["raw"] = json!(raw);
        }
        if let Some(step) = self.step {
            error["step"] = json!(step);
        }
        json!({ "status": "error", "error": error })
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.to_json())).into_response()
    }
}
