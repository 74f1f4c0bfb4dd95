//! Client for a remote model endpoint.
//!
//! Request: `POST <endpoint>` with `{"instruction": ..., "input": <step>}`.
//! Response: the model's raw output text, e.g. `small screws, base, 1`.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{parse_llm_output, resolve_names, ExtractError, Extractor, Lexicon, DEFAULT_INSTRUCTION};
use crate::model::ExtractionResult;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtractorMode {
    Rule,
    Remote,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractorConfig {
    pub mode: ExtractorMode,
    pub endpoint: Option<String>,
    pub timeout: Duration,
}

impl ExtractorConfig {
    pub fn rule() -> Self {
        Self { mode: ExtractorMode::Rule, endpoint: None, timeout: DEFAULT_TIMEOUT }
    }

    pub fn remote(endpoint: impl Into<String>, timeout: Duration) -> Self {
        Self { mode: ExtractorMode::Remote, endpoint: Some(endpoint.into()), timeout }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.mode == ExtractorMode::Remote && self.endpoint.as_deref().is_none_or(str::is_empty) {
            return Err("remote extractor needs an endpoint".into());
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct WireRequest<'a> {
    instruction: &'a str,
    input: &'a str,
}

#[derive(Debug, Clone)]
pub struct RemoteExtractor {
    endpoint: String,
    instruction: String,
    lexicon: Lexicon,
    agent: ureq::Agent,
}

impl RemoteExtractor {
    pub fn new(config: &ExtractorConfig, lexicon: Lexicon) -> Result<Self, String> {
        config.validate()?;
        let endpoint = config.endpoint.clone().ok_or("remote extractor needs an endpoint")?;
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(config.timeout))
            .http_status_as_error(true)
            .build()
            .new_agent();
        Ok(Self { endpoint, instruction: DEFAULT_INSTRUCTION.to_owned(), lexicon, agent })
    }

    pub fn with_instruction(mut self, instruction: impl Into<String>) -> Self {
        self.instruction = instruction.into();
        self
    }

    /// Sends one step and returns the endpoint's raw answer.
    pub fn fetch_raw(&self, step_text: &str) -> Result<String, ExtractError> {
        let body = WireRequest { instruction: &self.instruction, input: step_text };
        let mut response = self.agent.post(&self.endpoint).send_json(&body).map_err(transport)?;
        response.body_mut().read_to_string().map_err(transport)
    }
}

fn transport(e: ureq::Error) -> ExtractError {
    match e {
        ureq::Error::Timeout(_) => ExtractError::Timeout,
        ureq::Error::Io(io) if io.kind() == std::io::ErrorKind::TimedOut => ExtractError::Timeout,
        other => ExtractError::Transport(other.to_string()),
    }
}

impl Extractor for RemoteExtractor {
    fn extract(&self, text: &str) -> Result<ExtractionResult, ExtractError> {
        let raw = self.fetch_raw(text)?;
        parse_llm_output(&raw)
            .and_then(|r| resolve_names(&r, &self.lexicon))
            .map_err(|e| ExtractError::BadResponse { raw, source: Box::new(e) })
    }
}
