//! Instruction generation and the Next/Previous session state machine.

mod animation;
mod instruction;
mod session;
mod snapshot;

use thiserror::Error;

use crate::model::ModelError;

pub use animation::{make_animation, phase, sample_animation, sample_instance, slerp, AnimationParams};
pub use instruction::{
    clear_instruction, commit_instruction, generate_instruction, highlighted_records, initial_scene, recolored_records,
};
pub use session::{load_steps, parse_steps, SessionError, StepReport, TrainingSession};
pub use snapshot::snapshot;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("unknown component {0}")]
    UnknownComponent(String),
    #[error("{component} has {available} instance(s), {requested} requested")]
    InsufficientInstances { component: String, requested: usize, available: usize },
    #[error("invalid animation parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl EngineError {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::UnknownComponent(_) => "UnknownComponent",
            Self::InsufficientInstances { .. } => "InsufficientInstances",
            Self::InvalidParams(_) => "InvalidParams",
            Self::Model(_) => "InvalidModel",
        }
    }
}
