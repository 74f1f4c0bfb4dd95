//! Next/Previous walkthrough over a step script.

use std::fs;
use std::path::Path;

use thiserror::Error;

use super::{commit_instruction, generate_instruction, initial_scene, AnimationParams, EngineError};
use crate::database::Database;
use crate::extraction::{ExtractError, Extractor};
use crate::model::{AssemblyStep, ExtractionResult, SceneState};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SessionError {
    #[error("already past the last step")]
    EndOfSteps,
    #[error("already at the first step")]
    AtBeginning,
    #[error("step {step}: extraction failed: {source}")]
    Extraction {
        step: usize,
        #[source]
        source: ExtractError,
    },
    #[error("step {step}: {source}")]
    Engine {
        step: usize,
        #[source]
        source: EngineError,
    },
}

/// One line per step; blank lines are skipped and steps numbered from 1.
pub fn parse_steps(text: &str) -> Vec<AssemblyStep> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .enumerate()
        .map(|(i, l)| AssemblyStep::new(i + 1, l).expect("non-empty line"))
        .collect()
}

pub fn load_steps(path: impl AsRef<Path>) -> std::io::Result<Vec<AssemblyStep>> {
    Ok(parse_steps(&fs::read_to_string(path)?))
}

/// What a successful `next_step` did.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub step: AssemblyStep,
    pub triple: ExtractionResult,
}

#[derive(Debug, Clone)]
pub struct TrainingSession {
    steps: Vec<AssemblyStep>,
    scene: SceneState,
    initial: SceneState,
    /// Scene before each completed step; its length is the cursor.
    state_stack: Vec<SceneState>,
}

impl TrainingSession {
    pub fn new(db: &Database, steps: Vec<AssemblyStep>) -> Self {
        let initial = initial_scene(db);
        Self { steps, scene: initial.clone(), initial, state_stack: Vec::new() }
    }

    pub fn steps(&self) -> &[AssemblyStep] {
        &self.steps
    }

    pub fn cursor(&self) -> usize {
        self.state_stack.len()
    }

    pub fn scene(&self) -> &SceneState {
        &self.scene
    }

    pub fn initial_scene(&self) -> &SceneState {
        &self.initial
    }

    /// Replaces the displayed scene without moving the cursor, e.g. for an
    /// instruction pushed from outside the step script.
    pub fn set_scene(&mut self, scene: SceneState) {
        self.scene = scene;
    }

    /// Extracts the triple for the step under the cursor, commits the
    /// previous step's assembly and shows the new instruction. On error the
    /// session is unchanged.
    pub fn next_step(
        &mut self,
        extractor: &dyn Extractor,
        db: &Database,
        params: &AnimationParams,
    ) -> Result<StepReport, SessionError> {
        let cursor = self.cursor();
        let step = self.steps.get(cursor).ok_or(SessionError::EndOfSteps)?.clone();
        let triple =
            extractor.extract(step.text()).map_err(|source| SessionError::Extraction { step: step.index(), source })?;
        let committed = commit_instruction(db, &self.scene);
        let mut next = generate_instruction(db, &committed, &triple, params)
            .map_err(|source| SessionError::Engine { step: step.index(), source })?;
        next.step_cursor = cursor + 1;
        self.state_stack.push(std::mem::replace(&mut self.scene, next));
        Ok(StepReport { step, triple })
    }

    pub fn previous_step(&mut self) -> Result<(), SessionError> {
        self.scene = self.state_stack.pop().ok_or(SessionError::AtBeginning)?;
        Ok(())
    }
}
