//! The session owner: the only thread that mutates the scene.

use std::sync::mpsc::Receiver;
use std::sync::{Arc, RwLock};

use bytes::Bytes;
use tokio::sync::{broadcast, oneshot, watch};
use vigen_core::engine::{generate_instruction, AnimationParams, SessionError, TrainingSession};
use vigen_core::extraction::Extractor;
use vigen_core::model::{AssemblyStep, ExtractionResult, InstanceEntry, SceneState};
use vigen_core::Database;

use crate::body::{ApiError, Delta, Mutation};

/// Scene as of one revision, shared with readers.
#[derive(Debug)]
pub struct Committed {
    pub revision: u64,
    pub scene: SceneState,
}

/// One line of the event stream, serialized once.
#[derive(Debug, Clone)]
pub struct Event {
    pub revision: u64,
    pub line: Bytes,
}

pub enum Op {
    Apply(ExtractionResult),
    Next,
    Previous,
}

pub struct Command {
    pub op: Op,
    pub reply: oneshot::Sender<Result<Mutation, ApiError>>,
}

pub struct Owner {
    pub db: Database,
    pub session: TrainingSession,
    pub extractor: Box<dyn Extractor>,
    pub params: AnimationParams,
    pub revision: u64,
    pub committed: watch::Sender<Arc<Committed>>,
    pub events: broadcast::Sender<Event>,
    pub log: Arc<RwLock<Vec<Event>>>,
}

pub fn changed(before: &SceneState, after: &SceneState) -> Vec<InstanceEntry> {
    after.entries().into_iter().filter(|e| before.instances.get(&e.key()) != Some(&e.state)).collect()
}

impl Owner {
    /// Records revision 0, which carries the whole initial scene.
    pub fn publish_initial(&mut self) {
        let scene = self.session.scene().clone();
        let delta = Delta::new(0, &SceneState::default(), &scene);
        self.publish(delta, scene);
    }

    pub fn run(mut self, commands: Receiver<Command>) {
        while let Ok(Command { op, reply }) = commands.recv() {
            let _ = reply.send(self.execute(op));
        }
    }

    fn execute(&mut self, op: Op) -> Result<Mutation, ApiError> {
        let before = self.session.scene().clone();
        let (step, triple) = match op {
            Op::Apply(triple) => {
                let scene = generate_instruction(&self.db, &before, &triple, &self.params).map_err(ApiError::engine)?;
                self.session.set_scene(scene);
                (None, Some(triple))
            }
            Op::Next => {
                let report = self
                    .session
                    .next_step(self.extractor.as_ref(), &self.db, &self.params)
                    .map_err(ApiError::session)?;
                (Some(report.step), Some(report.triple))
            }
            Op::Previous => {
                self.session.previous_step().map_err(ApiError::session)?;
                (self.current_step(), None)
            }
        };
        self.revision += 1;
        let after = self.session.scene().clone();
        let delta = Delta::new(self.revision, &before, &after);
        self.publish(delta.clone(), after);
        Ok(Mutation { delta, step, triple })
    }

    fn current_step(&self) -> Option<AssemblyStep> {
        let cursor = self.session.cursor();
        (cursor > 0).then(|| self.session.steps()[cursor - 1].clone())
    }

    fn publish(&mut self, delta: Delta, scene: SceneState) {
        let event = Event { revision: delta.revision, line: delta.event_line() };
        self.log.write().expect("event log poisoned").push(event.clone());
        self.committed.send_replace(Arc::new(Committed { revision: delta.revision, scene }));
        // no subscribers is fine
        let _ = self.events.send(event);
    }
}

impl ApiError {
    fn session(e: SessionError) -> Self {
        match e {
            SessionError::EndOfSteps => Self::conflict("EndOfSteps", e.to_string()),
            SessionError::AtBeginning => Self::conflict("AtBeginning", e.to_string()),
            SessionError::Extraction { step, source } => Self::extraction(&source).with_step(step),
            SessionError::Engine { step, source } => Self::engine(source).with_step(step),
        }
    }
}
