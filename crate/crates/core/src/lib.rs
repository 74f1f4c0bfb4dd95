//! Headless engine that turns assembly-step text into virtual instructions.
//!
//! - [`extraction`] reads `(predecessor, successor, count)` triples out of
//!   step text, either with the rule-based extractor or from a model endpoint.
//! - [`database`] loads the component manifest.
//! - [`engine`] highlights components, binds assembly animations and runs the
//!   Next/Previous walkthrough.

pub mod database;
pub mod engine;
pub mod extraction;
pub mod model;

pub use database::{combined_name, load_manifest, lookup, validate_database, Database};
pub use model::{CanonicalName, ExtractionResult, SceneState};
