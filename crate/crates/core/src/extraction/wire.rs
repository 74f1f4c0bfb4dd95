//! The `"predecessor, successor, count"` text format spoken by the model.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::{normalize_surface, ExtractError, Lexicon};
use crate::model::{CanonicalName, ExtractionResult};

/// A triple whose names are still surface text, e.g. `"small screws"`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawTriple {
    pub predecessor: String,
    pub successor: String,
    pub count: u32,
}

impl RawTriple {
    /// Folds each name to canonical form (`"Small Screws"` → `small_screws`)
    /// without consulting a lexicon.
    pub fn canonicalize(&self) -> Result<ExtractionResult, ExtractError> {
        if self.count == 0 {
            return Err(ExtractError::BadCount(self.count.to_string()));
        }
        let predecessor = canonical_field(&self.predecessor)?;
        let successor = canonical_field(&self.successor)?;
        if predecessor == successor {
            return Err(ExtractError::SameComponent(predecessor.to_string()));
        }
        Ok(ExtractionResult::new(predecessor, successor, self.count).expect("checked above"))
    }
}

impl fmt::Display for RawTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}, {}, {}", self.predecessor, self.successor, self.count)
    }
}

fn canonical_field(field: &str) -> Result<CanonicalName, ExtractError> {
    let folded = normalize_surface(field).replace(' ', "_");
    CanonicalName::parse(&folded).map_err(|_| ExtractError::BadName(field.trim().to_owned()))
}

pub fn parse_llm_output(raw: &str) -> Result<ExtractionResult, ExtractError> {
    let fields: Vec<&str> = raw.split(',').map(str::trim).collect();
    if fields.len() != 3 {
        return Err(ExtractError::WrongArity(fields.len()));
    }
    for f in &fields[..2] {
        if f.is_empty() {
            return Err(ExtractError::BadName(String::new()));
        }
    }
    let count_text = fields[2];
    let count = (!count_text.is_empty() && count_text.bytes().all(|b| b.is_ascii_digit()))
        .then(|| count_text.parse::<u32>().ok())
        .flatten()
        .filter(|&n| n >= 1)
        .ok_or_else(|| ExtractError::BadCount(count_text.to_owned()))?;
    RawTriple { predecessor: fields[0].to_owned(), successor: fields[1].to_owned(), count }.canonicalize()
}

/// Maps each name to the lexicon's canonical name. Names that are already
/// canonical lexicon values pass through.
pub fn resolve_names(result: &ExtractionResult, lexicon: &Lexicon) -> Result<ExtractionResult, ExtractError> {
    let resolve = |name: &CanonicalName| -> Result<CanonicalName, ExtractError> {
        if let Some(found) = lexicon.get(&name.as_str().replace('_', " ")) {
            Ok(found.clone())
        } else if lexicon.contains_name(name) {
            Ok(name.clone())
        } else {
            Err(ExtractError::UnknownComponent(name.to_string()))
        }
    };
    let predecessor = resolve(result.predecessor())?;
    let successor = resolve(result.successor())?;
    ExtractionResult::new(predecessor, successor, result.count())
        .map_err(|_| ExtractError::SameComponent(result.successor().to_string()))
}

pub fn serialize_extraction(result: &ExtractionResult) -> String {
    format!("{}, {}, {}", result.predecessor(), result.successor(), result.count())
}
