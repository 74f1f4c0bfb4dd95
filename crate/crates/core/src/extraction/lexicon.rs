use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::de::{MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

use super::{normalize_surface, tokenize};
use crate::model::CanonicalName;

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("cannot read lexicon: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed lexicon: {0}")]
    Format(#[from] serde_json::Error),
    #[error("surface form {surface:?} maps to both {first} and {second}")]
    Conflict { surface: String, first: CanonicalName, second: CanonicalName },
    #[error("surface form {0:?} has no word characters")]
    EmptySurface(String),
}

/// Surface form → canonical component name. Matching works on word tokens,
/// so `"top-cap"` and `"top cap"` are the same surface.
#[derive(Debug, Clone, PartialEq)]
pub struct Lexicon {
    entries: BTreeMap<String, CanonicalName>,
    /// Token sequences, longest first, for the mention scanner.
    patterns: Vec<(Vec<String>, String)>,
}

impl Lexicon {
    pub fn from_pairs<I, S>(pairs: I) -> Result<Self, LexiconError>
    where
        I: IntoIterator<Item = (S, CanonicalName)>,
        S: AsRef<str>,
    {
        let mut entries: BTreeMap<String, CanonicalName> = BTreeMap::new();
        for (surface, name) in pairs {
            let key = normalize_surface(surface.as_ref());
            if tokenize(&key).is_empty() {
                return Err(LexiconError::EmptySurface(surface.as_ref().to_owned()));
            }
            match entries.get(&key) {
                Some(existing) if *existing != name => {
                    return Err(LexiconError::Conflict { surface: key, first: existing.clone(), second: name });
                }
                _ => {
                    entries.insert(key, name);
                }
            }
        }
        let mut patterns: Vec<_> = entries.keys().map(|k| (tokenize(k), k.clone())).collect();
        patterns.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.1.cmp(&b.1)));
        Ok(Self { entries, patterns })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, LexiconError> {
        let text = fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, LexiconError> {
        let pairs: Pairs = serde_json::from_str(text)?;
        Self::from_pairs(pairs.0)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.entries).expect("lexicon serializes")
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, surface: &str) -> Option<&CanonicalName> {
        self.entries.get(&normalize_surface(surface))
    }

    pub fn contains_name(&self, name: &CanonicalName) -> bool {
        self.entries.values().any(|n| n == name)
    }

    /// Distinct canonical names, sorted.
    pub fn names(&self) -> Vec<CanonicalName> {
        let mut names: Vec<_> = self.entries.values().cloned().collect();
        names.sort();
        names.dedup();
        names
    }

    /// Surface forms mapping to `name`, in sorted order.
    pub fn surfaces_of<'a>(&'a self, name: &'a CanonicalName) -> impl Iterator<Item = &'a str> + 'a {
        self.entries.iter().filter(move |(_, n)| *n == name).map(|(s, _)| s.as_str())
    }

    /// Longest surface form whose tokens start at `tokens[at]`.
    pub(crate) fn longest_match(&self, tokens: &[String], at: usize) -> Option<(usize, &str, &CanonicalName)> {
        let rest = &tokens[at..];
        self.patterns
            .iter()
            .find(|(pat, _)| rest.len() >= pat.len() && rest[..pat.len()] == pat[..])
            .map(|(pat, key)| (pat.len(), key.as_str(), &self.entries[key]))
    }
}

impl Serialize for Lexicon {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.entries.serialize(s)
    }
}

/// Keeps duplicate JSON keys so conflicts are reported instead of silently
/// overwritten.
struct Pairs(Vec<(String, CanonicalName)>);

impl<'de> Deserialize<'de> for Pairs {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct PairsVisitor;

        impl<'de> Visitor<'de> for PairsVisitor {
            type Value = Pairs;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an object mapping surface forms to component names")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Pairs, A::Error> {
                let mut out = Vec::new();
                while let Some((k, v)) = map.next_entry::<String, CanonicalName>()? {
                    out.push((k, v));
                }
                Ok(Pairs(out))
            }
        }

        d.deserialize_map(PairsVisitor)
    }
}
