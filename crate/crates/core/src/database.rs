//! Component database: manifest loading, validation and lookup.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{CanonicalName, ComponentKind, ComponentRecord};

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("cannot read manifest {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("manifest {} is malformed at line {line}, column {column}: {message}", path.display())]
    Schema { path: PathBuf, line: usize, column: usize, message: String },
    #[error("manifest {} has {} violation(s): {}", path.display(), violations.len(), join(violations))]
    Invalid { path: PathBuf, violations: Vec<Violation> },
}

fn join(violations: &[Violation]) -> String {
    violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rule {
    DuplicateName,
    /// Assembled records need exactly two constituents.
    ConstituentArity(usize),
    /// Assembled name must be `constituents[0] + "_" + constituents[1]`.
    CombinedNaming {
        expected: String,
    },
    AtomicWithConstituents,
    DanglingConstituent(CanonicalName),
    NoInstances,
    AtomicWithMates,
    /// Mates must be empty or cover every successor instance.
    MateCount {
        mates: usize,
        successor_instances: usize,
    },
    /// An atomic name shadows the combined name of two other records.
    CombinedNameCollision {
        first: CanonicalName,
        second: CanonicalName,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub record: String,
    pub position: usize,
    pub rule: Rule,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "components[{}] {:?}: ", self.position, self.record)?;
        match &self.rule {
            Rule::DuplicateName => write!(f, "duplicate name"),
            Rule::ConstituentArity(n) => write!(f, "assembled record needs 2 constituents, has {n}"),
            Rule::CombinedNaming { expected } => write!(f, "assembled record must be named {expected:?}"),
            Rule::AtomicWithConstituents => write!(f, "atomic record lists constituents"),
            Rule::DanglingConstituent(c) => write!(f, "constituent {:?} is not in the manifest", c.as_str()),
            Rule::NoInstances => write!(f, "record has no instances"),
            Rule::AtomicWithMates => write!(f, "atomic record lists mates"),
            Rule::MateCount { mates, successor_instances } => {
                write!(f, "{mates} mate pose(s) for a successor with {successor_instances} instance(s)")
            }
            Rule::CombinedNameCollision { first, second } => {
                write!(f, "atomic name collides with combined name of {:?} and {:?}", first.as_str(), second.as_str())
            }
        }
    }
}

/// The `M` components an instruction is generated from, in manifest order.
#[derive(Debug, Clone, PartialEq)]
pub struct Database {
    components: Vec<ComponentRecord>,
    index: HashMap<CanonicalName, usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestDoc {
    components: Vec<ComponentRecord>,
}

impl Database {
    /// Builds without validating; the index keeps the first record of a name.
    pub fn from_records(components: Vec<ComponentRecord>) -> Self {
        let mut index = HashMap::with_capacity(components.len());
        for (i, c) in components.iter().enumerate() {
            index.entry(c.name.clone()).or_insert(i);
        }
        Self { components, index }
    }

    pub fn components(&self) -> &[ComponentRecord] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &CanonicalName> {
        self.components.iter().map(|c| &c.name)
    }

    pub fn lookup(&self, name: &CanonicalName) -> Option<&ComponentRecord> {
        lookup(self, name)
    }

    pub fn to_json(&self) -> String {
        let doc = ManifestDoc { components: self.components.clone() };
        serde_json::to_string_pretty(&doc).expect("manifest serializes")
    }
}

pub fn lookup<'a>(db: &'a Database, name: &CanonicalName) -> Option<&'a ComponentRecord> {
    db.index.get(name).map(|&i| &db.components[i])
}

/// `a + "_" + b`; the lookup key for the record assembled from `a` and `b`.
pub fn combined_name(a: &CanonicalName, b: &CanonicalName) -> CanonicalName {
    CanonicalName::parse(&format!("{a}_{b}")).expect("joining two canonical names is canonical")
}

pub fn validate_database(db: &Database) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    let names: BTreeSet<&CanonicalName> = db.names().collect();
    let mut push = |c: &ComponentRecord, position: usize, rule: Rule| {
        out.push(Violation { record: c.name.to_string(), position, rule });
    };

    for (pos, c) in db.components.iter().enumerate() {
        if !seen.insert(&c.name) {
            push(c, pos, Rule::DuplicateName);
        }
        if c.instances.is_empty() {
            push(c, pos, Rule::NoInstances);
        }
        match c.kind {
            ComponentKind::Atomic => {
                if !c.constituents.is_empty() {
                    push(c, pos, Rule::AtomicWithConstituents);
                }
                if !c.mates.is_empty() {
                    push(c, pos, Rule::AtomicWithMates);
                }
                if let Some((first, second)) = split_as_combined(&c.name, &names) {
                    push(c, pos, Rule::CombinedNameCollision { first, second });
                }
            }
            ComponentKind::Assembled => {
                if c.constituents.len() != 2 {
                    push(c, pos, Rule::ConstituentArity(c.constituents.len()));
                } else {
                    let expected = combined_name(&c.constituents[0], &c.constituents[1]);
                    if expected != c.name {
                        push(c, pos, Rule::CombinedNaming { expected: expected.to_string() });
                    }
                }
                for part in &c.constituents {
                    if !names.contains(part) {
                        push(c, pos, Rule::DanglingConstituent(part.clone()));
                    }
                }
                if let Some(successor) = c.constituents.get(1).and_then(|s| db.lookup(s)) {
                    let n = successor.instances.len();
                    if !c.mates.is_empty() && c.mates.len() != n {
                        push(c, pos, Rule::MateCount { mates: c.mates.len(), successor_instances: n });
                    }
                }
            }
        }
    }
    out
}

/// Finds two records other than `name` whose combined name equals `name`.
fn split_as_combined(name: &CanonicalName, names: &BTreeSet<&CanonicalName>) -> Option<(CanonicalName, CanonicalName)> {
    let s = name.as_str();
    s.match_indices('_').find_map(|(i, _)| {
        let first = CanonicalName::parse(&s[..i]).ok()?;
        let second = CanonicalName::parse(&s[i + 1..]).ok()?;
        (names.contains(&first) && names.contains(&second)).then_some((first, second))
    })
}

/// Parses a manifest without validating it.
pub fn read_manifest(path: impl AsRef<Path>) -> Result<Database, ManifestError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ManifestError::Io { path: path.to_owned(), source })?;
    let doc: ManifestDoc = serde_json::from_str(&text).map_err(|e| ManifestError::Schema {
        path: path.to_owned(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    Ok(Database::from_records(doc.components))
}

/// Parses and validates; every violation is reported, not only the first.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<Database, ManifestError> {
    let path = path.as_ref();
    let db = read_manifest(path)?;
    let violations = validate_database(&db);
    if violations.is_empty() {
        Ok(db)
    } else {
        Err(ManifestError::Invalid { path: path.to_owned(), violations })
    }
}

pub fn save_manifest(db: &Database, path: impl AsRef<Path>) -> std::io::Result<()> {
    let mut text = db.to_json();
    text.push('\n');
    fs::write(path, text)
}
