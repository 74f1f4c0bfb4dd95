//! Shared domain types: names, poses, component records, scene state,
//! extraction triples and SFT records.
//!
//! Every type validates its invariants at construction and on
//! deserialization, so a value that exists is a value that is well formed.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid component name {0:?}: expected lowercase tokens joined by single underscores")]
    InvalidName(String),
    #[error("quaternion norm {0} is not 1")]
    NonUnitQuaternion(f64),
    #[error("color channel {0} outside [0, 1]")]
    ColorOutOfRange(f64),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("count must be at least 1")]
    ZeroCount,
    #[error("predecessor and successor are both {0}")]
    SameComponent(String),
    #[error("{0} must not be empty")]
    Empty(&'static str),
    #[error("duration must be positive, got {0}")]
    NonPositiveDuration(f64),
    #[error("instance count must be at least 1")]
    ZeroInstances,
    #[error("instance {0} is animating but inactive")]
    AnimatingInactive(String),
    #[error("output {output:?} is not a valid extraction: {reason}")]
    BadOutput { output: String, reason: String },
}

/// Component identifier shared between extractor output and the database.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct CanonicalName(String);

impl CanonicalName {
    pub fn parse(value: &str) -> Result<Self, ModelError> {
        if is_canonical(value) {
            Ok(Self(value.to_owned()))
        } else {
            Err(ModelError::InvalidName(value.to_owned()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

fn is_canonical(value: &str) -> bool {
    !value.is_empty()
        && value
            .split('_')
            .all(|tok| !tok.is_empty() && tok.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit()))
}

impl TryFrom<String> for CanonicalName {
    type Error = ModelError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        if is_canonical(&value) {
            Ok(Self(value))
        } else {
            Err(ModelError::InvalidName(value))
        }
    }
}

impl From<CanonicalName> for String {
    fn from(name: CanonicalName) -> Self {
        name.0
    }
}

impl AsRef<str> for CanonicalName {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for CanonicalName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl PartialEq<str> for CanonicalName {
    fn eq(&self, other: &str) -> bool {
        self.0 == other
    }
}

impl PartialEq<&str> for CanonicalName {
    fn eq(&self, other: &&str) -> bool {
        self.0 == *other
    }
}

/// The extractor's whole output contract: which component is added
/// (successor), to what (predecessor), and how many of it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "TripleRepr", into = "TripleRepr")]
pub struct ExtractionResult {
    predecessor: CanonicalName,
    successor: CanonicalName,
    count: u32,
}

#[derive(Serialize, Deserialize)]
struct TripleRepr {
    predecessor: CanonicalName,
    successor: CanonicalName,
    count: u32,
}

impl ExtractionResult {
    pub fn new(predecessor: CanonicalName, successor: CanonicalName, count: u32) -> Result<Self, ModelError> {
        if count == 0 {
            return Err(ModelError::ZeroCount);
        }
        if predecessor == successor {
            return Err(ModelError::SameComponent(predecessor.0));
        }
        Ok(Self { predecessor, successor, count })
    }

    pub fn predecessor(&self) -> &CanonicalName {
        &self.predecessor
    }

    pub fn successor(&self) -> &CanonicalName {
        &self.successor
    }

    pub fn count(&self) -> u32 {
        self.count
    }
}

impl TryFrom<TripleRepr> for ExtractionResult {
    type Error = ModelError;

    fn try_from(r: TripleRepr) -> Result<Self, Self::Error> {
        Self::new(r.predecessor, r.successor, r.count)
    }
}

impl From<ExtractionResult> for TripleRepr {
    fn from(r: ExtractionResult) -> Self {
        Self { predecessor: r.predecessor, successor: r.successor, count: r.count }
    }
}

impl fmt::Display for ExtractionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}, {}, {}", self.predecessor, self.successor, self.count)
    }
}

pub type Vec3 = [f64; 3];

/// Unit quaternion, serialized as `[w, x, y, z]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct Quat {
    pub(crate) w: f64,
    pub(crate) x: f64,
    pub(crate) y: f64,
    pub(crate) z: f64,
}

pub const UNIT_TOLERANCE: f64 = 1e-9;

impl Quat {
    pub const IDENTITY: Quat = Quat { w: 1.0, x: 0.0, y: 0.0, z: 0.0 };

    /// Accepts only quaternions whose norm is 1 within [`UNIT_TOLERANCE`].
    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Result<Self, ModelError> {
        if ![w, x, y, z].iter().all(|c| c.is_finite()) {
            return Err(ModelError::NonFinite("quaternion"));
        }
        let norm = (w * w + x * x + y * y + z * z).sqrt();
        if (norm - 1.0).abs() > UNIT_TOLERANCE {
            return Err(ModelError::NonUnitQuaternion(norm));
        }
        Ok(Self { w, x, y, z })
    }

    /// Rotation of `angle` radians about `axis`; the axis need not be normalized.
    pub fn from_axis_angle(axis: Vec3, angle: f64) -> Result<Self, ModelError> {
        let len = norm3(axis);
        if !len.is_finite() || len == 0.0 || !angle.is_finite() {
            return Err(ModelError::NonFinite("axis-angle"));
        }
        let (s, c) = (angle / 2.0).sin_cos();
        let k = s / len;
        let (w, x, y, z) = (c, axis[0] * k, axis[1] * k, axis[2] * k);
        let n = (w * w + x * x + y * y + z * z).sqrt();
        Self::new(w / n, x / n, y / n, z / n)
    }

    pub fn wxyz(&self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn dot(&self, other: &Quat) -> f64 {
        self.w * other.w + self.x * other.x + self.y * other.y + self.z * other.z
    }
}

impl TryFrom<[f64; 4]> for Quat {
    type Error = ModelError;

    fn try_from(v: [f64; 4]) -> Result<Self, Self::Error> {
        Quat::new(v[0], v[1], v[2], v[3])
    }
}

impl From<Quat> for [f64; 4] {
    fn from(q: Quat) -> Self {
        q.wxyz()
    }
}

pub(crate) fn norm3(v: Vec3) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Right-handed frame, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pose {
    pub position: Vec3,
    #[serde(default = "identity")]
    pub orientation: Quat,
}

fn identity() -> Quat {
    Quat::IDENTITY
}

impl Pose {
    pub const IDENTITY: Pose = Pose { position: [0.0; 3], orientation: Quat::IDENTITY };

    pub fn at(position: Vec3) -> Self {
        Self { position, orientation: Quat::IDENTITY }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct Rgba([f64; 4]);

impl Rgba {
    /// Highlight color for the current step's components.
    pub const GREEN: Rgba = Rgba([0.0, 1.0, 0.0, 1.0]);

    pub fn new(r: f64, g: f64, b: f64, a: f64) -> Result<Self, ModelError> {
        for c in [r, g, b, a] {
            if !(0.0..=1.0).contains(&c) {
                return Err(ModelError::ColorOutOfRange(c));
            }
        }
        Ok(Self([r, g, b, a]))
    }

    pub fn channels(&self) -> [f64; 4] {
        self.0
    }
}

impl TryFrom<[f64; 4]> for Rgba {
    type Error = ModelError;

    fn try_from(v: [f64; 4]) -> Result<Self, Self::Error> {
        Rgba::new(v[0], v[1], v[2], v[3])
    }
}

impl From<Rgba> for [f64; 4] {
    fn from(c: Rgba) -> Self {
        c.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComponentKind {
    Atomic,
    Assembled,
}

/// Render primitive. Mesh paths are opaque and only passed through to clients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum Shape {
    Box { dimensions: [f64; 3] },
    Cylinder { dimensions: [f64; 2] },
    Mesh { path: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentRecord {
    pub name: CanonicalName,
    pub kind: ComponentKind,
    pub shape: Shape,
    #[serde(rename = "color")]
    pub default_color: Rgba,
    pub instances: Vec<Pose>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub constituents: Vec<CanonicalName>,
    /// Assembled records only: rest pose of each successor instance in the
    /// predecessor's local frame. Empty means the successor sits at the
    /// predecessor origin.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub mates: Vec<Pose>,
}

impl ComponentRecord {
    pub fn atomic(name: CanonicalName, shape: Shape, color: Rgba, instances: Vec<Pose>) -> Self {
        Self {
            name,
            kind: ComponentKind::Atomic,
            shape,
            default_color: color,
            instances,
            constituents: Vec::new(),
            mates: Vec::new(),
        }
    }

    pub fn is_assembled(&self) -> bool {
        self.kind == ComponentKind::Assembled
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct InstanceKey {
    pub name: CanonicalName,
    pub index: usize,
}

impl InstanceKey {
    pub fn new(name: CanonicalName, index: usize) -> Self {
        Self { name, index }
    }
}

impl fmt::Display for InstanceKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.name, self.index)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InstanceState {
    pub active: bool,
    pub color: Rgba,
    pub pose: Pose,
    pub animating: bool,
}

/// Successor-relative-to-predecessor approach motion. Poses are in the
/// anchor's local frame; `offsets` shifts instance `k` of the target
/// (`offsets[0]` is always zero).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ClipRepr", into = "ClipRepr")]
pub struct AnimationClip {
    target: CanonicalName,
    anchor: CanonicalName,
    start_pose: Pose,
    end_pose: Pose,
    duration: f64,
    looping: bool,
    offsets: Vec<Vec3>,
}

#[derive(Serialize, Deserialize)]
struct ClipRepr {
    target: CanonicalName,
    anchor: CanonicalName,
    instance_count: usize,
    start_pose: Pose,
    end_pose: Pose,
    duration: f64,
    looping: bool,
    offsets: Vec<Vec3>,
}

impl AnimationClip {
    pub fn new(
        target: CanonicalName,
        anchor: CanonicalName,
        start_pose: Pose,
        end_pose: Pose,
        duration: f64,
        looping: bool,
        offsets: Vec<Vec3>,
    ) -> Result<Self, ModelError> {
        if !duration.is_finite() || duration <= 0.0 {
            return Err(ModelError::NonPositiveDuration(duration));
        }
        if offsets.is_empty() {
            return Err(ModelError::ZeroInstances);
        }
        Ok(Self { target, anchor, start_pose, end_pose, duration, looping, offsets })
    }

    pub fn target(&self) -> &CanonicalName {
        &self.target
    }

    pub fn anchor(&self) -> &CanonicalName {
        &self.anchor
    }

    pub fn instance_count(&self) -> usize {
        self.offsets.len()
    }

    pub fn start_pose(&self) -> &Pose {
        &self.start_pose
    }

    pub fn end_pose(&self) -> &Pose {
        &self.end_pose
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn looping(&self) -> bool {
        self.looping
    }

    pub fn offsets(&self) -> &[Vec3] {
        &self.offsets
    }
}

impl TryFrom<ClipRepr> for AnimationClip {
    type Error = ModelError;

    fn try_from(r: ClipRepr) -> Result<Self, Self::Error> {
        if r.instance_count != r.offsets.len() {
            return Err(ModelError::ZeroInstances);
        }
        Self::new(r.target, r.anchor, r.start_pose, r.end_pose, r.duration, r.looping, r.offsets)
    }
}

impl From<AnimationClip> for ClipRepr {
    fn from(c: AnimationClip) -> Self {
        Self {
            instance_count: c.offsets.len(),
            target: c.target,
            anchor: c.anchor,
            start_pose: c.start_pose,
            end_pose: c.end_pose,
            duration: c.duration,
            looping: c.looping,
            offsets: c.offsets,
        }
    }
}

/// Bookkeeping for the instruction currently on display, so that clearing
/// it can undo exactly what it switched on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActiveInstruction {
    pub triple: ExtractionResult,
    pub combined: Option<CanonicalName>,
    pub activated: Vec<InstanceKey>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "SceneRepr", into = "SceneRepr")]
pub struct SceneState {
    pub instances: BTreeMap<InstanceKey, InstanceState>,
    pub current_clip: Option<AnimationClip>,
    pub step_cursor: usize,
    pub instruction: Option<ActiveInstruction>,
}

/// One row of the serialized instance table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceEntry {
    pub name: CanonicalName,
    pub index: usize,
    #[serde(flatten)]
    pub state: InstanceState,
}

impl InstanceEntry {
    pub fn key(&self) -> InstanceKey {
        InstanceKey::new(self.name.clone(), self.index)
    }
}

#[derive(Serialize, Deserialize)]
struct SceneRepr {
    step_cursor: usize,
    instances: Vec<InstanceEntry>,
    current_clip: Option<AnimationClip>,
    instruction: Option<ActiveInstruction>,
}

impl SceneState {
    pub fn entries(&self) -> Vec<InstanceEntry> {
        self.instances.iter().map(|(k, s)| InstanceEntry { name: k.name.clone(), index: k.index, state: *s }).collect()
    }

    pub fn get(&self, name: &str, index: usize) -> Option<&InstanceState> {
        let name = CanonicalName::parse(name).ok()?;
        self.instances.get(&InstanceKey::new(name, index))
    }
}

impl TryFrom<SceneRepr> for SceneState {
    type Error = ModelError;

    fn try_from(r: SceneRepr) -> Result<Self, Self::Error> {
        let mut instances = BTreeMap::new();
        for e in r.instances {
            if e.state.animating && !e.state.active {
                return Err(ModelError::AnimatingInactive(e.key().to_string()));
            }
            instances.insert(e.key(), e.state);
        }
        Ok(Self { instances, current_clip: r.current_clip, step_cursor: r.step_cursor, instruction: r.instruction })
    }
}

impl From<SceneState> for SceneRepr {
    fn from(s: SceneState) -> Self {
        Self {
            instances: s.entries(),
            step_cursor: s.step_cursor,
            current_clip: s.current_clip,
            instruction: s.instruction,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssemblyStep {
    index: usize,
    text: String,
}

impl AssemblyStep {
    pub fn new(index: usize, text: impl Into<String>) -> Result<Self, ModelError> {
        let text = text.into();
        if text.trim().is_empty() {
            return Err(ModelError::Empty("step text"));
        }
        if index == 0 {
            return Err(ModelError::Empty("step index"));
        }
        Ok(Self { index, text })
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn text(&self) -> &str {
        &self.text
    }
}

/// One supervised fine-tuning example.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SftRecord {
    pub instruction: String,
    pub input: String,
    pub output: String,
}

impl SftRecord {
    pub fn validate(&self) -> Result<(), ModelError> {
        for (field, value) in [("instruction", &self.instruction), ("input", &self.input), ("output", &self.output)] {
            if value.trim().is_empty() {
                return Err(ModelError::Empty(field));
            }
        }
        crate::extraction::parse_llm_output(&self.output)
            .map(|_| ())
            .map_err(|e| ModelError::BadOutput { output: self.output.clone(), reason: e.to_string() })
    }
}
