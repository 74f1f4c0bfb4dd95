use serde::{Deserialize, Serialize};

use super::EngineError;
use crate::database::{combined_name, Database};
use crate::model::{norm3, AnimationClip, CanonicalName, Pose, Quat, Vec3};

/// Straight-line approach: the successor starts `approach_distance` meters
/// along `approach_axis` (anchor frame) from its mated pose.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnimationParams {
    pub approach_distance: f64,
    pub approach_axis: Vec3,
    pub duration: f64,
}

impl Default for AnimationParams {
    fn default() -> Self {
        Self { approach_distance: 0.2, approach_axis: [0.0, 0.0, 1.0], duration: 2.0 }
    }
}

impl AnimationParams {
    fn unit_axis(&self) -> Result<Vec3, EngineError> {
        let len = norm3(self.approach_axis);
        if !len.is_finite() || len == 0.0 {
            return Err(EngineError::InvalidParams(format!("approach axis {:?} has no direction", self.approach_axis)));
        }
        Ok(self.approach_axis.map(|c| c / len))
    }
}

/// Clip moving `count` instances of `successor` into place relative to
/// `predecessor`. The mated poses come from the record named
/// `predecessor_successor`, if the database has one.
pub fn make_animation(
    db: &Database,
    predecessor: &CanonicalName,
    successor: &CanonicalName,
    count: u32,
    params: &AnimationParams,
) -> Result<AnimationClip, EngineError> {
    db.lookup(predecessor).ok_or_else(|| EngineError::UnknownComponent(predecessor.to_string()))?;
    let succ = db.lookup(successor).ok_or_else(|| EngineError::UnknownComponent(successor.to_string()))?;
    let count = count as usize;
    if count == 0 || count > succ.instances.len() {
        return Err(EngineError::InsufficientInstances {
            component: successor.to_string(),
            requested: count,
            available: succ.instances.len(),
        });
    }
    if !params.approach_distance.is_finite() {
        return Err(EngineError::InvalidParams("approach distance must be finite".into()));
    }
    let axis = params.unit_axis()?;

    let mates = db.lookup(&combined_name(predecessor, successor)).map(|r| r.mates.as_slice()).unwrap_or_default();
    let end_pose = mates.first().copied().unwrap_or(Pose::IDENTITY);
    let start_pose = Pose {
        position: std::array::from_fn(|i| end_pose.position[i] + params.approach_distance * axis[i]),
        orientation: end_pose.orientation,
    };
    let offsets = (0..count)
        .map(|k| match mates.get(k) {
            Some(m) => std::array::from_fn(|i| m.position[i] - end_pose.position[i]),
            None => [0.0; 3],
        })
        .collect();
    Ok(AnimationClip::new(
        successor.clone(),
        predecessor.clone(),
        start_pose,
        end_pose,
        params.duration,
        true,
        offsets,
    )?)
}

/// Clip phase in `[0, 1]` at time `t`; negative times clamp to 0.
pub fn phase(clip: &AnimationClip, t: f64) -> f64 {
    let t = t.max(0.0);
    let d = clip.duration();
    if clip.looping() {
        t.rem_euclid(d) / d
    } else {
        (t / d).min(1.0)
    }
}

/// Pose of instance 0 of the clip target at time `t`.
pub fn sample_animation(clip: &AnimationClip, t: f64) -> Pose {
    let u = phase(clip, t);
    let (a, b) = (clip.start_pose(), clip.end_pose());
    if u == 0.0 {
        return *a;
    }
    if u == 1.0 {
        return *b;
    }
    Pose {
        position: std::array::from_fn(|i| (1.0 - u) * a.position[i] + u * b.position[i]),
        orientation: slerp(&a.orientation, &b.orientation, u),
    }
}

/// Pose of instance `k`, shifted by its offset from instance 0.
pub fn sample_instance(clip: &AnimationClip, k: usize, t: f64) -> Option<Pose> {
    let offset = clip.offsets().get(k)?;
    let mut pose = sample_animation(clip, t);
    for (p, o) in pose.position.iter_mut().zip(offset) {
        *p += o;
    }
    Some(pose)
}

/// Shortest-arc spherical interpolation; falls back to normalized lerp for
/// nearly parallel inputs.
pub fn slerp(a: &Quat, b: &Quat, u: f64) -> Quat {
    let mut dot = a.dot(b);
    let mut b = *b;
    if dot < 0.0 {
        b = Quat { w: -b.w, x: -b.x, y: -b.y, z: -b.z };
        dot = -dot;
    }
    let (wa, wb) = if dot > 0.9995 {
        (1.0 - u, u)
    } else {
        let theta = dot.min(1.0).acos();
        let s = theta.sin();
        (((1.0 - u) * theta).sin() / s, (u * theta).sin() / s)
    };
    let (w, x, y, z) = (wa * a.w + wb * b.w, wa * a.x + wb * b.x, wa * a.y + wb * b.y, wa * a.z + wb * b.z);
    let n = (w * w + x * x + y * y + z * z).sqrt();
    Quat { w: w / n, x: x / n, y: y / n, z: z / n }
}
