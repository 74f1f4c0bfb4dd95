//! Instruction generation over a scene: highlight the step's components,
//! bind the assembly animation, and undo or commit the previous step.

use std::collections::BTreeSet;

use super::{make_animation, AnimationParams, EngineError};
use crate::database::{combined_name, Database};
use crate::model::{
    ActiveInstruction, CanonicalName, ComponentRecord, ExtractionResult, InstanceKey, InstanceState, Rgba, SceneState,
};

/// Scene before any step: atomic parts laid out at their manifest poses,
/// assemblies hidden.
pub fn initial_scene(db: &Database) -> SceneState {
    let mut scene = SceneState::default();
    for rec in db.components() {
        for (i, pose) in rec.instances.iter().enumerate() {
            scene.instances.entry(InstanceKey::new(rec.name.clone(), i)).or_insert(InstanceState {
                active: !rec.is_assembled(),
                color: rec.default_color,
                pose: *pose,
                animating: false,
            });
        }
    }
    scene
}

fn instance_mut<'s>(scene: &'s mut SceneState, rec: &ComponentRecord, i: usize) -> &'s mut InstanceState {
    scene.instances.entry(InstanceKey::new(rec.name.clone(), i)).or_insert(InstanceState {
        active: false,
        color: rec.default_color,
        pose: rec.instances[i],
        animating: false,
    })
}

/// Turns on every instance of `rec`, remembering which ones were off.
fn activate(scene: &mut SceneState, rec: &ComponentRecord, activated: &mut Vec<InstanceKey>) {
    for i in 0..rec.instances.len() {
        let st = instance_mut(scene, rec, i);
        if !st.active {
            st.active = true;
            activated.push(InstanceKey::new(rec.name.clone(), i));
        }
    }
}

pub fn generate_instruction(
    db: &Database,
    scene: &SceneState,
    result: &ExtractionResult,
    params: &AnimationParams,
) -> Result<SceneState, EngineError> {
    let (a, b) = (result.predecessor(), result.successor());
    if db.lookup(a).is_none() && db.lookup(b).is_none() {
        return Err(EngineError::UnknownComponent(format!("{a}, {b}")));
    }
    if let Some(succ) = db.lookup(b) {
        if result.count() as usize > succ.instances.len() {
            return Err(EngineError::InsufficientInstances {
                component: b.to_string(),
                requested: result.count() as usize,
                available: succ.instances.len(),
            });
        }
    }

    let mut next = clear_instruction(db, scene);
    let mut activated = Vec::new();

    for rec in db.components().iter().filter(|r| r.name == *a || r.name == *b) {
        activate(&mut next, rec, &mut activated);
        for i in 0..rec.instances.len() {
            instance_mut(&mut next, rec, i).color = Rgba::GREEN;
        }
    }

    let target = combined_name(a, b);
    let mut combined = None;
    if let Some(rec) = db.components().iter().find(|r| r.name == target) {
        activate(&mut next, rec, &mut activated);
        for i in 0..rec.instances.len() {
            instance_mut(&mut next, rec, i).animating = true;
        }
        next.current_clip = Some(make_animation(db, a, b, result.count(), params)?);
        combined = Some(target);
    }

    next.instruction = Some(ActiveInstruction { triple: result.clone(), combined, activated });
    Ok(next)
}

/// Removes the current instruction: default colors, no clip, nothing
/// animating, and whatever it switched on switched off again. Committed
/// assemblies stay as they are.
pub fn clear_instruction(db: &Database, scene: &SceneState) -> SceneState {
    let mut next = scene.clone();
    if let Some(instr) = next.instruction.take() {
        for key in &instr.activated {
            if let Some(st) = next.instances.get_mut(key) {
                st.active = false;
            }
        }
    }
    for (key, st) in next.instances.iter_mut() {
        st.animating = false;
        if let Some(rec) = db.lookup(&key.name) {
            st.color = rec.default_color;
        }
    }
    next.current_clip = None;
    next
}

/// Clears the current instruction and keeps its assembly: the combined
/// record stays active at rest and its constituents' standalone instances
/// are hidden.
pub fn commit_instruction(db: &Database, scene: &SceneState) -> SceneState {
    let combined = scene.instruction.as_ref().and_then(|i| i.combined.clone());
    let mut next = clear_instruction(db, scene);
    if let Some(rec) = combined.as_ref().and_then(|c| db.lookup(c)) {
        for i in 0..rec.instances.len() {
            instance_mut(&mut next, rec, i).active = true;
        }
        for part in rec.constituents.iter().filter_map(|p| db.lookup(p)) {
            for i in 0..part.instances.len() {
                instance_mut(&mut next, part, i).active = false;
            }
        }
    }
    next
}

/// Records that currently differ from their resting look: recolored or
/// animating.
pub fn highlighted_records(db: &Database, scene: &SceneState) -> BTreeSet<CanonicalName> {
    scene
        .instances
        .iter()
        .filter(|(key, st)| st.animating || db.lookup(&key.name).is_some_and(|r| r.default_color != st.color))
        .map(|(key, _)| key.name.clone())
        .collect()
}

/// Records with at least one instance colored differently from its default.
pub fn recolored_records(db: &Database, scene: &SceneState) -> BTreeSet<CanonicalName> {
    scene
        .instances
        .iter()
        .filter(|(key, st)| db.lookup(&key.name).is_some_and(|r| r.default_color != st.color))
        .map(|(key, _)| key.name.clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ComponentKind, Pose, Shape};

    fn name(s: &str) -> CanonicalName {
        CanonicalName::parse(s).unwrap()
    }

    fn gray() -> Rgba {
        Rgba::new(0.6, 0.6, 0.6, 1.0).unwrap()
    }

    fn atomic(n: &str, count: usize) -> ComponentRecord {
        ComponentRecord::atomic(name(n), Shape::Box { dimensions: [0.1; 3] }, gray(), vec![Pose::IDENTITY; count])
    }

    fn assembled(a: &str, b: &str) -> ComponentRecord {
        ComponentRecord {
            kind: ComponentKind::Assembled,
            constituents: vec![name(a), name(b)],
            ..atomic(&format!("{a}_{b}"), 1)
        }
    }

    fn db() -> Database {
        Database::from_records(vec![
            atomic("base", 1),
            atomic("small_screw", 4),
            atomic("top", 1),
            assembled("small_screw", "base"),
            assembled("base", "top"),
        ])
    }

    fn triple(a: &str, b: &str, n: u32) -> ExtractionResult {
        ExtractionResult::new(name(a), name(b), n).unwrap()
    }

    #[test]
    fn initial_layout() {
        let s = initial_scene(&db());
        assert_eq!(s.instances.len(), 1 + 4 + 1 + 1 + 1);
        assert!(s.get("small_screw", 3).unwrap().active);
        assert!(!s.get("small_screw_base", 0).unwrap().active);
        assert!(s.current_clip.is_none());
    }

    #[test]
    fn highlights_and_animates() {
        let db = db();
        let s = generate_instruction(&db, &initial_scene(&db), &triple("small_screw", "base", 1), &Default::default())
            .unwrap();
        for i in 0..4 {
            assert_eq!(s.get("small_screw", i).unwrap().color, Rgba::GREEN);
        }
        assert_eq!(s.get("base", 0).unwrap().color, Rgba::GREEN);
        let combined = s.get("small_screw_base", 0).unwrap();
        assert!(combined.active && combined.animating);
        assert_eq!(combined.color, gray());
        assert_eq!(s.get("top", 0).unwrap().color, gray());
        assert!(s.current_clip.is_some());
        assert_eq!(
            highlighted_records(&db, &s).into_iter().map(String::from).collect::<Vec<_>>(),
            ["base", "small_screw", "small_screw_base"]
        );
    }

    #[test]
    fn no_combined_record_means_no_clip() {
        let db = db();
        let s = generate_instruction(&db, &initial_scene(&db), &triple("top", "small_screw", 2), &Default::default())
            .unwrap();
        assert!(s.current_clip.is_none());
        assert_eq!(recolored_records(&db, &s).len(), 2);
    }

    #[test]
    fn errors() {
        let db = db();
        let s = initial_scene(&db);
        assert!(matches!(
            generate_instruction(&db, &s, &triple("widget", "gadget", 1), &Default::default()),
            Err(EngineError::UnknownComponent(_))
        ));
        assert!(matches!(
            generate_instruction(&db, &s, &triple("base", "small_screw", 5), &Default::default()),
            Err(EngineError::InsufficientInstances { requested: 5, available: 4, .. })
        ));
        // one known name is enough to highlight
        assert!(generate_instruction(&db, &s, &triple("widget", "base", 1), &Default::default()).is_ok());
    }

    #[test]
    fn clear_restores_and_is_idempotent() {
        let db = db();
        let init = initial_scene(&db);
        assert_eq!(clear_instruction(&db, &init), init);
        let s = generate_instruction(&db, &init, &triple("small_screw", "base", 1), &Default::default()).unwrap();
        let cleared = clear_instruction(&db, &s);
        assert_eq!(cleared, init);
        assert_eq!(clear_instruction(&db, &cleared), cleared);
    }

    #[test]
    fn commit_keeps_assembly() {
        let db = db();
        let s = generate_instruction(&db, &initial_scene(&db), &triple("small_screw", "base", 1), &Default::default())
            .unwrap();
        let c = commit_instruction(&db, &s);
        assert!(c.get("small_screw_base", 0).unwrap().active);
        assert!(!c.get("small_screw_base", 0).unwrap().animating);
        assert!(!c.get("base", 0).unwrap().active);
        assert!(!c.get("small_screw", 2).unwrap().active);
        assert!(c.instruction.is_none() && c.current_clip.is_none());
        // a committed assembly survives a later clear
        let later = generate_instruction(&db, &c, &triple("base", "top", 1), &Default::default()).unwrap();
        assert!(later.get("base", 0).unwrap().active);
        let undone = clear_instruction(&db, &later);
        assert!(undone.get("small_screw_base", 0).unwrap().active);
        assert!(!undone.get("base", 0).unwrap().active);
        assert_eq!(undone, c);
    }

    #[test]
    fn first_match_break() {
        let mut second = assembled("small_screw", "base");
        second.default_color = Rgba::new(0.1, 0.2, 0.3, 1.0).unwrap();
        second.instances = vec![Pose::IDENTITY; 2];
        let mut records = db().components().to_vec();
        records.push(second);
        let db = Database::from_records(records);
        let s = generate_instruction(&db, &initial_scene(&db), &triple("small_screw", "base", 1), &Default::default())
            .unwrap();
        // the duplicate's extra instance is never touched
        assert!(!s.get("small_screw_base", 1).unwrap().active);
        assert!(s.get("small_screw_base", 0).unwrap().animating);
    }
}
