//! Canonical text encoding of a scene for golden-file diffing.
//!
//! Lines are sorted by instance key and every real number is printed with
//! nine decimals, so equal scenes give byte-equal text.

use std::fmt::Write;

use crate::model::{Pose, SceneState};

fn num(x: f64) -> String {
    let s = format!("{x:.9}");
    if s.bytes().all(|b| matches!(b, b'-' | b'0' | b'.')) {
        s.trim_start_matches('-').to_owned()
    } else {
        s
    }
}

fn nums(xs: &[f64]) -> String {
    xs.iter().map(|&x| num(x)).collect::<Vec<_>>().join(",")
}

fn pose(p: &Pose) -> String {
    format!("position={} orientation={}", nums(&p.position), nums(&p.orientation.wxyz()))
}

pub fn snapshot(scene: &SceneState) -> String {
    let mut out = String::new();
    writeln!(out, "step_cursor {}", scene.step_cursor).unwrap();

    match &scene.instruction {
        None => writeln!(out, "instruction none").unwrap(),
        Some(instr) => {
            let combined = instr.combined.as_ref().map_or("none", |c| c.as_str());
            let mut activated: Vec<String> = instr.activated.iter().map(ToString::to_string).collect();
            activated.sort();
            writeln!(
                out,
                "instruction predecessor={} successor={} count={} combined={} activated={}",
                instr.triple.predecessor(),
                instr.triple.successor(),
                instr.triple.count(),
                combined,
                if activated.is_empty() { "none".to_owned() } else { activated.join(",") },
            )
            .unwrap();
        }
    }

    match &scene.current_clip {
        None => writeln!(out, "clip none").unwrap(),
        Some(clip) => {
            writeln!(
                out,
                "clip target={} anchor={} instances={} duration={} looping={}",
                clip.target(),
                clip.anchor(),
                clip.instance_count(),
                num(clip.duration()),
                clip.looping(),
            )
            .unwrap();
            writeln!(out, "clip.start {}", pose(clip.start_pose())).unwrap();
            writeln!(out, "clip.end {}", pose(clip.end_pose())).unwrap();
            for (k, o) in clip.offsets().iter().enumerate() {
                writeln!(out, "clip.offset {k} {}", nums(o)).unwrap();
            }
        }
    }

    for (key, st) in &scene.instances {
        writeln!(
            out,
            "instance {key} active={} animating={} color={} {}",
            st.active,
            st.animating,
            nums(&st.color.channels()),
            pose(&st.pose),
        )
        .unwrap();
    }
    out
}
