//! Headless walkthrough producing one snapshot file per step.

use std::fs;
use std::ops::Range;
use std::path::Path;

use anyhow::{bail, Context, Result};
use vigen_core::engine::{highlighted_records, snapshot, AnimationParams, TrainingSession};

use crate::bundle::Bundle;
use crate::WalkArgs;

const MAX_RANGES: usize = 8;

pub fn snapshot_file(step: usize) -> String {
    format!("step_{step:02}.snap")
}

/// Half-open byte ranges where `a` and `b` differ, including a length tail.
pub fn diff_ranges(a: &[u8], b: &[u8]) -> Vec<Range<usize>> {
    let mut out: Vec<Range<usize>> = Vec::new();
    for i in 0..a.len().max(b.len()) {
        if a.get(i) != b.get(i) {
            match out.last_mut() {
                Some(r) if r.end == i => r.end = i + 1,
                _ => out.push(i..i + 1),
            }
        }
    }
    out
}

fn format_ranges(ranges: &[Range<usize>]) -> String {
    let mut parts: Vec<String> = ranges.iter().take(MAX_RANGES).map(|r| format!("{}..{}", r.start, r.end)).collect();
    if ranges.len() > MAX_RANGES {
        parts.push(format!("and {} more", ranges.len() - MAX_RANGES));
    }
    parts.join(", ")
}

pub fn run(args: WalkArgs) -> Result<()> {
    let bundle = Bundle::load(&args.session)?;
    let params = AnimationParams::default();
    let mut session = TrainingSession::new(&bundle.db, bundle.steps.clone());
    if !args.check {
        fs::create_dir_all(&args.golden_dir).with_context(|| format!("cannot create {}", args.golden_dir.display()))?;
    }

    let mut mismatches = 0;
    for _ in 0..bundle.steps.len() {
        let report = session.next_step(bundle.extractor.as_ref(), &bundle.db, &params)?;
        let index = report.step.index();
        let text = snapshot(session.scene());
        let highlighted: Vec<String> =
            highlighted_records(&bundle.db, session.scene()).iter().map(ToString::to_string).collect();
        let highlighted = highlighted.join(", ");
        let path = args.golden_dir.join(snapshot_file(index));
        if args.check {
            let outcome = check_one(&path, &text);
            if outcome != "ok" {
                mismatches += 1;
            }
            println!("step {index}: {} [{highlighted}] {outcome}", report.triple);
        } else {
            fs::write(&path, &text).with_context(|| format!("cannot write {}", path.display()))?;
            println!("step {index}: {} [{highlighted}] wrote {}", report.triple, path.display());
        }
    }

    if args.check {
        for stale in stale_goldens(&args.golden_dir, bundle.steps.len())? {
            mismatches += 1;
            println!("{stale}: no such step in the script");
        }
        if mismatches > 0 {
            bail!("{mismatches} snapshot(s) differ from {}", args.golden_dir.display());
        }
        println!("{} snapshots match {}", bundle.steps.len(), args.golden_dir.display());
    }
    Ok(())
}

fn check_one(path: &Path, actual: &str) -> String {
    match fs::read(path) {
        Err(_) => format!("MISSING {}", path.display()),
        Ok(expected) => {
            let ranges = diff_ranges(&expected, actual.as_bytes());
            if ranges.is_empty() {
                "ok".to_owned()
            } else {
                format!("MISMATCH {} bytes {}", path.display(), format_ranges(&ranges))
            }
        }
    }
}

fn stale_goldens(dir: &Path, steps: usize) -> Result<Vec<String>> {
    let mut stale = Vec::new();
    let entries = fs::read_dir(dir).with_context(|| format!("cannot read {}", dir.display()))?;
    for entry in entries {
        let name = entry?.file_name().to_string_lossy().into_owned();
        let index = name.strip_prefix("step_").and_then(|s| s.strip_suffix(".snap")).and_then(|s| s.parse().ok());
        if index.is_some_and(|i: usize| i == 0 || i > steps) {
            stale.push(name);
        }
    }
    stale.sort();
    Ok(stale)
}
