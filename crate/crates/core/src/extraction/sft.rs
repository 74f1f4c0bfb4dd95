//! Supervised fine-tuning datasets: a JSON array of
//! `{"instruction", "input", "output"}` objects.

use std::fs;
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::rules::number_word;
use super::{Lexicon, RawTriple, RuleSet};
use crate::model::{CanonicalName, SftRecord};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("dataset I/O failed: {0}")]
    Io(#[from] std::io::Error),
    #[error("dataset is not a JSON list of instruction/input/output objects: {0}")]
    Format(#[from] serde_json::Error),
    #[error("record {index} is invalid: {reason}")]
    Invalid { index: usize, reason: String },
    #[error("record count must be positive")]
    NonPositiveCount,
    #[error("no templates configured")]
    NoTemplates,
    #[error("lexicon needs at least {0} distinct components for the templates")]
    TooFewComponents(usize),
}

fn check(records: &[SftRecord]) -> Result<(), DatasetError> {
    for (index, r) in records.iter().enumerate() {
        r.validate().map_err(|e| DatasetError::Invalid { index, reason: e.to_string() })?;
    }
    Ok(())
}

pub fn emit_sft_dataset(records: &[SftRecord], path: impl AsRef<Path>) -> Result<(), DatasetError> {
    check(records)?;
    fs::write(path, serde_json::to_string_pretty(records)?)?;
    Ok(())
}

/// Reads a dataset file back, rejecting unknown keys and invalid records.
pub fn read_sft_dataset(path: impl AsRef<Path>) -> Result<Vec<SftRecord>, DatasetError> {
    let records: Vec<SftRecord> = serde_json::from_str(&fs::read_to_string(path)?)?;
    check(&records)?;
    Ok(records)
}

/// Fills role-labeled templates with lexicon surface forms. Each record's
/// output is the ground-truth triple in the surface forms used in its input.
pub fn generate_sft_corpus(
    lexicon: &Lexicon,
    rules: &RuleSet,
    n: i64,
    seed: u64,
) -> Result<Vec<SftRecord>, DatasetError> {
    if n <= 0 {
        return Err(DatasetError::NonPositiveCount);
    }
    if rules.templates.is_empty() {
        return Err(DatasetError::NoTemplates);
    }
    let names = lexicon.names();
    let needed = if rules.templates.iter().any(|t| t.contains("{other}")) { 3 } else { 2 };
    if names.len() < needed {
        return Err(DatasetError::TooFewComponents(needed));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n as usize);
    for _ in 0..n {
        let template = rules.templates.choose(&mut rng).expect("non-empty");
        let verb = rules.verbs.choose(&mut rng).expect("validated non-empty");
        let successor = names.choose(&mut rng).expect("non-empty");
        let predecessor = pick_other(&names, &[successor], &mut rng);
        let other = pick_other(&names, &[successor, predecessor], &mut rng);
        let count = if rng.random_bool(0.5) { 1 } else { rng.random_range(2..=6) };

        let succ_surface = pick_surface(lexicon, successor, count > 1, &mut rng);
        let pred_surface = pick_surface(lexicon, predecessor, false, &mut rng);
        let other_surface = pick_surface(lexicon, other, false, &mut rng);
        let succ_phrase = match count {
            1 => succ_surface.clone(),
            n if rng.random_bool(0.5) => format!("{} {succ_surface}", number_word(n).expect("n <= 10")),
            n => format!("{n} {succ_surface}"),
        };

        let input = capitalize(
            &template
                .replace("{verb}", verb)
                .replace("{successor}", &succ_phrase)
                .replace("{predecessor}", &pred_surface)
                .replace("{other}", &other_surface),
        );
        let output = RawTriple { predecessor: pred_surface, successor: succ_surface, count }.to_string();
        out.push(SftRecord { instruction: rules.instruction.clone(), input, output });
    }
    Ok(out)
}

fn pick_other<'a>(names: &'a [CanonicalName], taken: &[&CanonicalName], rng: &mut ChaCha8Rng) -> &'a CanonicalName {
    let pool: Vec<&CanonicalName> = names.iter().filter(|n| !taken.contains(n)).collect();
    // falls back to any name when the template has no slot that needs it
    pool.choose(rng).copied().unwrap_or(&names[0])
}

/// Prefers plural-looking surfaces when `plural`, singular ones otherwise.
fn pick_surface(lexicon: &Lexicon, name: &CanonicalName, plural: bool, rng: &mut ChaCha8Rng) -> String {
    let all: Vec<&str> = lexicon.surfaces_of(name).collect();
    let preferred: Vec<&str> = all.iter().copied().filter(|s| s.ends_with('s') == plural).collect();
    let pool = if preferred.is_empty() { &all } else { &preferred };
    pool.choose(rng).expect("every name has a surface").to_string()
}

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extraction::{parse_llm_output, resolve_names, rule_extract};

    fn lex() -> Lexicon {
        Lexicon::from_json(
            r#"{"base": "base", "top": "top", "piston": "piston", "pistons": "piston",
                "small screw": "small_screw", "small screws": "small_screw"}"#,
        )
        .unwrap()
    }

    fn rules() -> RuleSet {
        RuleSet {
            templates: vec![
                "{verb} the {successor} into the {predecessor}.".into(),
                "Carefully {verb} the {successor} onto the {predecessor} beside the {other}.".into(),
            ],
            ..RuleSet::default()
        }
    }

    #[test]
    fn generated_records_agree_with_rule_extractor() {
        let (lex, rules) = (lex(), rules());
        let corpus = generate_sft_corpus(&lex, &rules, 200, 3).unwrap();
        assert_eq!(corpus.len(), 200);
        for r in &corpus {
            let truth = resolve_names(&parse_llm_output(&r.output).unwrap(), &lex).unwrap();
            assert_eq!(rule_extract(&r.input, &lex, &rules).unwrap(), truth, "{r:?}");
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let a = generate_sft_corpus(&lex(), &rules(), 50, 11).unwrap();
        assert_eq!(a, generate_sft_corpus(&lex(), &rules(), 50, 11).unwrap());
        assert_ne!(a, generate_sft_corpus(&lex(), &rules(), 50, 12).unwrap());
    }

    #[test]
    fn rejects_bad_counts() {
        assert!(matches!(generate_sft_corpus(&lex(), &rules(), 0, 1), Err(DatasetError::NonPositiveCount)));
        assert!(matches!(generate_sft_corpus(&lex(), &rules(), -3, 1), Err(DatasetError::NonPositiveCount)));
        assert!(matches!(generate_sft_corpus(&lex(), &RuleSet::default(), 5, 1), Err(DatasetError::NoTemplates)));
    }

    #[test]
    fn empty_dataset_is_empty_array() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.json");
        emit_sft_dataset(&[], &path).unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "[]");
        assert_eq!(read_sft_dataset(&path).unwrap(), vec![]);
    }

    #[test]
    fn reader_rejects_extra_keys_and_bad_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.json");
        fs::write(&path, r#"[{"instruction":"i","input":"x","output":"a, b, 1","extra":1}]"#).unwrap();
        assert!(matches!(read_sft_dataset(&path), Err(DatasetError::Format(_))));
        fs::write(&path, r#"[{"instruction":"i","input":"x","output":"a, b"}]"#).unwrap();
        assert!(matches!(read_sft_dataset(&path), Err(DatasetError::Invalid { index: 0, .. })));
        let bad = SftRecord { instruction: "i".into(), input: "".into(), output: "a, b, 1".into() };
        assert!(emit_sft_dataset(&[bad], &path).is_err());
    }
}
