//! Checks against the bundled pneumatic-cylinder reference data.

use std::path::PathBuf;

use vigen_core::database::{combined_name, load_manifest, lookup, read_manifest, save_manifest, validate_database};
use vigen_core::extraction::{
    generate_sft_corpus, parse_llm_output, read_sft_dataset, resolve_names, rule_extract, rule_extract_detailed,
    serialize_extraction, Lexicon, RuleSet,
};
use vigen_core::model::{CanonicalName, ComponentKind};
use vigen_core::ExtractionResult;

const TABLE_INPUT: &str = "You need to fasten the base onto the assembled components and check that the four \
                           holes in the base align perfectly with the small screws.";

fn data(file: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/pneumatic").join(file)
}

fn name(s: &str) -> CanonicalName {
    CanonicalName::parse(s).unwrap()
}

fn lexicon() -> Lexicon {
    Lexicon::load(data("lexicon.json")).unwrap()
}

fn rules() -> RuleSet {
    RuleSet::load(data("extractor.json")).unwrap()
}

#[test]
fn manifest_lists_the_seven_parts() {
    let db = load_manifest(data("manifest.json")).unwrap();
    let atomic: Vec<&str> =
        db.components().iter().filter(|c| c.kind == ComponentKind::Atomic).map(|c| c.name.as_str()).collect();
    assert_eq!(atomic, ["fixture", "base", "cylinder", "piston", "top", "small_screw", "large_screw"]);
    assert!(validate_database(&db).is_empty());
    assert_eq!(lookup(&db, &name("base")).unwrap().name, name("base"));
    assert!(lookup(&db, &name("widget")).is_none());
    // the manifest assembles the screws before the base, not the other way round
    assert!(lookup(&db, &name("small_screw_base")).is_some());
    assert!(lookup(&db, &name("base_small_screw")).is_none());
    for rec in db.components() {
        assert!(std::ptr::eq(lookup(&db, &rec.name).unwrap(), rec));
    }
}

#[test]
fn manifest_save_load_identity() {
    let db = load_manifest(data("manifest.json")).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("copy.json");
    save_manifest(&db, &path).unwrap();
    assert_eq!(load_manifest(&path).unwrap(), db);
}

#[test]
fn dangling_constituent_reported_on_load() {
    let db = read_manifest(data("manifest.json")).unwrap();
    let without_cylinder: Vec<_> = db.components().iter().filter(|c| c.name != "cylinder").cloned().collect();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    save_manifest(&vigen_core::Database::from_records(without_cylinder), &path).unwrap();
    let err = load_manifest(&path).unwrap_err().to_string();
    assert!(err.contains("\"cylinder\" is not in the manifest"), "{err}");
}

#[test]
fn screw_base_example() {
    let (lex, rules) = (lexicon(), rules());
    let e = rule_extract_detailed(TABLE_INPUT, &lex, &rules).unwrap();
    assert_eq!(e.result, ExtractionResult::new(name("small_screw"), name("base"), 1).unwrap());
    assert_eq!(e.surface.to_string(), "small screws, base, 1");
    let parsed = parse_llm_output("small screws, base, 1").unwrap();
    assert_eq!(resolve_names(&parsed, &lex).unwrap(), e.result);
    assert_eq!(serialize_extraction(&e.result), "small_screw, base, 1");
}

#[test]
fn insert_piston_matches_template_labels() {
    let r = rule_extract("Insert the piston into the cylinder.", &lexicon(), &rules()).unwrap();
    assert_eq!(serialize_extraction(&r), "cylinder, piston, 1");
}

#[test]
fn hand_written_seed_set_is_extracted_exactly() {
    let (lex, rules) = (lexicon(), rules());
    let seed = read_sft_dataset(data("seed_sft.json")).unwrap();
    assert_eq!(seed.len(), 60);
    let misses: Vec<_> = seed
        .iter()
        .filter(|r| {
            let truth = resolve_names(&parse_llm_output(&r.output).unwrap(), &lex).unwrap();
            rule_extract(&r.input, &lex, &rules).ok() != Some(truth)
        })
        .map(|r| r.input.as_str())
        .collect();
    assert!(misses.is_empty(), "{misses:#?}");
}

#[test]
fn templated_corpus_is_extracted_exactly() {
    let (lex, rules) = (lexicon(), rules());
    let corpus = generate_sft_corpus(&lex, &rules, 420, 7).unwrap();
    assert_eq!(corpus.len(), 420);
    for r in &corpus {
        let truth = resolve_names(&parse_llm_output(&r.output).unwrap(), &lex).unwrap();
        assert_eq!(rule_extract(&r.input, &lex, &rules).as_ref(), Ok(&truth), "{}", r.input);
    }
}

#[test]
fn step_script_triples_have_combined_records() {
    let db = load_manifest(data("manifest.json")).unwrap();
    let steps = vigen_core::engine::load_steps(data("steps.txt")).unwrap();
    assert_eq!(steps.len(), 6);
    for step in &steps {
        let t = rule_extract(step.text(), &lexicon(), &rules()).unwrap();
        assert!(lookup(&db, &combined_name(t.predecessor(), t.successor())).is_some(), "step {} -> {t}", step.index());
    }
}
