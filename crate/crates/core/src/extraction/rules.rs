//! Deterministic lexicon-and-verb-pattern extractor.
//!
//! Mentions are found by a longest-match scan of the step's word tokens
//! against the lexicon. The successor is the first mention reached from an
//! assembly verb without crossing a preposition (the verb's direct object).
//! With two distinct components the predecessor is the other one; with more,
//! it is the first other component introduced by a preposition after the
//! successor. The count is a numeral directly in front of the successor
//! mention, 1 otherwise.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{normalize_surface, tokenize, ExtractError, Extractor, Lexicon, RawTriple};
use crate::model::{CanonicalName, ExtractionResult};

/// Instruction string sent with every step, as in the training data.
pub const DEFAULT_INSTRUCTION: &str = "List all the components mentioned in the procedural step.";

const NUMBER_WORDS: [&str; 10] = ["one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten"];

#[derive(Debug, Error)]
pub enum RuleSetError {
    #[error("cannot read rule file: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed rule file: {0}")]
    Format(#[from] serde_json::Error),
    #[error("template {index} is invalid: {reason}")]
    Template { index: usize, reason: String },
    #[error("rule file lists no assembly verbs")]
    NoVerbs,
}

/// Extractor vocabulary plus the corpus templates; loaded from a JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RuleSet {
    pub instruction: String,
    pub verbs: Vec<String>,
    pub prepositions: Vec<String>,
    /// Sentences with `{verb}`, `{successor}`, `{predecessor}` and optionally
    /// `{other}` slots.
    pub templates: Vec<String>,
}

impl Default for RuleSet {
    fn default() -> Self {
        let words = |ws: &[&str]| ws.iter().map(|w| w.to_string()).collect();
        Self {
            instruction: DEFAULT_INSTRUCTION.to_owned(),
            verbs: words(&["fasten", "attach", "insert", "place", "screw", "mount", "put", "fix"]),
            prepositions: words(&[
                "into", "onto", "on", "to", "in", "inside", "through", "over", "under", "with", "against", "beside",
                "above", "atop", "at", "upon",
            ]),
            templates: Vec::new(),
        }
    }
}

pub(crate) const SLOTS: [&str; 4] = ["{verb}", "{successor}", "{predecessor}", "{other}"];

impl RuleSet {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, RuleSetError> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn from_json(text: &str) -> Result<Self, RuleSetError> {
        let mut rules: RuleSet = serde_json::from_str(text)?;
        for list in [&mut rules.verbs, &mut rules.prepositions] {
            for w in list.iter_mut() {
                *w = normalize_surface(w);
            }
        }
        rules.validate()?;
        Ok(rules)
    }

    pub fn validate(&self) -> Result<(), RuleSetError> {
        if self.verbs.is_empty() {
            return Err(RuleSetError::NoVerbs);
        }
        for (index, t) in self.templates.iter().enumerate() {
            let bad = |reason: String| RuleSetError::Template { index, reason };
            for slot in ["{successor}", "{predecessor}"] {
                if t.matches(slot).count() != 1 {
                    return Err(bad(format!("needs exactly one {slot}")));
                }
            }
            for slot in ["{verb}", "{other}"] {
                if t.matches(slot).count() > 1 {
                    return Err(bad(format!("repeats {slot}")));
                }
            }
            let mut rest = t.clone();
            for slot in SLOTS {
                rest = rest.replace(slot, "");
            }
            if rest.contains('{') || rest.contains('}') {
                return Err(bad("unknown slot".into()));
            }
        }
        Ok(())
    }

    fn is_verb(&self, token: &str) -> bool {
        self.verbs.iter().any(|v| v == token)
    }

    fn is_preposition(&self, token: &str) -> bool {
        self.prepositions.iter().any(|p| p == token)
    }
}

/// A rule-based triple together with the surface forms it was read from.
#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    pub result: ExtractionResult,
    pub surface: RawTriple,
}

#[derive(Debug, Clone, Copy)]
struct Mention<'a> {
    start: usize,
    end: usize,
    surface: &'a str,
    name: &'a CanonicalName,
}

pub fn rule_extract(text: &str, lexicon: &Lexicon, rules: &RuleSet) -> Result<ExtractionResult, ExtractError> {
    rule_extract_detailed(text, lexicon, rules).map(|e| e.result)
}

pub fn rule_extract_detailed(text: &str, lexicon: &Lexicon, rules: &RuleSet) -> Result<Extraction, ExtractError> {
    let tokens = tokenize(&normalize_surface(text));
    let mentions = scan(&tokens, lexicon);
    if mentions.is_empty() {
        return Err(ExtractError::NoComponentsFound);
    }
    let mut distinct: Vec<&CanonicalName> = Vec::new();
    for m in &mentions {
        if !distinct.contains(&m.name) {
            distinct.push(m.name);
        }
    }
    if distinct.len() == 1 {
        return Err(ExtractError::SingleComponent(distinct[0].to_string()));
    }

    let (predecessor, successor) = match direct_object(&tokens, &mentions, rules) {
        Some(succ) if distinct.len() == 2 => {
            let pred = mentions.iter().find(|m| m.name != succ.name).expect("two distinct names");
            (*pred, succ)
        }
        Some(succ) => {
            let pred = mentions
                .iter()
                .filter(|m| m.start >= succ.end && m.name != succ.name)
                .find(|m| tokens[succ.end..m.start].iter().any(|t| rules.is_preposition(t)))
                .ok_or_else(|| ambiguous(&distinct))?;
            (*pred, succ)
        }
        None if distinct.len() == 2 => {
            let first = mentions[0];
            let second = *mentions.iter().find(|m| m.name != first.name).expect("two distinct names");
            (first, second)
        }
        None => return Err(ambiguous(&distinct)),
    };

    let count = successor.start.checked_sub(1).and_then(|i| numeral(&tokens[i])).unwrap_or(1);
    let result = ExtractionResult::new(predecessor.name.clone(), successor.name.clone(), count)
        .expect("distinct names, count >= 1");
    let surface =
        RawTriple { predecessor: predecessor.surface.to_owned(), successor: successor.surface.to_owned(), count };
    Ok(Extraction { result, surface })
}

fn ambiguous(distinct: &[&CanonicalName]) -> ExtractError {
    ExtractError::AmbiguousRoles(distinct.iter().map(|n| n.to_string()).collect())
}

fn scan<'a>(tokens: &[String], lexicon: &'a Lexicon) -> Vec<Mention<'a>> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        match lexicon.longest_match(tokens, i) {
            Some((len, surface, name)) => {
                out.push(Mention { start: i, end: i + len, surface, name });
                i += len;
            }
            None => i += 1,
        }
    }
    out
}

/// First mention governed by an assembly verb with no preposition or other
/// verb in between.
fn direct_object<'a>(tokens: &[String], mentions: &[Mention<'a>], rules: &RuleSet) -> Option<Mention<'a>> {
    let inside_mention = |i: usize| mentions.iter().any(|m| m.start <= i && i < m.end);
    tokens.iter().enumerate().filter(|(i, t)| rules.is_verb(t) && !inside_mention(*i)).find_map(|(v, _)| {
        let next = mentions.iter().find(|m| m.start > v)?;
        let between = &tokens[v + 1..next.start];
        let clear = between.iter().all(|t| !rules.is_preposition(t) && !rules.is_verb(t));
        clear.then_some(*next)
    })
}

fn numeral(token: &str) -> Option<u32> {
    if let Some(i) = NUMBER_WORDS.iter().position(|w| *w == token) {
        return Some(i as u32 + 1);
    }
    if token.bytes().all(|b| b.is_ascii_digit()) {
        return token.parse::<u32>().ok().filter(|&n| n >= 1);
    }
    None
}

pub(crate) fn number_word(n: u32) -> Option<&'static str> {
    NUMBER_WORDS.get((n as usize).checked_sub(1)?).copied()
}

#[derive(Debug, Clone)]
pub struct RuleExtractor {
    pub lexicon: Lexicon,
    pub rules: RuleSet,
}

impl RuleExtractor {
    pub fn new(lexicon: Lexicon, rules: RuleSet) -> Self {
        Self { lexicon, rules }
    }
}

impl Extractor for RuleExtractor {
    fn extract(&self, text: &str) -> Result<ExtractionResult, ExtractError> {
        rule_extract(text, &self.lexicon, &self.rules)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lex() -> Lexicon {
        Lexicon::from_json(
            r#"{
                "fixture": "fixture", "base": "base", "cylinder": "cylinder", "piston": "piston",
                "top": "top", "small screw": "small_screw", "small screws": "small_screw",
                "large screw": "large_screw", "large screws": "large_screw",
                "cylinder assembly": "cylinder_piston"
            }"#,
        )
        .unwrap()
    }

    fn run(text: &str) -> Result<(String, String, u32), ExtractError> {
        rule_extract(text, &lex(), &RuleSet::default())
            .map(|r| (r.predecessor().to_string(), r.successor().to_string(), r.count()))
    }

    fn ok(p: &str, s: &str, n: u32) -> Result<(String, String, u32), ExtractError> {
        Ok((p.into(), s.into(), n))
    }

    #[test]
    fn screw_base_sentence() {
        let text = "You need to fasten the base onto the assembled components and check that the four holes \
                    in the base align perfectly with the small screws.";
        let e = rule_extract_detailed(text, &lex(), &RuleSet::default()).unwrap();
        assert_eq!(e.result.to_string(), "small_screw, base, 1");
        assert_eq!(e.surface.to_string(), "small screws, base, 1");
    }

    #[test]
    fn simple_insert() {
        assert_eq!(run("Insert the piston into the cylinder."), ok("cylinder", "piston", 1));
    }

    #[test]
    fn numerals_attach_to_successor_only() {
        assert_eq!(run("Insert the four small screws into the fixture."), ok("fixture", "small_screw", 4));
        assert_eq!(run("Fasten 2 large screws to the top."), ok("top", "large_screw", 2));
        assert_eq!(run("Place the top on the four small screws."), ok("small_screw", "top", 1));
        assert_eq!(run("Insert 0 small screws into the fixture."), ok("fixture", "small_screw", 1));
    }

    #[test]
    fn longest_match_wins() {
        assert_eq!(run("Mount the cylinder assembly onto the base."), ok("base", "cylinder_piston", 1));
    }

    #[test]
    fn three_components_resolved_by_preposition() {
        assert_eq!(run("Place the top onto the cylinder next to the fixture."), ok("cylinder", "top", 1));
    }

    #[test]
    fn three_components_without_pattern_is_ambiguous() {
        assert!(
            matches!(run("The top, the base and the piston."), Err(ExtractError::AmbiguousRoles(v)) if v.len() == 3)
        );
        // verb found, but nothing prepositional after the successor
        assert!(matches!(
            run("Fasten the top, then check the base and the piston."),
            Err(ExtractError::AmbiguousRoles(_))
        ));
    }

    #[test]
    fn no_verb_two_components_keeps_mention_order() {
        assert_eq!(run("The cylinder receives the piston."), ok("cylinder", "piston", 1));
    }

    #[test]
    fn verb_across_preposition_is_not_object() {
        // "insert" does not govern "base" here; "place" governs "top"
        assert_eq!(run("Insert into the base and then place the top."), ok("base", "top", 1));
    }

    #[test]
    fn error_cases() {
        assert_eq!(run("Weather is nice today."), Err(ExtractError::NoComponentsFound));
        assert_eq!(run("Clean the base."), Err(ExtractError::SingleComponent("base".into())));
        assert_eq!(run("Attach the base to the base."), Err(ExtractError::SingleComponent("base".into())));
    }

    #[test]
    fn pure() {
        let t = "Fasten the four large screws into the top.";
        assert_eq!(run(t), run(t));
    }

    #[test]
    fn rule_file_validation() {
        assert!(RuleSet::from_json(r#"{"templates": ["{verb} the {successor} into the {predecessor}."]}"#).is_ok());
        assert!(matches!(
            RuleSet::from_json(r#"{"templates": ["{verb} the {successor}."]}"#),
            Err(RuleSetError::Template { index: 0, .. })
        ));
        assert!(matches!(
            RuleSet::from_json(r#"{"templates": ["{verb} {thing} {successor} {predecessor}"]}"#),
            Err(RuleSetError::Template { .. })
        ));
        assert!(matches!(RuleSet::from_json(r#"{"verbs": []}"#), Err(RuleSetError::NoVerbs)));
        let custom = RuleSet::from_json(r#"{"verbs": ["Slide"]}"#).unwrap();
        assert_eq!(custom.verbs, ["slide"]);
        assert_eq!(custom.instruction, DEFAULT_INSTRUCTION);
    }
}
