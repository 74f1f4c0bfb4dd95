//! Loading the data files a session needs.

use std::path::Path;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use vigen_core::database::{load_manifest, read_manifest, validate_database};
use vigen_core::engine::load_steps;
use vigen_core::extraction::{Extractor, ExtractorConfig, Lexicon, RemoteExtractor, RuleExtractor, RuleSet};
use vigen_core::model::AssemblyStep;
use vigen_core::Database;

use crate::{ExtractorKind, SessionArgs, ValidateArgs};

pub struct Bundle {
    pub db: Database,
    pub steps: Vec<AssemblyStep>,
    pub lexicon: Lexicon,
    pub extractor: Box<dyn Extractor>,
}

pub fn lexicon(path: &Path) -> Result<Lexicon> {
    Lexicon::load(path).with_context(|| format!("lexicon {}", path.display()))
}

pub fn rules(path: &Path) -> Result<RuleSet> {
    RuleSet::load(path).with_context(|| format!("rule file {}", path.display()))
}

impl Bundle {
    pub fn load(args: &SessionArgs) -> Result<Self> {
        let db = load_manifest(&args.manifest)?;
        let steps = load_steps(&args.steps).with_context(|| format!("cannot read steps {}", args.steps.display()))?;
        if steps.is_empty() {
            bail!("step script {} has no steps", args.steps.display());
        }
        let lexicon = lexicon(&args.lexicon)?;
        let rules = rules(&args.rules)?;
        let extractor: Box<dyn Extractor> = match args.extractor {
            ExtractorKind::Rule => Box::new(RuleExtractor::new(lexicon.clone(), rules)),
            ExtractorKind::Remote => {
                if !(args.timeout.is_finite() && args.timeout > 0.0) {
                    bail!("--timeout must be a positive number of seconds");
                }
                let endpoint = args.endpoint.clone().unwrap_or_default();
                let config = ExtractorConfig::remote(endpoint, Duration::from_secs_f64(args.timeout));
                let remote = RemoteExtractor::new(&config, lexicon.clone()).map_err(anyhow::Error::msg)?;
                Box::new(remote.with_instruction(rules.instruction.clone()))
            }
        };
        Ok(Self { db, steps, lexicon, extractor })
    }
}

pub fn validate(args: ValidateArgs) -> Result<()> {
    let db = read_manifest(&args.manifest)?;
    let violations = validate_database(&db);
    for v in &violations {
        println!("{v}");
    }
    if !violations.is_empty() {
        bail!("{} has {} violation(s)", args.manifest.display(), violations.len());
    }
    println!("{}: {} components, no violations", args.manifest.display(), db.len());
    Ok(())
}
