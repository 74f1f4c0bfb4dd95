use anyhow::{bail, Context, Result};
use vigen_core::extraction::{
    emit_sft_dataset, generate_sft_corpus, parse_llm_output, read_sft_dataset, resolve_names, rule_extract,
};

use crate::bundle::{lexicon, rules};
use crate::{CheckDatasetArgs, DatasetArgs};

pub fn generate(args: DatasetArgs) -> Result<()> {
    let (lex, rules) = (lexicon(&args.lexicon)?, rules(&args.rules)?);
    let records = generate_sft_corpus(&lex, &rules, args.n, args.seed)?;
    emit_sft_dataset(&records, &args.out).with_context(|| format!("writing {}", args.out.display()))?;
    println!("wrote {} records to {} (seed {})", records.len(), args.out.display(), args.seed);
    Ok(())
}

/// Every record must parse, resolve against the lexicon and agree with
/// the rule extractor on its own input.
pub fn check(args: CheckDatasetArgs) -> Result<()> {
    let (lex, rules) = (lexicon(&args.lexicon)?, rules(&args.rules)?);
    let records = read_sft_dataset(&args.dataset).with_context(|| format!("reading {}", args.dataset.display()))?;
    let mut bad = 0;
    for (i, r) in records.iter().enumerate() {
        let truth = match parse_llm_output(&r.output).and_then(|t| resolve_names(&t, &lex)) {
            Ok(t) => t,
            Err(e) => {
                bad += 1;
                println!("record {i}: output {:?} does not resolve: {e}", r.output);
                continue;
            }
        };
        match rule_extract(&r.input, &lex, &rules) {
            Ok(got) if got == truth => {}
            Ok(got) => {
                bad += 1;
                println!("record {i}: extractor says {got}, label says {truth}");
            }
            Err(e) => {
                bad += 1;
                println!("record {i}: extractor failed: {e}");
            }
        }
    }
    if bad > 0 {
        bail!("{bad} of {} records disagree with the extractor", records.len());
    }
    println!("{}: {} records, all consistent", args.dataset.display(), records.len());
    Ok(())
}
