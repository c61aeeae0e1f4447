//! Score the full pipeline against the bundled gold corpus and print
//! per-case precision/recall/F1 tables.
//!
//! Run with: cargo run --example eval_gold

use mathsem::context::{ContextParams, NounLexicon};
use mathsem::harness::{
    bundled_gold, evaluate_definiens, evaluate_senses, predict_case, CorpusReport,
};
use mathsem::lexicon::Lexicon;
use mathsem::tagger::RuleWeights;

fn main() {
    let lexicon = Lexicon::bundled();
    let weights = RuleWeights::default();
    let params = ContextParams::default();
    let nouns = NounLexicon::bundled();
    let cutoff = 0.3;

    let mut definiens_rows = Vec::new();
    let mut sense_rows = Vec::new();
    for case in bundled_gold() {
        let prediction = predict_case(&case, &lexicon, &weights, &params, &nouns).unwrap();
        definiens_rows.push((
            case.id.clone(),
            evaluate_definiens(&prediction.definiens, &case, cutoff),
        ));
        sense_rows.push((case.id.clone(), evaluate_senses(&prediction.senses, &case).unwrap()));
    }

    println!("identifier-definiens (cutoff {cutoff}):");
    println!("{}", CorpusReport::new(definiens_rows).table());
    println!("sense assignment:");
    println!("{}", CorpusReport::new(sense_rows).table());
}
