//! Two-scan semantification of a text document with embedded math:
//! structural tagging, then definiens evidence from the prose folded into
//! the undecided symbols.
//!
//! Run with: cargo run --example analyze_document

use std::collections::BTreeMap;

use mathsem::context::{
    extract_identifiers, find_candidates, fuse, segment_document, ContextParams, NounLexicon,
};
use mathsem::lexicon::Lexicon;
use mathsem::mst::render;
use mathsem::tagger::{tag, RuleWeights};

fn main() {
    let document = include_str!("../data/fixtures/dlmf15.txt");
    let doc = segment_document(document).expect("well-formed math delimiters");
    println!(
        "{} sentences, {} math segments",
        doc.sentence_count(),
        doc.math_trees().count()
    );

    let lexicon = Lexicon::bundled();
    let nouns = NounLexicon::bundled();
    let params = ContextParams::default();
    let weights = RuleWeights::default();

    // scan 2: definiens candidates per identifier, scored by distance
    let mut candidates = BTreeMap::new();
    for (_, tree) in doc.math_trees() {
        for identifier in extract_identifiers(tree) {
            let found = find_candidates(&doc, &identifier, &params, &nouns).unwrap();
            candidates.entry(identifier).or_insert(found);
        }
    }
    for (identifier, found) in &candidates {
        for c in found.iter().take(3) {
            println!(
                "{identifier}: \"{}\" (dw={}, df={}, score {:.4})",
                c.definiens, c.delta_w, c.delta_f, c.score
            );
        }
    }

    // scan 1 per formula, then fusion
    for (_, tree) in doc.math_trees() {
        let scan1 = tag(tree, &lexicon, &weights).unwrap();
        let fused = fuse(&scan1, &candidates, &lexicon, &weights);
        println!("{}", render(tree));
        for (path, node_tag) in &fused.tags {
            println!(
                "  {path:?} {}: {} {:.3} {}",
                node_tag.symbol,
                node_tag.top().sense_id,
                node_tag.top().score,
                if node_tag.decided { "decided" } else { "undecided" },
            );
        }
    }
}
