//! Check a translation numerically: sample the free variables at seeded
//! random complex points and compare the semantic tree against the CAS
//! expression it produced.
//!
//! Run with: cargo run --example verify_translation

use mathsem::lexicon::{Dialect, Lexicon};
use mathsem::mst::{parse_with_arities, tokenize};
use mathsem::numeric::{check_equivalence, EvalTarget, SampleRegion, Sampler};
use mathsem::tagger::{tag, RuleWeights};
use mathsem::translator::translate;

fn main() {
    let lexicon = Lexicon::bundled();
    let source = r"\JacobiP{1}{2}{4}@{x}";
    let tokens = tokenize(source).unwrap();
    let tree = parse_with_arities(&tokens, Some(&lexicon.macro_arities())).unwrap();
    let tagged = tag(&tree, &lexicon, &RuleWeights::default()).unwrap();

    for dialect in Dialect::ALL {
        let report = translate(&tagged, &lexicon, dialect).unwrap();
        let semantic = EvalTarget::Semantic {
            tagged: &tagged,
            lexicon: &lexicon,
        };
        let cas = EvalTarget::Cas {
            expr: &report.output,
            renames: &report.var_map,
        };
        let outcome = check_equivalence(
            &semantic,
            &cas,
            &["x".to_string()],
            &Sampler::default(),
            1e-10,
            SampleRegion::Disk,
        )
        .unwrap();
        println!(
            "{}: {} ({} samples, max relative deviation {:.3e})",
            report.output.rendered,
            if outcome.pass { "PASS" } else { "FAIL" },
            outcome.samples,
            outcome.max_relative_deviation,
        );
    }
}
