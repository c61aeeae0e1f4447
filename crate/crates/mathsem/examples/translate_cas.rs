//! Disambiguate an expression and translate it to both CAS dialects.
//!
//! Run with: cargo run --example translate_cas

use mathsem::lexicon::{Dialect, Lexicon};
use mathsem::mst::{parse_with_arities, tokenize};
use mathsem::tagger::{tag, RuleWeights};
use mathsem::translator::translate;

fn main() {
    let lexicon = Lexicon::bundled();
    let weights = RuleWeights::default();

    // The generic form and the semantic-macro form of the same Jacobi
    // polynomial translate to identical CAS input.
    for source in [
        r"P_n^{(\alpha, \beta)}(\cos(a\Theta))",
        r"\JacobiP{\alpha}{\beta}{n}@{\cos(a\Theta)}",
    ] {
        let tokens = tokenize(source).unwrap();
        let tree = parse_with_arities(&tokens, Some(&lexicon.macro_arities())).unwrap();
        let tagged = tag(&tree, &lexicon, &weights).unwrap();
        println!("{source}");
        for dialect in Dialect::ALL {
            let report = translate(&tagged, &lexicon, dialect).unwrap();
            println!("  {:<12} {}", dialect.name(), report.output.rendered);
            for warning in &report.warnings {
                println!("  warning: {warning:?}");
            }
        }
    }

    // Ambiguity is an error, not a guess: without context E, m, c stay open.
    let tokens = tokenize("E=mc^2").unwrap();
    let tree = parse_with_arities(&tokens, Some(&lexicon.macro_arities())).unwrap();
    let tagged = tag(&tree, &lexicon, &weights).unwrap();
    match translate(&tagged, &lexicon, Dialect::Maple) {
        Ok(_) => unreachable!(),
        Err(e) => println!("E=mc^2: {e}"),
    }
}
