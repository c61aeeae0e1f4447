//! Parse LaTeX math into a syntax tree and walk it.
//!
//! Run with: cargo run --example parse_tree

use mathsem::lexicon::Lexicon;
use mathsem::mst::{parse_with_arities, render, tokenize};

fn main() {
    let source = r"P_n^{(\alpha, \beta)}(\cos(a\Theta))";
    let tokens = tokenize(source).expect("lexes");
    println!("{} tokens", tokens.len());

    // the lexicon tells the parser how many {params} and @{args} each
    // semantic macro takes, so \JacobiP{..}{..}{..}@{..} parses eagerly
    let arities = Lexicon::bundled().macro_arities();
    let tree = parse_with_arities(&tokens, Some(&arities)).expect("parses");

    for (path, node) in tree.walk() {
        println!("{:indent$}{:?} @ {path:?}", "", node.kind, indent = 2 * path.len());
    }
    println!("round-trip: {}", render(&tree));
}
