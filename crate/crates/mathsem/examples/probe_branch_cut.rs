//! Detect branch cuts by walking a circle in the complex plane.
//! sqrt(z^2) equals z only on the right half-plane; the probe finds the
//! two discontinuities on the imaginary axis.
//!
//! Run with: cargo run --example probe_branch_cut

use mathsem::lexicon::Lexicon;
use mathsem::mst::{parse, tokenize};
use mathsem::numeric::{probe_branch_cuts, probe_csv, EvalTarget};
use mathsem::tagger::{tag, RuleWeights};

fn main() {
    let lexicon = Lexicon::bundled();
    let weights = RuleWeights::default();

    for source in [r"\sqrt{z^2}", r"z^2 + 1"] {
        let tree = parse(&tokenize(source).unwrap()).unwrap();
        let tagged = tag(&tree, &lexicon, &weights).unwrap();
        let target = EvalTarget::Semantic {
            tagged: &tagged,
            lexicon: &lexicon,
        };
        let (report, trace) = probe_branch_cuts(&target, "z", 2.5, 1024);
        println!("{source}: {} jump(s)", report.jumps.len());
        for jump in &report.jumps {
            println!("  angle {:.4} rad, magnitude {:.4}", jump.angle, jump.magnitude);
        }
        if !report.continuous {
            // the full trace exports as CSV for plotting
            println!("  trace: {} rows", probe_csv(&trace).lines().count());
        }
    }
}
