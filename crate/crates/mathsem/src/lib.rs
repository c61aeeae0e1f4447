//! Semantic analysis and CAS translation of LaTeX math expressions.
//!
//! The pipeline: parse LaTeX math into a syntax tree ([`mst`]), attach
//! candidate meanings from a dictionary ([`lexicon`]) scored by expression
//! structure ([`tagger`]), refine undecided symbols from the surrounding
//! text ([`context`]), translate the decided tree to Maple or Mathematica
//! ([`translator`]), and check the translation numerically, including
//! branch-cut probing of multi-valued functions ([`numeric`]). The
//! [`harness`] module scores the pipeline against gold-standard corpora.
//!
//! See the `examples/` directory for one runnable example per capability;
//! the `mathsem` binary exposes the same workflows as subcommands.

pub mod cli;
pub mod context;
pub mod harness;
pub mod lexicon;
pub mod mst;
pub mod numeric;
pub mod tagger;
pub mod translator;
