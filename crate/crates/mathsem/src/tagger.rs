//! Scan 1: attach candidate senses to tree nodes and score them from
//! expression structure alone. A log-linear rule model over a small set of
//! shape features stands in for full relational inference; the rules are
//! exactly the shape cues a reader uses (`P_n^{(\alpha,\beta)}(x)` has a
//! two-parameter superscript, so the Jacobi reading wins).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::lexicon::{EntryKind, Lexicon, Role, Sense, Signature};
use crate::mst::{MathTree, NodeKind};

/// Shape of a symbol occurrence, read off the tree without any context.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FeatureVector {
    pub has_subscript: bool,
    pub sup_shape: SupShape,
    pub trailing_paren_group: bool,
    /// Comma-separated parts of the trailing group; 0 without one.
    pub trailing_group_arity: usize,
    pub is_standalone: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SupShape {
    None,
    Single,
    ParenthesizedSingle,
    ParenthesizedPair,
    Other,
}

impl SupShape {
    /// Superscript parameter count implied by the shape.
    fn param_count(self) -> usize {
        match self {
            SupShape::None => 0,
            SupShape::Single | SupShape::ParenthesizedSingle | SupShape::Other => 1,
            SupShape::ParenthesizedPair => 2,
        }
    }
}

/// One candidate meaning of a node with its normalized probability.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hypothesis {
    pub node_path: Vec<usize>,
    pub sense_id: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleWeights {
    /// Declared signature matches the observed shape (or is violated).
    pub w_sig: f64,
    /// Function-role sense with a trailing parenthesized group.
    pub w_fn: f64,
    /// Constant-role sense standing alone.
    pub w_const: f64,
    /// Decision threshold on the top hypothesis.
    pub tau: f64,
}

impl Default for RuleWeights {
    fn default() -> Self {
        RuleWeights {
            w_sig: 2.0,
            w_fn: 1.0,
            w_const: 1.0,
            tau: 0.8,
        }
    }
}

/// How a node got its decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Scan1,
    Scan2,
}

/// Hypotheses and decision state for one symbol or macro node.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeTag {
    /// Ordered descending by score; scores sum to 1.
    pub hypotheses: Vec<Hypothesis>,
    pub decided: bool,
    pub provenance: Provenance,
    /// Symbol as the context scan sees it: the lexicon key.
    pub symbol: String,
}

impl NodeTag {
    pub fn top(&self) -> &Hypothesis {
        &self.hypotheses[0]
    }

    pub fn decided_sense(&self) -> Option<&str> {
        self.decided.then(|| self.top().sense_id.as_str())
    }
}

/// A tree plus per-node hypothesis lists, keyed by index path.
#[derive(Debug, Clone)]
pub struct TaggedTree {
    pub tree: MathTree,
    pub tags: BTreeMap<Vec<usize>, NodeTag>,
}

impl TaggedTree {
    pub fn undecided(&self) -> impl Iterator<Item = (&Vec<usize>, &NodeTag)> {
        self.tags.iter().filter(|(_, t)| !t.decided)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TagError {
    #[error("path does not address a node")]
    InvalidPath,
    #[error("no candidate senses")]
    NoSenses,
    #[error("semantic macro \\{0} not in lexicon")]
    UnknownMacro(String),
}

/// Features of the symbol or Scripted node at `path`.
pub fn extract_features(tree: &MathTree, path: &[usize]) -> Result<FeatureVector, TagError> {
    let node = tree.node_at(path).ok_or(TagError::InvalidPath)?;
    let (sub, sup) = match &node.kind {
        NodeKind::Scripted { sub, sup, .. } => (sub.as_deref(), sup.as_deref()),
        NodeKind::Identifier(_) => (None, None),
        _ => return Err(TagError::InvalidPath),
    };
    let sup_shape = match sup {
        None => SupShape::None,
        Some(s) => match &s.kind {
            NodeKind::Identifier(_) | NodeKind::Number(_) => SupShape::Single,
            NodeKind::Fenced { open: '(', body, .. } => match comma_arity(body) {
                1 => SupShape::ParenthesizedSingle,
                2 => SupShape::ParenthesizedPair,
                _ => SupShape::Other,
            },
            _ => SupShape::Other,
        },
    };
    // the node's right sibling decides function-application shape
    let trailing = next_sibling(tree, path)
        .filter(|s| matches!(s.kind, NodeKind::Fenced { open: '(', .. }));
    let trailing_group_arity = trailing
        .map(|s| match &s.kind {
            NodeKind::Fenced { body, .. } => comma_arity(body),
            _ => 0,
        })
        .unwrap_or(0);
    Ok(FeatureVector {
        has_subscript: sub.is_some(),
        sup_shape,
        trailing_paren_group: trailing.is_some(),
        trailing_group_arity,
        is_standalone: sub.is_none() && sup.is_none() && trailing.is_none(),
    })
}

fn next_sibling<'a>(tree: &'a MathTree, path: &[usize]) -> Option<&'a MathTree> {
    let (last, parent_path) = path.split_last()?;
    let parent = tree.node_at(parent_path)?;
    if !matches!(parent.kind, NodeKind::Sequence(_)) {
        return None;
    }
    parent.children().get(last + 1).copied()
}

/// 1 + number of top-level commas, i.e. the argument-list arity a fenced
/// body would have.
fn comma_arity(body: &MathTree) -> usize {
    match &body.kind {
        NodeKind::Sequence(items) => {
            1 + items
                .iter()
                .filter(|i| matches!(i.kind, NodeKind::Operator(',')))
                .count()
        }
        _ => 1,
    }
}

/// Softmax over `ln prior + Σ w_r f_r` per sense, ordered descending.
/// Ties keep declaration order.
pub fn score_senses(
    features: &FeatureVector,
    senses: &[Sense],
    weights: &RuleWeights,
    path: &[usize],
) -> Result<Vec<Hypothesis>, TagError> {
    if senses.is_empty() {
        return Err(TagError::NoSenses);
    }
    let logits: Vec<f64> = senses
        .iter()
        .map(|s| {
            let mut logit = s.prior.max(1e-12).ln();
            if signature_matches(features, &s.signature) {
                logit += weights.w_sig;
            } else {
                logit -= weights.w_sig;
            }
            if s.role == Role::Function && features.trailing_paren_group {
                logit += weights.w_fn;
            }
            if s.role == Role::Constant && features.is_standalone {
                logit += weights.w_const;
            }
            logit
        })
        .collect();
    let scores = softmax(&logits);
    let mut hypotheses: Vec<Hypothesis> = senses
        .iter()
        .zip(scores)
        .map(|(s, score)| Hypothesis {
            node_path: path.to_vec(),
            sense_id: s.id.clone(),
            score,
        })
        .collect();
    hypotheses.sort_by(|a, b| b.score.partial_cmp(&a.score).unwrap_or(std::cmp::Ordering::Equal));
    Ok(hypotheses)
}

fn signature_matches(f: &FeatureVector, sig: &Signature) -> bool {
    sig.sub_params == usize::from(f.has_subscript)
        && sig.sup_params == f.sup_shape.param_count()
        && sig.args == f.trailing_group_arity
}

pub(crate) fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Scan 1 over a whole tree: every symbol and macro node gets a hypothesis
/// list; nodes whose top score reaches `tau` are decided.
pub fn tag(tree: &MathTree, lexicon: &Lexicon, weights: &RuleWeights) -> Result<TaggedTree, TagError> {
    let mut tags = BTreeMap::new();
    let nodes = tree.walk();
    for (path, node) in &nodes {
        match &node.kind {
            NodeKind::SemanticMacro { name, .. } => {
                let key = format!("\\{name}");
                let entry = lexicon
                    .lookup(&key)
                    .ok_or_else(|| TagError::UnknownMacro(name.clone()))?;
                let sense = &entry.senses[0];
                tags.insert(
                    path.clone(),
                    NodeTag {
                        hypotheses: vec![Hypothesis {
                            node_path: path.clone(),
                            sense_id: sense.id.clone(),
                            score: 1.0,
                        }],
                        decided: true,
                        provenance: Provenance::Scan1,
                        symbol: key,
                    },
                );
            }
            NodeKind::Identifier(symbol) => {
                // the base of a Scripted node carries the script features;
                // tag it there, not at the bare identifier
                if is_script_base(tree, path) {
                    continue;
                }
                let key = lexicon_key(symbol);
                let features = extract_features(tree, path)?;
                let (hypotheses, single) = match lexicon.lookup(&key) {
                    Some(entry) if entry.kind == EntryKind::Symbol => (
                        score_senses(&features, &entry.senses, weights, path)?,
                        entry.senses.len() == 1,
                    ),
                    Some(entry) => {
                        // a macro name used as a bare identifier (e.g. \cos
                        // in generic LaTeX): its macro sense applies
                        (
                            score_senses(&features, &entry.senses, weights, path)?,
                            entry.senses.len() == 1,
                        )
                    }
                    None => (
                        vec![Hypothesis {
                            node_path: path.clone(),
                            sense_id: format!("var:generic:{symbol}"),
                            score: 1.0,
                        }],
                        true,
                    ),
                };
                let decided = single || hypotheses[0].score >= weights.tau;
                tags.insert(
                    path.clone(),
                    NodeTag {
                        hypotheses,
                        decided,
                        provenance: Provenance::Scan1,
                        symbol: key,
                    },
                );
            }
            NodeKind::Scripted { base, .. } => {
                if let NodeKind::Identifier(symbol) = &base.kind {
                    let key = lexicon_key(symbol);
                    let features = extract_features(tree, path)?;
                    let (hypotheses, single) = match lexicon.lookup(&key) {
                        Some(entry) => (
                            score_senses(&features, &entry.senses, weights, path)?,
                            entry.senses.len() == 1,
                        ),
                        None => (
                            vec![Hypothesis {
                                node_path: path.clone(),
                                sense_id: format!("var:generic:{symbol}"),
                                score: 1.0,
                            }],
                            true,
                        ),
                    };
                    let decided = single || hypotheses[0].score >= weights.tau;
                    tags.insert(
                        path.clone(),
                        NodeTag {
                            hypotheses,
                            decided,
                            provenance: Provenance::Scan1,
                            symbol: key,
                        },
                    );
                }
            }
            _ => {}
        }
    }
    Ok(TaggedTree {
        tree: tree.clone(),
        tags,
    })
}

fn is_script_base(tree: &MathTree, path: &[usize]) -> bool {
    match path.split_last() {
        Some((0, parent_path)) => matches!(
            tree.node_at(parent_path).map(|n| &n.kind),
            Some(NodeKind::Scripted { .. })
        ),
        _ => false,
    }
}

/// Lexicon key for a symbol: bare single characters, `\name` otherwise.
pub fn lexicon_key(symbol: &str) -> String {
    if symbol.chars().count() == 1 {
        symbol.to_string()
    } else {
        format!("\\{symbol}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mst::{parse, tokenize};

    fn p(src: &str) -> MathTree {
        parse(&tokenize(src).unwrap()).unwrap()
    }

    fn tag_default(src: &str) -> TaggedTree {
        tag(&p(src), &Lexicon::bundled(), &RuleWeights::default()).unwrap()
    }

    #[test]
    fn jacobi_features() {
        let tree = p(r"P_n^{(\alpha, \beta)}(\cos(a\Theta))");
        let f = extract_features(&tree, &[0]).unwrap();
        assert!(f.has_subscript);
        assert_eq!(f.sup_shape, SupShape::ParenthesizedPair);
        assert!(f.trailing_paren_group);
        assert_eq!(f.trailing_group_arity, 1);
        assert!(!f.is_standalone);
    }

    #[test]
    fn bare_identifier_features() {
        let tree = p("x");
        let f = extract_features(&tree, &[]).unwrap();
        assert_eq!(
            f,
            FeatureVector {
                has_subscript: false,
                sup_shape: SupShape::None,
                trailing_paren_group: false,
                trailing_group_arity: 0,
                is_standalone: true,
            }
        );
    }

    #[test]
    fn meixner_pollaczek_shape() {
        let tree = p(r"P_n^{(\lambda)}(x)");
        let f = extract_features(&tree, &[0]).unwrap();
        assert_eq!(f.sup_shape, SupShape::ParenthesizedSingle);
    }

    #[test]
    fn jacobi_ranked_first_on_pair_superscript() {
        let tagged = tag_default(r"P_n^{(\alpha, \beta)}(x)");
        let tag = &tagged.tags[&vec![0usize]];
        assert_eq!(tag.top().sense_id, "dlmf:JacobiP");
        assert!(tag.decided);
    }

    #[test]
    fn single_superscript_outranks_jacobi() {
        let tagged = tag_default(r"P_n^{(\lambda)}(x)");
        let tag = &tagged.tags[&vec![0usize]];
        assert_ne!(tag.top().sense_id, "dlmf:JacobiP");
        let jacobi_rank = tag
            .hypotheses
            .iter()
            .position(|h| h.sense_id == "dlmf:JacobiP")
            .unwrap();
        assert!(jacobi_rank > 0);
    }

    #[test]
    fn single_sense_scores_one() {
        let f = extract_features(&p("x"), &[]).unwrap();
        let lex = Lexicon::bundled();
        let senses = &lex.lookup("\\Theta").unwrap().senses;
        let hyps = score_senses(&f, senses, &RuleWeights::default(), &[]).unwrap();
        assert_eq!(hyps.len(), 1);
        assert!((hyps[0].score - 1.0).abs() < 1e-12);
    }

    #[test]
    fn symmetric_senses_split_evenly() {
        // two senses, equal prior, no rule separating them
        let tagged = tag_default("mx");
        let tag = &tagged.tags[&vec![0usize]];
        assert!((tag.hypotheses[0].score - 0.5).abs() < 1e-9);
        assert!((tag.hypotheses[1].score - 0.5).abs() < 1e-9);
        assert!(!tag.decided);
    }

    #[test]
    fn standalone_gamma_decides_constant() {
        let tagged = tag_default(r"\gamma");
        let tag = &tagged.tags[&vec![]];
        assert_eq!(tag.top().sense_id, "const:EulerMascheroni");
        // softmax(ln 0.6 + w_const, ln 0.4) with the match rule cancelling
        let expected = 0.6 * 1f64.exp() / (0.6 * 1f64.exp() + 0.4);
        assert!((tag.top().score - expected).abs() < 1e-12);
        assert!(tag.decided);
    }

    #[test]
    fn mass_energy_all_undecided() {
        let tagged = tag_default("E=mc^2");
        let undecided: Vec<_> = tagged.undecided().map(|(_, t)| t.symbol.clone()).collect();
        assert!(undecided.contains(&"E".to_string()));
        assert!(undecided.contains(&"m".to_string()));
        assert!(undecided.contains(&"c".to_string()));
    }

    #[test]
    fn semantic_macro_decided_at_one() {
        let tagged = tag_default(r"\JacobiP{\alpha}{\beta}{n}@{x}");
        let tag = &tagged.tags[&vec![]];
        assert!(tag.decided);
        assert_eq!(tag.top().sense_id, "dlmf:JacobiP");
        assert_eq!(tag.top().score, 1.0);
    }

    #[test]
    fn unknown_macro_errors() {
        let err = tag(
            &p(r"\Unknown{x}@{y}"),
            &Lexicon::bundled(),
            &RuleWeights::default(),
        )
        .unwrap_err();
        assert!(matches!(err, TagError::UnknownMacro(_)));
    }

    #[test]
    fn scores_normalize() {
        for src in [r"P_n^{(\alpha, \beta)}(x)", "E=mc^2", r"\gamma+e"] {
            let tagged = tag_default(src);
            for tag in tagged.tags.values() {
                let total: f64 = tag.hypotheses.iter().map(|h| h.score).sum();
                assert!((total - 1.0).abs() < 1e-9, "{src}: sum {total}");
            }
        }
    }

    #[test]
    fn prior_scaling_is_invisible() {
        // multiplying all priors by a constant leaves scores unchanged
        let f = extract_features(&p("x"), &[]).unwrap();
        let lex = Lexicon::bundled();
        let senses = lex.lookup("E").unwrap().senses.clone();
        let mut scaled = senses.clone();
        for s in &mut scaled {
            s.prior *= 0.5;
        }
        let a = score_senses(&f, &senses, &RuleWeights::default(), &[]).unwrap();
        let b = score_senses(&f, &scaled, &RuleWeights::default(), &[]).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x.score - y.score).abs() < 1e-12);
        }
    }

    #[test]
    fn raising_w_sig_keeps_matching_sense_on_top() {
        let tree = p(r"P_n^{(\alpha, \beta)}(x)");
        let f = extract_features(&tree, &[0]).unwrap();
        let lex = Lexicon::bundled();
        let senses = &lex.lookup("P").unwrap().senses;
        let mut prev_rank_gap = f64::NEG_INFINITY;
        for w_sig in [1.0, 2.0, 4.0, 8.0] {
            let weights = RuleWeights {
                w_sig,
                ..RuleWeights::default()
            };
            let hyps = score_senses(&f, senses, &weights, &[]).unwrap();
            assert_eq!(hyps[0].sense_id, "dlmf:JacobiP");
            let gap = hyps[0].score - hyps[1].score;
            assert!(gap >= prev_rank_gap);
            prev_rank_gap = gap;
        }
    }
}
