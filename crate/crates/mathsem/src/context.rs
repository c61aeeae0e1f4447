//! Scan 2: mine the text around formulae for identifier–definiens pairs
//! ("for every arbitrarily small positive constant $\epsilon$"), score them
//! by distance, and fuse the evidence into scan-1 hypotheses.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::Serialize;

use crate::lexicon::Lexicon;
use crate::mst::{parse, tokenize, MathTree, NodeKind};
use crate::tagger::{lexicon_key, Provenance, RuleWeights, TaggedTree};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ContextError {
    #[error("unterminated math delimiter at byte {0}")]
    UnterminatedMath(usize),
    #[error("identifier {0} does not occur in any math segment")]
    IdentifierAbsent(String),
}

/// A document split into alternating prose and math segments.
#[derive(Debug, Clone)]
pub struct Document {
    pub segments: Vec<Segment>,
    /// Global token stream: every word is one token, every math segment
    /// is one token. Distances are measured on this stream.
    pub tokens: Vec<DocToken>,
}

#[derive(Debug, Clone)]
pub enum Segment {
    Text { text: String },
    Math {
        source: String,
        tree: Option<MathTree>,
        /// Parse failure, recorded so processing can continue.
        error: Option<String>,
    },
}

#[derive(Debug, Clone)]
pub struct DocToken {
    pub kind: DocTokenKind,
    pub sentence: usize,
    /// True for the first word of a sentence (suppresses the
    /// capitalized-noun heuristic).
    pub sentence_initial: bool,
}

#[derive(Debug, Clone)]
pub enum DocTokenKind {
    Word(String),
    /// Index into `segments`.
    Math(usize),
}

impl Document {
    pub fn sentence_count(&self) -> usize {
        self.tokens
            .iter()
            .map(|t| t.sentence + 1)
            .max()
            .unwrap_or(0)
    }

    /// Trees of successfully parsed math segments with their segment index.
    pub fn math_trees(&self) -> impl Iterator<Item = (usize, &MathTree)> {
        self.segments.iter().enumerate().filter_map(|(i, s)| match s {
            Segment::Math { tree: Some(t), .. } => Some((i, t)),
            _ => None,
        })
    }
}

/// Split text-with-math into segments; `$…$` and `\[…\]` delimit math.
pub fn segment_document(input: &str) -> Result<Document, ContextError> {
    let mut segments = Vec::new();
    let bytes = input.as_bytes();
    let mut i = 0;
    let mut text_start = 0;
    let flush_text = |segments: &mut Vec<Segment>, start: usize, end: usize| {
        if start < end {
            segments.push(Segment::Text {
                text: input[start..end].to_string(),
            });
        }
    };
    while i < bytes.len() {
        if bytes[i] == b'$' {
            flush_text(&mut segments, text_start, i);
            let open = i;
            let close = input[i + 1..]
                .find('$')
                .map(|p| i + 1 + p)
                .ok_or(ContextError::UnterminatedMath(open))?;
            segments.push(math_segment(&input[i + 1..close]));
            i = close + 1;
            text_start = i;
        } else if bytes[i] == b'\\' && bytes.get(i + 1) == Some(&b'[') {
            flush_text(&mut segments, text_start, i);
            let open = i;
            let close = input[i + 2..]
                .find("\\]")
                .map(|p| i + 2 + p)
                .ok_or(ContextError::UnterminatedMath(open))?;
            segments.push(math_segment(&input[i + 2..close]));
            i = close + 2;
            text_start = i;
        } else {
            i += 1;
        }
    }
    flush_text(&mut segments, text_start, bytes.len());
    let tokens = build_tokens(&segments);
    Ok(Document { segments, tokens })
}

fn math_segment(source: &str) -> Segment {
    let parsed = tokenize(source).and_then(|tokens| parse(&tokens));
    match parsed {
        Ok(tree) => Segment::Math {
            source: source.to_string(),
            tree: Some(tree),
            error: None,
        },
        Err(e) => Segment::Math {
            source: source.to_string(),
            tree: None,
            error: Some(e.to_string()),
        },
    }
}

/// Word tokens carry sentence indices; sentences end at `. ! ?` followed
/// by whitespace and a capital letter.
fn build_tokens(segments: &[Segment]) -> Vec<DocToken> {
    let mut tokens = Vec::new();
    let mut sentence = 0usize;
    let mut at_sentence_start = true;
    for (seg_index, segment) in segments.iter().enumerate() {
        match segment {
            Segment::Math { .. } => {
                tokens.push(DocToken {
                    kind: DocTokenKind::Math(seg_index),
                    sentence,
                    sentence_initial: false,
                });
            }
            Segment::Text { text } => {
                let mut chars = text.char_indices().peekable();
                while let Some(&(pos, c)) = chars.peek() {
                    if c.is_alphabetic() {
                        let mut word = String::new();
                        while let Some(&(_, c)) = chars.peek() {
                            if c.is_alphabetic() || c == '-' || c == '\'' {
                                word.push(c);
                                chars.next();
                            } else {
                                break;
                            }
                        }
                        tokens.push(DocToken {
                            kind: DocTokenKind::Word(word),
                            sentence,
                            sentence_initial: at_sentence_start,
                        });
                        at_sentence_start = false;
                    } else {
                        chars.next();
                        if matches!(c, '.' | '!' | '?') {
                            // boundary only when whitespace + capital follows
                            let rest = &text[pos + c.len_utf8()..];
                            let mut it = rest.chars();
                            if let Some(ws) = it.next() {
                                if ws.is_whitespace()
                                    && it.find(|c| !c.is_whitespace()).is_some_and(char::is_uppercase)
                                {
                                    sentence += 1;
                                    at_sentence_start = true;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    tokens
}

/// Single-letter and Greek-letter symbols of a tree, as lexicon keys
/// (`x`, `\epsilon`). Multi-letter function names and macros are not
/// identifiers.
pub fn extract_identifiers(tree: &MathTree) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for (_, node) in tree.walk() {
        if let NodeKind::Identifier(name) = &node.kind {
            if name.chars().count() == 1 || is_greek_name(name) {
                out.insert(lexicon_key(name));
            }
        }
    }
    out
}

fn is_greek_name(name: &str) -> bool {
    crate::mst::GREEK.contains(&name)
}

/// An identifier–definiens pair with its token distances and score.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DefiniensCandidate {
    pub identifier: String,
    pub definiens: String,
    /// Word-token distance from the identifier's closest mention.
    pub delta_w: usize,
    /// Word-token distance from the closest formula containing it.
    pub delta_f: usize,
    pub score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContextParams {
    pub lambda_w: f64,
    pub lambda_f: f64,
    /// Candidate window in sentences around each mention.
    pub window: usize,
}

impl Default for ContextParams {
    fn default() -> Self {
        ContextParams {
            lambda_w: 5.0,
            lambda_f: 10.0,
            window: 2,
        }
    }
}

/// The rule-based noun detector: dictionary + suffix heuristics +
/// capitalized pass-through away from sentence starts.
pub struct NounLexicon {
    words: HashSet<String>,
}

impl NounLexicon {
    pub fn bundled() -> NounLexicon {
        NounLexicon::from_text(include_str!("../data/nouns.txt"))
    }

    pub fn from_text(text: &str) -> NounLexicon {
        let words = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty())
            .map(str::to_string)
            .collect();
        NounLexicon { words }
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> std::io::Result<NounLexicon> {
        Ok(NounLexicon::from_text(&std::fs::read_to_string(path)?))
    }

    pub fn is_noun(&self, word: &str, sentence_initial: bool) -> bool {
        let lower = word.to_lowercase();
        if self.words.contains(&lower) {
            return true;
        }
        // naive plural
        if let Some(stem) = lower.strip_suffix('s') {
            if self.words.contains(stem) {
                return true;
            }
        }
        if lower.ends_with("tion") || lower.ends_with("ity") || lower.ends_with("ness") {
            return true;
        }
        // proper-noun pass-through, but never for sentence-initial capitals
        word.chars().next().is_some_and(char::is_uppercase) && !sentence_initial
    }
}

/// Find definiens candidates for one identifier: every noun within
/// ±window sentences of a mention, scored by Eq. S-2.
pub fn find_candidates(
    doc: &Document,
    identifier: &str,
    params: &ContextParams,
    nouns: &NounLexicon,
) -> Result<Vec<DefiniensCandidate>, ContextError> {
    // token positions of math segments containing the identifier, split
    // into bare mentions ($\epsilon$ alone) and larger formulae
    let mut mentions = Vec::new();
    let mut formulae = Vec::new();
    for (pos, token) in doc.tokens.iter().enumerate() {
        let DocTokenKind::Math(seg) = token.kind else {
            continue;
        };
        let Segment::Math { tree: Some(tree), .. } = &doc.segments[seg] else {
            continue;
        };
        if !extract_identifiers(tree).contains(identifier) {
            continue;
        }
        let bare = matches!(&tree.kind, NodeKind::Identifier(name)
            if lexicon_key(name) == identifier);
        if bare {
            mentions.push(pos);
        } else {
            formulae.push(pos);
        }
    }
    if mentions.is_empty() && formulae.is_empty() {
        return Err(ContextError::IdentifierAbsent(identifier.to_string()));
    }
    // fall back to the other class when one is empty
    let w_anchors = if mentions.is_empty() { &formulae } else { &mentions };
    let f_anchors = if formulae.is_empty() { &mentions } else { &formulae };

    let in_window = |sentence: usize| {
        w_anchors.iter().chain(f_anchors.iter()).any(|&p| {
            let s = doc.tokens[p].sentence;
            sentence.abs_diff(s) <= params.window
        })
    };
    let mut best: BTreeMap<String, DefiniensCandidate> = BTreeMap::new();
    for (pos, token) in doc.tokens.iter().enumerate() {
        let DocTokenKind::Word(word) = &token.kind else {
            continue;
        };
        if !in_window(token.sentence) || !nouns.is_noun(word, token.sentence_initial) {
            continue;
        }
        let delta_w = w_anchors.iter().map(|&p| pos.abs_diff(p)).min().unwrap();
        let delta_f = f_anchors.iter().map(|&p| pos.abs_diff(p)).min().unwrap();
        let candidate = DefiniensCandidate {
            identifier: identifier.to_string(),
            definiens: word.to_lowercase(),
            delta_w,
            delta_f,
            score: score_candidate(delta_w, delta_f, params),
        };
        best.entry(candidate.definiens.clone())
            .and_modify(|existing| {
                if candidate.score > existing.score {
                    *existing = candidate.clone();
                }
            })
            .or_insert(candidate);
    }
    let mut out: Vec<DefiniensCandidate> = best.into_values().collect();
    out.sort_by(|a, b| b.score.partial_cmp(&a.score).unwrap_or(std::cmp::Ordering::Equal));
    Ok(out)
}

/// Eq. S-2: score = ½·exp(−Δw/λw) + ½·exp(−Δf/λf).
pub fn score_candidate(delta_w: usize, delta_f: usize, params: &ContextParams) -> f64 {
    0.5 * (-(delta_w as f64) / params.lambda_w).exp()
        + 0.5 * (-(delta_f as f64) / params.lambda_f).exp()
}

/// Fusion output: the scan-1 tree with scan-2 evidence folded in.
pub type FusionResult = TaggedTree;

/// Fold definiens evidence into undecided nodes: a sense whose description
/// shares a lowercase content word with a candidate definiens has its score
/// multiplied by (1 + candidate score); renormalize and re-apply τ.
/// Decided nodes pass through untouched.
pub fn fuse(
    scan1: &TaggedTree,
    candidates: &BTreeMap<String, Vec<DefiniensCandidate>>,
    lexicon: &Lexicon,
    weights: &RuleWeights,
) -> FusionResult {
    let mut fused = scan1.clone();
    for tag in fused.tags.values_mut() {
        if tag.decided {
            continue;
        }
        let Some(cands) = candidates.get(&tag.symbol) else {
            continue;
        };
        let entry = lexicon.lookup(&tag.symbol);
        let mut boosted = false;
        let mut unnorm: Vec<f64> = Vec::with_capacity(tag.hypotheses.len());
        for h in &tag.hypotheses {
            let description = entry
                .and_then(|e| e.senses.iter().find(|s| s.id == h.sense_id))
                .map(|s| s.description.as_str())
                .unwrap_or("");
            let words: HashSet<String> = content_words(description);
            let boost = cands
                .iter()
                .filter(|c| words.contains(&c.definiens))
                .map(|c| c.score)
                .fold(0.0, f64::max);
            boosted |= boost > 0.0;
            unnorm.push(h.score * (1.0 + boost));
        }
        if !boosted {
            continue;
        }
        let total: f64 = unnorm.iter().sum();
        for (h, u) in tag.hypotheses.iter_mut().zip(&unnorm) {
            h.score = u / total;
        }
        tag.hypotheses
            .sort_by(|a, b| b.score.partial_cmp(&a.score).unwrap_or(std::cmp::Ordering::Equal));
        if tag.hypotheses[0].score >= weights.tau {
            tag.decided = true;
            tag.provenance = Provenance::Scan2;
        }
    }
    fused
}

fn content_words(text: &str) -> HashSet<String> {
    const STOPWORDS: &[&str] = &["the", "and", "for", "with", "its", "that", "this", "often"];
    text.to_lowercase()
        .split(|c: char| !c.is_alphabetic())
        .filter(|w| w.len() >= 3 && !STOPWORDS.contains(w))
        .map(str::to_string)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tagger::tag;

    const DLMF15: &str = include_str!("../data/fixtures/dlmf15.txt");

    fn doc(text: &str) -> Document {
        segment_document(text).unwrap()
    }

    #[test]
    fn segments_interleave() {
        let d = doc("Let $x$ be real.");
        assert_eq!(d.segments.len(), 3);
        assert!(matches!(&d.segments[0], Segment::Text { text } if text == "Let "));
        assert!(matches!(
            &d.segments[1],
            Segment::Math { tree: Some(t), .. }
                if t.kind == NodeKind::Identifier("x".into())
        ));
        assert_eq!(d.sentence_count(), 1);
    }

    #[test]
    fn display_math_recognized() {
        let d = doc(r"consider \[x+1\] here");
        assert_eq!(d.math_trees().count(), 1);
    }

    #[test]
    fn unterminated_math_is_an_error() {
        assert!(matches!(
            segment_document("cost is $5"),
            Err(ContextError::UnterminatedMath(8))
        ));
        assert!(matches!(
            segment_document(r"see \[x+1"),
            Err(ContextError::UnterminatedMath(_))
        ));
    }

    #[test]
    fn math_parse_failures_are_recorded() {
        let d = doc("bad $x^$ math");
        let seg = d
            .segments
            .iter()
            .find(|s| matches!(s, Segment::Math { .. }))
            .unwrap();
        assert!(matches!(
            seg,
            Segment::Math { tree: None, error: Some(_), .. }
        ));
        assert_eq!(d.math_trees().count(), 0);
    }

    #[test]
    fn sentence_splitting() {
        // "but" is lowercase, so the second "." is not a boundary
        let d = doc("One ends here. Two starts. but this continues! Three.");
        assert_eq!(d.sentence_count(), 3);
    }

    #[test]
    fn identifier_extraction() {
        let tree = parse(&tokenize(r"|f(a+\alpha,b+\beta)-f(a,b)|<\epsilon").unwrap()).unwrap();
        let ids = extract_identifiers(&tree);
        let expect: BTreeSet<String> = ["f", "a", "b", "\\alpha", "\\beta", "\\epsilon"]
            .into_iter()
            .map(String::from)
            .collect();
        assert_eq!(ids, expect);

        let tree = parse(&tokenize(r"\JacobiP{\alpha}{\beta}{n}@{x}").unwrap()).unwrap();
        let ids = extract_identifiers(&tree);
        let expect: BTreeSet<String> = ["\\alpha", "\\beta", "n", "x"]
            .into_iter()
            .map(String::from)
            .collect();
        assert_eq!(ids, expect);
    }

    #[test]
    fn temperature_distances() {
        let d = doc("the temperature $T$ of the gas");
        let cands =
            find_candidates(&d, "T", &ContextParams::default(), &NounLexicon::bundled()).unwrap();
        let temp = cands.iter().find(|c| c.definiens == "temperature").unwrap();
        assert_eq!(temp.delta_w, 1);
        let gas = cands.iter().find(|c| c.definiens == "gas").unwrap();
        assert_eq!(gas.delta_w, 3);
        assert_eq!(cands[0].definiens, "temperature");
    }

    #[test]
    fn score_formula() {
        let p = ContextParams::default();
        assert_eq!(score_candidate(0, 0, &p), 1.0);
        let s = score_candidate(1, 8, &p);
        assert!((s - 0.634030).abs() < 1e-6, "{s}");
        // strictly decreasing in each distance
        for d in 0..20 {
            assert!(score_candidate(d, 5, &p) > score_candidate(d + 1, 5, &p));
            assert!(score_candidate(5, d, &p) > score_candidate(5, d + 1, &p));
        }
    }

    #[test]
    fn epsilon_candidates_in_dlmf_fixture() {
        let d = doc(DLMF15);
        let cands = find_candidates(
            &d,
            "\\epsilon",
            &ContextParams::default(),
            &NounLexicon::bundled(),
        )
        .unwrap();
        let top = &cands[0];
        assert_eq!(top.definiens, "constant");
        assert_eq!(top.delta_w, 1);
        assert_eq!(top.delta_f, 8);
        assert!(top.score >= 0.5, "{}", top.score);
    }

    #[test]
    fn absent_identifier_is_an_error() {
        let d = doc("no math about $x$ here");
        assert!(matches!(
            find_candidates(&d, "q", &ContextParams::default(), &NounLexicon::bundled()),
            Err(ContextError::IdentifierAbsent(_))
        ));
    }

    #[test]
    fn window_limits_candidates() {
        let text = "The gas fills the room. Filler one. Filler two. Filler three. \
                    Now the symbol $T$ appears.";
        let d = doc(text);
        let cands =
            find_candidates(&d, "T", &ContextParams::default(), &NounLexicon::bundled()).unwrap();
        assert!(
            !cands.iter().any(|c| c.definiens == "gas"),
            "gas is 4 sentences away: {cands:?}"
        );
        assert!(cands.iter().any(|c| c.definiens == "symbol"));
    }

    #[test]
    fn fusion_decides_epsilon_constant() {
        let lex = Lexicon::bundled();
        let weights = RuleWeights::default();
        let d = doc(DLMF15);
        let (_, formula) = d
            .math_trees()
            .find(|(_, t)| extract_identifiers(t).contains("\\epsilon") && !t.children().is_empty())
            .unwrap();
        let scan1 = tag(formula, &lex, &weights).unwrap();
        let eps_path = scan1
            .tags
            .iter()
            .find(|(_, t)| t.symbol == "\\epsilon")
            .map(|(p, _)| p.clone())
            .unwrap();
        assert!(!scan1.tags[&eps_path].decided, "scan 1 must stay unsure");

        let mut candidates = BTreeMap::new();
        candidates.insert(
            "\\epsilon".to_string(),
            find_candidates(&d, "\\epsilon", &ContextParams::default(), &NounLexicon::bundled())
                .unwrap(),
        );
        let fused = fuse(&scan1, &candidates, &lex, &weights);
        let tag = &fused.tags[&eps_path];
        assert!(tag.decided);
        assert_eq!(tag.top().sense_id, "const:epsilon");
        assert_eq!(tag.provenance, Provenance::Scan2);
        assert!(tag.top().score >= weights.tau);
    }

    #[test]
    fn fusion_preserves_normalization() {
        let lex = Lexicon::bundled();
        let weights = RuleWeights::default();
        let d = doc(DLMF15);
        let (_, formula) = d.math_trees().nth(1).unwrap();
        let scan1 = tag(formula, &lex, &weights).unwrap();
        let mut candidates = BTreeMap::new();
        for id in extract_identifiers(formula) {
            if let Ok(c) =
                find_candidates(&d, &id, &ContextParams::default(), &NounLexicon::bundled())
            {
                candidates.insert(id, c);
            }
        }
        let fused = fuse(&scan1, &candidates, &lex, &weights);
        for tag in fused.tags.values() {
            let total: f64 = tag.hypotheses.iter().map(|h| h.score).sum();
            assert!((total - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn fusion_never_touches_decided_nodes() {
        let lex = Lexicon::bundled();
        let weights = RuleWeights::default();
        let tree = parse(&tokenize(r"\gamma").unwrap()).unwrap();
        let scan1 = tag(&tree, &lex, &weights).unwrap();
        assert!(scan1.tags[&vec![]].decided);
        // a contradicting candidate pushing the variable reading
        let mut candidates = BTreeMap::new();
        candidates.insert(
            "\\gamma".to_string(),
            vec![DefiniensCandidate {
                identifier: "\\gamma".into(),
                definiens: "curve".into(),
                delta_w: 1,
                delta_f: 1,
                score: 0.9,
            }],
        );
        let fused = fuse(&scan1, &candidates, &lex, &weights);
        assert_eq!(fused.tags[&vec![]], scan1.tags[&vec![]]);
    }

    #[test]
    fn fusion_without_candidates_is_identity() {
        let lex = Lexicon::bundled();
        let weights = RuleWeights::default();
        let tree = parse(&tokenize("E=mc^2").unwrap()).unwrap();
        let scan1 = tag(&tree, &lex, &weights).unwrap();
        let fused = fuse(&scan1, &BTreeMap::new(), &lex, &weights);
        assert_eq!(fused.tags, scan1.tags);
    }

    #[test]
    fn noun_rules() {
        let nouns = NounLexicon::bundled();
        assert!(nouns.is_noun("constant", false));
        assert!(nouns.is_noun("Constant", false));
        assert!(nouns.is_noun("variables", false)); // plural of a dictionary word
        assert!(nouns.is_noun("regularization", false)); // -tion
        assert!(nouns.is_noun("convexity", false)); // -ity
        assert!(nouns.is_noun("smoothness", false)); // -ness
        assert!(nouns.is_noun("Minkowski", false)); // capitalized mid-sentence
        assert!(!nouns.is_noun("Minkowski", true)); // but not sentence-initial
        assert!(!nouns.is_noun("small", false));
        assert!(!nouns.is_noun("holds", false));
    }
}
