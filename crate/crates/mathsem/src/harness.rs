//! Gold-standard corpora and precision/recall/F1 scoring of
//! semantification output.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::context::{
    extract_identifiers, find_candidates, fuse, segment_document, ContextParams,
    DefiniensCandidate, NounLexicon, Segment,
};
use crate::lexicon::Lexicon;
use crate::tagger::{tag, RuleWeights};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoldCorpus {
    pub cases: Vec<GoldCase>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoldCase {
    pub id: String,
    /// Plain text with `$…$` / `\[…\]` math.
    pub document: String,
    #[serde(default)]
    pub identifier_definiens: Vec<GoldDefiniens>,
    #[serde(default)]
    pub sense_assignments: Vec<GoldSense>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoldDefiniens {
    pub identifier: String,
    /// Acceptable lowercase surface forms (inflections listed explicitly;
    /// no stemming is applied).
    pub definiens: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoldSense {
    /// Index among the document's math segments, in order.
    pub segment: usize,
    pub path: Vec<usize>,
    pub sense: String,
}

/// A decided sense claim for one node, the unit `evaluate_senses` scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensePrediction {
    pub segment: usize,
    pub path: Vec<usize>,
    pub sense: String,
}

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("gold case {case}: {message}")]
    Schema { case: String, message: String },
    #[error("gold case {case}: segment {segment} path {path:?} does not match the parsed document")]
    PathMismatch {
        case: String,
        segment: usize,
        path: Vec<usize>,
    },
}

/// Load and validate a gold corpus: unique ids, and every referenced
/// segment/path resolvable in the parsed document.
pub fn load_gold(path: impl AsRef<Path>) -> Result<Vec<GoldCase>, HarnessError> {
    let text = std::fs::read_to_string(path)?;
    gold_from_json(&text)
}

pub fn gold_from_json(text: &str) -> Result<Vec<GoldCase>, HarnessError> {
    let corpus: GoldCorpus = serde_json::from_str(text).map_err(|e| HarnessError::Schema {
        case: "<corpus>".into(),
        message: e.to_string(),
    })?;
    let mut seen = std::collections::HashSet::new();
    for case in &corpus.cases {
        if !seen.insert(case.id.as_str()) {
            return Err(HarnessError::Schema {
                case: case.id.clone(),
                message: "duplicate id".into(),
            });
        }
        for assignment in &case.sense_assignments {
            check_assignment(case, assignment)?;
        }
    }
    Ok(corpus.cases)
}

/// The bundled 20-case corpus.
pub fn bundled_gold() -> Vec<GoldCase> {
    gold_from_json(include_str!("../data/gold/corpus.json")).expect("bundled gold must be valid")
}

fn check_assignment(case: &GoldCase, assignment: &GoldSense) -> Result<(), HarnessError> {
    let doc = segment_document(&case.document).map_err(|e| HarnessError::Schema {
        case: case.id.clone(),
        message: e.to_string(),
    })?;
    let trees: Vec<_> = doc.math_trees().map(|(_, t)| t).collect();
    let tree = trees
        .get(assignment.segment)
        .ok_or_else(|| HarnessError::PathMismatch {
            case: case.id.clone(),
            segment: assignment.segment,
            path: assignment.path.clone(),
        })?;
    tree.node_at(&assignment.path)
        .ok_or_else(|| HarnessError::PathMismatch {
            case: case.id.clone(),
            segment: assignment.segment,
            path: assignment.path.clone(),
        })?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricsReport {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl MetricsReport {
    /// precision = TP/(TP+FP), 1 if nothing retrieved; recall symmetric;
    /// F1 the harmonic mean, 0 when both are 0.
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> MetricsReport {
        let precision = if tp + fp == 0 {
            1.0
        } else {
            tp as f64 / (tp + fp) as f64
        };
        let recall = if tp + fn_ == 0 {
            1.0
        } else {
            tp as f64 / (tp + fn_) as f64
        };
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        MetricsReport {
            tp,
            fp,
            fn_,
            precision,
            recall,
            f1,
        }
    }

    pub fn merge(reports: impl IntoIterator<Item = MetricsReport>) -> MetricsReport {
        let (mut tp, mut fp, mut fn_) = (0, 0, 0);
        for r in reports {
            tp += r.tp;
            fp += r.fp;
            fn_ += r.fn_;
        }
        MetricsReport::from_counts(tp, fp, fn_)
    }
}

/// Score identifier–definiens predictions: only candidates at or above
/// `cutoff` count as retrieved; a retrieval is correct when the identifier
/// matches and the lowercase definiens equals any gold alias.
pub fn evaluate_definiens(
    predictions: &[DefiniensCandidate],
    gold: &GoldCase,
    cutoff: f64,
) -> MetricsReport {
    let mut tp = 0;
    let mut fp = 0;
    let mut matched = vec![false; gold.identifier_definiens.len()];
    for p in predictions {
        if p.score < cutoff {
            continue;
        }
        let hit = gold
            .identifier_definiens
            .iter()
            .position(|g| g.identifier == p.identifier && g.definiens.contains(&p.definiens));
        match hit {
            Some(i) => {
                tp += 1;
                matched[i] = true;
            }
            None => fp += 1,
        }
    }
    let fn_ = matched.iter().filter(|m| !**m).count();
    MetricsReport::from_counts(tp, fp, fn_)
}

/// Score decided senses against gold node-path assignments. A prediction
/// at a gold path is TP iff the sense-ids agree; a wrong sense counts both
/// FP and FN; an unlabelled gold path with no prediction is FN only.
pub fn evaluate_senses(
    predictions: &[SensePrediction],
    gold: &GoldCase,
) -> Result<MetricsReport, HarnessError> {
    for assignment in &gold.sense_assignments {
        check_assignment(gold, assignment)?;
    }
    let mut tp = 0;
    let mut fp = 0;
    let mut fn_ = 0;
    let by_key: BTreeMap<(usize, &[usize]), &str> = predictions
        .iter()
        .map(|p| ((p.segment, p.path.as_slice()), p.sense.as_str()))
        .collect();
    for g in &gold.sense_assignments {
        match by_key.get(&(g.segment, g.path.as_slice())) {
            Some(&sense) if sense == g.sense => tp += 1,
            Some(_) => {
                fp += 1;
                fn_ += 1;
            }
            None => fn_ += 1,
        }
    }
    Ok(MetricsReport::from_counts(tp, fp, fn_))
}

/// Pipeline output for one gold document: scan 1 → scan 2 → fusion.
#[derive(Debug, Clone, Serialize)]
pub struct CasePrediction {
    pub definiens: Vec<DefiniensCandidate>,
    pub senses: Vec<SensePrediction>,
}

/// Run the full pipeline over a gold case's document.
pub fn predict_case(
    case: &GoldCase,
    lexicon: &Lexicon,
    weights: &RuleWeights,
    params: &ContextParams,
    nouns: &NounLexicon,
) -> Result<CasePrediction, HarnessError> {
    let doc = segment_document(&case.document).map_err(|e| HarnessError::Schema {
        case: case.id.clone(),
        message: e.to_string(),
    })?;
    let mut candidates: BTreeMap<String, Vec<DefiniensCandidate>> = BTreeMap::new();
    for (_, tree) in doc.math_trees() {
        for identifier in extract_identifiers(tree) {
            if let std::collections::btree_map::Entry::Vacant(slot) =
                candidates.entry(identifier)
            {
                if let Ok(c) = find_candidates(&doc, slot.key(), params, nouns) {
                    slot.insert(c);
                }
            }
        }
    }
    let mut senses = Vec::new();
    for (math_index, (_, tree)) in doc.math_trees().enumerate() {
        let Ok(scan1) = tag(tree, lexicon, weights) else {
            continue; // unknown macros: skip the segment, keep going
        };
        let fused = fuse(&scan1, &candidates, lexicon, weights);
        for (path, node_tag) in &fused.tags {
            if let Some(sense) = node_tag.decided_sense() {
                senses.push(SensePrediction {
                    segment: math_index,
                    path: path.clone(),
                    sense: sense.to_string(),
                });
            }
        }
    }
    let definiens = candidates.into_values().flatten().collect();
    Ok(CasePrediction { definiens, senses })
}

/// Gold annotations replayed as predictions — the harness fixpoint.
pub fn gold_as_predictions(case: &GoldCase) -> CasePrediction {
    let senses = case
        .sense_assignments
        .iter()
        .map(|g| SensePrediction {
            segment: g.segment,
            path: g.path.clone(),
            sense: g.sense.clone(),
        })
        .collect();
    let definiens = case
        .identifier_definiens
        .iter()
        .filter_map(|g| {
            g.definiens.first().map(|d| DefiniensCandidate {
                identifier: g.identifier.clone(),
                definiens: d.clone(),
                delta_w: 0,
                delta_f: 0,
                score: 1.0,
            })
        })
        .collect();
    CasePrediction { definiens, senses }
}

/// Per-case rows plus the count-summed aggregate.
#[derive(Debug, Clone, Serialize)]
pub struct CorpusReport {
    pub per_case: Vec<CaseRow>,
    pub aggregate: MetricsReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseRow {
    pub id: String,
    pub metrics: MetricsReport,
}

impl CorpusReport {
    pub fn new(rows: Vec<(String, MetricsReport)>) -> CorpusReport {
        let aggregate = MetricsReport::merge(rows.iter().map(|(_, m)| *m));
        CorpusReport {
            per_case: rows
                .into_iter()
                .map(|(id, metrics)| CaseRow { id, metrics })
                .collect(),
            aggregate,
        }
    }

    /// Aligned-column text table.
    pub fn table(&self) -> String {
        let id_width = self
            .per_case
            .iter()
            .map(|r| r.id.len())
            .chain(["case".len(), "aggregate".len()])
            .max()
            .unwrap_or(4);
        let mut out = format!(
            "{:<id_width$}  {:>4} {:>4} {:>4}  {:>9} {:>9} {:>9}\n",
            "case", "tp", "fp", "fn", "precision", "recall", "f1"
        );
        let mut row = |name: &str, m: &MetricsReport| {
            out.push_str(&format!(
                "{name:<id_width$}  {:>4} {:>4} {:>4}  {:>9.4} {:>9.4} {:>9.4}\n",
                m.tp, m.fp, m.fn_, m.precision, m.recall, m.f1
            ));
        };
        for r in &self.per_case {
            row(&r.id, &r.metrics);
        }
        row("aggregate", &self.aggregate);
        out
    }
}

/// Count how many math segments a document has, for external validation.
pub fn math_segment_count(document: &str) -> usize {
    segment_document(document)
        .map(|d| {
            d.segments
                .iter()
                .filter(|s| matches!(s, Segment::Math { .. }))
                .count()
        })
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn case(id: &str) -> GoldCase {
        bundled_gold().into_iter().find(|c| c.id == id).unwrap()
    }

    fn candidate(identifier: &str, definiens: &str, score: f64) -> DefiniensCandidate {
        DefiniensCandidate {
            identifier: identifier.into(),
            definiens: definiens.into(),
            delta_w: 1,
            delta_f: 1,
            score,
        }
    }

    #[test]
    fn bundled_corpus_loads() {
        let cases = bundled_gold();
        assert_eq!(cases.len(), 20);
        assert!(cases.iter().any(|c| c.id == "dlmf-1.5-e2"));
    }

    #[test]
    fn empty_corpus_is_valid() {
        assert!(gold_from_json(r#"{"cases":[]}"#).unwrap().is_empty());
    }

    #[test]
    fn bad_segment_reference_rejected() {
        let json = r#"{"cases":[{"id":"x","document":"only $a$ here",
            "sense_assignments":[{"segment":9,"path":[],"sense":"var:a"}]}]}"#;
        assert!(matches!(
            gold_from_json(json),
            Err(HarnessError::PathMismatch { segment: 9, .. })
        ));
    }

    #[test]
    fn bad_path_reference_rejected() {
        let json = r#"{"cases":[{"id":"x","document":"only $a$ here",
            "sense_assignments":[{"segment":0,"path":[3],"sense":"var:a"}]}]}"#;
        assert!(matches!(
            gold_from_json(json),
            Err(HarnessError::PathMismatch { .. })
        ));
    }

    #[test]
    fn duplicate_ids_rejected() {
        let json = r#"{"cases":[{"id":"x","document":"a"},{"id":"x","document":"b"}]}"#;
        assert!(matches!(gold_from_json(json), Err(HarnessError::Schema { .. })));
    }

    #[test]
    fn definiens_metric_examples() {
        let gold = case("dlmf-1.5-e2");
        // exact match
        let m = evaluate_definiens(&[candidate("\\epsilon", "constant", 0.63)], &gold, 0.3);
        assert_eq!((m.tp, m.fp, m.fn_), (1, 0, 0));
        assert_eq!((m.precision, m.recall, m.f1), (1.0, 1.0, 1.0));
        // one right, one wrong retrieval
        let m = evaluate_definiens(
            &[
                candidate("\\epsilon", "constant", 0.63),
                candidate("\\epsilon", "function", 0.5),
            ],
            &gold,
            0.3,
        );
        assert_eq!(m.precision, 0.5);
        assert_eq!(m.recall, 1.0);
        // nothing retrieved: vacuous precision
        let m = evaluate_definiens(&[], &gold, 0.3);
        assert_eq!(m.precision, 1.0);
        assert_eq!(m.recall, 0.0);
        assert_eq!(m.f1, 0.0);
    }

    #[test]
    fn cutoff_filters_retrievals() {
        let gold = case("dlmf-1.5-e2");
        let weak = candidate("\\epsilon", "function", 0.1);
        let m = evaluate_definiens(&[weak], &gold, 0.3);
        assert_eq!((m.tp, m.fp), (0, 0));
        assert_eq!(m.precision, 1.0);
    }

    #[test]
    fn sense_metric_examples() {
        let gold = case("gamma-const");
        let right = SensePrediction {
            segment: 0,
            path: vec![],
            sense: "const:EulerMascheroni".into(),
        };
        let m = evaluate_senses(std::slice::from_ref(&right), &gold).unwrap();
        assert_eq!((m.precision, m.recall), (1.0, 1.0));
        // wrong sense at a gold path: FP and FN
        let wrong = SensePrediction {
            sense: "var:gamma".into(),
            ..right.clone()
        };
        let m = evaluate_senses(&[wrong], &gold).unwrap();
        assert_eq!((m.tp, m.fp, m.fn_), (0, 1, 1));
        // undecided (no prediction): FN only
        let m = evaluate_senses(&[], &gold).unwrap();
        assert_eq!((m.tp, m.fp, m.fn_), (0, 0, 1));
    }

    #[test]
    fn perfect_prediction_fixpoint() {
        for gold in bundled_gold() {
            let preds = gold_as_predictions(&gold);
            let senses = evaluate_senses(&preds.senses, &gold).unwrap();
            assert_eq!(
                (senses.precision, senses.recall, senses.f1),
                (1.0, 1.0, 1.0),
                "{}",
                gold.id
            );
            let definiens = evaluate_definiens(&preds.definiens, &gold, 0.3);
            assert_eq!(
                (definiens.precision, definiens.recall, definiens.f1),
                (1.0, 1.0, 1.0),
                "{}",
                gold.id
            );
        }
    }

    #[test]
    fn wrong_prediction_monotonicity() {
        for gold in bundled_gold() {
            let preds = gold_as_predictions(&gold);
            let base = evaluate_definiens(&preds.definiens, &gold, 0.3);
            let mut extended = preds.definiens.clone();
            extended.push(candidate("\\nosuch", "flurble", 0.99));
            let worse = evaluate_definiens(&extended, &gold, 0.3);
            assert!(worse.precision <= base.precision, "{}", gold.id);
            assert!(worse.recall >= base.recall, "{}", gold.id);
            if !gold.identifier_definiens.is_empty() {
                assert!(worse.precision < base.precision, "{}", gold.id);
            }
        }
    }

    #[test]
    fn permutation_invariance() {
        let gold = case("dlmf-1.5-e2");
        let a = vec![
            candidate("\\epsilon", "constant", 0.63),
            candidate("\\epsilon", "function", 0.5),
            candidate("f", "function", 0.4),
        ];
        let mut b = a.clone();
        b.reverse();
        let ma = evaluate_definiens(&a, &gold, 0.3);
        let mb = evaluate_definiens(&b, &gold, 0.3);
        assert_eq!(ma, mb);
    }

    #[test]
    fn pipeline_finds_epsilon_definiens() {
        let gold = case("dlmf-1.5-e2");
        let preds = predict_case(
            &gold,
            &Lexicon::bundled(),
            &RuleWeights::default(),
            &ContextParams::default(),
            &NounLexicon::bundled(),
        )
        .unwrap();
        let m = evaluate_definiens(&preds.definiens, &gold, 0.3);
        assert!(m.recall >= 1.0, "ε definiens must be retrieved: {m:?}");
        let m = evaluate_senses(&preds.senses, &gold).unwrap();
        assert!(m.recall >= 0.5, "{m:?}");
    }

    #[test]
    fn table_is_aligned() {
        let report = CorpusReport::new(vec![
            ("a".into(), MetricsReport::from_counts(1, 0, 0)),
            ("longer-name".into(), MetricsReport::from_counts(1, 1, 1)),
        ]);
        let table = report.table();
        let widths: Vec<usize> = table.lines().map(str::len).collect();
        assert!(widths.windows(2).all(|w| w[0] == w[1]), "{table}");
        assert!(table.contains("aggregate"));
    }
}
