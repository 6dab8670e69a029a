//! Evaluation metrics and corpus statistics: execution accuracy, the
//! majority-template baseline, equation-template statistics, lexical
//! diversity, number-count breakdowns, and ablation deltas.
//!
//! Accuracies are carried as exact fractions until rendering so that delta
//! identities hold bit-exactly.

mod similarity;

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Corpus;
use crate::expr::{parse_infix, EquationTemplate, Expr};
use crate::number::{parse_decimal, to_decimal_string, within_tolerance, Num};

/// A model's output for one problem: an expression, or a decode failure
/// (which counts as incorrect but never aborts an evaluation).
#[derive(Debug, Clone, PartialEq)]
pub enum Prediction {
    Expr(Expr),
    Failure(String),
}

/// Result for one problem in an [`EvalReport`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemResult {
    pub id: String,
    /// Predicted expression, absent on decode failure.
    pub predicted: Option<Expr>,
    /// Evaluated predicted answer, absent on decode or evaluation failure.
    pub predicted_answer: Option<Num>,
    pub correct: bool,
    /// Failure description when the prediction could not be scored.
    pub failure: Option<String>,
}

/// Per-problem correctness plus exact aggregate accuracy.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvalReport {
    pub results: Vec<ProblemResult>,
    /// Optional named subset accuracies as (correct, total) pairs.
    pub subsets: BTreeMap<String, (usize, usize)>,
}

impl EvalReport {
    pub fn correct_count(&self) -> usize {
        self.results.iter().filter(|r| r.correct).count()
    }

    pub fn len(&self) -> usize {
        self.results.len()
    }

    pub fn is_empty(&self) -> bool {
        self.results.is_empty()
    }

    /// Aggregate accuracy as an exact fraction.
    pub fn accuracy_exact(&self) -> Num {
        fraction(self.correct_count(), self.len())
    }

    /// Aggregate accuracy as a float in [0, 1].
    pub fn accuracy(&self) -> f64 {
        if self.results.is_empty() {
            0.0
        } else {
            self.correct_count() as f64 / self.len() as f64
        }
    }

    /// Accuracy over the subset of results whose ids are in `ids`.
    pub fn subset_accuracy(&self, ids: &HashSet<String>) -> (usize, usize) {
        let mut correct = 0;
        let mut total = 0;
        for r in &self.results {
            if ids.contains(&r.id) {
                total += 1;
                if r.correct {
                    correct += 1;
                }
            }
        }
        (correct, total)
    }

    /// Merge fold-level reports into one.
    pub fn merge(reports: impl IntoIterator<Item = EvalReport>) -> EvalReport {
        let mut out = EvalReport::default();
        for r in reports {
            out.results.extend(r.results);
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(ReportDoc::from(self)).expect("report serializes")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<EvalReport, MetricsError> {
        let doc: ReportDoc =
            serde_json::from_value(v.clone()).map_err(|e| MetricsError::BadReport(e.to_string()))?;
        doc.try_into()
    }
}

/// Exact fraction `a / b` (0 when `b` is 0).
pub fn fraction(a: usize, b: usize) -> Num {
    if b == 0 {
        crate::number::from_i64(0)
    } else {
        Num::new((a as i64).into(), (b as i64).into())
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ResultDoc {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    predicted: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    predicted_answer: Option<String>,
    correct: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    failure: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ReportDoc {
    accuracy: f64,
    correct: usize,
    total: usize,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    subsets: BTreeMap<String, (usize, usize)>,
    results: Vec<ResultDoc>,
}

impl From<&EvalReport> for ReportDoc {
    fn from(r: &EvalReport) -> ReportDoc {
        ReportDoc {
            accuracy: r.accuracy(),
            correct: r.correct_count(),
            total: r.len(),
            subsets: r.subsets.clone(),
            results: r
                .results
                .iter()
                .map(|p| ResultDoc {
                    id: p.id.clone(),
                    predicted: p.predicted.as_ref().map(|e| e.render_infix()),
                    predicted_answer: p
                        .predicted_answer
                        .as_ref()
                        .map(|v| to_decimal_string(v, 12)),
                    correct: p.correct,
                    failure: p.failure.clone(),
                })
                .collect(),
        }
    }
}

impl TryFrom<ReportDoc> for EvalReport {
    type Error = MetricsError;

    fn try_from(doc: ReportDoc) -> Result<EvalReport, MetricsError> {
        let mut results = Vec::new();
        for r in doc.results {
            let predicted = match r.predicted {
                Some(s) => Some(
                    parse_infix(&s)
                        .map_err(|e| MetricsError::BadReport(format!("{}: {e}", r.id)))?,
                ),
                None => None,
            };
            results.push(ProblemResult {
                id: r.id,
                predicted,
                predicted_answer: r.predicted_answer.as_deref().and_then(parse_decimal),
                correct: r.correct,
                failure: r.failure,
            });
        }
        Ok(EvalReport {
            results,
            subsets: doc.subsets,
        })
    }
}

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("prediction refers to unknown problem id {0}")]
    UnknownId(String),
    #[error("no prediction supplied for problem id {0}")]
    MissingPrediction(String),
    #[error("train corpus is empty")]
    EmptyTrain,
    #[error("report does not cover corpus: {0}")]
    ReportCorpusMismatch(String),
    #[error("malformed report: {0}")]
    BadReport(String),
}

/// Score predictions against a corpus's annotated answers.
///
/// A prediction is correct iff `|predicted − gold| ≤ tol · max(1, |gold|)`.
/// Decode failures and evaluation errors (unbound slot, division by zero)
/// count as incorrect.
pub fn execution_accuracy(
    predictions: &BTreeMap<String, Prediction>,
    corpus: &Corpus,
    tolerance: &Num,
) -> Result<EvalReport, MetricsError> {
    let known: HashSet<&str> = corpus.problems.iter().map(|p| p.id.as_str()).collect();
    for id in predictions.keys() {
        if !known.contains(id.as_str()) {
            return Err(MetricsError::UnknownId(id.clone()));
        }
    }
    let mut results = Vec::new();
    for p in &corpus.problems {
        let pred = predictions
            .get(&p.id)
            .ok_or_else(|| MetricsError::MissingPrediction(p.id.clone()))?;
        let result = match pred {
            Prediction::Failure(why) => ProblemResult {
                id: p.id.clone(),
                predicted: None,
                predicted_answer: None,
                correct: false,
                failure: Some(why.clone()),
            },
            Prediction::Expr(e) => match e.evaluate(Some(&p.number_values())) {
                Ok(v) => ProblemResult {
                    id: p.id.clone(),
                    correct: within_tolerance(&v, &p.answer, tolerance),
                    predicted: Some(e.clone()),
                    predicted_answer: Some(v),
                    failure: None,
                },
                Err(err) => ProblemResult {
                    id: p.id.clone(),
                    predicted: Some(e.clone()),
                    predicted_answer: None,
                    correct: false,
                    failure: Some(err.to_string()),
                },
            },
        };
        results.push(result);
    }
    Ok(EvalReport {
        results,
        subsets: BTreeMap::new(),
    })
}

/// Default evaluation tolerance (1e-4, relative-or-absolute hybrid).
pub fn default_tolerance() -> Num {
    parse_decimal("0.0001").unwrap()
}

/// Baseline that always predicts the training set's most frequent equation
/// template, binding `#` holes to each test problem's text numbers in
/// textual order. Ties break to the lexicographically smallest template
/// string. Problems with too few numbers yield decode failures.
pub fn majority_template_predict(
    train: &Corpus,
    test: &Corpus,
) -> Result<BTreeMap<String, Prediction>, MetricsError> {
    let modal = modal_template(train)?;
    let mut out = BTreeMap::new();
    for p in &test.problems {
        let pred = match modal.instantiate_slots(p.numbers.len()) {
            Some(e) => Prediction::Expr(e),
            None => Prediction::Failure(format!(
                "modal template {modal} needs {} numbers, problem has {}",
                modal.hole_count(),
                p.numbers.len()
            )),
        };
        out.insert(p.id.clone(), pred);
    }
    Ok(out)
}

/// Most frequent equation template of a corpus (lexicographic tiebreak).
pub fn modal_template(train: &Corpus) -> Result<EquationTemplate, MetricsError> {
    if train.is_empty() {
        return Err(MetricsError::EmptyTrain);
    }
    let mut freq: BTreeMap<String, usize> = BTreeMap::new();
    for p in &train.problems {
        *freq.entry(p.equation.template().to_string()).or_insert(0) += 1;
    }
    let (best, _) = freq
        .iter()
        .max_by(|(sa, ca), (sb, cb)| ca.cmp(cb).then(sb.cmp(sa)))
        .expect("non-empty");
    Ok(EquationTemplate::parse(best).expect("template strings round-trip"))
}

/// Equation-template statistics for a corpus.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TemplateStats {
    pub problem_count: usize,
    pub distinct_templates: usize,
    pub avg_operators: f64,
    /// Whether commutative canonicalization was applied (off by default).
    pub canonicalized: bool,
    /// Template string → frequency.
    pub frequencies: BTreeMap<String, usize>,
}

/// Compute template statistics. `canonicalize` reorders commutative
/// operands before masking; the default (false) matches the raw equations.
pub fn template_stats(corpus: &Corpus, canonicalize: bool) -> TemplateStats {
    let mut frequencies: BTreeMap<String, usize> = BTreeMap::new();
    let mut total_ops = 0usize;
    for p in &corpus.problems {
        let t = p.equation.template_with(canonicalize);
        total_ops += t.operator_count();
        *frequencies.entry(t.to_string()).or_insert(0) += 1;
    }
    TemplateStats {
        problem_count: corpus.len(),
        distinct_templates: frequencies.len(),
        avg_operators: if corpus.is_empty() {
            0.0
        } else {
            total_ops as f64 / corpus.len() as f64
        },
        canonicalized: canonicalize,
        frequencies,
    }
}

/// Parameters for [`lexical_diversity`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiversityParams {
    /// Similarity threshold for joining a cluster.
    pub threshold: f64,
}

impl Default for DiversityParams {
    fn default() -> Self {
        DiversityParams { threshold: 0.5 }
    }
}

/// Corpus-level lexical diversity.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiversityReport {
    /// Diversity value in [0, 1].
    pub cld: f64,
    /// Identifier of the formula that produced the value.
    pub formula: String,
    pub params: DiversityParams,
    pub cluster_count: usize,
    pub problem_count: usize,
}

/// Default corpus lexical diversity: greedily cluster problems by BLEU-2
/// style n-gram overlap (join when similarity to any member ≥ threshold),
/// then scale `(#clusters − 1) / (#problems − 1)` into [0, 1]. A singleton
/// corpus scores 0.
///
/// This is a documented stand-in ordering metric, not the externally
/// defined CLD formula; it reproduces the relative ordering of corpora.
pub fn lexical_diversity(corpus: &Corpus, params: &DiversityParams) -> DiversityReport {
    let n = corpus.len();
    if n <= 1 {
        return DiversityReport {
            cld: 0.0,
            formula: "greedy-bleu2-cluster".to_string(),
            params: params.clone(),
            cluster_count: n,
            problem_count: n,
        };
    }
    let clusters = similarity::greedy_clusters(corpus, params.threshold);
    let cluster_count = clusters.iter().copied().max().map_or(0, |m| m + 1);
    DiversityReport {
        cld: (cluster_count - 1) as f64 / (n - 1) as f64,
        formula: "greedy-bleu2-cluster".to_string(),
        params: params.clone(),
        cluster_count,
        problem_count: n,
    }
}

/// Accuracy per number-count bucket (`2`, `3`, `4+`); empty buckets are
/// omitted.
pub fn breakdown_by_num_count(
    report: &EvalReport,
    corpus: &Corpus,
) -> Result<BTreeMap<String, (usize, usize)>, MetricsError> {
    let mut buckets: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for r in &report.results {
        let p = corpus
            .get(&r.id)
            .ok_or_else(|| MetricsError::ReportCorpusMismatch(r.id.clone()))?;
        let key = match p.numbers.len() {
            n if n <= 2 => "2",
            3 => "3",
            _ => "4+",
        };
        let entry = buckets.entry(key.to_string()).or_insert((0, 0));
        entry.1 += 1;
        if r.correct {
            entry.0 += 1;
        }
    }
    Ok(buckets)
}

/// Accuracy change from removing every problem whose variation chain
/// contains a label.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AblationDelta {
    pub label: String,
    pub removed_count: usize,
    /// Accuracy on the full set, percent.
    pub acc_full: f64,
    /// Accuracy on the remaining set, percent.
    pub acc_removed: f64,
    /// `acc_removed − acc_full`, percent.
    pub delta: f64,
    /// Exact fractions behind the floats: (correct, total) pairs.
    pub full_fraction: (usize, usize),
    pub removed_fraction: (usize, usize),
}

/// Compute `Δ = Acc(Full − X) − Acc(Full)` for a category or variation
/// label. `Full − X` keeps exactly the problems whose chain does not
/// contain the label. The subtraction happens on exact fractions; only the
/// rendered percentages are floats.
pub fn ablation_delta(
    report_full: &EvalReport,
    corpus: &Corpus,
    label: &str,
) -> Result<AblationDelta, MetricsError> {
    ablation_delta_by(report_full, corpus, label, |l| l == label)
}

/// Like [`ablation_delta`] with a caller-supplied chain-label predicate
/// (e.g. to remove a whole variation category).
pub fn ablation_delta_by(
    report_full: &EvalReport,
    corpus: &Corpus,
    label: &str,
    matches: impl Fn(&str) -> bool,
) -> Result<AblationDelta, MetricsError> {
    let mut kept_ids = HashSet::new();
    let mut removed = 0usize;
    for p in &corpus.problems {
        if p.variation_chain.iter().any(|l| matches(l)) {
            removed += 1;
        } else {
            kept_ids.insert(p.id.clone());
        }
    }
    let full = (report_full.correct_count(), report_full.len());
    if full.1 == 0 {
        return Err(MetricsError::ReportCorpusMismatch("empty report".into()));
    }
    let kept = report_full.subset_accuracy(&kept_ids);
    let acc_full = fraction(full.0, full.1);
    let acc_removed = if removed == 0 {
        acc_full.clone()
    } else {
        fraction(kept.0, kept.1)
    };
    let delta = &acc_removed - &acc_full;
    Ok(AblationDelta {
        label: label.to_string(),
        removed_count: removed,
        acc_full: rat_percent(&acc_full),
        acc_removed: rat_percent(&acc_removed),
        delta: rat_percent(&delta),
        full_fraction: full,
        removed_fraction: if removed == 0 { full } else { kept },
    })
}

fn rat_percent(v: &Num) -> f64 {
    use num_traits::ToPrimitive;
    v.to_f64().unwrap_or(0.0) * 100.0
}

/// Render template statistics rows as a Markdown table matching the layout
/// `Dataset | # Problems | # Equation Templates | # Avg Ops | CLD`.
pub fn render_stats_markdown(rows: &[(String, TemplateStats, Option<DiversityReport>)]) -> String {
    let mut out = String::from(
        "| Dataset | # Problems | # Equation Templates | # Avg Ops | CLD |\n|---|---|---|---|---|\n",
    );
    for (name, stats, diversity) in rows {
        let cld = diversity
            .as_ref()
            .map(|d| format!("{:.2}", d.cld))
            .unwrap_or_else(|| "-".to_string());
        out.push_str(&format!(
            "| {name} | {} | {} | {:.2} | {cld} |\n",
            stats.problem_count, stats.distinct_templates, stats.avg_operators
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{ingest_str, SourceFormat};
    use crate::expr::Op;
    use crate::number::from_i64;

    fn toy_corpus() -> Corpus {
        // templates: "- # #" x3, "+ # #" x1
        let lines = [
            r#"{"id": "a", "body": "Jack had 8 pens. He gave 3 pens away.", "question": "How many pens does Jack have now?", "equation": "N0 - N1", "answer": "5"}"#,
            r#"{"id": "b", "body": "Mary had 9 cups. She broke 4 cups.", "question": "How many cups are left?", "equation": "N0 - N1", "answer": "5"}"#,
            r#"{"id": "c", "body": "Tom had 7 hats. He lost 2 hats.", "question": "How many hats remain?", "equation": "N0 - N1", "answer": "5"}"#,
            r#"{"id": "d", "body": "Ann had 1 bag and bought 2 bags.", "question": "How many bags in all?", "equation": "N0 + N1", "answer": "3"}"#,
        ]
        .join("\n");
        ingest_str(&lines, SourceFormat::NativeJson, "toy").unwrap()
    }

    #[test]
    fn execution_accuracy_basic() {
        let corpus = toy_corpus();
        let mut preds = BTreeMap::new();
        for p in &corpus.problems {
            preds.insert(p.id.clone(), Prediction::Expr(p.equation.clone()));
        }
        let report = execution_accuracy(&preds, &corpus, &default_tolerance()).unwrap();
        assert_eq!(report.accuracy(), 1.0);

        // wrong prediction: 3 * 24 = 72 vs gold 5
        preds.insert(
            "a".to_string(),
            Prediction::Expr(Expr::bin(
                Op::Mul,
                Expr::literal_i64(3),
                Expr::literal_i64(24),
            )),
        );
        let report = execution_accuracy(&preds, &corpus, &default_tolerance()).unwrap();
        assert_eq!(report.correct_count(), 3);
        let a = report.results.iter().find(|r| r.id == "a").unwrap();
        assert_eq!(a.predicted_answer, Some(from_i64(72)));
        assert!(!a.correct);
    }

    #[test]
    fn tolerance_accepts_close_decimals() {
        let lines = r#"{"id": "a", "body": "A ate 5 thirds.", "question": "How much?", "equation": "5 / 3", "answer": "1.6666666667"}"#;
        let corpus = ingest_str(lines, SourceFormat::NativeJson, "t").unwrap();
        let mut preds = BTreeMap::new();
        preds.insert(
            "a".to_string(),
            Prediction::Expr(Expr::Literal(parse_decimal("1.666666").unwrap())),
        );
        let report = execution_accuracy(&preds, &corpus, &default_tolerance()).unwrap();
        assert_eq!(report.correct_count(), 1);
    }

    #[test]
    fn unknown_and_missing_ids_are_errors() {
        let corpus = toy_corpus();
        let mut preds = BTreeMap::new();
        preds.insert("zzz".to_string(), Prediction::Failure("?".into()));
        assert!(matches!(
            execution_accuracy(&preds, &corpus, &default_tolerance()),
            Err(MetricsError::UnknownId(_))
        ));
        let preds = BTreeMap::new();
        assert!(matches!(
            execution_accuracy(&preds, &corpus, &default_tolerance()),
            Err(MetricsError::MissingPrediction(_))
        ));
    }

    #[test]
    fn majority_baseline_modal_and_binding() {
        let corpus = toy_corpus();
        let modal = modal_template(&corpus).unwrap();
        assert_eq!(modal.to_string(), "- # #");

        let test = ingest_str(
            r#"{"id": "t", "body": "Jack had 8 pens and Mary had 5 pens. Jack gave 3 pens to Mary.", "question": "How many pens does Jack have now?", "equation": "N0 - N2", "answer": "5"}"#,
            SourceFormat::NativeJson,
            "test",
        )
        .unwrap();
        let preds = majority_template_predict(&corpus, &test).unwrap();
        // binds first two numbers in textual order: 8 - 5 = 3, which is wrong
        match &preds["t"] {
            Prediction::Expr(e) => {
                assert_eq!(
                    e.evaluate(Some(&test.problems[0].number_values())).unwrap(),
                    from_i64(3)
                );
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn majority_baseline_decode_failure_on_too_few_numbers() {
        let corpus = toy_corpus();
        let test = ingest_str(
            r#"{"id": "t", "body": "Jack had 8 pens.", "question": "How many pens?", "equation": "N0", "answer": "8"}"#,
            SourceFormat::NativeJson,
            "test",
        )
        .unwrap();
        let preds = majority_template_predict(&corpus, &test).unwrap();
        assert!(matches!(preds["t"], Prediction::Failure(_)));
        let report = execution_accuracy(&preds, &test, &default_tolerance()).unwrap();
        assert_eq!(report.correct_count(), 0);
    }

    #[test]
    fn majority_tie_breaks_lexicographically() {
        let lines = [
            r#"{"id": "a", "body": "A had 8 pens. A lost 3 pens.", "question": "How many?", "equation": "N0 - N1", "answer": "5"}"#,
            r#"{"id": "b", "body": "B had 1 bag and bought 2 bags.", "question": "How many?", "equation": "N0 + N1", "answer": "3"}"#,
        ]
        .join("\n");
        let corpus = ingest_str(&lines, SourceFormat::NativeJson, "tie").unwrap();
        // "+ # #" < "- # #" lexicographically
        assert_eq!(modal_template(&corpus).unwrap().to_string(), "+ # #");
    }

    #[test]
    fn template_stats_counts() {
        let corpus = toy_corpus();
        let stats = template_stats(&corpus, false);
        assert_eq!(stats.problem_count, 4);
        assert_eq!(stats.distinct_templates, 2);
        assert_eq!(stats.avg_operators, 1.0);
        assert_eq!(stats.frequencies["- # #"], 3);
        let total: usize = stats.frequencies.values().sum();
        assert_eq!(total, stats.problem_count);
    }

    #[test]
    fn diversity_extremes() {
        // identical problems -> one cluster -> 0
        let same = r#"{"id": "a", "body": "Jack had 8 pens. He lost 3 pens.", "question": "How many pens now?", "equation": "N0 - N1", "answer": "5"}
{"id": "b", "body": "Jack had 8 pens. He lost 3 pens.", "question": "How many pens now?", "equation": "N0 - N1", "answer": "5"}"#;
        let corpus = ingest_str(same, SourceFormat::NativeJson, "same").unwrap();
        let d = lexical_diversity(&corpus, &DiversityParams::default());
        assert_eq!(d.cld, 0.0);

        // pairwise-disjoint vocabulary -> all singleton clusters -> 1
        let disjoint = r#"{"id": "a", "body": "Jack had 8 pens near home.", "question": "How many pens remain there?", "equation": "N0", "answer": "8"}
{"id": "b", "body": "Maria baked 12 cakes for school.", "question": "Count the cakes she made today?", "equation": "N0", "answer": "12"}
{"id": "c", "body": "Wolves hunted 4 deer in winter.", "question": "What number of deer were caught?", "equation": "N0", "answer": "4"}"#;
        let corpus = ingest_str(disjoint, SourceFormat::NativeJson, "disjoint").unwrap();
        let d = lexical_diversity(&corpus, &DiversityParams::default());
        assert_eq!(d.cld, 1.0);

        // singleton corpus -> defined as 0
        let single = r#"{"id": "a", "body": "Jack had 8 pens.", "question": "How many?", "equation": "N0", "answer": "8"}"#;
        let corpus = ingest_str(single, SourceFormat::NativeJson, "one").unwrap();
        assert_eq!(lexical_diversity(&corpus, &DiversityParams::default()).cld, 0.0);
    }

    #[test]
    fn num_count_breakdown() {
        let lines = [
            r#"{"id": "a", "body": "A had 8 pens. A lost 3 pens.", "question": "How many?", "equation": "N0 - N1", "answer": "5"}"#,
            r#"{"id": "b", "body": "B had 8 pens, 3 cats and 2 dogs.", "question": "How many pens minus cats?", "equation": "N0 - N1", "answer": "5"}"#,
        ]
        .join("\n");
        let corpus = ingest_str(&lines, SourceFormat::NativeJson, "bd").unwrap();
        let mut preds = BTreeMap::new();
        preds.insert(
            "a".to_string(),
            Prediction::Expr(corpus.problems[0].equation.clone()),
        );
        preds.insert("b".to_string(), Prediction::Failure("no".into()));
        let report = execution_accuracy(&preds, &corpus, &default_tolerance()).unwrap();
        let buckets = breakdown_by_num_count(&report, &corpus).unwrap();
        assert_eq!(buckets["2"], (1, 1));
        assert_eq!(buckets["3"], (0, 1));
        assert!(!buckets.contains_key("4+"));
    }

    #[test]
    fn ablation_delta_identity() {
        // 8 problems, chain label on 4 of them; full acc 4/8, kept acc 3/4
        let mut lines = String::new();
        for i in 0..8 {
            let chain = if i < 4 {
                r#"["Question Sensitivity"]"#
            } else {
                "[]"
            };
            lines.push_str(&format!(
                r#"{{"id": "p{i}", "body": "A had 8 pens. A lost 3 pens.", "question": "How many?", "equation": "N0 - N1", "answer": "5", "variation_chain": {chain}, "seed_id": "s{i}"}}"#
            ));
            lines.push('\n');
        }
        let corpus = ingest_str(&lines, SourceFormat::NativeJson, "abl").unwrap();
        let mut preds = BTreeMap::new();
        for (i, p) in corpus.problems.iter().enumerate() {
            // correct: p1, p2, p3 from labeled; wrong p0; kept: p4..p7 with p4 wrong... tune:
            // correct on p1,p2,p3,p4 -> full 4/8; kept = p4..p7 -> 1/4
            let pred = if (1..=4).contains(&i) {
                Prediction::Expr(p.equation.clone())
            } else {
                Prediction::Failure("no".into())
            };
            preds.insert(p.id.clone(), pred);
        }
        let report = execution_accuracy(&preds, &corpus, &default_tolerance()).unwrap();
        let delta = ablation_delta(&report, &corpus, "Question Sensitivity").unwrap();
        assert_eq!(delta.removed_count, 4);
        assert_eq!(delta.full_fraction, (4, 8));
        assert_eq!(delta.removed_fraction, (1, 4));
        // exact identity: 25% - 50% = -25%
        assert_eq!(delta.delta, -25.0);
        assert_eq!(delta.acc_removed - delta.acc_full, delta.delta);
    }

    #[test]
    fn ablation_unused_label_is_zero() {
        let corpus = toy_corpus();
        let mut preds = BTreeMap::new();
        for p in &corpus.problems {
            preds.insert(p.id.clone(), Prediction::Expr(p.equation.clone()));
        }
        let report = execution_accuracy(&preds, &corpus, &default_tolerance()).unwrap();
        let delta = ablation_delta(&report, &corpus, "Invert Operation").unwrap();
        assert_eq!(delta.removed_count, 0);
        assert_eq!(delta.delta, 0.0);
    }

    #[test]
    fn report_json_round_trip() {
        let corpus = toy_corpus();
        let mut preds = BTreeMap::new();
        for p in &corpus.problems {
            preds.insert(p.id.clone(), Prediction::Expr(p.equation.clone()));
        }
        preds.insert("a".to_string(), Prediction::Failure("decode".into()));
        let report = execution_accuracy(&preds, &corpus, &default_tolerance()).unwrap();
        let back = EvalReport::from_json(&report.to_json()).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn weighted_subset_mean_equals_aggregate() {
        let corpus = toy_corpus();
        let mut preds = BTreeMap::new();
        for (i, p) in corpus.problems.iter().enumerate() {
            let pred = if i % 2 == 0 {
                Prediction::Expr(p.equation.clone())
            } else {
                Prediction::Failure("no".into())
            };
            preds.insert(p.id.clone(), pred);
        }
        let report = execution_accuracy(&preds, &corpus, &default_tolerance()).unwrap();
        let easy: HashSet<String> = ["a", "b"].iter().map(|s| s.to_string()).collect();
        let hard: HashSet<String> = ["c", "d"].iter().map(|s| s.to_string()).collect();
        let (ec, et) = report.subset_accuracy(&easy);
        let (hc, ht) = report.subset_accuracy(&hard);
        assert_eq!(ec + hc, report.correct_count());
        assert_eq!(et + ht, report.len());
    }
}
