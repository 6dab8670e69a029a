//! Normalized math-word-problem corpora.
//!
//! [`ingest`] converts heterogeneous source formats (ASDiv XML, MAWPS JSON,
//! SVAMP JSON, or the native line-delimited JSON) into one [`Corpus`] of
//! [`Problem`]s: tokenized body and question, ordered number mentions,
//! an equation with literals aligned to number slots where possible, and a
//! validated answer. Conversion is lossy only where recorded in warnings.

pub mod folds;
pub mod readers;
pub mod tokenize;

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{parse_equation, parse_infix, Expr};
use crate::number::{parse_decimal, to_decimal_string, Num};
pub use folds::{make_folds, FoldError, FoldScheme, FoldSet};
pub use tokenize::{detokenize, split_body_question, tokenize, NumberMention};

/// One normalized math word problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub id: String,
    /// Narrative tokens (everything before the question).
    pub body: Vec<String>,
    /// Question tokens.
    pub question: Vec<String>,
    /// Number mentions across `body ++ question`, in textual order.
    pub numbers: Vec<NumberMention>,
    /// Gold equation; literals aligned to slot references where possible.
    pub equation: Expr,
    pub answer: Num,
    pub grade: Option<u8>,
    /// Problem type label (Addition/Subtraction/Multiplication/Division).
    pub ptype: Option<String>,
    /// Variation labels, ordered latest-applied first.
    pub variation_chain: Vec<String>,
    /// Seed problem this one was derived from, if any.
    pub seed_id: Option<String>,
}

impl Problem {
    /// Full token sequence `body ++ question`.
    pub fn tokens(&self) -> Vec<String> {
        let mut t = self.body.clone();
        t.extend(self.question.iter().cloned());
        t
    }

    /// Values of the number mentions, in textual order.
    pub fn number_values(&self) -> Vec<Num> {
        self.numbers.iter().map(|m| m.value.clone()).collect()
    }

    /// Evaluate the gold equation against this problem's numbers.
    pub fn gold_answer(&self) -> Result<Num, crate::expr::EvalError> {
        self.equation.evaluate(Some(&self.number_values()))
    }
}

/// Source format of a corpus file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SourceFormat {
    #[clap(name = "asdiv-xml")]
    AsdivXml,
    #[clap(name = "mawps-json")]
    MawpsJson,
    #[clap(name = "svamp-json")]
    SvampJson,
    #[clap(name = "native-json")]
    NativeJson,
}

impl fmt::Display for SourceFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SourceFormat::AsdivXml => "asdiv-xml",
            SourceFormat::MawpsJson => "mawps-json",
            SourceFormat::SvampJson => "svamp-json",
            SourceFormat::NativeJson => "native-json",
        };
        f.write_str(s)
    }
}

/// Per-problem conversion or validation warning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestWarning {
    pub problem_id: String,
    pub message: String,
}

/// Where a corpus came from and what was flagged while reading it.
#[derive(Debug, Clone, Default)]
pub struct Provenance {
    pub source_format: String,
    pub warnings: Vec<IngestWarning>,
}

/// An ordered, immutable collection of problems.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub name: String,
    pub problems: Vec<Problem>,
    pub provenance: Provenance,
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.problems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.problems.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Problem> {
        self.problems.iter().find(|p| p.id == id)
    }

    /// Subcorpus restricted to the given ids, preserving order.
    pub fn subset(&self, ids: &HashSet<String>) -> Corpus {
        Corpus {
            name: self.name.clone(),
            problems: self
                .problems
                .iter()
                .filter(|p| ids.contains(&p.id))
                .cloned()
                .collect(),
            provenance: Provenance {
                source_format: self.provenance.source_format.clone(),
                warnings: Vec::new(),
            },
        }
    }

    fn check_invariants(&self) -> Result<(), IngestError> {
        if self.problems.is_empty() {
            return Err(IngestError::EmptyCorpus);
        }
        let mut seen = HashSet::new();
        for p in &self.problems {
            if !seen.insert(p.id.clone()) {
                return Err(IngestError::DuplicateId(p.id.clone()));
            }
        }
        Ok(())
    }
}

/// Error reading or validating a corpus file.
#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("XML error: {0}")]
    Xml(String),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("schema violations in {count} record(s): {examples:?}")]
    Schema { count: usize, examples: Vec<String> },
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("duplicate problem id {0}")]
    DuplicateId(String),
}

/// Raw record produced by a format reader, before normalization.
#[derive(Debug, Clone)]
pub struct RawRecord {
    pub id: String,
    pub body: String,
    pub question: Option<String>,
    pub equation: String,
    pub answer: String,
    pub grade: Option<u8>,
    pub ptype: Option<String>,
    pub variation_chain: Vec<String>,
    pub seed_id: Option<String>,
}

/// Tolerance used to cross-check annotated answers at ingest (1e-4).
pub fn ingest_tolerance() -> Num {
    parse_decimal("0.0001").unwrap()
}

/// Align equation literals to text number mentions, greedily left-to-right
/// by exact value; duplicates resolve to the first unused mention. Literals
/// that match no mention stay literals and are reported.
pub fn align_literals(equation: &Expr, numbers: &[NumberMention]) -> (Expr, Vec<Num>) {
    let mut used = vec![false; numbers.len()];
    let mut unaligned = Vec::new();
    let aligned = align_rec(equation, numbers, &mut used, &mut unaligned);
    (aligned, unaligned)
}

fn align_rec(
    e: &Expr,
    numbers: &[NumberMention],
    used: &mut [bool],
    unaligned: &mut Vec<Num>,
) -> Expr {
    match e {
        Expr::Literal(v) => {
            for (i, m) in numbers.iter().enumerate() {
                if !used[i] && &m.value == v {
                    used[i] = true;
                    return Expr::Slot(i);
                }
            }
            unaligned.push(v.clone());
            Expr::Literal(v.clone())
        }
        Expr::Slot(i) => Expr::Slot(*i),
        Expr::Bin { op, lhs, rhs } => Expr::bin(
            *op,
            align_rec(lhs, numbers, used, unaligned),
            align_rec(rhs, numbers, used, unaligned),
        ),
    }
}

/// Normalize one raw record into a [`Problem`], accumulating warnings.
pub fn normalize_record(
    raw: RawRecord,
    warnings: &mut Vec<IngestWarning>,
) -> Result<Problem, String> {
    let (body_text, question_text) = match raw.question {
        Some(q) => (raw.body, q),
        None => {
            let bq = split_body_question(&raw.body);
            for w in &bq.warnings {
                warnings.push(IngestWarning {
                    problem_id: raw.id.clone(),
                    message: format!("body/question split: {w}"),
                });
            }
            (bq.body, bq.question)
        }
    };
    let (body, body_mentions) = tokenize(&body_text);
    let (question, mut q_mentions) = tokenize(&question_text);
    for m in &mut q_mentions {
        m.token_index += body.len();
    }
    let mut numbers = body_mentions;
    numbers.append(&mut q_mentions);

    let (equation, stated_answer) =
        parse_equation(&raw.equation).map_err(|e| format!("equation {:?}: {e}", raw.equation))?;
    let answer = parse_decimal(&raw.answer)
        .ok_or_else(|| format!("unparseable answer {:?}", raw.answer))?;
    if let Some(stated) = stated_answer {
        if !crate::number::within_tolerance(&stated, &answer, &ingest_tolerance()) {
            warnings.push(IngestWarning {
                problem_id: raw.id.clone(),
                message: format!(
                    "equation suffix answer {} disagrees with annotated answer {}",
                    to_decimal_string(&stated, 12),
                    to_decimal_string(&answer, 12)
                ),
            });
        }
    }
    let (equation, unaligned) = align_literals(&equation, &numbers);
    for v in &unaligned {
        warnings.push(IngestWarning {
            problem_id: raw.id.clone(),
            message: format!(
                "equation literal {} not found among text numbers",
                to_decimal_string(v, 12)
            ),
        });
    }
    let problem = Problem {
        id: raw.id.clone(),
        body,
        question,
        numbers,
        equation,
        answer,
        grade: raw.grade,
        ptype: raw.ptype,
        variation_chain: raw.variation_chain,
        seed_id: raw.seed_id,
    };
    match problem.gold_answer() {
        Ok(v) => {
            if !crate::number::within_tolerance(&v, &problem.answer, &ingest_tolerance()) {
                warnings.push(IngestWarning {
                    problem_id: raw.id,
                    message: format!(
                        "equation evaluates to {} but annotated answer is {}",
                        to_decimal_string(&v, 12),
                        to_decimal_string(&problem.answer, 12)
                    ),
                });
            }
        }
        Err(e) => warnings.push(IngestWarning {
            problem_id: raw.id,
            message: format!("equation does not evaluate: {e}"),
        }),
    }
    Ok(problem)
}

/// Read a corpus file in the given format.
pub fn ingest(path: &Path, format: SourceFormat) -> Result<Corpus, IngestError> {
    let text = std::fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "corpus".to_string());
    ingest_str(&text, format, &name)
}

/// Like [`ingest`] but over in-memory text.
pub fn ingest_str(text: &str, format: SourceFormat, name: &str) -> Result<Corpus, IngestError> {
    let raws = match format {
        SourceFormat::AsdivXml => readers::read_asdiv_xml(text)?,
        SourceFormat::MawpsJson => readers::read_mawps_json(text)?,
        SourceFormat::SvampJson => readers::read_svamp_json(text)?,
        SourceFormat::NativeJson => readers::read_native_jsonl(text)?,
    };
    let mut warnings = Vec::new();
    let mut problems = Vec::new();
    let mut failures = Vec::new();
    for raw in raws {
        let id = raw.id.clone();
        match normalize_record(raw, &mut warnings) {
            Ok(p) => problems.push(p),
            Err(msg) => failures.push(format!("{id}: {msg}")),
        }
    }
    if !failures.is_empty() {
        return Err(IngestError::Schema {
            count: failures.len(),
            examples: failures.into_iter().take(5).collect(),
        });
    }
    let corpus = Corpus {
        name: name.to_string(),
        problems,
        provenance: Provenance {
            source_format: format.to_string(),
            warnings,
        },
    };
    corpus.check_invariants()?;
    Ok(corpus)
}

/// Serialize a corpus to the native line-delimited JSON format.
pub fn write_native_jsonl(corpus: &Corpus) -> String {
    let mut out = String::new();
    for p in &corpus.problems {
        let record = readers::NativeRecord::from_problem(p);
        out.push_str(&serde_json::to_string(&record).expect("serializable record"));
        out.push('\n');
    }
    out
}

/// Parse an infix equation in which slot markers `N<i>` may appear.
pub fn parse_slot_equation(s: &str) -> Result<Expr, crate::expr::ParseError> {
    parse_infix(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::number::from_i64;

    fn svamp_sample() -> &'static str {
        r#"[{"ID": "chal-1", "Body": "Jack had 8 pens and Mary had 5 pens. Jack gave 3 pens to Mary.", "Question": "How many pens does Jack have now?", "Equation": "( 8.0 - 3.0 )", "Answer": 5.0, "Type": "Subtraction"}]"#
    }

    #[test]
    fn ingests_svamp_record_with_aligned_slots() {
        let corpus = ingest_str(svamp_sample(), SourceFormat::SvampJson, "svamp").unwrap();
        assert_eq!(corpus.len(), 1);
        let p = &corpus.problems[0];
        assert_eq!(p.numbers.len(), 3);
        assert_eq!(p.answer, from_i64(5));
        // 8 -> slot 0, 3 -> slot 2 (textual order 8, 5, 3)
        assert_eq!(
            p.equation,
            Expr::bin(crate::expr::Op::Sub, Expr::Slot(0), Expr::Slot(2))
        );
        assert_eq!(p.gold_answer().unwrap(), from_i64(5));
        assert!(corpus.provenance.warnings.is_empty());
    }

    #[test]
    fn empty_file_is_an_error() {
        assert!(matches!(
            ingest_str("[]", SourceFormat::SvampJson, "x"),
            Err(IngestError::EmptyCorpus)
        ));
        assert!(ingest_str("", SourceFormat::MawpsJson, "x").is_err());
    }

    #[test]
    fn unaligned_literal_is_kept_and_warned() {
        let text = r#"[{"iIndex": 1, "sQuestion": "Jack had 8 pens. He bought some more. How many now?", "lEquations": ["X=(8.0+7.0)"], "lSolutions": [15.0]}]"#;
        let corpus = ingest_str(text, SourceFormat::MawpsJson, "mawps").unwrap();
        assert_eq!(corpus.len(), 1);
        let warnings: Vec<_> = corpus
            .provenance
            .warnings
            .iter()
            .filter(|w| w.message.contains("not found among text numbers"))
            .collect();
        assert_eq!(warnings.len(), 1);
        // problem not dropped; literal 7 remains in the tree
        let p = &corpus.problems[0];
        assert_eq!(p.gold_answer().unwrap(), from_i64(15));
    }

    #[test]
    fn answer_mismatch_is_flagged_not_fatal() {
        let text = r#"[{"ID": "bad-1", "Body": "A had 8 pens. A lost 3 pens.", "Question": "How many pens now?", "Equation": "( 8.0 - 3.0 )", "Answer": 6.0, "Type": "Subtraction"}]"#;
        let corpus = ingest_str(text, SourceFormat::SvampJson, "svamp").unwrap();
        assert!(corpus
            .provenance
            .warnings
            .iter()
            .any(|w| w.message.contains("annotated answer")));
    }

    #[test]
    fn duplicate_ids_rejected() {
        let a = r#"{"ID": "p1", "Body": "A had 8 pens. A lost 3.", "Question": "How many?", "Equation": "8 - 3", "Answer": 5.0, "Type": "Subtraction"}"#;
        let text = format!("[{a},{a}]");
        assert!(matches!(
            ingest_str(&text, SourceFormat::SvampJson, "x"),
            Err(IngestError::DuplicateId(_))
        ));
    }

    #[test]
    fn native_round_trip() {
        let corpus = ingest_str(svamp_sample(), SourceFormat::SvampJson, "svamp").unwrap();
        let jsonl = write_native_jsonl(&corpus);
        let back = ingest_str(&jsonl, SourceFormat::NativeJson, "svamp").unwrap();
        assert_eq!(back.problems, corpus.problems);
    }
}
