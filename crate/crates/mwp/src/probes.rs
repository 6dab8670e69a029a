//! Dataset-artifact probes: question removal, Easy/Hard partitioning, and
//! attention inspection.
//!
//! The question-removal probe keeps train folds unchanged and strips the
//! question sentence from test problems only; problems a model still solves
//! are labeled Easy, the rest Hard.

use std::collections::BTreeSet;

use serde_json::json;
use sha2::{Digest, Sha256};

use crate::corpus::{detokenize, Corpus, Problem};
use crate::metrics::{fraction, EvalReport, MetricsError};
use crate::neural::Model;
use crate::number::{to_decimal_string, Num};

/// Suffix appended to a corpus name by [`remove_questions`].
pub const NOQ_SUFFIX: &str = "-noq";

/// Strip every problem down to its body tokens. Equations and answers are
/// untouched; number mentions that occurred inside the question are dropped
/// from the mention list so models cannot see them. Idempotent.
pub fn remove_questions(c: &Corpus) -> Corpus {
    let mut out = c.clone();
    if !out.name.ends_with(NOQ_SUFFIX) {
        out.name.push_str(NOQ_SUFFIX);
    }
    for p in out.problems.iter_mut() {
        let body_len = p.body.len();
        p.question.clear();
        p.numbers.retain(|m| m.token_index < body_len);
    }
    out
}

/// Split a question-removed evaluation into Easy (solved without the
/// question) and Hard (the complement) id sets.
///
/// Fails when the report does not cover exactly the corpus's problems.
pub fn easy_hard_partition(
    noq_report: &EvalReport,
    c: &Corpus,
) -> Result<(BTreeSet<String>, BTreeSet<String>), MetricsError> {
    let report_ids: BTreeSet<&str> = noq_report.results.iter().map(|r| r.id.as_str()).collect();
    let corpus_ids: BTreeSet<&str> = c.problems.iter().map(|p| p.id.as_str()).collect();
    if report_ids != corpus_ids {
        return Err(MetricsError::ReportCorpusMismatch(format!(
            "report covers {} ids, corpus has {}",
            report_ids.len(),
            corpus_ids.len()
        )));
    }
    let mut easy = BTreeSet::new();
    let mut hard = BTreeSet::new();
    for r in &noq_report.results {
        if r.correct {
            easy.insert(r.id.clone());
        } else {
            hard.insert(r.id.clone());
        }
    }
    Ok((easy, hard))
}

/// Accuracy of a full-question evaluation broken down over an Easy/Hard
/// partition, with all accuracies as exact fractions.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionReport {
    pub easy_correct: usize,
    pub easy_total: usize,
    pub hard_correct: usize,
    pub hard_total: usize,
}

impl PartitionReport {
    pub fn easy_accuracy(&self) -> Num {
        fraction(self.easy_correct, self.easy_total)
    }

    pub fn hard_accuracy(&self) -> Num {
        fraction(self.hard_correct, self.hard_total)
    }

    pub fn easy_accuracy_f64(&self) -> f64 {
        if self.easy_total == 0 {
            0.0
        } else {
            self.easy_correct as f64 / self.easy_total as f64
        }
    }

    pub fn hard_accuracy_f64(&self) -> f64 {
        if self.hard_total == 0 {
            0.0
        } else {
            self.hard_correct as f64 / self.hard_total as f64
        }
    }

    /// `|Easy|/|test| · Acc(Easy) + |Hard|/|test| · Acc(Hard)`, which equals
    /// the overall accuracy exactly.
    pub fn weighted_mean(&self) -> Num {
        let total = self.easy_total + self.hard_total;
        fraction(self.easy_total, total) * self.easy_accuracy()
            + fraction(self.hard_total, total) * self.hard_accuracy()
    }
}

/// Score a full-question report against an Easy/Hard partition.
pub fn partition_report(
    full_report: &EvalReport,
    easy: &BTreeSet<String>,
    hard: &BTreeSet<String>,
) -> Result<PartitionReport, MetricsError> {
    let mut report = PartitionReport {
        easy_correct: 0,
        easy_total: 0,
        hard_correct: 0,
        hard_total: 0,
    };
    for r in &full_report.results {
        let (correct, total) = if easy.contains(&r.id) {
            (&mut report.easy_correct, &mut report.easy_total)
        } else if hard.contains(&r.id) {
            (&mut report.hard_correct, &mut report.hard_total)
        } else {
            return Err(MetricsError::ReportCorpusMismatch(format!(
                "result id {} is in neither partition",
                r.id
            )));
        };
        *total += 1;
        if r.correct {
            *correct += 1;
        }
    }
    Ok(report)
}

/// Attention weights a model assigned while decoding one problem.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionReport {
    pub problem_id: String,
    /// Input token surfaces, one per attention column.
    pub input_tokens: Vec<String>,
    /// Emitted output tokens, one per attention row.
    pub output_tokens: Vec<String>,
    /// `rows[step][input position]`; each row sums to 1.
    pub rows: Vec<Vec<f64>>,
}

impl AttentionReport {
    /// Fraction of decode steps whose maximum weight is at least 0.9 —
    /// a high value means the decoder usually attends to a single token.
    pub fn peak_fraction(&self) -> f64 {
        if self.rows.is_empty() {
            return 0.0;
        }
        let peaked = self
            .rows
            .iter()
            .filter(|row| row.iter().cloned().fold(0.0, f64::max) >= 0.9)
            .count();
        peaked as f64 / self.rows.len() as f64
    }

    /// JSON rendering: per-step `(token, weight)` arrays plus the peak
    /// statistic.
    pub fn to_json(&self) -> serde_json::Value {
        let steps: Vec<serde_json::Value> = self
            .rows
            .iter()
            .zip(&self.output_tokens)
            .map(|(row, out_tok)| {
                let (max_i, max_w) = row
                    .iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |(bi, bw), (i, w)| {
                        if *w > bw {
                            (i, *w)
                        } else {
                            (bi, bw)
                        }
                    });
                json!({
                    "output": out_tok,
                    "weights": row
                        .iter()
                        .zip(&self.input_tokens)
                        .map(|(w, t)| json!({"token": t, "weight": w}))
                        .collect::<Vec<_>>(),
                    "max_token": self.input_tokens.get(max_i),
                    "max_weight": max_w,
                })
            })
            .collect();
        json!({
            "problem_id": self.problem_id,
            "input_tokens": self.input_tokens,
            "steps": steps,
            "peak_fraction": self.peak_fraction(),
        })
    }

    /// Plain-text heatmap: one line per decode step, one shade character
    /// per input token, with the strongest token named.
    pub fn render_text(&self) -> String {
        const SHADES: &[u8] = b" .:-=+*#%@";
        let mut out = String::new();
        out.push_str(&format!("problem {}\n", self.problem_id));
        out.push_str(&format!("input: {}\n", self.input_tokens.join(" ")));
        for (row, out_tok) in self.rows.iter().zip(&self.output_tokens) {
            let cells: String = row
                .iter()
                .map(|w| {
                    let idx = (w.clamp(0.0, 1.0) * (SHADES.len() - 1) as f64).round() as usize;
                    SHADES[idx] as char
                })
                .collect();
            let (max_i, max_w) = row
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |(bi, bw), (i, w)| {
                    if *w > bw {
                        (i, *w)
                    } else {
                        (bi, bw)
                    }
                });
            let top = self
                .input_tokens
                .get(max_i)
                .map(String::as_str)
                .unwrap_or("?");
            out.push_str(&format!(
                "{out_tok:>4} |{cells}| top: {top} ({max_w:.3})\n"
            ));
        }
        out.push_str(&format!(
            "steps with max weight >= 0.9: {:.3}\n",
            self.peak_fraction()
        ));
        out
    }
}

/// Extract per-step attention distributions for one problem.
pub fn attention_report(model: &Model, p: &Problem) -> AttentionReport {
    let (output_tokens, rows) = model.decode_surface_with_attention(p);
    AttentionReport {
        problem_id: p.id.clone(),
        input_tokens: p.tokens(),
        output_tokens,
        rows,
    }
}

/// Stable content digest of a corpus, for asserting that train shards are
/// untouched by a probe pipeline.
pub fn corpus_digest(c: &Corpus) -> String {
    let mut hasher = Sha256::new();
    for p in &c.problems {
        hasher.update(p.id.as_bytes());
        hasher.update([0]);
        hasher.update(detokenize(&p.body).as_bytes());
        hasher.update([0]);
        hasher.update(detokenize(&p.question).as_bytes());
        hasher.update([0]);
        hasher.update(p.equation.render_infix().as_bytes());
        hasher.update([0]);
        hasher.update(to_decimal_string(&p.answer, 12).as_bytes());
        hasher.update([0]);
    }
    format!("{:x}", hasher.finalize())
}
