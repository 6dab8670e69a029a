//! Source-format readers: ASDiv XML, MAWPS JSON, SVAMP JSON, and the native
//! line-delimited JSON written by this crate.

use quick_xml::events::Event;
use quick_xml::Reader;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{IngestError, Problem, RawRecord};
use crate::corpus::detokenize;
use crate::number::to_decimal_string;

/// ASDiv corpus file: `<Problem ID=.. Grade=..>` elements with `Body`,
/// `Question`, `Solution-Type`, `Answer`, and `Formula` children.
pub fn read_asdiv_xml(text: &str) -> Result<Vec<RawRecord>, IngestError> {
    let mut reader = Reader::from_str(text);
    reader.config_mut().trim_text(true);
    let mut records = Vec::new();
    let mut current: Option<RawRecord> = None;
    let mut element_stack: Vec<String> = Vec::new();
    let mut buf = Vec::new();
    loop {
        match reader
            .read_event_into(&mut buf)
            .map_err(|e| IngestError::Xml(e.to_string()))?
        {
            Event::Start(e) => {
                let name = String::from_utf8_lossy(e.name().as_ref()).into_owned();
                if name == "Problem" {
                    let mut rec = RawRecord {
                        id: String::new(),
                        body: String::new(),
                        question: None,
                        equation: String::new(),
                        answer: String::new(),
                        grade: None,
                        ptype: None,
                        variation_chain: Vec::new(),
                        seed_id: None,
                    };
                    for attr in e.attributes().flatten() {
                        let key = String::from_utf8_lossy(attr.key.as_ref()).into_owned();
                        let val = String::from_utf8_lossy(&attr.value).into_owned();
                        match key.as_str() {
                            "ID" => rec.id = val,
                            "Grade" => rec.grade = val.parse().ok(),
                            _ => {}
                        }
                    }
                    current = Some(rec);
                }
                element_stack.push(name);
            }
            Event::Text(t) => {
                if let Some(rec) = current.as_mut() {
                    let content = t
                        .unescape()
                        .map_err(|e| IngestError::Xml(e.to_string()))?
                        .into_owned();
                    match element_stack.last().map(|s| s.as_str()) {
                        Some("Body") => rec.body = content,
                        Some("Question") => rec.question = Some(content),
                        Some("Formula") => rec.equation = content,
                        Some("Answer") => rec.answer = strip_answer_unit(&content),
                        Some("Solution-Type") => rec.ptype = Some(content),
                        _ => {}
                    }
                }
            }
            Event::End(e) => {
                element_stack.pop();
                if e.name().as_ref() == b"Problem" {
                    if let Some(rec) = current.take() {
                        records.push(rec);
                    }
                }
            }
            Event::Eof => break,
            _ => {}
        }
        buf.clear();
    }
    Ok(records)
}

/// ASDiv answers look like `7 (seashells)`; keep only the leading number.
fn strip_answer_unit(s: &str) -> String {
    s.split_whitespace()
        .next()
        .unwrap_or(s)
        .trim()
        .to_string()
}

/// MAWPS records: `sQuestion` (full text), `lEquations` (usually `X=(...)`),
/// `lSolutions`, and an `iIndex` identifier.
pub fn read_mawps_json(text: &str) -> Result<Vec<RawRecord>, IngestError> {
    let items: Vec<Value> = serde_json::from_str(text)?;
    let mut out = Vec::new();
    let mut failures = Vec::new();
    for (i, item) in items.iter().enumerate() {
        let id = item
            .get("iIndex")
            .map(|v| format!("mawps-{v}"))
            .unwrap_or_else(|| format!("mawps-{i}"));
        let text = item.get("sQuestion").and_then(Value::as_str);
        let equation = item
            .get("lEquations")
            .and_then(Value::as_array)
            .and_then(|a| a.first())
            .and_then(Value::as_str);
        let solution = item
            .get("lSolutions")
            .and_then(Value::as_array)
            .and_then(|a| a.first())
            .map(json_number_string);
        match (text, equation, solution) {
            (Some(text), Some(eq), Some(ans)) => out.push(RawRecord {
                id,
                body: text.to_string(),
                question: None,
                equation: eq.to_string(),
                answer: ans,
                grade: None,
                ptype: None,
                variation_chain: Vec::new(),
                seed_id: None,
            }),
            _ => failures.push(format!("{id}: missing sQuestion/lEquations/lSolutions")),
        }
    }
    if !failures.is_empty() {
        return Err(IngestError::Schema {
            count: failures.len(),
            examples: failures.into_iter().take(5).collect(),
        });
    }
    Ok(out)
}

/// SVAMP-style records: `ID`, `Body`, `Question`, `Equation`, `Answer`,
/// `Type`. Optional `Chain` and `SeedID` fields carry variation metadata.
pub fn read_svamp_json(text: &str) -> Result<Vec<RawRecord>, IngestError> {
    let items: Vec<Value> = serde_json::from_str(text)?;
    let mut out = Vec::new();
    let mut failures = Vec::new();
    for (i, item) in items.iter().enumerate() {
        let id = item
            .get("ID")
            .map(json_number_string)
            .unwrap_or_else(|| format!("svamp-{i}"));
        let body = item.get("Body").and_then(Value::as_str);
        let question = item.get("Question").and_then(Value::as_str);
        let equation = item.get("Equation").and_then(Value::as_str);
        let answer = item.get("Answer").map(json_number_string);
        match (body, question, equation, answer) {
            (Some(body), Some(question), Some(eq), Some(ans)) => out.push(RawRecord {
                id,
                body: body.to_string(),
                question: Some(question.to_string()),
                equation: eq.to_string(),
                answer: ans,
                grade: None,
                ptype: item
                    .get("Type")
                    .and_then(Value::as_str)
                    .map(str::to_string),
                variation_chain: item
                    .get("Chain")
                    .and_then(Value::as_array)
                    .map(|a| {
                        a.iter()
                            .filter_map(Value::as_str)
                            .map(str::to_string)
                            .collect()
                    })
                    .unwrap_or_default(),
                seed_id: item
                    .get("SeedID")
                    .map(json_number_string),
            }),
            _ => failures.push(format!("{id}: missing Body/Question/Equation/Answer")),
        }
    }
    if !failures.is_empty() {
        return Err(IngestError::Schema {
            count: failures.len(),
            examples: failures.into_iter().take(5).collect(),
        });
    }
    Ok(out)
}

fn json_number_string(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// One line of the native line-delimited JSON format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NativeRecord {
    pub id: String,
    pub body: String,
    pub question: String,
    pub equation: String,
    pub answer: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grade: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ptype: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub variation_chain: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed_id: Option<String>,
}

impl NativeRecord {
    pub fn from_problem(p: &Problem) -> NativeRecord {
        NativeRecord {
            id: p.id.clone(),
            body: detokenize(&p.body),
            question: detokenize(&p.question),
            equation: p.equation.render_infix(),
            answer: to_decimal_string(&p.answer, 12),
            grade: p.grade,
            ptype: p.ptype.clone(),
            variation_chain: p.variation_chain.clone(),
            seed_id: p.seed_id.clone(),
        }
    }
}

/// Native format: one JSON object per line, UTF-8.
pub fn read_native_jsonl(text: &str) -> Result<Vec<RawRecord>, IngestError> {
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let rec: NativeRecord = serde_json::from_str(line)?;
        out.push(RawRecord {
            id: rec.id,
            body: rec.body,
            question: Some(rec.question),
            equation: rec.equation,
            answer: rec.answer,
            grade: rec.grade,
            ptype: rec.ptype,
            variation_chain: rec.variation_chain,
            seed_id: rec.seed_id,
        });
    }
    Ok(out)
}
