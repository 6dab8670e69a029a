//! Variation-template grammar: parse, validate, and instantiate annotated
//! problem templates at scale.
//!
//! A template is a body and question with embedded tags (`[NUM1]`,
//! `[NAME1]`, `[OBJs1]`/`[OBJp1]`, `[MOD1]`) plus an equation over the
//! `[NUMx]` tags. Instantiation binds every tag consistently from a
//! lexicon, samples numbers under answer constraints by rejection, and
//! emits fully validated problems.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::corpus::{ingest_str, Corpus, IngestError, SourceFormat};
use crate::expr::{parse_infix, Expr, Op};
use crate::number::Num;

/// Tag kinds of the annotation grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum TagKind {
    Num,
    Name,
    /// Object, singular surface form.
    ObjSingular,
    /// Object, plural surface form.
    ObjPlural,
    Mod,
}

impl TagKind {
    fn label(self) -> &'static str {
        match self {
            TagKind::Num => "NUM",
            TagKind::Name => "NAME",
            TagKind::ObjSingular => "OBJs",
            TagKind::ObjPlural => "OBJp",
            TagKind::Mod => "MOD",
        }
    }

    fn from_label(s: &str) -> Option<TagKind> {
        match s {
            "NUM" => Some(TagKind::Num),
            "NAME" => Some(TagKind::Name),
            "OBJs" => Some(TagKind::ObjSingular),
            "OBJp" => Some(TagKind::ObjPlural),
            "MOD" => Some(TagKind::Mod),
            _ => None,
        }
    }
}

/// One tag occurrence, e.g. `[OBJp2]` is kind `ObjPlural`, index 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Tag {
    pub kind: TagKind,
    pub index: usize,
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}{}]", self.kind.label(), self.index)
    }
}

/// The nine variation types, grouped under their three categories.
pub const VARIATION_TYPES: [(&str, &str); 9] = [
    ("Question Sensitivity", "Same Object, Different Structure"),
    ("Question Sensitivity", "Different Object, Same Structure"),
    ("Question Sensitivity", "Different Object, Different Structure"),
    ("Reasoning Ability", "Add relevant information"),
    ("Reasoning Ability", "Change information"),
    ("Reasoning Ability", "Invert operation"),
    ("Structural Invariance", "Add irrelevant information"),
    ("Structural Invariance", "Change order of objects"),
    ("Structural Invariance", "Change order of phrases"),
];

/// Category of a variation-type label, matched case-insensitively.
pub fn variation_category(label: &str) -> Option<&'static str> {
    let needle = label.trim().to_lowercase();
    VARIATION_TYPES
        .iter()
        .find(|(_, t)| t.to_lowercase() == needle)
        .map(|(c, _)| *c)
}

/// Split a comma-separated chain annotation. Several taxonomy labels
/// contain commas themselves ("Same Object, Different Structure"), so
/// adjacent pieces are re-joined whenever the combination is a known
/// label; semicolons always separate.
pub fn split_chain(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for part in text.split(';') {
        let pieces: Vec<&str> = part.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
        let mut i = 0;
        while i < pieces.len() {
            if i + 1 < pieces.len() {
                let joined = format!("{}, {}", pieces[i], pieces[i + 1]);
                if variation_category(&joined).is_some() {
                    out.push(joined);
                    i += 2;
                    continue;
                }
            }
            out.push(pieces[i].to_string());
            i += 1;
        }
    }
    out
}

#[derive(Debug, Error)]
pub enum TemplateError {
    #[error("template {template}: malformed tag {tag}")]
    MalformedTag { template: String, tag: String },
    #[error("template {template}: equation uses non-NUM tag {tag}")]
    NonNumInEquation { template: String, tag: String },
    #[error("template {template}: equation references [NUM{index}] absent from body and question")]
    EquationTagMissing { template: String, index: usize },
    #[error("template {template}: [NUM{index}] must appear exactly once in the text")]
    DuplicateNumTag { template: String, index: usize },
    #[error("template {template}: equation does not parse: {message}")]
    EquationParse { template: String, message: String },
    #[error("template {template}: missing required section {section}")]
    MissingSection { template: String, section: String },
    #[error("template file line {line}: unknown section {section:?}")]
    UnknownSection { line: usize, section: String },
    #[error("template file is empty")]
    Empty,
}

/// A parsed variation template.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationTemplate {
    pub id: String,
    /// Body text with embedded tags.
    pub body: String,
    /// Question text with embedded tags.
    pub question: String,
    /// Equation text over `[NUMx]` tags, as authored.
    pub equation_text: String,
    /// Variation labels, ordered latest-applied first.
    pub chain: Vec<String>,
    pub seed_id: Option<String>,
    /// All tags used in body and question.
    pub tags: BTreeSet<Tag>,
    /// NUM indices in textual order (body first, then question).
    pub num_order: Vec<usize>,
    /// Equation with slots referring to positions in `num_order`.
    pub equation: Expr,
}

/// Scan a text for tags; any bracketed token that is not a well-formed tag
/// is an error.
fn scan_tags(template: &str, text: &str) -> Result<Vec<Tag>, TemplateError> {
    let mut tags = Vec::new();
    let mut rest = text;
    while let Some(open) = rest.find('[') {
        let after = &rest[open + 1..];
        let close = after.find(']').ok_or_else(|| TemplateError::MalformedTag {
            template: template.to_string(),
            tag: rest[open..].chars().take(12).collect(),
        })?;
        let inner = &after[..close];
        let split = inner
            .find(|c: char| c.is_ascii_digit())
            .unwrap_or(inner.len());
        let (label, digits) = inner.split_at(split);
        let parsed = TagKind::from_label(label).and_then(|kind| {
            let index: usize = digits.parse().ok()?;
            if index == 0 {
                return None;
            }
            Some(Tag { kind, index })
        });
        match parsed {
            Some(tag) => tags.push(tag),
            None => {
                return Err(TemplateError::MalformedTag {
                    template: template.to_string(),
                    tag: format!("[{inner}]"),
                })
            }
        }
        rest = &after[close + 1..];
    }
    Ok(tags)
}

/// Parse one template from its sections.
pub fn parse_template(
    id: &str,
    body: &str,
    question: &str,
    equation: &str,
    chain: Vec<String>,
    seed_id: Option<String>,
) -> Result<VariationTemplate, TemplateError> {
    let body_tags = scan_tags(id, body)?;
    let question_tags = scan_tags(id, question)?;
    let mut tags = BTreeSet::new();
    let mut num_order = Vec::new();
    let mut num_counts: BTreeMap<usize, usize> = BTreeMap::new();
    for tag in body_tags.iter().chain(&question_tags) {
        tags.insert(*tag);
        if tag.kind == TagKind::Num {
            *num_counts.entry(tag.index).or_insert(0) += 1;
            if !num_order.contains(&tag.index) {
                num_order.push(tag.index);
            }
        }
    }
    for (index, count) in &num_counts {
        if *count != 1 {
            return Err(TemplateError::DuplicateNumTag {
                template: id.to_string(),
                index: *index,
            });
        }
    }
    // rewrite [NUMx] to slot tokens over the textual mention order
    let eq_tags = scan_tags(id, equation)?;
    let mut eq_text = equation.to_string();
    for tag in &eq_tags {
        if tag.kind != TagKind::Num {
            return Err(TemplateError::NonNumInEquation {
                template: id.to_string(),
                tag: tag.to_string(),
            });
        }
        let slot = num_order.iter().position(|i| *i == tag.index).ok_or(
            TemplateError::EquationTagMissing {
                template: id.to_string(),
                index: tag.index,
            },
        )?;
        eq_text = eq_text.replace(&tag.to_string(), &format!("N{slot}"));
    }
    let parsed = parse_infix(&eq_text).map_err(|e| TemplateError::EquationParse {
        template: id.to_string(),
        message: e.to_string(),
    })?;
    Ok(VariationTemplate {
        id: id.to_string(),
        body: body.to_string(),
        question: question.to_string(),
        equation_text: equation.to_string(),
        chain,
        seed_id,
        tags,
        num_order,
        equation: parsed,
    })
}

/// Parse a template file: `ID:`, `BODY:`, `QUESTION:`, `EQUATION:`,
/// `CHAIN:`, `SEED_ID:` sections, one template per `---`-separated block.
/// Lines starting with `#` are comments.
pub fn parse_template_file(
    text: &str,
    default_prefix: &str,
) -> Result<Vec<VariationTemplate>, TemplateError> {
    let mut templates = Vec::new();
    let mut sections: BTreeMap<String, String> = BTreeMap::new();
    let flush = |sections: &mut BTreeMap<String, String>,
                     ordinal: usize|
     -> Result<Option<VariationTemplate>, TemplateError> {
        if sections.is_empty() {
            return Ok(None);
        }
        let id = sections
            .get("ID")
            .cloned()
            .unwrap_or_else(|| format!("{default_prefix}-{ordinal}"));
        let require = |key: &str| {
            sections
                .get(key)
                .cloned()
                .ok_or_else(|| TemplateError::MissingSection {
                    template: id.clone(),
                    section: key.to_string(),
                })
        };
        let body = require("BODY")?;
        let question = require("QUESTION")?;
        let equation = require("EQUATION")?;
        let chain = sections
            .get("CHAIN")
            .map(|c| split_chain(c))
            .unwrap_or_default();
        let seed_id = sections.get("SEED_ID").cloned();
        sections.clear();
        parse_template(&id, &body, &question, &equation, chain, seed_id).map(Some)
    };
    for (lineno, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if trimmed == "---" {
            if let Some(t) = flush(&mut sections, templates.len() + 1)? {
                templates.push(t);
            }
            continue;
        }
        match trimmed.split_once(':') {
            Some((key, value))
                if matches!(
                    key.trim(),
                    "ID" | "BODY" | "QUESTION" | "EQUATION" | "CHAIN" | "SEED_ID"
                ) =>
            {
                sections.insert(key.trim().to_string(), value.trim().to_string());
            }
            _ => {
                return Err(TemplateError::UnknownSection {
                    line: lineno + 1,
                    section: trimmed.chars().take(24).collect(),
                })
            }
        }
    }
    if let Some(t) = flush(&mut sections, templates.len() + 1)? {
        templates.push(t);
    }
    if templates.is_empty() {
        return Err(TemplateError::Empty);
    }
    Ok(templates)
}

/// Inclusive integer sampling range for a `[NUMx]` tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NumRange {
    pub min: i64,
    pub max: i64,
}

impl Default for NumRange {
    /// Small-integer default: 2 through 99.
    fn default() -> NumRange {
        NumRange { min: 2, max: 99 }
    }
}

/// One lexicon entry; the JSON shape decides the kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LexEntry {
    /// Name or modifier candidates: `["Beth", "Tom"]`.
    Words(Vec<String>),
    /// Object candidates as (singular, plural): `[["crayon", "crayons"]]`.
    Objects(Vec<(String, String)>),
    /// NUM sampling range: `{"min": 2, "max": 99}`.
    Range(NumRange),
}

/// Surface-form candidates keyed by tag, e.g. `"NAME1"`, `"OBJ1"`,
/// `"MOD1"`, `"NUM1"`. `"NUM*"` sets the default range for all NUM tags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Lexicon {
    pub entries: BTreeMap<String, LexEntry>,
}

impl Lexicon {
    pub fn from_json_str(text: &str) -> Result<Lexicon, serde_json::Error> {
        serde_json::from_str(text)
    }

    fn words(&self, key: &str) -> Option<&[String]> {
        match self.entries.get(key) {
            Some(LexEntry::Words(w)) if !w.is_empty() => Some(w),
            _ => None,
        }
    }

    pub fn names(&self, index: usize) -> Option<&[String]> {
        self.words(&format!("NAME{index}"))
    }

    pub fn modifiers(&self, index: usize) -> Option<&[String]> {
        self.words(&format!("MOD{index}"))
    }

    pub fn objects(&self, index: usize) -> Option<&[(String, String)]> {
        match self.entries.get(&format!("OBJ{index}")) {
            Some(LexEntry::Objects(o)) if !o.is_empty() => Some(o),
            _ => None,
        }
    }

    /// Range for `[NUMx]`: per-index entry, then `"NUM*"`, then default.
    pub fn num_range(&self, index: usize) -> NumRange {
        for key in [format!("NUM{index}"), "NUM*".to_string()] {
            if let Some(LexEntry::Range(r)) = self.entries.get(&key) {
                return *r;
            }
        }
        NumRange::default()
    }
}

/// Check a template against the taxonomy and a lexicon. Diagnostics are
/// values, not errors.
pub fn validate_template(t: &VariationTemplate, lex: &Lexicon) -> Vec<String> {
    let mut diags = Vec::new();
    // contiguous index use per tag family
    let mut indices: BTreeMap<&str, BTreeSet<usize>> = BTreeMap::new();
    for tag in &t.tags {
        let family = match tag.kind {
            TagKind::ObjSingular | TagKind::ObjPlural => "OBJ",
            other => other.label(),
        };
        indices.entry(family).or_default().insert(tag.index);
    }
    for (family, used) in &indices {
        let max = *used.iter().max().expect("non-empty set");
        for i in 1..=max {
            if !used.contains(&i) {
                diags.push(format!("{family} indices skip {i} (highest used is {max})"));
            }
        }
    }
    // lexicon coverage
    for tag in &t.tags {
        let ok = match tag.kind {
            TagKind::Name => lex.names(tag.index).is_some(),
            TagKind::Mod => lex.modifiers(tag.index).is_some(),
            TagKind::ObjSingular | TagKind::ObjPlural => lex.objects(tag.index).is_some(),
            TagKind::Num => {
                let r = lex.num_range(tag.index);
                if r.min > r.max {
                    diags.push(format!("empty NUM{} range {}..{}", tag.index, r.min, r.max));
                }
                true
            }
        };
        if !ok {
            diags.push(format!("lexicon has no entry for {tag}"));
        }
    }
    // chain labels must belong to the taxonomy
    for label in &t.chain {
        if variation_category(label).is_none() {
            diags.push(format!("unknown variation type {label:?}"));
        }
    }
    if t.equation.operator_count() > 2 {
        diags.push(format!(
            "equation has {} operators (the generator caps at 2)",
            t.equation.operator_count()
        ));
    }
    if t.body.chars().any(|c| c.is_ascii_digit()) && scan_tags(&t.id, &t.body).is_ok() {
        // digits outside tags would desynchronize slot/mention alignment
        let outside = strip_tags(&t.body).chars().any(|c| c.is_ascii_digit());
        if outside || strip_tags(&t.question).chars().any(|c| c.is_ascii_digit()) {
            diags.push("raw digits in text; numbers must come from [NUMx] tags".to_string());
        }
    }
    diags
}

fn strip_tags(text: &str) -> String {
    let mut out = String::new();
    let mut rest = text;
    while let Some(open) = rest.find('[') {
        out.push_str(&rest[..open]);
        match rest[open..].find(']') {
            Some(close) => rest = &rest[open + close + 1..],
            None => {
                rest = "";
            }
        }
    }
    out.push_str(rest);
    out
}

/// Instantiation constraints; all default on.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraints {
    /// Final answer must be strictly positive.
    pub positive_answer: bool,
    /// Every division must come out integral.
    pub integral_division: bool,
    /// Every intermediate value must be strictly positive.
    pub positive_intermediates: bool,
    /// Rejection-sampling budget per instantiation.
    pub max_attempts: usize,
}

impl Default for Constraints {
    fn default() -> Constraints {
        Constraints {
            positive_answer: true,
            integral_division: true,
            positive_intermediates: true,
            max_attempts: 1000,
        }
    }
}

#[derive(Debug, Error)]
pub enum GenError {
    #[error("template {template}: no constraint-satisfying sample in {attempts} attempts (last violated: {violated})")]
    Unsatisfiable {
        template: String,
        attempts: usize,
        violated: String,
    },
    #[error("template {template}: {tag} has no lexicon entry")]
    MissingLexicon { template: String, tag: String },
    #[error("template {template}: equation has {count} operators, cap is 2")]
    OperatorCap { template: String, count: usize },
    #[error("generated corpus failed ingest validation: {0}")]
    Ingest(#[from] IngestError),
}

/// Evaluate bottom-up, checking constraints at every node. Returns the
/// value or the name of the violated constraint.
fn eval_constrained(e: &Expr, values: &[Num], c: &Constraints) -> Result<Num, &'static str> {
    match e {
        Expr::Literal(v) => Ok(v.clone()),
        Expr::Slot(i) => Ok(values[*i].clone()),
        Expr::Bin { op, lhs, rhs } => {
            let l = eval_constrained(lhs, values, c)?;
            let r = eval_constrained(rhs, values, c)?;
            let v = match op {
                Op::Add => l + r,
                Op::Sub => l - r,
                Op::Mul => l * r,
                Op::Div => {
                    if r.is_zero() {
                        return Err("division by zero");
                    }
                    let q = l / r;
                    if c.integral_division && !q.is_integer() {
                        return Err("integral division");
                    }
                    q
                }
            };
            if c.positive_intermediates && !v.is_positive() {
                return Err("positive intermediates");
            }
            Ok(v)
        }
    }
}

/// Instantiate a template once. Deterministic in `seed`.
pub fn instantiate(
    t: &VariationTemplate,
    lex: &Lexicon,
    constraints: &Constraints,
    seed: u64,
) -> Result<crate::corpus::Problem, GenError> {
    let record = instantiate_record(t, lex, constraints, seed, &t.id)?;
    let line = serde_json::to_string(&record).expect("record serializes");
    let corpus = ingest_str(&line, SourceFormat::NativeJson, &t.id)?;
    Ok(corpus.problems.into_iter().next().expect("one problem"))
}

#[derive(Serialize)]
struct GeneratedRecord {
    id: String,
    body: String,
    question: String,
    equation: String,
    answer: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    variation_chain: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed_id: Option<String>,
}

fn instantiate_record(
    t: &VariationTemplate,
    lex: &Lexicon,
    constraints: &Constraints,
    seed: u64,
    id: &str,
) -> Result<GeneratedRecord, GenError> {
    if t.equation.operator_count() > 2 {
        return Err(GenError::OperatorCap {
            template: t.id.clone(),
            count: t.equation.operator_count(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // bind every non-NUM tag index once, in sorted tag order
    let mut surfaces: BTreeMap<Tag, String> = BTreeMap::new();
    let mut object_pairs: BTreeMap<usize, (String, String)> = BTreeMap::new();
    let missing = |tag: &Tag| GenError::MissingLexicon {
        template: t.id.clone(),
        tag: tag.to_string(),
    };
    for tag in &t.tags {
        match tag.kind {
            TagKind::Num => {}
            TagKind::Name => {
                let pool = lex.names(tag.index).ok_or_else(|| missing(tag))?;
                surfaces.insert(*tag, pool[rng.gen_range(0..pool.len())].clone());
            }
            TagKind::Mod => {
                let pool = lex.modifiers(tag.index).ok_or_else(|| missing(tag))?;
                surfaces.insert(*tag, pool[rng.gen_range(0..pool.len())].clone());
            }
            TagKind::ObjSingular | TagKind::ObjPlural => {
                if !object_pairs.contains_key(&tag.index) {
                    let pool = lex.objects(tag.index).ok_or_else(|| missing(tag))?;
                    object_pairs
                        .insert(tag.index, pool[rng.gen_range(0..pool.len())].clone());
                }
            }
        }
    }
    for (index, (singular, plural)) in &object_pairs {
        surfaces.insert(
            Tag {
                kind: TagKind::ObjSingular,
                index: *index,
            },
            singular.clone(),
        );
        surfaces.insert(
            Tag {
                kind: TagKind::ObjPlural,
                index: *index,
            },
            plural.clone(),
        );
    }
    // rejection-sample NUM values over the textual mention order
    let mut last_violation = "empty NUM range";
    let mut chosen: Option<Vec<i64>> = None;
    'attempts: for _ in 0..constraints.max_attempts {
        let mut values = Vec::with_capacity(t.num_order.len());
        for index in &t.num_order {
            let r = lex.num_range(*index);
            if r.min > r.max {
                last_violation = "empty NUM range";
                continue 'attempts;
            }
            values.push(rng.gen_range(r.min..=r.max));
        }
        let nums: Vec<Num> = values.iter().map(|v| Num::from_integer((*v).into())).collect();
        match eval_constrained(&t.equation, &nums, constraints) {
            Ok(answer) => {
                if constraints.positive_answer && !answer.is_positive() {
                    last_violation = "positive answer";
                    continue;
                }
                chosen = Some(values);
                break;
            }
            Err(violated) => {
                last_violation = violated;
            }
        }
    }
    let values = chosen.ok_or_else(|| GenError::Unsatisfiable {
        template: t.id.clone(),
        attempts: constraints.max_attempts,
        violated: last_violation.to_string(),
    })?;
    let nums: Vec<Num> = values.iter().map(|v| Num::from_integer((*v).into())).collect();
    let answer = eval_constrained(&t.equation, &nums, constraints).expect("sample satisfied");
    let render = |text: &str| {
        let mut out = text.to_string();
        for (tag, surface) in &surfaces {
            out = out.replace(&tag.to_string(), surface);
        }
        for (pos, index) in t.num_order.iter().enumerate() {
            out = out.replace(
                &Tag {
                    kind: TagKind::Num,
                    index: *index,
                }
                .to_string(),
                &values[pos].to_string(),
            );
        }
        out
    };
    Ok(GeneratedRecord {
        id: id.to_string(),
        body: render(&t.body),
        question: render(&t.question),
        equation: t.equation.render_infix(),
        answer: crate::number::to_decimal_string(&answer, 12),
        variation_chain: t.chain.clone(),
        seed_id: Some(t.seed_id.clone().unwrap_or_else(|| t.id.clone())),
    })
}

/// One failed instantiation in a generation run.
#[derive(Debug)]
pub struct GenFailure {
    pub template_id: String,
    pub error: GenError,
}

/// Seed for instance `k` of a template: a hash of the master seed and the
/// template id.
pub fn derive_seed(master: u64, template_id: &str, k: usize) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(master.to_le_bytes());
    hasher.update(template_id.as_bytes());
    hasher.update((k as u64).to_le_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}

/// Generate `per_template` problems from each template. Failures are
/// collected per template; generation continues past them.
pub fn generate(
    templates: &[VariationTemplate],
    lex: &Lexicon,
    per_template: usize,
    master_seed: u64,
    constraints: &Constraints,
) -> Result<(Corpus, Vec<GenFailure>), IngestError> {
    let mut lines = String::new();
    let mut failures = Vec::new();
    for t in templates {
        for k in 0..per_template {
            let id = format!("{}-{}", t.id, k);
            let seed = derive_seed(master_seed, &t.id, k);
            match instantiate_record(t, lex, constraints, seed, &id) {
                Ok(record) => {
                    lines.push_str(&serde_json::to_string(&record).expect("record serializes"));
                    lines.push('\n');
                }
                Err(error) => failures.push(GenFailure {
                    template_id: t.id.clone(),
                    error,
                }),
            }
        }
    }
    let corpus = if lines.is_empty() {
        Corpus {
            name: "generated".into(),
            problems: Vec::new(),
            provenance: Default::default(),
        }
    } else {
        ingest_str(&lines, SourceFormat::NativeJson, "generated")?
    };
    Ok((corpus, failures))
}
