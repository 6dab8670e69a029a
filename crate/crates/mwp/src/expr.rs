//! One-unknown arithmetic expressions.
//!
//! An [`Expr`] is a finite binary tree over exact decimal literals, slot
//! references into a problem's number list (`N0`, `N1`, ...), and the four
//! operators `+ - * /`. Expressions parse from infix strings with standard
//! precedence, evaluate exactly over rationals, and convert to prefix form.
//! Masking every number in the prefix form with `#` yields the
//! [`EquationTemplate`] used for template statistics and the majority
//! baseline.
//!
//! ```
//! use mwp::expr::{parse_infix, Expr};
//!
//! let e = parse_infix("4*10+6").unwrap();
//! assert_eq!(e.evaluate(None).unwrap(), mwp::number::from_i64(46));
//! assert_eq!(e.to_prefix_string(), "+ * 4 10 6");
//! assert_eq!(e.template().to_string(), "+ * # # #");
//! ```

use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::number::{parse_decimal, to_decimal_string, Num};

/// Binary arithmetic operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
}

impl Op {
    pub fn symbol(self) -> char {
        match self {
            Op::Add => '+',
            Op::Sub => '-',
            Op::Mul => '*',
            Op::Div => '/',
        }
    }

    pub fn from_symbol(c: char) -> Option<Op> {
        match c {
            '+' => Some(Op::Add),
            '-' => Some(Op::Sub),
            '*' => Some(Op::Mul),
            '/' => Some(Op::Div),
            _ => None,
        }
    }

    fn precedence(self) -> u8 {
        match self {
            Op::Add | Op::Sub => 1,
            Op::Mul | Op::Div => 2,
        }
    }

    /// `+` and `*` commute; used by the optional template canonicalization.
    pub fn commutes(self) -> bool {
        matches!(self, Op::Add | Op::Mul)
    }
}

/// Arithmetic expression tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Expr {
    /// Exact decimal literal.
    Literal(Num),
    /// Reference into a problem's ordered number list (0-based).
    Slot(usize),
    /// Binary operation.
    Bin {
        op: Op,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
}

/// Error from [`parse_infix`] / [`parse_prefix`], with a character offset
/// into the input.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("malformed token at offset {offset}: {text:?}")]
    MalformedToken { offset: usize, text: String },
    #[error("unbalanced parentheses at offset {offset}")]
    UnbalancedParens { offset: usize },
    #[error("empty or missing operand at offset {offset}")]
    EmptyOperand { offset: usize },
    #[error("unexpected trailing input at offset {offset}")]
    TrailingInput { offset: usize },
    #[error("empty input")]
    Empty,
}

/// Error from [`Expr::evaluate`].
#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("slot N{0} has no binding")]
    UnboundSlot(usize),
    #[error("division by zero")]
    DivisionByZero,
}

impl Expr {
    pub fn bin(op: Op, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Bin {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
    }

    pub fn literal_i64(v: i64) -> Expr {
        Expr::Literal(crate::number::from_i64(v))
    }

    /// Evaluate exactly. `bindings` supplies values for slot references.
    pub fn evaluate(&self, bindings: Option<&[Num]>) -> Result<Num, EvalError> {
        match self {
            Expr::Literal(v) => Ok(v.clone()),
            Expr::Slot(i) => bindings
                .and_then(|b| b.get(*i))
                .cloned()
                .ok_or(EvalError::UnboundSlot(*i)),
            Expr::Bin { op, lhs, rhs } => {
                let a = lhs.evaluate(bindings)?;
                let b = rhs.evaluate(bindings)?;
                match op {
                    Op::Add => Ok(a + b),
                    Op::Sub => Ok(a - b),
                    Op::Mul => Ok(a * b),
                    Op::Div => {
                        if b.is_zero() {
                            Err(EvalError::DivisionByZero)
                        } else {
                            Ok(a / b)
                        }
                    }
                }
            }
        }
    }

    /// Number of internal (operator) nodes.
    pub fn operator_count(&self) -> usize {
        match self {
            Expr::Literal(_) | Expr::Slot(_) => 0,
            Expr::Bin { lhs, rhs, .. } => 1 + lhs.operator_count() + rhs.operator_count(),
        }
    }

    /// Prefix (Polish) token sequence.
    pub fn to_prefix(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.push_prefix(&mut out);
        out
    }

    fn push_prefix(&self, out: &mut Vec<String>) {
        match self {
            Expr::Literal(v) => out.push(to_decimal_string(v, 12)),
            Expr::Slot(i) => out.push(format!("N{i}")),
            Expr::Bin { op, lhs, rhs } => {
                out.push(op.symbol().to_string());
                lhs.push_prefix(out);
                rhs.push_prefix(out);
            }
        }
    }

    /// Space-separated prefix form.
    pub fn to_prefix_string(&self) -> String {
        self.to_prefix().join(" ")
    }

    /// Infix rendering with minimal parentheses.
    pub fn render_infix(&self) -> String {
        self.render_prec(0)
    }

    fn render_prec(&self, parent: u8) -> String {
        match self {
            Expr::Literal(v) => to_decimal_string(v, 12),
            Expr::Slot(i) => format!("N{i}"),
            Expr::Bin { op, lhs, rhs } => {
                let p = op.precedence();
                // Right operand of a non-associative context needs parens at
                // equal precedence (left associativity).
                let s = format!(
                    "{} {} {}",
                    lhs.render_prec(p),
                    op.symbol(),
                    rhs.render_prec(p + 1)
                );
                if p < parent {
                    format!("( {s} )")
                } else {
                    s
                }
            }
        }
    }

    /// Number-masked prefix template. No algebraic canonicalization.
    pub fn template(&self) -> EquationTemplate {
        self.template_with(false)
    }

    /// Template with optional commutative-operand canonicalization: operands
    /// of `+` and `*` are ordered by their rendered template string. Off by
    /// default; changes distinct-template counts.
    pub fn template_with(&self, canonicalize: bool) -> EquationTemplate {
        let mut tokens = Vec::new();
        self.push_template(canonicalize, &mut tokens);
        EquationTemplate { tokens }
    }

    fn push_template(&self, canon: bool, out: &mut Vec<TemplateToken>) {
        match self {
            Expr::Literal(_) | Expr::Slot(_) => out.push(TemplateToken::Hole),
            Expr::Bin { op, lhs, rhs } => {
                out.push(TemplateToken::Op(*op));
                if canon && op.commutes() {
                    let a = lhs.template_with(true).to_string();
                    let b = rhs.template_with(true).to_string();
                    let (first, second) = if a <= b { (lhs, rhs) } else { (rhs, lhs) };
                    first.push_template(canon, out);
                    second.push_template(canon, out);
                } else {
                    lhs.push_template(canon, out);
                    rhs.push_template(canon, out);
                }
            }
        }
    }

    /// Replace every literal and slot with values drawn from `f` in
    /// pre-order position. Used by template-invariance checks.
    pub fn substitute_numbers(&self, f: &mut impl FnMut() -> Num) -> Expr {
        match self {
            Expr::Literal(_) | Expr::Slot(_) => Expr::Literal(f()),
            Expr::Bin { op, lhs, rhs } => Expr::bin(
                *op,
                lhs.substitute_numbers(f),
                rhs.substitute_numbers(f),
            ),
        }
    }

    /// Replace slot references by the bound values as literals.
    pub fn resolve_slots(&self, numbers: &[Num]) -> Result<Expr, EvalError> {
        match self {
            Expr::Literal(v) => Ok(Expr::Literal(v.clone())),
            Expr::Slot(i) => numbers
                .get(*i)
                .map(|v| Expr::Literal(v.clone()))
                .ok_or(EvalError::UnboundSlot(*i)),
            Expr::Bin { op, lhs, rhs } => Ok(Expr::bin(
                *op,
                lhs.resolve_slots(numbers)?,
                rhs.resolve_slots(numbers)?,
            )),
        }
    }
}

/// One token of an [`EquationTemplate`]: an operator or the `#` mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TemplateToken {
    Op(Op),
    Hole,
}

/// Prefix equation with every number masked by `#`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EquationTemplate {
    pub tokens: Vec<TemplateToken>,
}

impl EquationTemplate {
    pub fn operator_count(&self) -> usize {
        self.tokens
            .iter()
            .filter(|t| matches!(t, TemplateToken::Op(_)))
            .count()
    }

    pub fn hole_count(&self) -> usize {
        self.tokens.len() - self.operator_count()
    }

    /// Parse a rendered template like `+ * # # #`.
    pub fn parse(s: &str) -> Option<EquationTemplate> {
        let mut tokens = Vec::new();
        for tok in s.split_whitespace() {
            match tok {
                "#" => tokens.push(TemplateToken::Hole),
                t if t.len() == 1 => {
                    tokens.push(TemplateToken::Op(Op::from_symbol(t.chars().next()?)?))
                }
                _ => return None,
            }
        }
        if tokens.is_empty() {
            None
        } else {
            Some(EquationTemplate { tokens })
        }
    }

    /// Bind holes to slot references in textual order: the i-th `#` becomes
    /// `N{i}`. Returns `None` when the template is ill-formed or needs more
    /// slots than `available`.
    pub fn instantiate_slots(&self, available: usize) -> Option<Expr> {
        if self.hole_count() > available {
            return None;
        }
        let mut next_slot = 0usize;
        let mut iter = self.tokens.iter();
        let expr = build_from_template(&mut iter, &mut next_slot)?;
        if iter.next().is_some() {
            return None;
        }
        Some(expr)
    }
}

fn build_from_template<'a>(
    iter: &mut impl Iterator<Item = &'a TemplateToken>,
    next_slot: &mut usize,
) -> Option<Expr> {
    match iter.next()? {
        TemplateToken::Hole => {
            let e = Expr::Slot(*next_slot);
            *next_slot += 1;
            Some(e)
        }
        TemplateToken::Op(op) => {
            let lhs = build_from_template(iter, next_slot)?;
            let rhs = build_from_template(iter, next_slot)?;
            Some(Expr::bin(*op, lhs, rhs))
        }
    }
}

impl fmt::Display for EquationTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.tokens.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            match t {
                TemplateToken::Op(op) => write!(f, "{}", op.symbol())?,
                TemplateToken::Hole => f.write_str("#")?,
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(Num),
    Slot(usize),
    Op(Op),
    LParen,
    RParen,
}

fn lex(text: &str) -> Result<Vec<(Token, usize)>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        match c {
            '(' => {
                out.push((Token::LParen, i));
                i += 1;
            }
            ')' => {
                out.push((Token::RParen, i));
                i += 1;
            }
            '+' | '*' | '/' => {
                out.push((Token::Op(Op::from_symbol(c).unwrap()), i));
                i += 1;
            }
            '-' => {
                // Unary minus folds into a following numeric literal.
                let unary = matches!(
                    out.last(),
                    None | Some((Token::Op(_), _)) | Some((Token::LParen, _))
                );
                if unary && i + 1 < chars.len() && chars[i + 1].is_ascii_digit() {
                    let start = i;
                    i += 1;
                    let (num, end) = lex_number(&chars, i, start, text)?;
                    out.push((Token::Number(-num), start));
                    i = end;
                } else {
                    out.push((Token::Op(Op::Sub), i));
                    i += 1;
                }
            }
            '0'..='9' | '.' => {
                let start = i;
                let (num, end) = lex_number(&chars, i, start, text)?;
                out.push((Token::Number(num), start));
                i = end;
            }
            'N' | 'n' => {
                let start = i;
                i += 1;
                let digit_start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if i == digit_start {
                    return Err(malformed(text, start, i.max(start + 1)));
                }
                let idx: usize = chars[digit_start..i]
                    .iter()
                    .collect::<String>()
                    .parse()
                    .map_err(|_| malformed(text, start, i))?;
                out.push((Token::Slot(idx), start));
            }
            _ => {
                let mut end = i;
                while end < chars.len() && !chars[end].is_whitespace() {
                    end += 1;
                }
                return Err(malformed(text, i, end));
            }
        }
    }
    Ok(out)
}

fn lex_number(
    chars: &[char],
    mut i: usize,
    start: usize,
    text: &str,
) -> Result<(Num, usize), ParseError> {
    let num_start = i;
    let mut seen_dot = false;
    while i < chars.len() {
        match chars[i] {
            '0'..='9' => i += 1,
            '.' if !seen_dot && i + 1 < chars.len() && chars[i + 1].is_ascii_digit() => {
                seen_dot = true;
                i += 1;
            }
            _ => break,
        }
    }
    let s: String = chars[num_start..i].iter().collect();
    let num = parse_decimal(&s).ok_or_else(|| malformed(text, start, i))?;
    Ok((num, i))
}

fn malformed(text: &str, start: usize, end: usize) -> ParseError {
    ParseError::MalformedToken {
        offset: start,
        text: text
            .chars()
            .skip(start)
            .take(end.saturating_sub(start))
            .collect(),
    }
}

/// Parse an infix equation string into an [`Expr`].
///
/// Standard precedence (`*`,`/` over `+`,`-`), left associativity. Tokens
/// are decimal numbers, slot markers `N<i>`, the four operators, and
/// parentheses. An optional trailing `= <answer>` is rejected here; use
/// [`parse_equation`] when the input may carry one.
pub fn parse_infix(text: &str) -> Result<Expr, ParseError> {
    let tokens = lex(text)?;
    if tokens.is_empty() {
        return Err(ParseError::Empty);
    }
    let end_offset = text.chars().count();
    let mut pos = 0;
    let expr = parse_expr_prec(&tokens, &mut pos, 0, end_offset)?;
    if pos < tokens.len() {
        return Err(ParseError::TrailingInput {
            offset: tokens[pos].1,
        });
    }
    Ok(expr)
}

fn parse_expr_prec(
    tokens: &[(Token, usize)],
    pos: &mut usize,
    min_prec: u8,
    end_offset: usize,
) -> Result<Expr, ParseError> {
    let mut lhs = parse_primary(tokens, pos, end_offset)?;
    while let Some((Token::Op(op), _)) = tokens.get(*pos) {
        let prec = op.precedence();
        if prec < min_prec {
            break;
        }
        let op = *op;
        *pos += 1;
        let rhs = parse_expr_prec(tokens, pos, prec + 1, end_offset)?;
        lhs = Expr::bin(op, lhs, rhs);
    }
    Ok(lhs)
}

fn parse_primary(
    tokens: &[(Token, usize)],
    pos: &mut usize,
    end_offset: usize,
) -> Result<Expr, ParseError> {
    match tokens.get(*pos) {
        Some((Token::Number(v), _)) => {
            *pos += 1;
            Ok(Expr::Literal(v.clone()))
        }
        Some((Token::Slot(i), _)) => {
            *pos += 1;
            Ok(Expr::Slot(*i))
        }
        Some((Token::LParen, open_off)) => {
            *pos += 1;
            let inner = parse_expr_prec(tokens, pos, 0, end_offset)?;
            match tokens.get(*pos) {
                Some((Token::RParen, _)) => {
                    *pos += 1;
                    Ok(inner)
                }
                _ => Err(ParseError::UnbalancedParens { offset: *open_off }),
            }
        }
        Some((Token::RParen, off)) => Err(ParseError::UnbalancedParens { offset: *off }),
        Some((Token::Op(_), off)) => Err(ParseError::EmptyOperand { offset: *off }),
        None => Err(ParseError::EmptyOperand { offset: end_offset }),
    }
}

/// Parse an equation string with an optional `= <answer>` suffix.
///
/// Returns the expression and, when present, the stated answer so callers
/// can cross-check it against corpus annotations. A leading unknown like
/// `X =` (MAWPS style) is also accepted, in which case the expression is on
/// the right-hand side.
pub fn parse_equation(text: &str) -> Result<(Expr, Option<Num>), ParseError> {
    let trimmed = text.trim();
    if let Some((lhs, rhs)) = trimmed.split_once('=') {
        let lhs_t = lhs.trim();
        let rhs_t = rhs.trim();
        // "X = <expr>" form: unknown on the left.
        if lhs_t.eq_ignore_ascii_case("x") {
            return Ok((parse_infix(rhs_t)?, None));
        }
        // "<expr> = X" form.
        if rhs_t.eq_ignore_ascii_case("x") {
            return Ok((parse_infix(lhs_t)?, None));
        }
        // "<expr> = <answer>" form.
        if let Some(ans) = parse_decimal(rhs_t) {
            return Ok((parse_infix(lhs_t)?, Some(ans)));
        }
        return Ok((parse_infix(lhs_t)?, None));
    }
    Ok((parse_infix(trimmed)?, None))
}

/// Parse a space-separated prefix token sequence back into an [`Expr`].
pub fn parse_prefix(tokens: &[String]) -> Result<Expr, ParseError> {
    let mut iter = tokens.iter().enumerate();
    let expr = parse_prefix_inner(&mut iter, tokens.len())?;
    if let Some((i, _)) = iter.next() {
        return Err(ParseError::TrailingInput { offset: i });
    }
    Ok(expr)
}

fn parse_prefix_inner<'a>(
    iter: &mut impl Iterator<Item = (usize, &'a String)>,
    len: usize,
) -> Result<Expr, ParseError> {
    match iter.next() {
        None => Err(ParseError::EmptyOperand { offset: len }),
        Some((i, tok)) => {
            if tok.len() == 1 {
                if let Some(op) = Op::from_symbol(tok.chars().next().unwrap()) {
                    let lhs = parse_prefix_inner(iter, len)?;
                    let rhs = parse_prefix_inner(iter, len)?;
                    return Ok(Expr::bin(op, lhs, rhs));
                }
            }
            if let Some(rest) = tok.strip_prefix('N') {
                if let Ok(idx) = rest.parse::<usize>() {
                    return Ok(Expr::Slot(idx));
                }
            }
            parse_decimal(tok).map(Expr::Literal).ok_or_else(|| {
                ParseError::MalformedToken {
                    offset: i,
                    text: tok.clone(),
                }
            })
        }
    }
}
