//! Tokenization with number extraction, and body/question splitting.

use crate::number::{from_i64, parse_decimal, Num};

/// A number mentioned in problem text: its exact value and the index of its
/// token in the full token sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct NumberMention {
    pub value: Num,
    pub token_index: usize,
}

/// Closed lexicon of English number words (grade ≤ 4 scope). Larger number
/// words are left as plain words and flagged upstream.
fn number_word(word: &str) -> Option<i64> {
    Some(match word {
        "zero" => 0,
        "one" => 1,
        "two" => 2,
        "three" => 3,
        "four" => 4,
        "five" => 5,
        "six" => 6,
        "seven" => 7,
        "eight" => 8,
        "nine" => 9,
        "ten" => 10,
        "eleven" => 11,
        "twelve" => 12,
        "thirteen" => 13,
        "fourteen" => 14,
        "fifteen" => 15,
        "sixteen" => 16,
        "seventeen" => 17,
        "eighteen" => 18,
        "nineteen" => 19,
        "twenty" => 20,
        "thirty" => 30,
        "forty" => 40,
        "fifty" => 50,
        "sixty" => 60,
        "seventy" => 70,
        "eighty" => 80,
        "ninety" => 90,
        _ => return None,
    })
}

/// Lowercase and split text into word, number, and punctuation tokens,
/// extracting the ordered list of number mentions.
///
/// Numeric tokens keep decimals intact (`2.5` is one token); a period not
/// followed by a digit is sentence punctuation. Currency signs are separate
/// tokens, so `$2` tokenizes as `$`, `2` and the digit still yields a
/// mention. Number words from the closed lexicon (`zero`..`twenty`, tens up
/// to `ninety`) keep their surface form but contribute mentions.
pub fn tokenize(text: &str) -> (Vec<String>, Vec<NumberMention>) {
    let lower = text.to_lowercase();
    let chars: Vec<char> = lower.chars().collect();
    let mut tokens: Vec<String> = Vec::new();
    let mut mentions = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            let mut seen_dot = false;
            while i < chars.len() {
                match chars[i] {
                    '0'..='9' => i += 1,
                    '.' if !seen_dot
                        && i + 1 < chars.len()
                        && chars[i + 1].is_ascii_digit() =>
                    {
                        seen_dot = true;
                        i += 1;
                    }
                    ',' if i + 3 < chars.len()
                        && chars[i + 1].is_ascii_digit()
                        && chars[i + 2].is_ascii_digit()
                        && chars[i + 3].is_ascii_digit() =>
                    {
                        // thousands separator
                        i += 1;
                    }
                    _ => break,
                }
            }
            let tok: String = chars[start..i].iter().collect();
            if let Some(v) = parse_decimal(&tok) {
                mentions.push(NumberMention {
                    value: v,
                    token_index: tokens.len(),
                });
            }
            tokens.push(tok);
        } else if c.is_alphabetic() {
            let start = i;
            while i < chars.len()
                && (chars[i].is_alphanumeric() || chars[i] == '\'' || chars[i] == '-')
            {
                i += 1;
            }
            let tok: String = chars[start..i].iter().collect();
            if let Some(v) = number_word(&tok) {
                mentions.push(NumberMention {
                    value: from_i64(v),
                    token_index: tokens.len(),
                });
            }
            tokens.push(tok);
        } else {
            tokens.push(c.to_string());
            i += 1;
        }
    }
    (tokens, mentions)
}

/// Inverse of [`tokenize`] up to whitespace: join tokens with single spaces.
pub fn detokenize(tokens: &[String]) -> String {
    tokens.join(" ")
}

/// Result of [`split_body_question`].
#[derive(Debug, Clone, PartialEq)]
pub struct BodyQuestion {
    pub body: String,
    pub question: String,
    pub warnings: Vec<String>,
}

fn split_sentences(text: &str) -> Vec<String> {
    let mut sentences = Vec::new();
    let mut current = String::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        current.push(c);
        if matches!(c, '.' | '!' | '?') {
            // A period inside a decimal number is not a boundary.
            let is_decimal = c == '.'
                && i > 0
                && chars[i - 1].is_ascii_digit()
                && i + 1 < chars.len()
                && chars[i + 1].is_ascii_digit();
            if !is_decimal {
                let s = current.trim().to_string();
                if !s.is_empty() {
                    sentences.push(s);
                }
                current.clear();
            }
        }
        i += 1;
    }
    let s = current.trim().to_string();
    if !s.is_empty() {
        sentences.push(s);
    }
    sentences
}

/// Split problem text into body and question.
///
/// The question is the last sentence containing `?`; the body is everything
/// else. With no `?` anywhere the final sentence is taken as the question.
/// Sentences trailing the `?`-sentence are appended to the body with a
/// warning; single-sentence input yields an empty body and a warning.
pub fn split_body_question(text: &str) -> BodyQuestion {
    let sentences = split_sentences(text);
    let mut warnings = Vec::new();
    if sentences.is_empty() {
        return BodyQuestion {
            body: String::new(),
            question: String::new(),
            warnings: vec!["empty text".to_string()],
        };
    }
    let q_idx = sentences
        .iter()
        .rposition(|s| s.contains('?'))
        .unwrap_or_else(|| {
            warnings.push("no question mark found; using final sentence".to_string());
            sentences.len() - 1
        });
    if q_idx + 1 < sentences.len() {
        warnings.push(format!(
            "{} sentence(s) after the question moved into the body",
            sentences.len() - 1 - q_idx
        ));
    }
    let body_sents: Vec<&str> = sentences
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != q_idx)
        .map(|(_, s)| s.as_str())
        .collect();
    if body_sents.is_empty() {
        warnings.push("single-sentence input; body is empty".to_string());
    }
    BodyQuestion {
        body: body_sents.join(" "),
        question: sentences[q_idx].clone(),
        warnings,
    }
}
