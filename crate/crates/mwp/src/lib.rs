//! Tools for measuring how exploitable math-word-problem corpora are by
//! shallow heuristics, and for generating new challenge problems from
//! slot-tagged variation templates.
//!
//! The crate is organized around a small set of building blocks:
//!
//! - [`expr`] — one-unknown arithmetic expressions: parsing, exact
//!   evaluation, prefix form, and number-masked equation templates.
//! - [`corpus`] — readers for common MWP corpus formats, tokenization with
//!   number extraction, body/question splitting, and cross-validation folds.
//! - [`metrics`] — execution accuracy, template statistics, lexical
//!   diversity, subset breakdowns, and ablation deltas.
//! - [`probes`] — question-removal evaluation, Easy/Hard partitioning, and
//!   attention-weight reports.
//! - [`neural`] — from-scratch trainable baselines (a word-order-free
//!   constrained model and a recurrent attention seq2seq) over a minimal
//!   reverse-mode autodiff tape.
//! - [`genesis`] — the variation-template grammar: parsing, validation, and
//!   seeded large-scale instantiation into new problems.
//!
//! The `mwp` binary exposes all of this as subcommands; see the book under
//! `book/` for a guided tour.

pub mod corpus;
pub mod expr;
pub mod genesis;
pub mod metrics;
pub mod neural;
pub mod number;
pub mod probes;

pub mod cli;

#[cfg(doctest)]
mod book;
