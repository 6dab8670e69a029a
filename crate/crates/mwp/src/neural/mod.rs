//! Seeded, dependency-light neural baselines: a constrained order-free
//! model and an order-aware sequence-to-sequence model, both decoding
//! prefix equations with an attention decoder.

pub mod model;
pub mod snapshot;
pub mod tape;
pub mod train;

use std::collections::BTreeMap;

pub use model::{
    build_model, DecodeOutcome, EpochLog, Model, ModelConfig, Variant, Vocab,
};
pub use snapshot::{load as load_snapshot, save as save_snapshot, SnapshotError};
pub use tape::{Tape, Tensor, VarId};
pub use train::{
    batch_loss_and_grad, corpus_accuracy, flatten_params, grad_check, log_to_csv, train,
    unflatten_params, TrainError, TrainOutcome,
};

use crate::corpus::Corpus;
use crate::metrics::Prediction;

/// Greedy-decode every problem in a corpus into a prediction map suitable
/// for [`crate::metrics::execution_accuracy`].
pub fn predict_corpus(model: &Model, corpus: &Corpus) -> BTreeMap<String, Prediction> {
    corpus
        .problems
        .iter()
        .map(|p| {
            let pred = match model.predict(p) {
                DecodeOutcome::Expr(e) => Prediction::Expr(e),
                DecodeOutcome::Failure(why) => Prediction::Failure(why),
            };
            (p.id.clone(), pred)
        })
        .collect()
}
