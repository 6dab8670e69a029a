//! Training: teacher-forced cross-entropy, Adam, global-norm gradient
//! clipping, and best-validation snapshotting. Also hosts the
//! finite-difference gradient checker.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::model::{build_model, EpochLog, Forward, Model, ModelConfig, Vocab};
use crate::corpus::Corpus;
use crate::number::within_tolerance;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("training loss became non-finite at epoch {epoch}, batch {batch}")]
    NanLoss { epoch: usize, batch: usize },
    #[error("no training example has an equation expressible over the output vocabulary")]
    NoTrainableExamples,
    #[error("bad model configuration: {0}")]
    BadConfig(String),
}

/// Result of a training run: the best-validation model plus its history.
#[derive(Debug)]
pub struct TrainOutcome {
    pub model: Model,
    pub best_epoch: usize,
    pub best_val_accuracy: f64,
}

const CLIP_NORM: f64 = 5.0;
const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

struct Adam {
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    t: u64,
}

impl Adam {
    fn new(model: &Model) -> Adam {
        let shapes: Vec<usize> = model.params.entries.iter().map(|(_, t)| t.len()).collect();
        Adam {
            m: shapes.iter().map(|n| vec![0.0; *n]).collect(),
            v: shapes.iter().map(|n| vec![0.0; *n]).collect(),
            t: 0,
        }
    }

    fn step(&mut self, model: &mut Model, grads: &[Vec<f64>], lr: f64) {
        self.t += 1;
        let bc1 = 1.0 - ADAM_BETA1.powi(self.t as i32);
        let bc2 = 1.0 - ADAM_BETA2.powi(self.t as i32);
        for (p, ((m, v), g)) in self
            .m
            .iter_mut()
            .zip(self.v.iter_mut())
            .zip(grads)
            .enumerate()
        {
            let theta = &mut model.params.entries[p].1.data;
            for i in 0..g.len() {
                m[i] = ADAM_BETA1 * m[i] + (1.0 - ADAM_BETA1) * g[i];
                v[i] = ADAM_BETA2 * v[i] + (1.0 - ADAM_BETA2) * g[i] * g[i];
                let mhat = m[i] / bc1;
                let vhat = v[i] / bc2;
                theta[i] -= lr * mhat / (vhat.sqrt() + ADAM_EPS);
            }
        }
    }
}

/// Accumulate tape-leaf gradients into per-parameter buffers.
pub(crate) fn gather_grads(
    model: &Model,
    fwd: &Forward<'_>,
    node_grads: &[super::tape::Tensor],
    buffers: &mut [Vec<f64>],
) {
    for binding in &fwd.bindings {
        let g = &node_grads[binding.var].data;
        match binding.row {
            None => {
                for (o, x) in buffers[binding.param].iter_mut().zip(g) {
                    *o += x;
                }
            }
            Some(r) => {
                let cols = model.params.entries[binding.param].1.cols;
                let dst = &mut buffers[binding.param][r * cols..(r + 1) * cols];
                for (o, x) in dst.iter_mut().zip(g) {
                    *o += x;
                }
            }
        }
    }
}

fn clip_global_norm(buffers: &mut [Vec<f64>], max_norm: f64) -> f64 {
    let norm: f64 = buffers
        .iter()
        .flat_map(|b| b.iter())
        .map(|g| g * g)
        .sum::<f64>()
        .sqrt();
    if norm > max_norm {
        let scale = max_norm / norm;
        for b in buffers.iter_mut() {
            for g in b.iter_mut() {
                *g *= scale;
            }
        }
    }
    norm
}

/// Execution accuracy of greedy decoding against gold answers.
pub fn corpus_accuracy(model: &Model, corpus: &Corpus, tolerance: &crate::number::Num) -> f64 {
    if corpus.problems.is_empty() {
        return 0.0;
    }
    let correct = corpus
        .problems
        .iter()
        .filter(|p| match model.predict(p) {
            super::model::DecodeOutcome::Expr(e) => {
                match e.evaluate(Some(&p.number_values())) {
                    Ok(v) => within_tolerance(&v, &p.answer, tolerance),
                    Err(_) => false,
                }
            }
            super::model::DecodeOutcome::Failure(_) => false,
        })
        .count();
    correct as f64 / corpus.problems.len() as f64
}

/// Train a model from scratch. The returned model carries the parameters of
/// the epoch with the best validation accuracy (earliest epoch on ties) and
/// the full per-epoch log.
pub fn train(
    config: ModelConfig,
    train_corpus: &Corpus,
    val_corpus: &Corpus,
    tolerance: &crate::number::Num,
) -> Result<TrainOutcome, TrainError> {
    let vocab = Vocab::build(train_corpus, None);
    let mut model = build_model(config.clone(), vocab).map_err(TrainError::BadConfig)?;
    let examples: Vec<(Vec<usize>, Vec<usize>)> = train_corpus
        .problems
        .iter()
        .filter_map(|p| {
            let input = model.vocab.encode_input(p);
            let targets = model.vocab.encode_output(p)?;
            if input.is_empty() {
                return None;
            }
            Some((input, targets))
        })
        .collect();
    if examples.is_empty() {
        return Err(TrainError::NoTrainableExamples);
    }

    let mut adam = Adam::new(&model);
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(0x5u64));
    let mut best: Option<(usize, f64, super::model::ParamSet)> = None;

    for epoch in 0..config.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut epoch_loss = 0.0;
        let mut batches = 0usize;
        for (batch_idx, batch) in order.chunks(config.batch_size.max(1)).enumerate() {
            let dropout_rng = ChaCha8Rng::seed_from_u64(
                config
                    .seed
                    .wrapping_mul(0x9e3779b97f4a7c15)
                    .wrapping_add((epoch as u64) << 20)
                    .wrapping_add(batch_idx as u64),
            );
            let mut fwd = Forward::new(&model, Some(dropout_rng));
            let mut losses = Vec::with_capacity(batch.len());
            for idx in batch {
                let (input, targets) = &examples[*idx];
                let (loss, _) = fwd.example_loss(input, targets);
                losses.push(loss);
            }
            let total = fwd.tape.sum_of(losses);
            let mean = fwd.tape.scale(total, 1.0 / batch.len() as f64);
            let loss_value = fwd.tape.scalar(mean);
            if !loss_value.is_finite() {
                return Err(TrainError::NanLoss {
                    epoch,
                    batch: batch_idx,
                });
            }
            epoch_loss += loss_value;
            batches += 1;
            let node_grads = fwd.tape.backward(mean);
            let mut buffers: Vec<Vec<f64>> = model
                .params
                .entries
                .iter()
                .map(|(_, t)| vec![0.0; t.len()])
                .collect();
            gather_grads(&model, &fwd, &node_grads, &mut buffers);
            clip_global_norm(&mut buffers, CLIP_NORM);
            adam.step(&mut model, &buffers, config.learning_rate);
        }
        let val_accuracy = corpus_accuracy(&model, val_corpus, tolerance);
        let loss = epoch_loss / batches.max(1) as f64;
        model.log.push(EpochLog {
            epoch,
            loss,
            val_accuracy,
        });
        let better = match &best {
            None => true,
            Some((_, acc, _)) => val_accuracy > *acc,
        };
        if better {
            best = Some((epoch, val_accuracy, model.params.clone()));
        }
    }

    let (best_epoch, best_val_accuracy, best_params) =
        best.expect("at least one epoch ran");
    model.params = best_params;
    Ok(TrainOutcome {
        model,
        best_epoch,
        best_val_accuracy,
    })
}

/// Render the training log as CSV (`epoch,loss,val_accuracy`).
pub fn log_to_csv(log: &[EpochLog]) -> String {
    let mut out = String::from("epoch,loss,val_accuracy\n");
    for row in log {
        out.push_str(&format!(
            "{},{:.6},{:.6}\n",
            row.epoch, row.loss, row.val_accuracy
        ));
    }
    out
}

/// Maximum relative error between the analytic gradient of `f` at `theta`
/// and central finite differences with step `eps`.
///
/// `f` maps a parameter vector to `(loss, gradient)`. The relative error of
/// component `i` is `|g_i - fd_i| / max(|g_i|, |fd_i|, 1e-6)`.
pub fn grad_check<F>(mut f: F, theta: &[f64], eps: f64) -> f64
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let (_, grad) = f(theta);
    assert_eq!(grad.len(), theta.len(), "gradient length mismatch");
    let mut max_rel = 0.0f64;
    let mut work = theta.to_vec();
    for i in 0..theta.len() {
        work[i] = theta[i] + eps;
        let (lp, _) = f(&work);
        work[i] = theta[i] - eps;
        let (lm, _) = f(&work);
        work[i] = theta[i];
        let fd = (lp - lm) / (2.0 * eps);
        let rel = (grad[i] - fd).abs() / grad[i].abs().max(fd.abs()).max(1e-6);
        max_rel = max_rel.max(rel);
    }
    max_rel
}

/// Flatten all parameters into one vector (registration order).
pub fn flatten_params(model: &Model) -> Vec<f64> {
    model
        .params
        .entries
        .iter()
        .flat_map(|(_, t)| t.data.iter().copied())
        .collect()
}

/// Write a flat vector back into the model's parameters.
pub fn unflatten_params(model: &mut Model, theta: &[f64]) {
    let mut offset = 0;
    for (_, t) in model.params.entries.iter_mut() {
        let n = t.len();
        t.data.copy_from_slice(&theta[offset..offset + n]);
        offset += n;
    }
    assert_eq!(offset, theta.len(), "parameter vector length mismatch");
}

/// Mean teacher-forced loss and its gradient over a set of encoded
/// examples, as flat vectors in registration order. No dropout.
pub fn batch_loss_and_grad(
    model: &Model,
    examples: &[(Vec<usize>, Vec<usize>)],
) -> (f64, Vec<f64>) {
    let mut fwd = Forward::new(model, None);
    let mut losses = Vec::with_capacity(examples.len());
    for (input, targets) in examples {
        let (loss, _) = fwd.example_loss(input, targets);
        losses.push(loss);
    }
    let total = fwd.tape.sum_of(losses);
    let mean = fwd.tape.scale(total, 1.0 / examples.len() as f64);
    let loss_value = fwd.tape.scalar(mean);
    let node_grads = fwd.tape.backward(mean);
    let mut buffers: Vec<Vec<f64>> = model
        .params
        .entries
        .iter()
        .map(|(_, t)| vec![0.0; t.len()])
        .collect();
    gather_grads(model, &fwd, &node_grads, &mut buffers);
    (loss_value, buffers.concat())
}
