//! Model definitions: vocabulary, configuration, parameter store, and the
//! forward pass shared by training and inference.
//!
//! Two variants share one attention decoder:
//!
//! - `constrained`: token embeddings pass through a position-independent
//!   feed-forward map; the decoder starts from the *average* of the hidden
//!   representations, so the model has no word-order information.
//! - `seq2seq`: a bidirectional gated recurrent (LSTM-style) encoder
//!   replaces the feed-forward map.
//!
//! The decoder is an LSTM-style cell with multiplicative attention over the
//! per-token hidden representations. Gating equations are the standard
//! input/forget/cell/output formulation:
//! `c' = f⊙c + i⊙g`, `h' = o⊙tanh(c')` with `i,f,o` sigmoid and `g` tanh
//! slices of `W_ih·x + W_hh·h + b`.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tape::{Tape, Tensor, VarId};
use crate::corpus::{Corpus, Problem};
use crate::expr::{Expr, Op};

/// Which baseline architecture to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Constrained,
    Seq2Seq,
}

/// Hyperparameters. Defaults come from [`ModelConfig::constrained_default`]
/// and [`ModelConfig::seq2seq_default`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub variant: Variant,
    pub embedding_size: usize,
    pub hidden_size: usize,
    pub layers: usize,
    pub dropout: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    /// Greedy-decode cap on emitted prefix tokens.
    pub max_decode_len: usize,
}

impl ModelConfig {
    /// Constrained model, trained from scratch: embedding 128, hidden 384,
    /// 1 layer, lr 1e-3, batch 16, dropout 0.1, 60 epochs.
    pub fn constrained_default(seed: u64) -> ModelConfig {
        ModelConfig {
            variant: Variant::Constrained,
            embedding_size: 128,
            hidden_size: 384,
            layers: 1,
            dropout: 0.1,
            learning_rate: 1e-3,
            batch_size: 16,
            epochs: 60,
            seed,
            max_decode_len: 7,
        }
    }

    /// Seq2seq model, trained from scratch: embedding 256, hidden 256,
    /// 2 layers, lr 1e-3, batch 8, dropout 0.1, 60 epochs.
    pub fn seq2seq_default(seed: u64) -> ModelConfig {
        ModelConfig {
            variant: Variant::Seq2Seq,
            embedding_size: 256,
            hidden_size: 256,
            layers: 2,
            dropout: 0.1,
            learning_rate: 1e-3,
            batch_size: 8,
            epochs: 60,
            seed,
            max_decode_len: 7,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.embedding_size == 0 || self.hidden_size == 0 || self.layers == 0 {
            return Err("dimensions must be positive".into());
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err("dropout must be in [0, 1)".into());
        }
        Ok(())
    }
}

/// Token vocabularies for input text and output equations.
///
/// Input number mentions are replaced by slot markers `<n1>..<nMax>` so the
/// input vocabulary is closed over numbers; the output vocabulary is the
/// four operators, slot tokens `N1..Nmax`, and the sequence delimiters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vocab {
    pub input_tokens: Vec<String>,
    #[serde(skip)]
    input_index: BTreeMap<String, usize>,
    pub output_tokens: Vec<String>,
    pub max_slots: usize,
}

pub const UNK: usize = 0;
pub const BOS: usize = 0;
pub const EOS: usize = 1;

impl Vocab {
    /// Build from a training corpus. `max_slots` defaults to the maximum
    /// number of number mentions in any training problem.
    pub fn build(train: &Corpus, max_slots: Option<usize>) -> Vocab {
        let max_slots = max_slots.unwrap_or_else(|| {
            train
                .problems
                .iter()
                .map(|p| p.numbers.len())
                .max()
                .unwrap_or(0)
        });
        let mut words: BTreeMap<String, usize> = BTreeMap::new();
        for p in train.problems.iter() {
            for (i, tok) in p.tokens().iter().enumerate() {
                if p.numbers.iter().any(|m| m.token_index == i) {
                    continue;
                }
                *words.entry(tok.clone()).or_insert(0) += 1;
            }
        }
        let mut input_tokens = vec!["<unk>".to_string()];
        for k in 1..=max_slots {
            input_tokens.push(format!("<n{k}>"));
        }
        input_tokens.extend(words.into_keys());
        let input_index = input_tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        let mut output_tokens = vec!["<s>".to_string(), "</s>".to_string()];
        for op in ['+', '-', '*', '/'] {
            output_tokens.push(op.to_string());
        }
        for k in 1..=max_slots {
            output_tokens.push(format!("N{k}"));
        }
        Vocab {
            input_tokens,
            input_index,
            output_tokens,
            max_slots,
        }
    }

    /// Rebuild the lookup index (after deserialization).
    pub fn reindex(&mut self) {
        self.input_index = self
            .input_tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
    }

    pub fn input_size(&self) -> usize {
        self.input_tokens.len()
    }

    pub fn output_size(&self) -> usize {
        self.output_tokens.len()
    }

    /// Input token ids with number mentions replaced by slot markers.
    pub fn encode_input(&self, p: &Problem) -> Vec<usize> {
        let tokens = p.tokens();
        let mut slot_of: BTreeMap<usize, usize> = BTreeMap::new();
        for (k, m) in p.numbers.iter().enumerate() {
            slot_of.insert(m.token_index, k + 1);
        }
        tokens
            .iter()
            .enumerate()
            .map(|(i, tok)| match slot_of.get(&i) {
                Some(k) if *k <= self.max_slots => self
                    .input_index
                    .get(&format!("<n{k}>"))
                    .copied()
                    .unwrap_or(UNK),
                _ => self.input_index.get(tok).copied().unwrap_or(UNK),
            })
            .collect()
    }

    /// Like [`Vocab::encode_input`] but over body tokens only.
    pub fn encode_body(&self, p: &Problem) -> Vec<usize> {
        let mut q = p.clone();
        q.question.clear();
        q.numbers.retain(|m| m.token_index < q.body.len());
        self.encode_input(&q)
    }

    /// Target output ids (prefix tokens then `</s>`), or `None` when the
    /// gold equation is not expressible over the output vocabulary (it
    /// contains an unaligned literal or an out-of-range slot).
    pub fn encode_output(&self, p: &Problem) -> Option<Vec<usize>> {
        let mut out = Vec::new();
        if !self.push_output(&p.equation, &mut out) {
            return None;
        }
        out.push(EOS);
        Some(out)
    }

    fn push_output(&self, e: &Expr, out: &mut Vec<usize>) -> bool {
        match e {
            Expr::Literal(_) => false,
            Expr::Slot(i) => {
                if *i + 1 > self.max_slots {
                    return false;
                }
                let tok = format!("N{}", i + 1);
                match self.output_tokens.iter().position(|t| t == &tok) {
                    Some(idx) => {
                        out.push(idx);
                        true
                    }
                    None => false,
                }
            }
            Expr::Bin { op, lhs, rhs } => {
                let tok = op.symbol().to_string();
                let idx = self
                    .output_tokens
                    .iter()
                    .position(|t| t == &tok)
                    .expect("operators are always in the output vocabulary");
                out.push(idx);
                self.push_output(lhs, out) && self.push_output(rhs, out)
            }
        }
    }

    /// Turn emitted output token ids (without `</s>`) into an expression
    /// bound to a problem's numbers. Ill-formed prefix sequences and
    /// out-of-range slots are decode failures.
    pub fn decode_tokens(&self, ids: &[usize], number_count: usize) -> Result<Expr, String> {
        let mut iter = ids.iter();
        let expr = self.decode_rec(&mut iter, number_count)?;
        if iter.next().is_some() {
            return Err("trailing tokens after a complete expression".into());
        }
        Ok(expr)
    }

    fn decode_rec<'a>(
        &self,
        iter: &mut impl Iterator<Item = &'a usize>,
        number_count: usize,
    ) -> Result<Expr, String> {
        let id = *iter.next().ok_or("incomplete prefix sequence")?;
        let tok = self
            .output_tokens
            .get(id)
            .ok_or("output id out of range")?;
        if let Some(op) = tok.chars().next().and_then(Op::from_symbol) {
            if tok.len() == 1 {
                let lhs = self.decode_rec(iter, number_count)?;
                let rhs = self.decode_rec(iter, number_count)?;
                return Ok(Expr::bin(op, lhs, rhs));
            }
        }
        if let Some(rest) = tok.strip_prefix('N') {
            let k: usize = rest.parse().map_err(|_| "bad slot token")?;
            if k == 0 || k > number_count {
                return Err(format!("slot {tok} out of range for {number_count} numbers"));
            }
            return Ok(Expr::Slot(k - 1));
        }
        Err(format!("unexpected output token {tok:?}"))
    }
}

/// Named parameter tensors in registration order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParamSet {
    pub entries: Vec<(String, Tensor)>,
}

impl ParamSet {
    fn add(&mut self, name: &str, rows: usize, cols: usize, rng: &mut ChaCha8Rng, bound: f64) -> usize {
        let data = (0..rows * cols)
            .map(|_| rng.gen_range(-bound..bound))
            .collect();
        self.entries.push((
            name.to_string(),
            Tensor { rows, cols, data },
        ));
        self.entries.len() - 1
    }

    pub fn by_name(&self, name: &str) -> Option<&Tensor> {
        self.entries
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, t)| t)
    }

    pub fn total_len(&self) -> usize {
        self.entries.iter().map(|(_, t)| t.len()).sum()
    }
}

/// Indices of the registered parameters, fixed by the build order.
#[derive(Debug, Clone)]
pub struct ParamLayout {
    pub input_emb: usize,
    /// Constrained FFN layers: (w, b) per layer.
    pub ffn: Vec<(usize, usize)>,
    /// Seq2seq encoder LSTM blocks: [layer][direction] -> (w_ih, w_hh, b).
    pub enc_lstm: Vec<[(usize, usize, usize); 2]>,
    /// Decoder initial-state projection (seq2seq only): (w, b).
    pub init_proj: Option<(usize, usize)>,
    pub output_emb: usize,
    pub dec_lstm: (usize, usize, usize),
    pub attn_w: usize,
    pub attn_combine: (usize, usize),
    pub output_proj: (usize, usize),
}

/// A model: configuration, vocabulary, parameters, and training history.
#[derive(Debug, Clone)]
pub struct Model {
    pub config: ModelConfig,
    pub vocab: Vocab,
    pub params: ParamSet,
    pub layout: ParamLayout,
    pub log: Vec<EpochLog>,
}

/// One row of the training log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub loss: f64,
    pub val_accuracy: f64,
}

/// Encoder key dimensionality: H for the constrained FFN, 2H for the
/// bidirectional encoder.
fn key_dim(config: &ModelConfig) -> usize {
    match config.variant {
        Variant::Constrained => config.hidden_size,
        Variant::Seq2Seq => 2 * config.hidden_size,
    }
}

/// Build an initialized model. Parameters are drawn uniformly from
/// `[-1/√hidden, +1/√hidden]` with a ChaCha generator seeded from the
/// config, so identical configs give identical initializations.
pub fn build_model(config: ModelConfig, vocab: Vocab) -> Result<Model, String> {
    use rand::SeedableRng;
    config.validate()?;
    if vocab.input_size() == 0 || vocab.output_size() == 0 {
        return Err("empty vocabulary".into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let bound = 1.0 / (config.hidden_size as f64).sqrt();
    let e = config.embedding_size;
    let h = config.hidden_size;
    let k = key_dim(&config);
    let mut params = ParamSet::default();
    let input_emb = params.add("enc.emb", vocab.input_size(), e, &mut rng, bound);
    let mut ffn = Vec::new();
    let mut enc_lstm = Vec::new();
    let mut init_proj = None;
    match config.variant {
        Variant::Constrained => {
            for l in 0..config.layers {
                let input = if l == 0 { e } else { h };
                let w = params.add(&format!("enc.ffn{l}.w"), h, input, &mut rng, bound);
                let b = params.add(&format!("enc.ffn{l}.b"), h, 1, &mut rng, bound);
                ffn.push((w, b));
            }
        }
        Variant::Seq2Seq => {
            for l in 0..config.layers {
                let input = if l == 0 { e } else { 2 * h };
                let mut dirs = Vec::new();
                for dir in ["fwd", "bwd"] {
                    let w_ih =
                        params.add(&format!("enc.l{l}.{dir}.w_ih"), 4 * h, input, &mut rng, bound);
                    let w_hh =
                        params.add(&format!("enc.l{l}.{dir}.w_hh"), 4 * h, h, &mut rng, bound);
                    let b = params.add(&format!("enc.l{l}.{dir}.b"), 4 * h, 1, &mut rng, bound);
                    dirs.push((w_ih, w_hh, b));
                }
                enc_lstm.push([dirs[0], dirs[1]]);
            }
            let w = params.add("init.w", h, 2 * h, &mut rng, bound);
            let b = params.add("init.b", h, 1, &mut rng, bound);
            init_proj = Some((w, b));
        }
    }
    let output_emb = params.add("dec.emb", vocab.output_size(), e, &mut rng, bound);
    let dec_lstm = (
        params.add("dec.w_ih", 4 * h, e, &mut rng, bound),
        params.add("dec.w_hh", 4 * h, h, &mut rng, bound),
        params.add("dec.b", 4 * h, 1, &mut rng, bound),
    );
    let attn_w = params.add("attn.w_a", h, k, &mut rng, bound);
    let attn_combine = (
        params.add("attn.w_c", h, k + h, &mut rng, bound),
        params.add("attn.b_c", h, 1, &mut rng, bound),
    );
    let output_proj = (
        params.add("out.w", vocab.output_size(), h, &mut rng, bound),
        params.add("out.b", vocab.output_size(), 1, &mut rng, bound),
    );
    Ok(Model {
        layout: ParamLayout {
            input_emb,
            ffn,
            enc_lstm,
            init_proj,
            output_emb,
            dec_lstm,
            attn_w,
            attn_combine,
            output_proj,
        },
        config,
        vocab,
        params,
        log: Vec::new(),
    })
}

/// Where a tape leaf came from, for gradient accumulation.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LeafBinding {
    pub var: VarId,
    pub param: usize,
    /// `Some(r)` when the leaf is row `r` of the parameter (embeddings).
    pub row: Option<usize>,
}

/// One forward pass under construction.
pub(crate) struct Forward<'m> {
    pub tape: Tape,
    model: &'m Model,
    pub bindings: Vec<LeafBinding>,
    full_cache: BTreeMap<usize, VarId>,
    dropout_rng: Option<ChaCha8Rng>,
}

impl<'m> Forward<'m> {
    pub fn new(model: &'m Model, dropout_rng: Option<ChaCha8Rng>) -> Forward<'m> {
        Forward {
            tape: Tape::new(),
            model,
            bindings: Vec::new(),
            full_cache: BTreeMap::new(),
            dropout_rng,
        }
    }

    fn param(&mut self, idx: usize) -> VarId {
        if let Some(v) = self.full_cache.get(&idx) {
            return *v;
        }
        let var = self.tape.leaf(self.model.params.entries[idx].1.clone());
        self.bindings.push(LeafBinding {
            var,
            param: idx,
            row: None,
        });
        self.full_cache.insert(idx, var);
        var
    }

    fn embed(&mut self, idx: usize, row: usize) -> VarId {
        let t = &self.model.params.entries[idx].1;
        let data = t.data[row * t.cols..(row + 1) * t.cols].to_vec();
        let var = self.tape.leaf(Tensor::from_vec(data));
        self.bindings.push(LeafBinding {
            var,
            param: idx,
            row: Some(row),
        });
        var
    }

    fn dropout(&mut self, x: VarId) -> VarId {
        let p = self.model.config.dropout;
        let Some(rng) = self.dropout_rng.as_mut() else {
            return x;
        };
        if p == 0.0 {
            return x;
        }
        let n = self.tape.value(x).len();
        let keep = 1.0 - p;
        let mask: Vec<f64> = (0..n)
            .map(|_| {
                if rng.gen::<f64>() < keep {
                    1.0 / keep
                } else {
                    0.0
                }
            })
            .collect();
        self.tape.mul_const(x, Tensor::from_vec(mask))
    }

    fn lstm_step(
        &mut self,
        (w_ih, w_hh, b): (usize, usize, usize),
        x: VarId,
        h: VarId,
        c: VarId,
    ) -> (VarId, VarId) {
        let hsize = self.model.config.hidden_size;
        let w_ih = self.param(w_ih);
        let w_hh = self.param(w_hh);
        let b = self.param(b);
        let ih = self.tape.matvec(w_ih, x);
        let hh = self.tape.matvec(w_hh, h);
        let s = self.tape.add(ih, hh);
        let s = self.tape.add(s, b);
        let i_raw = self.tape.slice(s, 0, hsize);
        let f_raw = self.tape.slice(s, hsize, hsize);
        let g_raw = self.tape.slice(s, 2 * hsize, hsize);
        let o_raw = self.tape.slice(s, 3 * hsize, hsize);
        let i = self.tape.sigmoid(i_raw);
        let f = self.tape.sigmoid(f_raw);
        let g = self.tape.tanh(g_raw);
        let o = self.tape.sigmoid(o_raw);
        let fc = self.tape.mul(f, c);
        let ig = self.tape.mul(i, g);
        let c2 = self.tape.add(fc, ig);
        let tc = self.tape.tanh(c2);
        let h2 = self.tape.mul(o, tc);
        (h2, c2)
    }

    fn zeros(&mut self, n: usize) -> VarId {
        self.tape.leaf(Tensor::zeros(n, 1))
    }

    /// Encode input token ids into per-token keys plus the decoder's
    /// initial hidden state.
    pub fn encode(&mut self, input: &[usize]) -> EncoderOut {
        let layout = self.model.layout.clone();
        let emb: Vec<VarId> = input
            .iter()
            .map(|id| {
                let e = self.embed(layout.input_emb, *id);
                self.dropout(e)
            })
            .collect();
        match self.model.config.variant {
            Variant::Constrained => {
                let mut hidden = emb;
                for (w, b) in &layout.ffn {
                    let w = self.param(*w);
                    let b = self.param(*b);
                    hidden = hidden
                        .into_iter()
                        .map(|x| {
                            let z = self.tape.matvec(w, x);
                            let z = self.tape.add(z, b);
                            self.tape.tanh(z)
                        })
                        .collect();
                }
                let init_h = self.tape.mean_of(hidden.clone());
                EncoderOut {
                    keys: hidden,
                    init_h,
                }
            }
            Variant::Seq2Seq => {
                let h = self.model.config.hidden_size;
                let mut inputs = emb;
                let mut last_fwd = None;
                let mut first_bwd = None;
                for (l, dirs) in layout.enc_lstm.iter().enumerate() {
                    let mut fwd_states = Vec::with_capacity(inputs.len());
                    let mut state_h = self.zeros(h);
                    let mut state_c = self.zeros(h);
                    for x in &inputs {
                        let (h2, c2) = self.lstm_step(dirs[0], *x, state_h, state_c);
                        fwd_states.push(h2);
                        state_h = h2;
                        state_c = c2;
                    }
                    let mut bwd_states = vec![0; inputs.len()];
                    let mut state_h = self.zeros(h);
                    let mut state_c = self.zeros(h);
                    for (i, x) in inputs.iter().enumerate().rev() {
                        let (h2, c2) = self.lstm_step(dirs[1], *x, state_h, state_c);
                        bwd_states[i] = h2;
                        state_h = h2;
                        state_c = c2;
                    }
                    if l == layout.enc_lstm.len() - 1 {
                        last_fwd = fwd_states.last().copied();
                        first_bwd = bwd_states.first().copied();
                    }
                    inputs = fwd_states
                        .iter()
                        .zip(&bwd_states)
                        .map(|(f, b)| self.tape.concat(*f, *b))
                        .collect();
                }
                let (w, b) = layout.init_proj.expect("seq2seq has an init projection");
                let cat = self
                    .tape
                    .concat(last_fwd.expect("non-empty input"), first_bwd.unwrap());
                let w = self.param(w);
                let b = self.param(b);
                let z = self.tape.matvec(w, cat);
                let z = self.tape.add(z, b);
                let init_h = self.tape.tanh(z);
                EncoderOut { keys: inputs, init_h }
            }
        }
    }

    /// One decoder step. Returns the new state, the logits, and the
    /// attention distribution node.
    pub fn decode_step(
        &mut self,
        enc: &EncoderOut,
        transformed_keys: &[VarId],
        prev_token: usize,
        h: VarId,
        c: VarId,
    ) -> DecodeStep {
        let layout = self.model.layout.clone();
        let x = self.embed(layout.output_emb, prev_token);
        let x = self.dropout(x);
        let (h2, c2) = self.lstm_step(layout.dec_lstm, x, h, c);
        let scores = self.tape.dot_scores(h2, transformed_keys.to_vec());
        let attention = self.tape.softmax(scores);
        let context = self.tape.weighted_sum(attention, enc.keys.clone());
        let cat = self.tape.concat(context, h2);
        let (w_c, b_c) = layout.attn_combine;
        let w_c = self.param(w_c);
        let b_c = self.param(b_c);
        let z = self.tape.matvec(w_c, cat);
        let z = self.tape.add(z, b_c);
        let attn_h = self.tape.tanh(z);
        let attn_h = self.dropout(attn_h);
        let (w_o, b_o) = layout.output_proj;
        let w_o = self.param(w_o);
        let b_o = self.param(b_o);
        let logits = self.tape.matvec(w_o, attn_h);
        let logits = self.tape.add(logits, b_o);
        DecodeStep {
            h: h2,
            c: c2,
            logits,
            attention,
        }
    }

    /// Score keys once per problem: `k'_i = W_a · k_i`.
    pub fn transform_keys(&mut self, enc: &EncoderOut) -> Vec<VarId> {
        let w_a = self.param(self.model.layout.attn_w);
        enc.keys
            .iter()
            .map(|k| self.tape.matvec(w_a, *k))
            .collect()
    }

    /// Teacher-forced loss (mean over target tokens) for one problem.
    /// Returns the loss node and per-step attention rows.
    pub fn example_loss(&mut self, input: &[usize], targets: &[usize]) -> (VarId, Vec<Vec<f64>>) {
        let enc = self.encode(input);
        let tkeys = self.transform_keys(&enc);
        let mut h = enc.init_h;
        let mut c = self.zeros(self.model.config.hidden_size);
        let mut prev = BOS;
        let mut losses = Vec::new();
        let mut attn_rows = Vec::new();
        for t in targets {
            let step = self.decode_step(&enc, &tkeys, prev, h, c);
            losses.push(self.tape.cross_entropy(step.logits, *t));
            attn_rows.push(self.tape.value(step.attention).data.clone());
            h = step.h;
            c = step.c;
            prev = *t;
        }
        let total = self.tape.sum_of(losses);
        let mean = self.tape.scale(total, 1.0 / targets.len() as f64);
        (mean, attn_rows)
    }

    /// Greedy decode. Returns emitted token ids (without `</s>`) and the
    /// attention row per emitted step.
    pub fn greedy_decode(&mut self, input: &[usize]) -> (Vec<usize>, Vec<Vec<f64>>) {
        let enc = self.encode(input);
        let tkeys = self.transform_keys(&enc);
        let mut h = enc.init_h;
        let mut c = self.zeros(self.model.config.hidden_size);
        let mut prev = BOS;
        let mut out = Vec::new();
        let mut attn_rows = Vec::new();
        for _ in 0..self.model.config.max_decode_len {
            let step = self.decode_step(&enc, &tkeys, prev, h, c);
            let logits = self.tape.value(step.logits);
            // argmax excluding <s>; ties resolve to the lowest index
            let mut best = EOS;
            let mut best_v = f64::NEG_INFINITY;
            for (i, v) in logits.data.iter().enumerate() {
                if i == BOS {
                    continue;
                }
                if *v > best_v {
                    best_v = *v;
                    best = i;
                }
            }
            attn_rows.push(self.tape.value(step.attention).data.clone());
            if best == EOS {
                break;
            }
            out.push(best);
            h = step.h;
            c = step.c;
            prev = best;
        }
        (out, attn_rows)
    }
}

/// Encoder output: one key per input token plus the decoder seed state.
pub(crate) struct EncoderOut {
    pub keys: Vec<VarId>,
    pub init_h: VarId,
}

pub(crate) struct DecodeStep {
    pub h: VarId,
    pub c: VarId,
    pub logits: VarId,
    pub attention: VarId,
}

/// Outcome of greedy decoding on one problem.
#[derive(Debug, Clone, PartialEq)]
pub enum DecodeOutcome {
    Expr(Expr),
    Failure(String),
}

impl Model {
    /// Greedy-decode a prediction for one problem.
    pub fn predict(&self, p: &Problem) -> DecodeOutcome {
        self.predict_with_attention(p).0
    }

    /// Greedy decode plus the attention distribution at every decode step
    /// (including the step that emitted `</s>`).
    pub fn predict_with_attention(&self, p: &Problem) -> (DecodeOutcome, Vec<Vec<f64>>) {
        let input = self.vocab.encode_input(p);
        self.predict_encoded(&input, p.numbers.len())
    }

    /// Greedy decode returning the emitted output token surfaces (with a
    /// trailing `</s>` when one was produced) and the attention row for
    /// every decode step.
    pub fn decode_surface_with_attention(&self, p: &Problem) -> (Vec<String>, Vec<Vec<f64>>) {
        let input = self.vocab.encode_input(p);
        if input.is_empty() {
            return (Vec::new(), Vec::new());
        }
        let mut fwd = Forward::new(self, None);
        let (ids, attn) = fwd.greedy_decode(&input);
        let mut tokens: Vec<String> = ids
            .iter()
            .map(|id| self.vocab.output_tokens[*id].clone())
            .collect();
        // one attention row per step; a surplus row means </s> was emitted
        if attn.len() > tokens.len() {
            tokens.push(self.vocab.output_tokens[EOS].clone());
        }
        (tokens, attn)
    }

    /// Decode from already-encoded input ids.
    pub fn predict_encoded(
        &self,
        input: &[usize],
        number_count: usize,
    ) -> (DecodeOutcome, Vec<Vec<f64>>) {
        if input.is_empty() {
            return (DecodeOutcome::Failure("empty input".into()), Vec::new());
        }
        let mut fwd = Forward::new(self, None);
        let (tokens, attn) = fwd.greedy_decode(input);
        let outcome = match self.vocab.decode_tokens(&tokens, number_count) {
            Ok(e) => DecodeOutcome::Expr(e),
            Err(why) => DecodeOutcome::Failure(why),
        };
        (outcome, attn)
    }
}
