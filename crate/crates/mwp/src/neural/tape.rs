//! Minimal reverse-mode automatic differentiation over dense tensors.
//!
//! A [`Tape`] records every operation of a forward pass as a node with an
//! explicit opcode; [`Tape::backward`] walks the nodes in reverse and
//! accumulates gradients. Values are `f64` column vectors and matrices;
//! evaluation order is fixed, so a given seed and input always produce
//! bit-identical results.

use serde::{Deserialize, Serialize};

/// Dense row-major matrix. Column vectors are `(n, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(rows: usize, cols: usize) -> Tensor {
        Tensor {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(data: Vec<f64>) -> Tensor {
        Tensor {
            rows: data.len(),
            cols: 1,
            data,
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    /// Matrix-vector product; `self` is (m, n), `x` is (n, 1).
    pub fn matvec(&self, x: &Tensor) -> Tensor {
        debug_assert_eq!(self.cols, x.rows);
        debug_assert_eq!(x.cols, 1);
        let mut out = Tensor::zeros(self.rows, 1);
        for r in 0..self.rows {
            let mut acc = 0.0;
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            for (a, b) in row.iter().zip(&x.data) {
                acc += a * b;
            }
            out.data[r] = acc;
        }
        out
    }

    pub fn l2_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Handle to a node on the tape.
pub type VarId = usize;

#[derive(Debug, Clone)]
enum OpKind {
    /// Leaf value (parameter or input); no parents.
    Leaf,
    /// Elementwise sum of same-shape vectors.
    Add(VarId, VarId),
    /// Elementwise difference.
    Sub(VarId, VarId),
    /// Elementwise product.
    Mul(VarId, VarId),
    /// Product with a constant (no-grad) mask, e.g. dropout.
    MulConst(VarId, Tensor),
    /// Scale by a constant.
    Scale(VarId, f64),
    /// Matrix (param) times column vector.
    MatVec(VarId, VarId),
    Tanh(VarId),
    Sigmoid(VarId),
    Relu(VarId),
    /// Vertical concatenation of two column vectors.
    Concat(VarId, VarId),
    /// Contiguous rows `[start, start+len)` of a column vector.
    Slice(VarId, usize, usize),
    /// Mean of several same-shape vectors.
    MeanOf(Vec<VarId>),
    /// Sum of several same-shape scalars or vectors.
    SumOf(Vec<VarId>),
    /// Scores `s_i = query · key_i` stacked into a column vector.
    DotScores(VarId, Vec<VarId>),
    /// Softmax over a column vector.
    Softmax(VarId),
    /// `Σ weights_i · vector_i` with a weight column vector.
    WeightedSum(VarId, Vec<VarId>),
    /// Scalar cross-entropy of logits against a target index, computed via
    /// log-softmax.
    CrossEntropy(VarId, usize),
}

struct Node {
    op: OpKind,
    value: Tensor,
}

/// Records a forward computation for reverse-mode differentiation.
#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

impl Tape {
    pub fn new() -> Tape {
        Tape::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, id: VarId) -> &Tensor {
        &self.nodes[id].value
    }

    pub fn scalar(&self, id: VarId) -> f64 {
        debug_assert_eq!(self.nodes[id].value.len(), 1);
        self.nodes[id].value.data[0]
    }

    fn push(&mut self, op: OpKind, value: Tensor) -> VarId {
        self.nodes.push(Node { op, value });
        self.nodes.len() - 1
    }

    pub fn leaf(&mut self, value: Tensor) -> VarId {
        self.push(OpKind::Leaf, value)
    }

    pub fn add(&mut self, a: VarId, b: VarId) -> VarId {
        let v = zip(&self.nodes[a].value, &self.nodes[b].value, |x, y| x + y);
        self.push(OpKind::Add(a, b), v)
    }

    pub fn sub(&mut self, a: VarId, b: VarId) -> VarId {
        let v = zip(&self.nodes[a].value, &self.nodes[b].value, |x, y| x - y);
        self.push(OpKind::Sub(a, b), v)
    }

    pub fn mul(&mut self, a: VarId, b: VarId) -> VarId {
        let v = zip(&self.nodes[a].value, &self.nodes[b].value, |x, y| x * y);
        self.push(OpKind::Mul(a, b), v)
    }

    pub fn mul_const(&mut self, a: VarId, mask: Tensor) -> VarId {
        let v = zip(&self.nodes[a].value, &mask, |x, y| x * y);
        self.push(OpKind::MulConst(a, mask), v)
    }

    pub fn scale(&mut self, a: VarId, c: f64) -> VarId {
        let v = map(&self.nodes[a].value, |x| x * c);
        self.push(OpKind::Scale(a, c), v)
    }

    pub fn matvec(&mut self, w: VarId, x: VarId) -> VarId {
        let v = self.nodes[w].value.matvec(&self.nodes[x].value);
        self.push(OpKind::MatVec(w, x), v)
    }

    pub fn tanh(&mut self, a: VarId) -> VarId {
        let v = map(&self.nodes[a].value, f64::tanh);
        self.push(OpKind::Tanh(a), v)
    }

    pub fn sigmoid(&mut self, a: VarId) -> VarId {
        let v = map(&self.nodes[a].value, |x| 1.0 / (1.0 + (-x).exp()));
        self.push(OpKind::Sigmoid(a), v)
    }

    pub fn relu(&mut self, a: VarId) -> VarId {
        let v = map(&self.nodes[a].value, |x| x.max(0.0));
        self.push(OpKind::Relu(a), v)
    }

    pub fn concat(&mut self, a: VarId, b: VarId) -> VarId {
        let mut data = self.nodes[a].value.data.clone();
        data.extend_from_slice(&self.nodes[b].value.data);
        self.push(OpKind::Concat(a, b), Tensor::from_vec(data))
    }

    pub fn slice(&mut self, a: VarId, start: usize, len: usize) -> VarId {
        let data = self.nodes[a].value.data[start..start + len].to_vec();
        self.push(OpKind::Slice(a, start, len), Tensor::from_vec(data))
    }

    pub fn mean_of(&mut self, parts: Vec<VarId>) -> VarId {
        debug_assert!(!parts.is_empty());
        let mut v = self.nodes[parts[0]].value.clone();
        for p in &parts[1..] {
            for (o, x) in v.data.iter_mut().zip(&self.nodes[*p].value.data) {
                *o += x;
            }
        }
        let k = parts.len() as f64;
        for o in v.data.iter_mut() {
            *o /= k;
        }
        self.push(OpKind::MeanOf(parts), v)
    }

    pub fn sum_of(&mut self, parts: Vec<VarId>) -> VarId {
        debug_assert!(!parts.is_empty());
        let mut v = self.nodes[parts[0]].value.clone();
        for p in &parts[1..] {
            for (o, x) in v.data.iter_mut().zip(&self.nodes[*p].value.data) {
                *o += x;
            }
        }
        self.push(OpKind::SumOf(parts), v)
    }

    pub fn dot_scores(&mut self, query: VarId, keys: Vec<VarId>) -> VarId {
        let q = &self.nodes[query].value;
        let mut out = Tensor::zeros(keys.len(), 1);
        for (i, k) in keys.iter().enumerate() {
            let kv = &self.nodes[*k].value;
            out.data[i] = q.data.iter().zip(&kv.data).map(|(a, b)| a * b).sum();
        }
        self.push(OpKind::DotScores(query, keys), out)
    }

    pub fn softmax(&mut self, a: VarId) -> VarId {
        let v = softmax_vec(&self.nodes[a].value);
        self.push(OpKind::Softmax(a), v)
    }

    pub fn weighted_sum(&mut self, weights: VarId, vectors: Vec<VarId>) -> VarId {
        let w = &self.nodes[weights].value;
        debug_assert_eq!(w.len(), vectors.len());
        let dim = self.nodes[vectors[0]].value.len();
        let mut out = Tensor::zeros(dim, 1);
        for (i, v) in vectors.iter().enumerate() {
            let vv = &self.nodes[*v].value;
            for (o, x) in out.data.iter_mut().zip(&vv.data) {
                *o += w.data[i] * x;
            }
        }
        self.push(OpKind::WeightedSum(weights, vectors), out)
    }

    /// Cross-entropy `-log softmax(logits)[target]` as a scalar node.
    pub fn cross_entropy(&mut self, logits: VarId, target: usize) -> VarId {
        let l = &self.nodes[logits].value;
        let max = l.data.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let log_z = max + l.data.iter().map(|x| (x - max).exp()).sum::<f64>().ln();
        let loss = log_z - l.data[target];
        self.push(
            OpKind::CrossEntropy(logits, target),
            Tensor::from_vec(vec![loss]),
        )
    }

    /// Reverse pass from a scalar root. Returns one gradient tensor per
    /// node, in node order.
    pub fn backward(&self, root: VarId) -> Vec<Tensor> {
        let mut grads: Vec<Tensor> = self
            .nodes
            .iter()
            .map(|n| Tensor::zeros(n.value.rows, n.value.cols))
            .collect();
        debug_assert_eq!(self.nodes[root].value.len(), 1);
        grads[root].data[0] = 1.0;
        for id in (0..=root).rev() {
            if grads[id].data.iter().all(|g| *g == 0.0) {
                continue;
            }
            let g = grads[id].clone();
            match &self.nodes[id].op {
                OpKind::Leaf => {}
                OpKind::Add(a, b) => {
                    accumulate(&mut grads[*a], &g.data);
                    accumulate(&mut grads[*b], &g.data);
                }
                OpKind::Sub(a, b) => {
                    accumulate(&mut grads[*a], &g.data);
                    for (o, x) in grads[*b].data.iter_mut().zip(&g.data) {
                        *o -= x;
                    }
                }
                OpKind::Mul(a, b) => {
                    let av = self.nodes[*a].value.data.clone();
                    let bv = self.nodes[*b].value.data.clone();
                    for ((o, x), y) in grads[*a].data.iter_mut().zip(&g.data).zip(&bv) {
                        *o += x * y;
                    }
                    for ((o, x), y) in grads[*b].data.iter_mut().zip(&g.data).zip(&av) {
                        *o += x * y;
                    }
                }
                OpKind::MulConst(a, mask) => {
                    for ((o, x), m) in grads[*a].data.iter_mut().zip(&g.data).zip(&mask.data) {
                        *o += x * m;
                    }
                }
                OpKind::Scale(a, c) => {
                    for (o, x) in grads[*a].data.iter_mut().zip(&g.data) {
                        *o += x * c;
                    }
                }
                OpKind::MatVec(w, x) => {
                    let wv = &self.nodes[*w].value;
                    let xv = self.nodes[*x].value.data.clone();
                    // dW[r][c] += g[r] * x[c]
                    {
                        let gw = &mut grads[*w];
                        for r in 0..wv.rows {
                            for c in 0..wv.cols {
                                gw.data[r * wv.cols + c] += g.data[r] * xv[c];
                            }
                        }
                    }
                    // dx[c] += Σ_r g[r] * W[r][c]
                    let gx = &mut grads[*x];
                    for r in 0..wv.rows {
                        for c in 0..wv.cols {
                            gx.data[c] += g.data[r] * wv.data[r * wv.cols + c];
                        }
                    }
                }
                OpKind::Tanh(a) => {
                    let yv = self.nodes[id].value.data.clone();
                    for ((o, x), y) in grads[*a].data.iter_mut().zip(&g.data).zip(&yv) {
                        *o += x * (1.0 - y * y);
                    }
                }
                OpKind::Sigmoid(a) => {
                    let yv = self.nodes[id].value.data.clone();
                    for ((o, x), y) in grads[*a].data.iter_mut().zip(&g.data).zip(&yv) {
                        *o += x * y * (1.0 - y);
                    }
                }
                OpKind::Relu(a) => {
                    let av = self.nodes[*a].value.data.clone();
                    for ((o, x), v) in grads[*a].data.iter_mut().zip(&g.data).zip(&av) {
                        if *v > 0.0 {
                            *o += x;
                        }
                    }
                }
                OpKind::Concat(a, b) => {
                    let alen = self.nodes[*a].value.len();
                    accumulate(&mut grads[*a], &g.data[..alen]);
                    accumulate(&mut grads[*b], &g.data[alen..]);
                }
                OpKind::Slice(a, start, len) => {
                    let ga = &mut grads[*a];
                    for i in 0..*len {
                        ga.data[start + i] += g.data[i];
                    }
                }
                OpKind::MeanOf(parts) => {
                    let k = parts.len() as f64;
                    for p in parts {
                        for (o, x) in grads[*p].data.iter_mut().zip(&g.data) {
                            *o += x / k;
                        }
                    }
                }
                OpKind::SumOf(parts) => {
                    for p in parts {
                        accumulate(&mut grads[*p], &g.data);
                    }
                }
                OpKind::DotScores(query, keys) => {
                    let qv = self.nodes[*query].value.data.clone();
                    for (i, k) in keys.iter().enumerate() {
                        let kv = self.nodes[*k].value.data.clone();
                        let gi = g.data[i];
                        for (o, x) in grads[*query].data.iter_mut().zip(&kv) {
                            *o += gi * x;
                        }
                        for (o, x) in grads[*k].data.iter_mut().zip(&qv) {
                            *o += gi * x;
                        }
                    }
                }
                OpKind::Softmax(a) => {
                    let s = self.nodes[id].value.data.clone();
                    let dot: f64 = s.iter().zip(&g.data).map(|(si, gi)| si * gi).sum();
                    for ((o, gi), si) in grads[*a].data.iter_mut().zip(&g.data).zip(&s) {
                        *o += si * (gi - dot);
                    }
                }
                OpKind::WeightedSum(weights, vectors) => {
                    let wv = self.nodes[*weights].value.data.clone();
                    for (i, v) in vectors.iter().enumerate() {
                        let vv = self.nodes[*v].value.data.clone();
                        grads[*weights].data[i] +=
                            g.data.iter().zip(&vv).map(|(a, b)| a * b).sum::<f64>();
                        for (o, x) in grads[*v].data.iter_mut().zip(&g.data) {
                            *o += wv[i] * x;
                        }
                    }
                }
                OpKind::CrossEntropy(logits, target) => {
                    let s = softmax_vec(&self.nodes[*logits].value);
                    let gl = &mut grads[*logits];
                    let gscalar = g.data[0];
                    for (i, (o, si)) in gl.data.iter_mut().zip(&s.data).enumerate() {
                        let indicator = if i == *target { 1.0 } else { 0.0 };
                        *o += gscalar * (si - indicator);
                    }
                }
            }
        }
        grads
    }
}

fn softmax_vec(v: &Tensor) -> Tensor {
    let max = v.data.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut out = Tensor::zeros(v.rows, v.cols);
    let mut sum = 0.0;
    for (o, x) in out.data.iter_mut().zip(&v.data) {
        *o = (x - max).exp();
        sum += *o;
    }
    for o in out.data.iter_mut() {
        *o /= sum;
    }
    out
}

fn map(t: &Tensor, f: impl Fn(f64) -> f64) -> Tensor {
    Tensor {
        rows: t.rows,
        cols: t.cols,
        data: t.data.iter().map(|x| f(*x)).collect(),
    }
}

fn zip(a: &Tensor, b: &Tensor, f: impl Fn(f64, f64) -> f64) -> Tensor {
    debug_assert_eq!(a.rows, b.rows);
    debug_assert_eq!(a.cols, b.cols);
    Tensor {
        rows: a.rows,
        cols: a.cols,
        data: a.data.iter().zip(&b.data).map(|(x, y)| f(*x, *y)).collect(),
    }
}

fn accumulate(t: &mut Tensor, g: &[f64]) {
    for (o, x) in t.data.iter_mut().zip(g) {
        *o += x;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn squared_norm_gradient_is_2x() {
        let mut tape = Tape::new();
        let x = tape.leaf(Tensor::from_vec(vec![1.0, -2.0, 3.0]));
        let sq = tape.mul(x, x);
        let one = tape.leaf(Tensor::from_vec(vec![1.0, 1.0, 1.0]));
        let scores = tape.dot_scores(one, vec![sq]);
        let grads = tape.backward(scores);
        assert_eq!(grads[x].data, vec![2.0, -4.0, 6.0]);
    }

    #[test]
    fn matvec_gradients() {
        let mut tape = Tape::new();
        let w = tape.leaf(Tensor {
            rows: 2,
            cols: 3,
            data: vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
        });
        let x = tape.leaf(Tensor::from_vec(vec![1.0, 0.5, -1.0]));
        let y = tape.matvec(w, x); // [1 + 1 - 3, 4 + 2.5 - 6] = [-1, 0.5]
        assert_eq!(tape.value(y).data, vec![-1.0, 0.5]);
        let ones = tape.leaf(Tensor::from_vec(vec![1.0, 1.0]));
        let s = tape.dot_scores(ones, vec![y]);
        let grads = tape.backward(s);
        // d(sum y)/dW[r][c] = x[c]
        assert_eq!(grads[w].data, vec![1.0, 0.5, -1.0, 1.0, 0.5, -1.0]);
        // d(sum y)/dx[c] = col sums of W
        assert_eq!(grads[x].data, vec![5.0, 7.0, 9.0]);
    }

    #[test]
    fn softmax_sums_to_one() {
        let mut tape = Tape::new();
        let a = tape.leaf(Tensor::from_vec(vec![0.1, 2.0, -1.0, 0.5]));
        let s = tape.softmax(a);
        let sum: f64 = tape.value(s).data.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        assert!(tape.value(s).data.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn cross_entropy_matches_manual() {
        let mut tape = Tape::new();
        let logits = tape.leaf(Tensor::from_vec(vec![1.0, 2.0, 3.0]));
        let loss = tape.cross_entropy(logits, 2);
        let z: f64 = [1.0f64, 2.0, 3.0].iter().map(|x| x.exp()).sum();
        let expected = z.ln() - 3.0;
        assert!((tape.scalar(loss) - expected).abs() < 1e-12);
        let grads = tape.backward(loss);
        let p: Vec<f64> = [1.0f64, 2.0, 3.0].iter().map(|x| x.exp() / z).collect();
        assert!((grads[logits].data[0] - p[0]).abs() < 1e-12);
        assert!((grads[logits].data[2] - (p[2] - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn finite_difference_agreement_on_composite_graph() {
        // f(x) = CE(W2 tanh(W1 x), 0) checked against central differences
        let w1_data = vec![0.3, -0.2, 0.5, 0.1, -0.4, 0.2];
        let w2_data = vec![0.7, -0.1, 0.2, 0.4];
        let x_data = vec![0.5, -1.0, 0.25];
        let f = |w1d: &[f64]| {
            let mut tape = Tape::new();
            let w1 = tape.leaf(Tensor {
                rows: 2,
                cols: 3,
                data: w1d.to_vec(),
            });
            let w2 = tape.leaf(Tensor {
                rows: 2,
                cols: 2,
                data: w2_data.clone(),
            });
            let x = tape.leaf(Tensor::from_vec(x_data.clone()));
            let h = tape.matvec(w1, x);
            let h = tape.tanh(h);
            let l = tape.matvec(w2, h);
            let loss = tape.cross_entropy(l, 0);
            (tape, w1, loss)
        };
        let (tape, w1, loss) = f(&w1_data);
        let grads = tape.backward(loss);
        let eps = 1e-6;
        for i in 0..w1_data.len() {
            let mut plus = w1_data.clone();
            plus[i] += eps;
            let mut minus = w1_data.clone();
            minus[i] -= eps;
            let (tp, _, lp) = f(&plus);
            let (tm, _, lm) = f(&minus);
            let fd = (tp.scalar(lp) - tm.scalar(lm)) / (2.0 * eps);
            assert!(
                (grads[w1].data[i] - fd).abs() < 1e-7,
                "component {i}: ad {} vs fd {fd}",
                grads[w1].data[i]
            );
        }
    }
}
