//! Reverse-mode automatic differentiation over small dense matrices.
//!
//! A [`Graph`] records every operation of one forward pass; [`Graph::backward`]
//! walks the record in reverse and returns gradients for every parameter the
//! pass touched. Graphs are cheap and meant to be built per example.

use serde::{Deserialize, Serialize};

use super::matrix::{gemm, Matrix};

pub type ParamId = usize;

/// Named trainable tensors.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParamStore {
    names: Vec<String>,
    values: Vec<Matrix>,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: impl Into<String>, value: Matrix) -> ParamId {
        self.names.push(name.into());
        self.values.push(value);
        self.values.len() - 1
    }

    pub fn get(&self, id: ParamId) -> &Matrix {
        &self.values[id]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Matrix {
        &mut self.values[id]
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.names[id]
    }

    pub fn id(&self, name: &str) -> Option<ParamId> {
        self.names.iter().position(|n| n == name)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = ParamId> {
        0..self.values.len()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(Matrix::is_finite)
    }
}

/// Gradient buffers aligned with a [`ParamStore`]. Parameters that a pass
/// never touched stay `None`.
#[derive(Debug, Clone)]
pub struct Gradients {
    grads: Vec<Option<Matrix>>,
}

impl Gradients {
    pub fn new(store: &ParamStore) -> Self {
        Gradients {
            grads: vec![None; store.len()],
        }
    }

    pub fn get(&self, id: ParamId) -> Option<&Matrix> {
        self.grads[id].as_ref()
    }

    fn slot(&mut self, id: ParamId, shape: (usize, usize)) -> &mut Matrix {
        self.grads[id].get_or_insert_with(|| Matrix::zeros(shape.0, shape.1))
    }

    pub fn merge(&mut self, other: &Gradients) {
        for (mine, theirs) in self.grads.iter_mut().zip(&other.grads) {
            if let Some(t) = theirs {
                match mine {
                    Some(m) => m.add_assign(t),
                    None => *mine = Some(t.clone()),
                }
            }
        }
    }

    pub fn scale(&mut self, f: f64) {
        for g in self.grads.iter_mut().flatten() {
            g.scale_assign(f);
        }
    }

    /// Zero the gradient of specific rows (e.g. a frozen padding row).
    pub fn zero_rows(&mut self, id: ParamId, rows: &[usize]) {
        if let Some(g) = self.grads[id].as_mut() {
            for &r in rows {
                g.row_mut(r).fill(0.0);
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.grads.iter().flatten().all(Matrix::is_finite)
    }
}

/// Handle to a node in a [`Graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

enum Op {
    Constant,
    Param(ParamId),
    Rows {
        param: ParamId,
        indices: Vec<usize>,
    },
    MatMul(Var, Var),
    Add(Var, Var),
    Sub(Var, Var),
    AddRow(Var, Var),
    Mul(Var, Var),
    Scale(Var, f64),
    Sigmoid(Var),
    Tanh(Var),
    ConcatCols(Vec<Var>),
    ConcatRows(Vec<Var>),
    SliceCols(Var, usize),
    SliceRows(Var, usize),
    Transpose(Var),
    Softmax(Var),
    MeanRows(Var),
    Sum(Var),
    PairRowMax {
        left: Var,
        right: Var,
        bias: Var,
        argmax: Vec<Option<(usize, usize)>>,
    },
    CrossEntropy {
        logits: Var,
        target: usize,
        probs: Vec<f64>,
    },
    BceWithLogits {
        logits: Var,
        targets: Vec<f64>,
        mask: Vec<bool>,
    },
}

struct Node {
    value: Matrix,
    op: Op,
}

pub struct Graph<'p> {
    params: &'p ParamStore,
    nodes: Vec<Node>,
    param_nodes: Vec<Option<Var>>,
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

pub(crate) fn softmax_in_place(xs: &mut [f64]) {
    let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for x in xs.iter_mut() {
        *x = (*x - max).exp();
        sum += *x;
    }
    for x in xs.iter_mut() {
        *x /= sum;
    }
}

impl<'p> Graph<'p> {
    pub fn new(params: &'p ParamStore) -> Self {
        Graph {
            params,
            nodes: Vec::with_capacity(256),
            param_nodes: vec![None; params.len()],
        }
    }

    fn push(&mut self, value: Matrix, op: Op) -> Var {
        self.nodes.push(Node { value, op });
        Var(self.nodes.len() - 1)
    }

    pub fn value(&self, v: Var) -> &Matrix {
        &self.nodes[v.0].value
    }

    pub fn scalar(&self, v: Var) -> f64 {
        self.nodes[v.0].value.data()[0]
    }

    pub fn constant(&mut self, m: Matrix) -> Var {
        self.push(m, Op::Constant)
    }

    pub fn param(&mut self, id: ParamId) -> Var {
        if let Some(v) = self.param_nodes[id] {
            return v;
        }
        let v = self.push(self.params.get(id).clone(), Op::Param(id));
        self.param_nodes[id] = Some(v);
        v
    }

    /// Gather rows of a parameter table (embedding lookup).
    pub fn rows(&mut self, id: ParamId, indices: &[usize]) -> Var {
        let table = self.params.get(id);
        let mut out = Matrix::zeros(indices.len(), table.cols());
        for (r, &i) in indices.iter().enumerate() {
            out.row_mut(r).copy_from_slice(table.row(i));
        }
        self.push(
            out,
            Op::Rows {
                param: id,
                indices: indices.to_vec(),
            },
        )
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Var {
        let out = self.value(a).matmul(self.value(b));
        self.push(out, Op::MatMul(a, b))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        let mut out = self.value(a).clone();
        out.add_assign(self.value(b));
        self.push(out, Op::Add(a, b))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Var {
        let mut out = self.value(a).clone();
        for (o, y) in out.data_mut().iter_mut().zip(self.value(b).data()) {
            *o -= y;
        }
        self.push(out, Op::Sub(a, b))
    }

    /// `a + b` where `b` is a `1 x cols` row broadcast over the rows of `a`.
    pub fn add_row(&mut self, a: Var, b: Var) -> Var {
        let bias = self.value(b);
        assert_eq!(bias.shape(), (1, self.value(a).cols()), "bias shape");
        let mut out = self.value(a).clone();
        let bias = bias.data().to_vec();
        for r in 0..out.rows() {
            for (o, y) in out.row_mut(r).iter_mut().zip(&bias) {
                *o += y;
            }
        }
        self.push(out, Op::AddRow(a, b))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        assert_eq!(self.value(a).shape(), self.value(b).shape(), "mul shape");
        let mut out = self.value(a).clone();
        for (o, y) in out.data_mut().iter_mut().zip(self.value(b).data()) {
            *o *= y;
        }
        self.push(out, Op::Mul(a, b))
    }

    pub fn scale(&mut self, a: Var, f: f64) -> Var {
        let mut out = self.value(a).clone();
        out.scale_assign(f);
        self.push(out, Op::Scale(a, f))
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        let mut out = self.value(a).clone();
        out.data_mut().iter_mut().for_each(|x| *x = sigmoid(*x));
        self.push(out, Op::Sigmoid(a))
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let mut out = self.value(a).clone();
        out.data_mut().iter_mut().for_each(|x| *x = x.tanh());
        self.push(out, Op::Tanh(a))
    }

    pub fn concat_cols(&mut self, parts: &[Var]) -> Var {
        let rows = self.value(parts[0]).rows();
        let cols: usize = parts.iter().map(|&p| self.value(p).cols()).sum();
        let mut out = Matrix::zeros(rows, cols);
        for r in 0..rows {
            let mut off = 0;
            for &p in parts {
                let v = self.value(p);
                assert_eq!(v.rows(), rows, "concat_cols row mismatch");
                out.row_mut(r)[off..off + v.cols()].copy_from_slice(v.row(r));
                off += v.cols();
            }
        }
        self.push(out, Op::ConcatCols(parts.to_vec()))
    }

    pub fn concat_rows(&mut self, parts: &[Var]) -> Var {
        let cols = self.value(parts[0]).cols();
        let mut data = Vec::new();
        for &p in parts {
            let v = self.value(p);
            assert_eq!(v.cols(), cols, "concat_rows col mismatch");
            data.extend_from_slice(v.data());
        }
        let rows = data.len() / cols.max(1);
        self.push(Matrix::from_vec(rows, cols, data), Op::ConcatRows(parts.to_vec()))
    }

    pub fn slice_cols(&mut self, a: Var, start: usize, width: usize) -> Var {
        let src = self.value(a);
        assert!(start + width <= src.cols(), "slice_cols out of range");
        let mut out = Matrix::zeros(src.rows(), width);
        for r in 0..src.rows() {
            out.row_mut(r).copy_from_slice(&src.row(r)[start..start + width]);
        }
        self.push(out, Op::SliceCols(a, start))
    }

    pub fn slice_rows(&mut self, a: Var, start: usize, count: usize) -> Var {
        let src = self.value(a);
        assert!(start + count <= src.rows(), "slice_rows out of range");
        let c = src.cols();
        let out = Matrix::from_vec(count, c, src.data()[start * c..(start + count) * c].to_vec());
        self.push(out, Op::SliceRows(a, start))
    }

    pub fn transpose(&mut self, a: Var) -> Var {
        let out = self.value(a).transpose();
        self.push(out, Op::Transpose(a))
    }

    /// Softmax over every entry of `a` (use on row or column vectors).
    pub fn softmax(&mut self, a: Var) -> Var {
        let mut out = self.value(a).clone();
        softmax_in_place(out.data_mut());
        self.push(out, Op::Softmax(a))
    }

    pub fn mean_rows(&mut self, a: Var) -> Var {
        let src = self.value(a);
        let mut out = Matrix::zeros(1, src.cols());
        let n = src.rows().max(1) as f64;
        for r in 0..src.rows() {
            for (o, x) in out.data_mut().iter_mut().zip(src.row(r)) {
                *o += x / n;
            }
        }
        self.push(out, Op::MeanRows(a))
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let s = self.value(a).data().iter().sum();
        self.push(Matrix::from_vec(1, 1, vec![s]), Op::Sum(a))
    }

    /// Single-dimension pairwise intra-attention scores pooled by row max.
    ///
    /// `left` and `right` are `L x 1` per-word projections and `bias` is
    /// `1 x 1`. The score of an unordered pair `i < j` is
    /// `sigmoid(left[i] + right[j] + bias)` and is shared by both words.
    /// Output row `i` is the maximum score over `j != i`; a sequence of
    /// length one has no pairs and yields `0`.
    #[allow(clippy::needless_range_loop)]
    pub fn pair_row_max(&mut self, left: Var, right: Var, bias: Var) -> Var {
        let l = self.value(left).data().to_vec();
        let r = self.value(right).data().to_vec();
        let b = self.scalar(bias);
        let n = l.len();
        assert_eq!(r.len(), n, "pair projections differ in length");
        let mut out = Matrix::zeros(n, 1);
        let mut argmax = vec![None; n];
        for i in 0..n {
            let mut best = f64::NEG_INFINITY;
            for j in 0..n {
                if i == j {
                    continue;
                }
                let (lo, hi) = if i < j { (i, j) } else { (j, i) };
                let s = sigmoid(l[lo] + r[hi] + b);
                if s > best {
                    best = s;
                    argmax[i] = Some((lo, hi));
                }
            }
            out.data_mut()[i] = if argmax[i].is_some() { best } else { 0.0 };
        }
        self.push(
            out,
            Op::PairRowMax {
                left,
                right,
                bias,
                argmax,
            },
        )
    }

    /// Softmax cross-entropy of a `1 x K` logit row against a class index.
    pub fn cross_entropy(&mut self, logits: Var, target: usize) -> Var {
        let mut probs = self.value(logits).data().to_vec();
        assert!(target < probs.len(), "target out of range");
        softmax_in_place(&mut probs);
        let loss = -probs[target].max(f64::MIN_POSITIVE).ln();
        self.push(
            Matrix::from_vec(1, 1, vec![loss]),
            Op::CrossEntropy { logits, target, probs },
        )
    }

    /// Summed binary cross-entropy over the unmasked entries of a logit row.
    pub fn bce_with_logits(&mut self, logits: Var, targets: &[f64], mask: &[bool]) -> Var {
        let z = self.value(logits).data();
        assert_eq!(z.len(), targets.len());
        assert_eq!(z.len(), mask.len());
        let loss = z
            .iter()
            .zip(targets)
            .zip(mask)
            .filter(|(_, &m)| m)
            .map(|((&z, &y), _)| softplus(z) - y * z)
            .sum();
        self.push(
            Matrix::from_vec(1, 1, vec![loss]),
            Op::BceWithLogits {
                logits,
                targets: targets.to_vec(),
                mask: mask.to_vec(),
            },
        )
    }

    /// Backpropagate from a scalar node and collect parameter gradients.
    pub fn backward(&self, loss: Var) -> Gradients {
        assert_eq!(self.value(loss).shape(), (1, 1), "loss must be scalar");
        let mut grads: Vec<Option<Matrix>> = Vec::with_capacity(self.nodes.len());
        grads.resize_with(self.nodes.len(), || None);
        grads[loss.0] = Some(Matrix::filled(1, 1, 1.0));
        let mut out = Gradients::new(self.params);

        for idx in (0..=loss.0).rev() {
            let Some(g) = grads[idx].take() else { continue };
            let node = &self.nodes[idx];
            match &node.op {
                Op::Constant => {}
                Op::Param(id) => out.slot(*id, g.shape()).add_assign(&g),
                Op::Rows { param, indices } => {
                    let shape = self.params.get(*param).shape();
                    let slot = out.slot(*param, shape);
                    for (r, &i) in indices.iter().enumerate() {
                        for (s, x) in slot.row_mut(i).iter_mut().zip(g.row(r)) {
                            *s += x;
                        }
                    }
                }
                Op::MatMul(a, b) => {
                    let (va, vb) = (self.value(*a), self.value(*b));
                    gemm(&g, false, vb, true, self.acc(&mut grads, *a), 1.0);
                    gemm(va, true, &g, false, self.acc(&mut grads, *b), 1.0);
                }
                Op::Add(a, b) => {
                    self.acc(&mut grads, *a).add_assign(&g);
                    self.acc(&mut grads, *b).add_assign(&g);
                }
                Op::Sub(a, b) => {
                    self.acc(&mut grads, *a).add_assign(&g);
                    let gb = self.acc(&mut grads, *b);
                    for (o, x) in gb.data_mut().iter_mut().zip(g.data()) {
                        *o -= x;
                    }
                }
                Op::AddRow(a, b) => {
                    self.acc(&mut grads, *a).add_assign(&g);
                    let gb = self.acc(&mut grads, *b);
                    for r in 0..g.rows() {
                        for (o, x) in gb.data_mut().iter_mut().zip(g.row(r)) {
                            *o += x;
                        }
                    }
                }
                Op::Mul(a, b) => {
                    let (va, vb) = (self.value(*a), self.value(*b));
                    let ga = self.acc(&mut grads, *a);
                    for ((o, x), y) in ga.data_mut().iter_mut().zip(g.data()).zip(vb.data()) {
                        *o += x * y;
                    }
                    let gb = self.acc(&mut grads, *b);
                    for ((o, x), y) in gb.data_mut().iter_mut().zip(g.data()).zip(va.data()) {
                        *o += x * y;
                    }
                }
                Op::Scale(a, f) => {
                    let ga = self.acc(&mut grads, *a);
                    for (o, x) in ga.data_mut().iter_mut().zip(g.data()) {
                        *o += f * x;
                    }
                }
                Op::Sigmoid(a) => {
                    let y = &node.value;
                    let ga = self.acc(&mut grads, *a);
                    for ((o, x), y) in ga.data_mut().iter_mut().zip(g.data()).zip(y.data()) {
                        *o += x * y * (1.0 - y);
                    }
                }
                Op::Tanh(a) => {
                    let y = &node.value;
                    let ga = self.acc(&mut grads, *a);
                    for ((o, x), y) in ga.data_mut().iter_mut().zip(g.data()).zip(y.data()) {
                        *o += x * (1.0 - y * y);
                    }
                }
                Op::ConcatCols(parts) => {
                    let mut off = 0;
                    for &p in parts {
                        let w = self.value(p).cols();
                        let gp = self.acc(&mut grads, p);
                        for r in 0..g.rows() {
                            for (o, x) in gp.row_mut(r).iter_mut().zip(&g.row(r)[off..off + w]) {
                                *o += x;
                            }
                        }
                        off += w;
                    }
                }
                Op::ConcatRows(parts) => {
                    let mut off = 0;
                    for &p in parts {
                        let n = self.value(p).len();
                        let gp = self.acc(&mut grads, p);
                        for (o, x) in gp.data_mut().iter_mut().zip(&g.data()[off..off + n]) {
                            *o += x;
                        }
                        off += n;
                    }
                }
                Op::SliceCols(a, start) => {
                    let ga = self.acc(&mut grads, *a);
                    for r in 0..g.rows() {
                        let dst = &mut ga.row_mut(r)[*start..*start + g.cols()];
                        for (o, x) in dst.iter_mut().zip(g.row(r)) {
                            *o += x;
                        }
                    }
                }
                Op::SliceRows(a, start) => {
                    let c = g.cols();
                    let ga = self.acc(&mut grads, *a);
                    let dst = &mut ga.data_mut()[start * c..start * c + g.len()];
                    for (o, x) in dst.iter_mut().zip(g.data()) {
                        *o += x;
                    }
                }
                Op::Transpose(a) => {
                    let gt = g.transpose();
                    self.acc(&mut grads, *a).add_assign(&gt);
                }
                Op::Softmax(a) => {
                    let y = node.value.data();
                    let dot: f64 = g.data().iter().zip(y).map(|(x, y)| x * y).sum();
                    let ga = self.acc(&mut grads, *a);
                    for ((o, x), y) in ga.data_mut().iter_mut().zip(g.data()).zip(y) {
                        *o += y * (x - dot);
                    }
                }
                Op::MeanRows(a) => {
                    let ga = self.acc(&mut grads, *a);
                    let n = ga.rows().max(1) as f64;
                    for r in 0..ga.rows() {
                        for (o, x) in ga.row_mut(r).iter_mut().zip(g.data()) {
                            *o += x / n;
                        }
                    }
                }
                Op::Sum(a) => {
                    let s = g.data()[0];
                    let ga = self.acc(&mut grads, *a);
                    ga.data_mut().iter_mut().for_each(|o| *o += s);
                }
                Op::PairRowMax {
                    left,
                    right,
                    bias,
                    argmax,
                } => {
                    let mut gl = vec![0.0; argmax.len()];
                    let mut gr = vec![0.0; argmax.len()];
                    let mut gbias = 0.0;
                    for (i, am) in argmax.iter().enumerate() {
                        if let Some((lo, hi)) = *am {
                            let s = node.value.data()[i];
                            let d = g.data()[i] * s * (1.0 - s);
                            gl[lo] += d;
                            gr[hi] += d;
                            gbias += d;
                        }
                    }
                    for (o, x) in self.acc(&mut grads, *left).data_mut().iter_mut().zip(&gl) {
                        *o += x;
                    }
                    for (o, x) in self.acc(&mut grads, *right).data_mut().iter_mut().zip(&gr) {
                        *o += x;
                    }
                    self.acc(&mut grads, *bias).data_mut()[0] += gbias;
                }
                Op::CrossEntropy { logits, target, probs } => {
                    let s = g.data()[0];
                    let gz = self.acc(&mut grads, *logits);
                    for (k, (o, p)) in gz.data_mut().iter_mut().zip(probs).enumerate() {
                        let y = if k == *target { 1.0 } else { 0.0 };
                        *o += s * (p - y);
                    }
                }
                Op::BceWithLogits { logits, targets, mask } => {
                    let s = g.data()[0];
                    let z = self.value(*logits).data().to_vec();
                    let gz = self.acc(&mut grads, *logits);
                    for (k, o) in gz.data_mut().iter_mut().enumerate() {
                        if mask[k] {
                            *o += s * (sigmoid(z[k]) - targets[k]);
                        }
                    }
                }
            }
        }
        out
    }

    fn acc<'g>(&self, grads: &'g mut [Option<Matrix>], v: Var) -> &'g mut Matrix {
        let (r, c) = self.nodes[v.0].value.shape();
        grads[v.0].get_or_insert_with(|| Matrix::zeros(r, c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Central-difference check of every parameter entry for a scalar function.
    fn check<F>(store: &mut ParamStore, f: F)
    where
        F: Fn(&mut Graph) -> Var,
    {
        let grads = {
            let mut g = Graph::new(store);
            let loss = f(&mut g);
            g.backward(loss)
        };
        let h = 1e-5;
        for id in store.ids().collect::<Vec<_>>() {
            for k in 0..store.get(id).len() {
                let orig = store.get(id).data()[k];
                store.get_mut(id).data_mut()[k] = orig + h;
                let up = {
                    let mut g = Graph::new(store);
                    let l = f(&mut g);
                    g.scalar(l)
                };
                store.get_mut(id).data_mut()[k] = orig - h;
                let down = {
                    let mut g = Graph::new(store);
                    let l = f(&mut g);
                    g.scalar(l)
                };
                store.get_mut(id).data_mut()[k] = orig;
                let numeric = (up - down) / (2.0 * h);
                let analytic = grads.get(id).map_or(0.0, |m| m.data()[k]);
                let denom = numeric.abs().max(analytic.abs()).max(1e-6);
                assert!(
                    (numeric - analytic).abs() / denom < 1e-5,
                    "{}[{}]: analytic {} vs numeric {}",
                    store.name(id),
                    k,
                    analytic,
                    numeric
                );
            }
        }
    }

    #[test]
    fn elementwise_and_matmul_ops_have_correct_gradients() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut store = ParamStore::new();
        let a = store.add("a", Matrix::uniform(3, 4, 1.0, &mut rng));
        let b = store.add("b", Matrix::uniform(4, 2, 1.0, &mut rng));
        let c = store.add("c", Matrix::uniform(1, 2, 1.0, &mut rng));
        let e = store.add("e", Matrix::uniform(5, 4, 1.0, &mut rng));
        check(&mut store, |g| {
            let a = g.param(a);
            let b = g.param(b);
            let c = g.param(c);
            let rows = g.rows(e, &[4, 1, 4]);
            let x = g.mul(a, rows);
            let x = g.tanh(x);
            let y = g.matmul(x, b);
            let y = g.add_row(y, c);
            let y = g.sigmoid(y);
            let t = g.transpose(y);
            let s = g.slice_rows(t, 1, 1);
            let m = g.mean_rows(y);
            let cat = g.concat_cols(&[s, m]);
            let sm = g.softmax(cat);
            let sc = g.scale(sm, 3.0);
            let head = g.slice_cols(sc, 0, 2);
            let stacked = g.concat_rows(&[head, m]);
            let diff = g.sub(stacked, stacked);
            let both = g.add(stacked, diff);
            let logits = g.slice_rows(both, 0, 1);
            let ce = g.cross_entropy(logits, 1);
            let bce = g.bce_with_logits(m, &[1.0, 0.0], &[true, true]);
            let total = g.add(ce, bce);
            g.sum(total)
        });
    }

    #[test]
    fn pair_row_max_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut store = ParamStore::new();
        let l = store.add("l", Matrix::uniform(5, 1, 2.0, &mut rng));
        let r = store.add("r", Matrix::uniform(5, 1, 2.0, &mut rng));
        let b = store.add("b", Matrix::uniform(1, 1, 1.0, &mut rng));
        let w = store.add("w", Matrix::uniform(5, 1, 1.0, &mut rng));
        check(&mut store, |g| {
            let (l, r, b, w) = (g.param(l), g.param(r), g.param(b), g.param(w));
            let m = g.pair_row_max(l, r, b);
            let p = g.mul(m, w);
            g.sum(p)
        });
    }

    #[test]
    fn single_token_pair_max_is_zero() {
        let store = ParamStore::new();
        let mut g = Graph::new(&store);
        let l = g.constant(Matrix::filled(1, 1, 3.0));
        let r = g.constant(Matrix::filled(1, 1, 3.0));
        let b = g.constant(Matrix::filled(1, 1, 0.0));
        let m = g.pair_row_max(l, r, b);
        assert_eq!(g.value(m).data(), &[0.0]);
    }

    #[test]
    fn masked_bce_ignores_masked_entries() {
        let store = ParamStore::new();
        let mut g = Graph::new(&store);
        let z = g.constant(Matrix::row_vector(vec![100.0, 0.0]));
        let l = g.bce_with_logits(z, &[0.0, 1.0], &[false, true]);
        assert!((g.scalar(l) - 2f64.ln()).abs() < 1e-12);
    }
}
