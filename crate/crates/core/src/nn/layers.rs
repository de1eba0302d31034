use rand::Rng;
use serde::{Deserialize, Serialize};

use super::graph::{Graph, ParamId, ParamStore, Var};
use super::matrix::Matrix;

/// Affine map `x W + b` over row vectors.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Linear {
    pub weight: ParamId,
    pub bias: ParamId,
    pub input: usize,
    pub output: usize,
}

impl Linear {
    pub fn new<R: Rng>(store: &mut ParamStore, name: &str, input: usize, output: usize, rng: &mut R) -> Self {
        let weight = store.add(format!("{name}.weight"), Matrix::xavier(input, output, rng));
        let bias = store.add(format!("{name}.bias"), Matrix::zeros(1, output));
        Linear {
            weight,
            bias,
            input,
            output,
        }
    }

    /// All-zero weights and bias.
    pub fn zeros(store: &mut ParamStore, name: &str, input: usize, output: usize) -> Self {
        let weight = store.add(format!("{name}.weight"), Matrix::zeros(input, output));
        let bias = store.add(format!("{name}.bias"), Matrix::zeros(1, output));
        Linear {
            weight,
            bias,
            input,
            output,
        }
    }

    pub fn forward(&self, g: &mut Graph, x: Var) -> Var {
        let w = g.param(self.weight);
        let b = g.param(self.bias);
        let y = g.matmul(x, w);
        g.add_row(y, b)
    }
}

/// LSTM cell with fused gate weights in `i, f, g, o` order.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Lstm {
    pub w_input: ParamId,
    pub w_hidden: ParamId,
    pub bias: ParamId,
    pub input: usize,
    pub hidden: usize,
}

pub struct LstmState {
    pub h: Var,
    pub c: Var,
}

impl Lstm {
    pub fn new<R: Rng>(store: &mut ParamStore, name: &str, input: usize, hidden: usize, rng: &mut R) -> Self {
        let w_input = store.add(format!("{name}.w_input"), Matrix::xavier(input, 4 * hidden, rng));
        let w_hidden = store.add(format!("{name}.w_hidden"), Matrix::xavier(hidden, 4 * hidden, rng));
        let mut b = Matrix::zeros(1, 4 * hidden);
        // forget gate bias starts at 1
        b.data_mut()[hidden..2 * hidden].fill(1.0);
        let bias = store.add(format!("{name}.bias"), b);
        Lstm {
            w_input,
            w_hidden,
            bias,
            input,
            hidden,
        }
    }

    pub fn zero_state(&self, g: &mut Graph) -> LstmState {
        let h = g.constant(Matrix::zeros(1, self.hidden));
        let c = g.constant(Matrix::zeros(1, self.hidden));
        LstmState { h, c }
    }

    /// Input projections for a whole `L x input` sequence, computed at once.
    pub fn project_inputs(&self, g: &mut Graph, xs: Var) -> Var {
        let w = g.param(self.w_input);
        let b = g.param(self.bias);
        let p = g.matmul(xs, w);
        g.add_row(p, b)
    }

    /// One step given the already-projected input row `x W_x + b`.
    pub fn step_projected(&self, g: &mut Graph, projected: Var, state: &LstmState) -> LstmState {
        let wh = g.param(self.w_hidden);
        let rec = g.matmul(state.h, wh);
        let gates = g.add(projected, rec);
        let n = self.hidden;
        let i = g.slice_cols(gates, 0, n);
        let f = g.slice_cols(gates, n, n);
        let cand = g.slice_cols(gates, 2 * n, n);
        let o = g.slice_cols(gates, 3 * n, n);
        let i = g.sigmoid(i);
        let f = g.sigmoid(f);
        let cand = g.tanh(cand);
        let o = g.sigmoid(o);
        let keep = g.mul(f, state.c);
        let write = g.mul(i, cand);
        let c = g.add(keep, write);
        let tc = g.tanh(c);
        let h = g.mul(o, tc);
        LstmState { h, c }
    }

    pub fn step(&self, g: &mut Graph, x: Var, state: &LstmState) -> LstmState {
        let p = self.project_inputs(g, x);
        self.step_projected(g, p, state)
    }

    /// Run over all rows of `xs` (optionally right-to-left); returns the
    /// hidden state after every step in input order, plus the final state.
    pub fn run(&self, g: &mut Graph, xs: Var, reverse: bool) -> (Vec<Var>, LstmState) {
        let len = g.value(xs).rows();
        let projected = self.project_inputs(g, xs);
        let mut state = self.zero_state(g);
        let mut outputs = vec![state.h; len];
        let order: Vec<usize> = if reverse {
            (0..len).rev().collect()
        } else {
            (0..len).collect()
        };
        for t in order {
            let p = g.slice_rows(projected, t, 1);
            state = self.step_projected(g, p, &state);
            outputs[t] = state.h;
        }
        (outputs, state)
    }
}
