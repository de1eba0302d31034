//! Single-dimension intra-attention feature extractor.
//!
//! Every word pair `i < j` gets one scalar score
//! `s_ij = sigmoid(p_l . w_i + p_r . w_j + b)`. A word's attention logit is
//! the largest score of any pair it belongs to, the logits are normalized by
//! a softmax, and `v_a = sum_i a_i w_i`. An LSTM over the same words gives
//! `v_c` from its final state. The feature vector is `[v_a; v_c]`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{Graph, Lstm, Matrix, ParamId, ParamStore, Var};
use crate::preprocess::PAD_INDEX;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Siarn {
    pub words: ParamId,
    pub pair_left: ParamId,
    pub pair_right: ParamId,
    pub pair_bias: ParamId,
    pub lstm: Lstm,
    pub word_dim: usize,
    pub hidden: usize,
}

pub(crate) struct SiarnVars {
    pub attention: Var,
    pub features: Var,
}

impl Siarn {
    pub fn new<R: Rng>(store: &mut ParamStore, mut words: Matrix, hidden: usize, rng: &mut R) -> Self {
        let word_dim = words.cols();
        words.row_mut(PAD_INDEX).fill(0.0);
        let words = store.add("siarn.words", words);
        let pair_left = store.add("siarn.pair_left", Matrix::xavier(word_dim, 1, rng));
        let pair_right = store.add("siarn.pair_right", Matrix::xavier(word_dim, 1, rng));
        let pair_bias = store.add("siarn.pair_bias", Matrix::zeros(1, 1));
        let lstm = Lstm::new(store, "siarn.lstm", word_dim, hidden, rng);
        Siarn {
            words,
            pair_left,
            pair_right,
            pair_bias,
            lstm,
            word_dim,
            hidden,
        }
    }

    pub fn dim(&self) -> usize {
        self.word_dim + self.hidden
    }

    pub(crate) fn forward(&self, g: &mut Graph, indices: &[usize]) -> Result<SiarnVars> {
        if indices.is_empty() {
            return Err(Error::Domain("SIARN needs at least one token".into()));
        }
        let x = g.rows(self.words, indices);
        let pl = g.param(self.pair_left);
        let pr = g.param(self.pair_right);
        let b = g.param(self.pair_bias);
        let left = g.matmul(x, pl);
        let right = g.matmul(x, pr);
        let pooled = g.pair_row_max(left, right, b);
        let attention = g.softmax(pooled);
        let at = g.transpose(attention);
        let v_a = g.matmul(at, x);
        let (_, last) = self.lstm.run(g, x, false);
        let features = g.concat_cols(&[v_a, last.h]);
        Ok(SiarnVars { attention, features })
    }
}
