//! Attentional encoder-decoder used for the ED and SUMMARY embeddings.
//!
//! The encoder is a bidirectional LSTM. Its two final states are
//! concatenated and projected to `d_e`; that projection is the tweet
//! embedding and also seeds the decoder. The decoder is an LSTM with
//! general global attention over the encoder outputs
//! (`score(h_t, hbar_s) = h_t W_a hbar_s`) and is trained with teacher
//! forcing to emit either the input itself or a summary of it.

use log::debug;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{recency_embedding, Method, TokenizedHistory, UserEmbedding};
use crate::error::{Error, Result};
use crate::nn::{Adam, Gradients, Graph, Linear, Lstm, LstmState, Matrix, Optimizer, ParamId, ParamStore, Var};
use crate::preprocess::{build_vocab, encode, is_word, Vocabulary, PAD, PAD_INDEX};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    Reconstruct,
    Summarize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Seq2SeqConfig {
    pub embed_dim: usize,
    pub hidden: usize,
    pub d_e: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for Seq2SeqConfig {
    fn default() -> Self {
        Seq2SeqConfig {
            embed_dim: 64,
            hidden: 64,
            d_e: 100,
            epochs: 10,
            learning_rate: 0.005,
            batch_size: 16,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SequenceEncoder {
    pub config: Seq2SeqConfig,
    pub objective: Objective,
    vocab: Vocabulary,
    params: ParamStore,
    embed: ParamId,
    enc_fwd: Lstm,
    enc_bwd: Lstm,
    project: Linear,
    init: Linear,
    dec: Lstm,
    attn: ParamId,
    combine: Linear,
    out: Linear,
    /// Mean decoder loss of every training epoch.
    pub epoch_losses: Vec<f64>,
}

/// Summary target used in place of a summarization corpus: the first
/// `ceil(n / 3)` words of a sentence with `n` words.
pub fn synthetic_summary(tokens: &[String]) -> Vec<String> {
    let words: Vec<&String> = tokens.iter().filter(|t| is_word(t)).collect();
    let keep = words.len().div_ceil(3);
    words.into_iter().take(keep).cloned().collect()
}

struct Encoded {
    outputs: Var,
    state: Var,
}

impl SequenceEncoder {
    fn new(vocab: Vocabulary, objective: Objective, config: &Seq2SeqConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut params = ParamStore::new();
        let symbols = vocab.len() + 2;
        let h = config.hidden;
        let mut table = Matrix::uniform(symbols, config.embed_dim, 0.1, &mut rng);
        table.row_mut(PAD_INDEX).fill(0.0);
        let embed = params.add("s2s.embed", table);
        let enc_fwd = Lstm::new(&mut params, "s2s.enc_fwd", config.embed_dim, h, &mut rng);
        let enc_bwd = Lstm::new(&mut params, "s2s.enc_bwd", config.embed_dim, h, &mut rng);
        let project = Linear::new(&mut params, "s2s.project", 2 * h, config.d_e, &mut rng);
        let init = Linear::new(&mut params, "s2s.init", config.d_e, h, &mut rng);
        let dec = Lstm::new(&mut params, "s2s.dec", config.embed_dim, h, &mut rng);
        let attn = params.add("s2s.attn", Matrix::xavier(h, 2 * h, &mut rng));
        let combine = Linear::new(&mut params, "s2s.combine", 3 * h, h, &mut rng);
        let out = Linear::new(&mut params, "s2s.out", h, symbols, &mut rng);
        SequenceEncoder {
            config: config.clone(),
            objective,
            vocab,
            params,
            embed,
            enc_fwd,
            enc_bwd,
            project,
            init,
            dec,
            attn,
            combine,
            out,
            epoch_losses: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.config.d_e
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    fn bos(&self) -> usize {
        self.vocab.len()
    }

    fn eos(&self) -> usize {
        self.vocab.len() + 1
    }

    /// Vocabulary indices with padding removed.
    fn indices(&self, tokens: &[String]) -> Vec<usize> {
        let kept: Vec<&String> = tokens.iter().filter(|t| t.as_str() != PAD).collect();
        encode(&kept, &self.vocab)
            .into_iter()
            .filter(|&i| i != PAD_INDEX)
            .collect()
    }

    fn encode_graph(&self, g: &mut Graph, indices: &[usize]) -> Encoded {
        let xs = g.rows(self.embed, indices);
        let (fwd, fwd_last) = self.enc_fwd.run(g, xs, false);
        let (bwd, bwd_last) = self.enc_bwd.run(g, xs, true);
        let fwd = g.concat_rows(&fwd);
        let bwd = g.concat_rows(&bwd);
        let outputs = g.concat_cols(&[fwd, bwd]);
        let last = g.concat_cols(&[fwd_last.h, bwd_last.h]);
        let state = self.project.forward(g, last);
        Encoded { outputs, state }
    }

    /// Teacher-forced decoder pass; returns the mean loss and the number of
    /// positions whose argmax equals the target.
    fn decode_graph(&self, g: &mut Graph, enc: &Encoded, target: &[usize]) -> (Var, usize) {
        let init = self.init.forward(g, enc.state);
        let h0 = g.tanh(init);
        let c0 = g.constant(Matrix::zeros(1, self.config.hidden));
        let mut state = LstmState { h: h0, c: c0 };

        let wa = g.param(self.attn);
        let hbar_t = g.transpose(enc.outputs);
        let keys = g.matmul(wa, hbar_t);

        let mut inputs = Vec::with_capacity(target.len() + 1);
        inputs.push(self.bos());
        inputs.extend_from_slice(target);
        let mut gold = target.to_vec();
        gold.push(self.eos());
        let emb = g.rows(self.embed, &inputs);
        let projected = self.dec.project_inputs(g, emb);

        let mut losses = Vec::with_capacity(gold.len());
        let mut correct = 0;
        for (t, &y) in gold.iter().enumerate() {
            let p = g.slice_rows(projected, t, 1);
            state = self.dec.step_projected(g, p, &state);
            let scores = g.matmul(state.h, keys);
            let a = g.softmax(scores);
            let ctx = g.matmul(a, enc.outputs);
            let joined = g.concat_cols(&[ctx, state.h]);
            let mixed = self.combine.forward(g, joined);
            let h_tilde = g.tanh(mixed);
            let logits = self.out.forward(g, h_tilde);
            if argmax(g.value(logits).data()) == y {
                correct += 1;
            }
            losses.push(g.cross_entropy(logits, y));
        }
        let all = g.concat_cols(&losses);
        let total = g.sum(all);
        (g.scale(total, 1.0 / gold.len() as f64), correct)
    }

    /// Projected final encoder state, or `None` when nothing but padding
    /// remains of `tokens`.
    pub fn encode_state(&self, tokens: &[String]) -> Option<Vec<f64>> {
        let indices = self.indices(tokens);
        if indices.is_empty() {
            return None;
        }
        let mut g = Graph::new(&self.params);
        let enc = self.encode_graph(&mut g, &indices);
        Some(g.value(enc.state).data().to_vec())
    }

    /// Teacher-forced token accuracy over `(source, target)` pairs, counting
    /// the end-of-sequence position.
    pub fn token_accuracy(&self, pairs: &[(Vec<String>, Vec<String>)]) -> f64 {
        let mut correct = 0;
        let mut total = 0;
        for (src, tgt) in pairs {
            let s = self.indices(src);
            if s.is_empty() {
                continue;
            }
            let t = self.indices(tgt);
            let mut g = Graph::new(&self.params);
            let enc = self.encode_graph(&mut g, &s);
            let (_, c) = self.decode_graph(&mut g, &enc, &t);
            correct += c;
            total += t.len() + 1;
        }
        if total == 0 {
            0.0
        } else {
            correct as f64 / total as f64
        }
    }
}

fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

/// Train an encoder-decoder on `(source, target)` token pairs.
pub fn train_seq2seq(
    pairs: &[(Vec<String>, Vec<String>)],
    objective: Objective,
    config: &Seq2SeqConfig,
) -> Result<SequenceEncoder> {
    if config.hidden == 0 || config.embed_dim == 0 || config.d_e == 0 {
        return Err(Error::Config("encoder sizes must be at least 1".into()));
    }
    if config.batch_size == 0 {
        return Err(Error::Config("batch size must be at least 1".into()));
    }
    let vocab = build_vocab(pairs.iter().flat_map(|(s, t)| [s.as_slice(), t.as_slice()]));
    let mut model = SequenceEncoder::new(vocab, objective, config);
    let data: Vec<(Vec<usize>, Vec<usize>)> = pairs
        .iter()
        .map(|(s, t)| (model.indices(s), model.indices(t)))
        .filter(|(s, _)| !s.is_empty())
        .collect();
    if data.is_empty() {
        return Err(Error::Domain("encoder-decoder training corpus is empty".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(1));
    let mut opt = Adam::new(config.learning_rate);
    let mut order: Vec<usize> = (0..data.len()).collect();
    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for (b, batch) in order.chunks(config.batch_size).enumerate() {
            let mut grads = Gradients::new(&model.params);
            let mut batch_loss = 0.0;
            for &i in batch {
                let (src, tgt) = &data[i];
                let mut g = Graph::new(&model.params);
                let enc = model.encode_graph(&mut g, src);
                let (loss, _) = model.decode_graph(&mut g, &enc, tgt);
                batch_loss += g.scalar(loss);
                grads.merge(&g.backward(loss));
            }
            if !batch_loss.is_finite() {
                return Err(Error::NonFiniteLoss {
                    epoch,
                    batch: b,
                    loss: batch_loss,
                });
            }
            epoch_loss += batch_loss;
            grads.scale(1.0 / batch.len() as f64);
            grads.zero_rows(model.embed, &[PAD_INDEX]);
            opt.step(&mut model.params, &grads);
        }
        let mean = epoch_loss / data.len() as f64;
        debug!("{objective:?} epoch {epoch}: loss {mean:.4}");
        model.epoch_losses.push(mean);
    }
    Ok(model)
}

/// Encoder trained to reproduce its input.
pub fn train_autoencoder(corpus: &[Vec<String>], config: &Seq2SeqConfig) -> Result<SequenceEncoder> {
    let pairs: Vec<_> = corpus.iter().map(|s| (s.clone(), s.clone())).collect();
    train_seq2seq(&pairs, Objective::Reconstruct, config)
}

/// Encoder trained to emit a summary of its input.
pub fn train_summarizer(pairs: &[(Vec<String>, Vec<String>)], config: &Seq2SeqConfig) -> Result<SequenceEncoder> {
    train_seq2seq(pairs, Objective::Summarize, config)
}

fn encoder_embed(history: &TokenizedHistory, encoder: &SequenceEncoder, method: Method) -> Result<UserEmbedding> {
    let states: Vec<Vec<f64>> = history.tweets.iter().filter_map(|t| encoder.encode_state(t)).collect();
    recency_embedding(history, method, encoder.dim(), states)
}

pub fn ed_embed(history: &TokenizedHistory, encoder: &SequenceEncoder) -> Result<UserEmbedding> {
    encoder_embed(history, encoder, Method::Ed)
}

pub fn summary_embed(history: &TokenizedHistory, summarizer: &SequenceEncoder) -> Result<UserEmbedding> {
    encoder_embed(history, summarizer, Method::Summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::l2_norm;
    use rand::Rng;

    fn toy_corpus(n: usize, vocab: usize, seed: u64) -> Vec<Vec<String>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let len = rng.gen_range(3..7);
                (0..len).map(|_| format!("w{}", rng.gen_range(0..vocab))).collect()
            })
            .collect()
    }

    fn small(epochs: usize) -> Seq2SeqConfig {
        Seq2SeqConfig {
            embed_dim: 16,
            hidden: 16,
            d_e: 8,
            epochs,
            learning_rate: 0.01,
            batch_size: 8,
            seed: 11,
        }
    }

    #[test]
    fn summary_prefix() {
        let t: Vec<String> = ["i", "love", ",", "mondays", "so", "much", "!"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(synthetic_summary(&t), vec!["i", "love"]);
        assert!(synthetic_summary(&[]).is_empty());
    }

    #[test]
    fn padding_invariance_and_shape() {
        let corpus = toy_corpus(20, 10, 1);
        let m = train_autoencoder(&corpus, &small(1)).unwrap();
        let mut padded = corpus[0].clone();
        padded.push(PAD.to_string());
        padded.insert(0, PAD.to_string());
        let a = m.encode_state(&corpus[0]).unwrap();
        assert_eq!(a.len(), 8);
        assert_eq!(a, m.encode_state(&padded).unwrap());
        assert!(m.encode_state(&[PAD.to_string()]).is_none());
        assert!(m.encode_state(&[]).is_none());
    }

    #[test]
    fn ed_embedding_properties() {
        let corpus = toy_corpus(20, 10, 2);
        let m = train_autoencoder(&corpus, &small(1)).unwrap();
        let h = |tweets: Vec<Vec<String>>| TokenizedHistory {
            user_id: "u".into(),
            anchor_tweet_id: "a".into(),
            tweet_ids: (0..tweets.len()).map(|i| i.to_string()).collect(),
            tweets,
        };
        let one = ed_embed(&h(vec![corpus[3].clone()]), &m).unwrap();
        let s = m.encode_state(&corpus[3]).unwrap();
        let n = l2_norm(&s);
        for (a, b) in one.vector.iter().zip(&s) {
            assert!((a - b / n).abs() < 1e-12);
        }
        let many = ed_embed(&h(vec![corpus[3].clone(); 17]), &m).unwrap();
        for (a, b) in many.vector.iter().zip(&one.vector) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((l2_norm(&ed_embed(&h(corpus[..9].to_vec()), &m).unwrap().vector) - 1.0).abs() < 1e-12);
        assert!(ed_embed(&h(vec![]), &m).unwrap().flags.empty_history);
    }

    #[test]
    fn errors() {
        assert!(train_autoencoder(&[], &small(1)).is_err());
        let bad = Seq2SeqConfig { hidden: 0, ..small(1) };
        assert!(train_autoencoder(&toy_corpus(3, 5, 0), &bad).unwrap_err().is_usage());
    }
}
