//! Personality network: averaged word vectors, one `tanh` hidden layer and
//! five sigmoid outputs, one per Big-Five trait. The hidden activation is
//! the personality feature of a document.

use log::warn;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{Adam, Gradients, Graph, Linear, Matrix, Optimizer, ParamId, ParamStore, Var};
use crate::preprocess::{build_vocab, encode, Vocabulary, PAD_INDEX};

pub const TRAITS: usize = 5;
pub const MIN_EXAMPLES: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraitExample {
    pub tokens: Vec<String>,
    pub traits: [bool; TRAITS],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersonalityConfig {
    pub hidden: usize,
    pub word_dim: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for PersonalityConfig {
    fn default() -> Self {
        PersonalityConfig {
            hidden: 100,
            word_dim: 50,
            epochs: 50,
            learning_rate: 0.01,
            batch_size: 16,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PersonalityModel {
    pub config: PersonalityConfig,
    vocab: Vocabulary,
    params: ParamStore,
    words: ParamId,
    hidden: Linear,
    output: Linear,
    /// Traits that had a single class in training and were never fitted.
    pub skipped_traits: Vec<usize>,
}

impl PersonalityModel {
    fn new(vocab: Vocabulary, config: &PersonalityConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut params = ParamStore::new();
        let mut table = Matrix::uniform(vocab.len(), config.word_dim, 0.1, &mut rng);
        table.row_mut(PAD_INDEX).fill(0.0);
        let words = params.add("personality.words", table);
        let hidden = Linear::new(
            &mut params,
            "personality.hidden",
            config.word_dim,
            config.hidden,
            &mut rng,
        );
        let output = Linear::new(&mut params, "personality.output", config.hidden, TRAITS, &mut rng);
        PersonalityModel {
            config: config.clone(),
            vocab,
            params,
            words,
            hidden,
            output,
            skipped_traits: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.config.hidden
    }

    fn hidden_state(&self, g: &mut Graph, tokens: &[String]) -> Var {
        let indices = encode(tokens, &self.vocab);
        let x = if indices.is_empty() {
            g.constant(Matrix::zeros(1, self.config.word_dim))
        } else {
            let rows = g.rows(self.words, &indices);
            g.mean_rows(rows)
        };
        let h = self.hidden.forward(g, x);
        g.tanh(h)
    }

    /// Hidden-layer activations for a document (length [`Self::dim`]).
    pub fn features(&self, tokens: &[String]) -> Vec<f64> {
        let mut g = Graph::new(&self.params);
        let h = self.hidden_state(&mut g, tokens);
        g.value(h).data().to_vec()
    }

    /// Trait probabilities for a document.
    pub fn predict(&self, tokens: &[String]) -> [f64; TRAITS] {
        let mut g = Graph::new(&self.params);
        let h = self.hidden_state(&mut g, tokens);
        let z = self.output.forward(&mut g, h);
        let mut out = [0.0; TRAITS];
        for (o, &v) in out.iter_mut().zip(g.value(z).data()) {
            *o = crate::nn::sigmoid(v);
        }
        out
    }

    /// Fraction of fitted (example, trait) decisions predicted correctly at 0.5.
    pub fn accuracy(&self, examples: &[TraitExample]) -> f64 {
        let mut correct = 0usize;
        let mut total = 0usize;
        for ex in examples {
            let p = self.predict(&ex.tokens);
            for k in (0..TRAITS).filter(|k| !self.skipped_traits.contains(k)) {
                total += 1;
                if (p[k] >= 0.5) == ex.traits[k] {
                    correct += 1;
                }
            }
        }
        if total == 0 {
            0.0
        } else {
            correct as f64 / total as f64
        }
    }
}

/// Fit the personality network with masked per-trait binary cross-entropy.
pub fn train_personality_net(examples: &[TraitExample], config: &PersonalityConfig) -> Result<PersonalityModel> {
    if examples.len() < MIN_EXAMPLES {
        return Err(Error::Domain(format!(
            "personality training needs at least {MIN_EXAMPLES} examples, got {}",
            examples.len()
        )));
    }
    if config.hidden == 0 || config.word_dim == 0 || config.batch_size == 0 {
        return Err(Error::Config(
            "personality dimensions and batch size must be positive".into(),
        ));
    }
    let vocab = build_vocab(examples.iter().map(|e| e.tokens.as_slice()));
    let mut model = PersonalityModel::new(vocab, config);

    let mut mask = [true; TRAITS];
    for (k, m) in mask.iter_mut().enumerate() {
        let positives = examples.iter().filter(|e| e.traits[k]).count();
        if positives == 0 || positives == examples.len() {
            warn!("personality trait {k} has a single class; its loss is skipped");
            *m = false;
            model.skipped_traits.push(k);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(1));
    let mut opt = Adam::new(config.learning_rate);
    let mut order: Vec<usize> = (0..examples.len()).collect();
    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        for (b, batch) in order.chunks(config.batch_size).enumerate() {
            let mut grads = Gradients::new(&model.params);
            let mut batch_loss = 0.0;
            for &i in batch {
                let ex = &examples[i];
                let targets: Vec<f64> = ex.traits.iter().map(|&t| f64::from(u8::from(t))).collect();
                let mut g = Graph::new(&model.params);
                let h = model.hidden_state(&mut g, &ex.tokens);
                let z = model.output.forward(&mut g, h);
                let loss = g.bce_with_logits(z, &targets, &mask);
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
            grads.scale(1.0 / batch.len() as f64);
            grads.zero_rows(model.words, &[PAD_INDEX]);
            opt.step(&mut model.params, &grads);
        }
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    /// Trait k is on iff the document uses more "k-high" than "k-low" words.
    fn separable(n: usize, seed: u64) -> Vec<TraitExample> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let traits: [bool; TRAITS] = std::array::from_fn(|_| rng.gen_bool(0.5));
                let mut tokens = Vec::new();
                for (k, &t) in traits.iter().enumerate() {
                    for _ in 0..2 {
                        tokens.push(format!("{}{k}", if t { "hi" } else { "lo" }));
                    }
                }
                for _ in 0..4 {
                    tokens.push(format!("filler{}", rng.gen_range(0..6)));
                }
                tokens.shuffle(&mut rng);
                TraitExample { tokens, traits }
            })
            .collect()
    }

    fn cfg(epochs: usize) -> PersonalityConfig {
        PersonalityConfig {
            hidden: 16,
            word_dim: 16,
            epochs,
            seed: 5,
            ..PersonalityConfig::default()
        }
    }

    #[test]
    fn learns_separable_traits() {
        let data = separable(80, 1);
        let m = train_personality_net(&data, &cfg(50)).unwrap();
        assert!(m.accuracy(&data) >= 0.9, "accuracy {}", m.accuracy(&data));
    }

    #[test]
    fn untrained_is_near_chance() {
        let data = separable(80, 2);
        let m = train_personality_net(&data, &cfg(0)).unwrap();
        let acc = m.accuracy(&data);
        assert!((acc - 0.5).abs() <= 0.15, "accuracy {acc}");
    }

    #[test]
    fn too_few_examples() {
        let data = separable(9, 3);
        assert!(matches!(train_personality_net(&data, &cfg(1)), Err(Error::Domain(_))));
    }

    #[test]
    fn degenerate_trait_is_skipped() {
        let mut data = separable(20, 4);
        for ex in &mut data {
            ex.traits[2] = true;
        }
        let m = train_personality_net(&data, &cfg(2)).unwrap();
        assert_eq!(m.skipped_traits, vec![2]);
    }

    #[test]
    fn features_are_deterministic_and_shaped() {
        let data = separable(20, 6);
        let m = train_personality_net(&data, &cfg(3)).unwrap();
        let a = m.features(&data[0].tokens);
        assert_eq!(a.len(), 16);
        assert!(a.iter().all(|x| x.is_finite()));
        assert_eq!(a, m.features(&data[0].tokens));
        assert_eq!(m.features(&[]).len(), 16);
    }
}
