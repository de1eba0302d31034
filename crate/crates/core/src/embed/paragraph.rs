//! Paragraph vectors, distributed bag-of-words variant.
//!
//! Each document owns a vector that is trained to predict the words it
//! contains against negative samples drawn from the smoothed unigram
//! distribution. Inference for a new document freezes the output word table
//! and fits only the new document vector.

use std::collections::BTreeMap;

use log::warn;
use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{sigmoid, Matrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParagraphConfig {
    pub dim: usize,
    pub epochs: usize,
    pub negatives: usize,
    pub learning_rate: f64,
    pub min_learning_rate: f64,
    /// Passes over a document when inferring its vector.
    pub infer_epochs: usize,
    pub seed: u64,
}

impl Default for ParagraphConfig {
    fn default() -> Self {
        ParagraphConfig {
            dim: 100,
            epochs: 20,
            negatives: 5,
            learning_rate: 0.025,
            min_learning_rate: 1e-4,
            infer_epochs: 100,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParagraphModel {
    pub config: ParagraphConfig,
    words: BTreeMap<String, usize>,
    counts: Vec<usize>,
    /// Output word table, `|V| x dim`.
    output: Matrix,
    /// Trained vectors of the training documents, `n_docs x dim`.
    documents: Matrix,
}

pub(crate) fn fnv1a(bytes: impl IntoIterator<Item = u8>) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

fn doc_hash(doc: &[String]) -> u64 {
    fnv1a(doc.iter().flat_map(|t| t.bytes().chain(std::iter::once(0))))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct Sgd<'a> {
    noise: &'a WeightedIndex<f64>,
    negatives: usize,
    scratch: Vec<f64>,
    pending: Vec<(usize, f64)>,
}

impl<'a> Sgd<'a> {
    fn new(noise: &'a WeightedIndex<f64>, negatives: usize, dim: usize) -> Self {
        Sgd {
            noise,
            negatives,
            scratch: vec![0.0; dim],
            pending: Vec::with_capacity(negatives + 1),
        }
    }

    /// Gradient of one positive word plus negatives with respect to the
    /// document vector (into `scratch`) and the touched output rows (into
    /// `pending`, as scalar coefficients of the document vector).
    fn gradients(&mut self, doc: &[f64], word: usize, lr: f64, output: &Matrix, rng: &mut ChaCha8Rng) {
        self.scratch.fill(0.0);
        self.pending.clear();
        for k in 0..=self.negatives {
            let (target, label) = if k == 0 {
                (word, 1.0)
            } else {
                let t = self.noise.sample(rng);
                if t == word {
                    continue;
                }
                (t, 0.0)
            };
            let out = output.row(target);
            let g = lr * (label - sigmoid(dot(doc, out)));
            for (s, o) in self.scratch.iter_mut().zip(out) {
                *s += g * o;
            }
            self.pending.push((target, g));
        }
    }

    fn apply_output(&self, doc: &[f64], output: &mut Matrix) {
        for &(t, g) in &self.pending {
            for (o, d) in output.row_mut(t).iter_mut().zip(doc) {
                *o += g * d;
            }
        }
    }

    fn apply_doc(&self, doc: &mut [f64]) {
        for (d, s) in doc.iter_mut().zip(&self.scratch) {
            *d += s;
        }
    }
}

fn init_vector(dim: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let half = 0.5 / dim as f64;
    (0..dim).map(|_| rng.gen_range(-half..half)).collect()
}

fn noise_table(counts: &[usize]) -> Result<WeightedIndex<f64>> {
    WeightedIndex::new(counts.iter().map(|&c| (c as f64).powf(0.75)))
        .map_err(|e| Error::Numerical(format!("noise distribution: {e}")))
}

/// Train document vectors for `docs` (deterministic under `config.seed`).
pub fn train_paragraph_vectors(docs: &[Vec<String>], config: &ParagraphConfig) -> Result<ParagraphModel> {
    if config.dim == 0 {
        return Err(Error::Config("paragraph vector dimension must be at least 1".into()));
    }
    let mut words: BTreeMap<String, usize> = docs.iter().flatten().map(|t| (t.clone(), 0)).collect();
    if words.is_empty() {
        return Err(Error::Domain("paragraph vector corpus has no tokens".into()));
    }
    for (i, v) in words.values_mut().enumerate() {
        *v = i;
    }
    let mut counts = vec![0usize; words.len()];
    let encoded: Vec<Vec<usize>> = docs
        .iter()
        .map(|d| d.iter().map(|t| words[t.as_str()]).collect())
        .collect();
    for &w in encoded.iter().flatten() {
        counts[w] += 1;
    }
    let noise = noise_table(&counts)?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let dim = config.dim;
    let mut documents = Matrix::zeros(docs.len(), dim);
    for r in 0..docs.len() {
        documents.row_mut(r).copy_from_slice(&init_vector(dim, &mut rng));
    }
    let mut output = Matrix::zeros(words.len(), dim);

    let total = (config.epochs * encoded.iter().map(Vec::len).sum::<usize>()).max(1) as f64;
    let mut seen = 0usize;
    let mut order: Vec<usize> = (0..docs.len()).collect();
    let mut sgd = Sgd::new(&noise, config.negatives, dim);
    let mut doc_buf = vec![0.0; dim];
    for _ in 0..config.epochs {
        rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut rng);
        for &d in &order {
            doc_buf.copy_from_slice(documents.row(d));
            for &w in &encoded[d] {
                let lr = decayed(config, seen as f64 / total);
                seen += 1;
                sgd.gradients(&doc_buf, w, lr, &output, &mut rng);
                sgd.apply_output(&doc_buf, &mut output);
                sgd.apply_doc(&mut doc_buf);
            }
            documents.row_mut(d).copy_from_slice(&doc_buf);
        }
    }
    if !documents.is_finite() || !output.is_finite() {
        return Err(Error::Numerical("paragraph vector training diverged".into()));
    }
    Ok(ParagraphModel {
        config: config.clone(),
        words,
        counts,
        output,
        documents,
    })
}

fn decayed(config: &ParagraphConfig, progress: f64) -> f64 {
    let lr = config.learning_rate - (config.learning_rate - config.min_learning_rate) * progress;
    lr.max(config.min_learning_rate)
}

impl ParagraphModel {
    pub fn dim(&self) -> usize {
        self.config.dim
    }

    pub fn vocabulary_size(&self) -> usize {
        self.words.len()
    }

    pub fn document_count(&self) -> usize {
        self.documents.rows()
    }

    /// Vector learned for training document `i`.
    pub fn document_vector(&self, i: usize) -> &[f64] {
        self.documents.row(i)
    }

    /// Fit a vector for an unseen document. Unknown words are ignored; a
    /// document with no known words maps to the zero vector.
    pub fn infer_document(&self, doc: &[String]) -> Vec<f64> {
        let indices: Vec<usize> = doc.iter().filter_map(|t| self.words.get(t.as_str()).copied()).collect();
        if indices.is_empty() {
            warn!("inferring a paragraph vector for a document with no known words; using zero");
            return vec![0.0; self.dim()];
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed ^ doc_hash(doc));
        let mut v = init_vector(self.dim(), &mut rng);
        let noise = noise_table(&self.counts).expect("counts validated at training time");
        let mut sgd = Sgd::new(&noise, self.config.negatives, self.dim());
        let total = (self.config.infer_epochs * indices.len()).max(1) as f64;
        let mut seen = 0usize;
        for _ in 0..self.config.infer_epochs {
            for &w in &indices {
                let lr = decayed(&self.config, seen as f64 / total);
                seen += 1;
                sgd.gradients(&v, w, lr, &self.output, &mut rng);
                sgd.apply_doc(&mut v);
            }
        }
        v
    }
}

/// Cosine similarity; 0 when either vector is zero.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let na = dot(a, a).sqrt();
    let nb = dot(b, b).sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot(a, b) / (na * nb)
    }
}
