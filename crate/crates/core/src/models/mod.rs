//! Tweet classifiers: the SIARN baseline and the exclusive (user embedding
//! only) and inclusive (tweet features plus user embedding) heads.

mod siarn;

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use log::{info, warn};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use siarn::Siarn;

use crate::corpus::Label;
use crate::embed::Method;
use crate::error::{Error, Result};
use crate::eval::Confusion;
use crate::nn::{softmax_in_place, Gradients, Graph, Linear, Matrix, Optimizer, ParamStore, RmsProp, Var};
use crate::preprocess::{WordEmbeddingMatrix, PAD_INDEX};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    Siarn,
    Exclusive(Method),
    Inclusive(Method),
}

impl ModelKind {
    pub fn method(self) -> Option<Method> {
        match self {
            ModelKind::Siarn => None,
            ModelKind::Exclusive(m) | ModelKind::Inclusive(m) => Some(m),
        }
    }

    pub fn uses_text(self) -> bool {
        !matches!(self, ModelKind::Exclusive(_))
    }

    pub fn all() -> Vec<ModelKind> {
        let mut out = vec![ModelKind::Siarn];
        out.extend(Method::ALL.map(ModelKind::Exclusive));
        out.extend(Method::ALL.map(ModelKind::Inclusive));
        out
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelKind::Siarn => f.write_str("SIARN"),
            ModelKind::Exclusive(m) => write!(f, "EX-{}", m.display_name()),
            ModelKind::Inclusive(m) => write!(f, "IN-{}", m.display_name()),
        }
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        if lower == "siarn" {
            return Ok(ModelKind::Siarn);
        }
        let bad = || {
            Error::Config(format!(
                "unknown model {s:?} (expected siarn, ex-<method> or in-<method>)"
            ))
        };
        let (prefix, rest) = lower.split_once('-').ok_or_else(bad)?;
        let method: Method = rest.parse().map_err(|_| bad())?;
        match prefix {
            "ex" => Ok(ModelKind::Exclusive(method)),
            "in" => Ok(ModelKind::Inclusive(method)),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    /// Hidden size of the SIARN recurrent composition.
    pub siarn_hidden: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 30,
            learning_rate: 0.001,
            batch_size: 16,
            siarn_hidden: 100,
            seed: 0,
        }
    }
}

/// One classifier input. `indices` may be empty for exclusive models and
/// `embedding` may be absent for SIARN.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub tweet_id: String,
    pub indices: Vec<usize>,
    pub embedding: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub tweet_id: String,
    /// `[p(non-sarcastic), p(sarcastic)]`.
    pub probabilities: [f64; 2],
    pub label: Label,
}

impl Prediction {
    fn new(tweet_id: &str, probabilities: [f64; 2]) -> Self {
        Prediction {
            tweet_id: tweet_id.to_string(),
            probabilities,
            label: Label::from_bool(probabilities[1] > probabilities[0]),
        }
    }

    pub fn p_sarcastic(&self) -> f64 {
        self.probabilities[1]
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Classifier {
    pub kind: ModelKind,
    params: ParamStore,
    siarn: Option<Siarn>,
    head: Linear,
    d_e: usize,
}

fn softmax2(z: &[f64]) -> [f64; 2] {
    let mut p = [z[0], z[1]];
    softmax_in_place(&mut p);
    p
}

impl Classifier {
    /// Fresh parameters. `words` initializes the SIARN word table and is
    /// required for SIARN and inclusive kinds; `d_e` is the user-embedding
    /// size and is ignored by SIARN.
    pub fn new(kind: ModelKind, words: Option<&WordEmbeddingMatrix>, d_e: usize, config: &TrainConfig) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut params = ParamStore::new();
        let siarn = if kind.uses_text() {
            let w = words.ok_or_else(|| Error::Config(format!("{kind} needs word vectors")))?;
            if config.siarn_hidden == 0 {
                return Err(Error::Config("SIARN hidden size must be at least 1".into()));
            }
            Some(Siarn::new(&mut params, w.matrix.clone(), config.siarn_hidden, &mut rng))
        } else {
            None
        };
        let e_dim = if kind.method().is_some() { d_e } else { 0 };
        if kind.method().is_some() && d_e == 0 {
            return Err(Error::Config("user embedding dimension must be at least 1".into()));
        }
        let input = siarn.map_or(0, |s| s.dim()) + e_dim;
        // Without text the model is a logistic regression on e; a random start
        // would add a random projection of user-specific noise to the logits.
        let head = if siarn.is_some() {
            Linear::new(&mut params, "head", input, 2, &mut rng)
        } else {
            Linear::zeros(&mut params, "head", input, 2)
        };
        Ok(Classifier {
            kind,
            params,
            siarn,
            head,
            d_e: e_dim,
        })
    }

    pub fn params(&self) -> &ParamStore {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamStore {
        &mut self.params
    }

    pub fn siarn(&self) -> Option<&Siarn> {
        self.siarn.as_ref()
    }

    pub fn head(&self) -> &Linear {
        &self.head
    }

    pub fn embedding_dim(&self) -> usize {
        self.d_e
    }

    fn embedding_var(&self, g: &mut Graph, inst: &Instance) -> Result<Var> {
        let e = inst
            .embedding
            .as_ref()
            .ok_or_else(|| Error::Alignment(format!("no user embedding for tweet {}", inst.tweet_id)))?;
        if e.len() != self.d_e {
            return Err(Error::Config(format!(
                "{} expects {}-dimensional user embeddings, got {}",
                self.kind,
                self.d_e,
                e.len()
            )));
        }
        Ok(g.constant(Matrix::row_vector(e.clone())))
    }

    fn logits(&self, g: &mut Graph, inst: &Instance) -> Result<Var> {
        let mut parts = Vec::with_capacity(2);
        if let Some(s) = &self.siarn {
            parts.push(s.forward(g, &inst.indices)?.features);
        }
        if self.kind.method().is_some() {
            parts.push(self.embedding_var(g, inst)?);
        }
        let x = if parts.len() == 1 {
            parts[0]
        } else {
            g.concat_cols(&parts)
        };
        Ok(self.head.forward(g, x))
    }

    pub fn probabilities(&self, inst: &Instance) -> Result<[f64; 2]> {
        let mut g = Graph::new(&self.params);
        let z = self.logits(&mut g, inst)?;
        Ok(softmax2(g.value(z).data()))
    }

    /// Cross-entropy of one labeled instance and its parameter gradients.
    pub fn loss_and_gradients(&self, inst: &Instance, label: Label) -> Result<(f64, Gradients)> {
        let mut g = Graph::new(&self.params);
        let z = self.logits(&mut g, inst)?;
        let loss = g.cross_entropy(z, label.index());
        let mut grads = g.backward(loss);
        if let Some(s) = &self.siarn {
            grads.zero_rows(s.words, &[PAD_INDEX]);
        }
        Ok((g.scalar(loss), grads))
    }

    /// SIARN feature vector `[v_a; v_c]`.
    pub fn siarn_features(&self, indices: &[usize]) -> Result<Vec<f64>> {
        let s = self
            .siarn
            .as_ref()
            .ok_or_else(|| Error::Config(format!("{} has no SIARN part", self.kind)))?;
        let mut g = Graph::new(&self.params);
        let v = s.forward(&mut g, indices)?;
        Ok(g.value(v.features).data().to_vec())
    }

    /// Per-word SIARN attention weights.
    pub fn siarn_attention(&self, indices: &[usize]) -> Result<Vec<f64>> {
        let s = self
            .siarn
            .as_ref()
            .ok_or_else(|| Error::Config(format!("{} has no SIARN part", self.kind)))?;
        let mut g = Graph::new(&self.params);
        let v = s.forward(&mut g, indices)?;
        Ok(g.value(v.attention).data().to_vec())
    }

    fn head_on(&self, x: &[f64]) -> [f64; 2] {
        let w = self.params.get(self.head.weight);
        let b = self.params.get(self.head.bias).data();
        let mut z = [b[0], b[1]];
        for (i, &xi) in x.iter().enumerate() {
            z[0] += xi * w.get(i, 0);
            z[1] += xi * w.get(i, 1);
        }
        softmax2(&z)
    }

    /// Output distribution of an exclusive model; never sees tweet text.
    pub fn exclusive_forward(&self, e: &[f64]) -> Result<[f64; 2]> {
        if !matches!(self.kind, ModelKind::Exclusive(_)) {
            return Err(Error::Config(format!("{} is not an exclusive model", self.kind)));
        }
        if e.len() != self.d_e {
            return Err(Error::Config(format!(
                "expected {} embedding dimensions, got {}",
                self.d_e,
                e.len()
            )));
        }
        Ok(self.head_on(e))
    }

    /// Output distribution of an inclusive model for given features.
    pub fn inclusive_forward(&self, f: &[f64], e: &[f64]) -> Result<[f64; 2]> {
        let s = match (self.kind, &self.siarn) {
            (ModelKind::Inclusive(_), Some(s)) => s,
            _ => return Err(Error::Config(format!("{} is not an inclusive model", self.kind))),
        };
        if f.len() != s.dim() || e.len() != self.d_e {
            return Err(Error::Config(format!(
                "expected {}+{} input dimensions, got {}+{}",
                s.dim(),
                self.d_e,
                f.len(),
                e.len()
            )));
        }
        let x: Vec<f64> = f.iter().chain(e).copied().collect();
        Ok(self.head_on(&x))
    }

    /// Predictions in input order. Items fail individually (for example on a
    /// missing user embedding) without stopping the rest. Batches are spread
    /// over worker threads; results do not depend on `batch_size`.
    pub fn predict(&self, instances: &[Instance], batch_size: usize) -> Vec<Result<Prediction>> {
        let batch_size = batch_size.max(1);
        let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
        let batches: Vec<&[Instance]> = instances.chunks(batch_size).collect();
        let mut out: Vec<Vec<Result<Prediction>>> = Vec::with_capacity(batches.len());
        for group in batches.chunks(workers) {
            let results: Vec<Vec<Result<Prediction>>> = std::thread::scope(|scope| {
                let handles: Vec<_> = group
                    .iter()
                    .map(|batch| {
                        scope.spawn(move || {
                            batch
                                .iter()
                                .map(|inst| Ok(Prediction::new(&inst.tweet_id, self.probabilities(inst)?)))
                                .collect::<Vec<_>>()
                        })
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("prediction worker panicked"))
                    .collect()
            });
            out.extend(results);
        }
        out.into_iter().flatten().collect()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_json(path.as_ref(), self)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f = File::open(path).map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
        Ok(serde_json::from_reader(std::io::BufReader::new(f))?)
    }
}

pub(crate) fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
    let mut w = BufWriter::new(f);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_f1: f64,
    pub valid_f1: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainedModel {
    pub classifier: Classifier,
    pub metrics: Vec<EpochMetrics>,
    /// 1-based epoch whose parameters were kept.
    pub selected_epoch: usize,
}

/// Checkpoint sidecar contents.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelSidecar {
    pub model_kind: String,
    pub config: TrainConfig,
    pub metrics: Vec<EpochMetrics>,
    pub selected_epoch: usize,
}

impl TrainedModel {
    pub fn sidecar(&self, config: &TrainConfig) -> ModelSidecar {
        ModelSidecar {
            model_kind: self.classifier.kind.to_string(),
            config: config.clone(),
            metrics: self.metrics.clone(),
            selected_epoch: self.selected_epoch,
        }
    }
}

fn f1_on(classifier: &Classifier, data: &[(Instance, Label)]) -> Result<f64> {
    let mut pairs = Vec::with_capacity(data.len());
    for (inst, gold) in data {
        let p = classifier.probabilities(inst)?;
        pairs.push((Label::from_bool(p[1] > p[0]), *gold));
    }
    Ok(Confusion::from_pairs(pairs).f1())
}

/// Minimize cross-entropy with RMSProp for exactly `config.epochs` epochs and
/// keep the parameters of the epoch with the best validation F1 (earliest on
/// ties; the final epoch when there is no validation data).
pub fn train(
    kind: ModelKind,
    train_data: &[(Instance, Label)],
    valid_data: &[(Instance, Label)],
    words: Option<&WordEmbeddingMatrix>,
    d_e: usize,
    config: &TrainConfig,
) -> Result<TrainedModel> {
    if train_data.is_empty() {
        return Err(Error::Domain("training set is empty".into()));
    }
    if config.batch_size == 0 || config.learning_rate <= 0.0 {
        return Err(Error::Config("batch size and learning rate must be positive".into()));
    }
    let mut model = Classifier::new(kind, words, d_e, config)?;
    let mut opt = RmsProp::new(config.learning_rate);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(0x5eed));
    let mut order: Vec<usize> = (0..train_data.len()).collect();
    let mut metrics = Vec::with_capacity(config.epochs);
    let mut best: Option<(f64, usize, ParamStore)> = None;

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let mut total_loss = 0.0;
        for (b, batch) in order.chunks(config.batch_size).enumerate() {
            let mut grads = Gradients::new(&model.params);
            let mut batch_loss = 0.0;
            for &i in batch {
                let (inst, label) = &train_data[i];
                let (loss, g) = model.loss_and_gradients(inst, *label)?;
                batch_loss += loss;
                grads.merge(&g);
            }
            if !batch_loss.is_finite() || !grads.is_finite() {
                return Err(Error::NonFiniteLoss {
                    epoch,
                    batch: b,
                    loss: batch_loss,
                });
            }
            total_loss += batch_loss;
            grads.scale(1.0 / batch.len() as f64);
            opt.step(&mut model.params, &grads);
        }
        let train_f1 = f1_on(&model, train_data)?;
        let valid_f1 = if valid_data.is_empty() {
            None
        } else {
            Some(f1_on(&model, valid_data)?)
        };
        let m = EpochMetrics {
            epoch,
            train_loss: total_loss / train_data.len() as f64,
            train_f1,
            valid_f1,
        };
        info!(
            "{kind} epoch {epoch}: loss {:.4}, train F1 {:.3}, valid F1 {}",
            m.train_loss,
            m.train_f1,
            valid_f1.map_or("-".to_string(), |v| format!("{v:.3}"))
        );
        let score = valid_f1.unwrap_or(f64::NEG_INFINITY);
        if valid_f1.is_none() || best.as_ref().is_none_or(|(s, _, _)| score > *s) {
            best = Some((score, epoch, model.params.clone()));
        }
        metrics.push(m);
    }
    let selected_epoch = match best {
        Some((_, epoch, params)) => {
            model.params = params;
            epoch
        }
        None => {
            warn!("zero training epochs; returning the initial parameters");
            0
        }
    };
    Ok(TrainedModel {
        classifier: model,
        metrics,
        selected_epoch,
    })
}

#[derive(Serialize)]
struct PredictionRow<'a> {
    tweet_id: &'a str,
    p_sarcastic: f64,
    label: Label,
}

/// JSONL with one `{tweet_id, p_sarcastic, label}` object per line.
pub fn write_predictions(path: impl AsRef<Path>, predictions: &[Prediction]) -> Result<()> {
    let path = path.as_ref();
    let f = File::create(path).map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
    let mut w = BufWriter::new(f);
    for p in predictions {
        serde_json::to_writer(
            &mut w,
            &PredictionRow {
                tweet_id: &p.tweet_id,
                p_sarcastic: p.p_sarcastic(),
                label: p.label,
            },
        )?;
        w.write_all(b"\n").map_err(|e| Error::io("writing predictions", e))?;
    }
    w.flush().map_err(|e| Error::io("writing predictions", e))
}
