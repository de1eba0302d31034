//! CASCADE and W-CASCADE user embeddings.

use serde::{Deserialize, Serialize};

use super::fusion::{fit_fusion, FusionModel};
use super::paragraph::{fnv1a, train_paragraph_vectors, ParagraphConfig, ParagraphModel};
use super::personality::{PersonalityModel, TraitExample, TRAITS};
use super::{merge_history_document, recency_embedding, EmbeddingFlags, Method, TokenizedHistory, UserEmbedding};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeConfig {
    pub paragraph: ParagraphConfig,
    pub d_e: usize,
    pub epsilon: f64,
}

impl Default for CascadeConfig {
    fn default() -> Self {
        CascadeConfig {
            paragraph: ParagraphConfig::default(),
            d_e: 100,
            epsilon: 1e-3,
        }
    }
}

/// Fitted sub-models of the CASCADE pipeline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CascadeModel {
    pub paragraph: ParagraphModel,
    pub personality: PersonalityModel,
    pub fusion: FusionModel,
}

impl CascadeModel {
    pub fn dim(&self) -> usize {
        self.fusion.dim()
    }

    /// `fuse(infer(doc), personality(doc))` for one document.
    pub fn embed_document(&self, doc: &[String]) -> Result<Vec<f64>> {
        let v = self.paragraph.infer_document(doc);
        let p = self.personality.features(doc);
        self.fusion.fuse(&v, &p)
    }
}

/// Fit paragraph vectors on `docs`, then fit the fusion on the paired
/// (inferred document vector, personality feature) views of the same docs.
pub fn fit_cascade(
    docs: &[Vec<String>],
    personality: PersonalityModel,
    config: &CascadeConfig,
) -> Result<CascadeModel> {
    let docs: Vec<Vec<String>> = docs.iter().filter(|d| !d.is_empty()).cloned().collect();
    if docs.is_empty() {
        return Err(Error::Domain("CASCADE needs at least one non-empty document".into()));
    }
    if config.d_e > config.paragraph.dim.min(personality.dim()) {
        return Err(Error::Config(format!(
            "CASCADE dimension {} exceeds min(paragraph dim {}, personality dim {})",
            config.d_e,
            config.paragraph.dim,
            personality.dim()
        )));
    }
    let paragraph = train_paragraph_vectors(&docs, &config.paragraph)?;
    let v: Vec<Vec<f64>> = docs.iter().map(|d| paragraph.infer_document(d)).collect();
    let p: Vec<Vec<f64>> = docs.iter().map(|d| personality.features(d)).collect();
    let fusion = fit_fusion(&v, &p, config.d_e, config.epsilon)?;
    Ok(CascadeModel {
        paragraph,
        personality,
        fusion,
    })
}

/// Embedding of the whole history merged into one document.
pub fn cascade_embed(history: &TokenizedHistory, model: &CascadeModel) -> Result<UserEmbedding> {
    if history.is_empty() {
        return Ok(history.flagged_zero(Method::Cascade, model.dim()));
    }
    let doc = merge_history_document(&history.tweets)?;
    Ok(UserEmbedding {
        user_id: history.user_id.clone(),
        anchor_tweet_id: history.anchor_tweet_id.clone(),
        method: Method::Cascade,
        vector: model.embed_document(&doc)?,
        flags: EmbeddingFlags::default(),
    })
}

/// Per-tweet CASCADE vectors combined with recency weights. `model` should be
/// fitted on individual tweets rather than merged histories.
pub fn wcascade_embed(history: &TokenizedHistory, model: &CascadeModel) -> Result<UserEmbedding> {
    let per_tweet = history
        .tweets
        .iter()
        .map(|t| model.embed_document(t))
        .collect::<Result<Vec<_>>>()?;
    recency_embedding(history, Method::WCascade, model.dim(), per_tweet)
}

/// Proxy trait labels for documents when no personality corpus is available.
///
/// Every token is hashed to one of the five traits; a document has trait `k`
/// when its share of `k`-tokens is above that share's median over `docs`.
/// The labels are a deterministic function of word choice, which is what
/// the network needs to learn a stable document-to-feature map.
pub fn proxy_trait_corpus(docs: &[Vec<String>]) -> Vec<TraitExample> {
    let shares: Vec<[f64; TRAITS]> = docs
        .iter()
        .map(|d| {
            let mut s = [0.0; TRAITS];
            for t in d {
                s[(fnv1a(t.bytes()) % TRAITS as u64) as usize] += 1.0;
            }
            let n = d.len().max(1) as f64;
            s.map(|x| x / n)
        })
        .collect();
    let medians: [f64; TRAITS] = std::array::from_fn(|k| {
        let mut col: Vec<f64> = shares.iter().map(|s| s[k]).collect();
        col.sort_by(f64::total_cmp);
        col.get(col.len() / 2).copied().unwrap_or(0.0)
    });
    docs.iter()
        .zip(&shares)
        .map(|(d, s)| TraitExample {
            tokens: d.clone(),
            traits: std::array::from_fn(|k| s[k] > medians[k]),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::l2_norm;
    use crate::embed::personality::{train_personality_net, PersonalityConfig};

    fn docs() -> Vec<Vec<String>> {
        let words = [
            "sun", "rain", "cat", "dog", "market", "bank", "game", "team", "song", "movie", "coffee", "tea",
        ];
        (0..40)
            .map(|i| {
                (0..6)
                    .map(|j| words[(i * 7 + j * (i % 5 + 1)) % words.len()].to_string())
                    .collect()
            })
            .collect()
    }

    fn model() -> CascadeModel {
        let d = docs();
        let pc = PersonalityConfig {
            hidden: 6,
            word_dim: 6,
            epochs: 5,
            seed: 1,
            ..PersonalityConfig::default()
        };
        let personality = train_personality_net(&proxy_trait_corpus(&d), &pc).unwrap();
        let cc = CascadeConfig {
            paragraph: ParagraphConfig {
                dim: 8,
                epochs: 10,
                infer_epochs: 20,
                seed: 2,
                ..ParagraphConfig::default()
            },
            d_e: 4,
            epsilon: 1e-3,
        };
        fit_cascade(&d, personality, &cc).unwrap()
    }

    fn history(tweets: Vec<Vec<String>>) -> TokenizedHistory {
        TokenizedHistory {
            user_id: "u".into(),
            anchor_tweet_id: "t".into(),
            tweet_ids: (0..tweets.len()).map(|i| i.to_string()).collect(),
            tweets,
        }
    }

    #[test]
    fn composition_and_determinism() {
        let m = model();
        let h = history(docs()[..3].to_vec());
        let e = cascade_embed(&h, &m).unwrap();
        let doc = merge_history_document(&h.tweets).unwrap();
        let manual = m
            .fusion
            .fuse(&m.paragraph.infer_document(&doc), &m.personality.features(&doc))
            .unwrap();
        assert_eq!(e.vector, manual);
        assert_eq!(e.vector, cascade_embed(&h, &m).unwrap().vector);
        assert_eq!(e.dim(), 4);
    }

    #[test]
    fn empty_history_is_flagged() {
        let m = model();
        for e in [
            cascade_embed(&history(vec![]), &m).unwrap(),
            wcascade_embed(&history(vec![]), &m).unwrap(),
        ] {
            assert!(e.flags.empty_history);
            assert_eq!(e.vector, vec![0.0; 4]);
        }
    }

    #[test]
    fn wcascade_single_and_repeated_tweets() {
        let m = model();
        let t = docs()[5].clone();
        let single = wcascade_embed(&history(vec![t.clone()]), &m).unwrap();
        let direct = m.embed_document(&t).unwrap();
        let n = l2_norm(&direct);
        for (a, b) in single.vector.iter().zip(&direct) {
            assert!((a - b / n).abs() < 1e-12);
        }
        let repeated = wcascade_embed(&history(vec![t; 13]), &m).unwrap();
        for (a, b) in repeated.vector.iter().zip(&single.vector) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn dimension_guard() {
        let d = docs();
        let pc = PersonalityConfig {
            hidden: 3,
            word_dim: 4,
            epochs: 0,
            ..PersonalityConfig::default()
        };
        let personality = train_personality_net(&proxy_trait_corpus(&d), &pc).unwrap();
        let cc = CascadeConfig {
            d_e: 4,
            ..CascadeConfig::default()
        };
        assert!(fit_cascade(&d, personality, &cc).unwrap_err().is_usage());
    }
}
