//! User embeddings built from a user's historical tweets.
//!
//! Four methods are provided:
//!
//! * CASCADE: the whole history merged into one document, represented by a
//!   paragraph vector and a personality-network hidden state, fused by
//!   canonical correlation ([`cascade`]).
//! * W-CASCADE: one CASCADE vector per history tweet, combined with
//!   recency weights ([`temporal_weights`], [`weighted_aggregate`]).
//! * ED: per-tweet states of a bidirectional encoder trained to reconstruct
//!   tweets, combined with the same recency weights ([`seq2seq`]).
//! * SUMMARY: as ED, with the encoder trained on a summarization objective.

pub mod cascade;
pub mod fusion;
pub mod paragraph;
pub mod personality;
pub mod seq2seq;

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{TagSet, UserHistory};
use crate::error::{Error, Result};
use crate::preprocess::{strip_sarcasm_tags, tokenize, word_count, EOT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Method {
    Cascade,
    WCascade,
    Ed,
    Summary,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Cascade, Method::WCascade, Method::Ed, Method::Summary];

    /// Name as used in model names (`EX-W-CASCADE`).
    pub fn display_name(self) -> &'static str {
        match self {
            Method::Cascade => "CASCADE",
            Method::WCascade => "W-CASCADE",
            Method::Ed => "ED",
            Method::Summary => "SUMMARY",
        }
    }

    /// Lowercase command-line spelling.
    pub fn cli_name(self) -> &'static str {
        match self {
            Method::Cascade => "cascade",
            Method::WCascade => "wcascade",
            Method::Ed => "ed",
            Method::Summary => "summary",
        }
    }

    /// Methods whose output is normalized to unit length.
    pub fn is_normalized(self) -> bool {
        !matches!(self, Method::Cascade)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.display_name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "cascade" => Ok(Method::Cascade),
            "wcascade" | "w-cascade" => Ok(Method::WCascade),
            "ed" => Ok(Method::Ed),
            "summary" => Ok(Method::Summary),
            other => Err(Error::Config(format!(
                "unknown embedding method {other:?} (expected cascade, wcascade, ed or summary)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingFlags {
    /// The history had no usable tweets; the vector is zero.
    pub empty_history: bool,
    /// The weighted sum cancelled to (near) zero; the vector is zero.
    pub zero_norm: bool,
}

impl EmbeddingFlags {
    pub fn any(&self) -> bool {
        self.empty_history || self.zero_norm
    }

    fn render(&self) -> String {
        let mut parts = Vec::new();
        if self.empty_history {
            parts.push("empty_history");
        }
        if self.zero_norm {
            parts.push("zero_norm");
        }
        if parts.is_empty() {
            "-".into()
        } else {
            parts.join(",")
        }
    }

    fn parse(s: &str) -> std::result::Result<Self, String> {
        let mut f = EmbeddingFlags::default();
        if s == "-" {
            return Ok(f);
        }
        for part in s.split(',') {
            match part {
                "empty_history" => f.empty_history = true,
                "zero_norm" => f.zero_norm = true,
                other => return Err(format!("unknown embedding flag {other:?}")),
            }
        }
        Ok(f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserEmbedding {
    pub user_id: String,
    pub anchor_tweet_id: String,
    pub method: Method,
    pub vector: Vec<f64>,
    pub flags: EmbeddingFlags,
}

impl UserEmbedding {
    pub fn dim(&self) -> usize {
        self.vector.len()
    }

    pub fn norm(&self) -> f64 {
        l2_norm(&self.vector)
    }
}

/// A user's history after tokenization and sarcasm-tag removal, oldest first.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenizedHistory {
    pub user_id: String,
    pub anchor_tweet_id: String,
    pub tweet_ids: Vec<String>,
    pub tweets: Vec<Vec<String>>,
}

impl TokenizedHistory {
    /// Tokenize, strip `tags`, and drop tweets with fewer than `min_words`
    /// words (pass 0 to keep everything non-empty).
    pub fn from_history(history: &UserHistory, tags: &TagSet, min_words: usize) -> Self {
        let mut tweet_ids = Vec::new();
        let mut tweets = Vec::new();
        for t in &history.tweets {
            let tokens = strip_sarcasm_tags(&tokenize(&t.text), tags);
            if tokens.is_empty() || word_count(&tokens) < min_words {
                continue;
            }
            tweet_ids.push(t.id.clone());
            tweets.push(tokens);
        }
        TokenizedHistory {
            user_id: history.user_id.clone(),
            anchor_tweet_id: history.anchor_tweet_id.clone(),
            tweet_ids,
            tweets,
        }
    }

    pub fn len(&self) -> usize {
        self.tweets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tweets.is_empty()
    }

    pub(crate) fn flagged_zero(&self, method: Method, dim: usize) -> UserEmbedding {
        UserEmbedding {
            user_id: self.user_id.clone(),
            anchor_tweet_id: self.anchor_tweet_id.clone(),
            method,
            vector: vec![0.0; dim],
            flags: EmbeddingFlags {
                empty_history: true,
                zero_norm: false,
            },
        }
    }
}

/// Concatenate history tweets chronologically with `<eot>` between tweets.
pub fn merge_history_document(tweets: &[Vec<String>]) -> Result<Vec<String>> {
    if tweets.is_empty() {
        return Err(Error::Domain("cannot merge an empty history".into()));
    }
    let mut doc = Vec::with_capacity(tweets.iter().map(Vec::len).sum::<usize>() + tweets.len());
    for (i, t) in tweets.iter().enumerate() {
        if i > 0 {
            doc.push(EOT.to_string());
        }
        doc.extend(t.iter().cloned());
    }
    Ok(doc)
}

/// Recency weights for a chronologically ordered history of length `n`.
///
/// The sequence is cut into ten contiguous partitions and each tweet gets the
/// 1-based index of its partition: `w(i) = floor(10 (i-1) / n) + 1`. The most
/// recent tweet always carries the largest weight.
pub fn temporal_weights(n: usize) -> Result<Vec<u32>> {
    if n == 0 {
        return Err(Error::Domain("temporal weights need at least one tweet".into()));
    }
    Ok((0..n).map(|i| (10 * i / n) as u32 + 1).collect())
}

pub(crate) fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

const ZERO_NORM: f64 = 1e-12;

/// `s = sum_i w_i x_i`, returned as `s / |s|`. A (near) zero sum yields the
/// zero vector and `true` for the zero-norm flag.
pub fn weighted_aggregate(vectors: &[Vec<f64>], weights: &[f64]) -> Result<(Vec<f64>, bool)> {
    if vectors.is_empty() {
        return Err(Error::Domain("nothing to aggregate".into()));
    }
    if vectors.len() != weights.len() {
        return Err(Error::Domain(format!(
            "{} vectors but {} weights",
            vectors.len(),
            weights.len()
        )));
    }
    let dim = vectors[0].len();
    let mut sum = vec![0.0; dim];
    for (v, &w) in vectors.iter().zip(weights) {
        if v.len() != dim {
            return Err(Error::Domain("vectors differ in dimension".into()));
        }
        for (s, x) in sum.iter_mut().zip(v) {
            *s += w * x;
        }
    }
    let norm = l2_norm(&sum);
    if norm < ZERO_NORM {
        return Ok((vec![0.0; dim], true));
    }
    sum.iter_mut().for_each(|x| *x /= norm);
    Ok((sum, false))
}

/// Recency-weighted, normalized combination of per-tweet vectors.
pub(crate) fn recency_embedding(
    history: &TokenizedHistory,
    method: Method,
    dim: usize,
    per_tweet: Vec<Vec<f64>>,
) -> Result<UserEmbedding> {
    if per_tweet.is_empty() {
        return Ok(history.flagged_zero(method, dim));
    }
    let weights: Vec<f64> = temporal_weights(per_tweet.len())?.into_iter().map(f64::from).collect();
    let (vector, zero) = weighted_aggregate(&per_tweet, &weights)?;
    Ok(UserEmbedding {
        user_id: history.user_id.clone(),
        anchor_tweet_id: history.anchor_tweet_id.clone(),
        method,
        vector,
        flags: EmbeddingFlags {
            empty_history: false,
            zero_norm: zero,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoreHeader {
    pub method: Method,
    pub d_e: usize,
    pub count: usize,
}

/// Write embeddings as text: a JSON header line, then one
/// `user_id anchor_tweet_id flags v1 ... vd` row per embedding, with values
/// printed to 9 significant digits.
pub fn write_embedding_store(path: impl AsRef<Path>, method: Method, embeddings: &[UserEmbedding]) -> Result<()> {
    let path = path.as_ref();
    let d_e = embeddings.first().map_or(0, UserEmbedding::dim);
    let f = File::create(path).map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
    let mut w = BufWriter::new(f);
    let io = |e| Error::io("writing embedding store", e);
    serde_json::to_writer(
        &mut w,
        &StoreHeader {
            method,
            d_e,
            count: embeddings.len(),
        },
    )?;
    w.write_all(b"\n").map_err(io)?;
    for e in embeddings {
        if e.dim() != d_e {
            return Err(Error::Integrity(format!(
                "embedding for {} has dimension {}, expected {d_e}",
                e.anchor_tweet_id,
                e.dim()
            )));
        }
        if e.user_id.contains(char::is_whitespace) || e.anchor_tweet_id.contains(char::is_whitespace) {
            return Err(Error::Integrity(format!(
                "identifier with whitespace cannot be stored: {:?}/{:?}",
                e.user_id, e.anchor_tweet_id
            )));
        }
        write!(w, "{} {} {}", e.user_id, e.anchor_tweet_id, e.flags.render()).map_err(io)?;
        for x in &e.vector {
            write!(w, " {x:.8e}").map_err(io)?;
        }
        w.write_all(b"\n").map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn read_embedding_store(path: impl AsRef<Path>) -> Result<(StoreHeader, Vec<UserEmbedding>)> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
    let bad = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = BufReader::new(f).lines();
    let header: StoreHeader = match lines.next() {
        Some(l) => {
            let l = l.map_err(|e| Error::io("reading embedding store", e))?;
            serde_json::from_str(&l).map_err(|e| bad(1, e.to_string()))?
        }
        None => return Err(bad(1, "missing header".into())),
    };
    let mut out = Vec::with_capacity(header.count);
    for (i, l) in lines.enumerate() {
        let line = i + 2;
        let l = l.map_err(|e| Error::io("reading embedding store", e))?;
        if l.trim().is_empty() {
            continue;
        }
        let mut parts = l.split(' ');
        let (Some(user), Some(anchor), Some(flags)) = (parts.next(), parts.next(), parts.next()) else {
            return Err(bad(line, "truncated row".into()));
        };
        let vector: Vec<f64> = parts
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|e: std::num::ParseFloatError| bad(line, e.to_string()))?;
        if vector.len() != header.d_e {
            return Err(bad(
                line,
                format!("{} values, header says {}", vector.len(), header.d_e),
            ));
        }
        out.push(UserEmbedding {
            user_id: user.to_string(),
            anchor_tweet_id: anchor.to_string(),
            method: header.method,
            vector,
            flags: EmbeddingFlags::parse(flags).map_err(|m| bad(line, m))?,
        });
    }
    if out.len() != header.count {
        return Err(bad(0, format!("header count {} but {} rows", header.count, out.len())));
    }
    Ok((header, out))
}
