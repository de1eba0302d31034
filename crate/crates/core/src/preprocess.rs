//! Tokenization, tag stripping, vocabulary construction and word vectors.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::TagSet;
use crate::error::{Error, Result};
use crate::nn::Matrix;

pub const PAD: &str = "<pad>";
pub const UNK: &str = "<unk>";
pub const URL: &str = "<url>";
pub const USER: &str = "<user>";
/// Separator between tweets in a merged history document.
pub const EOT: &str = "<eot>";

pub const PAD_INDEX: usize = 0;
pub const UNK_INDEX: usize = 1;

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Lowercase tweet tokenizer.
///
/// URLs become `<url>`, mentions become `<user>`, hashtags stay whole
/// (`#word`), punctuation characters are split into their own tokens, and
/// in-word apostrophes are kept (`don't`).
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for chunk in text.split_whitespace() {
        let lower = chunk.to_lowercase();
        if lower.starts_with("http://") || lower.starts_with("https://") || lower.starts_with("www.") {
            out.push(URL.to_string());
            continue;
        }
        let chars: Vec<char> = lower.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let next_is_word = chars.get(i + 1).is_some_and(|&n| is_word_char(n));
            if (c == '#' || c == '@') && next_is_word {
                let start = i + 1;
                let mut j = start;
                while j < chars.len() && is_word_char(chars[j]) {
                    j += 1;
                }
                if c == '#' {
                    out.push(std::iter::once('#').chain(chars[start..j].iter().copied()).collect());
                } else {
                    out.push(USER.to_string());
                }
                i = j;
            } else if is_word_char(c) {
                let mut j = i;
                while j < chars.len() {
                    if is_word_char(chars[j]) {
                        j += 1;
                    } else if chars[j] == '\'' && chars.get(j + 1).is_some_and(|&n| is_word_char(n)) {
                        j += 2;
                    } else {
                        break;
                    }
                }
                out.push(chars[i..j].iter().collect());
                i = j;
            } else {
                out.push(c.to_string());
                i += 1;
            }
        }
    }
    out
}

/// A token counts as a word when it contains at least one alphanumeric
/// character; pure punctuation does not.
pub fn is_word(token: &str) -> bool {
    token.chars().any(char::is_alphanumeric)
}

pub fn word_count<S: AsRef<str>>(tokens: &[S]) -> usize {
    tokens.iter().filter(|t| is_word(t.as_ref())).count()
}

pub fn strip_sarcasm_tags(tokens: &[String], tags: &TagSet) -> Vec<String> {
    tokens.iter().filter(|t| !tags.matches(t)).cloned().collect()
}

/// Keep sequences with at least `min_words` words.
pub fn filter_short(sequences: Vec<Vec<String>>, min_words: usize) -> Result<Vec<Vec<String>>> {
    if min_words == 0 {
        return Err(Error::Domain("min_words must be at least 1".into()));
    }
    Ok(sequences.into_iter().filter(|s| word_count(s) >= min_words).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct VocabRepr {
    tokens: Vec<String>,
    freqs: Vec<usize>,
}

/// Token index with `<pad>` at 0 and `<unk>` at 1. Every other entry
/// occurred at least twice in the corpus it was built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "VocabRepr", into = "VocabRepr")]
pub struct Vocabulary {
    tokens: Vec<String>,
    freqs: Vec<usize>,
    index: HashMap<String, usize>,
}

impl From<VocabRepr> for Vocabulary {
    fn from(r: VocabRepr) -> Self {
        let index = r.tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Vocabulary {
            tokens: r.tokens,
            freqs: r.freqs,
            index,
        }
    }
}

impl From<Vocabulary> for VocabRepr {
    fn from(v: Vocabulary) -> Self {
        VocabRepr {
            tokens: v.tokens,
            freqs: v.freqs,
        }
    }
}

#[derive(Serialize)]
struct VocabEntry<'a> {
    token: &'a str,
    index: usize,
    freq: usize,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn index(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn token(&self, index: usize) -> &str {
        &self.tokens[index]
    }

    pub fn freq(&self, index: usize) -> usize {
        self.freqs[index]
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Audit dump: one `{token, index, freq}` object per line.
    pub fn write_jsonl(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let f = File::create(path).map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
        let mut w = BufWriter::new(f);
        for (i, t) in self.tokens.iter().enumerate() {
            serde_json::to_writer(
                &mut w,
                &VocabEntry {
                    token: t,
                    index: i,
                    freq: self.freqs[i],
                },
            )?;
            w.write_all(b"\n").map_err(|e| Error::io("writing vocabulary", e))?;
        }
        w.flush().map_err(|e| Error::io("writing vocabulary", e))
    }
}

/// Build a vocabulary, dropping hapax tokens. Non-special entries are
/// ordered by descending frequency, ties lexicographically.
pub fn build_vocab<'a, I, S>(corpus: I) -> Vocabulary
where
    I: IntoIterator<Item = &'a [S]>,
    S: AsRef<str> + 'a,
{
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for seq in corpus {
        for t in seq {
            let t = t.as_ref();
            if t == PAD || t == UNK {
                continue;
            }
            *counts.entry(t).or_insert(0) += 1;
        }
    }
    let mut kept: Vec<(&str, usize)> = counts.into_iter().filter(|&(_, c)| c >= 2).collect();
    kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));

    let mut tokens = vec![PAD.to_string(), UNK.to_string()];
    let mut freqs = vec![0, 0];
    for (t, c) in kept {
        tokens.push(t.to_string());
        freqs.push(c);
    }
    VocabRepr { tokens, freqs }.into()
}

/// A tweet mapped to vocabulary indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodedTweet {
    pub tweet_id: String,
    pub indices: Vec<usize>,
}

impl EncodedTweet {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

pub fn encode<S: AsRef<str>>(tokens: &[S], vocab: &Vocabulary) -> Vec<usize> {
    tokens
        .iter()
        .map(|t| vocab.index(t.as_ref()).unwrap_or(UNK_INDEX))
        .collect()
}

pub fn decode(indices: &[usize], vocab: &Vocabulary) -> Vec<String> {
    indices.iter().map(|&i| vocab.token(i).to_string()).collect()
}

/// `|V| x d` word-vector table; row `PAD_INDEX` is all zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordEmbeddingMatrix {
    pub matrix: Matrix,
}

impl WordEmbeddingMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.cols()
    }

    pub fn rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.matrix.row(i)
    }
}

/// Where initial word vectors come from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WordVectorSource<'a> {
    /// Every non-padding row drawn at random.
    Random,
    /// GloVe-style text file: `token v1 ... vd` per line.
    File(&'a Path),
}

impl<'a> WordVectorSource<'a> {
    /// `"random"` selects [`WordVectorSource::Random`]; anything else is a path.
    pub fn parse(spec: &'a str) -> Self {
        if spec == "random" {
            WordVectorSource::Random
        } else {
            WordVectorSource::File(Path::new(spec))
        }
    }
}

const INIT_SCALE: f64 = 0.05;

pub fn load_word_vectors(
    source: WordVectorSource<'_>,
    vocab: &Vocabulary,
    dim: usize,
    seed: u64,
) -> Result<WordEmbeddingMatrix> {
    if dim == 0 {
        return Err(Error::Config("word vector dimension must be at least 1".into()));
    }
    let mut found: HashMap<usize, Vec<f64>> = HashMap::new();
    if let WordVectorSource::File(path) = source {
        let f = File::open(path).map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
        for (lineno, line) in BufReader::new(f).lines().enumerate() {
            let line = line.map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
            let mut parts = line.split(' ').filter(|p| !p.is_empty());
            let Some(token) = parts.next() else { continue };
            let values: Vec<f64> = parts
                .map(|p| p.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse {
                    path: path.to_path_buf(),
                    line: lineno + 1,
                    message: e.to_string(),
                })?;
            if values.len() != dim {
                return Err(Error::Config(format!(
                    "{}:{}: vector for {token:?} has {} dimensions, expected {dim}",
                    path.display(),
                    lineno + 1,
                    values.len()
                )));
            }
            if let Some(i) = vocab.index(token) {
                if i != PAD_INDEX {
                    found.insert(i, values);
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut matrix = Matrix::zeros(vocab.len(), dim);
    for i in 1..vocab.len() {
        let row = matrix.row_mut(i);
        match found.get(&i) {
            Some(v) => row.copy_from_slice(v),
            None => row
                .iter_mut()
                .for_each(|x| *x = rng.gen_range(-INIT_SCALE..=INIT_SCALE)),
        }
    }
    Ok(WordEmbeddingMatrix { matrix })
}
