use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{TagSet, DEFAULT_SARCASM_TAGS};
use crate::embed::cascade::CascadeConfig;
use crate::embed::paragraph::ParagraphConfig;
use crate::embed::personality::PersonalityConfig;
use crate::embed::seq2seq::Seq2SeqConfig;
use crate::embed::Method;
use crate::error::{Error, Result};
use crate::models::{ModelKind, TrainConfig};
use crate::split::SplitSpec;

/// Everything a pipeline run depends on. Loaded from TOML; every key can be
/// overridden as `section.key=value`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub data: DataConfig,
    pub split: SplitConfig,
    pub embed: EmbedConfig,
    pub train: TrainSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub dataset: PathBuf,
    pub histories: Option<PathBuf>,
    /// `"random"` or a GloVe-style text file.
    pub word_vectors: String,
    pub tags: Vec<String>,
    /// Training and history tweets with fewer words are dropped.
    pub min_words: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub n_buckets: usize,
    pub valid_bucket: Option<usize>,
    pub test_bucket: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbedConfig {
    pub method: String,
    pub d_e: usize,
    pub paragraph_dim: usize,
    pub paragraph_epochs: usize,
    pub paragraph_infer_epochs: usize,
    pub personality_hidden: usize,
    pub personality_word_dim: usize,
    pub personality_epochs: usize,
    pub fusion_epsilon: f64,
    pub encoder_embed_dim: usize,
    pub encoder_hidden: usize,
    pub encoder_epochs: usize,
    pub encoder_learning_rate: f64,
    pub encoder_batch_size: usize,
    /// Inference threads; 0 uses every available core.
    pub workers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub model: String,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub word_dim: usize,
    pub siarn_hidden: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 0,
            out_dir: PathBuf::from("out"),
            data: DataConfig::default(),
            split: SplitConfig::default(),
            embed: EmbedConfig::default(),
            train: TrainSection::default(),
        }
    }
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig {
            dataset: PathBuf::new(),
            histories: None,
            word_vectors: "random".into(),
            tags: DEFAULT_SARCASM_TAGS.iter().map(|s| s.to_string()).collect(),
            min_words: 3,
        }
    }
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            n_buckets: 10,
            valid_bucket: None,
            test_bucket: None,
        }
    }
}

impl Default for EmbedConfig {
    fn default() -> Self {
        let p = ParagraphConfig::default();
        let s = Seq2SeqConfig::default();
        let pers = PersonalityConfig::default();
        EmbedConfig {
            method: "wcascade".into(),
            d_e: 100,
            paragraph_dim: p.dim,
            paragraph_epochs: p.epochs,
            paragraph_infer_epochs: p.infer_epochs,
            personality_hidden: pers.hidden,
            personality_word_dim: pers.word_dim,
            personality_epochs: pers.epochs,
            fusion_epsilon: 1e-3,
            encoder_embed_dim: 32,
            encoder_hidden: 32,
            encoder_epochs: 5,
            encoder_learning_rate: s.learning_rate,
            encoder_batch_size: s.batch_size,
            workers: 0,
        }
    }
}

impl Default for TrainSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        TrainSection {
            model: "siarn".into(),
            epochs: t.epochs,
            learning_rate: t.learning_rate,
            batch_size: t.batch_size,
            word_dim: 100,
            siarn_hidden: t.siarn_hidden,
        }
    }
}

fn parse_override(raw: &str) -> Result<(Vec<String>, toml::Value)> {
    let (key, value) = raw
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override {raw:?} is not key=value")))?;
    let path: Vec<String> = key.trim().split('.').map(str::to_string).collect();
    if path.iter().any(String::is_empty) {
        return Err(Error::Config(format!("bad override key {key:?}")));
    }
    let value = value.trim();
    // Bare words that are not valid TOML values are taken as strings.
    let parsed = toml::from_str::<toml::Table>(&format!("v = {value}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(value.to_string()));
    Ok((path, parsed))
}

fn set_path(table: &mut toml::Table, path: &[String], value: toml::Value) {
    let (last, parents) = path.split_last().expect("non-empty path");
    let mut cur = table;
    for p in parents {
        cur = cur
            .entry(p.clone())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .expect("override path crosses a non-table value");
    }
    cur.insert(last.clone(), value);
}

impl PipelineConfig {
    /// Parse TOML text, apply `section.key=value` overrides, and resolve
    /// relative paths against `base`.
    pub fn from_toml(text: &str, overrides: &[String], base: Option<&Path>) -> Result<Self> {
        let mut table: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        for raw in overrides {
            let (path, value) = parse_override(raw)?;
            if let Some((first, _)) = path.split_first() {
                if path.len() > 1 && table.get(first).is_some_and(|v| !v.is_table()) {
                    return Err(Error::Config(format!("{first} is not a section")));
                }
            }
            set_path(&mut table, &path, value);
        }
        let mut cfg: PipelineConfig = table
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        if let Some(base) = base {
            cfg.resolve_paths(base);
        }
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>, overrides: &[String]) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text, overrides, path.parent())
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() && !p.as_os_str().is_empty() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.out_dir);
        fix(&mut self.data.dataset);
        if let Some(h) = self.data.histories.as_mut() {
            fix(h);
        }
        if self.data.word_vectors != "random" {
            let mut p = PathBuf::from(&self.data.word_vectors);
            fix(&mut p);
            self.data.word_vectors = p.to_string_lossy().into_owned();
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    /// SHA-256 of the canonical TOML rendering.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    pub fn tag_set(&self) -> Result<TagSet> {
        TagSet::new(&self.data.tags)
    }

    pub fn method(&self) -> Result<Method> {
        self.embed.method.parse()
    }

    pub fn model(&self) -> Result<ModelKind> {
        self.train.model.parse()
    }

    pub fn split_spec(&self) -> Result<SplitSpec> {
        let n = self.split.n_buckets;
        let spec = match (self.split.valid_bucket, self.split.test_bucket) {
            (None, None) => SplitSpec::default_for(n),
            (Some(v), Some(t)) => SplitSpec::with_holdout(n, v, t),
            _ => {
                return Err(Error::Config(
                    "set both split.valid_bucket and split.test_bucket, or neither".into(),
                ))
            }
        };
        spec.validate(n)?;
        Ok(spec)
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.train.epochs,
            learning_rate: self.train.learning_rate,
            batch_size: self.train.batch_size,
            siarn_hidden: self.train.siarn_hidden,
            seed: self.seed,
        }
    }

    pub fn cascade_config(&self) -> CascadeConfig {
        CascadeConfig {
            paragraph: ParagraphConfig {
                dim: self.embed.paragraph_dim,
                epochs: self.embed.paragraph_epochs,
                infer_epochs: self.embed.paragraph_infer_epochs,
                seed: self.seed,
                ..ParagraphConfig::default()
            },
            d_e: self.embed.d_e,
            epsilon: self.embed.fusion_epsilon,
        }
    }

    pub fn personality_config(&self) -> PersonalityConfig {
        PersonalityConfig {
            hidden: self.embed.personality_hidden,
            word_dim: self.embed.personality_word_dim,
            epochs: self.embed.personality_epochs,
            seed: self.seed,
            ..PersonalityConfig::default()
        }
    }

    pub fn seq2seq_config(&self) -> Seq2SeqConfig {
        Seq2SeqConfig {
            embed_dim: self.embed.encoder_embed_dim,
            hidden: self.embed.encoder_hidden,
            d_e: self.embed.d_e,
            epochs: self.embed.encoder_epochs,
            learning_rate: self.embed.encoder_learning_rate,
            batch_size: self.embed.encoder_batch_size,
            seed: self.seed,
        }
    }

    /// Check that inputs exist and scalar settings are usable.
    pub fn validate(&self, needs_histories: bool) -> Result<()> {
        if self.data.dataset.as_os_str().is_empty() {
            return Err(Error::Config("data.dataset is not set".into()));
        }
        if !self.data.dataset.is_file() {
            return Err(Error::Config(format!(
                "dataset {} does not exist",
                self.data.dataset.display()
            )));
        }
        if needs_histories {
            match &self.data.histories {
                None => return Err(Error::Config("data.histories is not set".into())),
                Some(h) if !h.is_file() => {
                    return Err(Error::Config(format!("histories file {} does not exist", h.display())))
                }
                _ => {}
            }
        }
        if self.data.word_vectors != "random" && !Path::new(&self.data.word_vectors).is_file() {
            return Err(Error::Config(format!(
                "word vector file {} does not exist",
                self.data.word_vectors
            )));
        }
        if self.data.min_words == 0 {
            return Err(Error::Config("data.min_words must be at least 1".into()));
        }
        self.split_spec()?;
        self.tag_set()?;
        Ok(())
    }
}
