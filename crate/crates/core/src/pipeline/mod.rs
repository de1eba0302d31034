//! One function per pipeline stage. Each stage reads its inputs from the
//! config and from earlier stages' outputs under `out_dir`, and writes its
//! outputs plus a sidecar naming the config hash, seed and input hashes.

pub mod config;

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufReader, Read};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{
    disagreement_table, load_dataset, load_histories, relabel_distant, write_dataset, DisagreementTable, HistoryStore,
    LabeledDataset, TagSet, UserHistory,
};
use crate::embed::cascade::{cascade_embed, fit_cascade, proxy_trait_corpus, wcascade_embed, CascadeModel};
use crate::embed::personality::train_personality_net;
use crate::embed::seq2seq::{
    ed_embed, summary_embed, synthetic_summary, train_autoencoder, train_summarizer, SequenceEncoder,
};
use crate::embed::{
    merge_history_document, read_embedding_store, write_embedding_store, Method, TokenizedHistory, UserEmbedding,
};
use crate::error::{Error, Result};
use crate::eval::{f1_score, read_results_csv, results_table, write_results_csv, RunResult};
use crate::models::{train, write_json, write_predictions, Instance, ModelKind, Prediction};
use crate::preprocess::{
    build_vocab, encode, load_word_vectors, strip_sarcasm_tags, tokenize, word_count, Vocabulary, WordVectorSource,
    UNK_INDEX,
};
use crate::split::{stratify_by_user, Manifest, Splits};

pub use config::PipelineConfig;

pub const MANIFEST_FILE: &str = "split_manifest.jsonl";
pub const RESULTS_FILE: &str = "results.csv";

/// Provenance record written next to every command's outputs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommandSidecar {
    pub command: String,
    pub config_sha256: String,
    pub seed: u64,
    /// Input file name to SHA-256.
    pub inputs: BTreeMap<String, String>,
    pub outputs: Vec<String>,
}

pub fn sha256_file(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
    let mut r = BufReader::new(f);
    let mut h = Sha256::new();
    let mut buf = [0u8; 1 << 16];
    loop {
        let n = r
            .read(&mut buf)
            .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(hex::encode(h.finalize()))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))
}

fn write_sidecar(cfg: &PipelineConfig, command: &str, inputs: &[&Path], outputs: &[&Path]) -> Result<PathBuf> {
    let mut fingerprints = BTreeMap::new();
    for p in inputs {
        let name = p
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        fingerprints.insert(name, sha256_file(p)?);
    }
    let sidecar = CommandSidecar {
        command: command.to_string(),
        config_sha256: cfg.hash(),
        seed: cfg.seed,
        inputs: fingerprints,
        outputs: outputs
            .iter()
            .map(|p| p.strip_prefix(&cfg.out_dir).unwrap_or(p).to_string_lossy().into_owned())
            .collect(),
    };
    let dir = cfg.out_dir.join("sidecars");
    ensure_dir(&dir)?;
    let path = dir.join(format!("{command}.json"));
    write_json(&path, &sidecar)?;
    Ok(path)
}

fn histories_path(cfg: &PipelineConfig) -> Result<&Path> {
    cfg.data
        .histories
        .as_deref()
        .ok_or_else(|| Error::Config("data.histories is not set".into()))
}

fn manifest_path(cfg: &PipelineConfig) -> PathBuf {
    cfg.out_dir.join(MANIFEST_FILE)
}

fn load_splits(cfg: &PipelineConfig, dataset: &LabeledDataset) -> Result<(PathBuf, Splits)> {
    let path = manifest_path(cfg);
    if !path.is_file() {
        return Err(Error::Config(format!(
            "split manifest {} does not exist; run the split command first",
            path.display()
        )));
    }
    let manifest = Manifest::read(&path)?;
    let splits = manifest.apply(dataset)?;
    Ok((path, splits))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelCounts {
    pub total: usize,
    pub sarcastic: usize,
    pub non_sarcastic: usize,
}

impl LabelCounts {
    pub fn of(dataset: &LabeledDataset) -> Self {
        let sarcastic = dataset.sarcastic_count();
        LabelCounts {
            total: dataset.len(),
            sarcastic,
            non_sarcastic: dataset.len() - sarcastic,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    pub dataset: String,
    pub counts: LabelCounts,
    pub users: usize,
    pub anchors_with_history: Option<usize>,
    pub history_tweets: Option<usize>,
}

/// Load and validate the dataset (and histories, when configured) and write
/// `ingest_report.json`.
pub fn cmd_ingest(cfg: &PipelineConfig) -> Result<IngestReport> {
    cfg.validate(false)?;
    let dataset = load_dataset(&cfg.data.dataset)?;
    let mut inputs = vec![cfg.data.dataset.as_path()];
    let (anchors, history_tweets) = match cfg.data.histories.as_deref() {
        Some(h) => {
            if !h.is_file() {
                return Err(Error::Config(format!("histories file {} does not exist", h.display())));
            }
            let store = load_histories(h, &dataset)?;
            inputs.push(h);
            let non_empty = store.values().filter(|x| !x.is_empty()).count();
            (Some(non_empty), Some(store.values().map(UserHistory::len).sum()))
        }
        None => (None, None),
    };
    let report = IngestReport {
        dataset: dataset.name().to_string(),
        counts: LabelCounts::of(&dataset),
        users: dataset.users().len(),
        anchors_with_history: anchors,
        history_tweets,
    };
    ensure_dir(&cfg.out_dir)?;
    let out = cfg.out_dir.join("ingest_report.json");
    write_json(&out, &report)?;
    write_sidecar(cfg, "ingest", &inputs, &[&out])?;
    log::info!(
        "{}: {} tweets, {} sarcastic, {} non-sarcastic",
        report.dataset,
        report.counts.total,
        report.counts.sarcastic,
        report.counts.non_sarcastic
    );
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitReport {
    pub train: LabelCounts,
    pub valid: LabelCounts,
    pub test: LabelCounts,
    /// `(tweets, sarcastic)` per bucket.
    pub buckets: Vec<(usize, usize)>,
}

/// Stratify users into buckets and write the split manifest.
pub fn cmd_split(cfg: &PipelineConfig) -> Result<SplitReport> {
    cfg.validate(false)?;
    let spec = cfg.split_spec()?;
    let dataset = load_dataset(&cfg.data.dataset)?;
    let assignment = stratify_by_user(&dataset, cfg.split.n_buckets, cfg.seed)?;
    let manifest = Manifest::new(&dataset, &assignment, &spec)?;
    let splits = manifest.apply(&dataset)?;
    ensure_dir(&cfg.out_dir)?;
    let mpath = manifest_path(cfg);
    manifest.write(&mpath)?;
    let report = SplitReport {
        train: LabelCounts::of(&splits.train),
        valid: LabelCounts::of(&splits.valid),
        test: LabelCounts::of(&splits.test),
        buckets: assignment.bucket_counts(&dataset),
    };
    let rpath = cfg.out_dir.join("split_report.json");
    write_json(&rpath, &report)?;
    write_sidecar(cfg, "split", &[&cfg.data.dataset], &[&mpath, &rpath])?;
    Ok(report)
}

/// Fitted embedding model as stored in the checkpoint.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", content = "model", rename_all = "snake_case")]
pub enum EmbeddingModel {
    Cascade(CascadeModel),
    Encoder(SequenceEncoder),
}

impl EmbeddingModel {
    pub fn dim(&self) -> usize {
        match self {
            EmbeddingModel::Cascade(m) => m.dim(),
            EmbeddingModel::Encoder(m) => m.dim(),
        }
    }

    pub fn embed(&self, method: Method, history: &TokenizedHistory) -> Result<UserEmbedding> {
        match (self, method) {
            (EmbeddingModel::Cascade(m), Method::Cascade) => cascade_embed(history, m),
            (EmbeddingModel::Cascade(m), Method::WCascade) => wcascade_embed(history, m),
            (EmbeddingModel::Encoder(m), Method::Ed) => ed_embed(history, m),
            (EmbeddingModel::Encoder(m), Method::Summary) => summary_embed(history, m),
            _ => Err(Error::Config(format!("embedding model does not support {method}"))),
        }
    }
}

/// Sidecar of an embedding-model checkpoint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingSidecar {
    pub method: Method,
    pub dims: usize,
    pub seed: u64,
    pub epochs: usize,
    pub corpus_sha256: String,
}

/// Tokenized history of every anchor, in dataset order. Anchors absent from
/// the store get an empty history.
pub fn tokenized_histories(
    dataset: &LabeledDataset,
    store: &HistoryStore,
    tags: &TagSet,
    min_words: usize,
) -> Vec<TokenizedHistory> {
    dataset
        .tweets()
        .iter()
        .map(|t| match store.get(&t.id) {
            Some(h) => TokenizedHistory::from_history(h, tags, min_words),
            None => TokenizedHistory {
                user_id: t.user_id.clone(),
                anchor_tweet_id: t.id.clone(),
                tweet_ids: Vec::new(),
                tweets: Vec::new(),
            },
        })
        .collect()
}

/// Every distinct history tweet across `histories`, ordered by tweet id.
fn distinct_history_tweets(histories: &[TokenizedHistory]) -> Vec<Vec<String>> {
    let mut seen = BTreeMap::new();
    for h in histories {
        for (id, toks) in h.tweet_ids.iter().zip(&h.tweets) {
            seen.entry(id.as_str()).or_insert(toks);
        }
    }
    seen.into_values().cloned().collect()
}

fn corpus_fingerprint(docs: &[Vec<String>]) -> String {
    let mut h = Sha256::new();
    for d in docs {
        h.update(d.join(" ").as_bytes());
        h.update(b"\n");
    }
    hex::encode(h.finalize())
}

/// Fit the embedding model for `method` on the training histories.
pub fn fit_embedding_model(
    cfg: &PipelineConfig,
    method: Method,
    train_histories: &[TokenizedHistory],
) -> Result<(EmbeddingModel, EmbeddingSidecar)> {
    let (model, corpus, epochs) = match method {
        Method::Cascade | Method::WCascade => {
            let docs: Vec<Vec<String>> = if method == Method::Cascade {
                train_histories
                    .iter()
                    .filter(|h| !h.is_empty())
                    .map(|h| merge_history_document(&h.tweets))
                    .collect::<Result<_>>()?
            } else {
                distinct_history_tweets(train_histories)
            };
            let personality = train_personality_net(&proxy_trait_corpus(&docs), &cfg.personality_config())?;
            let model = fit_cascade(&docs, personality, &cfg.cascade_config())?;
            (EmbeddingModel::Cascade(model), docs, cfg.embed.paragraph_epochs)
        }
        Method::Ed => {
            let corpus = distinct_history_tweets(train_histories);
            let enc = train_autoencoder(&corpus, &cfg.seq2seq_config())?;
            (EmbeddingModel::Encoder(enc), corpus, cfg.embed.encoder_epochs)
        }
        Method::Summary => {
            let corpus = distinct_history_tweets(train_histories);
            let pairs: Vec<_> = corpus.iter().map(|s| (s.clone(), synthetic_summary(s))).collect();
            let enc = train_summarizer(&pairs, &cfg.seq2seq_config())?;
            (EmbeddingModel::Encoder(enc), corpus, cfg.embed.encoder_epochs)
        }
    };
    let sidecar = EmbeddingSidecar {
        method,
        dims: model.dim(),
        seed: cfg.seed,
        epochs,
        corpus_sha256: corpus_fingerprint(&corpus),
    };
    Ok((model, sidecar))
}

/// Embed every history with up to `workers` threads; output order follows
/// the input regardless of the thread count.
pub fn embed_all(
    model: &EmbeddingModel,
    method: Method,
    histories: &[TokenizedHistory],
    workers: usize,
) -> Result<Vec<UserEmbedding>> {
    let workers = if workers == 0 {
        std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
    } else {
        workers
    };
    let chunk = histories.len().div_ceil(workers.max(1)).max(1);
    let parts: Vec<Result<Vec<UserEmbedding>>> = std::thread::scope(|s| {
        let handles: Vec<_> = histories
            .chunks(chunk)
            .map(|c| s.spawn(move || c.iter().map(|h| model.embed(method, h)).collect::<Result<Vec<_>>>()))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("embedding worker panicked"))
            .collect()
    });
    let mut out = Vec::with_capacity(histories.len());
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

pub fn embedding_store_path(cfg: &PipelineConfig, method: Method) -> PathBuf {
    cfg.out_dir
        .join("embeddings")
        .join(format!("{}.txt", method.cli_name()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbedReport {
    pub method: Method,
    pub dims: usize,
    pub embedded: usize,
    pub flagged: usize,
    pub store: PathBuf,
}

/// Fit the method on training-split histories and embed every anchor.
pub fn cmd_embed(cfg: &PipelineConfig, method: Method) -> Result<EmbedReport> {
    cfg.validate(true)?;
    let tags = cfg.tag_set()?;
    let dataset = load_dataset(&cfg.data.dataset)?;
    let hpath = histories_path(cfg)?;
    let store = load_histories(hpath, &dataset)?;
    let (mpath, splits) = load_splits(cfg, &dataset)?;

    let all = tokenized_histories(&dataset, &store, &tags, cfg.data.min_words);
    let train_ids: BTreeSet<&str> = splits.train.tweets().iter().map(|t| t.id.as_str()).collect();
    let train_histories: Vec<TokenizedHistory> = all
        .iter()
        .filter(|h| train_ids.contains(h.anchor_tweet_id.as_str()))
        .cloned()
        .collect();

    let (model, sidecar) = fit_embedding_model(cfg, method, &train_histories)?;
    let embeddings = embed_all(&model, method, &all, cfg.embed.workers)?;

    let models_dir = cfg.out_dir.join("models");
    ensure_dir(&models_dir)?;
    let ckpt = models_dir.join(format!("embed_{}.json", method.cli_name()));
    write_json(&ckpt, &model)?;
    let ckpt_meta = models_dir.join(format!("embed_{}.meta.json", method.cli_name()));
    write_json(&ckpt_meta, &sidecar)?;

    let spath = embedding_store_path(cfg, method);
    ensure_dir(spath.parent().expect("store path has a parent"))?;
    write_embedding_store(&spath, method, &embeddings)?;
    write_sidecar(
        cfg,
        &format!("embed_{}", method.cli_name()),
        &[&cfg.data.dataset, hpath, &mpath],
        &[&spath, &ckpt, &ckpt_meta],
    )?;
    let flagged = embeddings.iter().filter(|e| e.flags.any()).count();
    if flagged > 0 {
        log::warn!("{flagged} of {} embeddings are flagged", embeddings.len());
    }
    Ok(EmbedReport {
        method,
        dims: sidecar.dims,
        embedded: embeddings.len(),
        flagged,
        store: spath,
    })
}

fn clean_tokens(text: &str, tags: &TagSet) -> Vec<String> {
    strip_sarcasm_tags(&tokenize(text), tags)
}

/// Classifier vocabulary: labeled training tweets plus the histories of
/// training anchors.
pub fn classifier_vocabulary(
    train: &LabeledDataset,
    store: Option<&HistoryStore>,
    tags: &TagSet,
    min_words: usize,
) -> Vocabulary {
    let mut docs: Vec<Vec<String>> = train
        .tweets()
        .iter()
        .map(|t| clean_tokens(&t.text, tags))
        .filter(|t| word_count(t) >= min_words)
        .collect();
    if let Some(store) = store {
        for t in train.tweets() {
            if let Some(h) = store.get(&t.id) {
                docs.extend(TokenizedHistory::from_history(h, tags, min_words).tweets);
            }
        }
    }
    build_vocab(docs.iter().map(Vec::as_slice))
}

fn instances(
    dataset: &LabeledDataset,
    vocab: &Vocabulary,
    tags: &TagSet,
    embeddings: Option<&BTreeMap<String, Vec<f64>>>,
    min_words: Option<usize>,
) -> Result<Vec<(Instance, crate::corpus::Label)>> {
    let mut out = Vec::with_capacity(dataset.len());
    for t in dataset.tweets() {
        let tokens = clean_tokens(&t.text, tags);
        if min_words.is_some_and(|m| word_count(&tokens) < m) {
            continue;
        }
        let mut indices = encode(&tokens, vocab);
        if indices.is_empty() {
            indices.push(UNK_INDEX);
        }
        let embedding = match embeddings {
            Some(map) => Some(
                map.get(&t.id)
                    .cloned()
                    .ok_or_else(|| Error::Reference(format!("no user embedding for tweet {}", t.id)))?,
            ),
            None => None,
        };
        out.push((
            Instance {
                tweet_id: t.id.clone(),
                indices,
                embedding,
            },
            t.label.expect("labeled dataset invariant"),
        ));
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct TrainEvalReport {
    pub result: RunResult,
    pub train_f1: f64,
    pub selected_epoch: usize,
    pub predictions: Vec<Prediction>,
}

fn model_file_stem(kind: ModelKind) -> String {
    kind.to_string().to_ascii_lowercase()
}

/// Train `kind` on the train split, select on validation, score the test
/// split and upsert the row into `results.csv`.
pub fn cmd_train_eval(cfg: &PipelineConfig, kind: ModelKind) -> Result<TrainEvalReport> {
    cfg.validate(kind.method().is_some())?;
    let tags = cfg.tag_set()?;
    let dataset = load_dataset(&cfg.data.dataset)?;
    let (mpath, splits) = load_splits(cfg, &dataset)?;
    let store = match cfg.data.histories.as_deref() {
        Some(h) if h.is_file() => Some(load_histories(h, &dataset)?),
        _ => None,
    };
    let mut inputs: Vec<PathBuf> = vec![cfg.data.dataset.clone(), mpath];
    if let Some(h) = cfg.data.histories.as_ref().filter(|h| h.is_file()) {
        inputs.push(h.clone());
    }

    let (embeddings, d_e) = match kind.method() {
        Some(method) => {
            let spath = embedding_store_path(cfg, method);
            if !spath.is_file() {
                return Err(Error::Config(format!(
                    "embedding store {} does not exist; run the embed command for {} first",
                    spath.display(),
                    method.cli_name()
                )));
            }
            let (header, rows) = read_embedding_store(&spath)?;
            if header.method != method {
                return Err(Error::Integrity(format!(
                    "{} holds {} embeddings, expected {method}",
                    spath.display(),
                    header.method
                )));
            }
            inputs.push(spath);
            let map: BTreeMap<String, Vec<f64>> = rows.into_iter().map(|e| (e.anchor_tweet_id, e.vector)).collect();
            (Some(map), header.d_e)
        }
        None => (None, 0),
    };

    let vocab = classifier_vocabulary(&splits.train, store.as_ref(), &tags, cfg.data.min_words);
    let words = if kind.uses_text() {
        if cfg.data.word_vectors != "random" {
            inputs.push(PathBuf::from(&cfg.data.word_vectors));
        }
        Some(load_word_vectors(
            WordVectorSource::parse(&cfg.data.word_vectors),
            &vocab,
            cfg.train.word_dim,
            cfg.seed,
        )?)
    } else {
        None
    };

    let train_data = instances(
        &splits.train,
        &vocab,
        &tags,
        embeddings.as_ref(),
        Some(cfg.data.min_words),
    )?;
    let valid_data = instances(&splits.valid, &vocab, &tags, embeddings.as_ref(), None)?;
    let test_data = instances(&splits.test, &vocab, &tags, embeddings.as_ref(), None)?;
    if test_data.is_empty() {
        return Err(Error::Domain("test split is empty".into()));
    }

    let tcfg = cfg.train_config();
    let trained = train(kind, &train_data, &valid_data, words.as_ref(), d_e, &tcfg)?;
    let test_instances: Vec<Instance> = test_data.iter().map(|(i, _)| i.clone()).collect();
    let predictions: Vec<Prediction> = trained
        .classifier
        .predict(&test_instances, tcfg.batch_size)
        .into_iter()
        .collect::<Result<_>>()?;
    let pred_pairs: Vec<(&str, _)> = predictions.iter().map(|p| (p.tweet_id.as_str(), p.label)).collect();
    let gold_pairs: Vec<(&str, _)> = test_data.iter().map(|(i, l)| (i.tweet_id.as_str(), *l)).collect();
    let counts = f1_score(&pred_pairs, &gold_pairs)?;
    let result = RunResult::new(dataset.name(), kind.to_string(), counts);

    let stem = model_file_stem(kind);
    let models_dir = cfg.out_dir.join("models");
    ensure_dir(&models_dir)?;
    let ckpt = models_dir.join(format!("{stem}.json"));
    trained.classifier.save(&ckpt)?;
    let meta = models_dir.join(format!("{stem}.meta.json"));
    write_json(&meta, &trained.sidecar(&tcfg))?;
    let pred_dir = cfg.out_dir.join("predictions");
    ensure_dir(&pred_dir)?;
    let ppath = pred_dir.join(format!("{stem}.jsonl"));
    write_predictions(&ppath, &predictions)?;

    let rpath = cfg.out_dir.join(RESULTS_FILE);
    let mut rows = if rpath.is_file() {
        read_results_csv(&rpath)?
    } else {
        Vec::new()
    };
    rows.retain(|r| !(r.dataset == result.dataset && r.model == result.model));
    rows.push(result.clone());
    rows.sort_by(|a, b| (&a.dataset, &a.model).cmp(&(&b.dataset, &b.model)));
    write_results_csv(&rpath, &rows)?;

    let input_refs: Vec<&Path> = inputs.iter().map(PathBuf::as_path).collect();
    write_sidecar(cfg, &format!("train_eval_{stem}"), &input_refs, &[&ckpt, &meta, &ppath])?;
    let sel = &trained.metrics[trained.selected_epoch - 1];
    log::info!(
        "{kind}: test F1 {:.4} (epoch {} selected)",
        result.f1,
        trained.selected_epoch
    );
    Ok(TrainEvalReport {
        train_f1: sel.train_f1,
        selected_epoch: trained.selected_epoch,
        result,
        predictions,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeReport {
    pub dataset: String,
    pub table: DisagreementTable,
    pub relabeled_sarcastic: usize,
    pub relabeled_path: PathBuf,
}

/// Label-versus-tag disagreement table and the tag-relabeled dataset.
pub fn cmd_analyze(cfg: &PipelineConfig) -> Result<AnalyzeReport> {
    cfg.validate(false)?;
    let tags = cfg.tag_set()?;
    let dataset = load_dataset(&cfg.data.dataset)?;
    let table = disagreement_table(&dataset, &tags);
    let relabeled = relabel_distant(&dataset, &tags);
    let dir = cfg.out_dir.join("analysis");
    ensure_dir(&dir)?;
    let tpath = dir.join("disagreement.json");
    write_json(&tpath, &table)?;
    let rpath = dir.join(format!("{}.relabeled.jsonl", dataset.name()));
    write_dataset(&rpath, &relabeled)?;
    write_sidecar(cfg, "analyze", &[&cfg.data.dataset], &[&tpath, &rpath])?;
    Ok(AnalyzeReport {
        dataset: dataset.name().to_string(),
        table,
        relabeled_sarcastic: relabeled.sarcastic_count(),
        relabeled_path: rpath,
    })
}

/// Render `results.csv` as a model-by-dataset table, written as
/// `results_table.csv` and returned as text.
pub fn cmd_table(cfg: &PipelineConfig) -> Result<String> {
    let rpath = cfg.out_dir.join(RESULTS_FILE);
    if !rpath.is_file() {
        return Err(Error::Config(format!("{} does not exist", rpath.display())));
    }
    let table = results_table(&read_results_csv(&rpath)?);
    let tpath = cfg.out_dir.join("results_table.csv");
    std::fs::write(&tpath, table.to_csv()).map_err(|e| Error::io(format!("writing {}", tpath.display()), e))?;
    write_sidecar(cfg, "table", &[&rpath], &[&tpath])?;
    Ok(table.to_text())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::riloff_fixture;

    fn fixture_config(dir: &Path) -> PipelineConfig {
        let (d, h) = riloff_fixture().unwrap().write(dir).unwrap();
        let mut cfg = PipelineConfig::default();
        cfg.data.dataset = d;
        cfg.data.histories = Some(h);
        cfg.out_dir = dir.join("out");
        cfg
    }

    #[test]
    fn ingest_counts_and_missing_file() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = fixture_config(dir.path());
        let r = cmd_ingest(&cfg).unwrap();
        assert_eq!(
            (r.counts.total, r.counts.sarcastic, r.counts.non_sarcastic),
            (701, 192, 509)
        );
        let first = std::fs::read(cfg.out_dir.join("ingest_report.json")).unwrap();
        cmd_ingest(&cfg).unwrap();
        assert_eq!(first, std::fs::read(cfg.out_dir.join("ingest_report.json")).unwrap());

        let mut bad = cfg.clone();
        bad.data.dataset = dir.path().join("nope.jsonl");
        assert!(cmd_ingest(&bad).unwrap_err().is_usage());
    }

    #[test]
    fn stages_need_their_inputs() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = fixture_config(dir.path());
        assert!(cmd_embed(&cfg, Method::Ed).unwrap_err().is_usage());
        assert!(cmd_train_eval(&cfg, ModelKind::Siarn).unwrap_err().is_usage());
        assert!(cmd_table(&cfg).unwrap_err().is_usage());
    }

    #[test]
    fn worker_count_does_not_change_output() {
        let corpus = crate::synth::planted_signal_corpus(&crate::synth::UserCorpusConfig {
            users: 8,
            tweets_per_user: 3,
            history_len: 6,
            ..Default::default()
        })
        .unwrap();
        let tags = TagSet::sarcasm();
        let hs = tokenized_histories(&corpus.dataset, &corpus.histories, &tags, 3);
        let mut cfg = PipelineConfig::default();
        cfg.embed.encoder_epochs = 1;
        cfg.embed.encoder_hidden = 8;
        cfg.embed.encoder_embed_dim = 8;
        cfg.embed.d_e = 6;
        let (model, _) = fit_embedding_model(&cfg, Method::Ed, &hs).unwrap();
        let one = embed_all(&model, Method::Ed, &hs, 1).unwrap();
        let many = embed_all(&model, Method::Ed, &hs, 5).unwrap();
        assert_eq!(one, many);
        assert_eq!(one.len(), hs.len());
    }
}
