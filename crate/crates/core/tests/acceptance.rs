//! End-to-end acceptance checks. Runs as a plain binary so every check prints
//! exactly one PASS/FAIL line; exits non-zero if any check fails.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sarcasm_ctx::corpus::{disagreement_table, relabel_distant, Label, LabeledDataset, TagSet, Tweet};
use sarcasm_ctx::embed::fusion::fit_fusion;
use sarcasm_ctx::embed::{temporal_weights, Method};
use sarcasm_ctx::models::{train, Classifier, Instance, ModelKind, TrainConfig};
use sarcasm_ctx::nn::Matrix;
use sarcasm_ctx::pipeline::{cmd_embed, cmd_ingest, cmd_split, cmd_train_eval, PipelineConfig};
use sarcasm_ctx::preprocess::{build_vocab, encode, strip_sarcasm_tags, tokenize, WordEmbeddingMatrix};
use sarcasm_ctx::split::{make_splits, stratify_by_user, Manifest, SplitSpec};
use sarcasm_ctx::synth::{
    cue_dataset, mixed_signal_corpus, planted_signal_corpus, riloff_fixture, UserCorpusConfig, HISTORY_MARKER,
};

const CORRELATION_TOL: f64 = 1e-6;
const INDEPENDENT_CORRELATION_MAX: f64 = 0.2;
const GRAD_REL_TOL: f64 = 1e-4;
const ATTENTION_TOL: f64 = 1e-6;
const PLANTED_F1_MIN: f64 = 0.90;
const INCLUSIVE_MARGIN: f64 = 0.03;
const OVERFIT_F1_MIN: f64 = 0.95;
const DETERMINISM_TOL: f64 = 1e-6;

type Outcome = Result<String, String>;

fn within(limit: Duration, elapsed: Duration) -> Outcome {
    if elapsed <= limit {
        Ok(String::new())
    } else {
        Err(format!(
            "took {:.1}s, limit {:.0}s",
            elapsed.as_secs_f64(),
            limit.as_secs_f64()
        ))
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------------------------------------------------------------------------

/// Partition `p` (0-based) starts at the first index `i` with `10 i >= p n`.
fn partition_oracle(n: usize) -> Vec<u32> {
    let start = |p: usize| (0..=n).find(|&i| 10 * i >= p * n).unwrap_or(n);
    let mut out = Vec::with_capacity(n);
    for p in 0..10 {
        for _ in start(p)..start(p + 1) {
            out.push(p as u32 + 1);
        }
    }
    out
}

fn temporal_weights_oracle() -> Outcome {
    let t = Instant::now();
    for n in 1..=200usize {
        let w = temporal_weights(n).map_err(|e| e.to_string())?;
        ensure(w == partition_oracle(n), || format!("n={n}: {w:?}"))?;
        ensure(
            w.windows(2).all(|p| p[0] <= p[1]) && w.iter().all(|v| (1..=10).contains(v)),
            || format!("n={n}: not non-decreasing in 1..10"),
        )?;
        if n >= 10 {
            for v in 1..=10 {
                let c = w.iter().filter(|&&x| x == v).count();
                ensure(c == n / 10 || c == n.div_ceil(10), || {
                    format!("n={n}: value {v} used {c} times")
                })?;
            }
        }
    }
    within(Duration::from_secs(1), t.elapsed())?;
    Ok("n = 1..200 exact".into())
}

fn random_dataset(rng: &mut ChaCha8Rng, i: usize) -> LabeledDataset {
    let users = rng.gen_range(10..=60);
    let n = rng.gen_range(users..=300);
    let tweets = (0..n)
        .map(|k| {
            let user = if k < users { k } else { rng.gen_range(0..users) };
            Tweet::new(format!("t{k}"), format!("u{user}"), k as i64, "x y z")
                .with_label(Label::from_bool(rng.gen_bool(0.3)))
        })
        .collect();
    LabeledDataset::new(format!("random{i}"), tweets).expect("unique ids")
}

fn stratification_invariants() -> Outcome {
    let t = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for i in 0..500 {
        let ds = random_dataset(&mut rng, i);
        let seed = rng.gen::<u64>();
        let spec = SplitSpec::default_for(10);
        let a = stratify_by_user(&ds, 10, seed).map_err(|e| e.to_string())?;
        let splits = make_splits(&ds, &a, &spec).map_err(|e| e.to_string())?;
        let mut split_of_user: BTreeMap<&str, usize> = BTreeMap::new();
        let mut seen = BTreeSet::new();
        for (k, part) in [&splits.train, &splits.valid, &splits.test].into_iter().enumerate() {
            for tw in part.tweets() {
                ensure(seen.insert(tw.id.clone()), || {
                    format!("dataset {i}: {} in two splits", tw.id)
                })?;
                let prev = *split_of_user.entry(tw.user_id.as_str()).or_insert(k);
                ensure(prev == k, || format!("dataset {i}: user {} spans splits", tw.user_id))?;
            }
        }
        ensure(seen.len() == ds.len(), || {
            format!("dataset {i}: splits cover {} of {}", seen.len(), ds.len())
        })?;

        let p1 = dir.path().join("m1.jsonl");
        let p2 = dir.path().join("m2.jsonl");
        Manifest::new(&ds, &a, &spec)
            .and_then(|m| m.write(&p1))
            .map_err(|e| e.to_string())?;
        let again = stratify_by_user(&ds, 10, seed).map_err(|e| e.to_string())?;
        Manifest::new(&ds, &again, &spec)
            .and_then(|m| m.write(&p2))
            .map_err(|e| e.to_string())?;
        let (b1, b2) = (std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
        ensure(b1 == b2, || {
            format!("dataset {i}: manifests differ under the same seed")
        })?;
    }
    within(Duration::from_secs(30), t.elapsed())?;
    Ok(format!("500 datasets in {:.1}s", t.elapsed().as_secs_f64()))
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn gaussian_rows(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..d).map(|_| gaussian(rng)).collect()).collect()
}

fn cca_fusion() -> Outcome {
    let t = Instant::now();
    let (n, d) = (500, 8);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let v = gaussian_rows(&mut rng, n, d);
    let a = gaussian_rows(&mut rng, d, d);
    let p: Vec<Vec<f64>> = v
        .iter()
        .map(|x| {
            a.iter()
                .map(|row| row.iter().zip(x).map(|(r, xi)| r * xi).sum())
                .collect()
        })
        .collect();
    let fused = fit_fusion(&v, &p, d, 1e-10).map_err(|e| e.to_string())?;
    let worst_linear = fused.correlations.iter().map(|c| (c - 1.0).abs()).fold(0.0, f64::max);
    ensure(worst_linear <= CORRELATION_TOL, || {
        format!("linear views: correlations {:?}", fused.correlations)
    })?;

    let mut worst_indep: f64 = 0.0;
    for trial in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + trial);
        let v = gaussian_rows(&mut rng, n, d);
        let p = gaussian_rows(&mut rng, n, d);
        let m = fit_fusion(&v, &p, d, 1e-3).map_err(|e| e.to_string())?;
        worst_indep = m.correlations.iter().copied().fold(worst_indep, f64::max);
    }
    ensure(worst_indep < INDEPENDENT_CORRELATION_MAX, || {
        // Largest sample canonical correlation of independent views
        // concentrates near the Wachter edge, whatever the implementation.
        let (g1, g2) = (d as f64 / n as f64, d as f64 / n as f64);
        let edge = (g1 * (1.0 - g2)).sqrt() + (g2 * (1.0 - g1)).sqrt();
        format!("independent views: max correlation {worst_indep:.3}; null edge for d={d}, n={n} is {edge:.3}")
    })?;
    within(Duration::from_secs(10), t.elapsed())?;
    Ok(format!(
        "|1 - rho| <= {worst_linear:.1e}; independent max rho {worst_indep:.3}"
    ))
}

fn random_words(vocab: usize, dim: usize, seed: u64) -> WordEmbeddingMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = Matrix::zeros(vocab, dim);
    for x in m.data_mut().iter_mut().skip(dim) {
        *x = rng.gen_range(-0.5..0.5);
    }
    WordEmbeddingMatrix { matrix: m }
}

/// Largest relative error between analytic and central-difference gradients
/// over every parameter entry.
fn max_gradient_error(model: &mut Classifier, inst: &Instance, label: Label) -> Result<f64, String> {
    let (_, grads) = model.loss_and_gradients(inst, label).map_err(|e| e.to_string())?;
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let ids: Vec<_> = model.params().ids().collect();
    for id in ids {
        let len = model.params().get(id).len();
        for k in 0..len {
            let analytic = grads.get(id).map_or(0.0, |g| g.data()[k]);
            let orig = model.params().get(id).data()[k];
            model.params_mut().get_mut(id).data_mut()[k] = orig + h;
            let up = model.loss_and_gradients(inst, label).map_err(|e| e.to_string())?.0;
            model.params_mut().get_mut(id).data_mut()[k] = orig - h;
            let down = model.loss_and_gradients(inst, label).map_err(|e| e.to_string())?.0;
            model.params_mut().get_mut(id).data_mut()[k] = orig;
            let numeric = (up - down) / (2.0 * h);
            let scale = analytic.abs().max(numeric.abs());
            if scale > 1e-6 {
                worst = worst.max((analytic - numeric).abs() / scale);
            }
        }
    }
    Ok(worst)
}

fn gradient_checks() -> Outcome {
    let t = Instant::now();
    let words = random_words(12, 6, 3);
    let cfg = TrainConfig {
        siarn_hidden: 5,
        seed: 9,
        ..TrainConfig::default()
    };
    let d_e = 4;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let embedding: Vec<f64> = (0..d_e).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let inst = Instance {
        tweet_id: "g".into(),
        indices: vec![2, 7, 3, 11, 5],
        embedding: Some(embedding),
    };
    let mut report = Vec::new();
    for kind in [
        ModelKind::Siarn,
        ModelKind::Exclusive(Method::Ed),
        ModelKind::Inclusive(Method::Ed),
    ] {
        let mut model = Classifier::new(kind, Some(&words), d_e, &cfg).map_err(|e| e.to_string())?;
        // Nudge the zero-initialized exclusive head away from the symmetric point.
        for id in model.params().ids().collect::<Vec<_>>() {
            for x in model.params_mut().get_mut(id).data_mut() {
                *x += rng.gen_range(-0.1..0.1);
            }
        }
        for label in [Label::Sarcastic, Label::NonSarcastic] {
            let err = max_gradient_error(&mut model, &inst, label)?;
            ensure(err < GRAD_REL_TOL, || {
                format!("{kind} ({label:?}): max relative error {err:.2e}")
            })?;
            report.push(err);
        }
    }
    within(Duration::from_secs(60), t.elapsed())?;
    Ok(format!(
        "max relative error {:.1e} over pair scorer, LSTM, both heads",
        report.iter().copied().fold(0.0, f64::max)
    ))
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

#[allow(clippy::needless_range_loop)]
fn attention_oracle() -> Outcome {
    let (vocab, dim) = (40, 7);
    let words = random_words(vocab, dim, 21);
    let cfg = TrainConfig {
        siarn_hidden: 6,
        seed: 4,
        ..TrainConfig::default()
    };
    let model = Classifier::new(ModelKind::Siarn, Some(&words), 0, &cfg).map_err(|e| e.to_string())?;
    let s = model.siarn().expect("SIARN parameters");
    let table = model.params().get(s.words);
    let pl = model.params().get(s.pair_left).data().to_vec();
    let pr = model.params().get(s.pair_right).data().to_vec();
    let b = model.params().get(s.pair_bias).data()[0];
    let dot = |a: &[f64], w: &[f64]| a.iter().zip(w).map(|(x, y)| x * y).sum::<f64>();

    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let len = rng.gen_range(1..=12);
        let idx: Vec<usize> = (0..len).map(|_| rng.gen_range(1..vocab)).collect();
        let w: Vec<&[f64]> = idx.iter().map(|&i| table.row(i)).collect();
        let mut logits = vec![0.0; len];
        for i in 0..len {
            let mut best = f64::NEG_INFINITY;
            for j in 0..len {
                if i == j {
                    continue;
                }
                let (lo, hi) = (i.min(j), i.max(j));
                best = best.max(sigmoid(dot(&pl, w[lo]) + dot(&pr, w[hi]) + b));
            }
            logits[i] = if len == 1 { 0.0 } else { best };
        }
        let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let z: f64 = logits.iter().map(|l| (l - m).exp()).sum();
        let mut v_a = vec![0.0; dim];
        for i in 0..len {
            let a = (logits[i] - m).exp() / z;
            for (acc, x) in v_a.iter_mut().zip(w[i]) {
                *acc += a * x;
            }
        }
        let f = model.siarn_features(&idx).map_err(|e| e.to_string())?;
        for (got, want) in f[..dim].iter().zip(&v_a) {
            worst = worst.max((got - want).abs());
        }
    }
    ensure(worst <= ATTENTION_TOL, || format!("max deviation {worst:.2e}"))?;
    Ok(format!("100 inputs, max deviation {worst:.1e}"))
}

fn pipeline_config(dir: &Path, dataset: PathBuf, histories: PathBuf, seed: u64) -> PipelineConfig {
    let mut cfg = PipelineConfig {
        seed,
        ..PipelineConfig::default()
    };
    cfg.data.dataset = dataset;
    cfg.data.histories = Some(histories);
    cfg.out_dir = dir.join("out");
    cfg
}

fn planted_signal() -> Outcome {
    let t = Instant::now();
    let mut f1 = BTreeMap::<&str, Vec<f64>>::new();
    for seed in 0..3 {
        let corpus = planted_signal_corpus(&UserCorpusConfig {
            seed,
            ..Default::default()
        })
        .map_err(|e| e.to_string())?;
        let (mut marked, mut total) = (0, 0);
        for h in corpus.histories.values() {
            if h.user_id
                .trim_start_matches("user")
                .parse::<usize>()
                .is_ok_and(|u| u % 2 == 0)
            {
                total += h.tweets.len();
                marked += h.tweets.iter().filter(|tw| tw.text.contains(HISTORY_MARKER)).count();
            }
        }
        ensure(marked as f64 >= 0.8 * total as f64, || {
            format!("seed {seed}: marker in {marked}/{total}")
        })?;
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let (d, h) = corpus.write(dir.path()).map_err(|e| e.to_string())?;
        let cfg = pipeline_config(dir.path(), d, h, seed);
        cmd_split(&cfg).map_err(|e| e.to_string())?;
        for (name, method) in [("EX-ED", Method::Ed), ("EX-W-CASCADE", Method::WCascade)] {
            cmd_embed(&cfg, method).map_err(|e| e.to_string())?;
            let r = cmd_train_eval(&cfg, ModelKind::Exclusive(method)).map_err(|e| e.to_string())?;
            f1.entry(name).or_default().push(r.result.f1);
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let summary = f1
        .iter()
        .map(|(k, v)| format!("{k} {:.3} {v:.3?}", mean(v)))
        .collect::<Vec<_>>()
        .join("; ");
    for (k, v) in &f1 {
        ensure(mean(v) >= PLANTED_F1_MIN, || {
            format!("{k} mean F1 below {PLANTED_F1_MIN}: {summary}")
        })?;
    }
    within(Duration::from_secs(600), t.elapsed())?;
    Ok(format!("{summary} in {:.0}s", t.elapsed().as_secs_f64()))
}

fn inclusive_beats_exclusive() -> Outcome {
    let mut f1 = BTreeMap::<String, Vec<f64>>::new();
    for seed in 0..3 {
        let corpus = mixed_signal_corpus(&UserCorpusConfig {
            seed,
            ..Default::default()
        })
        .map_err(|e| e.to_string())?;
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let (d, h) = corpus.write(dir.path()).map_err(|e| e.to_string())?;
        let cfg = pipeline_config(dir.path(), d, h, seed);
        cmd_split(&cfg).map_err(|e| e.to_string())?;
        cmd_embed(&cfg, Method::Ed).map_err(|e| e.to_string())?;
        for kind in [
            ModelKind::Inclusive(Method::Ed),
            ModelKind::Exclusive(Method::Ed),
            ModelKind::Siarn,
        ] {
            let r = cmd_train_eval(&cfg, kind).map_err(|e| e.to_string())?;
            f1.entry(kind.to_string()).or_default().push(r.result.f1);
        }
    }
    let mean = |k: &str| f1[k].iter().sum::<f64>() / f1[k].len() as f64;
    let (inc, ex, siarn) = (mean("IN-ED"), mean("EX-ED"), mean("SIARN"));
    let summary = format!("IN-ED {inc:.3}, EX-ED {ex:.3}, SIARN {siarn:.3}");
    ensure(inc - ex >= INCLUSIVE_MARGIN && inc - siarn >= INCLUSIVE_MARGIN, || {
        summary.clone()
    })?;
    Ok(summary)
}

fn siarn_overfit() -> Outcome {
    let ds = cue_dataset(64, 3).map_err(|e| e.to_string())?;
    let tags = TagSet::sarcasm();
    let tokens: Vec<Vec<String>> = ds
        .tweets()
        .iter()
        .map(|t| strip_sarcasm_tags(&tokenize(&t.text), &tags))
        .collect();
    let vocab = build_vocab(tokens.iter().map(Vec::as_slice));
    let words = random_words(vocab.len(), 100, 8);
    let data: Vec<(Instance, Label)> = ds
        .tweets()
        .iter()
        .zip(&tokens)
        .map(|(t, toks)| {
            (
                Instance {
                    tweet_id: t.id.clone(),
                    indices: encode(toks, &vocab),
                    embedding: None,
                },
                t.label.unwrap(),
            )
        })
        .collect();
    let cfg = TrainConfig::default();
    let m = train(ModelKind::Siarn, &data, &[], Some(&words), 0, &cfg).map_err(|e| e.to_string())?;
    let last = m.metrics.last().expect("30 epochs");
    ensure(last.train_f1 >= OVERFIT_F1_MIN, || {
        format!("train F1 {:.3} after {} epochs", last.train_f1, last.epoch)
    })?;
    Ok(format!("train F1 {:.3} after {} epochs", last.train_f1, last.epoch))
}

fn fixture_reproduction() -> Outcome {
    let corpus = riloff_fixture().map_err(|e| e.to_string())?;
    let tags = TagSet::sarcasm();
    let table = disagreement_table(&corpus.dataset, &tags).as_tuple();
    ensure(table == (190, 2, 217, 292), || format!("disagreement table {table:?}"))?;
    let relabeled = relabel_distant(&corpus.dataset, &tags).sarcastic_count();
    ensure(relabeled == 407, || format!("{relabeled} relabeled sarcastic"))?;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (d, h) = corpus.write(dir.path()).map_err(|e| e.to_string())?;
    let mut cfg = pipeline_config(dir.path(), d, h, 0);
    let ingest = cmd_ingest(&cfg).map_err(|e| e.to_string())?;
    let c = ingest.counts;
    ensure((c.total, c.sarcastic, c.non_sarcastic) == (701, 192, 509), || {
        format!("ingest {c:?}")
    })?;
    let buckets = stratify_by_user(&corpus.dataset, 10, cfg.seed).map_err(|e| e.to_string())?;
    cfg.split.valid_bucket = buckets.bucket_of_user("big");
    cfg.split.test_bucket = buckets.bucket_of_user("mid");
    let split = cmd_split(&cfg).map_err(|e| e.to_string())?;
    let sizes = (split.train.total, split.valid.total, split.test.total);
    ensure(sizes == (551, 88, 62), || format!("split sizes {sizes:?}"))?;
    Ok(format!("{table:?}, 407 relabeled, 701/192/509, 551/88/62"))
}

/// Compare two files token by token; numeric tokens may differ by `tol`.
fn files_match(a: &Path, b: &Path, tol: f64) -> Result<(), String> {
    let (x, y) = (std::fs::read_to_string(a).unwrap(), std::fs::read_to_string(b).unwrap());
    let split = |s: &str| -> Vec<String> {
        s.split(|c: char| c.is_whitespace() || ",:[]{}\"".contains(c))
            .filter(|t| !t.is_empty())
            .map(str::to_string)
            .collect()
    };
    let (tx, ty) = (split(&x), split(&y));
    ensure(tx.len() == ty.len(), || format!("{}: token counts differ", a.display()))?;
    for (p, q) in tx.iter().zip(&ty) {
        match (p.parse::<f64>(), q.parse::<f64>()) {
            (Ok(u), Ok(v)) => ensure((u - v).abs() <= tol, || format!("{}: {p} vs {q}", a.display()))?,
            _ => ensure(p == q, || format!("{}: {p} vs {q}", a.display()))?,
        }
    }
    Ok(())
}

fn snapshot(dir: &Path, into: &Path) -> Vec<PathBuf> {
    let mut rel = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let r = p.strip_prefix(dir).unwrap().to_path_buf();
                let dst = into.join(&r);
                std::fs::create_dir_all(dst.parent().unwrap()).unwrap();
                std::fs::copy(&p, &dst).unwrap();
                rel.push(r);
            }
        }
    }
    rel.sort();
    rel
}

fn determinism() -> Outcome {
    let corpus = planted_signal_corpus(&UserCorpusConfig {
        users: 20,
        tweets_per_user: 5,
        history_len: 10,
        seed: 5,
        ..Default::default()
    })
    .map_err(|e| e.to_string())?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (d, h) = corpus.write(dir.path()).map_err(|e| e.to_string())?;
    let mut cfg = pipeline_config(dir.path(), d, h, 5);
    cfg.train.epochs = 3;
    cfg.embed.paragraph_epochs = 5;
    cfg.embed.encoder_epochs = 2;
    let run = |cfg: &PipelineConfig| -> Result<(), String> {
        cmd_split(cfg).map_err(|e| e.to_string())?;
        for m in [Method::Ed, Method::WCascade] {
            cmd_embed(cfg, m).map_err(|e| e.to_string())?;
        }
        for k in [
            ModelKind::Siarn,
            ModelKind::Exclusive(Method::WCascade),
            ModelKind::Inclusive(Method::Ed),
        ] {
            cmd_train_eval(cfg, k).map_err(|e| e.to_string())?;
        }
        Ok(())
    };
    run(&cfg)?;
    let first = dir.path().join("first");
    let files = snapshot(&cfg.out_dir, &first);
    run(&cfg)?;
    let second = dir.path().join("second");
    let again = snapshot(&cfg.out_dir, &second);
    ensure(files == again, || "reruns produced different file sets".into())?;
    let mut byte_equal = 0;
    for f in &files {
        let (a, b) = (first.join(f), second.join(f));
        if std::fs::read(&a).unwrap() == std::fs::read(&b).unwrap() {
            byte_equal += 1;
        } else {
            files_match(&a, &b, DETERMINISM_TOL)?;
        }
    }
    ensure(
        std::fs::read(first.join("split_manifest.jsonl")).unwrap()
            == std::fs::read(second.join("split_manifest.jsonl")).unwrap(),
        || "split manifest is not byte-identical".into(),
    )?;
    Ok(format!("{} files, {byte_equal} byte-identical", files.len()))
}

type Check = (&'static str, fn() -> Outcome);

fn main() {
    let checks: [Check; 10] = [
        ("temporal weights match the partition oracle", temporal_weights_oracle),
        ("user stratification invariants", stratification_invariants),
        ("CCA fusion correlations", cca_fusion),
        ("analytic vs numeric gradients", gradient_checks),
        ("SIARN attention matches double-loop reference", attention_oracle),
        ("exclusive models recover planted user signal", planted_signal),
        (
            "inclusive beats exclusive and text-only on mixed signal",
            inclusive_beats_exclusive,
        ),
        ("SIARN overfits a toy set", siarn_overfit),
        ("fixture tables and split sizes", fixture_reproduction),
        ("pipeline reruns are deterministic", determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.1}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} [{secs:.1}s]", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance check(s) failed");
        std::process::exit(1);
    }
}
