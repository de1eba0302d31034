//! Seeded synthetic corpora and fixtures.
//!
//! Original tweets and timelines cannot be redistributed, so every
//! experiment in this crate runs on generated data with a known signal.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{build_histories, write_dataset, write_histories, HistoryStore, Label, LabeledDataset, Tweet};
use crate::embed::seq2seq::synthetic_summary;
use crate::error::Result;

/// Standard normal draw (Box-Muller).
pub fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub const NEUTRAL_WORDS: [&str; 64] = [
    "today", "work", "coffee", "morning", "traffic", "weather", "weekend", "phone", "game", "team", "music", "movie",
    "dinner", "lunch", "school", "class", "friend", "family", "dog", "cat", "city", "bus", "train", "rain", "sun",
    "night", "sleep", "book", "news", "store", "line", "meeting", "email", "car", "road", "house", "room", "party",
    "song", "show", "season", "match", "score", "office", "boss", "homework", "exam", "summer", "winter", "beach",
    "park", "walk", "run", "gym", "pizza", "tea", "laptop", "update", "battery", "wifi", "ticket", "flight", "delay",
    "queue",
];

/// Marker planted in the histories of sarcasm-prone users.
pub const HISTORY_MARKER: &str = "yeahright";
/// Local cues used by the mixed-signal corpus.
pub const SARCASTIC_CUE: &str = "obviously";
pub const SINCERE_CUE: &str = "genuinely";

/// A labeled dataset with validated per-anchor histories.
#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub dataset: LabeledDataset,
    pub histories: HistoryStore,
}

impl SynthCorpus {
    /// Write `<dir>/<name>.jsonl` and `<dir>/<name>.histories.jsonl`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<(std::path::PathBuf, std::path::PathBuf)> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| crate::Error::io(format!("creating {}", dir.display()), e))?;
        let data = dir.join(format!("{}.jsonl", self.dataset.name()));
        let hist = dir.join(format!("{}.histories.jsonl", self.dataset.name()));
        write_dataset(&data, &self.dataset)?;
        write_histories(&hist, &self.histories)?;
        Ok((data, hist))
    }
}

/// One generated user: labeled tweets plus a chronological timeline.
struct UserPlan {
    user_id: String,
    labeled: Vec<(String, Label)>,
    timeline: Vec<String>,
}

/// Timeline tweets get timestamps `100 k`. Labeled tweets are spread over
/// the second half of the timeline so later anchors see longer histories.
fn assemble(name: &str, users: Vec<UserPlan>) -> Result<SynthCorpus> {
    let mut tweets = Vec::new();
    let mut groups = Vec::new();
    for u in users {
        let h = u.timeline.len();
        let n = u.labeled.len().max(1);
        let history: Vec<Tweet> = u
            .timeline
            .iter()
            .enumerate()
            .map(|(k, text)| Tweet::new(format!("{}-h{k:03}", u.user_id), &u.user_id, 100 * k as i64, text))
            .collect();
        for (j, (text, label)) in u.labeled.into_iter().enumerate() {
            let seen = h / 2 + j * (h - h / 2) / n;
            let seen = if h > 0 { seen.max(1) } else { 0 };
            let id = format!("{}-t{j:03}", u.user_id);
            let ts = 100 * seen as i64 - 50;
            tweets.push(Tweet::new(&id, &u.user_id, ts, text).with_label(label));
            groups.push((id, history[..seen].to_vec()));
        }
    }
    let dataset = LabeledDataset::new(name, tweets)?;
    let histories = build_histories(&dataset, groups)?;
    Ok(SynthCorpus { dataset, histories })
}

fn neutral_text<R: Rng>(rng: &mut R, min: usize, max: usize) -> Vec<&'static str> {
    let n = rng.gen_range(min..=max);
    (0..n).map(|_| *NEUTRAL_WORDS.choose(rng).expect("non-empty")).collect()
}

fn insert_at_random<R: Rng>(words: &mut Vec<&'static str>, token: &'static str, rng: &mut R) {
    let pos = rng.gen_range(0..=words.len());
    words.insert(pos, token);
}

/// Riloff-shaped fixture: 701 tweets (192 sarcastic, 509 not) from 18 users.
///
/// One user has 88 tweets and another 62; the remaining 551 come from nine
/// users with 34 tweets and seven with 35. With ten buckets every bucket has
/// room for 71 tweets, so the two large users sit alone in their buckets and
/// the rest pair up, which yields a 551/88/62 split when those two buckets
/// are held out. Tags follow the disagreement counts 190/2/217/292.
pub fn riloff_fixture() -> Result<SynthCorpus> {
    let mut rng = ChaCha8Rng::seed_from_u64(701);
    let mut sizes = vec![("big".to_string(), 88usize), ("mid".to_string(), 62)];
    sizes.extend((0..9).map(|i| (format!("small{i}"), 34)));
    sizes.extend((0..7).map(|i| (format!("medium{i}"), 35)));

    // (sarcastic, tagged) categories, shuffled over all 701 slots
    let mut cats = Vec::with_capacity(701);
    cats.extend(std::iter::repeat_n((true, true), 190));
    cats.extend(std::iter::repeat_n((true, false), 2));
    cats.extend(std::iter::repeat_n((false, true), 217));
    cats.extend(std::iter::repeat_n((false, false), 292));
    cats.shuffle(&mut rng);
    let tags = ["#sarcasm", "#Sarcastic", "#irony", "#SATIRE"];

    let mut slot = 0;
    let users = sizes
        .into_iter()
        .map(|(user, n)| {
            let labeled = (0..n)
                .map(|_| {
                    let (sarcastic, tagged) = cats[slot];
                    slot += 1;
                    let mut words = neutral_text(&mut rng, 4, 9);
                    if tagged {
                        words.push(tags.choose(&mut rng).expect("non-empty"));
                    }
                    (words.join(" "), Label::from_bool(sarcastic))
                })
                .collect();
            let timeline = (0..3).map(|_| neutral_text(&mut rng, 4, 9).join(" ")).collect();
            UserPlan {
                user_id: user,
                labeled,
                timeline,
            }
        })
        .collect();
    assemble("riloff_fixture", users)
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserCorpusConfig {
    pub users: usize,
    pub tweets_per_user: usize,
    pub history_len: usize,
    /// Share of timeline tweets carrying the marker for sarcasm-prone users.
    pub marker_rate_prone: f64,
    /// The same share for everyone else.
    pub marker_rate_other: f64,
    pub seed: u64,
}

impl Default for UserCorpusConfig {
    fn default() -> Self {
        UserCorpusConfig {
            users: 60,
            tweets_per_user: 10,
            history_len: 20,
            marker_rate_prone: 0.85,
            marker_rate_other: 0.10,
            seed: 0,
        }
    }
}

/// Neutral timeline tweets; with probability `rate` a tweet opens with the
/// marker, the way some users habitually lead with the same interjection.
fn timeline<R: Rng>(cfg: &UserCorpusConfig, prone: bool, rng: &mut R) -> Vec<String> {
    let rate = if prone {
        cfg.marker_rate_prone
    } else {
        cfg.marker_rate_other
    };
    (0..cfg.history_len)
        .map(|_| {
            let mut words = neutral_text(rng, 4, 8);
            if rng.gen_bool(rate) {
                words.insert(0, HISTORY_MARKER);
            }
            words.join(" ")
        })
        .collect()
}

/// Users alternate between sarcasm-prone and not. Every labeled tweet takes
/// its author's disposition as label and has neutral text, so only the
/// history carries signal.
pub fn planted_signal_corpus(cfg: &UserCorpusConfig) -> Result<SynthCorpus> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let users = (0..cfg.users)
        .map(|u| {
            let prone = u % 2 == 0;
            let labeled = (0..cfg.tweets_per_user)
                .map(|_| (neutral_text(&mut rng, 4, 9).join(" "), Label::from_bool(prone)))
                .collect();
            UserPlan {
                user_id: format!("user{u:03}"),
                labeled,
                timeline: timeline(cfg, prone, &mut rng),
            }
        })
        .collect();
    assemble(&format!("planted_s{}", cfg.seed), users)
}

/// Half of the labeled tweets carry a local cue that fixes the label
/// regardless of author; the other half have neutral text and take their
/// author's disposition.
pub fn mixed_signal_corpus(cfg: &UserCorpusConfig) -> Result<SynthCorpus> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let users = (0..cfg.users)
        .map(|u| {
            let prone = u % 2 == 0;
            let labeled = (0..cfg.tweets_per_user)
                .map(|_| {
                    let mut words = neutral_text(&mut rng, 4, 9);
                    let label = if rng.gen_bool(0.5) {
                        let sarcastic = rng.gen_bool(0.5);
                        insert_at_random(
                            &mut words,
                            if sarcastic { SARCASTIC_CUE } else { SINCERE_CUE },
                            &mut rng,
                        );
                        sarcastic
                    } else {
                        prone
                    };
                    (words.join(" "), Label::from_bool(label))
                })
                .collect();
            UserPlan {
                user_id: format!("user{u:03}"),
                labeled,
                timeline: timeline(cfg, prone, &mut rng),
            }
        })
        .collect();
    assemble(&format!("mixed_s{}", cfg.seed), users)
}

/// Balanced labeled set where each tweet contains one label-specific cue.
pub fn cue_dataset(n: usize, seed: u64) -> Result<LabeledDataset> {
    const SARCASTIC: [&str; 4] = ["obviously", "totally", "wonderful", "thrilled"];
    const SINCERE: [&str; 4] = ["genuinely", "honestly", "sadly", "tired"];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tweets = (0..n)
        .map(|i| {
            let sarcastic = i % 2 == 0;
            let mut words = neutral_text(&mut rng, 3, 7);
            let cue = if sarcastic { &SARCASTIC } else { &SINCERE };
            insert_at_random(&mut words, cue.choose(&mut rng).expect("non-empty"), &mut rng);
            Tweet::new(format!("c{i:04}"), format!("cu{}", i % 16), i as i64, words.join(" "))
                .with_label(Label::from_bool(sarcastic))
        })
        .collect();
    LabeledDataset::new(format!("cues_s{seed}"), tweets)
}

/// Random sentences over a `vocab`-word alphabet, 3 to 7 tokens long.
pub fn toy_sentences(n: usize, vocab: usize, seed: u64) -> Vec<Vec<String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let len = rng.gen_range(3..=7);
            (0..len).map(|_| format!("w{:02}", rng.gen_range(0..vocab))).collect()
        })
        .collect()
}

/// `(sentence, first third of its words)` pairs.
pub fn summary_pairs(sentences: &[Vec<String>]) -> Vec<(Vec<String>, Vec<String>)> {
    sentences.iter().map(|s| (s.clone(), synthetic_summary(s))).collect()
}
