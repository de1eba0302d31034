//! Tweets, labeled datasets, user histories and hashtag-based relabeling.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::preprocess::tokenize;

/// Hashtags that mark a tweet as sarcastic under distant supervision.
pub const DEFAULT_SARCASM_TAGS: [&str; 4] = ["sarcasm", "sarcastic", "satire", "irony"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Sarcastic,
    NonSarcastic,
}

impl Label {
    pub fn is_sarcastic(self) -> bool {
        self == Label::Sarcastic
    }

    pub fn from_bool(sarcastic: bool) -> Self {
        if sarcastic {
            Label::Sarcastic
        } else {
            Label::NonSarcastic
        }
    }

    /// Class index used by the classifiers: non-sarcastic 0, sarcastic 1.
    pub fn index(self) -> usize {
        match self {
            Label::NonSarcastic => 0,
            Label::Sarcastic => 1,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Sarcastic => "sarcastic",
            Label::NonSarcastic => "non_sarcastic",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tweet {
    pub id: String,
    pub user_id: String,
    pub timestamp: i64,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<Label>,
}

impl Tweet {
    pub fn new(id: impl Into<String>, user_id: impl Into<String>, timestamp: i64, text: impl Into<String>) -> Self {
        Tweet {
            id: id.into(),
            user_id: user_id.into(),
            timestamp,
            text: text.into(),
            label: None,
        }
    }

    pub fn with_label(mut self, label: Label) -> Self {
        self.label = Some(label);
        self
    }

    fn validate(&self) -> std::result::Result<(), String> {
        if self.id.is_empty() {
            return Err("empty tweet id".into());
        }
        if self.timestamp < 0 {
            return Err(format!("tweet {} has negative timestamp {}", self.id, self.timestamp));
        }
        if self.text.trim().is_empty() {
            return Err(format!("tweet {} has empty text", self.id));
        }
        Ok(())
    }
}

/// A named, ordered collection of labeled tweets with distinct ids.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    name: String,
    tweets: Vec<Tweet>,
}

impl LabeledDataset {
    pub fn new(name: impl Into<String>, tweets: Vec<Tweet>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(tweets.len());
        for t in &tweets {
            t.validate().map_err(Error::Integrity)?;
            if t.label.is_none() {
                return Err(Error::Integrity(format!("tweet {} has no label", t.id)));
            }
            if !seen.insert(t.id.as_str()) {
                return Err(Error::Integrity(format!("duplicate tweet id {}", t.id)));
            }
        }
        Ok(LabeledDataset {
            name: name.into(),
            tweets,
        })
    }

    pub fn empty(name: impl Into<String>) -> Self {
        LabeledDataset {
            name: name.into(),
            tweets: Vec::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn tweets(&self) -> &[Tweet] {
        &self.tweets
    }

    pub fn len(&self) -> usize {
        self.tweets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tweets.is_empty()
    }

    pub fn label(&self, i: usize) -> Label {
        self.tweets[i].label.expect("labeled dataset invariant")
    }

    pub fn labels(&self) -> impl Iterator<Item = Label> + '_ {
        self.tweets.iter().map(|t| t.label.expect("labeled dataset invariant"))
    }

    pub fn sarcastic_count(&self) -> usize {
        self.labels().filter(|l| l.is_sarcastic()).count()
    }

    pub fn get(&self, id: &str) -> Option<&Tweet> {
        self.tweets.iter().find(|t| t.id == id)
    }

    pub fn users(&self) -> BTreeSet<&str> {
        self.tweets.iter().map(|t| t.user_id.as_str()).collect()
    }

    /// Subset in original order, keeping only tweets accepted by `keep`.
    pub fn filter(&self, name: impl Into<String>, mut keep: impl FnMut(&Tweet) -> bool) -> LabeledDataset {
        LabeledDataset {
            name: name.into(),
            tweets: self.tweets.iter().filter(|t| keep(t)).cloned().collect(),
        }
    }
}

/// The time-ordered timeline of one user preceding one labeled anchor tweet.
#[derive(Debug, Clone, PartialEq)]
pub struct UserHistory {
    pub user_id: String,
    pub anchor_tweet_id: String,
    /// Ascending by timestamp; the last entry is the most recent.
    pub tweets: Vec<Tweet>,
}

impl UserHistory {
    pub fn len(&self) -> usize {
        self.tweets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tweets.is_empty()
    }
}

/// Histories keyed by anchor tweet id. Every tweet of the dataset the store
/// was loaded against has an entry, possibly empty.
pub type HistoryStore = BTreeMap<String, UserHistory>;

#[derive(Debug, Deserialize)]
struct HistoryRecord {
    #[serde(flatten)]
    tweet: Tweet,
    anchor_tweet_id: String,
}

#[derive(Serialize)]
struct HistoryRecordOut<'a> {
    #[serde(flatten)]
    tweet: &'a Tweet,
    anchor_tweet_id: &'a str,
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(format!("opening {}", path.display()), e))
}

fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<(usize, T)>> {
    let mut out = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push((i + 1, rec));
    }
    Ok(out)
}

/// Load a labeled dataset from JSONL, preserving file order.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    let records: Vec<(usize, Tweet)> = read_jsonl(path)?;
    let mut seen = HashSet::with_capacity(records.len());
    let mut tweets = Vec::with_capacity(records.len());
    for (line, t) in records {
        t.validate()
            .map_err(|m| Error::Integrity(format!("line {line}: {m}")))?;
        if t.label.is_none() {
            return Err(Error::Integrity(format!("line {line}: tweet {} has no label", t.id)));
        }
        if !seen.insert(t.id.clone()) {
            return Err(Error::Integrity(format!("line {line}: duplicate tweet id {}", t.id)));
        }
        tweets.push(t);
    }
    Ok(LabeledDataset { name, tweets })
}

pub fn write_dataset(path: impl AsRef<Path>, dataset: &LabeledDataset) -> Result<()> {
    let path = path.as_ref();
    let f = File::create(path).map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
    let mut w = BufWriter::new(f);
    for t in dataset.tweets() {
        serde_json::to_writer(&mut w, t)?;
        w.write_all(b"\n").map_err(|e| Error::io("writing dataset", e))?;
    }
    w.flush().map_err(|e| Error::io("writing dataset", e))
}

pub fn write_histories(path: impl AsRef<Path>, histories: &HistoryStore) -> Result<()> {
    let path = path.as_ref();
    let f = File::create(path).map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
    let mut w = BufWriter::new(f);
    for h in histories.values() {
        for t in &h.tweets {
            let rec = HistoryRecordOut {
                tweet: t,
                anchor_tweet_id: &h.anchor_tweet_id,
            };
            serde_json::to_writer(&mut w, &rec)?;
            w.write_all(b"\n").map_err(|e| Error::io("writing histories", e))?;
        }
    }
    w.flush().map_err(|e| Error::io("writing histories", e))
}

/// Load history JSONL and validate it against `dataset`.
pub fn load_histories(path: impl AsRef<Path>, dataset: &LabeledDataset) -> Result<HistoryStore> {
    let path = path.as_ref();
    let records: Vec<(usize, HistoryRecord)> = read_jsonl(path)?;
    let mut grouped: HashMap<String, Vec<(usize, Tweet)>> = HashMap::new();
    for (line, rec) in records {
        rec.tweet
            .validate()
            .map_err(|m| Error::Integrity(format!("line {line}: {m}")))?;
        grouped.entry(rec.anchor_tweet_id).or_default().push((line, rec.tweet));
    }
    build_histories(
        dataset,
        grouped
            .into_iter()
            .map(|(a, ts)| (a, ts.into_iter().map(|(_, t)| t).collect())),
    )
}

/// Validate and assemble histories from `(anchor id, tweets)` groups.
pub fn build_histories(
    dataset: &LabeledDataset,
    groups: impl IntoIterator<Item = (String, Vec<Tweet>)>,
) -> Result<HistoryStore> {
    let by_id: HashMap<&str, &Tweet> = dataset.tweets().iter().map(|t| (t.id.as_str(), t)).collect();
    let mut store: HistoryStore = dataset
        .tweets()
        .iter()
        .map(|t| {
            (
                t.id.clone(),
                UserHistory {
                    user_id: t.user_id.clone(),
                    anchor_tweet_id: t.id.clone(),
                    tweets: Vec::new(),
                },
            )
        })
        .collect();

    for (anchor_id, mut tweets) in groups {
        let anchor = *by_id
            .get(anchor_id.as_str())
            .ok_or_else(|| Error::Reference(anchor_id.clone()))?;
        let mut ids = HashSet::with_capacity(tweets.len());
        for t in &tweets {
            if by_id.contains_key(t.id.as_str()) {
                return Err(Error::Disjointness { tweet_id: t.id.clone() });
            }
            if t.timestamp >= anchor.timestamp {
                return Err(Error::Ordering {
                    tweet_id: t.id.clone(),
                    timestamp: t.timestamp,
                    anchor_id: anchor.id.clone(),
                    anchor_timestamp: anchor.timestamp,
                });
            }
            if t.user_id != anchor.user_id {
                return Err(Error::Integrity(format!(
                    "history tweet {} belongs to user {}, anchor {} to user {}",
                    t.id, t.user_id, anchor.id, anchor.user_id
                )));
            }
            if !ids.insert(t.id.clone()) {
                return Err(Error::Integrity(format!(
                    "duplicate history tweet {} for anchor {}",
                    t.id, anchor.id
                )));
            }
        }
        // stable: equal timestamps keep file order
        tweets.sort_by_key(|t| t.timestamp);
        store.get_mut(&anchor_id).expect("seeded above").tweets = tweets;
    }
    Ok(store)
}

/// Lowercased hashtag names (without the leading `#`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagSet(BTreeSet<String>);

impl TagSet {
    pub fn new<I, S>(tags: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let set: BTreeSet<String> = tags
            .into_iter()
            .map(|t| t.as_ref().trim().trim_start_matches('#').to_lowercase())
            .filter(|t| !t.is_empty())
            .collect();
        if set.is_empty() {
            return Err(Error::Config("tag set must not be empty".into()));
        }
        Ok(TagSet(set))
    }

    pub fn sarcasm() -> Self {
        TagSet(DEFAULT_SARCASM_TAGS.iter().map(|s| s.to_string()).collect())
    }

    /// Whole-token match: `#Sarcasm` matches `sarcasm`, `#sarcasms` does not.
    pub fn matches(&self, token: &str) -> bool {
        match token.strip_prefix('#') {
            Some(rest) if !rest.is_empty() => self.0.contains(&rest.to_lowercase()),
            _ => false,
        }
    }

    pub fn contains_tag<S: AsRef<str>>(&self, tokens: &[S]) -> bool {
        tokens.iter().any(|t| self.matches(t.as_ref()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }
}

impl Default for TagSet {
    fn default() -> Self {
        TagSet::sarcasm()
    }
}

pub fn has_tag(text: &str, tags: &TagSet) -> bool {
    tags.contains_tag(&tokenize(text))
}

/// Replace every label by hashtag presence (distant supervision).
pub fn relabel_distant(dataset: &LabeledDataset, tags: &TagSet) -> LabeledDataset {
    let tweets = dataset
        .tweets()
        .iter()
        .map(|t| {
            let mut t = t.clone();
            t.label = Some(Label::from_bool(has_tag(&t.text, tags)));
            t
        })
        .collect();
    LabeledDataset {
        name: format!("{}#", dataset.name()),
        tweets,
    }
}

/// Manual label versus tag presence.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisagreementTable {
    pub sarcastic_with_tag: usize,
    pub sarcastic_without_tag: usize,
    pub nonsarcastic_with_tag: usize,
    pub nonsarcastic_without_tag: usize,
}

impl DisagreementTable {
    pub fn total(&self) -> usize {
        self.sarcastic_with_tag
            + self.sarcastic_without_tag
            + self.nonsarcastic_with_tag
            + self.nonsarcastic_without_tag
    }

    pub fn with_tag(&self) -> usize {
        self.sarcastic_with_tag + self.nonsarcastic_with_tag
    }

    /// Tweets where the manual label and tag presence disagree.
    pub fn disagreements(&self) -> usize {
        self.sarcastic_without_tag + self.nonsarcastic_with_tag
    }

    pub fn as_tuple(&self) -> (usize, usize, usize, usize) {
        (
            self.sarcastic_with_tag,
            self.sarcastic_without_tag,
            self.nonsarcastic_with_tag,
            self.nonsarcastic_without_tag,
        )
    }
}

impl fmt::Display for DisagreementTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<24}{:>10}{:>18}", "", "with tag", "without any tag")?;
        writeln!(
            f,
            "{:<24}{:>10}{:>18}",
            "labelled sarcastic", self.sarcastic_with_tag, self.sarcastic_without_tag
        )?;
        write!(
            f,
            "{:<24}{:>10}{:>18}",
            "labelled non-sarcastic", self.nonsarcastic_with_tag, self.nonsarcastic_without_tag
        )
    }
}

pub fn disagreement_table(dataset: &LabeledDataset, tags: &TagSet) -> DisagreementTable {
    let mut table = DisagreementTable::default();
    for t in dataset.tweets() {
        let tagged = has_tag(&t.text, tags);
        let cell = match (t.label.expect("labeled dataset invariant"), tagged) {
            (Label::Sarcastic, true) => &mut table.sarcastic_with_tag,
            (Label::Sarcastic, false) => &mut table.sarcastic_without_tag,
            (Label::NonSarcastic, true) => &mut table.nonsarcastic_with_tag,
            (Label::NonSarcastic, false) => &mut table.nonsarcastic_without_tag,
        };
        *cell += 1;
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tweet(id: &str, user: &str, ts: i64, text: &str, label: Label) -> Tweet {
        Tweet::new(id, user, ts, text).with_label(label)
    }

    fn write_lines(lines: &[&str]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        for l in lines {
            writeln!(f, "{l}").unwrap();
        }
        f
    }

    #[test]
    fn empty_file_is_empty_dataset() {
        let f = write_lines(&[]);
        assert!(load_dataset(f.path()).unwrap().is_empty());
    }

    #[test]
    fn duplicate_id_is_named() {
        let f = write_lines(&[
            r#"{"id":"42","user_id":"u","timestamp":1,"text":"a b c","label":"sarcastic"}"#,
            r#"{"id":"42","user_id":"v","timestamp":2,"text":"d e f","label":"non_sarcastic"}"#,
        ]);
        let err = load_dataset(f.path()).unwrap_err();
        assert!(matches!(err, Error::Integrity(ref m) if m.contains("42")), "{err}");
    }

    #[test]
    fn missing_label_and_malformed_lines() {
        let f = write_lines(&[r#"{"id":"1","user_id":"u","timestamp":1,"text":"a b c"}"#]);
        assert!(matches!(load_dataset(f.path()), Err(Error::Integrity(_))));

        let f = write_lines(&[
            r#"{"id":"1","user_id":"u","timestamp":1,"text":"a","label":"sarcastic"}"#,
            r#"{"id":"2","user_id":"u","timestamp":"#,
        ]);
        match load_dataset(f.path()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }

        let f = write_lines(&[r#"{"id":"1","user_id":"u","timestamp":1,"text":"x","label":"maybe"}"#]);
        assert!(matches!(load_dataset(f.path()), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn file_order_is_preserved() {
        let f = write_lines(&[
            r#"{"id":"b","user_id":"u","timestamp":9,"text":"x","label":"sarcastic"}"#,
            r#"{"id":"a","user_id":"u","timestamp":1,"text":"y","label":"non_sarcastic"}"#,
        ]);
        let d = load_dataset(f.path()).unwrap();
        let ids: Vec<_> = d.tweets().iter().map(|t| t.id.as_str()).collect();
        assert_eq!(ids, ["b", "a"]);
    }

    fn one_anchor() -> LabeledDataset {
        LabeledDataset::new("d", vec![tweet("t", "u", 40, "anchor text here", Label::Sarcastic)]).unwrap()
    }

    fn hist_line(id: &str, ts: i64) -> String {
        format!(r#"{{"id":"{id}","user_id":"u","timestamp":{ts},"text":"hello {id}","anchor_tweet_id":"t"}}"#)
    }

    #[test]
    fn histories_are_sorted_and_validated() {
        let d = one_anchor();
        let lines = [hist_line("h3", 30), hist_line("h1", 10), hist_line("h2", 20)];
        let f = write_lines(&lines.iter().map(String::as_str).collect::<Vec<_>>());
        let store = load_histories(f.path(), &d).unwrap();
        let ts: Vec<i64> = store["t"].tweets.iter().map(|t| t.timestamp).collect();
        assert_eq!(ts, [10, 20, 30]);
    }

    #[test]
    fn history_errors() {
        let d = one_anchor();
        let own = hist_line("t", 10);
        let f = write_lines(&[&own]);
        assert!(matches!(load_histories(f.path(), &d), Err(Error::Disjointness { .. })));

        let same_time = hist_line("h", 40);
        let f = write_lines(&[&same_time]);
        assert!(matches!(load_histories(f.path(), &d), Err(Error::Ordering { .. })));

        let f = write_lines(&[r#"{"id":"h","user_id":"u","timestamp":1,"text":"x","anchor_tweet_id":"nope"}"#]);
        assert!(matches!(load_histories(f.path(), &d), Err(Error::Reference(ref a)) if a == "nope"));
    }

    #[test]
    fn anchors_without_history_get_empty_entries() {
        let d = one_anchor();
        let f = write_lines(&[]);
        let store = load_histories(f.path(), &d).unwrap();
        assert!(store["t"].is_empty());
    }

    #[test]
    fn tag_matching_is_whole_token_and_case_insensitive() {
        let tags = TagSet::sarcasm();
        assert!(has_tag("great, rain again #sarcasm", &tags));
        assert!(has_tag("great, rain again #SARCASM", &tags));
        assert!(!has_tag("great, rain again", &tags));
        assert!(!has_tag("#sarcasms are fun", &tags));
        assert!(!has_tag("sarcasm without the hash", &tags));
        assert!(TagSet::new(Vec::<String>::new()).is_err());
        assert!(TagSet::new(["#Irony"]).unwrap().matches("#irony"));
    }

    #[test]
    fn relabel_and_table() {
        let d = LabeledDataset::new(
            "riloff",
            vec![
                tweet("1", "a", 1, "great, rain again #sarcasm", Label::NonSarcastic),
                tweet("2", "a", 2, "great, rain again", Label::Sarcastic),
                tweet("3", "b", 3, "so #irony much", Label::Sarcastic),
            ],
        )
        .unwrap();
        let tags = TagSet::sarcasm();
        let r = relabel_distant(&d, &tags);
        assert_eq!(r.name(), "riloff#");
        let labels: Vec<_> = r.labels().collect();
        assert_eq!(labels, [Label::Sarcastic, Label::NonSarcastic, Label::Sarcastic]);
        let table = disagreement_table(&d, &tags);
        assert_eq!(table.as_tuple(), (1, 1, 1, 0));
        assert_eq!(table.total(), 3);
        assert_eq!(table.with_tag(), r.sarcastic_count());
    }
}
