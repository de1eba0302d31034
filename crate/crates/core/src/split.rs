//! User-stratified bucketing and train/validation/test assembly.
//!
//! Users are placed greedily, largest first, into the bucket that keeps the
//! bucket's sarcastic ratio closest to the global ratio. A bucket only
//! accepts a user while it stays within `ceil(N / n_buckets)` tweets; when no
//! bucket has room the user goes to a smallest bucket. Remaining ties are
//! broken by a seeded bucket priority.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{LabeledDataset, Tweet};
use crate::error::{Error, Result};

pub const DEFAULT_BUCKETS: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BucketAssignment {
    pub n_buckets: usize,
    pub seed: u64,
    users: BTreeMap<String, usize>,
}

impl BucketAssignment {
    pub fn bucket_of_user(&self, user_id: &str) -> Option<usize> {
        self.users.get(user_id).copied()
    }

    pub fn bucket_of(&self, tweet: &Tweet) -> Option<usize> {
        self.bucket_of_user(&tweet.user_id)
    }

    pub fn users(&self) -> &BTreeMap<String, usize> {
        &self.users
    }

    pub fn tweet_buckets(&self, dataset: &LabeledDataset) -> BTreeMap<String, usize> {
        dataset
            .tweets()
            .iter()
            .filter_map(|t| self.bucket_of(t).map(|b| (t.id.clone(), b)))
            .collect()
    }

    /// `(tweets, sarcastic)` per bucket.
    pub fn bucket_counts(&self, dataset: &LabeledDataset) -> Vec<(usize, usize)> {
        let mut counts = vec![(0, 0); self.n_buckets];
        for t in dataset.tweets() {
            if let Some(b) = self.bucket_of(t) {
                counts[b].0 += 1;
                if t.label.is_some_and(|l| l.is_sarcastic()) {
                    counts[b].1 += 1;
                }
            }
        }
        counts
    }
}

pub fn stratify_by_user(dataset: &LabeledDataset, n_buckets: usize, seed: u64) -> Result<BucketAssignment> {
    if n_buckets < 2 {
        return Err(Error::Config(format!("need at least 2 buckets, got {n_buckets}")));
    }
    let mut per_user: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for (t, l) in dataset.tweets().iter().zip(dataset.labels()) {
        let e = per_user.entry(t.user_id.as_str()).or_default();
        e.0 += 1;
        if l.is_sarcastic() {
            e.1 += 1;
        }
    }
    if per_user.len() < n_buckets {
        return Err(Error::Stratification(format!(
            "{} distinct users cannot fill {n_buckets} buckets",
            per_user.len()
        )));
    }

    let total = dataset.len();
    let global = dataset.sarcastic_count() as f64 / total as f64;
    let capacity = total.div_ceil(n_buckets);

    let mut order: Vec<usize> = (0..n_buckets).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut priority = vec![0; n_buckets];
    for (rank, &b) in order.iter().enumerate() {
        priority[b] = rank;
    }

    let mut users: Vec<(&str, usize, usize)> = per_user.into_iter().map(|(u, (n, s))| (u, n, s)).collect();
    users.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));

    let mut sizes = vec![0usize; n_buckets];
    let mut sarcastic = vec![0usize; n_buckets];
    let mut assigned = BTreeMap::new();
    for (user, n, s) in users {
        let mut candidates: Vec<usize> = (0..n_buckets).filter(|&b| sizes[b] + n <= capacity).collect();
        if candidates.is_empty() {
            let smallest = *sizes.iter().min().expect("n_buckets >= 2");
            candidates = (0..n_buckets).filter(|&b| sizes[b] == smallest).collect();
        }
        let key = |b: usize| {
            let size = sizes[b] + n;
            let ratio = (sarcastic[b] + s) as f64 / size as f64;
            ((ratio - global).abs(), size, priority[b])
        };
        let best = candidates
            .into_iter()
            .min_by(|&a, &b| {
                let (da, sa, pa) = key(a);
                let (db, sb, pb) = key(b);
                da.total_cmp(&db).then(sa.cmp(&sb)).then(pa.cmp(&pb))
            })
            .expect("at least one candidate bucket");
        sizes[best] += n;
        sarcastic[best] += s;
        assigned.insert(user.to_string(), best);
    }
    Ok(BucketAssignment {
        n_buckets,
        seed,
        users: assigned,
    })
}

/// Which buckets form train, validation and test.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train: Vec<usize>,
    pub valid: usize,
    pub test: usize,
}

impl SplitSpec {
    /// Validation and test are the last two buckets; the rest train.
    pub fn default_for(n_buckets: usize) -> Self {
        let n = n_buckets.max(3);
        SplitSpec {
            train: (0..n - 2).collect(),
            valid: n - 2,
            test: n - 1,
        }
    }

    pub fn with_holdout(n_buckets: usize, valid: usize, test: usize) -> Self {
        SplitSpec {
            train: (0..n_buckets).filter(|&b| b != valid && b != test).collect(),
            valid,
            test,
        }
    }

    pub fn validate(&self, n_buckets: usize) -> Result<()> {
        let mut seen = HashSet::new();
        for &b in self.train.iter().chain([&self.valid, &self.test]) {
            if b >= n_buckets {
                return Err(Error::Config(format!("bucket {b} out of range 0..{n_buckets}")));
            }
            if !seen.insert(b) {
                return Err(Error::Config(format!("bucket {b} assigned to more than one split")));
            }
        }
        if seen.len() != n_buckets {
            return Err(Error::Config(format!(
                "split spec covers {} of {n_buckets} buckets",
                seen.len()
            )));
        }
        Ok(())
    }

    pub fn split_of_bucket(&self, bucket: usize) -> Option<SplitName> {
        if bucket == self.valid {
            Some(SplitName::Valid)
        } else if bucket == self.test {
            Some(SplitName::Test)
        } else if self.train.contains(&bucket) {
            Some(SplitName::Train)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitName {
    Train,
    Valid,
    Test,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Splits {
    pub train: LabeledDataset,
    pub valid: LabeledDataset,
    pub test: LabeledDataset,
}

impl Splits {
    pub fn sizes(&self) -> (usize, usize, usize) {
        (self.train.len(), self.valid.len(), self.test.len())
    }
}

pub fn make_splits(dataset: &LabeledDataset, assignment: &BucketAssignment, spec: &SplitSpec) -> Result<Splits> {
    spec.validate(assignment.n_buckets)?;
    let mut routes = Vec::with_capacity(dataset.len());
    for t in dataset.tweets() {
        let b = assignment
            .bucket_of(t)
            .ok_or_else(|| Error::Stratification(format!("user {} has no bucket", t.user_id)))?;
        routes.push(spec.split_of_bucket(b).expect("validated spec covers every bucket"));
    }
    let name = dataset.name();
    let pick = |which: SplitName, suffix: &str| {
        let mut i = 0;
        dataset.filter(format!("{name}.{suffix}"), |_| {
            let keep = routes[i] == which;
            i += 1;
            keep
        })
    };
    Ok(Splits {
        train: pick(SplitName::Train, "train"),
        valid: pick(SplitName::Valid, "valid"),
        test: pick(SplitName::Test, "test"),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestHeader {
    pub seed: u64,
    pub n_buckets: usize,
    pub spec: SplitSpec,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub tweet_id: String,
    pub split: SplitName,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    pub header: ManifestHeader,
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn new(dataset: &LabeledDataset, assignment: &BucketAssignment, spec: &SplitSpec) -> Result<Self> {
        spec.validate(assignment.n_buckets)?;
        let entries = dataset
            .tweets()
            .iter()
            .map(|t| {
                let b = assignment
                    .bucket_of(t)
                    .ok_or_else(|| Error::Stratification(format!("user {} has no bucket", t.user_id)))?;
                Ok(ManifestEntry {
                    tweet_id: t.id.clone(),
                    split: spec.split_of_bucket(b).expect("validated"),
                })
            })
            .collect::<Result<_>>()?;
        Ok(Manifest {
            header: ManifestHeader {
                seed: assignment.seed,
                n_buckets: assignment.n_buckets,
                spec: spec.clone(),
            },
            entries,
        })
    }

    /// Route a dataset by this manifest. Tweets missing from it are an error.
    pub fn apply(&self, dataset: &LabeledDataset) -> Result<Splits> {
        let by_id: BTreeMap<&str, SplitName> = self.entries.iter().map(|e| (e.tweet_id.as_str(), e.split)).collect();
        for t in dataset.tweets() {
            if !by_id.contains_key(t.id.as_str()) {
                return Err(Error::Integrity(format!("tweet {} missing from split manifest", t.id)));
            }
        }
        let name = dataset.name();
        let pick = |which: SplitName, suffix: &str| {
            dataset.filter(format!("{name}.{suffix}"), |t| by_id[t.id.as_str()] == which)
        };
        Ok(Splits {
            train: pick(SplitName::Train, "train"),
            valid: pick(SplitName::Valid, "valid"),
            test: pick(SplitName::Test, "test"),
        })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let f = File::create(path).map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
        let mut w = BufWriter::new(f);
        let io = |e| Error::io("writing split manifest", e);
        serde_json::to_writer(&mut w, &self.header)?;
        w.write_all(b"\n").map_err(io)?;
        for e in &self.entries {
            serde_json::to_writer(&mut w, e)?;
            w.write_all(b"\n").map_err(io)?;
        }
        w.flush().map_err(io)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f = File::open(path).map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
        let mut lines = BufReader::new(f).lines().enumerate();
        let parse_err = |line: usize, e: serde_json::Error| Error::Parse {
            path: path.to_path_buf(),
            line,
            message: e.to_string(),
        };
        let header = match lines.next() {
            Some((_, l)) => {
                let l = l.map_err(|e| Error::io("reading split manifest", e))?;
                serde_json::from_str(&l).map_err(|e| parse_err(1, e))?
            }
            None => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: 1,
                    message: "missing manifest header".into(),
                })
            }
        };
        let mut entries = Vec::new();
        for (i, l) in lines {
            let l = l.map_err(|e| Error::io("reading split manifest", e))?;
            if l.trim().is_empty() {
                continue;
            }
            entries.push(serde_json::from_str(&l).map_err(|e| parse_err(i + 1, e))?);
        }
        Ok(Manifest { header, entries })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Label, Tweet};

    fn dataset(users: &[(&str, &[bool])]) -> LabeledDataset {
        let mut tweets = Vec::new();
        let mut n = 0;
        for (u, labels) in users {
            for &l in *labels {
                n += 1;
                tweets.push(Tweet::new(format!("t{n}"), *u, n, "some text here").with_label(Label::from_bool(l)));
            }
        }
        LabeledDataset::new("d", tweets).unwrap()
    }

    #[test]
    fn symmetric_fixture_balances_exactly() {
        // Interleaved and blocked sarcastic users both balance.
        for sarcastic_first in [false, true] {
            let owned: Vec<(String, bool)> = (0..20)
                .map(|i| {
                    let s = if sarcastic_first { i < 10 } else { i % 2 == 0 };
                    (format!("u{i:02}"), s)
                })
                .collect();
            let labels: Vec<[bool; 1]> = owned.iter().map(|(_, s)| [*s]).collect();
            let users: Vec<(&str, &[bool])> = owned
                .iter()
                .zip(&labels)
                .map(|((u, _), l)| (u.as_str(), &l[..]))
                .collect();
            let d = dataset(&users);
            let a = stratify_by_user(&d, 10, 7).unwrap();
            for (size, sarc) in a.bucket_counts(&d) {
                assert_eq!(size, 2);
                assert_eq!(sarc as f64 / size as f64, 0.5);
            }
        }
    }

    #[test]
    fn too_few_users() {
        let d = dataset(&[("solo", &[true, false, true, false, true])]);
        assert!(matches!(stratify_by_user(&d, 10, 0), Err(Error::Stratification(_))));
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let owned: Vec<String> = (0..30).map(|i| format!("user{i}")).collect();
        let labels: Vec<Vec<bool>> = (0..30).map(|i| vec![i % 3 == 0; 1 + i % 4]).collect();
        let users: Vec<(&str, &[bool])> = owned
            .iter()
            .zip(&labels)
            .map(|(u, l)| (u.as_str(), l.as_slice()))
            .collect();
        let d = dataset(&users);
        let a = stratify_by_user(&d, 10, 1).unwrap();
        assert_eq!(a, stratify_by_user(&d, 10, 1).unwrap());
        assert_ne!(a.users(), stratify_by_user(&d, 10, 2).unwrap().users());
    }

    #[test]
    fn spec_validation() {
        assert!(SplitSpec::default_for(10).validate(10).is_ok());
        let overlap = SplitSpec {
            train: (0..8).collect(),
            valid: 7,
            test: 9,
        };
        assert!(overlap.validate(10).unwrap_err().is_usage());
        assert!(SplitSpec::with_holdout(10, 3, 3).validate(10).is_err());
    }

    #[test]
    fn empty_dataset_splits_empty() {
        let d = LabeledDataset::empty("e");
        let a = BucketAssignment {
            n_buckets: 10,
            seed: 0,
            users: BTreeMap::new(),
        };
        let s = make_splits(&d, &a, &SplitSpec::default_for(10)).unwrap();
        assert_eq!(s.sizes(), (0, 0, 0));
    }

    #[test]
    fn manifest_roundtrip_and_apply() {
        let owned: Vec<String> = (0..12).map(|i| format!("u{i}")).collect();
        let labels: Vec<Vec<bool>> = (0..12).map(|i| vec![i % 2 == 0, true]).collect();
        let users: Vec<(&str, &[bool])> = owned
            .iter()
            .zip(&labels)
            .map(|(u, l)| (u.as_str(), l.as_slice()))
            .collect();
        let d = dataset(&users);
        let a = stratify_by_user(&d, 10, 3).unwrap();
        let spec = SplitSpec::default_for(10);
        let m = Manifest::new(&d, &a, &spec).unwrap();
        let f = tempfile::NamedTempFile::new().unwrap();
        m.write(f.path()).unwrap();
        let back = Manifest::read(f.path()).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.apply(&d).unwrap(), make_splits(&d, &a, &spec).unwrap());
    }
}
