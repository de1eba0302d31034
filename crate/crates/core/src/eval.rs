//! Binary F1 on the sarcastic class and results-table rendering.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

impl Confusion {
    /// Counts with `sarcastic` as the positive class.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Label, Label)>) -> Self {
        let mut c = Confusion::default();
        for (pred, gold) in pairs {
            match (pred.is_sarcastic(), gold.is_sarcastic()) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, true) => c.fn_ += 1,
                (false, false) => c.tn += 1,
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// Zero when undefined.
    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    /// Zero when undefined.
    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if self.tp == 0 || p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }

    pub fn accuracy(&self) -> f64 {
        ratio(self.tp + self.tn, self.total())
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub dataset: String,
    pub model: String,
    pub f1: f64,
    #[serde(flatten)]
    pub counts: Confusion,
}

impl RunResult {
    pub fn new(dataset: impl Into<String>, model: impl Into<String>, counts: Confusion) -> Self {
        RunResult {
            dataset: dataset.into(),
            model: model.into(),
            f1: counts.f1(),
            counts,
        }
    }
}

/// Binary F1 of `predictions` against `golds`, matched by tweet id.
pub fn f1_score<S: AsRef<str>>(predictions: &[(S, Label)], golds: &[(S, Label)]) -> Result<Confusion> {
    if predictions.is_empty() {
        return Err(Error::Alignment("no predictions to score".into()));
    }
    if predictions.len() != golds.len() {
        return Err(Error::Alignment(format!(
            "{} predictions for {} gold labels",
            predictions.len(),
            golds.len()
        )));
    }
    let gold: HashMap<&str, Label> = golds.iter().map(|(id, l)| (id.as_ref(), *l)).collect();
    if gold.len() != golds.len() {
        return Err(Error::Alignment("duplicate tweet id among gold labels".into()));
    }
    let mut seen = BTreeSet::new();
    let mut pairs = Vec::with_capacity(predictions.len());
    for (id, pred) in predictions {
        let id = id.as_ref();
        let g = gold
            .get(id)
            .ok_or_else(|| Error::Alignment(format!("prediction for unknown tweet {id}")))?;
        if !seen.insert(id) {
            return Err(Error::Alignment(format!("duplicate prediction for tweet {id}")));
        }
        pairs.push((*pred, *g));
    }
    Ok(Confusion::from_pairs(pairs))
}

pub fn write_results_csv(path: impl AsRef<Path>, results: &[RunResult]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Integrity(format!("{}: {e}", path.display())))?;
    let csv_err = |e: csv::Error| Error::Integrity(format!("writing {}: {e}", path.display()));
    w.write_record(["dataset", "model", "f1", "tp", "fp", "fn", "tn"])
        .map_err(csv_err)?;
    for r in results {
        w.write_record([
            r.dataset.clone(),
            r.model.clone(),
            format!("{:.6}", r.f1),
            r.counts.tp.to_string(),
            r.counts.fp.to_string(),
            r.counts.fn_.to_string(),
            r.counts.tn.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io("writing results", e))
}

pub fn read_results_csv(path: impl AsRef<Path>) -> Result<Vec<RunResult>> {
    let path = path.as_ref();
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::Integrity(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let bad = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        if rec.len() != 7 {
            return Err(bad(format!("expected 7 fields, found {}", rec.len())));
        }
        let num = |k: usize| rec[k].parse::<usize>().map_err(|e| bad(e.to_string()));
        let counts = Confusion {
            tp: num(3)?,
            fp: num(4)?,
            fn_: num(5)?,
            tn: num(6)?,
        };
        let mut r = RunResult::new(&rec[0], &rec[1], counts);
        r.f1 = rec[2]
            .parse()
            .map_err(|e: std::num::ParseFloatError| bad(e.to_string()))?;
        out.push(r);
    }
    Ok(out)
}

const ROW_ORDER: [(&str, &str); 9] = [
    ("baseline", "SIARN"),
    ("exclusive", "EX-CASCADE"),
    ("exclusive", "EX-W-CASCADE"),
    ("exclusive", "EX-ED"),
    ("exclusive", "EX-SUMMARY"),
    ("inclusive", "IN-CASCADE"),
    ("inclusive", "IN-W-CASCADE"),
    ("inclusive", "IN-ED"),
    ("inclusive", "IN-SUMMARY"),
];

/// F1 by model and dataset, grouped as baseline / exclusive / inclusive.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultsTable {
    pub datasets: Vec<String>,
    pub rows: Vec<TableRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub group: String,
    pub model: String,
    /// One cell per dataset column: `(f1, best in group)`.
    pub cells: Vec<Option<(f64, bool)>>,
}

fn rounded(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

pub fn results_table(results: &[RunResult]) -> ResultsTable {
    let mut datasets: Vec<String> = Vec::new();
    for r in results {
        if !datasets.contains(&r.dataset) {
            datasets.push(r.dataset.clone());
        }
    }
    let mut models: Vec<(String, String)> = Vec::new();
    for (group, model) in ROW_ORDER {
        if results.iter().any(|r| r.model == model) {
            models.push((group.into(), model.into()));
        }
    }
    for r in results {
        if !models.iter().any(|(_, m)| *m == r.model) {
            models.push(("other".into(), r.model.clone()));
        }
    }
    let lookup = |model: &str, ds: &str| {
        results
            .iter()
            .rev()
            .find(|r| r.model == model && r.dataset == ds)
            .map(|r| r.f1)
    };
    let mut rows: Vec<TableRow> = models
        .iter()
        .map(|(group, model)| TableRow {
            group: group.clone(),
            model: model.clone(),
            cells: datasets.iter().map(|d| lookup(model, d).map(|f| (f, false))).collect(),
        })
        .collect();
    // Flag the best rendered value in each group and column; ties all flagged.
    for col in 0..datasets.len() {
        let groups: BTreeSet<String> = rows.iter().map(|r| r.group.clone()).collect();
        for g in groups {
            let best = rows
                .iter()
                .filter(|r| r.group == g)
                .filter_map(|r| r.cells[col].map(|(f, _)| rounded(f)))
                .fold(f64::NEG_INFINITY, f64::max);
            for r in rows.iter_mut().filter(|r| r.group == g) {
                if let Some((f, flag)) = r.cells[col].as_mut() {
                    *flag = rounded(*f) == best;
                }
            }
        }
    }
    ResultsTable { datasets, rows }
}

impl ResultsTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("group,model");
        for d in &self.datasets {
            let _ = write!(s, ",{d}");
        }
        s.push_str(",best\n");
        for r in &self.rows {
            let _ = write!(s, "{},{}", r.group, r.model);
            let mut best = Vec::new();
            for (d, c) in self.datasets.iter().zip(&r.cells) {
                match c {
                    Some((f, flag)) => {
                        let _ = write!(s, ",{f:.3}");
                        if *flag {
                            best.push(d.as_str());
                        }
                    }
                    None => s.push(','),
                }
            }
            let _ = writeln!(s, ",{}", best.join(";"));
        }
        s
    }

    /// Aligned text; the best value per group is marked with `*`.
    pub fn to_text(&self) -> String {
        let model_w = self.rows.iter().map(|r| r.model.len()).max().unwrap_or(5).max(5);
        let col_w = self.datasets.iter().map(|d| d.len()).max().unwrap_or(0).max(6);
        let mut s = format!("{:<10} {:<model_w$}", "group", "model");
        for d in &self.datasets {
            let _ = write!(s, " {d:>col_w$}");
        }
        s.push('\n');
        let mut last_group = "";
        for r in &self.rows {
            let group = if r.group != last_group { r.group.as_str() } else { "" };
            last_group = &r.group;
            let _ = write!(s, "{group:<10} {:<model_w$}", r.model);
            for c in &r.cells {
                let cell = match c {
                    Some((f, true)) => format!("{f:.3}*"),
                    Some((f, false)) => format!("{f:.3} "),
                    None => "- ".into(),
                };
                let _ = write!(s, " {cell:>w$}", w = col_w + 1);
            }
            s.push('\n');
        }
        s
    }
}
