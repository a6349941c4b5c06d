//! Multinomial Naive Bayes with add-one smoothing.
//!
//! `P(w|c) = (1 + n_cw) / (k + n_c)` where `n_cw` is the total count of `w`
//! over the class documents, `n_c` the class's total count and `k` the
//! training vocabulary size.

use std::collections::{BTreeMap, BTreeSet};

use super::{label_set, rank_scores, FeatureBag, LabeledBag};
use crate::error::{Error, Result};
use crate::modelfile::ModelFile;

#[derive(Debug, Clone, PartialEq)]
pub struct NbModel {
    labels: Vec<String>,
    priors: Vec<f64>,
    counts: Vec<BTreeMap<String, f64>>,
    totals: Vec<f64>,
    vocab: BTreeSet<String>,
}

impl NbModel {
    pub fn train(docs: &[LabeledBag]) -> Result<Self> {
        let labels = label_set(docs)?;
        let n = labels.len();
        let mut doc_counts = vec![0usize; n];
        let mut counts = vec![BTreeMap::new(); n];
        let mut totals = vec![0.0; n];
        let mut vocab = BTreeSet::new();
        for d in docs {
            let c = labels.binary_search(&d.label).expect("label set covers docs");
            doc_counts[c] += 1;
            for (w, &x) in &d.features {
                if x < 0.0 {
                    return Err(Error::InvalidArgument(format!("negative count for `{w}`")));
                }
                *counts[c].entry(w.clone()).or_insert(0.0) += x;
                totals[c] += x;
                vocab.insert(w.clone());
            }
        }
        let priors = doc_counts.iter().map(|&m| m as f64 / docs.len() as f64).collect();
        Ok(NbModel {
            labels,
            priors,
            counts,
            totals,
            vocab,
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn vocabulary_size(&self) -> usize {
        self.vocab.len()
    }

    fn class_index(&self, label: &str) -> Option<usize> {
        self.labels.binary_search_by(|l| l.as_str().cmp(label)).ok()
    }

    pub fn prior(&self, label: &str) -> Option<f64> {
        self.class_index(label).map(|c| self.priors[c])
    }

    /// Smoothed `P(w|c)`. Words outside the vocabulary get the class floor.
    pub fn likelihood(&self, label: &str, word: &str) -> Option<f64> {
        self.class_index(label).map(|c| self.likelihood_at(c, word))
    }

    fn likelihood_at(&self, c: usize, word: &str) -> f64 {
        let n = self.counts[c].get(word).copied().unwrap_or(0.0);
        (1.0 + n) / (self.vocab.len() as f64 + self.totals[c])
    }

    /// `log P(c) + sum_w n_wd log P(w|c)`; out-of-vocabulary words are ignored.
    pub fn log_score(&self, label: &str, doc: &FeatureBag) -> Option<f64> {
        self.class_index(label).map(|c| self.log_score_at(c, doc))
    }

    fn log_score_at(&self, c: usize, doc: &FeatureBag) -> f64 {
        let mut s = self.priors[c].ln();
        for (w, &n) in doc {
            if n != 0.0 && self.vocab.contains(w) {
                s += n * self.likelihood_at(c, w).ln();
            }
        }
        s
    }

    pub fn predict(&self, doc: &FeatureBag) -> Vec<(String, f64)> {
        rank_scores(
            (0..self.labels.len())
                .map(|c| (self.labels[c].clone(), self.log_score_at(c, doc)))
                .collect(),
        )
    }

    pub fn to_model_file(&self) -> ModelFile {
        let mut f = ModelFile::new("nb").param("k", self.vocab.len());
        for (c, l) in self.labels.iter().enumerate() {
            f.push("P", l, [("prior", self.priors[c]), ("total", self.totals[c])]);
            f.push("W", l, self.counts[c].iter().map(|(w, &n)| (w.clone(), n)));
        }
        f.push("V", "", self.vocab.iter().map(|w| (w.clone(), 1.0)));
        f
    }

    pub fn from_model_file(f: &ModelFile) -> Result<Self> {
        f.expect_kind("nb")?;
        let mut labels = Vec::new();
        let mut priors = Vec::new();
        let mut totals = Vec::new();
        for r in f.rows_tagged("P") {
            let get = |key: &str| {
                r.entries
                    .iter()
                    .find(|e| e.0 == key)
                    .map(|e| e.1)
                    .ok_or_else(|| Error::Model(format!("class `{}` lacks {key}", r.label)))
            };
            labels.push(r.label.clone());
            priors.push(get("prior")?);
            totals.push(get("total")?);
        }
        let mut counts = vec![BTreeMap::new(); labels.len()];
        for r in f.rows_tagged("W") {
            let c = labels
                .iter()
                .position(|l| *l == r.label)
                .ok_or_else(|| Error::Model(format!("counts for unknown class `{}`", r.label)))?;
            counts[c] = r.entries.iter().cloned().collect();
        }
        let vocab: BTreeSet<String> = f.rows_tagged("V").flat_map(|r| r.entries.iter().map(|e| e.0.clone())).collect();
        if f.get::<usize>("k")? != vocab.len() {
            return Err(Error::Model("vocabulary size mismatch".into()));
        }
        if labels.is_empty() || !labels.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Model("classes missing or out of order".into()));
        }
        Ok(NbModel {
            labels,
            priors,
            counts,
            totals,
            vocab,
        })
    }
}
