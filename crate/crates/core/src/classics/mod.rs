//! Supervised baselines sharing one train/predict contract.
//!
//! Every classifier consumes documents as sparse feature bags and returns a
//! full label ranking, descending by score with ties broken by label.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub mod llda;
pub mod nb;
pub mod winnow;

pub use llda::{LldaModel, LldaParams};
pub use nb::NbModel;
pub use winnow::{WinnowModel, WinnowParams};

/// Feature name to nonnegative value (counts or normalized weights).
pub type FeatureBag = BTreeMap<String, f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledBag {
    pub label: String,
    pub features: FeatureBag,
}

impl LabeledBag {
    pub fn new(label: impl Into<String>, features: FeatureBag) -> Self {
        LabeledBag {
            label: label.into(),
            features,
        }
    }
}

/// Bag of raw counts from a token list.
pub fn count_bag<I: IntoIterator<Item = S>, S: AsRef<str>>(tokens: I) -> FeatureBag {
    let mut bag = FeatureBag::new();
    for t in tokens {
        *bag.entry(t.as_ref().to_string()).or_insert(0.0) += 1.0;
    }
    bag
}

/// Sorts `(label, score)` descending, ties by label.
pub fn rank_scores(mut scores: Vec<(String, f64)>) -> Vec<(String, f64)> {
    scores.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    scores
}

/// Posterior probability of the top entry of a log-score ranking.
pub(crate) fn softmax_top(ranking: &[(String, f64)]) -> f64 {
    match ranking.first() {
        None => 0.0,
        Some((_, top)) => {
            let z: f64 = ranking.iter().map(|(_, s)| (s - top).exp()).sum();
            1.0 / z
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    #[serde(alias = "nb")]
    NaiveBayes,
    Winnow,
    Llda,
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nb" | "naive_bayes" | "bayes" => Ok(ClassifierKind::NaiveBayes),
            "winnow" => Ok(ClassifierKind::Winnow),
            "llda" => Ok(ClassifierKind::Llda),
            other => Err(Error::InvalidArgument(format!("unknown classifier `{other}`"))),
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassifierKind::NaiveBayes => "nb",
            ClassifierKind::Winnow => "winnow",
            ClassifierKind::Llda => "llda",
        })
    }
}

/// Hyperparameters of one classifier type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClassifierSpec {
    #[serde(alias = "nb")]
    NaiveBayes,
    Winnow(#[serde(default)] WinnowParams),
    Llda(#[serde(default)] LldaParams),
}

impl ClassifierSpec {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            ClassifierSpec::NaiveBayes => ClassifierKind::NaiveBayes,
            ClassifierSpec::Winnow(_) => ClassifierKind::Winnow,
            ClassifierSpec::Llda(_) => ClassifierKind::Llda,
        }
    }

    pub fn default_for(kind: ClassifierKind) -> Self {
        match kind {
            ClassifierKind::NaiveBayes => ClassifierSpec::NaiveBayes,
            ClassifierKind::Winnow => ClassifierSpec::Winnow(WinnowParams::default()),
            ClassifierKind::Llda => ClassifierSpec::Llda(LldaParams::default()),
        }
    }

    /// Trains the classifier; `seed` overrides the seed of stochastic ones.
    pub fn train(&self, docs: &[LabeledBag], seed: u64) -> Result<Classifier> {
        Ok(match self {
            ClassifierSpec::NaiveBayes => Classifier::NaiveBayes(NbModel::train(docs)?),
            ClassifierSpec::Winnow(p) => Classifier::Winnow(WinnowModel::train(docs, p)?),
            ClassifierSpec::Llda(p) => {
                let p = LldaParams { seed, ..p.clone() };
                let docs: Vec<llda::LldaDoc> = docs
                    .iter()
                    .map(|d| llda::LldaDoc::from_bag(vec![d.label.clone()], &d.features, p.count_scale))
                    .collect();
                Classifier::Llda(LldaModel::train(&docs, &p)?)
            }
        })
    }
}

/// A trained baseline classifier.
#[derive(Debug, Clone, PartialEq)]
pub enum Classifier {
    NaiveBayes(NbModel),
    Winnow(WinnowModel),
    Llda(LldaModel),
}

impl Classifier {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            Classifier::NaiveBayes(_) => ClassifierKind::NaiveBayes,
            Classifier::Winnow(_) => ClassifierKind::Winnow,
            Classifier::Llda(_) => ClassifierKind::Llda,
        }
    }

    pub fn predict(&self, doc: &FeatureBag) -> Vec<(String, f64)> {
        match self {
            Classifier::NaiveBayes(m) => m.predict(doc),
            Classifier::Winnow(m) => m.predict(doc),
            Classifier::Llda(m) => m.predict(doc),
        }
    }

    /// Score of the top label mapped into `[0, 1]`: posterior probability
    /// for the log-score models, logistic of the margin for Winnow.
    pub fn confidence(&self, ranking: &[(String, f64)]) -> f64 {
        match self {
            Classifier::NaiveBayes(_) | Classifier::Llda(_) => softmax_top(ranking),
            Classifier::Winnow(_) => ranking.first().map_or(0.0, |(_, m)| 1.0 / (1.0 + (-m).exp())),
        }
    }

    pub fn labels(&self) -> Vec<String> {
        match self {
            Classifier::NaiveBayes(m) => m.labels().to_vec(),
            Classifier::Winnow(m) => m.labels().to_vec(),
            Classifier::Llda(m) => m.labels().to_vec(),
        }
    }

    pub fn to_model_file(&self) -> crate::modelfile::ModelFile {
        match self {
            Classifier::NaiveBayes(m) => m.to_model_file(),
            Classifier::Winnow(m) => m.to_model_file(),
            Classifier::Llda(m) => m.to_model_file(),
        }
    }

    pub fn from_model_file(f: &crate::modelfile::ModelFile) -> Result<Self> {
        match f.kind.as_str() {
            "nb" => Ok(Classifier::NaiveBayes(NbModel::from_model_file(f)?)),
            "winnow" => Ok(Classifier::Winnow(WinnowModel::from_model_file(f)?)),
            "llda" => Ok(Classifier::Llda(LldaModel::from_model_file(f)?)),
            other => Err(Error::Model(format!("unknown classifier kind `{other}`"))),
        }
    }
}

/// Distinct labels in id order; errors on an empty training set.
pub(crate) fn label_set(docs: &[LabeledBag]) -> Result<Vec<String>> {
    if docs.is_empty() {
        return Err(Error::Training("empty training set".into()));
    }
    let mut labels: Vec<String> = docs.iter().map(|d| d.label.clone()).collect();
    labels.sort();
    labels.dedup();
    Ok(labels)
}
