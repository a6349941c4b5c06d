//! Metrics, length buckets, the paired t-test, feature extraction for the
//! classical classifiers and the experiment runner.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::classics::FeatureBag;
use crate::ensemble::LabelMap;
use crate::error::{Error, Result};
use crate::semcat::{Categorization, SemCat};
use crate::taxonomy::Taxonomy;
use crate::textpipe::TermVector;

pub mod experiment;

pub use experiment::{run_experiment, ExperimentConfig, ExperimentData, ExperimentReport, MethodConfig, MethodKind};

fn check_lengths<A, B>(a: &[A], b: &[B]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(())
}

/// Fraction of exact matches.
pub fn precision<S: AsRef<str>, T: AsRef<str>>(preds: &[S], truths: &[T]) -> Result<f64> {
    check_lengths(preds, truths)?;
    let hits = preds.iter().zip(truths).filter(|(p, t)| p.as_ref() == t.as_ref()).count();
    Ok(hits as f64 / preds.len() as f64)
}

/// Lin similarity between the categories of a predicted and a true label.
pub fn lin_score(pred: &str, truth: &str, tax: &Taxonomy, map: &LabelMap) -> Result<f64> {
    let cat = |l: &str| {
        map.category_of(l)
            .ok_or_else(|| Error::InvalidArgument(format!("label `{l}` maps to no category")))
    };
    Ok(tax.sim_lin(cat(pred)?, cat(truth)?))
}

/// Mean Lin similarity between the categories of predicted and true labels.
pub fn lin_precision<S: AsRef<str>, T: AsRef<str>>(preds: &[S], truths: &[T], tax: &Taxonomy, map: &LabelMap) -> Result<f64> {
    check_lengths(preds, truths)?;
    let mut sum = 0.0;
    for (p, t) in preds.iter().zip(truths) {
        sum += lin_score(p.as_ref(), t.as_ref(), tax, map)?;
    }
    Ok(sum / preds.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LengthBucket {
    Short,
    Medium,
    Long,
    Excluded,
}

impl LengthBucket {
    pub const ALL: [LengthBucket; 4] = [
        LengthBucket::Short,
        LengthBucket::Medium,
        LengthBucket::Long,
        LengthBucket::Excluded,
    ];

    /// Bucket of a document with `chars` Unicode scalars.
    pub fn of_len(chars: usize) -> Self {
        match chars {
            0..=999 => LengthBucket::Excluded,
            1000..=1999 => LengthBucket::Short,
            2000..=9999 => LengthBucket::Medium,
            _ => LengthBucket::Long,
        }
    }

    pub fn of(text: &str) -> Self {
        Self::of_len(text.chars().count())
    }
}

impl fmt::Display for LengthBucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LengthBucket::Short => "short",
            LengthBucket::Medium => "medium",
            LengthBucket::Long => "long",
            LengthBucket::Excluded => "excluded",
        })
    }
}

/// Indices of `texts` per bucket; every bucket is present.
pub fn bucket_by_length<S: AsRef<str>>(texts: &[S]) -> BTreeMap<LengthBucket, Vec<usize>> {
    let mut out: BTreeMap<LengthBucket, Vec<usize>> = LengthBucket::ALL.iter().map(|&b| (b, Vec::new())).collect();
    for (i, t) in texts.iter().enumerate() {
        out.get_mut(&LengthBucket::of(t.as_ref())).unwrap().push(i);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TTest {
    pub t: f64,
    pub df: usize,
    /// Two-sided.
    pub p: f64,
}

/// Paired t-test on `a - b`.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<TTest> {
    check_lengths(a, b)?;
    let n = a.len();
    if n < 2 {
        return Err(Error::Degenerate("paired t-test needs at least two pairs".into()));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = d.iter().sum::<f64>() / n as f64;
    let var = d.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    let sd = var.sqrt();
    if sd <= 1e-12 * mean.abs() || sd == 0.0 {
        return Err(Error::Degenerate("differences have zero variance".into()));
    }
    let t = mean / (sd / (n as f64).sqrt());
    let dist = StudentsT::new(0.0, 1.0, (n - 1) as f64).map_err(|e| Error::Degenerate(e.to_string()))?;
    let p = (2.0 * dist.sf(t.abs())).min(1.0);
    Ok(TTest { t, df: n - 1, p })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FeatureMode {
    #[default]
    Terms,
    Categories,
    Concepts,
}

impl FeatureMode {
    pub const ALL: [FeatureMode; 3] = [FeatureMode::Terms, FeatureMode::Categories, FeatureMode::Concepts];
}

impl FromStr for FeatureMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "terms" => Ok(FeatureMode::Terms),
            "categories" => Ok(FeatureMode::Categories),
            "concepts" => Ok(FeatureMode::Concepts),
            other => Err(Error::InvalidArgument(format!("unknown feature mode `{other}`"))),
        }
    }
}

impl fmt::Display for FeatureMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeatureMode::Terms => "terms",
            FeatureMode::Categories => "categories",
            FeatureMode::Concepts => "concepts",
        })
    }
}

pub fn term_features(v: &TermVector) -> FeatureBag {
    v.iter().map(|(t, w)| (t.to_string(), w)).collect()
}

/// Category or concept features of a finished categorization.
pub fn semantic_features(c: &Categorization, mode: FeatureMode, tax: &Taxonomy) -> FeatureBag {
    match mode {
        FeatureMode::Terms => term_features(&c.terms),
        FeatureMode::Categories => c
            .vector
            .weights()
            .iter()
            .map(|(&k, &w)| (tax.category_name(k).to_string(), w))
            .collect(),
        FeatureMode::Concepts => c
            .assignment
            .concept_weights()
            .into_iter()
            .map(|(p, w)| (tax.concept_name(p).to_string(), w))
            .collect(),
    }
}

/// Feature bag of `text` in the given mode.
pub fn extract_features(text: &str, mode: FeatureMode, semcat: &SemCat<'_>) -> Result<FeatureBag> {
    let v = semcat.term_vector(text)?;
    match mode {
        FeatureMode::Terms => Ok(term_features(&v)),
        _ => Ok(semantic_features(&semcat.categorize_vector(&v)?, mode, semcat.taxonomy())),
    }
}
