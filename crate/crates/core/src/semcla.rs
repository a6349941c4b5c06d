//! Semantic classifier over extended category vectors.
//!
//! Each categorized document gets its category vector extended with
//! `alpha`-scaled mass on direct super-categories. A new document is
//! assigned to the training group with the highest mean cosine similarity
//! (or, in centroid mode, the highest cosine to the group mean).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modelfile::ModelFile;
use crate::semcat::{CategoryVector, SemCat};
use crate::sparse::{self, SparseVec};
use crate::taxonomy::{CategoryId, Taxonomy};

pub const DEFAULT_ALPHA: f64 = 0.33;

#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedCategoryVector {
    pub weights: SparseVec<CategoryId>,
    pub alpha: f64,
}

/// Adds `w * alpha / p` to each of the `p` direct parents of every entry
/// `(k, w)`. Original entries are kept; nothing propagates past one level.
pub fn extend_vector(v: &CategoryVector, tax: &Taxonomy, alpha: f64) -> ExtendedCategoryVector {
    let mut weights = v.weights().clone();
    if alpha > 0.0 {
        for (&k, &w) in v.weights() {
            let parents = tax.parents(k);
            if parents.is_empty() {
                continue;
            }
            let share = w * alpha / parents.len() as f64;
            for &p in parents {
                *weights.entry(p).or_insert(0.0) += share;
            }
        }
    }
    ExtendedCategoryVector { weights, alpha }
}

pub fn cosine(a: &ExtendedCategoryVector, b: &ExtendedCategoryVector) -> f64 {
    sparse::cosine(&a.weights, &b.weights)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupMode {
    /// Mean cosine over every training vector of the group.
    #[default]
    Average,
    /// Cosine to the group's mean vector.
    Centroid,
}

impl FromStr for GroupMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "average" => Ok(GroupMode::Average),
            "centroid" => Ok(GroupMode::Centroid),
            other => Err(Error::InvalidArgument(format!("unknown group mode `{other}`"))),
        }
    }
}

impl fmt::Display for GroupMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GroupMode::Average => "average",
            GroupMode::Centroid => "centroid",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemClaModel {
    alpha: f64,
    mode: GroupMode,
    classes: BTreeMap<String, Vec<SparseVec<CategoryId>>>,
    centroids: Option<BTreeMap<String, SparseVec<CategoryId>>>,
}

fn centroid(vectors: &[SparseVec<CategoryId>]) -> SparseVec<CategoryId> {
    let mut c = SparseVec::new();
    for v in vectors {
        for (&k, &w) in v {
            *c.entry(k).or_insert(0.0) += w;
        }
    }
    let n = vectors.len() as f64;
    for w in c.values_mut() {
        *w /= n;
    }
    c
}

impl SemClaModel {
    /// Builds a model from already categorized training documents.
    pub fn from_vectors(
        groups: BTreeMap<String, Vec<CategoryVector>>,
        tax: &Taxonomy,
        alpha: f64,
        mode: GroupMode,
    ) -> Result<Self> {
        if !(alpha >= 0.0) {
            return Err(Error::InvalidArgument(format!("alpha must be >= 0, got {alpha}")));
        }
        if groups.is_empty() {
            return Err(Error::Training("no classes".into()));
        }
        let mut classes = BTreeMap::new();
        for (label, vs) in groups {
            if vs.is_empty() {
                return Err(Error::Training(format!("class `{label}` has no categorizable documents")));
            }
            let ext: Vec<_> = vs.iter().map(|v| extend_vector(v, tax, alpha).weights).collect();
            classes.insert(label, ext);
        }
        let centroids = match mode {
            GroupMode::Average => None,
            GroupMode::Centroid => Some(classes.iter().map(|(l, vs)| (l.clone(), centroid(vs))).collect()),
        };
        Ok(SemClaModel {
            alpha,
            mode,
            classes,
            centroids,
        })
    }

    /// Categorizes labeled documents and builds the model. Documents that
    /// fail categorization are skipped.
    pub fn train<'d, I>(docs: I, semcat: &SemCat<'_>, alpha: f64, mode: GroupMode) -> Result<Self>
    where
        I: IntoIterator<Item = (&'d str, &'d str)>,
    {
        let mut groups: BTreeMap<String, Vec<CategoryVector>> = BTreeMap::new();
        let docs: Vec<(&str, &str)> = docs.into_iter().collect();
        let results: Vec<Result<CategoryVector>> = docs
            .par_iter()
            .map(|(_, text)| semcat.categorize(text).map(|c| c.vector))
            .collect();
        for ((label, _), res) in docs.iter().zip(results) {
            let entry = groups.entry(label.to_string()).or_default();
            match res {
                Ok(v) => entry.push(v),
                Err(e) => log::warn!("skipping training document of class `{label}`: {e}"),
            }
        }
        Self::from_vectors(groups, semcat.taxonomy(), alpha, mode)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn mode(&self) -> GroupMode {
        self.mode
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.classes.keys().map(String::as_str)
    }

    pub fn class_sizes(&self) -> BTreeMap<&str, usize> {
        self.classes.iter().map(|(l, v)| (l.as_str(), v.len())).collect()
    }

    /// Ranked `(label, score)`, descending, ties by label.
    pub fn classify_vector(&self, v: &CategoryVector, tax: &Taxonomy) -> Vec<(String, f64)> {
        let doc = extend_vector(v, tax, self.alpha).weights;
        let mut scores: Vec<(String, f64)> = match &self.centroids {
            Some(cs) => cs
                .iter()
                .map(|(l, c)| (l.clone(), sparse::cosine(&doc, c)))
                .collect(),
            None => self
                .classes
                .iter()
                .map(|(l, vs)| {
                    let total: f64 = vs.iter().map(|t| sparse::cosine(&doc, t)).sum();
                    (l.clone(), total / vs.len() as f64)
                })
                .collect(),
        };
        scores.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        scores
    }

    pub fn classify(&self, text: &str, semcat: &SemCat<'_>) -> Result<Vec<(String, f64)>> {
        let c = semcat.categorize(text)?;
        Ok(self.classify_vector(&c.vector, semcat.taxonomy()))
    }

    pub fn to_model_file(&self, tax: &Taxonomy) -> ModelFile {
        let mut f = ModelFile::new("semcla")
            .param("alpha", self.alpha)
            .param("mode", self.mode);
        let named = |v: &SparseVec<CategoryId>| -> Vec<(String, f64)> {
            v.iter().map(|(&k, &w)| (tax.category_name(k).to_string(), w)).collect()
        };
        for (label, vs) in &self.classes {
            for v in vs {
                f.push("V", label, named(v));
            }
        }
        if let Some(cs) = &self.centroids {
            for (label, c) in cs {
                f.push("C", label, named(c));
            }
        }
        f
    }

    pub fn from_model_file(f: &ModelFile, tax: &Taxonomy) -> Result<Self> {
        f.expect_kind("semcla")?;
        let alpha: f64 = f.get("alpha")?;
        let mode: GroupMode = f.get("mode")?;
        let resolve = |entries: &[(String, f64)]| -> Result<SparseVec<CategoryId>> {
            entries.iter().map(|(k, w)| Ok((tax.category(k)?, *w))).collect()
        };
        let mut classes: BTreeMap<String, Vec<SparseVec<CategoryId>>> = BTreeMap::new();
        for r in f.rows_tagged("V") {
            classes.entry(r.label.clone()).or_default().push(resolve(&r.entries)?);
        }
        if classes.is_empty() {
            return Err(Error::Model("semcla model has no training vectors".into()));
        }
        let centroids = match mode {
            GroupMode::Average => None,
            GroupMode::Centroid => {
                let mut cs = BTreeMap::new();
                for r in f.rows_tagged("C") {
                    cs.insert(r.label.clone(), resolve(&r.entries)?);
                }
                if cs.len() != classes.len() {
                    return Err(Error::Model("centroid rows do not match classes".into()));
                }
                Some(cs)
            }
        };
        Ok(SemClaModel {
            alpha,
            mode,
            classes,
            centroids,
        })
    }
}

/// `0.0, 0.05, ..., 0.5`.
pub fn default_alpha_grid() -> Vec<f64> {
    (0..=10).map(|i| i as f64 / 20.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Calibration {
    pub alpha: f64,
    /// `(alpha, mean rank of different-group pairs - mean rank of same-group pairs)`
    pub separations: Vec<(f64, f64)>,
}

/// Separation score of one alpha. Pairs are ranked by descending cosine
/// (rank 1 = most similar) with tied cosines sharing their mean rank.
pub fn group_separation(groups: &BTreeMap<String, Vec<CategoryVector>>, tax: &Taxonomy, alpha: f64) -> Result<f64> {
    let docs: Vec<(usize, SparseVec<CategoryId>)> = groups
        .values()
        .enumerate()
        .flat_map(|(g, vs)| vs.iter().map(move |v| (g, v)))
        .map(|(g, v)| (g, extend_vector(v, tax, alpha).weights))
        .collect();
    let mut pairs: Vec<(f64, bool)> = Vec::with_capacity(docs.len() * docs.len().saturating_sub(1) / 2);
    for i in 0..docs.len() {
        for j in i + 1..docs.len() {
            pairs.push((sparse::cosine(&docs[i].1, &docs[j].1), docs[i].0 == docs[j].0));
        }
    }
    let same = pairs.iter().filter(|p| p.1).count();
    let diff = pairs.len() - same;
    if same == 0 || diff == 0 {
        return Err(Error::Calibration(format!(
            "need at least one same-group and one different-group pair (have {same} and {diff})"
        )));
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let (mut same_sum, mut diff_sum) = (0.0, 0.0);
    let mut i = 0;
    while i < pairs.len() {
        let mut j = i;
        while j + 1 < pairs.len() && pairs[j + 1].0 == pairs[i].0 {
            j += 1;
        }
        // ranks i+1 ..= j+1 share their mean
        let rank = (i + j + 2) as f64 / 2.0;
        for p in &pairs[i..=j] {
            if p.1 {
                same_sum += rank;
            } else {
                diff_sum += rank;
            }
        }
        i = j + 1;
    }
    Ok(diff_sum / diff as f64 - same_sum / same as f64)
}

/// Picks the grid alpha that best separates the groups; ties go to the
/// smaller alpha.
pub fn calibrate_alpha(
    groups: &BTreeMap<String, Vec<CategoryVector>>,
    tax: &Taxonomy,
    grid: &[f64],
) -> Result<Calibration> {
    if grid.is_empty() {
        return Err(Error::Calibration("empty alpha grid".into()));
    }
    if groups.len() < 2 {
        return Err(Error::Calibration("need at least two groups".into()));
    }
    if let Some((l, _)) = groups.iter().find(|(_, v)| v.len() < 2) {
        return Err(Error::Calibration(format!("group `{l}` has fewer than two documents")));
    }
    let mut grid: Vec<f64> = grid.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let seps: Vec<f64> = grid
        .par_iter()
        .map(|&a| group_separation(groups, tax, a))
        .collect::<Result<_>>()?;
    let mut best = 0;
    for i in 1..grid.len() {
        if seps[i] > seps[best] + 1e-12 {
            best = i;
        }
    }
    Ok(Calibration {
        alpha: grid[best],
        separations: grid.into_iter().zip(seps).collect(),
    })
}

/// Keeps at most `max_per_group` documents per group, drawn without
/// replacement with a seeded generator; calibration cost is quadratic in
/// the number of documents.
pub fn subsample_groups(
    groups: &BTreeMap<String, Vec<CategoryVector>>,
    max_per_group: usize,
    seed: u64,
) -> BTreeMap<String, Vec<CategoryVector>> {
    use rand::SeedableRng;
    groups
        .iter()
        .enumerate()
        .map(|(i, (l, vs))| {
            if vs.len() <= max_per_group {
                return (l.clone(), vs.clone());
            }
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(crate::ensemble::mix_seed(seed, i as u64));
            let mut idx = rand::seq::index::sample(&mut rng, vs.len(), max_per_group).into_vec();
            idx.sort_unstable();
            (l.clone(), idx.into_iter().map(|j| vs[j].clone()).collect())
        })
        .collect()
}
