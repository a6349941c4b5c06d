//! Unsupervised categorizer.
//!
//! A document's tf-idf terms are matched against concept labels. Terms with
//! one matching concept form the unambiguous context; terms with several
//! candidates are disambiguated against that context using concept
//! similarity. Each concept's weight is then split evenly over its
//! categories, yielding a weighted category ranking whose total equals the
//! total weight of the mapped terms.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse;
use crate::taxonomy::{CategoryId, ConceptId, Measure, Taxonomy};
use crate::textpipe::{top_n_terms, TermVector, TextPipeline};

/// How candidate concepts of an ambiguous term share the term's weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Disambiguation {
    /// Everything to the candidate nearest to the context.
    #[default]
    Nearest,
    /// Proportional to `1/2^i` over ranks `i = 1..m`.
    RankHalf,
    /// Proportional to `1/i`.
    RankInv,
    Uniform,
}

impl Disambiguation {
    pub const ALL: [Disambiguation; 4] = [
        Disambiguation::Nearest,
        Disambiguation::RankHalf,
        Disambiguation::RankInv,
        Disambiguation::Uniform,
    ];

    fn rank_weight(self, rank: usize) -> f64 {
        match self {
            Disambiguation::Nearest => {
                if rank == 1 {
                    1.0
                } else {
                    0.0
                }
            }
            Disambiguation::RankHalf => 0.5f64.powi(rank as i32),
            Disambiguation::RankInv => 1.0 / rank as f64,
            Disambiguation::Uniform => 1.0,
        }
    }
}

impl FromStr for Disambiguation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nearest" => Ok(Disambiguation::Nearest),
            "rank_half" => Ok(Disambiguation::RankHalf),
            "rank_inv" => Ok(Disambiguation::RankInv),
            "uniform" => Ok(Disambiguation::Uniform),
            other => Err(Error::InvalidArgument(format!("unknown disambiguation method `{other}`"))),
        }
    }
}

impl fmt::Display for Disambiguation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Disambiguation::Nearest => "nearest",
            Disambiguation::RankHalf => "rank_half",
            Disambiguation::RankInv => "rank_inv",
            Disambiguation::Uniform => "uniform",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssignedConcept {
    pub term: String,
    pub concept: ConceptId,
    pub weight: f64,
}

/// Weight shares of terms over concepts. Shares of one term sum to the
/// term's weight.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConceptAssignment {
    pub entries: Vec<AssignedConcept>,
    /// Terms without any matching concept.
    pub unresolved: Vec<String>,
}

impl ConceptAssignment {
    pub fn total(&self) -> f64 {
        self.entries.iter().map(|e| e.weight).sum()
    }

    pub fn concepts(&self) -> BTreeSet<ConceptId> {
        self.entries.iter().map(|e| e.concept).collect()
    }

    /// Summed share per concept.
    pub fn concept_weights(&self) -> BTreeMap<ConceptId, f64> {
        let mut out = BTreeMap::new();
        for e in &self.entries {
            *out.entry(e.concept).or_insert(0.0) += e.weight;
        }
        out
    }

    pub fn merge(mut self, other: ConceptAssignment) -> Self {
        self.entries.extend(other.entries);
        self.unresolved.extend(other.unresolved);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmbiguousTerm {
    pub weight: f64,
    /// Candidate concepts in id order; always at least two.
    pub candidates: Vec<ConceptId>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TermMapping {
    pub unambiguous: ConceptAssignment,
    pub ambiguous: BTreeMap<String, AmbiguousTerm>,
}

/// Matches every term of `v` against concept labels.
///
/// With `exact_match` only normalized label equality counts; otherwise terms
/// without an exact hit fall back to diacritic- and punctuation-folded
/// comparison.
pub fn map_terms_to_concepts(v: &TermVector, tax: &Taxonomy, exact_match: bool) -> TermMapping {
    let mut out = TermMapping::default();
    for (term, weight) in v.iter() {
        let mut hits = tax.lookup_exact(term);
        if hits.is_empty() && !exact_match {
            hits = tax.lookup_folded(term);
        }
        match hits {
            [] => out.unambiguous.unresolved.push(term.to_string()),
            [one] => out.unambiguous.entries.push(AssignedConcept {
                term: term.to_string(),
                concept: *one,
                weight,
            }),
            many => {
                out.ambiguous.insert(
                    term.to_string(),
                    AmbiguousTerm {
                        weight,
                        candidates: many.to_vec(),
                    },
                );
            }
        }
    }
    out
}

/// Candidates ordered by mean concept similarity to `context`, descending,
/// ties by concept id. Scores are 0 for an empty context.
pub fn rank_candidates(
    candidates: &[ConceptId],
    context: &BTreeSet<ConceptId>,
    tax: &Taxonomy,
    measure: Measure,
) -> Vec<(ConceptId, f64)> {
    let mut scored: Vec<(ConceptId, f64)> = candidates
        .iter()
        .map(|&c| {
            let score = if context.is_empty() {
                0.0
            } else {
                context.iter().map(|&p| tax.sim_page(c, p, measure)).sum::<f64>() / context.len() as f64
            };
            (c, score)
        })
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    scored
}

/// Resolves ambiguous terms against the unambiguous context. An empty
/// context falls back to uniform sharing for every method.
pub fn disambiguate(
    ambiguous: &BTreeMap<String, AmbiguousTerm>,
    context: &ConceptAssignment,
    tax: &Taxonomy,
    method: Disambiguation,
    measure: Measure,
) -> ConceptAssignment {
    let ctx = context.concepts();
    let method = if ctx.is_empty() {
        Disambiguation::Uniform
    } else {
        method
    };
    let mut out = ConceptAssignment::default();
    for (term, amb) in ambiguous {
        let ranked = rank_candidates(&amb.candidates, &ctx, tax, measure);
        let raw: Vec<f64> = (1..=ranked.len()).map(|i| method.rank_weight(i)).collect();
        let norm: f64 = raw.iter().sum();
        for ((concept, _), r) in ranked.into_iter().zip(raw) {
            if r > 0.0 {
                out.entries.push(AssignedConcept {
                    term: term.clone(),
                    concept,
                    weight: amb.weight * r / norm,
                });
            }
        }
    }
    out
}

/// Category weights produced by the categorizer.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CategoryVector {
    weights: BTreeMap<CategoryId, f64>,
}

impl CategoryVector {
    pub fn new(weights: BTreeMap<CategoryId, f64>) -> Self {
        CategoryVector { weights }
    }

    pub fn weights(&self) -> &BTreeMap<CategoryId, f64> {
        &self.weights
    }

    pub fn into_weights(self) -> BTreeMap<CategoryId, f64> {
        self.weights
    }

    pub fn get(&self, k: CategoryId) -> f64 {
        self.weights.get(&k).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total(&self) -> f64 {
        sparse::l1(&self.weights)
    }

    /// Descending by weight, ties by category id.
    pub fn ranked(&self) -> Vec<(CategoryId, f64)> {
        sparse::ranked(&self.weights)
    }
}

/// Splits each concept's weight evenly over its categories.
pub fn project_to_categories(assignment: &ConceptAssignment, tax: &Taxonomy) -> CategoryVector {
    let mut weights = BTreeMap::new();
    for e in &assignment.entries {
        let cats = &tax.concept_info(e.concept).categories;
        let share = e.weight / cats.len() as f64;
        for &k in cats {
            *weights.entry(k).or_insert(0.0) += share;
        }
    }
    CategoryVector { weights }
}

pub fn top_n_categories(v: &CategoryVector, n: usize) -> Vec<(CategoryId, f64)> {
    let mut r = v.ranked();
    r.truncate(n);
    r
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SemCatConfig {
    /// Keep only this many top tf-idf terms before mapping.
    pub top_terms: Option<usize>,
    pub exact_match: bool,
    pub disambiguation: Disambiguation,
    pub measure: Measure,
    /// Truncate the output ranking.
    pub top_categories: Option<usize>,
}

impl Default for SemCatConfig {
    fn default() -> Self {
        SemCatConfig {
            top_terms: Some(10),
            exact_match: true,
            disambiguation: Disambiguation::Nearest,
            measure: Measure::Lin,
            top_categories: None,
        }
    }
}

/// Output of one categorization.
#[derive(Debug, Clone, PartialEq)]
pub struct Categorization {
    pub vector: CategoryVector,
    /// Final concept shares, unambiguous and disambiguated.
    pub assignment: ConceptAssignment,
    /// The term vector actually mapped (after top-n selection).
    pub terms: TermVector,
}

impl Categorization {
    pub fn ranked(&self) -> Vec<(CategoryId, f64)> {
        self.vector.ranked()
    }
}

/// Taxonomy-backed categorizer.
#[derive(Debug, Clone)]
pub struct SemCat<'a> {
    tax: &'a Taxonomy,
    pipeline: TextPipeline,
    config: SemCatConfig,
}

impl<'a> SemCat<'a> {
    pub fn new(tax: &'a Taxonomy, pipeline: TextPipeline, config: SemCatConfig) -> Self {
        SemCat { tax, pipeline, config }
    }

    pub fn taxonomy(&self) -> &'a Taxonomy {
        self.tax
    }

    pub fn pipeline(&self) -> &TextPipeline {
        &self.pipeline
    }

    pub fn config(&self) -> &SemCatConfig {
        &self.config
    }

    pub fn with_config(&self, config: SemCatConfig) -> Self {
        SemCat {
            tax: self.tax,
            pipeline: self.pipeline.clone(),
            config,
        }
    }

    pub fn term_vector(&self, text: &str) -> Result<TermVector> {
        self.pipeline.vector(text)
    }

    pub fn categorize(&self, text: &str) -> Result<Categorization> {
        self.categorize_vector(&self.pipeline.vector(text)?)
    }

    pub fn categorize_vector(&self, v: &TermVector) -> Result<Categorization> {
        let terms = match self.config.top_terms {
            Some(n) => top_n_terms(v, n),
            None => v.clone(),
        };
        let mapping = map_terms_to_concepts(&terms, self.tax, self.config.exact_match);
        let resolved = disambiguate(
            &mapping.ambiguous,
            &mapping.unambiguous,
            self.tax,
            self.config.disambiguation,
            self.config.measure,
        );
        let assignment = mapping.unambiguous.merge(resolved);
        if assignment.entries.is_empty() {
            return Err(Error::EmptyVector);
        }
        let mut vector = project_to_categories(&assignment, self.tax);
        if let Some(n) = self.config.top_categories {
            vector = CategoryVector::new(top_n_categories(&vector, n).into_iter().collect());
        }
        Ok(Categorization {
            vector,
            assignment,
            terms,
        })
    }
}
