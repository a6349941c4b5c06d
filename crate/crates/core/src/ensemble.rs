//! Bagging ensembles, taxonomy-driven training samples, vote aggregation
//! and the heterogeneous committee that mixes classifier votes with
//! weighted categorizer votes.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classics::{Classifier, ClassifierSpec, FeatureBag, LabeledBag};
use crate::error::{Error, Result};
use crate::semcat::CategoryVector;
use crate::taxonomy::{CategoryId, Taxonomy};

/// Human-readable statement of [`mix_seed`], echoed into reports.
pub const SEED_RULE: &str = "child = splitmix64(master ^ splitmix64(index))";

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the seed of child `index` from `master`.
pub fn mix_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index))
}

/// Stable 64-bit FNV-1a hash, used to derive per-document tie seeds.
pub fn stable_hash(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

// ---------------------------------------------------------------------------
// votes

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AggregationMode {
    SingleVote,
    #[default]
    Weighted,
    Rank,
}

impl FromStr for AggregationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single_vote" | "single" | "majority" => Ok(AggregationMode::SingleVote),
            "weighted" => Ok(AggregationMode::Weighted),
            "rank" => Ok(AggregationMode::Rank),
            other => Err(Error::InvalidArgument(format!("unknown aggregation mode `{other}`"))),
        }
    }
}

impl fmt::Display for AggregationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AggregationMode::SingleVote => "single_vote",
            AggregationMode::Weighted => "weighted",
            AggregationMode::Rank => "rank",
        })
    }
}

/// One `(label, weight, rank)` contribution. A zero weight abstains.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Vote {
    pub label: String,
    pub weight: f64,
    pub rank: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VoteSet {
    votes: Vec<Vote>,
}

impl VoteSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, label: impl Into<String>, weight: f64, rank: usize) -> Result<()> {
        if !(weight >= 0.0) || !weight.is_finite() {
            return Err(Error::InvalidArgument(format!("vote weight must be finite and >= 0, got {weight}")));
        }
        if rank == 0 {
            return Err(Error::InvalidArgument("vote ranks start at 1".into()));
        }
        self.votes.push(Vote {
            label: label.into(),
            weight,
            rank,
        });
        Ok(())
    }

    /// Adds one member's ballot from its ranking: the top label only, or the
    /// top `depth` labels in rank mode.
    pub fn push_ranking(&mut self, ranking: &[(String, f64)], weight: f64, mode: AggregationMode, depth: usize) -> Result<()> {
        let n = if mode == AggregationMode::Rank { depth } else { 1 };
        for (i, (label, _)) in ranking.iter().take(n).enumerate() {
            self.push(label.clone(), weight, i + 1)?;
        }
        Ok(())
    }

    pub fn votes(&self) -> &[Vote] {
        &self.votes
    }

    pub fn len(&self) -> usize {
        self.votes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.votes.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outcome {
    pub winner: String,
    pub tally: BTreeMap<String, f64>,
    /// Labels sharing the maximal tally (one entry when there was no tie).
    pub tied: Vec<String>,
}

/// Tallies the votes and picks the winner.
///
/// * single vote: one point per rank-1 vote;
/// * weighted: sum of vote weights;
/// * rank: `depth - rank + 1` Borda points for every vote ranked within `depth`.
///
/// Exact ties are resolved by a uniform draw from the sorted tied set using
/// `seed` alone, so the result does not depend on vote order.
pub fn aggregate(votes: &VoteSet, mode: AggregationMode, depth: usize, seed: u64) -> Result<Outcome> {
    if votes.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut parts: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for v in &votes.votes {
        if v.weight == 0.0 {
            continue;
        }
        let points = match mode {
            AggregationMode::SingleVote if v.rank == 1 => 1.0,
            AggregationMode::SingleVote => continue,
            AggregationMode::Weighted => v.weight,
            AggregationMode::Rank if v.rank <= depth => (depth - v.rank + 1) as f64,
            AggregationMode::Rank => continue,
        };
        parts.entry(v.label.as_str()).or_default().push(points);
    }
    if parts.is_empty() {
        return Err(Error::Degenerate("every vote abstained".into()));
    }
    // summing in sorted order keeps the tally independent of vote order
    let tally: BTreeMap<String, f64> = parts
        .into_iter()
        .map(|(l, mut ps)| {
            ps.sort_by(f64::total_cmp);
            (l.to_string(), ps.iter().sum())
        })
        .collect();
    let best = tally.values().copied().fold(f64::NEG_INFINITY, f64::max);
    let tied: Vec<String> = tally.iter().filter(|(_, &s)| s == best).map(|(l, _)| l.clone()).collect();
    let winner = if tied.len() == 1 {
        tied[0].clone()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        tied[rng.gen_range(0..tied.len())].clone()
    };
    Ok(Outcome { winner, tally, tied })
}

// ---------------------------------------------------------------------------
// training samples

/// How far below the class category a document annotation may sit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
#[serde(try_from = "LevelRepr", into = "String")]
pub enum SampleLevel {
    One,
    #[default]
    Two,
    Inf,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum LevelRepr {
    Int(u64),
    Str(String),
}

impl TryFrom<LevelRepr> for SampleLevel {
    type Error = Error;

    fn try_from(r: LevelRepr) -> Result<Self> {
        match r {
            LevelRepr::Int(n) => n.to_string().parse(),
            LevelRepr::Str(s) => s.parse(),
        }
    }
}

impl From<SampleLevel> for String {
    fn from(l: SampleLevel) -> String {
        l.to_string()
    }
}

impl FromStr for SampleLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" => Ok(SampleLevel::One),
            "2" => Ok(SampleLevel::Two),
            "inf" | "∞" => Ok(SampleLevel::Inf),
            other => Err(Error::InvalidArgument(format!("sample level must be 1, 2 or inf, got `{other}`"))),
        }
    }
}

impl fmt::Display for SampleLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SampleLevel::One => "1",
            SampleLevel::Two => "2",
            SampleLevel::Inf => "inf",
        })
    }
}

/// Whether a document annotated with `categories` may train class `class`.
pub fn is_eligible(tax: &Taxonomy, categories: &[CategoryId], class: CategoryId, level: SampleLevel) -> bool {
    categories.iter().any(|&k| match level {
        SampleLevel::One => k == class,
        SampleLevel::Two => k == class || tax.parents(k).contains(&class),
        SampleLevel::Inf => tax.is_descendant(k, class),
    })
}

/// Up to `size` indices drawn uniformly without replacement, ascending.
fn sample_indices(pool: Vec<usize>, size: usize, seed: u64) -> Vec<usize> {
    if pool.len() <= size {
        return pool;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<usize> = rand::seq::index::sample(&mut rng, pool.len(), size)
        .into_iter()
        .map(|i| pool[i])
        .collect();
    picked.sort_unstable();
    picked
}

/// Per class, indices of documents drawn from those whose annotations are
/// eligible at `level`. Class `i` (in label order) samples with
/// `mix_seed(seed, i)`.
pub fn draw_training_sample(
    tax: &Taxonomy,
    annotations: &[Vec<CategoryId>],
    class_categories: &BTreeMap<String, CategoryId>,
    level: SampleLevel,
    size: usize,
    seed: u64,
) -> Result<BTreeMap<String, Vec<usize>>> {
    let mut out = BTreeMap::new();
    for (i, (label, &class)) in class_categories.iter().enumerate() {
        let pool: Vec<usize> = annotations
            .iter()
            .enumerate()
            .filter(|(_, cats)| is_eligible(tax, cats, class, level))
            .map(|(d, _)| d)
            .collect();
        if pool.is_empty() {
            return Err(Error::NoEligibleDocuments(label.clone()));
        }
        out.insert(label.clone(), sample_indices(pool, size, mix_seed(seed, i as u64)));
    }
    Ok(out)
}

/// Per label, up to `size` indices of documents carrying that label.
pub fn draw_label_sample(labels: &[Option<String>], size: usize, seed: u64) -> Result<BTreeMap<String, Vec<usize>>> {
    let mut pools: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (d, l) in labels.iter().enumerate() {
        if let Some(l) = l {
            pools.entry(l.clone()).or_default().push(d);
        }
    }
    if pools.is_empty() {
        return Err(Error::Training("no labeled documents to sample from".into()));
    }
    Ok(pools
        .into_iter()
        .enumerate()
        .map(|(i, (l, pool))| (l, sample_indices(pool, size, mix_seed(seed, i as u64))))
        .collect())
}

// ---------------------------------------------------------------------------
// configuration

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    /// Eligibility through taxonomy annotations at the configured level.
    #[default]
    Taxonomy,
    /// Draw among the documents carrying each label.
    Labels,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MemberWeight {
    /// Every member vote weighs its group's `vote_weight`.
    Unit,
    /// Group weight times the member's top-label confidence in `[0, 1]`.
    Confidence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberSpec {
    #[serde(flatten)]
    pub classifier: ClassifierSpec,
    #[serde(default = "defaults::count")]
    pub count: usize,
    #[serde(default)]
    pub sampler: SamplerKind,
    #[serde(default)]
    pub level: SampleLevel,
    #[serde(default = "defaults::sample_size")]
    pub sample_size: usize,
    /// Overrides the seed derived from the committee seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default = "defaults::vote_weight")]
    pub vote_weight: f64,
}

impl MemberSpec {
    pub fn new(classifier: ClassifierSpec, count: usize) -> Self {
        MemberSpec {
            classifier,
            count,
            sampler: SamplerKind::default(),
            level: SampleLevel::default(),
            sample_size: defaults::sample_size(),
            seed: None,
            vote_weight: 1.0,
        }
    }
}

mod defaults {
    pub fn count() -> usize {
        25
    }
    pub fn sample_size() -> usize {
        200
    }
    pub fn vote_weight() -> f64 {
        1.0
    }
    pub fn depth() -> usize {
        3
    }
    pub fn semcat_weights() -> Vec<f64> {
        vec![14.0, 10.0, 6.0]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommitteeConfig {
    pub members: Vec<MemberSpec>,
    #[serde(default)]
    pub mode: AggregationMode,
    /// Ranking depth `M` for rank aggregation.
    #[serde(default = "defaults::depth")]
    pub depth: usize,
    /// Weights of the categorizer's top categories; empty disables injection.
    #[serde(default = "defaults::semcat_weights")]
    pub semcat_weights: Vec<f64>,
    /// Defaults to unit votes with injection and confidences without.
    #[serde(default)]
    pub member_weight: Option<MemberWeight>,
    #[serde(default)]
    pub seed: u64,
}

impl CommitteeConfig {
    /// The default committee: 25 Bayes and 25 Winnow members.
    pub fn bayes_winnow(seed: u64) -> Self {
        CommitteeConfig {
            members: vec![
                MemberSpec::new(ClassifierSpec::NaiveBayes, 25),
                MemberSpec::new(ClassifierSpec::Winnow(Default::default()), 25),
            ],
            mode: AggregationMode::Weighted,
            depth: defaults::depth(),
            semcat_weights: defaults::semcat_weights(),
            member_weight: None,
            seed,
        }
    }

    pub fn parse_toml(text: &str) -> Result<Self> {
        let c: CommitteeConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.members.is_empty() {
            return Err(Error::Config("committee needs at least one member group".into()));
        }
        for (i, m) in self.members.iter().enumerate() {
            if m.count == 0 || m.sample_size == 0 {
                return Err(Error::Config(format!("member group {i}: count and sample_size must be >= 1")));
            }
            if !(m.vote_weight >= 0.0) || !m.vote_weight.is_finite() {
                return Err(Error::Config(format!("member group {i}: vote_weight must be >= 0")));
            }
        }
        if self.semcat_weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::Config("semcat weights must be finite and >= 0".into()));
        }
        if self.depth == 0 {
            return Err(Error::Config("rank depth must be >= 1".into()));
        }
        Ok(())
    }

    pub fn resolved_member_weight(&self) -> MemberWeight {
        self.member_weight.unwrap_or(if self.semcat_weights.is_empty() {
            MemberWeight::Confidence
        } else {
            MemberWeight::Unit
        })
    }

    /// Copy with every default made explicit, for echoing.
    pub fn resolved(&self) -> Self {
        CommitteeConfig {
            member_weight: Some(self.resolved_member_weight()),
            members: self
                .members
                .iter()
                .enumerate()
                .map(|(g, m)| MemberSpec {
                    seed: Some(self.group_seed(g)),
                    ..m.clone()
                })
                .collect(),
            ..self.clone()
        }
    }

    pub fn group_seed(&self, group: usize) -> u64 {
        self.members[group].seed.unwrap_or_else(|| mix_seed(self.seed, group as u64))
    }

    pub fn member_count(&self) -> usize {
        self.members.iter().map(|m| m.count).sum()
    }
}

// ---------------------------------------------------------------------------
// label map

/// Sends taxonomy categories to task labels: a class whose category is
/// exactly `k`, else the class whose category is nearest by Lin similarity.
/// Ties on the best similarity leave `k` unmapped.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelMap {
    classes: Vec<(String, CategoryId)>,
}

impl LabelMap {
    pub fn new(class_categories: &BTreeMap<String, CategoryId>) -> Self {
        LabelMap {
            classes: class_categories.iter().map(|(l, &k)| (l.clone(), k)).collect(),
        }
    }

    pub fn category_of(&self, label: &str) -> Option<CategoryId> {
        self.classes.iter().find(|(l, _)| l == label).map(|c| c.1)
    }

    pub fn classes(&self) -> &[(String, CategoryId)] {
        &self.classes
    }

    pub fn map(&self, tax: &Taxonomy, k: CategoryId) -> Option<&str> {
        if let Some((l, _)) = self.classes.iter().find(|(_, c)| *c == k) {
            return Some(l);
        }
        let mut best: Option<(f64, usize)> = None;
        let mut tie = false;
        for (i, (_, c)) in self.classes.iter().enumerate() {
            let s = tax.sim_lin(k, *c);
            match best {
                Some((b, _)) if s < b => {}
                Some((b, _)) if s == b => tie = true,
                _ => {
                    best = Some((s, i));
                    tie = false;
                }
            }
        }
        match best {
            Some((_, i)) if !tie => Some(&self.classes[i].0),
            _ => None,
        }
    }
}

/// Votes of the categorizer's top `weights.len()` categories mapped to task
/// labels; unmapped categories cast nothing.
pub fn semcat_votes(vector: &CategoryVector, weights: &[f64], tax: &Taxonomy, map: &LabelMap, votes: &mut VoteSet) -> Result<()> {
    for (i, (k, _)) in vector.ranked().into_iter().take(weights.len()).enumerate() {
        if let Some(label) = map.map(tax, k) {
            votes.push(label, weights[i], i + 1)?;
        }
    }
    Ok(())
}

/// Committee decision from member rankings plus injected categorizer votes,
/// in weighted mode with weight-1 member votes. `semcat` is `None` when
/// categorization failed; the committee then decides without it.
pub fn semcom_predict(
    member_rankings: &[Vec<(String, f64)>],
    semcat: Option<&CategoryVector>,
    weights: &[f64],
    tax: &Taxonomy,
    map: &LabelMap,
    seed: u64,
) -> Result<Outcome> {
    let mut votes = VoteSet::new();
    for r in member_rankings {
        votes.push_ranking(r, 1.0, AggregationMode::Weighted, 1)?;
    }
    if let Some(v) = semcat {
        semcat_votes(v, weights, tax, map, &mut votes)?;
    }
    aggregate(&votes, AggregationMode::Weighted, 1, seed)
}

// ---------------------------------------------------------------------------
// ensembles

/// Training documents available to samplers.
#[derive(Debug, Clone)]
pub struct PoolDoc {
    pub label: Option<String>,
    pub categories: Vec<CategoryId>,
    pub features: FeatureBag,
}

#[derive(Debug, Clone)]
pub struct TrainingPool<'a> {
    pub tax: &'a Taxonomy,
    pub docs: Vec<PoolDoc>,
    /// Class label to class category, used by the taxonomy sampler.
    pub class_categories: BTreeMap<String, CategoryId>,
}

impl TrainingPool<'_> {
    fn sample(&self, spec: &MemberSpec, seed: u64) -> Result<Vec<LabeledBag>> {
        let drawn = match spec.sampler {
            SamplerKind::Taxonomy => {
                let ann: Vec<Vec<CategoryId>> = self.docs.iter().map(|d| d.categories.clone()).collect();
                draw_training_sample(self.tax, &ann, &self.class_categories, spec.level, spec.sample_size, seed)?
            }
            SamplerKind::Labels => {
                let labels: Vec<Option<String>> = self.docs.iter().map(|d| d.label.clone()).collect();
                draw_label_sample(&labels, spec.sample_size, seed)?
            }
        };
        Ok(drawn
            .into_iter()
            .flat_map(|(l, idx)| idx.into_iter().map(move |i| (l.clone(), i)))
            .map(|(l, i)| LabeledBag::new(l, self.docs[i].features.clone()))
            .collect())
    }
}

/// Instances of one classifier type trained on independent samples.
#[derive(Debug, Clone, PartialEq)]
pub struct BaggingEnsemble {
    pub members: Vec<Classifier>,
    pub seeds: Vec<u64>,
}

impl BaggingEnsemble {
    /// Member `i` samples and trains with `mix_seed(seed, i)`.
    pub fn build(spec: &MemberSpec, pool: &TrainingPool<'_>, seed: u64) -> Result<Self> {
        if spec.count == 0 {
            return Err(Error::InvalidArgument("ensemble needs at least one member".into()));
        }
        let seeds: Vec<u64> = (0..spec.count as u64).map(|i| mix_seed(seed, i)).collect();
        let members = seeds
            .par_iter()
            .enumerate()
            .map(|(i, &s)| {
                pool.sample(spec, s)
                    .and_then(|docs| spec.classifier.train(&docs, s))
                    .map_err(|e| Error::Member {
                        index: i,
                        source: Box::new(e),
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BaggingEnsemble { members, seeds })
    }

    pub fn from_members(members: Vec<Classifier>) -> Self {
        let seeds = vec![0; members.len()];
        BaggingEnsemble { members, seeds }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn cast_votes(&self, x: &FeatureBag, mode: AggregationMode, depth: usize, weighting: MemberWeight, scale: f64, votes: &mut VoteSet) -> Result<()> {
        for m in &self.members {
            let r = m.predict(x);
            let w = match (mode, weighting) {
                (AggregationMode::Weighted, MemberWeight::Confidence) => scale * m.confidence(&r),
                _ => scale,
            };
            votes.push_ranking(&r, w, mode, depth)?;
        }
        Ok(())
    }

    pub fn predict(&self, x: &FeatureBag, mode: AggregationMode, depth: usize, seed: u64) -> Result<Outcome> {
        let mut votes = VoteSet::new();
        self.cast_votes(x, mode, depth, MemberWeight::Confidence, 1.0, &mut votes)?;
        aggregate(&votes, mode, depth, seed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommitteeOutcome {
    pub winner: String,
    pub tally: BTreeMap<String, f64>,
    pub tied: Vec<String>,
    /// False when the categorizer votes were missing.
    pub semcat_used: bool,
}

/// Member groups plus categorizer injection.
#[derive(Debug, Clone)]
pub struct Committee {
    pub config: CommitteeConfig,
    pub groups: Vec<BaggingEnsemble>,
}

impl Committee {
    pub fn train(config: &CommitteeConfig, pool: &TrainingPool<'_>) -> Result<Self> {
        config.validate()?;
        let mut groups = Vec::with_capacity(config.members.len());
        let mut offset = 0;
        for (g, spec) in config.members.iter().enumerate() {
            let e = BaggingEnsemble::build(spec, pool, config.group_seed(g)).map_err(|e| match e {
                Error::Member { index, source } => Error::Member {
                    index: index + offset,
                    source,
                },
                other => other,
            })?;
            offset += spec.count;
            groups.push(e);
        }
        Ok(Committee {
            config: config.clone(),
            groups,
        })
    }

    pub fn len(&self) -> usize {
        self.groups.iter().map(|g| g.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn predict(
        &self,
        x: &FeatureBag,
        semcat: Option<&CategoryVector>,
        tax: &Taxonomy,
        map: &LabelMap,
        seed: u64,
    ) -> Result<CommitteeOutcome> {
        let c = &self.config;
        let weighting = c.resolved_member_weight();
        let mut votes = VoteSet::new();
        for (g, e) in self.groups.iter().enumerate() {
            e.cast_votes(x, c.mode, c.depth, weighting, c.members[g].vote_weight, &mut votes)?;
        }
        let semcat_used = semcat.is_some() || c.semcat_weights.is_empty();
        if let Some(v) = semcat {
            semcat_votes(v, &c.semcat_weights, tax, map, &mut votes)?;
        }
        let o = aggregate(&votes, c.mode, c.depth, seed)?;
        Ok(CommitteeOutcome {
            winner: o.winner,
            tally: o.tally,
            tied: o.tied,
            semcat_used,
        })
    }
}
