//! Seeded experiment runner: trains the configured methods on a labeled
//! training corpus, classifies a test corpus and reports precision and Lin
//! precision per method and length bucket.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{lin_score, paired_t_test, semantic_features, term_features, FeatureMode, LengthBucket};
use crate::classics::{ClassifierSpec, FeatureBag, LabeledBag, LldaParams, WinnowParams};
use crate::corpus::{load_corpus, Document};
use crate::ensemble::{mix_seed, stable_hash, Committee, CommitteeConfig, LabelMap, PoolDoc, TrainingPool, SEED_RULE};
use crate::error::{Error, Result};
use crate::semcat::{Categorization, CategoryVector, SemCat, SemCatConfig};
use crate::semcla::{GroupMode, SemClaModel, DEFAULT_ALPHA};
use crate::taxonomy::{CategoryId, Taxonomy};
use crate::textpipe::{load_lemmas, load_stopwords, BackgroundStats, FrequencyCutoffs, PhraseIndex, Preprocessor, TermVector, TextPipeline};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodKind {
    #[serde(alias = "naive_bayes")]
    Nb,
    Winnow,
    Llda,
    Semcla,
    /// Unsupervised: top category mapped to a label.
    Semcat,
    Committee,
}

impl MethodKind {
    fn uses_features(self) -> bool {
        matches!(self, MethodKind::Nb | MethodKind::Winnow | MethodKind::Llda | MethodKind::Committee)
    }

    fn as_str(self) -> &'static str {
        match self {
            MethodKind::Nb => "nb",
            MethodKind::Winnow => "winnow",
            MethodKind::Llda => "llda",
            MethodKind::Semcla => "semcla",
            MethodKind::Semcat => "semcat",
            MethodKind::Committee => "committee",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(rename = "type")]
    pub kind: MethodKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub features: Option<FeatureMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub winnow: Option<WinnowParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub llda: Option<LldaParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<GroupMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub committee: Option<CommitteeConfig>,
}

impl MethodConfig {
    pub fn new(kind: MethodKind) -> Self {
        MethodConfig {
            name: None,
            kind,
            features: None,
            winnow: None,
            llda: None,
            alpha: None,
            mode: None,
            committee: None,
        }
    }

    pub fn with_features(mut self, f: FeatureMode) -> Self {
        self.features = Some(f);
        self
    }

    pub fn named(mut self, name: &str) -> Self {
        self.name = Some(name.to_string());
        self
    }

    /// Copy with defaults filled in and parameters of other kinds dropped.
    fn resolved(&self, seed: u64) -> Result<Self> {
        let mut m = MethodConfig::new(self.kind);
        if self.kind.uses_features() {
            m.features = Some(self.features.unwrap_or_default());
        } else if self.features.is_some() {
            return Err(Error::Config(format!("method `{}` takes no feature mode", self.kind.as_str())));
        }
        match self.kind {
            MethodKind::Winnow => m.winnow = Some(self.winnow.clone().unwrap_or_default()),
            MethodKind::Llda => {
                m.llda = Some(LldaParams {
                    seed,
                    ..self.llda.clone().unwrap_or_default()
                })
            }
            MethodKind::Semcla => {
                m.alpha = Some(self.alpha.unwrap_or(DEFAULT_ALPHA));
                m.mode = Some(self.mode.unwrap_or(GroupMode::Average));
            }
            MethodKind::Committee => {
                let mut c = self
                    .committee
                    .clone()
                    .ok_or_else(|| Error::Config("committee method needs a [methods.committee] table".into()))?;
                c.seed = mix_seed(seed, c.seed);
                c.validate()?;
                m.committee = Some(c.resolved());
            }
            MethodKind::Nb | MethodKind::Semcat => {}
        }
        m.name = Some(match &self.name {
            Some(n) => n.clone(),
            None => match m.features {
                Some(f) => format!("{}-{f}", self.kind.as_str()),
                None => self.kind.as_str().to_string(),
            },
        });
        Ok(m)
    }

    pub fn display_name(&self) -> &str {
        self.name.as_deref().unwrap_or(self.kind.as_str())
    }
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub taxonomy: PathBuf,
    pub train: PathBuf,
    pub test: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stopwords: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lemmas: Option<PathBuf>,
    /// Background frequencies; computed from train and test texts if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub background: Option<PathBuf>,
    pub seed: u64,
    /// Evaluate only documents every method classified.
    #[serde(default = "yes")]
    pub common_subset: bool,
    /// Drop test documents shorter than 1000 characters.
    #[serde(default)]
    pub exclude_short: bool,
    /// Method every other method is t-tested against.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
    /// Label to taxonomy category; labels naming a category map to it.
    #[serde(default)]
    pub label_categories: BTreeMap<String, String>,
    #[serde(default)]
    pub cutoffs: FrequencyCutoffs,
    #[serde(default)]
    pub semcat: SemCatConfig,
    pub methods: Vec<MethodConfig>,
}

impl ExperimentConfig {
    pub fn parse_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().trim().to_string()))
    }

    /// Reads a TOML config; relative paths resolve against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut c = Self::parse_toml(&text).map_err(|e| e.context(path.display().to_string()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut c.taxonomy);
        fix(&mut c.train);
        fix(&mut c.test);
        for p in [&mut c.stopwords, &mut c.lemmas, &mut c.background].into_iter().flatten() {
            fix(p);
        }
        Ok(c)
    }

    /// Copy with every default and derived seed made explicit.
    pub fn resolved(&self) -> Result<Self> {
        if self.methods.is_empty() {
            return Err(Error::Config("no methods configured".into()));
        }
        let methods = self
            .methods
            .iter()
            .enumerate()
            .map(|(i, m)| m.resolved(mix_seed(self.seed, i as u64)))
            .collect::<Result<Vec<_>>>()?;
        let mut names = HashSet::new();
        for m in &methods {
            if !names.insert(m.display_name().to_string()) {
                return Err(Error::Config(format!("duplicate method name `{}`", m.display_name())));
            }
        }
        if let Some(r) = &self.reference {
            if !names.contains(r.as_str()) {
                return Err(Error::Config(format!("reference method `{r}` is not configured")));
            }
        }
        Ok(ExperimentConfig {
            methods,
            ..self.clone()
        })
    }
}

/// Builds the text pipeline from optional resource files. Without a
/// background file the statistics come from `texts`.
pub fn build_pipeline<'t, I>(
    tax: &Taxonomy,
    stopwords: Option<&Path>,
    lemmas: Option<&Path>,
    background: Option<&Path>,
    cutoffs: FrequencyCutoffs,
    texts: I,
) -> Result<TextPipeline>
where
    I: IntoIterator<Item = &'t str>,
{
    let mut pre = Preprocessor::new();
    if let Some(p) = stopwords {
        pre = pre.with_stopwords(load_stopwords(p)?);
    }
    if let Some(p) = lemmas {
        pre = pre.with_lemmas(load_lemmas(p)?);
    }
    let phrases = PhraseIndex::from_taxonomy(tax);
    let stats = match background {
        Some(p) => BackgroundStats::load(p)?,
        None => {
            let texts: Vec<&str> = texts.into_iter().collect();
            let terms: Vec<Vec<String>> = texts.par_iter().map(|t| TextPipeline::raw_terms(&pre, &phrases, t)).collect();
            BackgroundStats::from_documents(terms).map_err(|e| e.context("background statistics"))?
        }
    };
    let mut pipeline = TextPipeline::new(pre, phrases, stats);
    pipeline.cutoffs = cutoffs;
    Ok(pipeline)
}

/// Everything an experiment reads from disk.
#[derive(Debug, Clone)]
pub struct ExperimentData {
    pub taxonomy: Taxonomy,
    pub train: Vec<Document>,
    pub test: Vec<Document>,
    pub pipeline: TextPipeline,
}

impl ExperimentData {
    pub fn load(config: &ExperimentConfig) -> Result<Self> {
        let taxonomy = Taxonomy::load(&config.taxonomy)?;
        let train = load_corpus(&config.train)?;
        let test = load_corpus(&config.test)?;
        let pipeline = build_pipeline(
            &taxonomy,
            config.stopwords.as_deref(),
            config.lemmas.as_deref(),
            config.background.as_deref(),
            config.cutoffs,
            train.iter().chain(&test).map(|d| d.text.as_str()),
        )?;
        Ok(ExperimentData {
            taxonomy,
            train,
            test,
            pipeline,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BucketReport {
    pub count: usize,
    pub precision: Option<f64>,
    pub lin_precision: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TTestReport {
    pub against: String,
    pub t: Option<f64>,
    pub df: Option<usize>,
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodReport {
    pub name: String,
    #[serde(rename = "type")]
    pub kind: MethodKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub features: Option<FeatureMode>,
    pub seed: u64,
    pub train_documents: usize,
    /// Test documents (after length filtering) this method classified.
    pub classified: usize,
    pub unclassified: usize,
    pub evaluated: usize,
    pub precision: f64,
    pub lin_precision: Option<f64>,
    pub buckets: BTreeMap<LengthBucket, BucketReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_test: Option<TTestReport>,
    /// Committee predictions made without categorizer votes.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub semcat_missing: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DocumentCounts {
    pub train: usize,
    pub test: usize,
    pub excluded_short: usize,
    pub evaluated: usize,
    pub buckets: BTreeMap<LengthBucket, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub seed_rule: String,
    pub labels: Vec<String>,
    pub label_categories: BTreeMap<String, String>,
    pub documents: DocumentCounts,
    pub methods: Vec<MethodReport>,
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn method(&self, name: &str) -> Option<&MethodReport> {
        self.methods.iter().find(|m| m.name == name)
    }

    pub fn to_table(&self) -> String {
        let opt = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.4}"));
        let width = self.methods.iter().map(|m| m.name.len()).max().unwrap_or(6).max(6);
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<width$}  {:>6}  {:>7}  {:>9}  {:>9}  {:>8}  {:>8}  {:>8}  {:>8}",
            "method", "n", "unclass", "precision", "lin_prec", "short", "medium", "long", "p(ref)"
        );
        for m in &self.methods {
            let b = |k: LengthBucket| opt(m.buckets.get(&k).and_then(|r| r.precision));
            let p = m.t_test.as_ref().and_then(|t| t.p);
            let _ = writeln!(
                out,
                "{:<width$}  {:>6}  {:>7}  {:>9.4}  {:>9}  {:>8}  {:>8}  {:>8}  {:>8}",
                m.name,
                m.evaluated,
                m.unclassified,
                m.precision,
                opt(m.lin_precision),
                b(LengthBucket::Short),
                b(LengthBucket::Medium),
                b(LengthBucket::Long),
                opt(p),
            );
        }
        let d = &self.documents;
        let _ = writeln!(
            out,
            "test documents: {} (excluded short: {}, evaluated: {}, buckets short/medium/long/excluded: {}/{}/{}/{})",
            d.test,
            d.excluded_short,
            d.evaluated,
            d.buckets[&LengthBucket::Short],
            d.buckets[&LengthBucket::Medium],
            d.buckets[&LengthBucket::Long],
            d.buckets[&LengthBucket::Excluded],
        );
        out
    }
}

/// Per-document preprocessing shared by all methods.
struct Prepared {
    terms: Result<TermVector>,
    cat: Result<Categorization>,
}

impl Prepared {
    fn new(text: &str, semcat: &SemCat<'_>) -> Self {
        let terms = semcat.term_vector(text);
        let cat = match &terms {
            Ok(v) => semcat.categorize_vector(v),
            Err(_) => Err(Error::EmptyVector),
        };
        Prepared { terms, cat }
    }

    fn features(&self, mode: FeatureMode, tax: &Taxonomy) -> Option<FeatureBag> {
        match mode {
            FeatureMode::Terms => self.terms.as_ref().ok().map(term_features),
            _ => self.cat.as_ref().ok().map(|c| semantic_features(c, mode, tax)),
        }
    }

    fn vector(&self) -> Option<&CategoryVector> {
        self.cat.as_ref().ok().map(|c| &c.vector)
    }
}

struct Predictions {
    labels: Vec<Option<String>>,
    train_documents: usize,
    semcat_missing: Option<usize>,
}

fn resolve_label_categories(
    config: &ExperimentConfig,
    tax: &Taxonomy,
    labels: &[String],
) -> Result<BTreeMap<String, CategoryId>> {
    let mut out = BTreeMap::new();
    for (l, k) in &config.label_categories {
        let id = tax
            .category(k)
            .map_err(|_| Error::Config(format!("label `{l}` maps to unknown category `{k}`")))?;
        out.insert(l.clone(), id);
    }
    for l in labels {
        if !out.contains_key(l) {
            if let Ok(k) = tax.category(l) {
                out.insert(l.clone(), k);
            }
        }
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn run_method(
    m: &MethodConfig,
    seed: u64,
    data: &ExperimentData,
    train: &[Prepared],
    test: &[Prepared],
    label_map: &LabelMap,
    class_categories: &BTreeMap<String, CategoryId>,
) -> Result<Predictions> {
    let tax = &data.taxonomy;
    let train_labels: Vec<&str> = data.train.iter().map(|d| d.label.as_deref().unwrap_or_default()).collect();
    let features = m.features.unwrap_or_default();
    let bags = || -> Vec<LabeledBag> {
        train
            .iter()
            .zip(&train_labels)
            .filter_map(|(p, l)| p.features(features, tax).map(|f| LabeledBag::new(*l, f)))
            .collect()
    };
    let classify_with = |spec: ClassifierSpec| -> Result<Predictions> {
        let docs = bags();
        let model = spec.train(&docs, seed)?;
        let labels = test
            .par_iter()
            .map(|p| p.features(features, tax).map(|f| model.predict(&f)[0].0.clone()))
            .collect();
        Ok(Predictions {
            labels,
            train_documents: docs.len(),
            semcat_missing: None,
        })
    };
    match m.kind {
        MethodKind::Nb => classify_with(ClassifierSpec::NaiveBayes),
        MethodKind::Winnow => classify_with(ClassifierSpec::Winnow(m.winnow.clone().unwrap_or_default())),
        MethodKind::Llda => classify_with(ClassifierSpec::Llda(m.llda.clone().unwrap_or_default())),
        MethodKind::Semcla => {
            let mut groups: BTreeMap<String, Vec<CategoryVector>> = BTreeMap::new();
            for (p, l) in train.iter().zip(&train_labels) {
                if let Some(v) = p.vector() {
                    groups.entry(l.to_string()).or_default().push(v.clone());
                }
            }
            let n = groups.values().map(Vec::len).sum();
            let model = SemClaModel::from_vectors(groups, tax, m.alpha.unwrap_or(DEFAULT_ALPHA), m.mode.unwrap_or_default())?;
            let labels = test
                .par_iter()
                .map(|p| p.vector().map(|v| model.classify_vector(v, tax)[0].0.clone()))
                .collect();
            Ok(Predictions {
                labels,
                train_documents: n,
                semcat_missing: None,
            })
        }
        MethodKind::Semcat => {
            if label_map.classes().is_empty() {
                return Err(Error::Config("semcat method needs labels mapped to categories".into()));
            }
            let labels = test
                .iter()
                .map(|p| {
                    let top = p.vector()?.ranked().first()?.0;
                    label_map.map(tax, top).map(str::to_string)
                })
                .collect();
            Ok(Predictions {
                labels,
                train_documents: 0,
                semcat_missing: None,
            })
        }
        MethodKind::Committee => {
            let cfg = m.committee.as_ref().expect("resolved committee");
            if !cfg.semcat_weights.is_empty() && label_map.classes().is_empty() {
                return Err(Error::Config("committee injection needs labels mapped to categories".into()));
            }
            let mut docs = Vec::new();
            for (d, p) in data.train.iter().zip(train) {
                if let Some(f) = p.features(features, tax) {
                    let categories = d
                        .categories
                        .iter()
                        .map(|k| tax.category(k))
                        .collect::<Result<Vec<_>>>()
                        .map_err(|e| e.context(format!("training document `{}`", d.id)))?;
                    docs.push(PoolDoc {
                        label: d.label.clone(),
                        categories,
                        features: f,
                    });
                }
            }
            let n = docs.len();
            let pool = TrainingPool {
                tax,
                docs,
                class_categories: class_categories.clone(),
            };
            let committee = Committee::train(cfg, &pool)?;
            let out: Vec<Option<(String, bool)>> = test
                .par_iter()
                .zip(&data.test)
                .map(|(p, d)| {
                    let f = p.features(features, tax)?;
                    let tie_seed = mix_seed(cfg.seed, stable_hash(&d.id));
                    committee
                        .predict(&f, p.vector(), tax, label_map, tie_seed)
                        .ok()
                        .map(|o| (o.winner, o.semcat_used))
                })
                .collect();
            let missing = out.iter().flatten().filter(|o| !o.1).count();
            Ok(Predictions {
                labels: out.into_iter().map(|o| o.map(|o| o.0)).collect(),
                train_documents: n,
                semcat_missing: Some(missing),
            })
        }
    }
}

/// Runs the configured methods on already loaded data.
pub fn run_experiment(config: &ExperimentConfig, data: &ExperimentData) -> Result<ExperimentReport> {
    let config = config.resolved()?;
    let tax = &data.taxonomy;
    for d in data.train.iter().chain(&data.test) {
        if d.label.is_none() {
            return Err(Error::MissingLabel(d.id.clone()));
        }
    }
    if data.train.is_empty() || data.test.is_empty() {
        return Err(Error::Training("train and test corpora must be nonempty".into()));
    }
    let mut labels: Vec<String> = data
        .train
        .iter()
        .chain(&data.test)
        .filter_map(|d| d.label.clone())
        .collect();
    labels.sort();
    labels.dedup();
    let class_categories = resolve_label_categories(&config, tax, &labels)?;
    let label_map = LabelMap::new(&class_categories);
    let lin_ok = labels.iter().all(|l| class_categories.contains_key(l));

    let semcat = SemCat::new(tax, data.pipeline.clone(), config.semcat);
    let train: Vec<Prepared> = data.train.par_iter().map(|d| Prepared::new(&d.text, &semcat)).collect();
    let test: Vec<Prepared> = data.test.par_iter().map(|d| Prepared::new(&d.text, &semcat)).collect();

    let buckets: Vec<LengthBucket> = data.test.iter().map(|d| LengthBucket::of(&d.text)).collect();
    let kept: Vec<bool> = buckets
        .iter()
        .map(|&b| !(config.exclude_short && b == LengthBucket::Excluded))
        .collect();

    let mut preds = Vec::with_capacity(config.methods.len());
    for (i, m) in config.methods.iter().enumerate() {
        let seed = mix_seed(config.seed, i as u64);
        let p = run_method(m, seed, data, &train, &test, &label_map, &class_categories)
            .map_err(|e| e.context(format!("method `{}`", m.display_name())))?;
        preds.push((seed, p));
    }

    let evaluated: Vec<usize> = (0..data.test.len())
        .filter(|&d| kept[d] && (!config.common_subset || preds.iter().all(|(_, p)| p.labels[d].is_some())))
        .collect();
    let truth = |d: usize| data.test[d].label.as_deref().unwrap();

    // per-method per-document exact and Lin scores over the evaluated set
    let mut scores: Vec<(Vec<f64>, Option<Vec<f64>>)> = Vec::new();
    for (_, p) in &preds {
        let exact: Vec<f64> = evaluated
            .iter()
            .map(|&d| (p.labels[d].as_deref() == Some(truth(d))) as u8 as f64)
            .collect();
        let lin = if lin_ok {
            let mut v = Vec::with_capacity(evaluated.len());
            for &d in &evaluated {
                v.push(match p.labels[d].as_deref() {
                    Some(pl) if class_categories.contains_key(pl) => lin_score(pl, truth(d), tax, &label_map)?,
                    _ => 0.0,
                });
            }
            Some(v)
        } else {
            None
        };
        scores.push((exact, lin));
    }
    let mean = |xs: &[f64]| if xs.is_empty() { None } else { Some(xs.iter().sum::<f64>() / xs.len() as f64) };

    let reference = config
        .reference
        .as_ref()
        .map(|r| config.methods.iter().position(|m| m.display_name() == r).unwrap());
    let mut methods = Vec::new();
    for (i, (m, (seed, p))) in config.methods.iter().zip(&preds).enumerate() {
        let (exact, lin) = &scores[i];
        let classified = (0..data.test.len()).filter(|&d| kept[d] && p.labels[d].is_some()).count();
        let mut bucket_reports = BTreeMap::new();
        for b in LengthBucket::ALL {
            let idx: Vec<usize> = (0..evaluated.len()).filter(|&j| buckets[evaluated[j]] == b).collect();
            let pick = |v: &[f64]| idx.iter().map(|&j| v[j]).collect::<Vec<f64>>();
            bucket_reports.insert(
                b,
                BucketReport {
                    count: idx.len(),
                    precision: mean(&pick(exact)),
                    lin_precision: lin.as_ref().and_then(|l| mean(&pick(l))),
                },
            );
        }
        let t_test = reference.filter(|&r| r != i).map(|r| {
            let against = config.methods[r].display_name().to_string();
            match paired_t_test(exact, &scores[r].0) {
                Ok(t) => TTestReport {
                    against,
                    t: Some(t.t),
                    df: Some(t.df),
                    p: Some(t.p),
                    note: None,
                },
                Err(e) => TTestReport {
                    against,
                    t: None,
                    df: None,
                    p: None,
                    note: Some(e.to_string()),
                },
            }
        });
        methods.push(MethodReport {
            name: m.display_name().to_string(),
            kind: m.kind,
            features: m.features,
            seed: *seed,
            train_documents: p.train_documents,
            classified,
            unclassified: kept.iter().filter(|&&k| k).count() - classified,
            evaluated: evaluated.len(),
            precision: mean(exact).unwrap_or(0.0),
            lin_precision: lin.as_ref().map(|l| mean(l).unwrap_or(0.0)),
            buckets: bucket_reports,
            t_test,
            semcat_missing: p.semcat_missing,
        });
    }

    let documents = DocumentCounts {
        train: data.train.len(),
        test: data.test.len(),
        excluded_short: kept.iter().filter(|&&k| !k).count(),
        evaluated: evaluated.len(),
        buckets: LengthBucket::ALL
            .iter()
            .map(|&b| (b, evaluated.iter().filter(|&&d| buckets[d] == b).count()))
            .collect(),
    };
    Ok(ExperimentReport {
        label_categories: class_categories
            .iter()
            .map(|(l, &k)| (l.clone(), tax.category_name(k).to_string()))
            .collect(),
        config,
        seed_rule: SEED_RULE.to_string(),
        labels,
        documents,
        methods,
    })
}

/// Loads the config's files and runs it.
pub fn run_experiment_file(path: impl AsRef<Path>) -> Result<ExperimentReport> {
    let config = ExperimentConfig::load(path)?;
    let data = ExperimentData::load(&config)?;
    run_experiment(&config, &data)
}
