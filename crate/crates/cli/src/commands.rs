use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use semtax::corpus::{load_corpus, Document};
use semtax::ensemble::{draw_label_sample, draw_training_sample};
use semtax::eval::experiment::{build_pipeline, ExperimentData};
use semtax::eval::{extract_features, run_experiment, ExperimentConfig, FeatureMode};
use semtax::semcla::{calibrate_alpha as calibrate, default_alpha_grid, subsample_groups, SemClaModel};
use semtax::synth::{semantic_gap, SynthConfig};
use semtax::textpipe::{FrequencyCutoffs, PhraseIndex, Preprocessor, TextPipeline};
use semtax::{
    BackgroundStats, CategoryVector, Classifier, ClassifierSpec, Disambiguation, Error, LabeledBag, Measure, ModelFile,
    SemCat, SemCatConfig, Taxonomy,
};

use crate::args::*;

#[derive(Debug)]
pub enum Failure {
    Core(Error),
    Config(String),
    Io(io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

type Res = std::result::Result<(), Failure>;

/// First output line: the fully resolved invocation.
fn echo<W: Write + ?Sized, A: Serialize>(out: &mut W, command: &str, args: &A) -> io::Result<()> {
    let v = serde_json::json!({ "command": command, "args": args, "version": env!("CARGO_PKG_VERSION") });
    writeln!(out, "#config\t{v}")
}

fn sink(path: &Option<PathBuf>) -> Result<Option<BufWriter<File>>, Failure> {
    match path {
        None => Ok(None),
        Some(p) => File::create(p)
            .map(|f| Some(BufWriter::new(f)))
            .map_err(|e| Failure::Core(Error::Io { path: p.clone(), source: e })),
    }
}

fn semcat_config(disambig: Disambiguation, measure: Measure, top_terms: usize, folded: bool) -> SemCatConfig {
    SemCatConfig {
        top_terms: (top_terms > 0).then_some(top_terms),
        exact_match: !folded,
        disambiguation: disambig,
        measure,
        top_categories: None,
    }
}

fn cutoffs(t: &TextArgs) -> FrequencyCutoffs {
    FrequencyCutoffs {
        min_df: t.min_df,
        max_df_ratio: t.max_df_ratio,
    }
}

fn pipeline_for(tax: &Taxonomy, t: &TextArgs, docs: &[Document]) -> Result<TextPipeline, Failure> {
    Ok(build_pipeline(
        tax,
        t.stopwords.as_deref(),
        t.lemmas.as_deref(),
        t.background.as_deref(),
        cutoffs(t),
        docs.iter().map(|d| d.text.as_str()),
    )?)
}

fn fmt_weights<'a, I: IntoIterator<Item = (&'a str, f64)>>(entries: I) -> String {
    entries
        .into_iter()
        .map(|(k, w)| format!("\t{k}:{:.6}", if w.abs() < 5e-7 { 0.0 } else { w }))
        .collect()
}

pub fn build_index<W: Write>(a: &BuildIndexArgs, out: &mut W) -> Res {
    echo(out, "build-index", a)?;
    let docs = load_corpus(&a.corpus)?;
    let mut pre = Preprocessor::new();
    if let Some(p) = &a.stopwords {
        pre = pre.with_stopwords(semtax::textpipe::load_stopwords(p)?);
    }
    if let Some(p) = &a.lemmas {
        pre = pre.with_lemmas(semtax::textpipe::load_lemmas(p)?);
    }
    let phrases = match &a.taxonomy {
        Some(p) => PhraseIndex::from_taxonomy(&Taxonomy::load(p)?),
        None => PhraseIndex::new(Vec::<String>::new()),
    };
    let terms: Vec<Vec<String>> = docs
        .par_iter()
        .map(|d| TextPipeline::raw_terms(&pre, &phrases, &d.text))
        .collect();
    let stats = BackgroundStats::from_documents(terms)?;
    std::fs::write(&a.out, stats.to_file_string()).map_err(|e| Error::Io {
        path: a.out.clone(),
        source: e,
    })?;
    writeln!(out, "documents\t{}\tvocabulary\t{}", stats.doc_count(), stats.vocabulary_len())?;
    Ok(())
}

pub fn categorize<W: Write>(a: &CategorizeArgs, out: &mut W) -> Res {
    let tax = Taxonomy::load(&a.taxonomy)?;
    let docs = load_corpus(&a.corpus)?;
    let pipeline = pipeline_for(&tax, &a.text, &docs)?;
    let s = &a.semcat;
    let semcat = SemCat::new(&tax, pipeline, semcat_config(s.disambig, s.measure, s.top_terms, s.folded));
    let results: Vec<_> = docs.par_iter().map(|d| semcat.categorize(&d.text)).collect();
    let mut file = sink(&a.out)?;
    let w: &mut dyn Write = match file.as_mut() {
        Some(f) => f,
        None => out,
    };
    echo(w, "categorize", a)?;
    for (d, r) in docs.iter().zip(results) {
        match r {
            Ok(c) => {
                let ranked = c.ranked();
                let line = fmt_weights(ranked.iter().take(a.top).map(|&(k, wt)| (tax.category_name(k), wt)));
                writeln!(w, "{}{line}", d.id)?;
            }
            Err(e) => {
                log::warn!("document `{}`: {e}", d.id);
                writeln!(w, "{}", d.id)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn require_labels(docs: &[Document]) -> Result<(), Failure> {
    match docs.iter().find(|d| d.label.is_none()) {
        Some(d) => Err(Error::MissingLabel(d.id.clone()).into()),
        None => Ok(()),
    }
}

/// Indices of the training documents, optionally subsampled per class.
fn training_indices(a: &TrainArgs, tax: &Taxonomy, docs: &[Document], seed: u64) -> Result<Vec<usize>, Failure> {
    let Some(size) = a.sample_size else {
        if a.level.is_some() {
            return Err(Failure::Config("--level needs --sample-size".into()));
        }
        return Ok((0..docs.len()).collect());
    };
    let drawn = match a.level {
        None => draw_label_sample(&docs.iter().map(|d| d.label.clone()).collect::<Vec<_>>(), size, seed)?,
        Some(level) => {
            let labels: std::collections::BTreeSet<&str> = docs.iter().filter_map(|d| d.label.as_deref()).collect();
            let mut classes = BTreeMap::new();
            for l in labels {
                let k = tax
                    .category(l)
                    .map_err(|_| Failure::Config(format!("--level needs labels naming categories; `{l}` does not")))?;
                classes.insert(l.to_string(), k);
            }
            let ann = docs
                .iter()
                .map(|d| d.categories.iter().map(|c| tax.category(c)).collect::<semtax::Result<Vec<_>>>())
                .collect::<semtax::Result<Vec<_>>>()?;
            draw_training_sample(tax, &ann, &classes, level, size, seed)?
        }
    };
    let mut idx: Vec<usize> = drawn.into_values().flatten().collect();
    idx.sort_unstable();
    idx.dedup();
    Ok(idx)
}

pub fn train<W: Write>(a: &TrainArgs, out: &mut W) -> Res {
    if a.method == TrainMethod::Llda && a.seed.is_none() {
        return Err(Failure::Config("--seed is required for llda".into()));
    }
    echo(out, "train", a)?;
    let seed = a.seed.unwrap_or(0);
    let tax = Taxonomy::load(&a.taxonomy)?;
    let docs = load_corpus(&a.corpus)?;
    require_labels(&docs)?;
    let pipeline = pipeline_for(&tax, &a.text, &docs)?;
    let background = match &a.text.background {
        Some(p) => p.clone(),
        None => {
            let mut p = a.out.clone().into_os_string();
            p.push(".background.tsv");
            let p = PathBuf::from(p);
            std::fs::write(&p, pipeline.stats.to_file_string()).map_err(|e| Error::Io {
                path: p.clone(),
                source: e,
            })?;
            p
        }
    };
    let semcat = SemCat::new(&tax, pipeline, semcat_config(a.disambig, a.measure, a.top_terms, a.folded));
    let idx = training_indices(a, &tax, &docs, seed)?;
    let train_docs: Vec<&Document> = idx.iter().map(|&i| &docs[i]).collect();

    let mut model = match a.method {
        TrainMethod::Semcla => {
            let pairs = train_docs.iter().map(|d| (d.label.as_deref().unwrap(), d.text.as_str()));
            SemClaModel::train(pairs, &semcat, a.alpha, a.mode)?.to_model_file(&tax)
        }
        m => {
            let bags: Vec<Option<LabeledBag>> = train_docs
                .par_iter()
                .map(|d| {
                    extract_features(&d.text, a.features, &semcat)
                        .ok()
                        .map(|f| LabeledBag::new(d.label.clone().unwrap(), f))
                })
                .collect();
            let skipped = bags.iter().filter(|b| b.is_none()).count();
            if skipped > 0 {
                log::warn!("{skipped} training documents yielded no {} features", a.features);
            }
            let bags: Vec<LabeledBag> = bags.into_iter().flatten().collect();
            let spec = match m {
                TrainMethod::Nb => ClassifierSpec::NaiveBayes,
                TrainMethod::Winnow => ClassifierSpec::Winnow(Default::default()),
                _ => ClassifierSpec::Llda(Default::default()),
            };
            spec.train(&bags, seed)?.to_model_file()
        }
    };
    let c = semcat.config();
    model.params.insert("pipeline.features".into(), a.features.to_string());
    model.params.insert("pipeline.disambig".into(), c.disambiguation.to_string());
    model.params.insert("pipeline.measure".into(), c.measure.to_string());
    model.params.insert("pipeline.top_terms".into(), c.top_terms.unwrap_or(0).to_string());
    model.params.insert("pipeline.exact_match".into(), c.exact_match.to_string());
    model.params.insert("pipeline.min_df".into(), a.text.min_df.to_string());
    model.params.insert("pipeline.max_df_ratio".into(), a.text.max_df_ratio.to_string());
    model.params.insert("pipeline.background".into(), abs(&background));
    for (k, p) in [("pipeline.stopwords", &a.text.stopwords), ("pipeline.lemmas", &a.text.lemmas)] {
        if let Some(p) = p {
            model.params.insert(k.into(), abs(p));
        }
    }
    model.params.insert("seed".into(), seed.to_string());
    model.save(&a.out)?;
    writeln!(out, "model\t{}\ttrain_documents\t{}", a.out.display(), train_docs.len())?;
    Ok(())
}

fn abs(p: &Path) -> String {
    std::path::absolute(p).unwrap_or_else(|_| p.to_path_buf()).display().to_string()
}

enum Loaded {
    SemCla(SemClaModel),
    Classic(Classifier, FeatureMode),
}

pub fn classify<W: Write>(a: &ClassifyArgs, out: &mut W) -> Res {
    let tax = Taxonomy::load(&a.taxonomy)?;
    let f = ModelFile::load(&a.model)?;
    let docs = load_corpus(&a.corpus)?;
    let opt_path = |k: &str| f.params.get(k).map(PathBuf::from);
    let text = TextArgs {
        stopwords: opt_path("pipeline.stopwords"),
        lemmas: opt_path("pipeline.lemmas"),
        background: a.background.clone().or_else(|| opt_path("pipeline.background")),
        min_df: f.get("pipeline.min_df")?,
        max_df_ratio: f.get("pipeline.max_df_ratio")?,
    };
    let pipeline = pipeline_for(&tax, &text, &docs)?;
    let config = semcat_config(
        f.get("pipeline.disambig")?,
        f.get("pipeline.measure")?,
        f.get("pipeline.top_terms")?,
        !f.get::<bool>("pipeline.exact_match")?,
    );
    let semcat = SemCat::new(&tax, pipeline, config);
    let model = match f.kind.as_str() {
        "semcla" => Loaded::SemCla(SemClaModel::from_model_file(&f, &tax)?),
        _ => Loaded::Classic(Classifier::from_model_file(&f)?, f.get("pipeline.features")?),
    };
    let kind = f.kind.clone();
    let results: Vec<_> = docs
        .par_iter()
        .map(|d| match &model {
            Loaded::SemCla(m) => m.classify(&d.text, &semcat),
            Loaded::Classic(c, mode) => extract_features(&d.text, *mode, &semcat).map(|x| c.predict(&x)),
        })
        .collect();
    let mut file = sink(&a.out)?;
    let w: &mut dyn Write = match file.as_mut() {
        Some(f) => f,
        None => out,
    };
    #[derive(Serialize)]
    struct Echo<'a> {
        #[serde(flatten)]
        args: &'a ClassifyArgs,
        model_type: String,
        pipeline: &'a TextArgs,
        semcat: SemCatConfig,
    }
    echo(
        w,
        "classify",
        &Echo {
            args: a,
            model_type: kind,
            pipeline: &text,
            semcat: config,
        },
    )?;
    for (d, r) in docs.iter().zip(results) {
        match r {
            Ok(ranking) => {
                writeln!(w, "{}{}", d.id, fmt_weights(ranking.iter().map(|(l, s)| (l.as_str(), *s))))?;
            }
            Err(e) => {
                log::warn!("document `{}`: {e}", d.id);
                writeln!(w, "{}", d.id)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn evaluate<W: Write>(a: &EvaluateArgs, out: &mut W) -> Res {
    let mut config = ExperimentConfig::load(&a.config)?;
    if let Some(s) = a.seed {
        config.seed = s;
    }
    let data = ExperimentData::load(&config)?;
    let report = run_experiment(&config, &data)?;
    let echoed = serde_json::to_string(&report.config).expect("config serializes");
    writeln!(out, "#config\t{echoed}")?;
    write!(out, "{}", report.to_table())?;
    if let Some(p) = &a.out {
        std::fs::write(p, report.to_json()).map_err(|e| Error::Io {
            path: p.clone(),
            source: e,
        })?;
    }
    Ok(())
}

pub fn calibrate_alpha<W: Write>(a: &CalibrateArgs, out: &mut W) -> Res {
    let grid = a.grid.clone().unwrap_or_else(default_alpha_grid);
    if grid.iter().any(|x| !(*x >= 0.0)) {
        return Err(Failure::Config("--grid values must be >= 0".into()));
    }
    #[derive(Serialize)]
    struct Echo<'a> {
        #[serde(flatten)]
        args: &'a CalibrateArgs,
        resolved_grid: &'a [f64],
    }
    echo(out, "calibrate-alpha", &Echo { args: a, resolved_grid: &grid })?;
    let tax = Taxonomy::load(&a.taxonomy)?;
    let docs = load_corpus(&a.corpus)?;
    require_labels(&docs)?;
    let pipeline = pipeline_for(&tax, &a.text, &docs)?;
    let s = &a.semcat;
    let semcat = SemCat::new(&tax, pipeline, semcat_config(s.disambig, s.measure, s.top_terms, s.folded));
    let vectors: Vec<Option<CategoryVector>> = docs.par_iter().map(|d| semcat.categorize(&d.text).ok().map(|c| c.vector)).collect();
    let mut groups: BTreeMap<String, Vec<CategoryVector>> = BTreeMap::new();
    for (d, v) in docs.iter().zip(vectors) {
        match v {
            Some(v) => groups.entry(d.label.clone().unwrap()).or_default().push(v),
            None => log::warn!("document `{}` could not be categorized", d.id),
        }
    }
    let groups = subsample_groups(&groups, a.max_per_group, a.seed);
    let c = calibrate(&groups, &tax, &grid)?;
    writeln!(out, "alpha\tseparation")?;
    for (alpha, sep) in &c.separations {
        writeln!(out, "{alpha}\t{sep:.6}")?;
    }
    writeln!(out, "best\t{}", c.alpha)?;
    Ok(())
}

pub fn synth<W: Write>(a: &SynthArgs, out: &mut W) -> Res {
    let cfg = SynthConfig {
        seed: a.seed,
        docs_per_class: a.docs_per_class,
        ..Default::default()
    };
    echo(out, "synth", &cfg)?;
    let g = semantic_gap(&cfg)?;
    g.write(&a.out)?;
    writeln!(
        out,
        "wrote\t{}\ttrain\t{}\ttest\t{}\tcategories\t{}",
        a.out.display(),
        g.train.len(),
        g.test.len(),
        g.taxonomy.len()
    )?;
    Ok(())
}
