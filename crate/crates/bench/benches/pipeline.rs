use std::collections::BTreeMap;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use semtax::ensemble::{aggregate, VoteSet};
use semtax::eval::{extract_features, run_experiment, ExperimentConfig, FeatureMode};
use semtax::eval::experiment::ExperimentData;
use semtax::semcla::{calibrate_alpha, default_alpha_grid};
use semtax::{AggregationMode, CategoryVector, ClassifierSpec, Disambiguation, GroupMode, LabeledBag, SemCatConfig, SemClaModel};
use semtax_bench::{gap, semcat};

fn taxonomy(c: &mut Criterion) {
    let g = gap(20);
    let t = &g.taxonomy;
    let cats: Vec<_> = t.categories().collect();
    c.bench_function("sim_lin all pairs", |b| {
        b.iter(|| {
            let mut s = 0.0;
            for &x in &cats {
                for &y in &cats {
                    s += t.sim_lin(x, y);
                }
            }
            black_box(s)
        })
    });
}

fn categorize(c: &mut Criterion) {
    let g = gap(30);
    let base = semcat(&g);
    let mut group = c.benchmark_group("categorize");
    for method in [Disambiguation::Nearest, Disambiguation::RankHalf, Disambiguation::Uniform] {
        let s = base.with_config(SemCatConfig {
            disambiguation: method,
            ..Default::default()
        });
        group.bench_function(method.to_string(), |b| {
            b.iter(|| {
                for d in &g.test {
                    black_box(s.categorize(&d.text).ok());
                }
            })
        });
    }
    group.finish();
}

fn classifiers(c: &mut Criterion) {
    let g = gap(40);
    let s = semcat(&g);
    let bags: Vec<LabeledBag> = g
        .train
        .iter()
        .map(|d| LabeledBag::new(d.label.clone().unwrap(), extract_features(&d.text, FeatureMode::Categories, &s).unwrap()))
        .collect();
    let mut group = c.benchmark_group("train");
    for spec in [ClassifierSpec::NaiveBayes, ClassifierSpec::Winnow(Default::default())] {
        group.bench_function(spec.kind().to_string(), |b| b.iter(|| black_box(spec.train(&bags, 1).unwrap())));
    }
    group.sample_size(10);
    let llda = ClassifierSpec::Llda(semtax::classics::LldaParams {
        iterations: 20,
        ..Default::default()
    });
    group.bench_function("llda 20 sweeps", |b| b.iter(|| black_box(llda.train(&bags, 1).unwrap())));
    group.finish();

    let mut groups: BTreeMap<String, Vec<CategoryVector>> = BTreeMap::new();
    for d in &g.train {
        groups.entry(d.label.clone().unwrap()).or_default().push(s.categorize(&d.text).unwrap().vector);
    }
    let model = SemClaModel::from_vectors(groups.clone(), &g.taxonomy, 0.33, GroupMode::Average).unwrap();
    let tests: Vec<CategoryVector> = g.test.iter().map(|d| s.categorize(&d.text).unwrap().vector).collect();
    c.bench_function("semcla classify test side", |b| {
        b.iter(|| {
            for v in &tests {
                black_box(model.classify_vector(v, &g.taxonomy));
            }
        })
    });
    let mut cal = c.benchmark_group("calibrate");
    cal.sample_size(10);
    cal.bench_function("alpha grid", |b| b.iter(|| black_box(calibrate_alpha(&groups, &g.taxonomy, &default_alpha_grid()).unwrap())));
    cal.finish();
}

fn votes(c: &mut Criterion) {
    let mut set = VoteSet::new();
    for i in 0..50 {
        set.push(format!("L{}", i % 7), 1.0 + (i % 3) as f64, 1 + i % 3).unwrap();
    }
    c.bench_function("aggregate 50 votes", |b| b.iter(|| black_box(aggregate(&set, AggregationMode::Rank, 3, 9).unwrap())));
}

fn experiment(c: &mut Criterion) {
    let dir = tempfile_dir();
    gap(30).write(&dir).unwrap();
    let config = ExperimentConfig::load(dir.join("experiment.toml")).unwrap();
    let mut group = c.benchmark_group("experiment");
    group.sample_size(10);
    group.bench_function("semantic gap, 7 methods", |b| {
        b.iter_batched(
            || ExperimentData::load(&config).unwrap(),
            |data| black_box(run_experiment(&config, &data).unwrap()),
            BatchSize::LargeInput,
        )
    });
    group.finish();
}

fn tempfile_dir() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("semtax-bench-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

criterion_group!(benches, taxonomy, categorize, classifiers, votes, experiment);
criterion_main!(benches);
