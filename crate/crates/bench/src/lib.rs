//! Fixtures shared by the benchmarks.

use semtax::eval::experiment::build_pipeline;
use semtax::synth::{semantic_gap, SemanticGap, SynthConfig};
use semtax::{SemCat, SemCatConfig, TextPipeline};

/// The default semantic-gap benchmark with `docs_per_class` documents per
/// class and side.
pub fn gap(docs_per_class: usize) -> SemanticGap {
    semantic_gap(&SynthConfig {
        docs_per_class,
        ..Default::default()
    })
    .expect("valid synth config")
}

pub fn pipeline(g: &SemanticGap) -> TextPipeline {
    build_pipeline(
        &g.taxonomy,
        None,
        None,
        None,
        Default::default(),
        g.train.iter().chain(&g.test).map(|d| d.text.as_str()),
    )
    .expect("pipeline builds")
}

pub fn semcat(g: &SemanticGap) -> SemCat<'_> {
    SemCat::new(&g.taxonomy, pipeline(g), SemCatConfig::default())
}
