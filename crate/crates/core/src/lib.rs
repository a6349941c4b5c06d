//! Taxonomy-driven semantic text categorization and classification.
//!
//! The crate is organized bottom-up:
//!
//! * [`taxonomy`]: the category DAG, information content, most specific
//!   common abstraction and the category/concept similarity measures.
//! * [`textpipe`]: tokenization, phrases and tf-idf term vectors.
//! * [`semcat`]: the unsupervised categorizer producing category vectors.
//! * [`semcla`]: nearest-group classification over extended category vectors.
//! * [`classics`]: Naive Bayes, Balanced Winnow and Labeled LDA baselines.
//! * [`ensemble`]: bagging ensembles, vote aggregation and the committee
//!   with categorizer votes.
//! * [`eval`]: metrics, statistical tests, feature modes and the experiment
//!   runner.

pub mod error;
pub mod sparse;
pub mod taxonomy;
pub mod textpipe;
pub mod semcat;
pub mod modelfile;
pub mod semcla;
pub mod classics;
pub mod corpus;
pub mod ensemble;
pub mod eval;
pub mod synth;

pub use corpus::Document;
pub use ensemble::{AggregationMode, Committee, CommitteeConfig, LabelMap, SampleLevel};
pub use eval::{ExperimentConfig, ExperimentReport, FeatureMode};
pub use error::{Error, Result};
pub use classics::{Classifier, ClassifierKind, ClassifierSpec, FeatureBag, LabeledBag};
pub use modelfile::ModelFile;
pub use semcla::{GroupMode, SemClaModel};
pub use semcat::{Categorization, CategoryVector, Disambiguation, SemCat, SemCatConfig};
pub use taxonomy::{CategoryId, ConceptId, Measure, Taxonomy, TaxonomyBuilder};
pub use textpipe::{BackgroundStats, TermVector, TextPipeline};
