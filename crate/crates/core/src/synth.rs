//! Seeded generator for the semantic-gap benchmark.
//!
//! A root with `classes` top categories, each split into `subcategories`
//! leaves. Every leaf holds concepts labeled by two synonyms, one from each
//! of two disjoint vocabularies. Training documents use the first
//! vocabulary, test documents the second, so bag-of-words models see no
//! shared topical words while taxonomy-based ones see the same concepts.
//! Shared filler words and a few homonyms (one label on concepts of two
//! classes) add noise.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{save_corpus, Document};
use crate::error::{Error, Result};
use crate::taxonomy::{Taxonomy, TaxonomyBuilder};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub classes: usize,
    pub subcategories: usize,
    pub concepts_per_leaf: usize,
    pub docs_per_class: usize,
    pub concept_words_per_doc: usize,
    pub filler_vocabulary: usize,
    pub filler_words_per_doc: usize,
    pub homonyms: usize,
    /// Chance that a document of an involved class mentions a homonym.
    pub homonym_rate: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            classes: 3,
            subcategories: 2,
            concepts_per_leaf: 8,
            docs_per_class: 70,
            concept_words_per_doc: 8,
            filler_vocabulary: 40,
            filler_words_per_doc: 12,
            homonyms: 3,
            homonym_rate: 0.3,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SemanticGap {
    pub taxonomy: Taxonomy,
    pub train: Vec<Document>,
    pub test: Vec<Document>,
    /// Class labels; each names its top category.
    pub labels: Vec<String>,
}

const ONSETS: &[&str] = &["b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "tr", "kl", "st"];
const VOWELS: &[&str] = &["a", "e", "i", "o", "u"];

/// Fresh pronounceable pseudo-words, never repeating one in `used`.
fn fresh_word(rng: &mut ChaCha8Rng, used: &mut BTreeSet<String>) -> String {
    loop {
        let syllables = rng.gen_range(2..=3);
        let mut w = String::new();
        for _ in 0..syllables {
            w.push_str(ONSETS.choose(rng).unwrap());
            w.push_str(VOWELS.choose(rng).unwrap());
        }
        if used.insert(w.clone()) {
            return w;
        }
    }
}

struct Concept {
    class: usize,
    leaf: usize,
    words: [String; 2],
}

pub fn semantic_gap(cfg: &SynthConfig) -> Result<SemanticGap> {
    if cfg.classes < 2 || cfg.subcategories == 0 || cfg.concepts_per_leaf == 0 || cfg.docs_per_class == 0 {
        return Err(Error::InvalidArgument("synth needs >= 2 classes and nonzero sizes".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut used = BTreeSet::new();
    let class_id = |c: usize| format!("class{c}");
    let leaf_id = |c: usize, l: usize| format!("class{c}_sub{l}");

    let mut b = TaxonomyBuilder::new();
    b.add_category("root", "Root", Vec::<&str>::new())?;
    let mut concepts = Vec::new();
    for c in 0..cfg.classes {
        b.add_category(&class_id(c), &format!("Class {c}"), ["root"])?;
        for l in 0..cfg.subcategories {
            b.add_category(&leaf_id(c, l), &format!("Class {c} part {l}"), [class_id(c)])?;
            for _ in 0..cfg.concepts_per_leaf {
                let words = [fresh_word(&mut rng, &mut used), fresh_word(&mut rng, &mut used)];
                concepts.push(Concept { class: c, leaf: l, words });
            }
        }
    }
    for (i, p) in concepts.iter().enumerate() {
        b.add_concept(&format!("p{i}"), [leaf_id(p.class, p.leaf)], p.words.iter())?;
    }
    // homonym h labels one concept in class h % K and one in (h + 1) % K
    let mut homonyms = Vec::new();
    for h in 0..cfg.homonyms {
        let word = fresh_word(&mut rng, &mut used);
        let pair = [h % cfg.classes, (h + 1) % cfg.classes];
        for (j, &c) in pair.iter().enumerate() {
            let leaf = rng.gen_range(0..cfg.subcategories);
            b.add_concept(&format!("h{h}_{j}"), [leaf_id(c, leaf)], [word.as_str()])?;
        }
        homonyms.push((word, pair));
    }
    let fillers: Vec<String> = (0..cfg.filler_vocabulary).map(|_| fresh_word(&mut rng, &mut used)).collect();
    let taxonomy = b.build()?;

    let mut by_leaf: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (i, p) in concepts.iter().enumerate() {
        by_leaf.entry((p.class, p.leaf)).or_default().push(i);
    }

    let make_docs = |side: usize, prefix: &str, rng: &mut ChaCha8Rng| -> Vec<Document> {
        let mut docs = Vec::new();
        for c in 0..cfg.classes {
            for n in 0..cfg.docs_per_class {
                let leaf = n % cfg.subcategories;
                let mut words: Vec<&str> = Vec::new();
                for _ in 0..cfg.concept_words_per_doc {
                    // mostly the document's own leaf, sometimes a sibling
                    let l = if cfg.subcategories > 1 && rng.gen_bool(0.25) {
                        rng.gen_range(0..cfg.subcategories)
                    } else {
                        leaf
                    };
                    let p = *by_leaf[&(c, l)].choose(rng).unwrap();
                    words.push(&concepts[p].words[side]);
                }
                for _ in 0..cfg.filler_words_per_doc {
                    if let Some(f) = fillers.choose(rng) {
                        words.push(f);
                    }
                }
                for (w, pair) in &homonyms {
                    if pair.contains(&c) && rng.gen_bool(cfg.homonym_rate) {
                        words.push(w);
                    }
                }
                words.shuffle(rng);
                docs.push(
                    Document::new(format!("{prefix}{c}_{n}"), words.join(" "))
                        .with_label(class_id(c))
                        .with_categories([leaf_id(c, leaf)]),
                );
            }
        }
        docs
    };
    let train = make_docs(0, "train", &mut rng);
    let test = make_docs(1, "test", &mut rng);
    Ok(SemanticGap {
        taxonomy,
        train,
        test,
        labels: (0..cfg.classes).map(class_id).collect(),
    })
}

/// Experiment config comparing bag-of-words and semantic methods on the
/// generated files.
pub const EXPERIMENT_TOML: &str = r#"taxonomy = "taxonomy.tsv"
train = "train.jsonl"
test = "test.jsonl"
seed = 7
reference = "semcla"

[[methods]]
type = "nb"
features = "terms"

[[methods]]
type = "winnow"
features = "terms"

[[methods]]
type = "nb"
features = "categories"

[[methods]]
type = "winnow"
features = "categories"

[[methods]]
type = "nb"
features = "concepts"

[[methods]]
type = "winnow"
features = "concepts"

[[methods]]
type = "semcla"
"#;

impl SemanticGap {
    /// Writes `taxonomy.tsv`, `train.jsonl`, `test.jsonl` and
    /// `experiment.toml` into `dir`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let tax = dir.join("taxonomy.tsv");
        std::fs::write(&tax, self.taxonomy.to_file_string()).map_err(|e| Error::io(&tax, e))?;
        save_corpus(dir.join("train.jsonl"), &self.train)?;
        save_corpus(dir.join("test.jsonl"), &self.test)?;
        let exp = dir.join("experiment.toml");
        std::fs::write(&exp, EXPERIMENT_TOML).map_err(|e| Error::io(&exp, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn vocabularies_are_disjoint() {
        let g = semantic_gap(&SynthConfig::default()).unwrap();
        assert_eq!(g.train.len(), 210);
        assert_eq!(g.test.len(), 210);
        let words = |docs: &[Document]| -> HashSet<String> {
            docs.iter().flat_map(|d| d.text.split(' ').map(str::to_string)).collect()
        };
        let (a, b) = (words(&g.train), words(&g.test));
        // shared words are fillers and homonyms only
        for w in a.intersection(&b) {
            let hits = g.taxonomy.lookup_exact(w);
            assert!(hits.is_empty() || hits.len() == 2, "{w}");
        }
        assert_eq!(g.taxonomy.len(), 1 + 3 + 6);
    }

    #[test]
    fn seeded() {
        let a = semantic_gap(&SynthConfig::default()).unwrap();
        let b = semantic_gap(&SynthConfig::default()).unwrap();
        assert_eq!(a.train, b.train);
        assert_eq!(a.taxonomy.to_file_string(), b.taxonomy.to_file_string());
        let c = semantic_gap(&SynthConfig { seed: 2, ..Default::default() }).unwrap();
        assert_ne!(a.train, c.train);
    }
}
