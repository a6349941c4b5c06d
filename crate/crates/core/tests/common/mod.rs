#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use semtax::{CategoryId, Taxonomy, TaxonomyBuilder};

/// R -> {A, B}, A -> {A1, A2}, B -> {B1};
/// c1, c2 in A1; c3 in A2; c4 in A; c5, c6 in B1; c7 in B.
pub const TOY: &str = "\
C\tR\tRoot\t
C\tA\tAlpha\tR
C\tB\tBeta\tR
C\tA1\tAlpha one\tA
C\tA2\tAlpha two\tA
C\tB1\tBeta one\tB
P\tc1\tA1\tcomet
P\tc2\tA1\tbroom
P\tc3\tA2\tnebula|star cloud
P\tc4\tA\tgalaxy
P\tc5\tB1\tbacteria
P\tc6\tB1\tvirus
P\tc7\tB\tcell
";

pub fn toy() -> Taxonomy {
    Taxonomy::parse(TOY).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random rooted DAG described independently of `Taxonomy`, so oracles
/// can recompute everything from first principles.
#[derive(Debug, Clone)]
pub struct RandomDag {
    /// `parents[i]` for category `k{i:03}`; index 0 is the root.
    pub parents: Vec<Vec<usize>>,
    /// Concept categories (never the root) and one label each.
    pub concepts: Vec<(Vec<usize>, String)>,
}

pub fn cat_name(i: usize) -> String {
    format!("k{i:03}")
}

impl RandomDag {
    pub fn generate(r: &mut ChaCha8Rng, max_categories: usize, max_concepts: usize, vocabulary: usize) -> Self {
        let n = r.gen_range(2..=max_categories);
        let mut parents = vec![Vec::new()];
        for i in 1..n {
            let k = r.gen_range(1..=3.min(i));
            let mut ps: Vec<usize> = (0..i).collect::<Vec<_>>().choose_multiple(r, k).copied().collect();
            ps.sort_unstable();
            parents.push(ps);
        }
        let m = r.gen_range(1..=max_concepts);
        let concepts = (0..m)
            .map(|_| {
                let k = r.gen_range(1..=2.min(n - 1));
                let mut cs: Vec<usize> = (1..n).collect::<Vec<_>>().choose_multiple(r, k).copied().collect();
                cs.sort_unstable();
                (cs, format!("w{}", r.gen_range(0..vocabulary)))
            })
            .collect();
        RandomDag { parents, concepts }
    }

    pub fn len(&self) -> usize {
        self.parents.len()
    }

    pub fn build(&self) -> Taxonomy {
        let mut b = TaxonomyBuilder::new();
        for (i, ps) in self.parents.iter().enumerate() {
            b.add_category(&cat_name(i), &cat_name(i), ps.iter().map(|&p| cat_name(p))).unwrap();
        }
        for (j, (cs, label)) in self.concepts.iter().enumerate() {
            b.add_concept(&format!("p{j}"), cs.iter().map(|&c| cat_name(c)), [label.as_str()]).unwrap();
        }
        b.build().unwrap()
    }

    /// Ancestors of `i` including itself, by breadth-first walk up.
    pub fn ancestors(&self, i: usize) -> BTreeSet<usize> {
        let mut seen = BTreeSet::from([i]);
        let mut queue = VecDeque::from([i]);
        while let Some(x) = queue.pop_front() {
            for &p in &self.parents[x] {
                if seen.insert(p) {
                    queue.push_back(p);
                }
            }
        }
        seen
    }

    /// Distinct concepts linked anywhere at or below `i`.
    pub fn concept_count(&self, i: usize) -> usize {
        self.concepts
            .iter()
            .filter(|(cs, _)| cs.iter().any(|&c| self.ancestors(c).contains(&i)))
            .count()
    }

    pub fn ic(&self, i: usize) -> f64 {
        let n = self.concepts.len() as f64;
        1.0 - (1.0 + self.concept_count(i) as f64).ln() / (1.0 + n).ln()
    }

    /// IC of every category, one closure walk per concept category.
    pub fn ic_all(&self) -> Vec<f64> {
        let mut counts = vec![0usize; self.len()];
        for (cs, _) in &self.concepts {
            let above: BTreeSet<usize> = cs.iter().flat_map(|&c| self.ancestors(c)).collect();
            for a in above {
                counts[a] += 1;
            }
        }
        let n = self.concepts.len() as f64;
        counts.iter().map(|&s| 1.0 - (1.0 + s as f64).ln() / (1.0 + n).ln()).collect()
    }

    /// Common ancestor with the highest IC, smallest index on ties.
    pub fn msca(&self, a: usize, b: usize, ic: &[f64]) -> usize {
        let common: Vec<usize> = self.ancestors(a).intersection(&self.ancestors(b)).copied().collect();
        let mut best = common[0];
        for &c in &common[1..] {
            if ic[c] > ic[best] {
                best = c;
            }
        }
        best
    }
}

pub fn id(t: &Taxonomy, i: usize) -> CategoryId {
    t.category(&cat_name(i)).unwrap()
}

/// Random annotations: each document gets one to three categories.
pub fn random_annotations(r: &mut ChaCha8Rng, t: &Taxonomy, docs: usize) -> Vec<Vec<CategoryId>> {
    let all: Vec<CategoryId> = t.categories().collect();
    (0..docs)
        .map(|_| {
            let k = r.gen_range(1..=3.min(all.len()));
            let mut v: Vec<CategoryId> = all.choose_multiple(r, k).copied().collect();
            v.sort();
            v
        })
        .collect()
}

/// Single-label bags of counts over a small vocabulary.
pub fn random_count_corpus(r: &mut ChaCha8Rng, labels: usize, docs: usize, vocab: usize) -> Vec<(String, BTreeMap<String, u32>)> {
    (0..docs)
        .map(|_| {
            let label = format!("L{}", r.gen_range(0..labels));
            let mut words = BTreeMap::new();
            for _ in 0..r.gen_range(1..8) {
                *words.entry(format!("v{}", r.gen_range(0..vocab))).or_insert(0) += 1;
            }
            (label, words)
        })
        .collect()
}
