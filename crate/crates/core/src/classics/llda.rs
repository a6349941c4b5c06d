//! Labeled LDA: one topic per label, collapsed Gibbs sampling where each
//! token may only take a topic from its document's label set.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{rank_scores, FeatureBag};
use crate::error::{Error, Result};
use crate::modelfile::ModelFile;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LldaParams {
    /// Document-topic prior; `None` means `50 / K`.
    pub alpha: Option<f64>,
    /// Topic-word prior.
    pub beta: f64,
    pub iterations: usize,
    pub seed: u64,
    /// Multiplier turning fractional feature weights into token counts.
    pub count_scale: f64,
}

impl Default for LldaParams {
    fn default() -> Self {
        LldaParams {
            alpha: None,
            beta: 0.01,
            iterations: 200,
            seed: 0,
            count_scale: 100.0,
        }
    }
}

impl LldaParams {
    fn validate(&self) -> Result<()> {
        let ok = self.alpha.map_or(true, |a| a > 0.0 && a.is_finite())
            && self.beta > 0.0
            && self.beta.is_finite()
            && self.iterations >= 1
            && self.count_scale > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(
                "llda: priors and count_scale must be positive, iterations at least 1".into(),
            ))
        }
    }
}

/// A training document: its label set and integer word counts.
#[derive(Debug, Clone, PartialEq)]
pub struct LldaDoc {
    pub labels: Vec<String>,
    pub words: BTreeMap<String, u32>,
}

impl LldaDoc {
    pub fn new(labels: Vec<String>, words: BTreeMap<String, u32>) -> Self {
        LldaDoc { labels, words }
    }

    /// Rounds `value * scale` to a count; entries that round to 0 are dropped.
    pub fn from_bag(labels: Vec<String>, bag: &FeatureBag, scale: f64) -> Self {
        let words = bag
            .iter()
            .filter_map(|(w, &v)| {
                let n = (v * scale).round();
                (n >= 1.0).then(|| (w.clone(), n as u32))
            })
            .collect();
        LldaDoc { labels, words }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LldaModel {
    params: LldaParams,
    labels: Vec<String>,
    vocab: Vec<String>,
    /// `phi[k][w]`, rows indexed like `labels`, columns like `vocab`.
    phi: Vec<Vec<f64>>,
}

/// Sampler state exposed to observers after every sweep.
pub struct SweepState<'a> {
    pub iteration: usize,
    /// Per document, the label index assigned to each token.
    pub assignments: &'a [Vec<usize>],
    pub labels: &'a [String],
}

impl LldaModel {
    pub fn train(docs: &[LldaDoc], params: &LldaParams) -> Result<Self> {
        Self::fit_with_observer(docs, params, |_| {})
    }

    pub fn fit_with_observer<F: FnMut(&SweepState<'_>)>(
        docs: &[LldaDoc],
        params: &LldaParams,
        mut observe: F,
    ) -> Result<Self> {
        params.validate()?;
        if docs.is_empty() {
            return Err(Error::Training("empty training set".into()));
        }
        let mut labels: Vec<String> = docs.iter().flat_map(|d| d.labels.iter().cloned()).collect();
        labels.sort();
        labels.dedup();
        let mut vocab: Vec<String> = docs.iter().flat_map(|d| d.words.keys().cloned()).collect();
        vocab.sort();
        vocab.dedup();
        if vocab.is_empty() {
            return Err(Error::Training("no words in the training set".into()));
        }
        let k = labels.len();
        let v = vocab.len();
        let alpha = params.alpha.unwrap_or(50.0 / k as f64);
        let beta = params.beta;

        // tokens as word indices; per-doc allowed label indices
        let mut tokens: Vec<Vec<usize>> = Vec::with_capacity(docs.len());
        let mut allowed: Vec<Vec<usize>> = Vec::with_capacity(docs.len());
        for (i, d) in docs.iter().enumerate() {
            if d.labels.is_empty() {
                return Err(Error::Training(format!("document {i} has no labels")));
            }
            let mut ls: Vec<usize> = d.labels.iter().map(|l| labels.binary_search(l).unwrap()).collect();
            ls.sort_unstable();
            ls.dedup();
            allowed.push(ls);
            let mut t = Vec::new();
            for (w, &n) in &d.words {
                let wi = vocab.binary_search(w).unwrap();
                t.extend(std::iter::repeat(wi).take(n as usize));
            }
            tokens.push(t);
        }

        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let mut n_dk = vec![vec![0u32; k]; docs.len()];
        let mut n_kw = vec![vec![0u32; v]; k];
        let mut n_k = vec![0u32; k];
        let mut z: Vec<Vec<usize>> = Vec::with_capacity(docs.len());
        for (d, t) in tokens.iter().enumerate() {
            let ls = &allowed[d];
            let zd: Vec<usize> = t
                .iter()
                .map(|&w| {
                    let topic = ls[rng.gen_range(0..ls.len())];
                    n_dk[d][topic] += 1;
                    n_kw[topic][w] += 1;
                    n_k[topic] += 1;
                    topic
                })
                .collect();
            z.push(zd);
        }

        let vbeta = v as f64 * beta;
        let mut weights = Vec::new();
        for it in 0..params.iterations {
            for (d, t) in tokens.iter().enumerate() {
                let ls = &allowed[d];
                if ls.len() == 1 {
                    continue;
                }
                for (i, &w) in t.iter().enumerate() {
                    let old = z[d][i];
                    n_dk[d][old] -= 1;
                    n_kw[old][w] -= 1;
                    n_k[old] -= 1;
                    weights.clear();
                    let mut total = 0.0;
                    for &topic in ls {
                        total += (n_dk[d][topic] as f64 + alpha) * (n_kw[topic][w] as f64 + beta)
                            / (n_k[topic] as f64 + vbeta);
                        weights.push(total);
                    }
                    let u = rng.gen::<f64>() * total;
                    let pick = weights.iter().position(|&c| u < c).unwrap_or(ls.len() - 1);
                    let new = ls[pick];
                    z[d][i] = new;
                    n_dk[d][new] += 1;
                    n_kw[new][w] += 1;
                    n_k[new] += 1;
                }
            }
            observe(&SweepState {
                iteration: it,
                assignments: &z,
                labels: &labels,
            });
        }

        let phi = (0..k)
            .map(|t| {
                (0..v)
                    .map(|w| (n_kw[t][w] as f64 + beta) / (n_k[t] as f64 + vbeta))
                    .collect()
            })
            .collect();
        Ok(LldaModel {
            params: LldaParams {
                alpha: Some(alpha),
                ..params.clone()
            },
            labels,
            vocab,
            phi,
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn params(&self) -> &LldaParams {
        &self.params
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.vocab
    }

    pub fn phi(&self, label: &str, word: &str) -> Option<f64> {
        let k = self.labels.binary_search_by(|l| l.as_str().cmp(label)).ok()?;
        let w = self.vocab.binary_search_by(|x| x.as_str().cmp(word)).ok()?;
        Some(self.phi[k][w])
    }

    /// `sum_w n_wd log phi(w|label)` over in-vocabulary words.
    pub fn predict(&self, doc: &FeatureBag) -> Vec<(String, f64)> {
        let hits: Vec<(usize, f64)> = doc
            .iter()
            .filter(|(_, &n)| n != 0.0)
            .filter_map(|(w, &n)| self.vocab.binary_search(w).ok().map(|i| (i, n)))
            .collect();
        rank_scores(
            self.labels
                .iter()
                .zip(&self.phi)
                .map(|(l, row)| (l.clone(), hits.iter().map(|&(i, n)| n * row[i].ln()).sum()))
                .collect(),
        )
    }

    pub fn to_model_file(&self) -> ModelFile {
        let p = &self.params;
        let mut f = ModelFile::new("llda")
            .param("alpha", p.alpha.unwrap_or(50.0 / self.labels.len() as f64))
            .param("beta", p.beta)
            .param("iterations", p.iterations)
            .param("seed", p.seed)
            .param("count_scale", p.count_scale);
        for (l, row) in self.labels.iter().zip(&self.phi) {
            f.push("F", l, self.vocab.iter().cloned().zip(row.iter().copied()));
        }
        f
    }

    pub fn from_model_file(f: &ModelFile) -> Result<Self> {
        f.expect_kind("llda")?;
        let params = LldaParams {
            alpha: Some(f.get("alpha")?),
            beta: f.get("beta")?,
            iterations: f.get("iterations")?,
            seed: f.get("seed")?,
            count_scale: f.get("count_scale")?,
        };
        let mut labels = Vec::new();
        let mut phi = Vec::new();
        let mut vocab: Option<Vec<String>> = None;
        for r in f.rows_tagged("F") {
            let words: Vec<String> = r.entries.iter().map(|e| e.0.clone()).collect();
            match &vocab {
                None => vocab = Some(words),
                Some(v) if *v == words => {}
                Some(_) => return Err(Error::Model("topic rows disagree on vocabulary".into())),
            }
            labels.push(r.label.clone());
            phi.push(r.entries.iter().map(|e| e.1).collect());
        }
        let vocab = vocab.ok_or_else(|| Error::Model("llda model has no topics".into()))?;
        Ok(LldaModel {
            params,
            labels,
            vocab,
            phi,
        })
    }
}
