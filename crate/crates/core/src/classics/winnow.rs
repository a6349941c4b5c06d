//! Balanced Winnow, one-vs-rest over the label set.
//!
//! Each label keeps a positive and a negative weight per feature. A document
//! is predicted positive for a label iff `sum_i (w+_i - w-_i) x_i > theta`;
//! mistakes rescale the weights of active features multiplicatively.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{label_set, rank_scores, FeatureBag, LabeledBag};
use crate::error::{Error, Result};
use crate::modelfile::ModelFile;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WinnowParams {
    pub theta: f64,
    pub promotion: f64,
    pub demotion: f64,
    pub epochs: usize,
    pub init_pos: f64,
    pub init_neg: f64,
}

impl Default for WinnowParams {
    fn default() -> Self {
        WinnowParams {
            theta: 1.0,
            promotion: 1.1,
            demotion: 0.9,
            epochs: 50,
            init_pos: 1.0,
            init_neg: 0.5,
        }
    }
}

impl WinnowParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(format!("winnow: {m}")));
        if !(self.promotion > 1.0) || !self.promotion.is_finite() {
            return bad("promotion must exceed 1");
        }
        if !(self.demotion > 0.0 && self.demotion < 1.0) {
            return bad("demotion must lie in (0, 1)");
        }
        if self.epochs == 0 {
            return bad("epochs must be at least 1");
        }
        if !(self.init_pos > 0.0 && self.init_neg > 0.0) || !self.theta.is_finite() {
            return bad("initial weights must be positive and theta finite");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Unit {
    pos: BTreeMap<String, f64>,
    neg: BTreeMap<String, f64>,
}

impl Unit {
    fn score(&self, x: &FeatureBag) -> f64 {
        x.iter()
            .filter_map(|(f, &v)| match (self.pos.get(f), self.neg.get(f)) {
                (Some(p), Some(n)) => Some((p - n) * v),
                _ => None,
            })
            .sum()
    }

    fn rescale(&mut self, x: &FeatureBag, pos_factor: f64, neg_factor: f64) {
        for (f, &v) in x {
            if v > 0.0 {
                if let Some(p) = self.pos.get_mut(f) {
                    *p = (*p * pos_factor).max(f64::MIN_POSITIVE);
                }
                if let Some(n) = self.neg.get_mut(f) {
                    *n = (*n * neg_factor).max(f64::MIN_POSITIVE);
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WinnowModel {
    params: WinnowParams,
    labels: Vec<String>,
    units: Vec<Unit>,
    epochs_run: usize,
}

impl WinnowModel {
    /// Fresh model with initial weights on every feature seen in `docs`.
    fn init(docs: &[LabeledBag], params: &WinnowParams) -> Result<Self> {
        params.validate()?;
        let labels = label_set(docs)?;
        let mut pos = BTreeMap::new();
        let mut neg = BTreeMap::new();
        for d in docs {
            for (f, &v) in &d.features {
                if v < 0.0 {
                    return Err(Error::InvalidArgument(format!("negative feature value for `{f}`")));
                }
                pos.insert(f.clone(), params.init_pos);
                neg.insert(f.clone(), params.init_neg);
            }
        }
        let unit = Unit { pos, neg };
        Ok(WinnowModel {
            params: params.clone(),
            units: vec![unit; labels.len()],
            labels,
            epochs_run: 0,
        })
    }

    /// Mistake-driven training in document order; stops after the first
    /// epoch without a mistake.
    pub fn train(docs: &[LabeledBag], params: &WinnowParams) -> Result<Self> {
        let mut m = Self::init(docs, params)?;
        for _ in 0..params.epochs {
            m.epochs_run += 1;
            let mut mistakes = 0;
            for d in docs {
                for c in 0..m.labels.len() {
                    let positive = m.labels[c] == d.label;
                    if m.step(c, &d.features, positive) {
                        mistakes += 1;
                    }
                }
            }
            if mistakes == 0 {
                break;
            }
        }
        Ok(m)
    }

    /// One online update of unit `c`; returns true on a mistake.
    fn step(&mut self, c: usize, x: &FeatureBag, positive: bool) -> bool {
        let (a, b, theta) = (self.params.promotion, self.params.demotion, self.params.theta);
        let unit = &mut self.units[c];
        let predicted = unit.score(x) > theta;
        match (predicted, positive) {
            (false, true) => unit.rescale(x, a, b),
            (true, false) => unit.rescale(x, b, a),
            _ => return false,
        }
        true
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn params(&self) -> &WinnowParams {
        &self.params
    }

    pub fn epochs_run(&self) -> usize {
        self.epochs_run
    }

    /// `(w+, w-)` of `feature` for `label`.
    pub fn weights(&self, label: &str, feature: &str) -> Option<(f64, f64)> {
        let c = self.labels.iter().position(|l| l == label)?;
        let u = &self.units[c];
        Some((*u.pos.get(feature)?, *u.neg.get(feature)?))
    }

    pub fn min_weight(&self) -> f64 {
        self.units
            .iter()
            .flat_map(|u| u.pos.values().chain(u.neg.values()))
            .fold(f64::INFINITY, |a, &b| a.min(b))
    }

    /// Labels ranked by margin `sum (w+ - w-) x - theta`. Features never seen
    /// in training contribute nothing.
    pub fn predict(&self, x: &FeatureBag) -> Vec<(String, f64)> {
        rank_scores(
            self.labels
                .iter()
                .zip(&self.units)
                .map(|(l, u)| (l.clone(), u.score(x) - self.params.theta))
                .collect(),
        )
    }

    pub fn to_model_file(&self) -> ModelFile {
        let p = &self.params;
        let mut f = ModelFile::new("winnow")
            .param("theta", p.theta)
            .param("promotion", p.promotion)
            .param("demotion", p.demotion)
            .param("epochs", p.epochs)
            .param("init_pos", p.init_pos)
            .param("init_neg", p.init_neg)
            .param("epochs_run", self.epochs_run);
        for (l, u) in self.labels.iter().zip(&self.units) {
            f.push("P", l, u.pos.iter().map(|(k, &w)| (k.clone(), w)));
            f.push("N", l, u.neg.iter().map(|(k, &w)| (k.clone(), w)));
        }
        f
    }

    pub fn from_model_file(f: &ModelFile) -> Result<Self> {
        f.expect_kind("winnow")?;
        let params = WinnowParams {
            theta: f.get("theta")?,
            promotion: f.get("promotion")?,
            demotion: f.get("demotion")?,
            epochs: f.get("epochs")?,
            init_pos: f.get("init_pos")?,
            init_neg: f.get("init_neg")?,
        };
        params.validate().map_err(|e| Error::Model(e.to_string()))?;
        let mut labels = Vec::new();
        let mut units = Vec::new();
        for r in f.rows_tagged("P") {
            labels.push(r.label.clone());
            units.push(Unit {
                pos: r.entries.iter().cloned().collect(),
                neg: BTreeMap::new(),
            });
        }
        for r in f.rows_tagged("N") {
            let c = labels
                .iter()
                .position(|l| *l == r.label)
                .ok_or_else(|| Error::Model(format!("weights for unknown class `{}`", r.label)))?;
            units[c].neg = r.entries.iter().cloned().collect();
        }
        if labels.is_empty() || units.iter().any(|u| u.pos.len() != u.neg.len()) {
            return Err(Error::Model("winnow weight tables incomplete".into()));
        }
        Ok(WinnowModel {
            params,
            labels,
            units,
            epochs_run: f.get("epochs_run")?,
        })
    }
}
