//! Category DAG with attached concepts.
//!
//! Categories form a rooted DAG with edges pointing from a category to its
//! direct super-categories. Concepts hang off one or more categories and
//! carry the surface labels used to match document terms. The information
//! content of a category is driven by how many concepts live in its
//! downward closure:
//!
//! ```text
//! IC(k) = 1 - log(1 + s_k) / log(1 + N)
//! ```
//!
//! where `s_k` counts distinct concepts under `k` and `N` is the total
//! concept count, so the root always has IC 0.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};

/// Handle to a category of one [`Taxonomy`]. Handles are dense indices in
/// ascending category-id order, so comparing handles compares ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CategoryId(u32);

/// Handle to a concept of one [`Taxonomy`], ordered like concept ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConceptId(u32);

impl CategoryId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl ConceptId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Category similarity measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    #[default]
    Lin,
    #[serde(alias = "pirro")]
    PirroSeco,
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lin" => Ok(Measure::Lin),
            "pirro" | "pirro_seco" | "pirro-seco" => Ok(Measure::PirroSeco),
            other => Err(Error::InvalidArgument(format!("unknown measure `{other}`"))),
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Measure::Lin => "lin",
            Measure::PirroSeco => "pirro_seco",
        })
    }
}

#[derive(Debug, Clone)]
pub struct Concept {
    pub id: String,
    /// Normalized labels, sorted and deduplicated.
    pub labels: Vec<String>,
    /// Linked categories, sorted.
    pub categories: Vec<CategoryId>,
}

/// Distinct-concept counts over each category's downward closure.
#[derive(Debug, Clone)]
pub struct ConceptCountTable {
    counts: Vec<usize>,
    total: usize,
}

impl ConceptCountTable {
    pub fn get(&self, k: CategoryId) -> usize {
        self.counts[k.index()]
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn iter(&self) -> impl Iterator<Item = (CategoryId, usize)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .map(|(i, &c)| (CategoryId(i as u32), c))
    }
}

/// Lowercases and collapses internal whitespace.
pub fn normalize_label(s: &str) -> String {
    s.to_lowercase().split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Aggressive comparison key: strips diacritics and case, turns every run of
/// non-letters into one space.
pub fn fold_label(s: &str) -> String {
    let mut stripped = String::with_capacity(s.len());
    for c in s.nfd().filter(|c| !is_combining_mark(*c)) {
        // letters without a canonical decomposition
        match c {
            'ł' | 'Ł' => stripped.push('l'),
            'ø' | 'Ø' => stripped.push('o'),
            'đ' | 'Đ' => stripped.push('d'),
            'ß' => stripped.push_str("ss"),
            'æ' | 'Æ' => stripped.push_str("ae"),
            'œ' | 'Œ' => stripped.push_str("oe"),
            _ => stripped.push(c),
        }
    }
    stripped
        .to_lowercase()
        .split(|c: char| !c.is_alphabetic())
        .filter(|t| !t.is_empty())
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Debug, Clone)]
struct CategoryRecord {
    label: String,
    parents: Vec<String>,
}

#[derive(Debug, Clone)]
struct ConceptRecord {
    categories: Vec<String>,
    labels: Vec<String>,
}

/// Collects category and concept records and validates them into a
/// [`Taxonomy`].
#[derive(Debug, Default, Clone)]
pub struct TaxonomyBuilder {
    categories: BTreeMap<String, CategoryRecord>,
    concepts: BTreeMap<String, ConceptRecord>,
}

impl TaxonomyBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_category<I, S>(&mut self, id: &str, label: &str, parents: I) -> Result<&mut Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        if self.categories.contains_key(id) {
            return Err(Error::DuplicateId {
                kind: "category",
                id: id.to_string(),
            });
        }
        let mut parents: Vec<String> = parents.into_iter().map(|p| p.as_ref().to_string()).collect();
        parents.sort();
        parents.dedup();
        self.categories.insert(
            id.to_string(),
            CategoryRecord {
                label: label.to_string(),
                parents,
            },
        );
        Ok(self)
    }

    pub fn add_concept<I, S, J, T>(&mut self, id: &str, categories: I, labels: J) -> Result<&mut Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
        J: IntoIterator<Item = T>,
        T: AsRef<str>,
    {
        if self.concepts.contains_key(id) {
            return Err(Error::DuplicateId {
                kind: "concept",
                id: id.to_string(),
            });
        }
        self.concepts.insert(
            id.to_string(),
            ConceptRecord {
                categories: categories.into_iter().map(|c| c.as_ref().to_string()).collect(),
                labels: labels.into_iter().map(|l| l.as_ref().to_string()).collect(),
            },
        );
        Ok(self)
    }

    pub fn build(self) -> Result<Taxonomy> {
        let ids: Vec<String> = self.categories.keys().cloned().collect();
        let by_id: HashMap<String, CategoryId> = ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), CategoryId(i as u32)))
            .collect();
        let n = ids.len();

        let mut labels = Vec::with_capacity(n);
        let mut parents = vec![Vec::new(); n];
        for (i, rec) in self.categories.values().enumerate() {
            labels.push(rec.label.clone());
            for p in &rec.parents {
                let pid = *by_id.get(p).ok_or_else(|| Error::UnknownParent {
                    category: ids[i].clone(),
                    parent: p.clone(),
                })?;
                parents[i].push(pid);
            }
            parents[i].sort();
        }

        let order = topological_order(&ids, &parents)?;

        let roots: Vec<usize> = (0..n).filter(|&i| parents[i].is_empty()).collect();
        let root = match roots.as_slice() {
            [] => return Err(Error::NoRoot),
            [r] => CategoryId(*r as u32),
            many => return Err(Error::MultipleRoots(many.iter().map(|&i| ids[i].clone()).collect())),
        };

        let mut children = vec![Vec::new(); n];
        for (child, ps) in parents.iter().enumerate() {
            for p in ps {
                children[p.index()].push(CategoryId(child as u32));
            }
        }

        // `order` lists parents before children.
        let mut ancestors: Vec<Vec<CategoryId>> = vec![Vec::new(); n];
        for &k in &order {
            let mut acc = vec![CategoryId(k as u32)];
            for p in &parents[k] {
                acc.extend_from_slice(&ancestors[p.index()]);
            }
            acc.sort();
            acc.dedup();
            ancestors[k] = acc;
        }

        if self.concepts.is_empty() {
            return Err(Error::NoConcepts);
        }
        let mut concepts = Vec::with_capacity(self.concepts.len());
        let mut concept_by_id = HashMap::with_capacity(self.concepts.len());
        for (i, (cid, rec)) in self.concepts.into_iter().enumerate() {
            if rec.categories.is_empty() {
                return Err(Error::NoCategories(cid));
            }
            let mut cats = Vec::with_capacity(rec.categories.len());
            for c in &rec.categories {
                let k = *by_id.get(c).ok_or_else(|| Error::DanglingConceptLink {
                    concept: cid.clone(),
                    category: c.clone(),
                })?;
                cats.push(k);
            }
            cats.sort();
            cats.dedup();
            let mut lbls: Vec<String> = rec
                .labels
                .iter()
                .map(|l| normalize_label(l))
                .filter(|l| !l.is_empty())
                .collect();
            lbls.sort();
            lbls.dedup();
            if lbls.is_empty() {
                return Err(Error::EmptyLabels(cid));
            }
            concept_by_id.insert(cid.clone(), ConceptId(i as u32));
            concepts.push(Concept {
                id: cid,
                labels: lbls,
                categories: cats,
            });
        }

        let counts = count_concepts(n, &ancestors, &concepts);
        let total = concepts.len();
        let log_total = ((1 + total) as f64).ln();
        let ic = (0..n)
            .map(|i| 1.0 - ((1 + counts[i]) as f64).ln() / log_total)
            .collect();

        let mut exact: HashMap<String, Vec<ConceptId>> = HashMap::new();
        let mut folded: HashMap<String, Vec<ConceptId>> = HashMap::new();
        for (i, c) in concepts.iter().enumerate() {
            for l in &c.labels {
                exact.entry(l.clone()).or_default().push(ConceptId(i as u32));
                let f = fold_label(l);
                if !f.is_empty() {
                    folded.entry(f).or_default().push(ConceptId(i as u32));
                }
            }
        }
        for v in exact.values_mut().chain(folded.values_mut()) {
            v.sort();
            v.dedup();
        }

        Ok(Taxonomy {
            ids,
            labels,
            by_id,
            parents,
            children,
            ancestors,
            root,
            concepts,
            concept_by_id,
            counts: ConceptCountTable {
                counts,
                total,
            },
            ic,
            exact,
            folded,
        })
    }
}

/// Kahn-free DFS topological sort over parent edges; parents come first.
/// On a cycle, names the smallest category id lying on it.
fn topological_order(ids: &[String], parents: &[Vec<CategoryId>]) -> Result<Vec<usize>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        White,
        Grey,
        Black,
    }
    let n = ids.len();
    let mut mark = vec![Mark::White; n];
    let mut order = Vec::with_capacity(n);
    for start in 0..n {
        if mark[start] != Mark::White {
            continue;
        }
        // (node, next parent position)
        let mut stack: Vec<(usize, usize)> = vec![(start, 0)];
        mark[start] = Mark::Grey;
        while let Some(&mut (node, ref mut pos)) = stack.last_mut() {
            if let Some(p) = parents[node].get(*pos) {
                *pos += 1;
                let p = p.index();
                match mark[p] {
                    Mark::White => {
                        mark[p] = Mark::Grey;
                        stack.push((p, 0));
                    }
                    Mark::Grey => {
                        let from = stack.iter().position(|&(s, _)| s == p).unwrap_or(0);
                        let smallest = stack[from..].iter().map(|&(s, _)| s).min().unwrap_or(p);
                        return Err(Error::Cycle(ids[smallest].clone()));
                    }
                    Mark::Black => {}
                }
            } else {
                mark[node] = Mark::Black;
                order.push(node);
                stack.pop();
            }
        }
    }
    Ok(order)
}

fn count_concepts(n: usize, ancestors: &[Vec<CategoryId>], concepts: &[Concept]) -> Vec<usize> {
    let mut counts = vec![0usize; n];
    // stamp[k] == concept index + 1 once k has been credited for that concept
    let mut stamp = vec![0usize; n];
    for (ci, c) in concepts.iter().enumerate() {
        for k in &c.categories {
            for a in &ancestors[k.index()] {
                if stamp[a.index()] != ci + 1 {
                    stamp[a.index()] = ci + 1;
                    counts[a.index()] += 1;
                }
            }
        }
    }
    counts
}

/// Immutable, validated taxonomy.
#[derive(Debug, Clone)]
pub struct Taxonomy {
    ids: Vec<String>,
    labels: Vec<String>,
    by_id: HashMap<String, CategoryId>,
    parents: Vec<Vec<CategoryId>>,
    children: Vec<Vec<CategoryId>>,
    ancestors: Vec<Vec<CategoryId>>,
    root: CategoryId,
    concepts: Vec<Concept>,
    concept_by_id: HashMap<String, ConceptId>,
    counts: ConceptCountTable,
    ic: Vec<f64>,
    exact: HashMap<String, Vec<ConceptId>>,
    folded: HashMap<String, Vec<ConceptId>>,
}

impl Taxonomy {
    /// Reads a taxonomy file.
    ///
    /// The format is line-oriented UTF-8 with tab-separated fields:
    ///
    /// ```text
    /// C    category_id    label    parent_id[,parent_id...]
    /// P    concept_id     category_id[,category_id...]    label[|label...]
    /// ```
    ///
    /// The root category has an empty parent field. Blank lines and lines
    /// starting with `#` are ignored.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut b = TaxonomyBuilder::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            match fields[0] {
                "C" => {
                    if !(3..=4).contains(&fields.len()) {
                        return Err(Error::parse(line_no, "category record needs 4 fields"));
                    }
                    let id = fields[1].trim();
                    if id.is_empty() {
                        return Err(Error::parse(line_no, "empty category id"));
                    }
                    let parents = split_list(fields.get(3).copied().unwrap_or(""), ',');
                    b.add_category(id, fields[2].trim(), parents)?;
                }
                "P" => {
                    if fields.len() != 4 {
                        return Err(Error::parse(line_no, "concept record needs 4 fields"));
                    }
                    let id = fields[1].trim();
                    if id.is_empty() {
                        return Err(Error::parse(line_no, "empty concept id"));
                    }
                    b.add_concept(id, split_list(fields[2], ','), split_list(fields[3], '|'))?;
                }
                other => {
                    return Err(Error::parse(line_no, format!("unknown record kind `{other}`")));
                }
            }
        }
        b.build()
    }

    /// Serializes back into the file format. Output is sorted by id.
    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        for (i, id) in self.ids.iter().enumerate() {
            let ps: Vec<&str> = self.parents[i].iter().map(|p| self.ids[p.index()].as_str()).collect();
            out.push_str(&format!("C\t{}\t{}\t{}\n", id, self.labels[i], ps.join(",")));
        }
        for c in &self.concepts {
            let cs: Vec<&str> = c.categories.iter().map(|k| self.ids[k.index()].as_str()).collect();
            out.push_str(&format!("P\t{}\t{}\t{}\n", c.id, cs.join(","), c.labels.join("|")));
        }
        out
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn root(&self) -> CategoryId {
        self.root
    }

    pub fn category(&self, id: &str) -> Result<CategoryId> {
        self.by_id
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownCategory(id.to_string()))
    }

    pub fn concept(&self, id: &str) -> Result<ConceptId> {
        self.concept_by_id
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownConcept(id.to_string()))
    }

    pub fn categories(&self) -> impl Iterator<Item = CategoryId> + ExactSizeIterator {
        (0..self.ids.len() as u32).map(CategoryId)
    }

    pub fn concepts(&self) -> impl Iterator<Item = ConceptId> + ExactSizeIterator {
        (0..self.concepts.len() as u32).map(ConceptId)
    }

    pub fn category_name(&self, k: CategoryId) -> &str {
        &self.ids[k.index()]
    }

    pub fn category_label(&self, k: CategoryId) -> &str {
        &self.labels[k.index()]
    }

    pub fn concept_info(&self, p: ConceptId) -> &Concept {
        &self.concepts[p.index()]
    }

    pub fn concept_name(&self, p: ConceptId) -> &str {
        &self.concepts[p.index()].id
    }

    /// Direct super-categories.
    pub fn parents(&self, k: CategoryId) -> &[CategoryId] {
        &self.parents[k.index()]
    }

    /// Direct subcategories.
    pub fn children(&self, k: CategoryId) -> &[CategoryId] {
        &self.children[k.index()]
    }

    /// All ancestors of `k`, including `k` itself, in id order.
    pub fn ancestors(&self, k: CategoryId) -> &[CategoryId] {
        &self.ancestors[k.index()]
    }

    /// True when `k` equals `of` or lies anywhere below it.
    pub fn is_descendant(&self, k: CategoryId, of: CategoryId) -> bool {
        self.ancestors[k.index()].binary_search(&of).is_ok()
    }

    pub fn concept_counts(&self) -> &ConceptCountTable {
        &self.counts
    }

    /// `s_k`: distinct concepts attached to `k` or any of its descendants.
    pub fn concept_count(&self, k: CategoryId) -> usize {
        self.counts.get(k)
    }

    /// `N`: total number of concepts.
    pub fn total_concepts(&self) -> usize {
        self.counts.total
    }

    pub fn information_content(&self, k: CategoryId) -> f64 {
        self.ic[k.index()]
    }

    /// Same quantity evaluated with an explicit logarithm base.
    pub fn information_content_in_base(&self, k: CategoryId, base: f64) -> f64 {
        let s = self.counts.get(k) as f64;
        let n = self.counts.total as f64;
        1.0 - (1.0 + s).log(base) / (1.0 + n).log(base)
    }

    /// Common ancestors of `k1` and `k2` in id order (never empty: the root
    /// is an ancestor of everything).
    pub fn common_ancestors(&self, k1: CategoryId, k2: CategoryId) -> Vec<CategoryId> {
        let a = &self.ancestors[k1.index()];
        let b = &self.ancestors[k2.index()];
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    out.push(a[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        out
    }

    /// Most specific common abstraction: the common ancestor with the
    /// highest IC, smallest id on ties.
    pub fn msca(&self, k1: CategoryId, k2: CategoryId) -> CategoryId {
        let a = &self.ancestors[k1.index()];
        let b = &self.ancestors[k2.index()];
        let (mut i, mut j) = (0, 0);
        let mut best = self.root;
        let mut best_ic = f64::NEG_INFINITY;
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    let ic = self.ic[a[i].index()];
                    if ic > best_ic {
                        best_ic = ic;
                        best = a[i];
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        best
    }

    pub fn sim_lin(&self, k1: CategoryId, k2: CategoryId) -> f64 {
        let denom = self.ic[k1.index()] + self.ic[k2.index()];
        if denom == 0.0 {
            return if k1 == k2 { 1.0 } else { 0.0 };
        }
        let shared = self.ic[self.msca(k1, k2).index()];
        (2.0 * shared / denom).clamp(0.0, 1.0)
    }

    pub fn sim_pirro_seco(&self, k1: CategoryId, k2: CategoryId) -> f64 {
        let shared = self.ic[self.msca(k1, k2).index()];
        ((3.0 * shared - (self.ic[k1.index()] + self.ic[k2.index()]) + 2.0) / 3.0).clamp(0.0, 1.0)
    }

    pub fn similarity(&self, measure: Measure, k1: CategoryId, k2: CategoryId) -> f64 {
        match measure {
            Measure::Lin => self.sim_lin(k1, k2),
            Measure::PirroSeco => self.sim_pirro_seco(k1, k2),
        }
    }

    /// Concept similarity: best category similarity over all category pairs
    /// of the two concepts.
    pub fn sim_page(&self, p1: ConceptId, p2: ConceptId, measure: Measure) -> f64 {
        let c1 = &self.concepts[p1.index()].categories;
        let c2 = &self.concepts[p2.index()].categories;
        let mut best: f64 = 0.0;
        for &k1 in c1 {
            for &k2 in c2 {
                best = best.max(self.similarity(measure, k1, k2));
            }
        }
        best
    }

    /// Concepts whose normalized label equals `label` exactly.
    pub fn lookup_exact(&self, label: &str) -> &[ConceptId] {
        self.exact.get(label).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Concepts whose folded label equals the folded `label`.
    pub fn lookup_folded(&self, label: &str) -> &[ConceptId] {
        self.folded
            .get(&fold_label(label))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Every normalized concept label.
    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.exact.keys().map(String::as_str)
    }

    /// Categories sorted by id, as a set of names.
    pub fn category_names(&self) -> BTreeSet<&str> {
        self.ids.iter().map(String::as_str).collect()
    }
}

fn split_list(field: &str, sep: char) -> Vec<&str> {
    field
        .split(sep)
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect()
}
