//! Raw text to normalized tf-idf vectors.
//!
//! The pipeline is: tokenize on letter boundaries, drop stopwords, apply the
//! lemma dictionary, join multi-word concept labels into phrase terms, drop
//! terms that are too rare or too frequent in the background corpus, and
//! finally weight by tf-idf with L1 normalization.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use crate::error::{Error, Result};
use crate::sparse;
use crate::taxonomy::Taxonomy;

/// Lowercased maximal runs of Unicode letters.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphabetic())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Stopword removal and lemmatization over raw text.
#[derive(Debug, Clone, Default)]
pub struct Preprocessor {
    stopwords: HashSet<String>,
    lemmas: HashMap<String, String>,
    allow: Option<HashSet<String>>,
}

impl Preprocessor {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_stopwords<I: IntoIterator<Item = S>, S: AsRef<str>>(mut self, words: I) -> Self {
        self.stopwords = words.into_iter().map(|w| w.as_ref().to_lowercase()).collect();
        self
    }

    pub fn with_lemmas<I, S, T>(mut self, pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, T)>,
        S: AsRef<str>,
        T: AsRef<str>,
    {
        self.lemmas = pairs
            .into_iter()
            .map(|(s, l)| (s.as_ref().to_lowercase(), l.as_ref().to_lowercase()))
            .collect();
        self
    }

    /// Restricts output to the given lemmas (stand-in for a noun filter).
    pub fn with_allow_list<I: IntoIterator<Item = S>, S: AsRef<str>>(mut self, words: I) -> Self {
        self.allow = Some(words.into_iter().map(|w| w.as_ref().to_lowercase()).collect());
        self
    }

    pub fn tokens(&self, text: &str) -> Vec<String> {
        tokenize(text)
            .into_iter()
            .filter(|t| !self.stopwords.contains(t))
            .map(|t| self.lemmas.get(&t).cloned().unwrap_or(t))
            .filter(|t| !self.stopwords.contains(t))
            .filter(|t| self.allow.as_ref().map_or(true, |a| a.contains(t)))
            .collect()
    }
}

/// One-shot form of [`Preprocessor::tokens`].
pub fn preprocess(text: &str, stopwords: &HashSet<String>, lemmas: &HashMap<String, String>) -> Vec<String> {
    Preprocessor {
        stopwords: stopwords.clone(),
        lemmas: lemmas.clone(),
        allow: None,
    }
    .tokens(text)
}

/// Reads a stopword file: one word per line.
pub fn load_stopwords(path: impl AsRef<Path>) -> Result<HashSet<String>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(|l| l.trim().to_lowercase())
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect())
}

/// Reads a lemma dictionary: `surface<TAB>lemma` per line.
pub fn load_lemmas(path: impl AsRef<Path>) -> Result<HashMap<String, String>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (surface, lemma) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(i + 1, "expected surface<TAB>lemma"))?;
        out.insert(surface.trim().to_lowercase(), lemma.trim().to_lowercase());
    }
    Ok(out)
}

/// Multi-word concept labels, tokenized like document text.
#[derive(Debug, Clone, Default)]
pub struct PhraseIndex {
    phrases: HashSet<String>,
    max_len: usize,
}

impl PhraseIndex {
    pub fn new<I: IntoIterator<Item = S>, S: AsRef<str>>(labels: I) -> Self {
        let mut idx = PhraseIndex::default();
        for l in labels {
            let toks = tokenize(l.as_ref());
            if toks.len() >= 2 {
                idx.max_len = idx.max_len.max(toks.len());
                idx.phrases.insert(toks.join(" "));
            }
        }
        idx
    }

    pub fn from_taxonomy(tax: &Taxonomy) -> Self {
        Self::new(tax.labels())
    }

    pub fn len(&self) -> usize {
        self.phrases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phrases.is_empty()
    }

    pub fn contains(&self, phrase: &str) -> bool {
        self.phrases.contains(phrase)
    }
}

/// Greedy left-to-right longest match of multi-word labels.
pub fn extract_phrases(tokens: &[String], index: &PhraseIndex) -> Vec<String> {
    let mut out = Vec::with_capacity(tokens.len());
    let mut i = 0;
    while i < tokens.len() {
        let longest = (2..=index.max_len.min(tokens.len() - i))
            .rev()
            .find(|&len| index.phrases.contains(&tokens[i..i + len].join(" ")));
        match longest {
            Some(len) => {
                out.push(tokens[i..i + len].join(" "));
                i += len;
            }
            None => {
                out.push(tokens[i].clone());
                i += 1;
            }
        }
    }
    out
}

/// Document frequencies over a background corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct BackgroundStats {
    doc_count: u32,
    doc_freq: HashMap<String, u32>,
}

impl BackgroundStats {
    /// Builds stats from documents given as term sequences.
    pub fn from_documents<I, D, S>(docs: I) -> Result<Self>
    where
        I: IntoIterator<Item = D>,
        D: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut doc_count = 0u32;
        let mut doc_freq: HashMap<String, u32> = HashMap::new();
        for d in docs {
            doc_count += 1;
            let uniq: HashSet<String> = d.into_iter().map(|t| t.as_ref().to_string()).collect();
            for t in uniq {
                *doc_freq.entry(t).or_default() += 1;
            }
        }
        if doc_count == 0 {
            return Err(Error::EmptyInput);
        }
        Ok(BackgroundStats { doc_count, doc_freq })
    }

    pub fn new(doc_count: u32, doc_freq: HashMap<String, u32>) -> Result<Self> {
        if doc_count == 0 {
            return Err(Error::EmptyInput);
        }
        if let Some((t, df)) = doc_freq.iter().find(|(_, &df)| df == 0 || df > doc_count) {
            return Err(Error::InvalidArgument(format!(
                "document frequency {df} of `{t}` outside [1, {doc_count}]"
            )));
        }
        Ok(BackgroundStats { doc_count, doc_freq })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Parses `#docs=<n>` followed by `term<TAB>df` lines.
    pub fn parse(text: &str) -> Result<Self> {
        let mut doc_count = None;
        let mut doc_freq = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("#docs=") {
                let n = rest
                    .trim()
                    .parse::<u32>()
                    .map_err(|_| Error::parse(i + 1, "bad #docs header"))?;
                doc_count = Some(n);
                continue;
            }
            if line.starts_with('#') {
                continue;
            }
            let (term, df) = line
                .rsplit_once('\t')
                .ok_or_else(|| Error::parse(i + 1, "expected term<TAB>df"))?;
            let df = df
                .trim()
                .parse::<u32>()
                .map_err(|_| Error::parse(i + 1, "bad document frequency"))?;
            if doc_freq.insert(term.to_string(), df).is_some() {
                return Err(Error::DuplicateId {
                    kind: "term",
                    id: term.to_string(),
                });
            }
        }
        let doc_count = doc_count.ok_or_else(|| Error::parse(1, "missing #docs=<n> header"))?;
        Self::new(doc_count, doc_freq)
    }

    /// Serializes, terms in lexicographic order.
    pub fn to_file_string(&self) -> String {
        let mut out = format!("#docs={}\n", self.doc_count);
        let sorted: BTreeMap<&String, &u32> = self.doc_freq.iter().collect();
        for (t, df) in sorted {
            out.push_str(&format!("{t}\t{df}\n"));
        }
        out
    }

    pub fn doc_count(&self) -> u32 {
        self.doc_count
    }

    /// Raw document frequency; 0 for terms never seen.
    pub fn doc_freq(&self, term: &str) -> u32 {
        self.doc_freq.get(term).copied().unwrap_or(0)
    }

    pub fn vocabulary_len(&self) -> usize {
        self.doc_freq.len()
    }

    /// `log(doc_count / df)`, with unseen terms treated as df = 1.
    pub fn idf(&self, term: &str) -> f64 {
        let df = self.doc_freq(term).max(1);
        (self.doc_count as f64 / df as f64).ln()
    }
}

/// Background-frequency cutoffs.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrequencyCutoffs {
    /// Terms with `df < min_df` are rare.
    pub min_df: u32,
    /// Terms with `df / doc_count > max_df_ratio` are frequent.
    pub max_df_ratio: f64,
}

impl Default for FrequencyCutoffs {
    fn default() -> Self {
        FrequencyCutoffs {
            min_df: 2,
            max_df_ratio: 0.5,
        }
    }
}

impl FrequencyCutoffs {
    /// Terms absent from the background pass through untouched.
    pub fn keeps(&self, term: &str, stats: &BackgroundStats) -> bool {
        let df = stats.doc_freq(term);
        if df == 0 {
            return true;
        }
        df >= self.min_df && (df as f64) / (stats.doc_count as f64) <= self.max_df_ratio
    }

    pub fn apply(&self, terms: Vec<String>, stats: &BackgroundStats) -> Vec<String> {
        terms.into_iter().filter(|t| self.keeps(t, stats)).collect()
    }
}

/// Sparse tf-idf vector with L1 norm 1 and strictly positive weights.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TermVector {
    weights: BTreeMap<String, f64>,
}

impl TermVector {
    /// Builds a vector from arbitrary positive weights, normalizing to L1 = 1.
    pub fn from_weights<I: IntoIterator<Item = (S, f64)>, S: Into<String>>(entries: I) -> Result<Self> {
        let mut weights: BTreeMap<String, f64> = BTreeMap::new();
        for (t, w) in entries {
            if w > 0.0 {
                *weights.entry(t.into()).or_default() += w;
            }
        }
        if !sparse::normalize_l1(&mut weights) {
            return Err(Error::EmptyVector);
        }
        Ok(TermVector { weights })
    }

    pub fn weights(&self) -> &BTreeMap<String, f64> {
        &self.weights
    }

    pub fn get(&self, term: &str) -> f64 {
        self.weights.get(term).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total(&self) -> f64 {
        sparse::l1(&self.weights)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.weights.iter().map(|(t, w)| (t.as_str(), *w))
    }
}

/// `tf(t) * log(doc_count / df(t))`, L1-normalized; zero-weight terms dropped.
pub fn tfidf_weights<S: AsRef<str>>(terms: &[S], stats: &BackgroundStats) -> Result<TermVector> {
    if terms.is_empty() {
        return Err(Error::EmptyVector);
    }
    let mut tf: BTreeMap<&str, u32> = BTreeMap::new();
    for t in terms {
        *tf.entry(t.as_ref()).or_default() += 1;
    }
    TermVector::from_weights(tf.into_iter().map(|(t, n)| (t, n as f64 * stats.idf(t))))
}

/// The `n` heaviest terms (ties by term order), renormalized.
pub fn top_n_terms(v: &TermVector, n: usize) -> TermVector {
    if v.len() <= n {
        return v.clone();
    }
    let mut ranked = sparse::ranked(&v.weights);
    ranked.truncate(n.max(1));
    let mut weights: BTreeMap<String, f64> = ranked.into_iter().collect();
    sparse::normalize_l1(&mut weights);
    TermVector { weights }
}

/// Preprocessing, phrase detection and frequency filtering bundled together.
#[derive(Debug, Clone)]
pub struct TextPipeline {
    pub preprocessor: Preprocessor,
    pub phrases: PhraseIndex,
    pub stats: BackgroundStats,
    pub cutoffs: FrequencyCutoffs,
}

impl TextPipeline {
    pub fn new(preprocessor: Preprocessor, phrases: PhraseIndex, stats: BackgroundStats) -> Self {
        TextPipeline {
            preprocessor,
            phrases,
            stats,
            cutoffs: FrequencyCutoffs::default(),
        }
    }

    /// Terms before frequency filtering: what background stats are built from.
    pub fn raw_terms(preprocessor: &Preprocessor, phrases: &PhraseIndex, text: &str) -> Vec<String> {
        extract_phrases(&preprocessor.tokens(text), phrases)
    }

    pub fn terms(&self, text: &str) -> Vec<String> {
        let raw = Self::raw_terms(&self.preprocessor, &self.phrases, text);
        self.cutoffs.apply(raw, &self.stats)
    }

    pub fn vector(&self, text: &str) -> Result<TermVector> {
        tfidf_weights(&self.terms(text), &self.stats)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn strings(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn preprocess_examples() {
        let stop: HashSet<String> = ["the".to_string()].into();
        let lemmas: HashMap<String, String> = [("cats".to_string(), "cat".to_string())].into();
        assert_eq!(preprocess("The cats sat", &stop, &lemmas), strings(&["cat", "sat"]));
        assert!(preprocess("", &stop, &lemmas).is_empty());
        assert!(preprocess("the THE The", &stop, &lemmas).is_empty());
    }

    #[test]
    fn tokenizes_on_letter_boundaries() {
        assert_eq!(tokenize("Zażółć, gęślą-jaźń 42x"), strings(&["zażółć", "gęślą", "jaźń", "x"]));
    }

    #[test]
    fn allow_list_filters() {
        let p = Preprocessor::new().with_allow_list(["cat"]);
        assert_eq!(p.tokens("cat sat cat"), strings(&["cat", "cat"]));
    }

    #[test]
    fn phrase_examples() {
        let idx = PhraseIndex::new(["black hole"]);
        assert_eq!(extract_phrases(&strings(&["black", "hole", "mass"]), &idx), strings(&["black hole", "mass"]));
        assert_eq!(extract_phrases(&strings(&["mass", "black"]), &idx), strings(&["mass", "black"]));
        let idx = PhraseIndex::new(["a b", "b c"]);
        assert_eq!(extract_phrases(&strings(&["a", "b", "c"]), &idx), strings(&["a b", "c"]));
    }

    #[test]
    fn longest_match_wins() {
        let idx = PhraseIndex::new(["new york", "new york city"]);
        let toks = strings(&["new", "york", "city", "new", "york"]);
        assert_eq!(extract_phrases(&toks, &idx), strings(&["new york city", "new york"]));
    }

    #[test]
    fn tfidf_examples() {
        let stats = BackgroundStats::new(10, [("x".to_string(), 10), ("y".to_string(), 1)].into()).unwrap();
        let v = tfidf_weights(&["x", "x", "y"], &stats).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v.get("y"), 1.0);
        let v = tfidf_weights(&["z"], &stats).unwrap();
        assert_eq!(v.get("z"), 1.0);
        assert!(matches!(tfidf_weights::<&str>(&[], &stats), Err(Error::EmptyVector)));
        // only zero-idf terms left
        assert!(matches!(tfidf_weights(&["x"], &stats), Err(Error::EmptyVector)));
    }

    #[test]
    fn top_n_examples() {
        let v = TermVector::from_weights([("a", 0.5), ("b", 0.3), ("c", 0.2)]).unwrap();
        let t = top_n_terms(&v, 2);
        assert!((t.get("a") - 0.625).abs() < 1e-12);
        assert!((t.get("b") - 0.375).abs() < 1e-12);
        assert_eq!(top_n_terms(&v, 3), v);
        assert_eq!(top_n_terms(&v, 10), v);
        let tie = TermVector::from_weights([("b", 0.5), ("a", 0.5)]).unwrap();
        let t = top_n_terms(&tie, 1);
        assert_eq!(t.get("a"), 1.0);
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn cutoffs() {
        let stats = BackgroundStats::new(
            10,
            [("rare".to_string(), 1), ("ok".to_string(), 3), ("common".to_string(), 6)].into(),
        )
        .unwrap();
        let c = FrequencyCutoffs::default();
        let kept = c.apply(strings(&["rare", "ok", "common", "novel"]), &stats);
        assert_eq!(kept, strings(&["ok", "novel"]));
    }

    #[test]
    fn background_file_round_trip() {
        let stats = BackgroundStats::from_documents([vec!["a", "b"], vec!["b", "black hole"]]).unwrap();
        assert_eq!(stats.doc_freq("b"), 2);
        let text = stats.to_file_string();
        assert!(text.starts_with("#docs=2\n"));
        assert_eq!(BackgroundStats::parse(&text).unwrap(), stats);
    }

    #[test]
    fn background_validation() {
        assert!(BackgroundStats::parse("a\t1\n").is_err());
        assert!(BackgroundStats::parse("#docs=2\na\t3\n").is_err());
        assert!(BackgroundStats::parse("#docs=2\na\tx\n").is_err());
    }

    proptest! {
        #[test]
        fn tfidf_sums_to_one(terms in proptest::collection::vec("[a-e]{1,2}", 1..30), dfs in proptest::collection::vec(1u32..20, 30)) {
            let vocab: HashMap<String, u32> = terms.iter().zip(&dfs).map(|(t, d)| (t.clone(), *d)).collect();
            let stats = BackgroundStats::new(40, vocab).unwrap();
            if let Ok(v) = tfidf_weights(&terms, &stats) {
                prop_assert!((v.total() - 1.0).abs() < 1e-9);
                prop_assert!(v.iter().all(|(_, w)| w > 0.0));
            }
        }

        #[test]
        fn preprocess_is_idempotent(
            text in "[a-zA-Z ,.ąę]{0,80}",
            stop in proptest::collection::hash_set("[a-z]{1,2}", 0..8),
            lemma_keys in proptest::collection::vec("[a-p]{1,3}", 0..8),
        ) {
            // lemma targets are fixed points of the map
            let lemmas: HashMap<String, String> = lemma_keys
                .into_iter()
                .map(|k| { let v = format!("{k}z"); (k, v) })
                .collect();
            let stop: HashSet<String> = stop;
            let once = preprocess(&text, &stop, &lemmas);
            let twice = preprocess(&once.join(" "), &stop, &lemmas);
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn top_n_shrinks_and_keeps_order(ws in proptest::collection::btree_map("[a-h]", 0.01f64..1.0, 1..8), n in 1usize..10) {
            let v = TermVector::from_weights(ws.clone()).unwrap();
            let t = top_n_terms(&v, n);
            prop_assert!(t.len() <= v.len());
            prop_assert!(t.len() == n.min(v.len()));
            let kept: Vec<(&str, f64)> = t.iter().collect();
            for a in &kept {
                for b in &kept {
                    if v.get(a.0) > v.get(b.0) {
                        prop_assert!(a.1 >= b.1);
                    }
                }
            }
        }
    }
}
