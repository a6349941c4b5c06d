//! Line-delimited JSON corpora: one `{id, text, label?, categories?}` object
//! per line.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Document {
    pub id: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// Taxonomy category ids annotating the document.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub categories: Vec<String>,
}

impl Document {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        Document {
            id: id.into(),
            text: text.into(),
            label: None,
            categories: Vec::new(),
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn with_categories<I: IntoIterator<Item = S>, S: Into<String>>(mut self, cats: I) -> Self {
        self.categories = cats.into_iter().map(Into::into).collect();
        self
    }

    /// Unicode scalar count of the raw text.
    pub fn char_count(&self) -> usize {
        self.text.chars().count()
    }
}

pub fn parse_corpus(text: &str) -> Result<Vec<Document>> {
    let mut docs = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let doc: Document = serde_json::from_str(line).map_err(|e| Error::parse(i + 1, e.to_string()))?;
        if !seen.insert(doc.id.clone()) {
            return Err(Error::DuplicateId {
                kind: "document",
                id: doc.id,
            });
        }
        docs.push(doc);
    }
    Ok(docs)
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<Document>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_corpus(&text).map_err(|e| e.context(path.display().to_string()))
}

pub fn corpus_to_string(docs: &[Document]) -> String {
    let mut out = String::new();
    for d in docs {
        out.push_str(&serde_json::to_string(d).expect("documents serialize"));
        out.push('\n');
    }
    out
}

pub fn save_corpus(path: impl AsRef<Path>, docs: &[Document]) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, corpus_to_string(docs)).map_err(|e| Error::io(path, e))
}

/// Documents that carry a label, as `(label, text)` pairs.
pub fn labeled(docs: &[Document]) -> impl Iterator<Item = (&str, &str)> {
    docs.iter()
        .filter_map(|d| d.label.as_deref().map(|l| (l, d.text.as_str())))
}
