//! Plain-text record file shared by all persisted models.
//!
//! ```text
//! #model=<kind>
//! #<param>=<value>
//! <tag>\t<label>\t<key>:<weight>\t<key>:<weight>...
//! ```
//!
//! Weights are written with the shortest round-trip float representation,
//! so a save/load cycle reproduces every value bit for bit.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ModelRow {
    pub tag: String,
    pub label: String,
    pub entries: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ModelFile {
    pub kind: String,
    pub params: BTreeMap<String, String>,
    pub rows: Vec<ModelRow>,
}

impl ModelFile {
    pub fn new(kind: &str) -> Self {
        ModelFile {
            kind: kind.to_string(),
            ..Default::default()
        }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    pub fn push<I, K>(&mut self, tag: &str, label: &str, entries: I)
    where
        I: IntoIterator<Item = (K, f64)>,
        K: Into<String>,
    {
        self.rows.push(ModelRow {
            tag: tag.to_string(),
            label: label.to_string(),
            entries: entries.into_iter().map(|(k, w)| (k.into(), w)).collect(),
        });
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T> {
        let raw = self
            .params
            .get(key)
            .ok_or_else(|| Error::Model(format!("missing parameter `{key}`")))?;
        raw.parse()
            .map_err(|_| Error::Model(format!("bad value `{raw}` for `{key}`")))
    }

    pub fn get_opt<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.params.get(key) {
            None => Ok(None),
            Some(_) => self.get(key).map(Some),
        }
    }

    pub fn expect_kind(&self, kind: &str) -> Result<()> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(Error::Model(format!("expected `{kind}` model, found `{}`", self.kind)))
        }
    }

    pub fn rows_tagged<'a>(&'a self, tag: &'a str) -> impl Iterator<Item = &'a ModelRow> + 'a {
        self.rows.iter().filter(move |r| r.tag == tag)
    }

    pub fn to_file_string(&self) -> String {
        let mut out = format!("#model={}\n", self.kind);
        for (k, v) in &self.params {
            let _ = writeln!(out, "#{k}={v}");
        }
        for r in &self.rows {
            out.push_str(&r.tag);
            out.push('\t');
            out.push_str(&r.label);
            for (k, w) in &r.entries {
                let _ = write!(out, "\t{k}:{w}");
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let kind = match lines.next() {
            Some((_, l)) => l
                .strip_prefix("#model=")
                .ok_or_else(|| Error::Model("first line must be #model=<kind>".into()))?
                .trim()
                .to_string(),
            None => return Err(Error::Model("empty model file".into())),
        };
        let mut file = ModelFile::new(&kind);
        for (i, line) in lines {
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let (k, v) = rest
                    .split_once('=')
                    .ok_or_else(|| Error::parse(i + 1, "header must be #key=value"))?;
                file.params.insert(k.to_string(), v.to_string());
                continue;
            }
            let mut fields = line.split('\t');
            let tag = fields.next().unwrap_or_default().to_string();
            let label = fields
                .next()
                .ok_or_else(|| Error::parse(i + 1, "row needs a label"))?
                .to_string();
            let mut entries = Vec::new();
            for f in fields {
                let (k, w) = f
                    .rsplit_once(':')
                    .ok_or_else(|| Error::parse(i + 1, format!("bad entry `{f}`")))?;
                let w: f64 = w
                    .parse()
                    .map_err(|_| Error::parse(i + 1, format!("bad weight `{w}`")))?;
                entries.push((k.to_string(), w));
            }
            file.rows.push(ModelRow { tag, label, entries });
        }
        Ok(file)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_file_string()).map_err(|e| Error::io(path, e))
    }
}
