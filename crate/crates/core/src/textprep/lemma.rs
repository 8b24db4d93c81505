use std::collections::HashMap;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

const BUNDLED: &str = include_str!("../../data/lemmas_en.tsv");

/// Lookup table from inflected form to lemma.
///
/// File format: one `form<TAB>lemma` pair per line, lowercase; blank lines and
/// lines starting with `#` are ignored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LemmaTable {
    entries: HashMap<String, String>,
    hash: String,
}

impl LemmaTable {
    /// The bundled English table.
    pub fn english() -> Self {
        Self::parse(BUNDLED).expect("bundled lemma table is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split('\t');
            let (Some(form), Some(lemma), None) = (cols.next(), cols.next(), cols.next()) else {
                return Err(Error::Config(format!(
                    "lemma table line {}: expected form<TAB>lemma",
                    i + 1
                )));
            };
            let (form, lemma) = (form.trim(), lemma.trim());
            if form.is_empty() || lemma.is_empty() {
                return Err(Error::Config(format!(
                    "lemma table line {}: empty form or lemma",
                    i + 1
                )));
            }
            entries.insert(form.to_lowercase(), lemma.to_lowercase());
        }
        let hash = content_hash(&entries);
        Ok(LemmaTable { entries, hash })
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Self> {
        let mut text = String::new();
        for (form, lemma) in pairs {
            text.push_str(form);
            text.push('\t');
            text.push_str(lemma);
            text.push('\n');
        }
        Self::parse(&text)
    }

    pub fn lookup<'a>(&'a self, form: &'a str) -> &'a str {
        self.entries.get(form).map(String::as_str).unwrap_or(form)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// SHA-256 over the sorted entries; independent of file layout and comments.
    pub fn content_hash(&self) -> &str {
        &self.hash
    }
}

fn content_hash(entries: &HashMap<String, String>) -> String {
    let mut pairs: Vec<_> = entries.iter().collect();
    pairs.sort();
    let mut h = Sha256::new();
    for (form, lemma) in pairs {
        h.update(form.as_bytes());
        h.update(b"\t");
        h.update(lemma.as_bytes());
        h.update(b"\n");
    }
    hex::encode(h.finalize())
}
