//! Model 1: the Boolean keyword query `FSW AND (HIV OR Violence)`.
//!
//! Matching runs on unstemmed lowercase tokens (single-word terms) and on the
//! lowercased running text (phrases), since prefix terms such as `prostitut*`
//! already encode their own truncation.

use std::fmt;
use std::path::Path;

use serde::Serialize;

use crate::corpus::{Corpus, Document, Label};
use crate::error::{Error, Result};
use crate::eval::Confusion;
use crate::textprep::tokenize;

const BUNDLED: &str = include_str!("../data/keywords.conf");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TermKind {
    Exact,
    Prefix,
}

/// A keyword: one or more words; for a prefix term the last word is a stem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Term {
    pub kind: TermKind,
    pub words: Vec<String>,
}

impl Term {
    pub fn parse(s: &str) -> std::result::Result<Term, String> {
        let s = s.trim();
        let quoted = s.len() >= 2 && s.starts_with('"') && s.ends_with('"');
        let body = if quoted { &s[1..s.len() - 1] } else { s };
        let (body, kind) = match body.trim().strip_suffix('*') {
            Some(b) => (b, TermKind::Prefix),
            None => (body, TermKind::Exact),
        };
        let words: Vec<String> = body.split_whitespace().map(str::to_lowercase).collect();
        if words.is_empty() {
            return Err(format!("empty term {s:?}"));
        }
        if words.len() > 1 && !quoted {
            return Err(format!("multi-word term {s:?} must be quoted"));
        }
        if !words
            .iter()
            .all(|w| w.bytes().all(|b| b.is_ascii_lowercase()))
        {
            return Err(format!("term {s:?} may only contain letters"));
        }
        Ok(Term { kind, words })
    }

    pub fn is_phrase(&self) -> bool {
        self.words.len() > 1
    }

    fn matches(&self, tokens: &[String], text: &str) -> bool {
        if self.is_phrase() {
            return phrase_in(text, &self.words.join(" "), self.kind == TermKind::Prefix);
        }
        let w = self.words[0].as_str();
        match self.kind {
            TermKind::Exact => tokens.iter().any(|t| t == w),
            TermKind::Prefix => tokens.iter().any(|t| t.starts_with(w)),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let star = if self.kind == TermKind::Prefix {
            "*"
        } else {
            ""
        };
        if self.is_phrase() {
            write!(f, "\"{}{star}\"", self.words.join(" "))
        } else {
            write!(f, "{}{star}", self.words[0])
        }
    }
}

/// Whether `phrase` occurs in whitespace-normalized `text` starting at a word
/// boundary, and (unless `open_end`) ending at one.
fn phrase_in(text: &str, phrase: &str, open_end: bool) -> bool {
    let bytes = text.as_bytes();
    let mut from = 0;
    while let Some(pos) = text[from..].find(phrase) {
        let start = from + pos;
        let end = start + phrase.len();
        let left_ok = start == 0 || !bytes[start - 1].is_ascii_alphabetic();
        let right_ok = open_end || end == bytes.len() || !bytes[end].is_ascii_alphabetic();
        if left_ok && right_ok {
            return true;
        }
        from = start + 1;
        while !text.is_char_boundary(from) {
            from += 1;
        }
    }
    false
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CategoryName {
    Fsw,
    Hiv,
    Violence,
}

impl CategoryName {
    fn section(self) -> &'static str {
        match self {
            CategoryName::Fsw => "fsw",
            CategoryName::Hiv => "hiv",
            CategoryName::Violence => "violence",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeywordCategory {
    pub name: CategoryName,
    pub terms: Vec<Term>,
}

/// The lowercase, whitespace-normalized running text that phrases match on.
pub fn normalize_text(text: &str) -> String {
    text.to_lowercase()
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

/// Does any term of `category` occur? `tokens` are the unstemmed tokens of
/// the document and `text` its output of [`normalize_text`].
pub fn match_category(tokens: &[String], text: &str, category: &KeywordCategory) -> bool {
    category.terms.iter().any(|t| t.matches(tokens, text))
}

/// The terms of `category` that occur.
pub fn matched_terms<'a>(
    tokens: &[String],
    text: &str,
    category: &'a KeywordCategory,
) -> Vec<&'a Term> {
    category
        .terms
        .iter()
        .filter(|t| t.matches(tokens, text))
        .collect()
}

/// `FSW AND (HIV OR Violence)` with configurable term lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BooleanQuery {
    pub fsw: KeywordCategory,
    pub hiv: KeywordCategory,
    pub violence: KeywordCategory,
}

impl BooleanQuery {
    /// The bundled keyword lists.
    pub fn default_query() -> Self {
        Self::parse(BUNDLED).expect("bundled keyword config is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Parses a keyword file with `[fsw]`, `[hiv]` and `[violence]` sections.
    pub fn parse(text: &str) -> Result<Self> {
        let mut sections: [Option<Vec<Term>>; 3] = [None, None, None];
        let mut current: Option<usize> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |m: String| Error::Config(format!("keyword config line {}: {m}", i + 1));
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let idx = match name.trim().to_ascii_lowercase().as_str() {
                    "fsw" => 0,
                    "hiv" => 1,
                    "violence" => 2,
                    other => return Err(err(format!("unknown section [{other}]"))),
                };
                if sections[idx].is_some() {
                    return Err(err(format!("section [{name}] repeated")));
                }
                sections[idx] = Some(Vec::new());
                current = Some(idx);
                continue;
            }
            let idx = current.ok_or_else(|| err("term before any section header".into()))?;
            let term = Term::parse(line).map_err(err)?;
            sections[idx].as_mut().expect("section opened").push(term);
        }
        let names = [CategoryName::Fsw, CategoryName::Hiv, CategoryName::Violence];
        let mut cats = Vec::with_capacity(3);
        for (terms, name) in sections.into_iter().zip(names) {
            let terms = terms.ok_or_else(|| {
                Error::Config(format!("keyword config lacks [{}]", name.section()))
            })?;
            if terms.is_empty() {
                return Err(Error::Config(format!(
                    "keyword section [{}] is empty",
                    name.section()
                )));
            }
            cats.push(KeywordCategory { name, terms });
        }
        let violence = cats.pop().expect("three sections");
        let hiv = cats.pop().expect("three sections");
        let fsw = cats.pop().expect("three sections");
        Ok(BooleanQuery { fsw, hiv, violence })
    }

    pub fn categories(&self) -> [&KeywordCategory; 3] {
        [&self.fsw, &self.hiv, &self.violence]
    }

    pub fn explain(&self, doc: &Document) -> QueryMatch {
        let raw = doc.text();
        let tokens = tokenize(&raw);
        let text = normalize_text(&raw);
        let terms = |c: &KeywordCategory| -> Vec<String> {
            matched_terms(&tokens, &text, c)
                .into_iter()
                .map(ToString::to_string)
                .collect()
        };
        let (fsw, hiv, violence) = (terms(&self.fsw), terms(&self.hiv), terms(&self.violence));
        let relevant = !fsw.is_empty() && (!hiv.is_empty() || !violence.is_empty());
        QueryMatch {
            fsw,
            hiv,
            violence,
            label: if relevant {
                Label::Relevant
            } else {
                Label::Irrelevant
            },
        }
    }
}

/// Which terms fired in each category, and the resulting decision.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QueryMatch {
    pub fsw: Vec<String>,
    pub hiv: Vec<String>,
    pub violence: Vec<String>,
    pub label: Label,
}

pub fn classify_boolean(doc: &Document, query: &BooleanQuery) -> Label {
    let raw = doc.text();
    let tokens = tokenize(&raw);
    let text = normalize_text(&raw);
    let hit = |c: &KeywordCategory| match_category(&tokens, &text, c);
    if hit(&query.fsw) && (hit(&query.hiv) || hit(&query.violence)) {
        Label::Relevant
    } else {
        Label::Irrelevant
    }
}

/// Single operating point of the Boolean classifier on a labeled corpus.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BooleanPoint {
    pub confusion: Confusion,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub fpr: Option<f64>,
    pub tpr: Option<f64>,
    pub f1: Option<f64>,
    pub notes: Vec<String>,
}

impl BooleanPoint {
    pub fn from_confusion(confusion: Confusion) -> Self {
        let mut notes = Vec::new();
        if confusion.tp + confusion.fn_ == 0 {
            notes.push("no relevant documents: recall is undefined".to_string());
        }
        if confusion.tp + confusion.fp == 0 {
            notes.push("query matched no documents: precision is undefined".to_string());
        }
        BooleanPoint {
            precision: confusion.precision(),
            recall: confusion.recall(),
            fpr: confusion.fpr(),
            tpr: confusion.recall(),
            f1: confusion.f1(),
            confusion,
            notes,
        }
    }
}

pub fn boolean_point(corpus: &Corpus, query: &BooleanQuery) -> Result<BooleanPoint> {
    corpus.require_labeled()?;
    let mut confusion = Confusion::default();
    for doc in corpus.documents() {
        let truth = doc.label.expect("checked labeled");
        confusion.add(truth, classify_boolean(doc, query));
    }
    Ok(BooleanPoint::from_confusion(confusion))
}
