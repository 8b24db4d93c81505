//! Text normalization: whitespace tokenization, lemma lookup, Porter stemming.

mod lemma;
pub mod porter;

use std::collections::HashMap;

pub use lemma::LemmaTable;

use crate::corpus::Document;

/// Normalized tokens of one document. Tokens are non-empty and consist of
/// lowercase ASCII letters only.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenSequence {
    pub doc_id: String,
    pub tokens: Vec<String>,
}

impl TokenSequence {
    pub fn new(doc_id: impl Into<String>, tokens: Vec<String>) -> Self {
        TokenSequence {
            doc_id: doc_id.into(),
            tokens,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Splits on whitespace, lowercases, and keeps only ASCII letters of each
/// piece. Pieces left empty (numbers, punctuation, other scripts) are dropped.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .filter_map(|piece| {
            let token: String = piece
                .chars()
                .filter(char::is_ascii_alphabetic)
                .map(|c| c.to_ascii_lowercase())
                .collect();
            (!token.is_empty()).then_some(token)
        })
        .collect()
}

pub fn lemmatize(tokens: &[String], table: &LemmaTable) -> Vec<String> {
    tokens.iter().map(|t| table.lookup(t).to_string()).collect()
}

pub fn stem(tokens: &[String]) -> Vec<String> {
    tokens.iter().map(|t| porter::stem(t)).collect()
}

/// `stem(lemmatize(tokenize(title + " " + abstract)))`.
pub fn preprocess(doc: &Document, table: &LemmaTable) -> TokenSequence {
    let tokens = stem(&lemmatize(&tokenize(&doc.text()), table));
    TokenSequence::new(doc.id.clone(), tokens)
}

/// Preprocesses many documents, memoizing the lemma+stem result per surface
/// token. Output is identical to calling [`preprocess`] on each document.
#[derive(Debug)]
pub struct Normalizer<'a> {
    table: &'a LemmaTable,
    cache: HashMap<String, String>,
}

impl<'a> Normalizer<'a> {
    pub fn new(table: &'a LemmaTable) -> Self {
        Normalizer {
            table,
            cache: HashMap::new(),
        }
    }

    pub fn normalize_token(&mut self, token: &str) -> String {
        if let Some(s) = self.cache.get(token) {
            return s.clone();
        }
        let s = porter::stem(self.table.lookup(token));
        self.cache.insert(token.to_string(), s.clone());
        s
    }

    pub fn process(&mut self, doc: &Document) -> TokenSequence {
        let tokens = tokenize(&doc.text())
            .iter()
            .map(|t| self.normalize_token(t))
            .collect();
        TokenSequence::new(doc.id.clone(), tokens)
    }
}

pub fn preprocess_all(docs: &[Document], table: &LemmaTable) -> Vec<TokenSequence> {
    let mut n = Normalizer::new(table);
    docs.iter().map(|d| n.process(d)).collect()
}
