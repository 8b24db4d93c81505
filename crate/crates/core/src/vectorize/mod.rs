//! Vocabulary, document-term counts, TF-IDF and the document-cluster matrix.
//!
//! TF-IDF uses raw term counts and `idf = ln(N / df)`, so a token that occurs
//! in every document carries no weight.

mod cluster;
mod sparse;

use std::collections::HashMap;

pub use cluster::{
    cluster_counts, cluster_matrix, ClusterMatrix, ClusterSet, ClusterSpec, CLUSTER_NAMES,
};
pub use sparse::{CsrMatrix, Entry};

use crate::error::{Error, Result};
use crate::provenance;
use crate::textprep::TokenSequence;

/// Token index with per-token document frequencies. Columns are assigned in
/// lexicographic token order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, u32>,
    df: Vec<u32>,
    n_docs: usize,
}

impl Vocabulary {
    /// Rebuilds a vocabulary from its sorted token list and document
    /// frequencies (as stored in a model file).
    pub fn from_parts(tokens: Vec<String>, df: Vec<u32>, n_docs: usize) -> Result<Self> {
        if tokens.len() != df.len() {
            return Err(Error::InvalidArgument("token and df lengths differ".into()));
        }
        if tokens.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "vocabulary tokens must be strictly sorted".into(),
            ));
        }
        let index = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        Ok(Vocabulary {
            tokens,
            index,
            df,
            n_docs,
        })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn column(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    pub fn token(&self, column: u32) -> &str {
        &self.tokens[column as usize]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn df(&self, column: u32) -> u32 {
        self.df[column as usize]
    }

    pub fn dfs(&self) -> &[u32] {
        &self.df
    }

    /// Number of documents the vocabulary was built from.
    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn content_hash(&self) -> String {
        provenance::sha256_lines(self.tokens.iter().map(String::as_str))
    }
}

/// Builds the vocabulary of all tokens occurring in at least `min_df`
/// documents.
pub fn build_vocab(seqs: &[TokenSequence], min_df: u32) -> Result<Vocabulary> {
    if seqs.iter().all(TokenSequence::is_empty) {
        return Err(Error::Empty("every token sequence is empty".into()));
    }
    let mut df: HashMap<&str, u32> = HashMap::new();
    let mut seen: Vec<&str> = Vec::new();
    for seq in seqs {
        seen.clear();
        seen.extend(seq.tokens.iter().map(String::as_str));
        seen.sort_unstable();
        seen.dedup();
        for t in &seen {
            *df.entry(t).or_insert(0) += 1;
        }
    }
    let mut kept: Vec<(&str, u32)> = df
        .into_iter()
        .filter(|&(_, d)| d >= min_df.max(1))
        .collect();
    kept.sort_unstable();
    let (tokens, df): (Vec<String>, Vec<u32>) =
        kept.into_iter().map(|(t, d)| (t.to_string(), d)).unzip();
    Vocabulary::from_parts(tokens, df, seqs.len())
}

/// Raw term counts, one row per document in input order.
pub type DocTermMatrix = CsrMatrix<u32>;

/// Counts in-vocabulary tokens; out-of-vocabulary tokens are skipped.
pub fn count_matrix(seqs: &[TokenSequence], vocab: &Vocabulary) -> DocTermMatrix {
    let mut m = CsrMatrix::empty(vocab.len());
    let mut cols: Vec<u32> = Vec::new();
    for seq in seqs {
        cols.clear();
        cols.extend(seq.tokens.iter().filter_map(|t| vocab.column(t)));
        cols.sort_unstable();
        let mut row: Vec<(u32, u32)> = Vec::new();
        for &c in &cols {
            match row.last_mut() {
                Some((last, n)) if *last == c => *n += 1,
                _ => row.push((c, 1)),
            }
        }
        m.push_row(row);
    }
    m
}

/// TF-IDF weights together with the idf vector that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct TfidfMatrix {
    pub matrix: CsrMatrix<f64>,
    pub idf: Vec<f64>,
}

impl TfidfMatrix {
    pub fn n_rows(&self) -> usize {
        self.matrix.n_rows()
    }

    pub fn n_cols(&self) -> usize {
        self.matrix.n_cols()
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.matrix.get(r, c)
    }
}

/// `ln(n_docs / df)`; zero when the token is in every document or in none.
pub fn idf(n_docs: usize, df: u32) -> f64 {
    if df == 0 || df as usize >= n_docs {
        0.0
    } else {
        (n_docs as f64 / df as f64).ln()
    }
}

/// TF-IDF with document frequencies recomputed from `counts` itself.
pub fn tfidf(counts: &DocTermMatrix) -> Result<TfidfMatrix> {
    if counts.n_rows() == 0 {
        return Err(Error::Empty("document-term matrix has no rows".into()));
    }
    let n = counts.n_rows();
    let idf_vec: Vec<f64> = counts
        .column_nnz()
        .into_iter()
        .map(|df| idf(n, df))
        .collect();
    Ok(apply_idf(counts, &idf_vec))
}

/// Weights `counts` with a previously fitted idf vector (e.g. the training
/// fold's, when transforming held-out rows).
pub fn apply_idf(counts: &DocTermMatrix, idf_vec: &[f64]) -> TfidfMatrix {
    assert_eq!(
        counts.n_cols(),
        idf_vec.len(),
        "idf length must match column count"
    );
    TfidfMatrix {
        matrix: counts.map_values(|c, tf| tf as f64 * idf_vec[c as usize]),
        idf: idf_vec.to_vec(),
    }
}
