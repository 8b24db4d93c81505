use std::path::Path;

use crate::error::{Error, Result};
use crate::provenance;

use super::{idf, CsrMatrix, DocTermMatrix, TfidfMatrix, Vocabulary};

/// The fixed cluster names, in feature-column order.
pub const CLUSTER_NAMES: [&str; 15] = [
    "hiv", "fsw", "violence", "offense", "abuse", "torture", "rape", "victim", "assault", "harass",
    "extort", "homicide", "coercion", "ipv", "exploit",
];

const BUNDLED: &str = include_str!("../../data/clusters.conf");

/// One semantic cluster: stemmed tokens that start with any prefix or equal
/// any exact entry belong to it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterSpec {
    pub name: String,
    pub prefixes: Vec<String>,
    pub exact: Vec<String>,
}

impl ClusterSpec {
    pub fn matches(&self, token: &str) -> bool {
        self.exact.iter().any(|e| e == token)
            || self.prefixes.iter().any(|p| token.starts_with(p.as_str()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterSet {
    clusters: Vec<ClusterSpec>,
    hash: String,
}

impl ClusterSet {
    /// The bundled default configuration.
    pub fn default_set() -> Self {
        Self::parse(BUNDLED).expect("bundled cluster config is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Parses `name: prefix, prefix, exact="token"` lines. The file must
    /// define exactly the 15 canonical clusters; columns follow
    /// [`CLUSTER_NAMES`] order regardless of file order.
    pub fn parse(text: &str) -> Result<Self> {
        let mut specs: Vec<ClusterSpec> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: String| Error::Config(format!("cluster config line {}: {msg}", i + 1));
            let (name, rest) = line
                .split_once(':')
                .ok_or_else(|| err("expected `name: patterns`".into()))?;
            let name = name.trim().to_string();
            if !CLUSTER_NAMES.contains(&name.as_str()) {
                return Err(err(format!("unknown cluster {name:?}")));
            }
            if specs.iter().any(|s| s.name == name) {
                return Err(err(format!("cluster {name:?} defined twice")));
            }
            let mut spec = ClusterSpec {
                name,
                prefixes: Vec::new(),
                exact: Vec::new(),
            };
            for item in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                if let Some(v) = item.strip_prefix("exact=") {
                    let v = v.trim().trim_matches('"');
                    if !is_token(v) {
                        return Err(err(format!("bad exact token {item:?}")));
                    }
                    spec.exact.push(v.to_string());
                } else if is_token(item) {
                    spec.prefixes.push(item.to_string());
                } else {
                    return Err(err(format!("bad prefix {item:?}")));
                }
            }
            specs.push(spec);
        }
        for name in CLUSTER_NAMES {
            if !specs.iter().any(|s| s.name == name) {
                return Err(Error::Config(format!(
                    "cluster config is missing cluster {name:?}"
                )));
            }
        }
        specs.sort_by_key(|s| CLUSTER_NAMES.iter().position(|&n| n == s.name));
        Ok(Self::custom(specs))
    }

    /// A cluster set with arbitrary names, in the given column order.
    pub fn custom(clusters: Vec<ClusterSpec>) -> Self {
        let canonical: Vec<String> = clusters
            .iter()
            .map(|c| {
                let mut p = c.prefixes.clone();
                p.sort();
                let mut e = c.exact.clone();
                e.sort();
                format!("{}:{}|{}", c.name, p.join(","), e.join(","))
            })
            .collect();
        let hash = provenance::sha256_lines(canonical.iter().map(String::as_str));
        ClusterSet { clusters, hash }
    }

    pub fn clusters(&self) -> &[ClusterSpec] {
        &self.clusters
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn names(&self) -> Vec<&str> {
        self.clusters.iter().map(|c| c.name.as_str()).collect()
    }

    pub fn content_hash(&self) -> &str {
        &self.hash
    }

    /// All clusters a stemmed token belongs to.
    pub fn assign(&self, token: &str) -> Vec<usize> {
        self.clusters
            .iter()
            .enumerate()
            .filter(|(_, c)| c.matches(token))
            .map(|(i, _)| i)
            .collect()
    }

    /// Cluster of every vocabulary column; a token claimed by two clusters is
    /// a configuration error.
    pub fn member_map(&self, vocab: &Vocabulary) -> Result<Vec<Option<u16>>> {
        vocab
            .tokens()
            .iter()
            .map(|t| match self.assign(t).as_slice() {
                [] => Ok(None),
                [c] => Ok(Some(*c as u16)),
                many => Err(Error::Config(format!(
                    "token {t:?} matches several clusters: {}",
                    many.iter()
                        .map(|&c| self.clusters[c].name.as_str())
                        .collect::<Vec<_>>()
                        .join(", ")
                ))),
            })
            .collect()
    }
}

fn is_token(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_lowercase())
}

/// Document-cluster TF-IDF matrix plus what is needed to transform new rows.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterMatrix {
    pub tfidf: TfidfMatrix,
    pub counts: CsrMatrix<u32>,
    pub member_map: Vec<Option<u16>>,
    pub warnings: Vec<String>,
}

/// Sums member-token counts per cluster.
pub fn cluster_counts(
    counts: &DocTermMatrix,
    member_map: &[Option<u16>],
    n_clusters: usize,
) -> CsrMatrix<u32> {
    let mut out = CsrMatrix::empty(n_clusters);
    let mut acc = vec![0u32; n_clusters];
    for r in 0..counts.n_rows() {
        acc.iter_mut().for_each(|a| *a = 0);
        for (c, tf) in counts.row_iter(r) {
            if let Some(k) = member_map[c as usize] {
                acc[k as usize] += tf;
            }
        }
        out.push_row(acc.iter().enumerate().map(|(k, &v)| (k as u32, v)));
    }
    out
}

/// TF-IDF over combined cluster counts: `tf(c,d)` is the sum of member token
/// counts and `df(c)` the number of documents where that sum is positive.
/// A cluster with no member in the vocabulary yields a zero column and a
/// warning.
pub fn cluster_matrix(
    counts: &DocTermMatrix,
    vocab: &Vocabulary,
    clusters: &ClusterSet,
) -> Result<ClusterMatrix> {
    if counts.n_rows() == 0 {
        return Err(Error::Empty("document-term matrix has no rows".into()));
    }
    let member_map = clusters.member_map(vocab)?;
    let k = clusters.len();
    let mut warnings = Vec::new();
    let mut has_member = vec![false; k];
    for c in member_map.iter().flatten() {
        has_member[*c as usize] = true;
    }
    for (i, spec) in clusters.clusters().iter().enumerate() {
        if !has_member[i] {
            warnings.push(format!(
                "cluster {:?} matches no vocabulary token",
                spec.name
            ));
        }
    }
    let ccounts = cluster_counts(counts, &member_map, k);
    let n = counts.n_rows();
    let idf_vec: Vec<f64> = ccounts
        .column_nnz()
        .into_iter()
        .enumerate()
        .map(|(i, df)| if has_member[i] { idf(n, df) } else { 0.0 })
        .collect();
    let tfidf = super::apply_idf(&ccounts, &idf_vec);
    Ok(ClusterMatrix {
        tfidf,
        counts: ccounts,
        member_map,
        warnings,
    })
}
