//! Token screening by two-sample t-statistics of TF-IDF, and assembly of the
//! cluster (+ top-N token) feature matrix.

use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::forest::FeatureMatrix;
use crate::provenance::RowSetId;
use crate::vectorize::{TfidfMatrix, Vocabulary};

/// How the mean difference is scaled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TFormula {
    /// `(m1 - m2) / sqrt(s1²/n1 + s2²/n2)`.
    #[default]
    Welch,
    /// `(m1 - m2) / (s1²/n1 + s2²/n2)`, dividing by the un-pooled variance
    /// itself rather than its square root.
    Raw,
}

impl FromStr for TFormula {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "welch" => Ok(TFormula::Welch),
            "raw" => Ok(TFormula::Raw),
            other => Err(format!(
                "unknown t formula {other:?} (expected welch or raw)"
            )),
        }
    }
}

/// Per-class summary of one column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub n: usize,
    pub mean: f64,
    /// Sample variance with n-1 denominator; 0 when n < 2.
    pub var: f64,
}

/// Statistic from per-class moments; class 1 is relevant.
///
/// With both variances zero the statistic is 0 for equal means and a signed
/// infinity otherwise.
pub fn t_from_moments(relevant: Moments, irrelevant: Moments, formula: TFormula) -> f64 {
    let diff = relevant.mean - irrelevant.mean;
    let pooled = relevant.var / relevant.n as f64 + irrelevant.var / irrelevant.n as f64;
    if pooled == 0.0 {
        return if diff == 0.0 {
            0.0
        } else {
            diff.signum() * f64::INFINITY
        };
    }
    match formula {
        TFormula::Welch => diff / pooled.sqrt(),
        TFormula::Raw => diff / pooled,
    }
}

fn class_sizes(labels: &[Label]) -> Result<[usize; 2]> {
    let rel = labels.iter().filter(|l| l.is_relevant()).count();
    let irr = labels.len() - rel;
    if rel == 0 || irr == 0 {
        return Err(Error::SingleClass(format!(
            "t-statistics need both classes ({rel} relevant, {irr} irrelevant)"
        )));
    }
    Ok([rel, irr])
}

/// Per-class moments of every column, treating absent entries as zeros.
/// Variances use a two-pass formula over the stored entries.
pub fn column_moments(tfidf: &TfidfMatrix, labels: &[Label]) -> Result<Vec<[Moments; 2]>> {
    assert_eq!(tfidf.n_rows(), labels.len(), "one label per row");
    let n = class_sizes(labels)?;
    let p = tfidf.n_cols();
    let class = |r: usize| if labels[r].is_relevant() { 0 } else { 1 };

    let mut sum = vec![[0.0f64; 2]; p];
    let mut nnz = vec![[0usize; 2]; p];
    for r in 0..tfidf.n_rows() {
        let k = class(r);
        for (c, v) in tfidf.matrix.row_iter(r) {
            sum[c as usize][k] += v;
            nnz[c as usize][k] += 1;
        }
    }
    let mean: Vec<[f64; 2]> = sum
        .iter()
        .map(|s| [s[0] / n[0] as f64, s[1] / n[1] as f64])
        .collect();

    let mut ss = vec![[0.0f64; 2]; p];
    for r in 0..tfidf.n_rows() {
        let k = class(r);
        for (c, v) in tfidf.matrix.row_iter(r) {
            let d = v - mean[c as usize][k];
            ss[c as usize][k] += d * d;
        }
    }
    Ok((0..p)
        .map(|c| {
            [0, 1].map(|k| {
                let zeros = (n[k] - nnz[c][k]) as f64;
                let m = mean[c][k];
                let total = ss[c][k] + zeros * m * m;
                Moments {
                    n: n[k],
                    mean: m,
                    var: if n[k] < 2 {
                        0.0
                    } else {
                        total / (n[k] - 1) as f64
                    },
                }
            })
        })
        .collect())
}

/// t-statistic of one column over the rows of `tfidf`.
pub fn t_statistic(
    tfidf: &TfidfMatrix,
    labels: &[Label],
    column: usize,
    formula: TFormula,
) -> Result<f64> {
    let m = column_moments(tfidf, labels)?;
    let [rel, irr] = m[column];
    Ok(t_from_moments(rel, irr, formula))
}

pub fn t_statistics(tfidf: &TfidfMatrix, labels: &[Label], formula: TFormula) -> Result<Vec<f64>> {
    Ok(column_moments(tfidf, labels)?
        .into_iter()
        .map(|[rel, irr]| t_from_moments(rel, irr, formula))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TokenScore {
    pub token: String,
    pub column: u32,
    pub t_stat: f64,
    /// 1-based rank by |t| descending, ties broken by token.
    pub abs_rank: usize,
}

/// Every vocabulary column scored and ranked, plus the rows it was fitted on.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenRanking {
    pub scores: Vec<TokenScore>,
    pub fitted_on: RowSetId,
}

pub fn rank_tokens(
    tfidf: &TfidfMatrix,
    labels: &[Label],
    vocab: &Vocabulary,
    formula: TFormula,
    fitted_on: RowSetId,
) -> Result<TokenRanking> {
    assert_eq!(
        tfidf.n_cols(),
        vocab.len(),
        "matrix and vocabulary disagree"
    );
    let t = t_statistics(tfidf, labels, formula)?;
    let mut scores: Vec<TokenScore> = t
        .into_iter()
        .enumerate()
        .map(|(c, t_stat)| TokenScore {
            token: vocab.token(c as u32).to_string(),
            column: c as u32,
            t_stat,
            abs_rank: 0,
        })
        .collect();
    scores.sort_by(|a, b| {
        b.t_stat
            .abs()
            .total_cmp(&a.t_stat.abs())
            .then_with(|| a.token.cmp(&b.token))
    });
    for (i, s) in scores.iter_mut().enumerate() {
        s.abs_rank = i + 1;
    }
    Ok(TokenRanking { scores, fitted_on })
}

pub fn write_ranking_csv<W: Write>(ranking: &TokenRanking, mut out: W) -> std::io::Result<()> {
    writeln!(out, "token,t_stat,rank")?;
    for s in &ranking.scores {
        writeln!(out, "{},{},{}", s.token, s.t_stat, s.abs_rank)?;
    }
    Ok(())
}

/// Feature columns: the clusters first, then selected tokens in rank order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FeatureSet {
    pub cluster_names: Vec<String>,
    pub token_columns: Vec<u32>,
    pub tokens: Vec<String>,
    pub n_top: usize,
}

impl FeatureSet {
    pub fn clusters_only(cluster_names: Vec<String>) -> Self {
        FeatureSet {
            cluster_names,
            token_columns: Vec::new(),
            tokens: Vec::new(),
            n_top: 0,
        }
    }

    pub fn n_features(&self) -> usize {
        self.cluster_names.len() + self.token_columns.len()
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.cluster_names
            .iter()
            .map(|c| format!("cluster:{c}"))
            .chain(self.tokens.iter().map(|t| format!("token:{t}")))
            .collect()
    }
}

/// Picks the `n_top` best-ranked tokens, skipping columns flagged in
/// `excluded` (cluster members, by default).
pub fn select_top(
    ranking: &TokenRanking,
    n_top: usize,
    excluded: &[bool],
    cluster_names: Vec<String>,
) -> Result<FeatureSet> {
    let eligible = ranking
        .scores
        .iter()
        .filter(|s| !excluded.get(s.column as usize).copied().unwrap_or(false));
    let chosen: Vec<&TokenScore> = eligible.take(n_top).collect();
    if chosen.len() < n_top {
        return Err(Error::InvalidArgument(format!(
            "n_top = {n_top} exceeds the {} eligible vocabulary tokens",
            chosen.len()
        )));
    }
    Ok(FeatureSet {
        cluster_names,
        token_columns: chosen.iter().map(|s| s.column).collect(),
        tokens: chosen.iter().map(|s| s.token.clone()).collect(),
        n_top,
    })
}

/// Dense feature matrix `[clusters | selected token TF-IDF]`. The same
/// feature set is applied unchanged to training and held-out rows.
pub fn assemble(
    clusters: &TfidfMatrix,
    tokens: &TfidfMatrix,
    features: &FeatureSet,
) -> FeatureMatrix {
    assert_eq!(clusters.n_rows(), tokens.n_rows(), "row counts differ");
    assert_eq!(
        clusters.n_cols(),
        features.cluster_names.len(),
        "cluster columns differ"
    );
    let n_features = features.n_features();
    let k = clusters.n_cols();
    let mut slot = vec![usize::MAX; tokens.n_cols()];
    for (j, &c) in features.token_columns.iter().enumerate() {
        slot[c as usize] = k + j;
    }
    let mut data = vec![0.0; clusters.n_rows() * n_features];
    for r in 0..clusters.n_rows() {
        let row = &mut data[r * n_features..(r + 1) * n_features];
        for (c, v) in clusters.matrix.row_iter(r) {
            row[c as usize] = v;
        }
        if !features.token_columns.is_empty() {
            for (c, v) in tokens.matrix.row_iter(r) {
                let s = slot[c as usize];
                if s != usize::MAX {
                    row[s] = v;
                }
            }
        }
    }
    FeatureMatrix::from_row_major(clusters.n_rows(), n_features, data)
}

/// Selects top-N tokens and assembles the training feature matrix. The
/// ranking must have been fitted on exactly `training_rows`.
pub fn assemble_features(
    clusters: &TfidfMatrix,
    tokens: &TfidfMatrix,
    ranking: &TokenRanking,
    n_top: usize,
    excluded: &[bool],
    cluster_names: Vec<String>,
    training_rows: RowSetId,
) -> Result<(FeatureSet, FeatureMatrix)> {
    if ranking.fitted_on != training_rows {
        return Err(Error::InvalidArgument(
            "token ranking was not fitted on the training rows (leakage guard)".into(),
        ));
    }
    let features = select_top(ranking, n_top, excluded, cluster_names)?;
    let matrix = assemble(clusters, tokens, &features);
    Ok((features, matrix))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vectorize::CsrMatrix;

    fn single_column(values: &[f64]) -> TfidfMatrix {
        let rows: Vec<Vec<f64>> = values.iter().map(|&v| vec![v]).collect();
        TfidfMatrix {
            matrix: CsrMatrix::from_dense(1, &rows),
            idf: vec![1.0],
        }
    }

    fn labels(n_rel: usize, n_irr: usize) -> Vec<Label> {
        let mut l = vec![Label::Relevant; n_rel];
        l.extend(vec![Label::Irrelevant; n_irr]);
        l
    }

    #[test]
    fn t_examples() {
        let m = single_column(&[1.0, 2.0, 0.0, 1.0]);
        let t = t_statistic(&m, &labels(2, 2), 0, TFormula::Welch).unwrap();
        // means 1.5 / 0.5, variances 0.5 / 0.5: 1 / sqrt(0.5)
        assert!((t - 2f64.sqrt()).abs() < 1e-15);

        let m = single_column(&[2.0, 2.0, 0.0, 0.0, 0.0, 0.0]);
        let t = t_statistic(&m, &labels(2, 4), 0, TFormula::Welch).unwrap();
        assert_eq!(t, f64::INFINITY);

        let m = single_column(&[1.0, 0.0, 1.0, 0.0]);
        assert_eq!(
            t_statistic(&m, &labels(2, 2), 0, TFormula::Welch).unwrap(),
            0.0
        );

        let m = single_column(&[1.0, 2.0, 0.0, 1.0]);
        let raw = t_statistic(&m, &labels(2, 2), 0, TFormula::Raw).unwrap();
        assert!((raw - 2.0).abs() < 1e-15);

        assert!(matches!(
            t_statistic(&m, &labels(4, 0), 0, TFormula::Welch),
            Err(Error::SingleClass(_))
        ));
    }

    fn fixture() -> (TfidfMatrix, Vec<Label>, Vocabulary) {
        // columns: a (same in both classes), q (relevant only), z (mostly irrelevant)
        let rows = vec![
            vec![1.0, 2.0, 0.0],
            vec![0.0, 1.5, 0.0],
            vec![1.0, 0.0, 0.5],
            vec![0.0, 0.0, 1.0],
        ];
        let tfidf = TfidfMatrix {
            matrix: CsrMatrix::from_dense(3, &rows),
            idf: vec![1.0; 3],
        };
        let vocab =
            Vocabulary::from_parts(vec!["a".into(), "q".into(), "z".into()], vec![2, 2, 2], 4)
                .unwrap();
        (tfidf, labels(2, 2), vocab)
    }

    #[test]
    fn ranking_puts_planted_token_first() {
        let (tfidf, labels, vocab) = fixture();
        let rows = RowSetId::of(&[0, 1, 2, 3]);
        let r = rank_tokens(&tfidf, &labels, &vocab, TFormula::Welch, rows).unwrap();
        assert_eq!(r.scores[0].token, "q");
        assert_eq!(r.scores.last().unwrap().token, "a");
        assert_eq!(
            r.scores.iter().map(|s| s.abs_rank).collect::<Vec<_>>(),
            vec![1, 2, 3]
        );
        let mut csv = Vec::new();
        write_ranking_csv(&r, &mut csv).unwrap();
        assert!(String::from_utf8(csv)
            .unwrap()
            .starts_with("token,t_stat,rank\nq,"));
    }

    #[test]
    fn ties_break_by_token() {
        let rows = vec![
            vec![1.0, 1.0],
            vec![0.0, 0.0],
            vec![0.5, 0.5],
            vec![0.0, 0.0],
        ];
        let tfidf = TfidfMatrix {
            matrix: CsrMatrix::from_dense(2, &rows),
            idf: vec![1.0; 2],
        };
        let vocab = Vocabulary::from_parts(vec!["b".into(), "c".into()], vec![2, 2], 4).unwrap();
        let r = rank_tokens(
            &tfidf,
            &labels(2, 2),
            &vocab,
            TFormula::Welch,
            RowSetId::of(&[]),
        )
        .unwrap();
        assert_eq!(r.scores[0].t_stat.abs(), r.scores[1].t_stat.abs());
        assert_eq!(r.scores[0].token, "b");
    }

    #[test]
    fn assembly_shapes_and_leakage_guard() {
        let (tfidf, labels, vocab) = fixture();
        let train = RowSetId::of(&[0, 1, 2, 3]);
        let ranking = rank_tokens(&tfidf, &labels, &vocab, TFormula::Welch, train).unwrap();
        let clusters = TfidfMatrix {
            matrix: CsrMatrix::from_dense(1, &[vec![1.0], vec![0.0], vec![0.0], vec![2.0]]),
            idf: vec![1.0],
        };
        let names = vec!["c0".to_string()];
        let none = vec![false; 3];

        let (fs, m) =
            assemble_features(&clusters, &tfidf, &ranking, 0, &none, names.clone(), train).unwrap();
        assert_eq!(fs.n_features(), 1);
        assert_eq!(m.n_features(), 1);

        let (fs, m) =
            assemble_features(&clusters, &tfidf, &ranking, 3, &none, names.clone(), train).unwrap();
        assert_eq!(fs.tokens, vec!["q", "z", "a"]);
        assert_eq!(m.row(0), &[1.0, 2.0, 0.0, 1.0]);

        let excluded = vec![false, true, false];
        let (fs, _) = assemble_features(
            &clusters,
            &tfidf,
            &ranking,
            2,
            &excluded,
            names.clone(),
            train,
        )
        .unwrap();
        assert_eq!(fs.tokens, vec!["z", "a"]);

        assert!(
            assemble_features(&clusters, &tfidf, &ranking, 4, &none, names.clone(), train).is_err()
        );
        let other = RowSetId::of(&[0, 1]);
        assert!(assemble_features(&clusters, &tfidf, &ranking, 1, &none, names, other).is_err());
    }
}
