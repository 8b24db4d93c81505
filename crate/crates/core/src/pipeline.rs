//! Model recipes and the fit/transform pipeline. Vocabulary, idf, cluster idf
//! and token ranking are all learned from training rows and then applied
//! unchanged to held-out rows.

use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::boolquery::BooleanQuery;
use crate::corpus::{Corpus, Label};
use crate::error::{Error, Result};
use crate::forest::{train_forest, FeatureMatrix, ForestConfig, ForestModel};
use crate::provenance::{Provenance, RowSetId};
use crate::select::{self, FeatureSet, TFormula, TokenRanking};
use crate::textprep::{preprocess_all, LemmaTable, TokenSequence};
use crate::vectorize::{
    apply_idf, build_vocab, cluster_counts, cluster_matrix, count_matrix, idf, tfidf, ClusterSet,
    Vocabulary,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Recipe {
    /// Boolean keyword query.
    Model1,
    /// Random forest on the 15 cluster features.
    Model2,
    /// Model 2 plus the `n_top` best t-statistic tokens.
    Model3 { n_top: usize },
}

impl Recipe {
    /// Short id used in file names: `model1`, `model2`, `model3-250`.
    pub fn id(&self) -> String {
        match self {
            Recipe::Model1 => "model1".into(),
            Recipe::Model2 => "model2".into(),
            Recipe::Model3 { n_top } => format!("model3-{n_top}"),
        }
    }

    pub fn n_top(&self) -> usize {
        match self {
            Recipe::Model3 { n_top } => *n_top,
            _ => 0,
        }
    }
}

impl fmt::Display for Recipe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Recipe::Model1 => f.write_str("model1"),
            Recipe::Model2 => f.write_str("model2"),
            Recipe::Model3 { n_top } => write!(f, "model3:{n_top}"),
        }
    }
}

impl FromStr for Recipe {
    type Err = String;

    /// Accepts `model1`, `model2` and `model3:N` (or `model3-N`).
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "model1" => Ok(Recipe::Model1),
            "model2" => Ok(Recipe::Model2),
            other => {
                let n = other
                    .strip_prefix("model3:")
                    .or_else(|| other.strip_prefix("model3-"))
                    .ok_or_else(|| {
                        format!("unknown recipe {other:?} (expected model1, model2 or model3:N)")
                    })?;
                n.parse()
                    .map(|n_top| Recipe::Model3 { n_top })
                    .map_err(|_| format!("bad n_top in {other:?}"))
            }
        }
    }
}

/// Lemma table, cluster definitions and keyword query.
#[derive(Debug, Clone)]
pub struct Resources {
    pub lemmas: LemmaTable,
    pub clusters: ClusterSet,
    pub query: BooleanQuery,
}

impl Resources {
    pub fn bundled() -> Self {
        Resources {
            lemmas: LemmaTable::english(),
            clusters: ClusterSet::default_set(),
            query: BooleanQuery::default_query(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub min_df: u32,
    pub t_formula: TFormula,
    /// Let cluster member tokens compete for the top-N slots.
    pub include_cluster_tokens: bool,
    /// Rank tokens once on all rows instead of inside each training fold.
    pub pooled_selection: bool,
    pub forest: ForestConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            min_df: 1,
            t_formula: TFormula::Welch,
            include_cluster_tokens: false,
            pooled_selection: false,
            forest: ForestConfig::default(),
        }
    }
}

/// A corpus after text normalization. Normalization has no fitted state, so
/// it is done once for all rows.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub seqs: Vec<TokenSequence>,
    pub labels: Vec<Option<Label>>,
}

impl Prepared {
    pub fn new(corpus: &Corpus, lemmas: &LemmaTable) -> Self {
        Prepared {
            seqs: preprocess_all(corpus.documents(), lemmas),
            labels: corpus.documents().iter().map(|d| d.label).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.seqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seqs.is_empty()
    }

    fn subset(&self, rows: &[usize]) -> Vec<TokenSequence> {
        rows.iter().map(|&r| self.seqs[r].clone()).collect()
    }

    fn labels_of(&self, rows: &[usize]) -> Result<Vec<Label>> {
        rows.iter()
            .map(|&r| {
                self.labels[r].ok_or_else(|| {
                    Error::Unlabeled(format!("training row {} has no label", self.seqs[r].doc_id))
                })
            })
            .collect()
    }
}

/// Everything the feature transform learned from training rows.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedFeatures {
    pub vocab: Vocabulary,
    pub token_idf: Vec<f64>,
    pub member_map: Vec<Option<u16>>,
    pub cluster_df: Vec<u32>,
    pub cluster_idf: Vec<f64>,
    pub features: FeatureSet,
    pub warnings: Vec<String>,
}

impl FittedFeatures {
    /// Fits on `rows` of `prepared` and returns the training matrix.
    /// `pooled` is a ranking computed on all rows, used instead of a
    /// per-fold ranking when pooled selection is on.
    pub fn fit(
        prepared: &Prepared,
        rows: &[usize],
        recipe: Recipe,
        config: &PipelineConfig,
        clusters: &ClusterSet,
        pooled: Option<&TokenRanking>,
    ) -> Result<(FittedFeatures, FeatureMatrix)> {
        if recipe == Recipe::Model1 {
            return Err(Error::InvalidArgument(
                "model1 has no fitted features".into(),
            ));
        }
        let train = prepared.subset(rows);
        let labels = prepared.labels_of(rows)?;
        let vocab = build_vocab(&train, config.min_df)?;
        let counts = count_matrix(&train, &vocab);
        let tokens = tfidf(&counts)?;
        let cm = cluster_matrix(&counts, &vocab, clusters)?;
        let names: Vec<String> = clusters.names().iter().map(|s| s.to_string()).collect();

        let n_top = recipe.n_top();
        let (features, matrix) = if n_top == 0 {
            let fs = FeatureSet::clusters_only(names);
            let m = select::assemble(&cm.tfidf, &tokens, &fs);
            (fs, m)
        } else {
            let excluded: Vec<bool> = if config.include_cluster_tokens {
                vec![false; vocab.len()]
            } else {
                cm.member_map.iter().map(Option::is_some).collect()
            };
            let fitted_on = RowSetId::of(rows);
            let ranking = match pooled {
                Some(r) if config.pooled_selection => remap_ranking(r, &vocab, fitted_on),
                Some(_) => {
                    return Err(Error::InvalidArgument(
                        "a pooled ranking was supplied but pooled selection is off".into(),
                    ))
                }
                None => select::rank_tokens(&tokens, &labels, &vocab, config.t_formula, fitted_on)?,
            };
            select::assemble_features(
                &cm.tfidf, &tokens, &ranking, n_top, &excluded, names, fitted_on,
            )?
        };
        let cluster_df = cm.counts.column_nnz();
        Ok((
            FittedFeatures {
                vocab,
                token_idf: tokens.idf,
                member_map: cm.member_map,
                cluster_df,
                cluster_idf: cm.tfidf.idf,
                features,
                warnings: cm.warnings,
            },
            matrix,
        ))
    }

    /// Applies the fitted vocabulary, idf and feature selection to `seqs`.
    pub fn transform(&self, seqs: &[TokenSequence]) -> FeatureMatrix {
        let counts = count_matrix(seqs, &self.vocab);
        let tokens = apply_idf(&counts, &self.token_idf);
        let cc = cluster_counts(&counts, &self.member_map, self.cluster_idf.len());
        let clusters = apply_idf(&cc, &self.cluster_idf);
        select::assemble(&clusters, &tokens, &self.features)
    }
}

/// Restricts a ranking computed over another vocabulary to the tokens of
/// `vocab`, keeping rank order. The result is stamped as fitted on
/// `fitted_on`: pooled selection deliberately bypasses the leakage guard.
fn remap_ranking(pooled: &TokenRanking, vocab: &Vocabulary, fitted_on: RowSetId) -> TokenRanking {
    let scores = pooled
        .scores
        .iter()
        .filter_map(|s| {
            vocab.column(&s.token).map(|c| select::TokenScore {
                column: c,
                ..s.clone()
            })
        })
        .collect();
    TokenRanking { scores, fitted_on }
}

/// Token ranking on all labeled rows, for pooled selection.
pub fn pooled_ranking(prepared: &Prepared, config: &PipelineConfig) -> Result<TokenRanking> {
    let rows: Vec<usize> = (0..prepared.len()).collect();
    let labels = prepared.labels_of(&rows)?;
    let vocab = build_vocab(&prepared.seqs, config.min_df)?;
    let tokens = tfidf(&count_matrix(&prepared.seqs, &vocab))?;
    select::rank_tokens(
        &tokens,
        &labels,
        &vocab,
        config.t_formula,
        RowSetId::of(&rows),
    )
}

/// A fitted feature transform plus the forest trained on it.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub recipe: Recipe,
    pub fitted: FittedFeatures,
    pub forest: ForestModel,
    pub provenance: Provenance,
}

/// Trains `recipe` on `rows` of `prepared`.
pub fn train(
    prepared: &Prepared,
    rows: &[usize],
    recipe: Recipe,
    config: &PipelineConfig,
    resources: &Resources,
    pooled: Option<&TokenRanking>,
) -> Result<TrainedModel> {
    if recipe == Recipe::Model1 {
        return Err(Error::InvalidArgument(
            "model1 is a fixed Boolean query and has nothing to train".into(),
        ));
    }
    let (fitted, x) =
        FittedFeatures::fit(prepared, rows, recipe, config, &resources.clusters, pooled)?;
    let labels = prepared.labels_of(rows)?;
    let forest = train_forest(&x, &labels, &config.forest, fitted.features.feature_names())?;
    let provenance = Provenance {
        lemma_table: resources.lemmas.content_hash().to_string(),
        clusters: resources.clusters.content_hash().to_string(),
        vocabulary: fitted.vocab.content_hash(),
    };
    Ok(TrainedModel {
        recipe,
        fitted,
        forest,
        provenance,
    })
}

const MAGIC: &str = "litscreen-model 1";

impl TrainedModel {
    pub fn score(&self, seqs: &[TokenSequence]) -> Result<Vec<f64>> {
        let x = self.fitted.transform(seqs);
        self.forest.predict_proba_matrix(&x)
    }

    /// Fails with [`Error::Provenance`] if `resources` differ from the ones
    /// the model was trained with.
    pub fn check_provenance(&self, resources: &Resources) -> Result<()> {
        let check = |artifact: &'static str, expected: &str, actual: &str| {
            if expected == actual {
                Ok(())
            } else {
                Err(Error::Provenance {
                    artifact,
                    expected: expected.to_string(),
                    actual: actual.to_string(),
                })
            }
        };
        check(
            "lemma table",
            &self.provenance.lemma_table,
            resources.lemmas.content_hash(),
        )?;
        check(
            "cluster config",
            &self.provenance.clusters,
            resources.clusters.content_hash(),
        )?;
        check(
            "vocabulary",
            &self.provenance.vocabulary,
            &self.fitted.vocab.content_hash(),
        )?;
        if self.fitted.features.n_features() != self.forest.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.forest.n_features,
                actual: self.fitted.features.n_features(),
            });
        }
        Ok(())
    }

    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let f = &self.fitted;
        writeln!(out, "{MAGIC}")?;
        writeln!(out, "recipe {}", self.recipe)?;
        writeln!(out, "lemma_table {}", self.provenance.lemma_table)?;
        writeln!(out, "clusters {}", self.provenance.clusters)?;
        writeln!(out, "vocabulary {}", self.provenance.vocabulary)?;
        writeln!(out, "vocab {} {}", f.vocab.len(), f.vocab.n_docs())?;
        for (t, df) in f.vocab.tokens().iter().zip(f.vocab.dfs()) {
            writeln!(out, "{t} {df}")?;
        }
        write!(out, "cluster_df {}", f.cluster_df.len())?;
        for df in &f.cluster_df {
            write!(out, " {df}")?;
        }
        writeln!(out)?;
        write!(out, "selected {}", f.features.tokens.len())?;
        for t in &f.features.tokens {
            write!(out, " {t}")?;
        }
        writeln!(out)?;
        self.forest.write_text(out)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write(&mut w).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// Reads a model; `clusters` rebuilds the member map and must carry the
    /// hash the model was trained with.
    pub fn read<R: BufRead>(reader: R, clusters: &ClusterSet) -> Result<TrainedModel> {
        let mut lines = reader.lines();
        let mut n = 0u64;
        let mut next = |what: &str| -> Result<String> {
            n += 1;
            match lines.next() {
                Some(Ok(l)) => Ok(l),
                _ => Err(Error::ModelFormat(format!("line {n}: expected {what}"))),
            }
        };
        let bad = |what: &str| Error::ModelFormat(format!("malformed {what} line"));
        if next("header")? != MAGIC {
            return Err(Error::ModelFormat(
                "not a litscreen model (bad header)".into(),
            ));
        }
        let field = |line: String, key: &str| -> Result<String> {
            line.strip_prefix(key)
                .and_then(|r| r.strip_prefix(' '))
                .map(String::from)
                .ok_or_else(|| bad(key))
        };
        let recipe: Recipe = field(next("recipe")?, "recipe")?
            .parse()
            .map_err(Error::ModelFormat)?;
        let provenance = Provenance {
            lemma_table: field(next("lemma_table")?, "lemma_table")?,
            clusters: field(next("clusters")?, "clusters")?,
            vocabulary: field(next("vocabulary")?, "vocabulary")?,
        };
        if provenance.clusters != clusters.content_hash() {
            return Err(Error::Provenance {
                artifact: "cluster config",
                expected: provenance.clusters,
                actual: clusters.content_hash().to_string(),
            });
        }
        let head = field(next("vocab")?, "vocab")?;
        let (p, n_docs) = head.split_once(' ').ok_or_else(|| bad("vocab"))?;
        let p: usize = p.parse().map_err(|_| bad("vocab"))?;
        let n_docs: usize = n_docs.parse().map_err(|_| bad("vocab"))?;
        let mut tokens = Vec::with_capacity(p);
        let mut dfs = Vec::with_capacity(p);
        for _ in 0..p {
            let l = next("vocabulary entry")?;
            let (t, df) = l.split_once(' ').ok_or_else(|| bad("vocabulary entry"))?;
            tokens.push(t.to_string());
            dfs.push(df.parse().map_err(|_| bad("vocabulary entry"))?);
        }
        let vocab = Vocabulary::from_parts(tokens, dfs, n_docs)
            .map_err(|e| Error::ModelFormat(e.to_string()))?;
        let token_idf: Vec<f64> = vocab.dfs().iter().map(|&df| idf(n_docs, df)).collect();

        let cl = field(next("cluster_df")?, "cluster_df")?;
        let mut it = cl.split(' ');
        let k: usize = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("cluster_df"))?;
        let cluster_df: Vec<u32> = it
            .map(|s| s.parse().map_err(|_| bad("cluster_df")))
            .collect::<Result<_>>()?;
        if cluster_df.len() != k || k != clusters.len() {
            return Err(bad("cluster_df"));
        }
        let member_map = clusters.member_map(&vocab)?;
        let mut has_member = vec![false; k];
        for c in member_map.iter().flatten() {
            has_member[*c as usize] = true;
        }
        let cluster_idf: Vec<f64> = cluster_df
            .iter()
            .zip(&has_member)
            .map(|(&df, &live)| if live { idf(n_docs, df) } else { 0.0 })
            .collect();

        let sel = field(next("selected")?, "selected")?;
        let mut it = sel.split(' ');
        let n_sel: usize = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("selected"))?;
        let sel_tokens: Vec<String> = it.map(String::from).collect();
        if sel_tokens.len() != n_sel || n_sel != recipe.n_top() {
            return Err(bad("selected"));
        }
        let token_columns = sel_tokens
            .iter()
            .map(|t| {
                vocab.column(t).ok_or_else(|| {
                    Error::ModelFormat(format!("selected token {t:?} not in vocabulary"))
                })
            })
            .collect::<Result<Vec<u32>>>()?;
        let features = FeatureSet {
            cluster_names: clusters.names().iter().map(|s| s.to_string()).collect(),
            token_columns,
            tokens: sel_tokens,
            n_top: n_sel,
        };

        let rest: Vec<String> = lines
            .collect::<std::io::Result<_>>()
            .map_err(|e| Error::ModelFormat(e.to_string()))?;
        let forest = ForestModel::from_text(&(rest.join("\n") + "\n"))?;
        if forest.feature_names != features.feature_names() {
            return Err(Error::ModelFormat(
                "forest features do not match the feature set".into(),
            ));
        }
        Ok(TrainedModel {
            recipe,
            fitted: FittedFeatures {
                vocab,
                token_idf,
                member_map,
                cluster_df,
                cluster_idf,
                features,
                warnings: Vec::new(),
            },
            forest,
            provenance,
        })
    }

    pub fn load(path: impl AsRef<Path>, clusters: &ClusterSet) -> Result<TrainedModel> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(std::io::BufReader::new(file), clusters)
    }
}
