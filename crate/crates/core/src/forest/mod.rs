//! Class-balanced random forest: CART trees on per-tree within-class
//! bootstrap samples, with the share of trees voting relevant as P̂.

mod io;
mod tree;

use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::seed::{self, Stream};

pub use tree::{grow_tree, Node, Tree};

/// Dense row-major feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    n_rows: usize,
    n_features: usize,
    data: Vec<f64>,
}

impl FeatureMatrix {
    pub fn from_row_major(n_rows: usize, n_features: usize, data: Vec<f64>) -> Self {
        assert_eq!(
            data.len(),
            n_rows * n_features,
            "data length must be n_rows * n_features"
        );
        FeatureMatrix {
            n_rows,
            n_features,
            data,
        }
    }

    pub fn from_rows(n_features: usize, rows: &[Vec<f64>]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * n_features);
        for r in rows {
            assert_eq!(r.len(), n_features);
            data.extend_from_slice(r);
        }
        Self::from_row_major(rows.len(), n_features, data)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.n_features..(r + 1) * self.n_features]
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.n_features + c]
    }

    /// Applies `f` to every value of column `c`.
    pub fn map_column(&mut self, c: usize, f: impl Fn(f64) -> f64) {
        for r in 0..self.n_rows {
            let v = &mut self.data[r * self.n_features + c];
            *v = f(*v);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Balance {
    /// Bootstrap `n_min` rows from each class for every tree.
    #[default]
    DownsampleMajority,
    /// Ordinary bootstrap of all rows.
    None,
}

impl Balance {
    pub fn as_str(self) -> &'static str {
        match self {
            Balance::DownsampleMajority => "downsample_majority",
            Balance::None => "none",
        }
    }
}

impl FromStr for Balance {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "downsample_majority" | "downsample" => Ok(Balance::DownsampleMajority),
            "none" => Ok(Balance::None),
            other => Err(format!("unknown balance mode {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// Features tried per split; `None` means ⌈√p⌉.
    pub mtry: Option<usize>,
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    pub seed: u64,
    pub balance: Balance,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 500,
            mtry: None,
            max_depth: None,
            min_leaf: 1,
            seed: 0,
            balance: Balance::DownsampleMajority,
        }
    }
}

impl ForestConfig {
    pub fn with_seed(seed: u64) -> Self {
        ForestConfig {
            seed,
            ..Self::default()
        }
    }

    /// Resolved `mtry` for `p` features, after validation.
    pub fn mtry_for(&self, p: usize) -> Result<usize> {
        if self.n_trees == 0 {
            return Err(Error::InvalidArgument("n_trees must be at least 1".into()));
        }
        if p == 0 {
            return Err(Error::InvalidArgument(
                "feature matrix has no columns".into(),
            ));
        }
        let m = self
            .mtry
            .unwrap_or_else(|| (p as f64).sqrt().ceil() as usize);
        if m == 0 || m > p {
            return Err(Error::InvalidArgument(format!(
                "mtry = {m} must lie in 1..={p}"
            )));
        }
        Ok(m)
    }
}

fn class_rows(rows: &[usize], labels: &[Label]) -> (Vec<usize>, Vec<usize>) {
    rows.iter().partition(|&&r| labels[r].is_relevant())
}

fn require_both(rel: usize, irr: usize) -> Result<()> {
    if rel == 0 || irr == 0 {
        return Err(Error::SingleClass(format!(
            "training rows hold {rel} relevant and {irr} irrelevant documents"
        )));
    }
    Ok(())
}

fn sample_balanced(rows: &[usize], labels: &[Label], rng: &mut ChaCha8Rng) -> Result<Vec<usize>> {
    let (rel, irr) = class_rows(rows, labels);
    require_both(rel.len(), irr.len())?;
    let n_min = rel.len().min(irr.len());
    let mut out = Vec::with_capacity(2 * n_min);
    for class in [&rel, &irr] {
        out.extend((0..n_min).map(|_| class[rng.random_range(0..class.len())]));
    }
    Ok(out)
}

/// Within-class bootstrap: `n_min` draws with replacement from each class.
pub fn balanced_sample(rows: &[usize], labels: &[Label], seed: u64) -> Result<Vec<usize>> {
    sample_balanced(rows, labels, &mut seed::rng(seed))
}

/// Draws the tree's sample and grows it, all from one seeded RNG.
pub fn train_tree(
    x: &FeatureMatrix,
    labels: &[Label],
    config: &ForestConfig,
    tree_seed: u64,
) -> Result<Tree> {
    assert_eq!(x.n_rows(), labels.len(), "one label per row");
    let mtry = config.mtry_for(x.n_features())?;
    let all: Vec<usize> = (0..x.n_rows()).collect();
    let mut rng = seed::rng(tree_seed);
    let sample = match config.balance {
        Balance::DownsampleMajority => sample_balanced(&all, labels, &mut rng)?,
        Balance::None => {
            let (rel, irr) = class_rows(&all, labels);
            require_both(rel.len(), irr.len())?;
            (0..all.len())
                .map(|_| rng.random_range(0..all.len()))
                .collect()
        }
    };
    Ok(grow_tree(x, labels, sample, config, mtry, &mut rng))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    pub config: ForestConfig,
    pub mtry: usize,
    pub n_features: usize,
    pub feature_names: Vec<String>,
    /// Training class sizes: `[relevant, irrelevant]`.
    pub class_counts: [usize; 2],
    pub tree_seeds: Vec<u64>,
    pub trees: Vec<Tree>,
}

/// Trains `config.n_trees` trees. Tree `i` uses the seed derived from
/// `(config.seed, i)`, so the result does not depend on thread count.
pub fn train_forest(
    x: &FeatureMatrix,
    labels: &[Label],
    config: &ForestConfig,
    feature_names: Vec<String>,
) -> Result<ForestModel> {
    if x.n_rows() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: x.n_rows(),
            actual: labels.len(),
        });
    }
    if feature_names.len() != x.n_features() {
        return Err(Error::DimensionMismatch {
            expected: x.n_features(),
            actual: feature_names.len(),
        });
    }
    let mtry = config.mtry_for(x.n_features())?;
    let rel = labels.iter().filter(|l| l.is_relevant()).count();
    require_both(rel, labels.len() - rel)?;
    let tree_seeds: Vec<u64> = (0..config.n_trees)
        .map(|i| seed::derive(config.seed, Stream::Tree, i as u64))
        .collect();

    let build = |&s: &u64| train_tree(x, labels, config, s);
    #[cfg(feature = "parallel")]
    let trees: Result<Vec<Tree>> = {
        use rayon::prelude::*;
        tree_seeds.par_iter().map(build).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let trees: Result<Vec<Tree>> = tree_seeds.iter().map(build).collect();

    Ok(ForestModel {
        config: config.clone(),
        mtry,
        n_features: x.n_features(),
        feature_names,
        class_counts: [rel, labels.len() - rel],
        tree_seeds,
        trees: trees?,
    })
}

impl ForestModel {
    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    /// Share of trees voting relevant.
    pub fn predict_proba(&self, row: &[f64]) -> Result<f64> {
        if row.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                actual: row.len(),
            });
        }
        let votes = self.trees.iter().filter(|t| t.votes_relevant(row)).count();
        Ok(votes as f64 / self.trees.len() as f64)
    }

    pub fn predict_proba_matrix(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        (0..x.n_rows())
            .map(|r| self.predict_proba(x.row(r)))
            .collect()
    }

    /// Relevant iff P̂ ≥ `cutoff`.
    pub fn classify(&self, row: &[f64], cutoff: f64) -> Result<Label> {
        let p = self.predict_proba(row)?;
        Ok(if p >= cutoff {
            Label::Relevant
        } else {
            Label::Irrelevant
        })
    }

    /// Splits per feature summed over all trees.
    pub fn split_counts(&self) -> Vec<usize> {
        let mut total = vec![0; self.n_features];
        for t in &self.trees {
            for (a, b) in total.iter_mut().zip(t.split_counts(self.n_features)) {
                *a += b;
            }
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(v: &[u8]) -> Vec<Label> {
        v.iter()
            .map(|&b| {
                if b == 1 {
                    Label::Relevant
                } else {
                    Label::Irrelevant
                }
            })
            .collect()
    }

    #[test]
    fn balanced_sample_counts() {
        let mut l = vec![Label::Relevant; 100];
        l.extend(vec![Label::Irrelevant; 1000]);
        let rows: Vec<usize> = (0..l.len()).collect();
        let s = balanced_sample(&rows, &l, 3).unwrap();
        assert_eq!(s.len(), 200);
        assert_eq!(s.iter().filter(|&&r| l[r].is_relevant()).count(), 100);
        assert_eq!(s, balanced_sample(&rows, &l, 3).unwrap());

        let l = labels(&[1, 1, 1, 1, 1, 0, 0, 0, 0, 0]);
        let s = balanced_sample(&(0..10).collect::<Vec<_>>(), &l, 9).unwrap();
        assert_eq!(s.len(), 10);
        assert_eq!(s.iter().filter(|&&r| l[r].is_relevant()).count(), 5);

        let l = vec![Label::Relevant; 4];
        assert!(matches!(
            balanced_sample(&[0, 1, 2, 3], &l, 1),
            Err(Error::SingleClass(_))
        ));
    }

    #[test]
    fn single_threshold_split() {
        let xs = [0.1, 0.2, 0.4, 0.45, 0.7, 0.8, 0.9];
        let x = FeatureMatrix::from_rows(1, &xs.iter().map(|&v| vec![v]).collect::<Vec<_>>());
        let l: Vec<Label> = xs
            .iter()
            .map(|&v| {
                if v > 0.5 {
                    Label::Relevant
                } else {
                    Label::Irrelevant
                }
            })
            .collect();
        let cfg = ForestConfig {
            mtry: Some(1),
            ..ForestConfig::default()
        };
        let tree = grow_tree(&x, &l, (0..xs.len()).collect(), &cfg, 1, &mut seed::rng(0));
        match tree.nodes[0] {
            Node::Split {
                feature, threshold, ..
            } => {
                assert_eq!(feature, 0);
                assert!(threshold > 0.45 && threshold < 0.7);
                assert!((threshold - 0.575).abs() < 1e-12);
            }
            _ => panic!("root must split"),
        }
        assert_eq!(tree.nodes.len(), 3);
        for (r, lab) in l.iter().enumerate() {
            assert_eq!(tree.votes_relevant(x.row(r)), lab.is_relevant());
        }
    }

    #[test]
    fn pure_and_inseparable_nodes_are_leaves() {
        let x = FeatureMatrix::from_rows(1, &[vec![1.0], vec![2.0]]);
        let cfg = ForestConfig::default();
        let t = grow_tree(&x, &labels(&[1, 1]), vec![0, 1], &cfg, 1, &mut seed::rng(0));
        assert_eq!(
            t.nodes,
            vec![Node::Leaf {
                relevant: 2,
                irrelevant: 0
            }]
        );

        let x = FeatureMatrix::from_rows(1, &[vec![1.0], vec![1.0]]);
        let t = grow_tree(&x, &labels(&[1, 0]), vec![0, 1], &cfg, 1, &mut seed::rng(0));
        assert_eq!(
            t.nodes,
            vec![Node::Leaf {
                relevant: 1,
                irrelevant: 1
            }]
        );
        // tie votes relevant
        assert!(t.votes_relevant(&[1.0]));
    }

    #[test]
    fn min_leaf_and_depth_limits() {
        let xs: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64]).collect();
        let l: Vec<Label> = (0..20)
            .map(|i| {
                if i % 2 == 0 {
                    Label::Relevant
                } else {
                    Label::Irrelevant
                }
            })
            .collect();
        let x = FeatureMatrix::from_rows(1, &xs);
        let cfg = ForestConfig {
            min_leaf: 3,
            ..ForestConfig::default()
        };
        let t = grow_tree(&x, &l, (0..20).collect(), &cfg, 1, &mut seed::rng(0));
        for n in &t.nodes {
            if let Node::Leaf {
                relevant,
                irrelevant,
            } = n
            {
                assert!(relevant + irrelevant >= 3);
            }
        }
        let cfg = ForestConfig {
            max_depth: Some(2),
            ..ForestConfig::default()
        };
        let t = grow_tree(&x, &l, (0..20).collect(), &cfg, 1, &mut seed::rng(0));
        assert!(t.depth() <= 2);
    }

    #[test]
    fn forest_size_and_vote_granularity() {
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|i| vec![i as f64, (i * 7 % 13) as f64])
            .collect();
        let l: Vec<Label> = (0..40)
            .map(|i| {
                if i >= 30 {
                    Label::Relevant
                } else {
                    Label::Irrelevant
                }
            })
            .collect();
        let x = FeatureMatrix::from_rows(2, &rows);
        let names = vec!["a".to_string(), "b".to_string()];
        let cfg = ForestConfig {
            n_trees: 7,
            seed: 11,
            ..ForestConfig::default()
        };
        let m = train_forest(&x, &l, &cfg, names.clone()).unwrap();
        assert_eq!(m.n_trees(), 7);
        for r in 0..40 {
            let p = m.predict_proba(x.row(r)).unwrap();
            assert_eq!((p * 7.0).round() / 7.0, p);
        }
        assert!(m.predict_proba(&[1.0]).is_err());

        let one = train_forest(
            &x,
            &l,
            &ForestConfig {
                n_trees: 1,
                ..cfg.clone()
            },
            names,
        )
        .unwrap();
        let single = train_tree(&x, &l, &one.config, one.tree_seeds[0]).unwrap();
        assert_eq!(one.trees[0], single);
        for r in 0..40 {
            let p = one.predict_proba(x.row(r)).unwrap();
            assert!(p == 0.0 || p == 1.0);
        }
    }

    #[test]
    fn classify_cutoff_rule() {
        let x = FeatureMatrix::from_rows(1, &[vec![0.0], vec![1.0]]);
        let l = labels(&[0, 1]);
        let cfg = ForestConfig {
            n_trees: 2,
            ..ForestConfig::default()
        };
        let m = train_forest(&x, &l, &cfg, vec!["f".into()]).unwrap();
        let p = m.predict_proba(&[1.0]).unwrap();
        assert_eq!(m.classify(&[1.0], p).unwrap(), Label::Relevant);
        if p < 1.0 {
            assert_eq!(m.classify(&[1.0], 1.0).unwrap(), Label::Irrelevant);
        }
    }

    #[test]
    fn config_validation() {
        let cfg = ForestConfig::default();
        assert_eq!(cfg.mtry_for(15).unwrap(), 4);
        assert_eq!(cfg.mtry_for(265).unwrap(), 17);
        assert!(ForestConfig {
            mtry: Some(3),
            ..cfg.clone()
        }
        .mtry_for(2)
        .is_err());
        assert!(ForestConfig { n_trees: 0, ..cfg }.mtry_for(2).is_err());
    }
}
