use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::Label;

use super::{FeatureMatrix, ForestConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Node {
    /// Rows with `x[feature] <= threshold` go to `left`.
    Split {
        feature: u32,
        threshold: f64,
        left: u32,
        right: u32,
    },
    Leaf {
        relevant: u32,
        irrelevant: u32,
    },
}

impl Node {
    /// Majority class of a leaf; ties vote relevant.
    pub fn votes_relevant(relevant: u32, irrelevant: u32) -> bool {
        relevant >= irrelevant
    }
}

/// A classification tree stored as a flat node array with the root at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    fn leaf_of(&self, row: &[f64]) -> &Node {
        let mut i = 0usize;
        loop {
            match &self.nodes[i] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if row[*feature as usize] <= *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
                leaf => return leaf,
            }
        }
    }

    pub fn votes_relevant(&self, row: &[f64]) -> bool {
        match self.leaf_of(row) {
            Node::Leaf {
                relevant,
                irrelevant,
            } => Node::votes_relevant(*relevant, *irrelevant),
            Node::Split { .. } => unreachable!(),
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Split { left, right, .. } => {
                    1 + go(nodes, left as usize).max(go(nodes, right as usize))
                }
                Node::Leaf { .. } => 0,
            }
        }
        go(&self.nodes, 0)
    }

    /// Number of splits on each feature.
    pub fn split_counts(&self, n_features: usize) -> Vec<usize> {
        let mut c = vec![0; n_features];
        for n in &self.nodes {
            if let Node::Split { feature, .. } = n {
                c[*feature as usize] += 1;
            }
        }
        c
    }
}

struct Best {
    feature: usize,
    threshold: f64,
    score: f64,
}

/// Grows a CART tree on `sample` (row indices into `x`, repeats allowed).
///
/// At each node up to `mtry` features are drawn without replacement; features
/// constant within the node do not count towards `mtry`. The split maximizes
/// `Σ_children (r² + i²) / n`, which is the same as minimizing the weighted
/// Gini impurity.
pub fn grow_tree(
    x: &FeatureMatrix,
    labels: &[Label],
    mut sample: Vec<usize>,
    config: &ForestConfig,
    mtry: usize,
    rng: &mut ChaCha8Rng,
) -> Tree {
    let p = x.n_features();
    let min_leaf = config.min_leaf.max(1);
    let mut nodes = vec![Node::Leaf {
        relevant: 0,
        irrelevant: 0,
    }];
    let mut stack: Vec<(usize, usize, usize, usize)> = vec![(0, 0, sample.len(), 0)];
    let mut features: Vec<usize> = (0..p).collect();
    let mut buf: Vec<(f64, bool)> = Vec::with_capacity(sample.len());

    while let Some((id, lo, hi, depth)) = stack.pop() {
        let rows = &sample[lo..hi];
        let n = rows.len();
        let rel = rows.iter().filter(|&&r| labels[r].is_relevant()).count();
        let leaf = Node::Leaf {
            relevant: rel as u32,
            irrelevant: (n - rel) as u32,
        };
        let at_depth_cap = config.max_depth.is_some_and(|d| depth >= d);
        if rel == 0 || rel == n || n < 2 * min_leaf || at_depth_cap {
            nodes[id] = leaf;
            continue;
        }

        let mut best: Option<Best> = None;
        let mut tried = 0;
        let mut drawn = 0;
        while tried < mtry && drawn < p {
            let j = rng.random_range(drawn..p);
            features.swap(drawn, j);
            let f = features[drawn];
            drawn += 1;

            buf.clear();
            buf.extend(rows.iter().map(|&r| (x.get(r, f), labels[r].is_relevant())));
            buf.sort_by(|a, b| a.0.total_cmp(&b.0));
            if buf[0].0 == buf[n - 1].0 {
                continue;
            }
            tried += 1;

            let (tot_r, tot_i) = (rel as f64, (n - rel) as f64);
            let (mut lr, mut li) = (0.0f64, 0.0f64);
            for i in 0..n - 1 {
                if buf[i].1 {
                    lr += 1.0;
                } else {
                    li += 1.0;
                }
                let (a, b) = (buf[i].0, buf[i + 1].0);
                let nl = i + 1;
                if a == b || nl < min_leaf || n - nl < min_leaf {
                    continue;
                }
                let (rr, ri) = (tot_r - lr, tot_i - li);
                let score = (lr * lr + li * li) / nl as f64 + (rr * rr + ri * ri) / (n - nl) as f64;
                if best.as_ref().is_none_or(|b| score > b.score) {
                    let mut t = a + (b - a) / 2.0;
                    if t >= b {
                        t = a;
                    }
                    best = Some(Best {
                        feature: f,
                        threshold: t,
                        score,
                    });
                }
            }
        }

        let Some(best) = best else {
            nodes[id] = leaf;
            continue;
        };
        let seg = &mut sample[lo..hi];
        let mut left: Vec<usize> = Vec::with_capacity(n);
        let mut right: Vec<usize> = Vec::with_capacity(n);
        for &r in seg.iter() {
            if x.get(r, best.feature) <= best.threshold {
                left.push(r);
            } else {
                right.push(r);
            }
        }
        let mid = lo + left.len();
        seg[..left.len()].copy_from_slice(&left);
        seg[left.len()..].copy_from_slice(&right);

        let l = nodes.len();
        nodes.push(leaf);
        nodes.push(leaf);
        nodes[id] = Node::Split {
            feature: best.feature as u32,
            threshold: best.threshold,
            left: l as u32,
            right: (l + 1) as u32,
        };
        stack.push((l + 1, mid, hi, depth + 1));
        stack.push((l, lo, mid, depth + 1));
    }
    Tree { nodes }
}
