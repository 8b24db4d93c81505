//! Line-based text format for [`ForestModel`]. Floats are written in Rust's
//! shortest round-trip form, so load(save(m)) == m.
//!
//! ```text
//! litscreen-forest 1
//! n_trees 2
//! mtry auto 4
//! max_depth none
//! min_leaf 1
//! seed 7
//! balance downsample_majority
//! class_counts 90 910
//! features 15 cluster:hiv cluster:fsw ...
//! tree 0 1234567 3
//! S 2 0.5 1 2
//! L 10 3
//! L 1 40
//! ...
//! end
//! ```

use std::io::{BufRead, Write};

use crate::error::{Error, Result};

use super::{Balance, ForestConfig, ForestModel, Node, Tree};

const MAGIC: &str = "litscreen-forest 1";

impl ForestModel {
    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let c = &self.config;
        writeln!(out, "{MAGIC}")?;
        writeln!(out, "n_trees {}", c.n_trees)?;
        match c.mtry {
            Some(m) => writeln!(out, "mtry {m} {}", self.mtry)?,
            None => writeln!(out, "mtry auto {}", self.mtry)?,
        }
        match c.max_depth {
            Some(d) => writeln!(out, "max_depth {d}")?,
            None => writeln!(out, "max_depth none")?,
        }
        writeln!(out, "min_leaf {}", c.min_leaf)?;
        writeln!(out, "seed {}", c.seed)?;
        writeln!(out, "balance {}", c.balance.as_str())?;
        writeln!(
            out,
            "class_counts {} {}",
            self.class_counts[0], self.class_counts[1]
        )?;
        write!(out, "features {}", self.n_features)?;
        for name in &self.feature_names {
            write!(out, " {name}")?;
        }
        writeln!(out)?;
        for (i, (tree, s)) in self.trees.iter().zip(&self.tree_seeds).enumerate() {
            writeln!(out, "tree {i} {s} {}", tree.nodes.len())?;
            for n in &tree.nodes {
                match n {
                    Node::Split {
                        feature,
                        threshold,
                        left,
                        right,
                    } => writeln!(out, "S {feature} {threshold} {left} {right}")?,
                    Node::Leaf {
                        relevant,
                        irrelevant,
                    } => writeln!(out, "L {relevant} {irrelevant}")?,
                }
            }
        }
        writeln!(out, "end")
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_text(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("model text is ASCII")
    }

    pub fn read_text<R: BufRead>(reader: R) -> Result<ForestModel> {
        let mut lines = Lines {
            inner: reader.lines(),
            line: 0,
        };
        if lines.next()? != MAGIC {
            return Err(Error::ModelFormat(
                "not a litscreen forest (bad header)".into(),
            ));
        }
        let n_trees: usize = lines.field("n_trees")?.parse_one()?;
        let mtry_line = lines.field("mtry")?;
        let [given, resolved] = mtry_line.words::<2>()?;
        let mtry_cfg = if given == "auto" {
            None
        } else {
            Some(parse(given, lines.line)?)
        };
        let mtry: usize = parse(resolved, lines.line)?;
        let depth = lines.field("max_depth")?;
        let max_depth = if depth.0 == "none" {
            None
        } else {
            Some(depth.parse_one()?)
        };
        let min_leaf = lines.field("min_leaf")?.parse_one()?;
        let seed = lines.field("seed")?.parse_one()?;
        let bal = lines.field("balance")?;
        let balance: Balance = bal.0.parse().map_err(|e: String| lines.err(e))?;
        let cc = lines.field("class_counts")?;
        let [a, b] = cc.words::<2>()?;
        let class_counts = [parse(a, lines.line)?, parse(b, lines.line)?];
        let feats = lines.field("features")?;
        let mut it = feats.0.split(' ');
        let n_features: usize = parse(it.next().unwrap_or(""), lines.line)?;
        let feature_names: Vec<String> = it.map(String::from).collect();
        if feature_names.len() != n_features {
            return Err(lines.err(format!("expected {n_features} feature names")));
        }

        let mut trees = Vec::with_capacity(n_trees);
        let mut tree_seeds = Vec::with_capacity(n_trees);
        for i in 0..n_trees {
            let head = lines.field("tree")?;
            let [idx, s, n] = head.words::<3>()?;
            if parse::<usize>(idx, lines.line)? != i {
                return Err(lines.err(format!("expected tree {i}")));
            }
            tree_seeds.push(parse(s, lines.line)?);
            let n_nodes: usize = parse(n, lines.line)?;
            let mut nodes = Vec::with_capacity(n_nodes);
            for _ in 0..n_nodes {
                let l = lines.next()?;
                let w: Vec<&str> = l.split(' ').collect();
                let line = lines.line;
                let node = match w.as_slice() {
                    ["S", f, t, a, b] => Node::Split {
                        feature: parse(f, line)?,
                        threshold: parse(t, line)?,
                        left: parse(a, line)?,
                        right: parse(b, line)?,
                    },
                    ["L", r, i] => Node::Leaf {
                        relevant: parse(r, line)?,
                        irrelevant: parse(i, line)?,
                    },
                    _ => return Err(lines.err(format!("bad node {l:?}"))),
                };
                nodes.push(node);
            }
            validate_tree(&nodes, n_features).map_err(|m| lines.err(m))?;
            trees.push(Tree { nodes });
        }
        if lines.next()? != "end" {
            return Err(lines.err("expected end".into()));
        }
        let config = ForestConfig {
            n_trees,
            mtry: mtry_cfg,
            max_depth,
            min_leaf,
            seed,
            balance,
        };
        Ok(ForestModel {
            config,
            mtry,
            n_features,
            feature_names,
            class_counts,
            tree_seeds,
            trees,
        })
    }

    pub fn from_text(text: &str) -> Result<ForestModel> {
        Self::read_text(text.as_bytes())
    }
}

fn validate_tree(nodes: &[Node], n_features: usize) -> std::result::Result<(), String> {
    if nodes.is_empty() {
        return Err("tree has no nodes".into());
    }
    for (i, n) in nodes.iter().enumerate() {
        if let Node::Split {
            feature,
            left,
            right,
            ..
        } = n
        {
            let ok = (*feature as usize) < n_features
                && (*left as usize) > i
                && (*right as usize) > i
                && (*left as usize) < nodes.len()
                && (*right as usize) < nodes.len();
            if !ok {
                return Err(format!("node {i} has an out-of-range feature or child"));
            }
        }
    }
    Ok(())
}

fn parse<T: std::str::FromStr>(s: &str, line: u64) -> Result<T> {
    s.parse()
        .map_err(|_| Error::ModelFormat(format!("line {line}: cannot parse {s:?}")))
}

struct Field(String, u64);

impl Field {
    fn parse_one<T: std::str::FromStr>(&self) -> Result<T> {
        parse(&self.0, self.1)
    }

    fn words<const N: usize>(&self) -> Result<[&str; N]> {
        let w: Vec<&str> = self.0.split(' ').collect();
        w.try_into()
            .map_err(|_| Error::ModelFormat(format!("line {}: expected {N} values", self.1)))
    }
}

impl std::ops::Deref for Field {
    type Target = String;
    fn deref(&self) -> &String {
        &self.0
    }
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    line: u64,
}

impl<R: BufRead> Lines<R> {
    fn next(&mut self) -> Result<String> {
        self.line += 1;
        match self.inner.next() {
            Some(Ok(l)) => Ok(l),
            Some(Err(e)) => Err(Error::ModelFormat(format!("line {}: {e}", self.line))),
            None => Err(Error::ModelFormat("unexpected end of model".into())),
        }
    }

    /// Next line, which must be `key value...`; returns the value part.
    fn field(&mut self, key: &str) -> Result<Field> {
        let l = self.next()?;
        match l.split_once(' ') {
            Some((k, v)) if k == key => Ok(Field(v.to_string(), self.line)),
            _ => Err(self.err(format!("expected `{key} ...`"))),
        }
    }

    fn err(&self, msg: String) -> Error {
        Error::ModelFormat(format!("line {}: {msg}", self.line))
    }
}

#[cfg(test)]
mod tests {
    use super::super::{train_forest, FeatureMatrix};
    use super::*;
    use crate::corpus::Label;

    #[test]
    fn round_trip_is_exact() {
        let rows: Vec<Vec<f64>> = (0..60)
            .map(|i| vec![(i as f64).sqrt() / 3.0, ((i * 17) % 11) as f64 * 0.1])
            .collect();
        let l: Vec<Label> = (0..60)
            .map(|i| {
                if i % 5 == 0 {
                    Label::Relevant
                } else {
                    Label::Irrelevant
                }
            })
            .collect();
        let x = FeatureMatrix::from_rows(2, &rows);
        let cfg = ForestConfig {
            n_trees: 9,
            max_depth: Some(6),
            seed: 5,
            ..ForestConfig::default()
        };
        let m = train_forest(&x, &l, &cfg, vec!["cluster:a".into(), "token:b".into()]).unwrap();
        let text = m.to_text();
        let back = ForestModel::from_text(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn corrupt_files_are_rejected() {
        assert!(matches!(
            ForestModel::from_text("nope\n"),
            Err(Error::ModelFormat(_))
        ));
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let l: Vec<Label> = (0..10)
            .map(|i| {
                if i < 5 {
                    Label::Relevant
                } else {
                    Label::Irrelevant
                }
            })
            .collect();
        let m = train_forest(
            &FeatureMatrix::from_rows(1, &rows),
            &l,
            &ForestConfig {
                n_trees: 2,
                ..ForestConfig::default()
            },
            vec!["f".into()],
        )
        .unwrap();
        let text = m.to_text();
        assert!(ForestModel::from_text(&text.replace("\nend\n", "\n")).is_err());
        assert!(ForestModel::from_text(&text.replace("S 0 ", "S 9 ")).is_err());
    }
}
