//! Brute-force references and random fixtures shared by the property,
//! oracle and acceptance suites.
#![allow(dead_code)]

use litscreen::corpus::Label;
use litscreen::eval::ScoredDoc;
use litscreen::select::TFormula;
use litscreen::textprep::TokenSequence;
use litscreen::vectorize::{build_vocab, count_matrix, tfidf, CsrMatrix, TfidfMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// |a - b| / |b|, with exact agreement required when b is 0 or infinite.
pub fn rel_err(a: f64, b: f64) -> f64 {
    if b == 0.0 || b.is_infinite() {
        if a == b {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (a - b).abs() / b.abs()
    }
}

/// Random token sequences over at most 30 token types; at most 20 docs,
/// the first of which is non-empty.
pub fn random_seqs(rng: &mut ChaCha8Rng) -> Vec<TokenSequence> {
    let d = rng.random_range(1..=20);
    let p = rng.random_range(1..=30);
    (0..d)
        .map(|i| {
            let len = rng.random_range(usize::from(i == 0)..=25);
            let tokens = (0..len)
                .map(|_| format!("t{:02}", rng.random_range(0..p)))
                .collect();
            TokenSequence::new(format!("d{i}"), tokens)
        })
        .collect()
}

/// Largest deviation between the sparse TF-IDF pipeline and a dense
/// recomputation on one random corpus. Counts and document frequencies must
/// agree exactly; the returned value is the worst relative error of the
/// real-valued entries.
pub fn tfidf_oracle_case(rng: &mut ChaCha8Rng) -> Result<f64, String> {
    let seqs = random_seqs(rng);
    let vocab = build_vocab(&seqs, 1).map_err(|e| e.to_string())?;
    let counts = count_matrix(&seqs, &vocab);
    let weights = tfidf(&counts).map_err(|e| e.to_string())?;

    let n = seqs.len();
    let mut types: Vec<&String> = seqs.iter().flat_map(|s| &s.tokens).collect();
    types.sort();
    types.dedup();
    if types.len() != vocab.len() {
        return Err(format!(
            "vocabulary has {} tokens, expected {}",
            vocab.len(),
            types.len()
        ));
    }
    let mut worst = 0.0f64;
    for (j, tok) in types.iter().enumerate() {
        if vocab.token(j as u32) != tok.as_str() {
            return Err(format!(
                "column {j} is {:?}, expected {tok:?}",
                vocab.token(j as u32)
            ));
        }
        let tf: Vec<u32> = seqs
            .iter()
            .map(|s| s.tokens.iter().filter(|t| *t == *tok).count() as u32)
            .collect();
        let df = tf.iter().filter(|&&c| c > 0).count();
        if vocab.df(j as u32) as usize != df {
            return Err(format!(
                "df of {tok} is {}, expected {df}",
                vocab.df(j as u32)
            ));
        }
        let idf = if df == n {
            0.0
        } else {
            (n as f64 / df as f64).ln()
        };
        worst = worst.max(rel_err(weights.idf[j], idf));
        for (d, &c) in tf.iter().enumerate() {
            if counts.get(d, j) != c {
                return Err(format!(
                    "count[{d}][{j}] is {}, expected {c}",
                    counts.get(d, j)
                ));
            }
            worst = worst.max(rel_err(weights.get(d, j), c as f64 * idf));
        }
    }
    Ok(worst)
}

/// Random sparse non-negative matrix with at least one row of each class.
pub fn random_labeled_matrix(rng: &mut ChaCha8Rng) -> (TfidfMatrix, Vec<Label>) {
    let d = rng.random_range(2..=20);
    let p = rng.random_range(1..=20);
    let rows: Vec<Vec<f64>> = (0..d)
        .map(|_| {
            (0..p)
                .map(|_| {
                    if rng.random_bool(0.5) {
                        0.0
                    } else {
                        rng.random_range(0.0..5.0)
                    }
                })
                .collect()
        })
        .collect();
    let mut labels: Vec<Label> = (0..d)
        .map(|_| {
            if rng.random_bool(0.3) {
                Label::Relevant
            } else {
                Label::Irrelevant
            }
        })
        .collect();
    labels[0] = Label::Relevant;
    labels[1] = Label::Irrelevant;
    let matrix = CsrMatrix::from_dense(p, &rows);
    (
        TfidfMatrix {
            matrix,
            idf: vec![1.0; p],
        },
        labels,
    )
}

/// Direct evaluation of the statistic from a dense column.
pub fn t_reference(column: &[f64], labels: &[Label], formula: TFormula) -> f64 {
    let stats = |rel: bool| {
        let xs: Vec<f64> = column
            .iter()
            .zip(labels)
            .filter(|(_, l)| l.is_relevant() == rel)
            .map(|(v, _)| *v)
            .collect();
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = if xs.len() < 2 {
            0.0
        } else {
            xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
        };
        (n, mean, var)
    };
    let (n1, m1, v1) = stats(true);
    let (n0, m0, v0) = stats(false);
    let se2 = v1 / n1 + v0 / n0;
    if se2 == 0.0 {
        return if m1 == m0 {
            0.0
        } else {
            (m1 - m0).signum() * f64::INFINITY
        };
    }
    match formula {
        TFormula::Welch => (m1 - m0) / se2.sqrt(),
        TFormula::Raw => (m1 - m0) / se2,
    }
}

/// Worst relative error of every column's t over one random matrix.
pub fn t_oracle_case(rng: &mut ChaCha8Rng, formula: TFormula) -> Result<f64, String> {
    let (m, labels) = random_labeled_matrix(rng);
    let t = litscreen::select::t_statistics(&m, &labels, formula).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for (c, &tc) in t.iter().enumerate() {
        let col: Vec<f64> = (0..m.n_rows()).map(|r| m.get(r, c)).collect();
        worst = worst.max(rel_err(tc, t_reference(&col, &labels, formula)));
    }
    Ok(worst)
}

/// Random scores with ties, both classes present, n ≤ 200.
pub fn random_scored(rng: &mut ChaCha8Rng) -> Vec<ScoredDoc> {
    let n = rng.random_range(2..=200);
    let levels = rng.random_range(1..=50);
    let mut v: Vec<ScoredDoc> = (0..n)
        .map(|i| {
            let label = if rng.random_bool(0.3) {
                Label::Relevant
            } else {
                Label::Irrelevant
            };
            let p = rng.random_range(0..=levels) as f64 / levels as f64;
            ScoredDoc::new(format!("d{i:03}"), label, p)
        })
        .collect();
    v[0].label = Label::Relevant;
    v[1].label = Label::Irrelevant;
    v
}

/// Pair-counting AUC written independently of the library.
pub fn auc_pairs(scored: &[ScoredDoc]) -> f64 {
    let mut num = 0.0;
    let mut pairs = 0.0;
    for a in scored.iter().filter(|d| d.label.is_relevant()) {
        for b in scored.iter().filter(|d| !d.label.is_relevant()) {
            pairs += 1.0;
            if a.p_hat > b.p_hat {
                num += 1.0;
            } else if a.p_hat == b.p_hat {
                num += 0.5;
            }
        }
    }
    num / pairs
}

pub fn auc_oracle_case(rng: &mut ChaCha8Rng) -> Result<f64, String> {
    let scored = random_scored(rng);
    let curve = litscreen::eval::roc_curve(&scored).map_err(|e| e.to_string())?;
    Ok((curve.auc - auc_pairs(&scored)).abs())
}

/// Runs `case` with seeds 0..n and returns the worst result.
pub fn worst_over(
    n: u64,
    base: u64,
    mut case: impl FnMut(&mut ChaCha8Rng) -> Result<f64, String>,
) -> Result<f64, String> {
    let mut worst = 0.0f64;
    for i in 0..n {
        let mut r = rng(base.wrapping_mul(1_000_003).wrapping_add(i));
        worst = worst.max(case(&mut r).map_err(|e| format!("case {i}: {e}"))?);
    }
    Ok(worst)
}

/// (x, y) points of a curve, without cutoffs.
pub fn xy(curve: &litscreen::eval::Curve) -> Vec<(f64, f64)> {
    curve.points.iter().map(|p| (p.x, p.y)).collect()
}
