mod common;

use litscreen::corpus::Label;
use litscreen::provenance::RowSetId;
use litscreen::select::{assemble_features, rank_tokens, t_statistics, TFormula, TokenRanking};
use litscreen::vectorize::{CsrMatrix, TfidfMatrix, Vocabulary};
use proptest::prelude::*;

fn vocab_for(m: &TfidfMatrix) -> Vocabulary {
    let tokens: Vec<String> = (0..m.n_cols()).map(|c| format!("tok{c:02}")).collect();
    let df = m.matrix.column_nnz();
    Vocabulary::from_parts(tokens, df, m.n_rows()).unwrap()
}

fn scaled(m: &TfidfMatrix, c: f64) -> TfidfMatrix {
    TfidfMatrix {
        matrix: m.matrix.map_values(|_, v| v * c),
        idf: m.idf.clone(),
    }
}

fn ranks(r: &TokenRanking) -> Vec<(String, usize)> {
    let mut v: Vec<(String, usize)> = r
        .scores
        .iter()
        .map(|s| (s.token.clone(), s.abs_rank))
        .collect();
    v.sort();
    v
}

proptest! {
    #[test]
    fn welch_matches_direct_formula(seed in any::<u64>()) {
        let worst = common::t_oracle_case(&mut common::rng(seed), TFormula::Welch).unwrap();
        prop_assert!(worst <= 1e-12, "relative error {}", worst);
    }

    #[test]
    fn raw_matches_direct_formula(seed in any::<u64>()) {
        let worst = common::t_oracle_case(&mut common::rng(seed), TFormula::Raw).unwrap();
        prop_assert!(worst <= 1e-12, "relative error {}", worst);
    }

    /// Powers of two scale every entry exactly, so ranks must agree exactly.
    #[test]
    fn ranking_is_invariant_to_power_of_two_scaling(seed in any::<u64>(), exp in -20i32..20) {
        let (m, labels) = common::random_labeled_matrix(&mut common::rng(seed));
        let v = vocab_for(&m);
        let id = RowSetId::of(&(0..m.n_rows()).collect::<Vec<_>>());
        let a = rank_tokens(&m, &labels, &v, TFormula::Welch, id).unwrap();
        let b = rank_tokens(&scaled(&m, 2f64.powi(exp)), &labels, &v, TFormula::Welch, id).unwrap();
        prop_assert_eq!(ranks(&a), ranks(&b));
    }

    /// For any c > 0 the ranking agrees wherever |t| values are not within
    /// rounding of each other.
    #[test]
    fn ranking_is_invariant_to_positive_scaling(seed in any::<u64>(), c in 1e-6f64..1e6) {
        let (m, labels) = common::random_labeled_matrix(&mut common::rng(seed));
        let v = vocab_for(&m);
        let id = RowSetId::of(&(0..m.n_rows()).collect::<Vec<_>>());
        let a = rank_tokens(&m, &labels, &v, TFormula::Welch, id).unwrap();
        let b = rank_tokens(&scaled(&m, c), &labels, &v, TFormula::Welch, id).unwrap();
        let t: Vec<f64> = a.scores.iter().map(|s| s.t_stat.abs()).collect();
        let separated = |i: usize| {
            let close = |j: usize| {
                let (x, y) = (t[i], t[j]);
                x == y || (x - y).abs() <= 1e-9 * x.abs().max(y.abs())
            };
            (i == 0 || !close(i - 1)) && (i + 1 == t.len() || !close(i + 1))
        };
        let rank_b: std::collections::HashMap<&str, usize> = b.scores.iter().map(|s| (s.token.as_str(), s.abs_rank)).collect();
        for (i, s) in a.scores.iter().enumerate() {
            if separated(i) && t[i].is_finite() {
                prop_assert_eq!(s.abs_rank, rank_b[s.token.as_str()]);
            }
        }
    }
}

fn fixture() -> (TfidfMatrix, Vec<Label>) {
    let rows = vec![
        vec![3.0, 0.0, 1.0],
        vec![2.0, 1.0, 0.0],
        vec![0.0, 1.0, 1.0],
        vec![0.5, 0.0, 2.0],
        vec![0.0, 2.0, 0.0],
        vec![4.0, 0.0, 0.0],
    ];
    let labels = vec![
        Label::Relevant,
        Label::Relevant,
        Label::Irrelevant,
        Label::Irrelevant,
        Label::Irrelevant,
        Label::Relevant,
    ];
    (
        TfidfMatrix {
            matrix: CsrMatrix::from_dense(3, &rows),
            idf: vec![1.0; 3],
        },
        labels,
    )
}

#[test]
fn validation_rows_change_the_statistics() {
    let (m, labels) = fixture();
    let train = [0usize, 1, 2, 3];
    let sub = TfidfMatrix {
        matrix: m.matrix.select_rows(&train),
        idf: m.idf.clone(),
    };
    let sub_labels: Vec<Label> = train.iter().map(|&r| labels[r]).collect();
    let t_train = t_statistics(&sub, &sub_labels, TFormula::Welch).unwrap();
    let t_all = t_statistics(&m, &labels, TFormula::Welch).unwrap();
    assert_ne!(t_train, t_all);
}

#[test]
fn ranking_fitted_on_other_rows_is_refused() {
    let (m, labels) = fixture();
    let v = vocab_for(&m);
    let all = RowSetId::of(&[0, 1, 2, 3, 4, 5]);
    let ranking = rank_tokens(&m, &labels, &v, TFormula::Welch, all).unwrap();
    let clusters = TfidfMatrix {
        matrix: CsrMatrix::from_dense(1, &vec![vec![0.0]; 6]),
        idf: vec![0.0],
    };
    let names = vec!["c".to_string()];
    let guard = assemble_features(
        &clusters,
        &m,
        &ranking,
        2,
        &[false; 3],
        names.clone(),
        RowSetId::of(&[0, 1, 2, 3]),
    );
    assert!(guard.is_err());
    let (features, x) =
        assemble_features(&clusters, &m, &ranking, 2, &[false; 3], names, all).unwrap();
    assert_eq!(features.tokens.len(), 2);
    assert_eq!(x.n_features(), 3);
}
