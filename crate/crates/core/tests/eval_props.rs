mod common;

use litscreen::corpus::Label;
use litscreen::eval::{
    cross_validate, pr_curve, roc_curve, workload, EvalOptions, PrIntegrator, ScoredDoc,
};
use litscreen::forest::ForestConfig;
use litscreen::pipeline::{Recipe, Resources};
use litscreen::synthetic::{generate, SyntheticConfig};
use proptest::prelude::*;
use rand::seq::SliceRandom;

fn mapped(scored: &[ScoredDoc], f: impl Fn(f64) -> f64) -> Vec<ScoredDoc> {
    scored
        .iter()
        .map(|d| ScoredDoc::new(d.doc_id.clone(), d.label, f(d.p_hat)))
        .collect()
}

proptest! {
    #[test]
    fn roc_auc_counts_pairs(seed in any::<u64>()) {
        let err = common::auc_oracle_case(&mut common::rng(seed)).unwrap();
        prop_assert!(err <= 1e-9, "deviation {}", err);
    }

    #[test]
    fn curves_ignore_input_order(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let scored = common::random_scored(&mut rng);
        let mut shuffled = scored.clone();
        shuffled.shuffle(&mut rng);
        for pr in [PrIntegrator::Trapezoid, PrIntegrator::AveragePrecision] {
            let (a, b) = (pr_curve(&scored, pr).unwrap(), pr_curve(&shuffled, pr).unwrap());
            prop_assert_eq!(common::xy(&a), common::xy(&b));
            prop_assert_eq!(a.auc, b.auc);
        }
        let (a, b) = (roc_curve(&scored).unwrap(), roc_curve(&shuffled).unwrap());
        prop_assert_eq!(common::xy(&a), common::xy(&b));
        prop_assert_eq!(a.auc, b.auc);
    }

    #[test]
    fn curves_ignore_increasing_score_maps(seed in any::<u64>()) {
        let scored = common::random_scored(&mut common::rng(seed));
        let squashed = mapped(&scored, |p| (3.0 * p).exp() / 7.0 - 1.0);
        let (a, b) = (roc_curve(&scored).unwrap(), roc_curve(&squashed).unwrap());
        prop_assert_eq!(common::xy(&a), common::xy(&b));
        prop_assert_eq!(a.auc, b.auc);
        let (a, b) = (pr_curve(&scored, PrIntegrator::Trapezoid).unwrap(), pr_curve(&squashed, PrIntegrator::Trapezoid).unwrap());
        prop_assert_eq!(common::xy(&a), common::xy(&b));
        prop_assert_eq!(a.auc, b.auc);
    }

    #[test]
    fn workload_arithmetic(seed in any::<u64>(), target in 0.0f64..=1.0) {
        let scored = common::random_scored(&mut common::rng(seed));
        let w = workload(&scored, target).unwrap();
        let n = scored.len();
        let pos = scored.iter().filter(|d| d.label.is_relevant()).count();
        // The unflagged share, rounded once.
        prop_assert_eq!(w.reading_reduction, (n - w.flagged_count) as f64 / n as f64);
        prop_assert!((w.reading_reduction - (1.0 - w.flagged_count as f64 / n as f64)).abs() <= 1e-15);
        prop_assert!(w.recall_at >= target);
        let flagged_rel = scored
            .iter()
            .filter(|d| d.label.is_relevant() && w.cutoff.is_some_and(|c| d.p_hat >= c))
            .count();
        prop_assert!(flagged_rel as f64 >= target * pos as f64 - 1e-9);
        let flagged = scored.iter().filter(|d| w.cutoff.is_some_and(|c| d.p_hat >= c)).count();
        prop_assert_eq!(flagged, w.flagged_count);
    }
}

#[test]
fn worked_workload_example() {
    // 10 000 documents, 1 000 relevant; 800 relevant and 1 200 irrelevant
    // score 0.9, the rest 0.1.
    let mut scored = Vec::new();
    for i in 0..10_000 {
        let (label, p) = match i {
            0..800 => (Label::Relevant, 0.9),
            800..1000 => (Label::Relevant, 0.1),
            1000..2200 => (Label::Irrelevant, 0.9),
            _ => (Label::Irrelevant, 0.1),
        };
        scored.push(ScoredDoc::new(format!("d{i:05}"), label, p));
    }
    let w = workload(&scored, 0.8).unwrap();
    assert_eq!(w.flagged_count, 2000);
    assert_eq!(w.reading_reduction, 0.8);
    assert_eq!(w.precision_at, Some(0.4));
}

#[test]
fn model3_without_tokens_is_model2() {
    let corpus = generate(&SyntheticConfig {
        n_docs: 400,
        ..SyntheticConfig::with_seed(9)
    });
    let res = Resources::bundled();
    let mut opts = EvalOptions::new(4);
    opts.pipeline.forest = ForestConfig {
        n_trees: 40,
        ..ForestConfig::with_seed(0)
    };
    let two = cross_validate(&corpus, Recipe::Model2, &res, &opts).unwrap();
    let three = cross_validate(&corpus, Recipe::Model3 { n_top: 0 }, &res, &opts).unwrap();
    assert_eq!(two.scores, three.scores);
    assert_eq!(two.auc_roc, three.auc_roc);
    assert_eq!(two.auc_pr, three.auc_pr);
    assert_eq!(
        common::xy(two.roc.as_ref().unwrap()),
        common::xy(three.roc.as_ref().unwrap())
    );
}
