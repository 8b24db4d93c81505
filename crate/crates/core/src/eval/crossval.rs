use serde::Serialize;

use crate::boolquery::{boolean_point, classify_boolean};
use crate::corpus::{stratified_kfold, subsample_indices, Corpus, Label};
use crate::error::{Error, Result};
use crate::pipeline::{pooled_ranking, train, PipelineConfig, Prepared, Recipe, Resources};
use crate::seed::{self, Stream};

use super::curves::{pr_curve, roc_curve, PrIntegrator};
use super::report::{EvalReport, OperatingPoint};
use super::workload::workload;
use super::ScoredDoc;

/// The default grid of training fractions.
pub const DEFAULT_FRACTIONS: [f64; 8] = [0.01, 0.02, 0.05, 0.10, 0.20, 0.40, 0.60, 0.80];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalOptions {
    pub k: usize,
    /// Master seed for folds and forests; the pipeline's forest seed is
    /// replaced by one derived from this and the fold index.
    pub seed: u64,
    pub target_recall: f64,
    pub cutoffs: Vec<f64>,
    pub pr_integrator: PrIntegrator,
    pub pipeline: PipelineConfig,
}

impl EvalOptions {
    pub fn new(seed: u64) -> Self {
        EvalOptions {
            k: 5,
            seed,
            target_recall: 0.8,
            cutoffs: vec![0.5],
            pr_integrator: PrIntegrator::Trapezoid,
            pipeline: PipelineConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoldResult {
    pub fold: usize,
    pub n_train: usize,
    pub n_validation: usize,
    pub forest_seed: u64,
    pub auc_roc: Option<f64>,
    pub auc_pr: Option<f64>,
    pub selected_tokens: Vec<String>,
}

fn labeled(corpus: &Corpus) -> Result<Vec<Label>> {
    corpus.require_labeled()?;
    corpus.labels()
}

/// k-fold cross-validation of one recipe. Model 1 needs no training and is
/// scored once on the full labeled corpus.
pub fn cross_validate(
    corpus: &Corpus,
    recipe: Recipe,
    resources: &Resources,
    opts: &EvalOptions,
) -> Result<EvalReport> {
    if recipe == Recipe::Model1 {
        return evaluate_boolean(corpus, resources, opts);
    }
    let prepared = Prepared::new(corpus, &resources.lemmas);
    cross_validate_prepared(corpus, &prepared, recipe, resources, opts)
}

/// As [`cross_validate`], reusing already normalized text.
pub fn cross_validate_prepared(
    corpus: &Corpus,
    prepared: &Prepared,
    recipe: Recipe,
    resources: &Resources,
    opts: &EvalOptions,
) -> Result<EvalReport> {
    if recipe == Recipe::Model1 {
        return evaluate_boolean(corpus, resources, opts);
    }
    let labels = labeled(corpus)?;
    let plan = stratified_kfold(corpus, opts.k, opts.seed)?;
    let pooled = if opts.pipeline.pooled_selection && recipe.n_top() > 0 {
        Some(pooled_ranking(prepared, &opts.pipeline)?)
    } else {
        None
    };

    let mut scores: Vec<ScoredDoc> = Vec::with_capacity(corpus.len());
    let mut folds = Vec::with_capacity(opts.k);
    let mut notes = Vec::new();
    for fold in 0..opts.k {
        let train_rows = plan.training(fold);
        let val_rows = plan.validation(fold);
        let mut config = opts.pipeline.clone();
        config.forest.seed = seed::derive(opts.seed, Stream::Forest, fold as u64);
        let model = train(
            prepared,
            &train_rows,
            recipe,
            &config,
            resources,
            pooled.as_ref(),
        )?;
        for w in &model.fitted.warnings {
            notes.push(format!("fold {fold}: {w}"));
        }
        let val_seqs: Vec<_> = val_rows.iter().map(|&r| prepared.seqs[r].clone()).collect();
        let p = model.score(&val_seqs)?;
        let fold_scores: Vec<ScoredDoc> = val_rows
            .iter()
            .zip(p)
            .map(|(&r, p_hat)| ScoredDoc::new(corpus.get(r).id.clone(), labels[r], p_hat))
            .collect();
        folds.push(FoldResult {
            fold,
            n_train: train_rows.len(),
            n_validation: val_rows.len(),
            forest_seed: config.forest.seed,
            auc_roc: roc_curve(&fold_scores).ok().map(|c| c.auc),
            auc_pr: pr_curve(&fold_scores, opts.pr_integrator)
                .ok()
                .map(|c| c.auc),
            selected_tokens: model.fitted.features.tokens.clone(),
        });
        scores.extend(fold_scores);
    }
    if opts.pipeline.pooled_selection && recipe.n_top() > 0 {
        notes.push("tokens ranked once on all rows (pooled selection): validation rows influenced feature choice".into());
    }

    let roc = roc_curve(&scores)?;
    let pr = pr_curve(&scores, opts.pr_integrator)?;
    let operating_points = opts
        .cutoffs
        .iter()
        .map(|&c| OperatingPoint::at(&scores, c))
        .collect();
    let wl = workload(&scores, opts.target_recall)?;
    Ok(EvalReport {
        model_id: recipe.id(),
        recipe: recipe.to_string(),
        seed: opts.seed,
        k: opts.k,
        n_docs: corpus.len(),
        n_relevant: labels.iter().filter(|l| l.is_relevant()).count(),
        evaluation: format!(
            "{}-fold stratified cross-validation; curves pool all validation scores",
            opts.k
        ),
        auc_roc: Some(roc.auc),
        auc_pr: Some(pr.auc),
        pr_integrator: opts.pr_integrator,
        roc: Some(roc),
        pr: Some(pr),
        operating_points,
        workload: Some(wl),
        folds,
        boolean: None,
        notes,
        scores,
    })
}

fn evaluate_boolean(
    corpus: &Corpus,
    resources: &Resources,
    opts: &EvalOptions,
) -> Result<EvalReport> {
    let labels = labeled(corpus)?;
    let point = boolean_point(corpus, &resources.query)?;
    let scores: Vec<ScoredDoc> = corpus
        .documents()
        .iter()
        .zip(&labels)
        .map(|(d, &l)| {
            let p = if classify_boolean(d, &resources.query).is_relevant() {
                1.0
            } else {
                0.0
            };
            ScoredDoc::new(d.id.clone(), l, p)
        })
        .collect();
    Ok(EvalReport {
        model_id: Recipe::Model1.id(),
        recipe: Recipe::Model1.to_string(),
        seed: opts.seed,
        k: opts.k,
        n_docs: corpus.len(),
        n_relevant: labels.iter().filter(|l| l.is_relevant()).count(),
        evaluation: "full labeled corpus; the Boolean query has nothing to train, so folds would all give the same answer"
            .into(),
        auc_roc: None,
        auc_pr: None,
        pr_integrator: opts.pr_integrator,
        roc: None,
        pr: None,
        operating_points: vec![OperatingPoint::at(&scores, 1.0)],
        workload: None,
        folds: Vec::new(),
        boolean: Some(point),
        notes: vec!["no AUC: a deterministic classifier yields a single operating point, not a curve".into()],
        scores,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityRow {
    pub fraction: f64,
    pub replicates: usize,
    pub failed: usize,
    pub mean_auc_roc: Option<f64>,
    pub mean_auc_pr: Option<f64>,
    pub auc_roc: Vec<f64>,
    pub auc_pr: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityReport {
    pub model_id: String,
    pub seed: u64,
    pub rows: Vec<SensitivityRow>,
    pub failures: Vec<String>,
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Trains on stratified subsamples of each size and evaluates on the rest.
/// A replicate whose training or held-out part lacks a class is counted as
/// failed and left out of the means.
pub fn sensitivity_sweep(
    corpus: &Corpus,
    recipe: Recipe,
    fractions: &[f64],
    replicates: usize,
    resources: &Resources,
    opts: &EvalOptions,
) -> Result<SensitivityReport> {
    if recipe == Recipe::Model1 {
        return Err(Error::InvalidArgument(
            "model1 is not trained, so training-fraction sensitivity does not apply".into(),
        ));
    }
    if replicates == 0 {
        return Err(Error::InvalidArgument(
            "replicates must be at least 1".into(),
        ));
    }
    let labels = labeled(corpus)?;
    let prepared = Prepared::new(corpus, &resources.lemmas);
    let mut rows = Vec::with_capacity(fractions.len());
    let mut failures = Vec::new();
    for (fi, &fraction) in fractions.iter().enumerate() {
        let mut roc = Vec::new();
        let mut pr = Vec::new();
        for rep in 0..replicates {
            let index = ((fi as u64) << 32) | rep as u64;
            let outcome = (|| -> Result<(f64, f64)> {
                let (train_rows, held) = subsample_indices(
                    corpus,
                    fraction,
                    seed::derive(opts.seed, Stream::Subsample, index),
                )?;
                let mut config = opts.pipeline.clone();
                config.forest.seed = seed::derive(opts.seed, Stream::Forest, (1 << 63) | index);
                let model = train(&prepared, &train_rows, recipe, &config, resources, None)?;
                let seqs: Vec<_> = held.iter().map(|&r| prepared.seqs[r].clone()).collect();
                let p = model.score(&seqs)?;
                let scored: Vec<ScoredDoc> = held
                    .iter()
                    .zip(p)
                    .map(|(&r, p_hat)| ScoredDoc::new(corpus.get(r).id.clone(), labels[r], p_hat))
                    .collect();
                Ok((
                    roc_curve(&scored)?.auc,
                    pr_curve(&scored, opts.pr_integrator)?.auc,
                ))
            })();
            match outcome {
                Ok((a, b)) => {
                    roc.push(a);
                    pr.push(b);
                }
                Err(e) if e.is_degenerate() => {
                    failures.push(format!("fraction {fraction}, replicate {rep}: {e}"))
                }
                Err(e) => return Err(e),
            }
        }
        rows.push(SensitivityRow {
            fraction,
            replicates,
            failed: replicates - roc.len(),
            mean_auc_roc: mean(&roc),
            mean_auc_pr: mean(&pr),
            auc_roc: roc,
            auc_pr: pr,
        });
    }
    Ok(SensitivityReport {
        model_id: recipe.id(),
        seed: opts.seed,
        rows,
        failures,
    })
}
