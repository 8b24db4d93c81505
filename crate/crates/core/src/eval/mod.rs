//! Evaluation: ROC/PR curves and AUCs, workload reduction, cross-validation,
//! training-fraction sensitivity and the label-disagreement audit.

mod audit;
mod crossval;
mod curves;
mod report;
mod svg;
mod workload;

use serde::Serialize;

use crate::corpus::Label;

pub use audit::{audit_disagreements, write_audit_csv, Direction, Disagreement};
pub use crossval::{
    cross_validate, cross_validate_prepared, sensitivity_sweep, EvalOptions, FoldResult,
    SensitivityReport, SensitivityRow, DEFAULT_FRACTIONS,
};
pub use curves::{
    mann_whitney_auc, pr_curve, roc_curve, Curve, CurveKind, CurvePoint, PrIntegrator,
};
pub use report::{write_curve_csv, EvalReport, OperatingPoint};
pub use svg::{curves_svg, sensitivity_svg, Series};
pub use workload::{workload, Workload};

/// A document with its ground truth and predicted probability of relevance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoredDoc {
    pub doc_id: String,
    pub label: Label,
    pub p_hat: f64,
}

impl ScoredDoc {
    pub fn new(doc_id: impl Into<String>, label: Label, p_hat: f64) -> Self {
        ScoredDoc {
            doc_id: doc_id.into(),
            label,
            p_hat,
        }
    }
}

/// Binary confusion counts with relevant as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

impl Confusion {
    pub fn add(&mut self, truth: Label, predicted: Label) {
        match (truth, predicted) {
            (Label::Relevant, Label::Relevant) => self.tp += 1,
            (Label::Irrelevant, Label::Relevant) => self.fp += 1,
            (Label::Relevant, Label::Irrelevant) => self.fn_ += 1,
            (Label::Irrelevant, Label::Irrelevant) => self.tn += 1,
        }
    }

    /// Counts for the rule `Relevant iff p_hat >= cutoff`.
    pub fn at_cutoff(scored: &[ScoredDoc], cutoff: f64) -> Self {
        let mut c = Confusion::default();
        for d in scored {
            let pred = if d.p_hat >= cutoff {
                Label::Relevant
            } else {
                Label::Irrelevant
            };
            c.add(d.label, pred);
        }
        c
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn precision(&self) -> Option<f64> {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> Option<f64> {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn fpr(&self) -> Option<f64> {
        ratio(self.fp, self.fp + self.tn)
    }

    pub fn f1(&self) -> Option<f64> {
        ratio(2 * self.tp, 2 * self.tp + self.fp + self.fn_)
    }
}
