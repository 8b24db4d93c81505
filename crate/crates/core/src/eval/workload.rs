use serde::Serialize;

use crate::error::{Error, Result};

use super::ScoredDoc;

/// How much reading a cutoff saves while keeping a target recall.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Workload {
    pub target_recall: f64,
    /// `None` when nothing needs to be flagged (target recall 0).
    pub cutoff: Option<f64>,
    pub flagged_count: usize,
    pub recall_at: f64,
    pub precision_at: Option<f64>,
    pub n_docs: usize,
    pub n_relevant: usize,
    /// `1 − flagged_count / n_docs`.
    pub reading_reduction: f64,
    pub warnings: Vec<String>,
}

/// Picks the largest cutoff whose recall reaches `target_recall` and reports
/// the size of the flagged set.
pub fn workload(scored: &[ScoredDoc], target_recall: f64) -> Result<Workload> {
    if target_recall.is_nan() || target_recall < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "target recall {target_recall} is not in [0, 1]"
        )));
    }
    let mut warnings = Vec::new();
    let target = if target_recall > 1.0 {
        warnings.push(format!("target recall {target_recall} clamped to 1"));
        1.0
    } else {
        target_recall
    };
    let pos = scored.iter().filter(|d| d.label.is_relevant()).count();
    if pos == 0 {
        return Err(Error::SingleClass(
            "workload needs at least one relevant document".into(),
        ));
    }
    let n = scored.len();
    let mut s: Vec<(f64, bool)> = scored
        .iter()
        .map(|d| (d.p_hat, d.label.is_relevant()))
        .collect();
    s.sort_by(|a, b| b.0.total_cmp(&a.0));

    // Smallest tp meeting the target, compared in integers where possible.
    let (mut cutoff, mut tp, mut flagged) = (None, 0usize, 0usize);
    let meets = |tp: usize| tp as f64 / pos as f64 >= target;
    let mut i = 0;
    while !meets(tp) && i < n {
        let v = s[i].0;
        while i < n && s[i].0 == v {
            tp += s[i].1 as usize;
            i += 1;
        }
        flagged = i;
        cutoff = Some(v);
    }
    Ok(Workload {
        target_recall: target,
        cutoff,
        flagged_count: flagged,
        recall_at: tp as f64 / pos as f64,
        precision_at: (flagged > 0).then(|| tp as f64 / flagged as f64),
        n_docs: n,
        n_relevant: pos,
        reading_reduction: (n - flagged) as f64 / n as f64,
        warnings,
    })
}
