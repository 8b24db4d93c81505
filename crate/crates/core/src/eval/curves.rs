use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::ScoredDoc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveKind {
    Roc,
    Pr,
}

impl CurveKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CurveKind::Roc => "roc",
            CurveKind::Pr => "pr",
        }
    }
}

/// One curve point. `cutoff` is `None` for the sentinel that flags nothing.
/// ROC points are (FPR, TPR); PR points are (recall, precision).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub cutoff: Option<f64>,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Curve {
    pub kind: CurveKind,
    pub points: Vec<CurvePoint>,
    pub auc: f64,
}

/// How the area under the PR curve is integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrIntegrator {
    #[default]
    Trapezoid,
    /// Σ (R_k − R_{k−1}) · P_k over the cutoff sweep.
    AveragePrecision,
}

impl FromStr for PrIntegrator {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "trapezoid" => Ok(PrIntegrator::Trapezoid),
            "average_precision" | "ap" => Ok(PrIntegrator::AveragePrecision),
            other => Err(format!("unknown PR integrator {other:?}")),
        }
    }
}

/// (cutoff, tp, fp) after a block of tied scores.
type Step = (f64, usize, usize);

/// Cumulative steps after each block of tied scores, highest cutoff first,
/// plus the class totals.
fn sweep(scored: &[ScoredDoc]) -> Result<(Vec<Step>, usize, usize)> {
    if let Some(d) = scored.iter().find(|d| !d.p_hat.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "non-finite score for {}",
            d.doc_id
        )));
    }
    let mut s: Vec<(f64, bool)> = scored
        .iter()
        .map(|d| (d.p_hat, d.label.is_relevant()))
        .collect();
    s.sort_by(|a, b| b.0.total_cmp(&a.0));
    let pos = s.iter().filter(|x| x.1).count();
    let neg = s.len() - pos;
    let mut out = Vec::new();
    let (mut tp, mut fp) = (0, 0);
    let mut i = 0;
    while i < s.len() {
        let v = s[i].0;
        while i < s.len() && s[i].0 == v {
            if s[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        out.push((v, tp, fp));
    }
    Ok((out, pos, neg))
}

/// ROC curve over all distinct cutoffs, starting from the (0,0) sentinel.
/// The trapezoidal AUC equals the Mann-Whitney statistic with ties ½.
pub fn roc_curve(scored: &[ScoredDoc]) -> Result<Curve> {
    let (blocks, pos, neg) = sweep(scored)?;
    if pos == 0 || neg == 0 {
        return Err(Error::SingleClass(format!(
            "ROC needs both classes ({pos} relevant, {neg} irrelevant)"
        )));
    }
    let mut points = vec![CurvePoint {
        cutoff: None,
        x: 0.0,
        y: 0.0,
    }];
    // Twice the area in units of one (negative, positive) pair.
    let mut area2: u128 = 0;
    let (mut ptp, mut pfp) = (0usize, 0usize);
    for &(cut, tp, fp) in &blocks {
        area2 += ((fp - pfp) as u128) * ((tp + ptp) as u128);
        points.push(CurvePoint {
            cutoff: Some(cut),
            x: fp as f64 / neg as f64,
            y: tp as f64 / pos as f64,
        });
        (ptp, pfp) = (tp, fp);
    }
    let auc = area2 as f64 / (2.0 * pos as f64 * neg as f64);
    Ok(Curve {
        kind: CurveKind::Roc,
        points,
        auc,
    })
}

/// Precision/recall at every distinct cutoff, highest first, preceded by a
/// recall-0 anchor carrying the precision of the top-scored block.
pub fn pr_curve(scored: &[ScoredDoc], integrator: PrIntegrator) -> Result<Curve> {
    let (blocks, pos, _) = sweep(scored)?;
    if pos == 0 {
        return Err(Error::SingleClass(
            "PR curve needs at least one relevant document".into(),
        ));
    }
    let prec = |tp: usize, fp: usize| tp as f64 / (tp + fp) as f64;
    let (_, tp0, fp0) = blocks[0];
    let mut points = vec![CurvePoint {
        cutoff: None,
        x: 0.0,
        y: prec(tp0, fp0),
    }];
    for &(cut, tp, fp) in &blocks {
        points.push(CurvePoint {
            cutoff: Some(cut),
            x: tp as f64 / pos as f64,
            y: prec(tp, fp),
        });
    }
    let auc = match integrator {
        PrIntegrator::Trapezoid => points
            .windows(2)
            .map(|w| (w[1].x - w[0].x) * (w[0].y + w[1].y) / 2.0)
            .sum(),
        PrIntegrator::AveragePrecision => {
            points.windows(2).map(|w| (w[1].x - w[0].x) * w[1].y).sum()
        }
    };
    Ok(Curve {
        kind: CurveKind::Pr,
        points,
        auc,
    })
}

/// Brute-force pair count: share of (relevant, irrelevant) pairs ordered
/// correctly, ties counted ½.
pub fn mann_whitney_auc(scored: &[ScoredDoc]) -> Option<f64> {
    let pos: Vec<f64> = scored
        .iter()
        .filter(|d| d.label.is_relevant())
        .map(|d| d.p_hat)
        .collect();
    let neg: Vec<f64> = scored
        .iter()
        .filter(|d| !d.label.is_relevant())
        .map(|d| d.p_hat)
        .collect();
    if pos.is_empty() || neg.is_empty() {
        return None;
    }
    let mut twice = 0u64;
    for &p in &pos {
        for &n in &neg {
            twice += if p > n {
                2
            } else if p == n {
                1
            } else {
                0
            };
        }
    }
    Some(twice as f64 / (2.0 * pos.len() as f64 * neg.len() as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Label;

    fn scored(rel: &[f64], irr: &[f64]) -> Vec<ScoredDoc> {
        let mut v: Vec<ScoredDoc> = rel
            .iter()
            .enumerate()
            .map(|(i, &p)| ScoredDoc::new(format!("r{i}"), Label::Relevant, p))
            .collect();
        v.extend(
            irr.iter()
                .enumerate()
                .map(|(i, &p)| ScoredDoc::new(format!("i{i}"), Label::Irrelevant, p)),
        );
        v
    }

    #[test]
    fn roc_examples() {
        assert_eq!(
            roc_curve(&scored(&[0.9, 0.8], &[0.2, 0.1])).unwrap().auc,
            1.0
        );
        assert_eq!(
            roc_curve(&scored(&[0.5, 0.5], &[0.5, 0.5, 0.5]))
                .unwrap()
                .auc,
            0.5
        );
        let s = scored(&[0.9, 0.4], &[0.5, 0.1]);
        let c = roc_curve(&s).unwrap();
        assert_eq!(c.auc, 0.75);
        assert_eq!(mann_whitney_auc(&s), Some(0.75));
        let first = c.points[0];
        let last = *c.points.last().unwrap();
        assert_eq!((first.x, first.y, last.x, last.y), (0.0, 0.0, 1.0, 1.0));
        assert!(c.points.windows(2).all(|w| w[0].x <= w[1].x));
        assert!(matches!(
            roc_curve(&scored(&[0.1], &[])),
            Err(Error::SingleClass(_))
        ));
    }

    #[test]
    fn pr_examples() {
        let c = pr_curve(&scored(&[0.9, 0.8], &[0.2, 0.1]), PrIntegrator::Trapezoid).unwrap();
        assert_eq!(c.auc, 1.0);
        assert!(c.points.iter().filter(|p| p.x < 1.0).all(|p| p.y == 1.0));

        let c = pr_curve(&scored(&[0.3; 3], &[0.3; 7]), PrIntegrator::Trapezoid).unwrap();
        assert_eq!(c.points.len(), 2);
        assert!((c.auc - 0.3).abs() < 1e-15);

        let c = pr_curve(&scored(&[0.9, 0.4], &[0.5, 0.1]), PrIntegrator::Trapezoid).unwrap();
        let xy: Vec<(f64, f64)> = c.points.iter().map(|p| (p.x, p.y)).collect();
        assert_eq!(
            xy,
            vec![
                (0.0, 1.0),
                (0.5, 1.0),
                (0.5, 0.5),
                (1.0, 2.0 / 3.0),
                (1.0, 0.5)
            ]
        );
        // 0.5·1 + 0 + 0.5·(0.5 + 2/3)/2 + 0
        assert!((c.auc - (0.5 + 0.5 * (0.5 + 2.0 / 3.0) / 2.0)).abs() < 1e-15);

        let ap = pr_curve(
            &scored(&[0.9, 0.4], &[0.5, 0.1]),
            PrIntegrator::AveragePrecision,
        )
        .unwrap();
        assert!((ap.auc - (0.5 + 0.5 * 2.0 / 3.0)).abs() < 1e-15);

        assert!(pr_curve(&scored(&[], &[0.2]), PrIntegrator::Trapezoid).is_err());
    }
}
