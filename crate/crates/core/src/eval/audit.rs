use std::io::Write;

use serde::Serialize;

use crate::corpus::Label;
use crate::error::{Error, Result};

use super::ScoredDoc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    #[serde(rename = "labeled-irrelevant, predicted-relevant")]
    LabeledIrrelevantPredictedRelevant,
    #[serde(rename = "labeled-relevant, predicted-irrelevant")]
    LabeledRelevantPredictedIrrelevant,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::LabeledIrrelevantPredictedRelevant => {
                "labeled-irrelevant, predicted-relevant"
            }
            Direction::LabeledRelevantPredictedIrrelevant => {
                "labeled-relevant, predicted-irrelevant"
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Disagreement {
    pub doc_id: String,
    pub label: Label,
    pub p_hat: f64,
    pub direction: Direction,
}

/// Documents whose confident prediction contradicts the manual label, most
/// confident first (ties by id).
pub fn audit_disagreements(scored: &[ScoredDoc], high: f64, low: f64) -> Result<Vec<Disagreement>> {
    if high.is_nan() || low.is_nan() || high <= low {
        return Err(Error::InvalidArgument(format!(
            "audit thresholds need high > low (got high={high}, low={low})"
        )));
    }
    let mut out: Vec<Disagreement> = scored
        .iter()
        .filter_map(|d| {
            let direction = match d.label {
                Label::Irrelevant if d.p_hat >= high => {
                    Direction::LabeledIrrelevantPredictedRelevant
                }
                Label::Relevant if d.p_hat <= low => Direction::LabeledRelevantPredictedIrrelevant,
                _ => return None,
            };
            Some(Disagreement {
                doc_id: d.doc_id.clone(),
                label: d.label,
                p_hat: d.p_hat,
                direction,
            })
        })
        .collect();
    out.sort_by(|a, b| {
        (b.p_hat - 0.5)
            .abs()
            .total_cmp(&(a.p_hat - 0.5).abs())
            .then_with(|| a.doc_id.cmp(&b.doc_id))
    });
    Ok(out)
}

pub fn write_audit_csv<W: Write>(rows: &[Disagreement], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::InvalidArgument(format!("writing audit CSV: {e}"));
    w.write_record(["doc_id", "label", "p_hat", "direction"])
        .map_err(io)?;
    for r in rows {
        w.write_record([
            r.doc_id.as_str(),
            r.label.as_str(),
            &r.p_hat.to_string(),
            r.direction.as_str(),
        ])
        .map_err(io)?;
    }
    w.flush()
        .map_err(|e| Error::InvalidArgument(format!("writing audit CSV: {e}")))?;
    Ok(())
}
