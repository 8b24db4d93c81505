use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::boolquery::BooleanPoint;
use crate::error::{Error, Result};

use super::crossval::{FoldResult, SensitivityReport};
use super::curves::{Curve, PrIntegrator};
use super::workload::Workload;
use super::{Confusion, ScoredDoc};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatingPoint {
    pub cutoff: f64,
    pub flagged: usize,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub fpr: Option<f64>,
    pub f1: Option<f64>,
}

impl OperatingPoint {
    pub fn at(scored: &[ScoredDoc], cutoff: f64) -> Self {
        let c = Confusion::at_cutoff(scored, cutoff);
        OperatingPoint {
            cutoff,
            flagged: c.tp + c.fp,
            precision: c.precision(),
            recall: c.recall(),
            fpr: c.fpr(),
            f1: c.f1(),
        }
    }
}

/// Results for one model. The JSON form holds the summary; curve points and
/// scores go to CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub model_id: String,
    pub recipe: String,
    pub seed: u64,
    pub k: usize,
    pub n_docs: usize,
    pub n_relevant: usize,
    pub evaluation: String,
    pub auc_roc: Option<f64>,
    pub auc_pr: Option<f64>,
    pub pr_integrator: PrIntegrator,
    #[serde(skip)]
    pub roc: Option<Curve>,
    #[serde(skip)]
    pub pr: Option<Curve>,
    pub operating_points: Vec<OperatingPoint>,
    pub workload: Option<Workload>,
    pub folds: Vec<FoldResult>,
    pub boolean: Option<BooleanPoint>,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub scores: Vec<ScoredDoc>,
}

pub fn write_curve_csv<W: Write>(curve: &Curve, mut out: W) -> std::io::Result<()> {
    writeln!(out, "cutoff,x,y")?;
    for p in &curve.points {
        match p.cutoff {
            Some(c) => writeln!(out, "{c},{},{}", p.x, p.y)?,
            None => writeln!(out, ",{},{}", p.x, p.y)?,
        }
    }
    Ok(())
}

fn write_file(path: &Path, f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<PathBuf> {
    let mut buf = Vec::new();
    f(&mut buf).map_err(|e| Error::io(path, e))?;
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))?;
    Ok(path.to_path_buf())
}

fn to_json<T: Serialize>(value: &T) -> std::io::Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value).map_err(std::io::Error::other)?;
    v.push(b'\n');
    Ok(v)
}

impl EvalReport {
    /// File stem `<model_id>_seed<seed>`.
    pub fn stem(&self) -> String {
        format!("{}_seed{}", self.model_id, self.seed)
    }

    pub fn to_json(&self) -> String {
        String::from_utf8(to_json(self).expect("report serializes")).expect("JSON is UTF-8")
    }

    /// Writes `<stem>.json`, `<stem>_scores.csv` and, for curve models,
    /// `<stem>_roc.csv` and `<stem>_pr.csv` into `dir`.
    pub fn write_files(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let stem = self.stem();
        let mut written = vec![write_file(&dir.join(format!("{stem}.json")), |b| {
            b.extend(to_json(self)?);
            Ok(())
        })?];
        for (curve, tag) in [(&self.roc, "roc"), (&self.pr, "pr")] {
            if let Some(c) = curve {
                written.push(write_file(&dir.join(format!("{stem}_{tag}.csv")), |b| {
                    write_curve_csv(c, b)
                })?);
            }
        }
        written.push(write_file(&dir.join(format!("{stem}_scores.csv")), |b| {
            writeln!(b, "doc_id,label,p_hat")?;
            for s in &self.scores {
                writeln!(b, "{},{},{}", csv_field(&s.doc_id), s.label, s.p_hat)?;
            }
            Ok(())
        })?);
        Ok(written)
    }
}

impl SensitivityReport {
    pub fn stem(&self) -> String {
        format!("sensitivity_{}_seed{}", self.model_id, self.seed)
    }

    /// Writes `<stem>.json` and `<stem>.csv` into `dir`.
    pub fn write_files(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let stem = self.stem();
        let json = write_file(&dir.join(format!("{stem}.json")), |b| {
            b.extend(to_json(self)?);
            Ok(())
        })?;
        let csv = write_file(&dir.join(format!("{stem}.csv")), |b| {
            writeln!(b, "fraction,replicates,failed,mean_auc_roc,mean_auc_pr")?;
            let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            for r in &self.rows {
                writeln!(
                    b,
                    "{},{},{},{},{}",
                    r.fraction,
                    r.replicates,
                    r.failed,
                    opt(r.mean_auc_roc),
                    opt(r.mean_auc_pr)
                )?;
            }
            Ok(())
        })?;
        Ok(vec![json, csv])
    }
}

/// Quotes a CSV field when needed.
pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
