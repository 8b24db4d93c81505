//! Bibliographic records, corpus loading and stratified splitting.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::{self, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Irrelevant,
    Relevant,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::Relevant, Label::Irrelevant];

    pub fn is_relevant(self) -> bool {
        self == Label::Relevant
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Relevant => "relevant",
            Label::Irrelevant => "irrelevant",
        }
    }

    /// Parses a label cell. Blank means unlabeled.
    pub fn parse_cell(cell: &str) -> std::result::Result<Option<Label>, String> {
        let cell = cell.trim();
        if cell.is_empty() {
            return Ok(None);
        }
        cell.parse().map(Some)
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "relevant" => Ok(Label::Relevant),
            "irrelevant" => Ok(Label::Irrelevant),
            other => Err(format!(
                "label must be \"relevant\", \"irrelevant\" or blank, got {other:?}"
            )),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One bibliographic record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub title: String,
    pub abstract_text: String,
    pub label: Option<Label>,
    pub source: Option<String>,
}

impl Document {
    pub fn new(
        id: impl Into<String>,
        title: impl Into<String>,
        abstract_text: impl Into<String>,
    ) -> Self {
        Document {
            id: id.into(),
            title: title.into(),
            abstract_text: abstract_text.into(),
            label: None,
            source: None,
        }
    }

    pub fn with_label(mut self, label: Label) -> Self {
        self.label = Some(label);
        self
    }

    /// Title and abstract joined by a single space.
    pub fn text(&self) -> String {
        let mut s = String::with_capacity(self.title.len() + self.abstract_text.len() + 1);
        s.push_str(&self.title);
        s.push(' ');
        s.push_str(&self.abstract_text);
        s
    }

    fn is_blank(&self) -> bool {
        self.title.trim().is_empty() && self.abstract_text.trim().is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Counts {
    pub total: usize,
    pub relevant: usize,
    pub irrelevant: usize,
    pub unlabeled: usize,
}

impl Counts {
    pub fn of(self, label: Label) -> usize {
        match label {
            Label::Relevant => self.relevant,
            Label::Irrelevant => self.irrelevant,
        }
    }
}

/// An ordered collection of documents with unique ids.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Corpus {
    documents: Vec<Document>,
    counts: Counts,
}

impl Corpus {
    pub fn new(documents: Vec<Document>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(documents.len());
        for (i, doc) in documents.iter().enumerate() {
            if !seen.insert(doc.id.as_str()) {
                return Err(Error::DuplicateId {
                    id: doc.id.clone(),
                    line: i as u64 + 1,
                });
            }
        }
        let counts = tally(&documents);
        Ok(Corpus { documents, counts })
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn counts(&self) -> Counts {
        self.counts
    }

    pub fn get(&self, index: usize) -> &Document {
        &self.documents[index]
    }

    /// Labels of every document, failing on the first unlabeled one.
    pub fn labels(&self) -> Result<Vec<Label>> {
        self.documents
            .iter()
            .map(|d| d.label.ok_or_else(|| Error::Unlabeled(d.id.clone())))
            .collect()
    }

    pub fn require_labeled(&self) -> Result<()> {
        if self.documents.is_empty() {
            return Err(Error::Empty("corpus has no documents".into()));
        }
        self.labels().map(|_| ())
    }

    /// Sub-corpus of the given indices, in the order given.
    pub fn select(&self, indices: &[usize]) -> Corpus {
        let documents: Vec<Document> = indices.iter().map(|&i| self.documents[i].clone()).collect();
        let counts = tally(&documents);
        Corpus { documents, counts }
    }

    pub fn into_documents(self) -> Vec<Document> {
        self.documents
    }
}

fn tally(documents: &[Document]) -> Counts {
    let mut c = Counts {
        total: documents.len(),
        ..Counts::default()
    };
    for d in documents {
        match d.label {
            Some(Label::Relevant) => c.relevant += 1,
            Some(Label::Irrelevant) => c.irrelevant += 1,
            None => c.unlabeled += 1,
        }
    }
    c
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Jsonl,
    Csv,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" => Ok(Format::Jsonl),
            "csv" => Ok(Format::Csv),
            other => Err(format!(
                "unknown corpus format {other:?} (expected jsonl or csv)"
            )),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Jsonl => "jsonl",
            Format::Csv => "csv",
        })
    }
}

impl Format {
    /// Guesses the format from a file extension.
    pub fn from_path(path: &Path) -> Option<Format> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "jsonl" | "ndjson" => Some(Format::Jsonl),
            "csv" => Some(Format::Csv),
            _ => None,
        }
    }
}

/// What happened while loading a corpus file.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LoadReport {
    pub rows: usize,
    /// Ids of rows dropped because both title and abstract were empty.
    pub excluded: Vec<String>,
}

impl fmt::Display for LoadReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} rows read, {} kept, {} excluded (empty title and abstract)",
            self.rows,
            self.rows - self.excluded.len(),
            self.excluded.len()
        )
    }
}

pub fn load_corpus(path: impl AsRef<Path>, format: Format) -> Result<(Corpus, LoadReport)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    match format {
        Format::Jsonl => read_jsonl(BufReader::new(file)),
        Format::Csv => read_csv(file),
    }
}

struct Builder {
    documents: Vec<Document>,
    ids: HashSet<String>,
    report: LoadReport,
}

impl Builder {
    fn new() -> Self {
        Builder {
            documents: Vec::new(),
            ids: HashSet::new(),
            report: LoadReport::default(),
        }
    }

    fn push(&mut self, doc: Document, line: u64) -> Result<()> {
        if doc.id.is_empty() {
            return Err(Error::MalformedRow {
                line,
                message: "empty id".into(),
            });
        }
        if !self.ids.insert(doc.id.clone()) {
            return Err(Error::DuplicateId { id: doc.id, line });
        }
        self.report.rows += 1;
        if doc.is_blank() {
            self.report.excluded.push(doc.id);
        } else {
            self.documents.push(doc);
        }
        Ok(())
    }

    fn finish(self) -> Result<(Corpus, LoadReport)> {
        let counts = tally(&self.documents);
        Ok((
            Corpus {
                documents: self.documents,
                counts,
            },
            self.report,
        ))
    }
}

fn json_text(
    obj: &serde_json::Map<String, serde_json::Value>,
    key: &str,
    line: u64,
) -> Result<Option<String>> {
    match obj.get(key) {
        None => Err(Error::MalformedRow {
            line,
            message: format!("missing field {key:?}"),
        }),
        Some(serde_json::Value::Null) => Ok(None),
        Some(serde_json::Value::String(s)) => Ok(Some(s.clone())),
        Some(other) => Err(Error::MalformedRow {
            line,
            message: format!("field {key:?} must be a string, got {other}"),
        }),
    }
}

pub fn read_jsonl<R: BufRead>(reader: R) -> Result<(Corpus, LoadReport)> {
    let mut builder = Builder::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i as u64 + 1;
        let line = line.map_err(|e| Error::MalformedRow {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value =
            serde_json::from_str(&line).map_err(|e| Error::MalformedRow {
                line: line_no,
                message: e.to_string(),
            })?;
        let obj = value.as_object().ok_or_else(|| Error::MalformedRow {
            line: line_no,
            message: "expected a JSON object".into(),
        })?;
        let id = json_text(obj, "id", line_no)?.unwrap_or_default();
        let title = json_text(obj, "title", line_no)?.unwrap_or_default();
        let abstract_text = json_text(obj, "abstract", line_no)?.unwrap_or_default();
        let label = json_text(obj, "label", line_no)?.unwrap_or_default();
        let label = Label::parse_cell(&label).map_err(|message| Error::MalformedRow {
            line: line_no,
            message,
        })?;
        let source = match obj.get("source") {
            None => None,
            Some(_) => json_text(obj, "source", line_no)?.filter(|s| !s.is_empty()),
        };
        builder.push(
            Document {
                id,
                title,
                abstract_text,
                label,
                source,
            },
            line_no,
        )?;
    }
    builder.finish()
}

pub fn read_csv<R: Read>(reader: R) -> Result<(Corpus, LoadReport)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::MalformedRow {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let column = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h.trim().eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::MalformedRow {
                line: 1,
                message: format!("missing column {name:?}"),
            })
    };
    let (id_col, title_col, abs_col, label_col) = (
        column("id")?,
        column("title")?,
        column("abstract")?,
        column("label")?,
    );
    let source_col = headers
        .iter()
        .position(|h| h.trim().eq_ignore_ascii_case("source"));

    let mut builder = Builder::new();
    let mut record = csv::StringRecord::new();
    loop {
        let more = rdr
            .read_record(&mut record)
            .map_err(|e| Error::MalformedRow {
                line: e.position().map(|p| p.line()).unwrap_or(0),
                message: e.to_string(),
            })?;
        if !more {
            break;
        }
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let cell = |i: usize| record.get(i).unwrap_or("").to_string();
        let label = Label::parse_cell(&cell(label_col))
            .map_err(|message| Error::MalformedRow { line, message })?;
        builder.push(
            Document {
                id: cell(id_col),
                title: cell(title_col),
                abstract_text: cell(abs_col),
                label,
                source: source_col.map(cell).filter(|s| !s.is_empty()),
            },
            line,
        )?;
    }
    builder.finish()
}

#[derive(Serialize)]
struct JsonRecord<'a> {
    id: &'a str,
    title: &'a str,
    #[serde(rename = "abstract")]
    abstract_text: &'a str,
    label: &'a str,
    source: Option<&'a str>,
}

pub fn write_jsonl<W: Write>(corpus: &Corpus, mut out: W) -> std::io::Result<()> {
    for d in corpus.documents() {
        let rec = JsonRecord {
            id: &d.id,
            title: &d.title,
            abstract_text: &d.abstract_text,
            label: d.label.map(Label::as_str).unwrap_or(""),
            source: d.source.as_deref(),
        };
        serde_json::to_writer(&mut out, &rec)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn write_csv<W: Write>(corpus: &Corpus, out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["id", "title", "abstract", "label", "source"])?;
    for d in corpus.documents() {
        w.write_record([
            d.id.as_str(),
            d.title.as_str(),
            d.abstract_text.as_str(),
            d.label.map(Label::as_str).unwrap_or(""),
            d.source.as_deref().unwrap_or(""),
        ])?;
    }
    w.flush()
}

/// Assignment of every labeled document to one of `k` folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitPlan {
    pub k: usize,
    pub seed: u64,
    assignments: BTreeMap<String, usize>,
    folds: Vec<Vec<usize>>,
}

impl SplitPlan {
    pub fn fold_of(&self, id: &str) -> Option<usize> {
        self.assignments.get(id).copied()
    }

    pub fn assignments(&self) -> &BTreeMap<String, usize> {
        &self.assignments
    }

    /// Corpus indices held out in `fold`, ascending.
    pub fn validation(&self, fold: usize) -> &[usize] {
        &self.folds[fold]
    }

    /// Corpus indices used for training when `fold` is held out, ascending.
    pub fn training(&self, fold: usize) -> Vec<usize> {
        let mut rows: Vec<usize> = self
            .folds
            .iter()
            .enumerate()
            .filter(|&(f, _)| f != fold)
            .flat_map(|(_, rows)| rows.iter().copied())
            .collect();
        rows.sort_unstable();
        rows
    }
}

/// Stratified k-fold assignment: each class is shuffled independently and
/// dealt round-robin into the folds, with the dealing cursor carried over
/// from one class to the next so fold sizes stay balanced too.
pub fn stratified_kfold(corpus: &Corpus, k: usize, seed: u64) -> Result<SplitPlan> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!(
            "k must be at least 2, got {k}"
        )));
    }
    let labels = corpus.labels()?;
    let counts = corpus.counts();
    // With fewer than two members of a class, some training fold has none.
    for label in Label::ALL {
        if counts.of(label) < 2 {
            return Err(Error::DegenerateStratification(format!(
                "{} {label} documents: every training fold needs both classes",
                counts.of(label)
            )));
        }
    }

    let mut folds = vec![Vec::new(); k];
    let mut cursor = 0usize;
    for (class_index, label) in Label::ALL.into_iter().enumerate() {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == label).collect();
        let mut rng = seed::rng(seed::derive(seed, Stream::Fold, class_index as u64));
        members.shuffle(&mut rng);
        for idx in members {
            folds[cursor % k].push(idx);
            cursor += 1;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    let mut assignments = BTreeMap::new();
    for (fold, rows) in folds.iter().enumerate() {
        for &r in rows {
            assignments.insert(corpus.get(r).id.clone(), fold);
        }
    }
    Ok(SplitPlan {
        k,
        seed,
        assignments,
        folds,
    })
}

/// Per-class sample sizes for drawing `fraction` of a labeled corpus: the
/// total is `round(fraction * N)` and each class gets within one document of
/// its proportional share (largest-remainder apportionment).
pub fn stratified_quota(counts: Counts, fraction: f64) -> [usize; 2] {
    let n = counts.relevant + counts.irrelevant;
    let total = (fraction * n as f64).round() as usize;
    // Guard against products like 0.1 * 20 = 2.0000000000000004.
    let exact: [f64; 2] = Label::ALL.map(|l| {
        let q = fraction * counts.of(l) as f64;
        (q * 1e9).round() / 1e9
    });
    let mut quota = exact.map(|q| q.floor() as usize);
    let mut remaining = total.saturating_sub(quota[0] + quota[1]);
    let mut order = [0usize, 1];
    order.sort_by(|&a, &b| {
        let fa = exact[a] - exact[a].floor();
        let fb = exact[b] - exact[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &c in order.iter().cycle().take(2 * 2) {
        if remaining == 0 {
            break;
        }
        if quota[c] < counts.of(Label::ALL[c]) {
            quota[c] += 1;
            remaining -= 1;
        }
    }
    quota
}

/// Draws a stratified training subsample of `round(fraction * N)` documents.
/// Returns corpus indices (ascending) of the subsample and of the rest.
pub fn subsample_indices(
    corpus: &Corpus,
    fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "fraction must lie in (0, 1], got {fraction}"
        )));
    }
    corpus.require_labeled()?;
    let labels = corpus.labels()?;
    let quota = stratified_quota(corpus.counts(), fraction);
    let mut train = Vec::new();
    for (class_index, label) in Label::ALL.into_iter().enumerate() {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == label).collect();
        let mut rng = seed::rng(seed::derive(seed, Stream::Subsample, class_index as u64));
        members.shuffle(&mut rng);
        train.extend_from_slice(&members[..quota[class_index]]);
    }
    train.sort_unstable();
    let in_train: HashSet<usize> = train.iter().copied().collect();
    let rest = (0..corpus.len())
        .filter(|i| !in_train.contains(i))
        .collect();
    Ok((train, rest))
}

pub fn subsample_training(corpus: &Corpus, fraction: f64, seed: u64) -> Result<(Corpus, Corpus)> {
    let (train, rest) = subsample_indices(corpus, fraction, seed)?;
    Ok((corpus.select(&train), corpus.select(&rest)))
}
