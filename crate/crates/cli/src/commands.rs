use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use litscreen::boolquery::BooleanQuery;
use litscreen::corpus::{load_corpus, write_csv, write_jsonl, Corpus, Format};
use litscreen::eval::{
    audit_disagreements, cross_validate, cross_validate_prepared, curves_svg, sensitivity_svg,
    sensitivity_sweep, write_audit_csv, EvalOptions, EvalReport, ScoredDoc, Series,
    DEFAULT_FRACTIONS,
};
use litscreen::pipeline::{train, PipelineConfig, Prepared, Recipe, Resources, TrainedModel};
use litscreen::synthetic::{generate, SyntheticConfig};
use litscreen::textprep::LemmaTable;
use litscreen::vectorize::ClusterSet;

use crate::settings::Settings;
use crate::Failure;

const DEFAULT_RECIPES: &str = "model1,model2,model3:20,model3:50,model3:100,model3:250,model3:500";

struct Log {
    quiet: bool,
}

impl Log {
    fn say(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }
}

pub fn run(name: &str, s: &Settings, quiet: bool) -> Result<(), Failure> {
    let log = Log { quiet };
    if let Some(n) = s.get::<usize>("threads")? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::config(format!("thread pool: {e}")))?;
    }
    match name {
        "evaluate" => evaluate(s, &log),
        "train" => train_cmd(s, &log),
        "rank" => rank(s, &log),
        "sensitivity" => sensitivity(s, &log),
        "audit" => audit(s, &log),
        "gen-synthetic" => gen_synthetic(s, &log),
        other => Err(Failure::config(format!("unknown command {other}"))),
    }
}

/// Parses a setting whose default is given in its textual form.
fn parsed<T: FromStr>(s: &Settings, key: &str, default: &str) -> Result<T, Failure>
where
    T::Err: std::fmt::Display,
{
    let raw: String = s.or(key, default.to_string())?;
    raw.parse()
        .map_err(|e| Failure::config(format!("bad value {raw:?} for {key}: {e}")))
}

/// A number, or a keyword meaning "unset".
fn optional_number(s: &Settings, key: &str, unset: &str) -> Result<Option<usize>, Failure> {
    let raw: String = s.or(key, unset.to_string())?;
    if raw == unset {
        return Ok(None);
    }
    raw.parse()
        .map(Some)
        .map_err(|e| Failure::config(format!("bad value {raw:?} for {key}: {e}")))
}

fn out_dir(s: &Settings) -> Result<PathBuf, Failure> {
    let dir = PathBuf::from(s.or::<String>("out", "out".into())?);
    std::fs::create_dir_all(&dir)
        .map_err(|e| Failure::io(format!("creating {}: {e}", dir.display())))?;
    Ok(dir)
}

fn resources(s: &Settings, log: &Log) -> Result<Resources, Failure> {
    let mut r = Resources::bundled();
    let bad = |what: &str, e: litscreen::Error| Failure::config(format!("{what}: {e}"));
    if let Some(p) = s.string("lemmas") {
        r.lemmas = LemmaTable::load(&p).map_err(|e| bad("lemma table", e))?;
        log.say(format!("lemma table {p}: {} entries", r.lemmas.len()));
    }
    if let Some(p) = s.string("clusters") {
        r.clusters = ClusterSet::load(&p).map_err(|e| bad("cluster config", e))?;
    }
    if let Some(p) = s.string("keywords") {
        r.query = BooleanQuery::load(&p).map_err(|e| bad("keyword config", e))?;
    }
    Ok(r)
}

fn format_for(s: &Settings, path: &Path) -> Result<Format, Failure> {
    match s.get::<Format>("format")? {
        Some(f) => Ok(f),
        None => Format::from_path(path).ok_or_else(|| {
            Failure::config(format!(
                "cannot tell the format of {}; pass --format jsonl|csv",
                path.display()
            ))
        }),
    }
}

fn corpus(s: &Settings, log: &Log) -> Result<Corpus, Failure> {
    let path = PathBuf::from(s.required::<String>("corpus")?);
    let format = format_for(s, &path)?;
    let (corpus, report) = load_corpus(&path, format)?;
    log.say(format!("{}: {report}", path.display()));
    Ok(corpus)
}

fn pipeline(s: &Settings) -> Result<PipelineConfig, Failure> {
    let mut p = PipelineConfig::default();
    p.min_df = s.or("min-df", p.min_df)?;
    p.t_formula = parsed(s, "t-formula", "welch")?;
    p.include_cluster_tokens = s.flag("include-cluster-tokens")?;
    p.pooled_selection = s.flag("pooled-selection")?;
    let f = &mut p.forest;
    f.n_trees = s.or("n-trees", f.n_trees)?;
    f.mtry = optional_number(s, "mtry", "auto")?;
    f.max_depth = optional_number(s, "max-depth", "none")?;
    f.min_leaf = s.or("min-leaf", f.min_leaf)?;
    f.balance = parsed(s, "balance", "downsample_majority")?;
    Ok(p)
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::io(format!("creating {}: {e}", path.display())))
}

fn io_at(path: &Path) -> impl Fn(std::io::Error) -> Failure + '_ {
    move |e| Failure::io(format!("writing {}: {e}", path.display()))
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(io_at(path))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn evaluate(s: &Settings, log: &Log) -> Result<(), Failure> {
    let seed: u64 = s.required("seed")?;
    let recipes: Vec<Recipe> = s.list("recipes", DEFAULT_RECIPES)?;
    if recipes.is_empty() {
        return Err(Failure::config("recipes is empty"));
    }
    let mut opts = EvalOptions::new(seed);
    opts.k = s.or("k", opts.k)?;
    opts.target_recall = s.or("target-recall", opts.target_recall)?;
    opts.cutoffs = s.list("cutoffs", "0.5")?;
    opts.pr_integrator = parsed(s, "pr-integrator", "trapezoid")?;
    opts.pipeline = pipeline(s)?;
    let svg = s.flag("svg")?;
    let out = out_dir(s)?;
    let res = resources(s, log)?;
    let corpus = corpus(s, log)?;

    let prepared = recipes
        .iter()
        .any(|r| *r != Recipe::Model1)
        .then(|| Prepared::new(&corpus, &res.lemmas));
    let mut reports = Vec::with_capacity(recipes.len());
    for &recipe in &recipes {
        log.say(format!("evaluating {recipe}"));
        let report = match &prepared {
            Some(p) if recipe != Recipe::Model1 => {
                cross_validate_prepared(&corpus, p, recipe, &res, &opts)?
            }
            _ => cross_validate(&corpus, recipe, &res, &opts)?,
        };
        for path in report.write_files(&out)? {
            log.say(format!("  wrote {}", path.display()));
        }
        reports.push(report);
    }

    let summary = out.join(format!("summary_seed{seed}.csv"));
    let mut w = create(&summary)?;
    let io = io_at(&summary);
    writeln!(
        w,
        "model_id,auc_roc,auc_pr,precision,recall,f1,flagged_at_target,reading_reduction"
    )
    .map_err(&io)?;
    for r in &reports {
        let (p, rec, f1) = match &r.boolean {
            Some(b) => (b.precision, b.recall, b.f1),
            None => (None, None, None),
        };
        let (flagged, reduction) = match &r.workload {
            Some(wl) => (
                wl.flagged_count.to_string(),
                wl.reading_reduction.to_string(),
            ),
            None => (String::new(), String::new()),
        };
        writeln!(
            w,
            "{},{},{},{},{},{},{flagged},{reduction}",
            r.model_id,
            opt(r.auc_roc),
            opt(r.auc_pr),
            opt(p),
            opt(rec),
            opt(f1)
        )
        .map_err(&io)?;
    }
    w.flush().map_err(&io)?;

    if svg {
        write_overlays(&reports, &out, seed)?;
    }
    s.write_echo(&out, "evaluate.conf")?;
    Ok(())
}

/// ROC and PR overlays of all curve models, with Model 1 as a single point.
fn write_overlays(reports: &[EvalReport], out: &Path, seed: u64) -> Result<(), Failure> {
    let mut roc = Vec::new();
    let mut pr = Vec::new();
    for r in reports {
        let line =
            |c: &litscreen::eval::Curve| c.points.iter().map(|p| (p.x, p.y)).collect::<Vec<_>>();
        if let Some(c) = &r.roc {
            roc.push(Series {
                name: r.model_id.clone(),
                points: line(c),
                marker: false,
            });
        }
        if let Some(c) = &r.pr {
            pr.push(Series {
                name: r.model_id.clone(),
                points: line(c),
                marker: false,
            });
        }
        if let Some(b) = &r.boolean {
            if let (Some(fpr), Some(tpr)) = (b.fpr, b.tpr) {
                roc.push(Series {
                    name: r.model_id.clone(),
                    points: vec![(fpr, tpr)],
                    marker: true,
                });
            }
            if let (Some(rec), Some(p)) = (b.recall, b.precision) {
                pr.push(Series {
                    name: r.model_id.clone(),
                    points: vec![(rec, p)],
                    marker: true,
                });
            }
        }
    }
    write_text(
        &out.join(format!("roc_seed{seed}.svg")),
        &curves_svg("ROC", "false positive rate", "true positive rate", &roc),
    )?;
    write_text(
        &out.join(format!("pr_seed{seed}.svg")),
        &curves_svg("Precision-recall", "recall", "precision", &pr),
    )
}

fn train_cmd(s: &Settings, log: &Log) -> Result<(), Failure> {
    let seed: u64 = s.required("seed")?;
    let recipe: Recipe = parsed(s, "recipe", "model3:250")?;
    let mut config = pipeline(s)?;
    config.forest.seed = seed;
    let out = out_dir(s)?;
    let model_path = match s.string("model") {
        Some(p) => PathBuf::from(p),
        None => out.join(format!("{}_seed{seed}.model", recipe.id())),
    };
    let res = resources(s, log)?;
    let corpus = corpus(s, log)?;
    let rows: Vec<usize> = (0..corpus.len())
        .filter(|&i| corpus.get(i).label.is_some())
        .collect();
    if rows.len() < corpus.len() {
        log.say(format!(
            "training on {} labeled of {} documents",
            rows.len(),
            corpus.len()
        ));
    }
    let prepared = Prepared::new(&corpus, &res.lemmas);
    let model = train(&prepared, &rows, recipe, &config, &res, None)?;
    for w in &model.fitted.warnings {
        log.say(format!("warning: {w}"));
    }
    model.save(&model_path)?;
    log.say(format!("wrote {}", model_path.display()));
    s.write_echo(&out, "train.conf")
}

/// Loads the model named by `model` and checks it against the resources.
fn load_model(s: &Settings, res: &Resources) -> Result<TrainedModel, Failure> {
    let path: String = s.required("model")?;
    let model = TrainedModel::load(&path, &res.clusters)?;
    model.check_provenance(res)?;
    Ok(model)
}

fn rank(s: &Settings, log: &Log) -> Result<(), Failure> {
    let out = out_dir(s)?;
    let res = resources(s, log)?;
    let model = load_model(s, &res)?;
    let corpus = corpus(s, log)?;
    let prepared = Prepared::new(&corpus, &res.lemmas);
    let p = model.score(&prepared.seqs)?;
    let mut ranked: Vec<(&str, f64)> = prepared
        .seqs
        .iter()
        .map(|q| q.doc_id.as_str())
        .zip(p)
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));

    let path = s
        .string("output")
        .map(PathBuf::from)
        .unwrap_or_else(|| out.join("ranked.csv"));
    let mut w = csv::Writer::from_writer(create(&path)?);
    let bad = |e: csv::Error| Failure::io(format!("writing {}: {e}", path.display()));
    w.write_record(["doc_id", "p_hat"]).map_err(bad)?;
    for (id, p) in &ranked {
        w.write_record([*id, p.to_string().as_str()]).map_err(bad)?;
    }
    w.flush().map_err(io_at(&path))?;
    log.say(format!(
        "wrote {} ({} documents)",
        path.display(),
        ranked.len()
    ));
    s.write_echo(&out, "rank.conf")
}

fn sensitivity(s: &Settings, log: &Log) -> Result<(), Failure> {
    let seed: u64 = s.required("seed")?;
    let recipe: Recipe = parsed(s, "recipe", "model3:250")?;
    let default_grid: Vec<String> = DEFAULT_FRACTIONS.iter().map(f64::to_string).collect();
    let fractions: Vec<f64> = s.list("fractions", &default_grid.join(","))?;
    let replicates: usize = s.or("replicates", 5)?;
    let mut opts = EvalOptions::new(seed);
    opts.pr_integrator = parsed(s, "pr-integrator", "trapezoid")?;
    opts.pipeline = pipeline(s)?;
    let svg = s.flag("svg")?;
    let out = out_dir(s)?;
    let res = resources(s, log)?;
    let corpus = corpus(s, log)?;
    log.say(format!(
        "sweeping {} fractions x {replicates} replicates",
        fractions.len()
    ));
    let report = sensitivity_sweep(&corpus, recipe, &fractions, replicates, &res, &opts)?;
    for f in &report.failures {
        log.say(format!("replicate failed: {f}"));
    }
    for path in report.write_files(&out)? {
        log.say(format!("wrote {}", path.display()));
    }
    if svg {
        write_text(
            &out.join(format!("{}.svg", report.stem())),
            &sensitivity_svg(&report),
        )?;
    }
    s.write_echo(&out, "sensitivity.conf")
}

fn audit(s: &Settings, log: &Log) -> Result<(), Failure> {
    let high: f64 = s.or("high", 0.9)?;
    let low: f64 = s.or("low", 0.1)?;
    let out = out_dir(s)?;
    let res = resources(s, log)?;
    let model = load_model(s, &res)?;
    let corpus = corpus(s, log)?;
    corpus.require_labeled()?;
    let prepared = Prepared::new(&corpus, &res.lemmas);
    let p = model.score(&prepared.seqs)?;
    let scored: Vec<ScoredDoc> = corpus
        .documents()
        .iter()
        .zip(p)
        .map(|(d, p)| ScoredDoc::new(d.id.clone(), d.label.expect("checked labeled"), p))
        .collect();
    let rows = audit_disagreements(&scored, high, low)?;
    let path = s
        .string("output")
        .map(PathBuf::from)
        .unwrap_or_else(|| out.join("audit.csv"));
    write_audit_csv(&rows, create(&path)?)?;
    log.say(format!(
        "wrote {} ({} disagreements)",
        path.display(),
        rows.len()
    ));
    s.write_echo(&out, "audit.conf")
}

fn gen_synthetic(s: &Settings, log: &Log) -> Result<(), Failure> {
    let mut cfg = SyntheticConfig::with_seed(s.or("seed", 1)?);
    cfg.n_docs = s.or("n-docs", cfg.n_docs)?;
    cfg.label_noise = s.or("label-noise", cfg.label_noise)?;
    if cfg.n_docs == 0 {
        return Err(Failure::config("n-docs must be positive"));
    }
    if !(0.0..=1.0).contains(&cfg.label_noise) {
        return Err(Failure::config("label-noise must be in [0, 1]"));
    }
    let out = out_dir(s)?;
    let path = s
        .string("output")
        .map(PathBuf::from)
        .unwrap_or_else(|| out.join(format!("synthetic_seed{}.jsonl", cfg.seed)));
    let format = format_for(s, &path)?;
    let corpus = generate(&cfg);
    let mut w = create(&path)?;
    match format {
        Format::Jsonl => write_jsonl(&corpus, &mut w),
        Format::Csv => write_csv(&corpus, &mut w),
    }
    .and_then(|_| w.flush())
    .map_err(io_at(&path))?;
    let c = corpus.counts();
    log.say(format!(
        "wrote {} ({} relevant, {} irrelevant)",
        path.display(),
        c.relevant,
        c.irrelevant
    ));
    s.write_echo(&out, "gen-synthetic.conf")
}
