//! Browser bindings for the screening toolkit. Every export returns a JSON
//! string; the page in `www/` renders it.

use litscreen::corpus::{Corpus, Document};
use litscreen::eval::{cross_validate, cross_validate_prepared, workload, EvalOptions, EvalReport};
use litscreen::pipeline::{Prepared, Recipe, Resources};
use litscreen::synthetic::{generate, SyntheticConfig};
use litscreen::textprep::{porter, tokenize};
use serde::Serialize;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
struct TokenTrace<'a> {
    token: &'a str,
    lemma: &'a str,
    stem: String,
    clusters: Vec<&'a str>,
}

/// Token-by-token normalization of a title and abstract, the cluster each
/// stem feeds, and the Boolean query's verdict with the terms that fired.
pub fn analyze_json(resources: &Resources, title: &str, abstract_text: &str) -> Value {
    let doc = Document::new("input", title, abstract_text);
    let tokens = tokenize(&doc.text());
    let names = resources.clusters.names();
    let trace: Vec<TokenTrace> = tokens
        .iter()
        .map(|t| {
            let lemma = resources.lemmas.lookup(t);
            let stem = porter::stem(lemma);
            let clusters = resources
                .clusters
                .assign(&stem)
                .into_iter()
                .map(|c| names[c])
                .collect();
            TokenTrace {
                token: t,
                lemma,
                stem,
                clusters,
            }
        })
        .collect();
    json!({ "tokens": trace, "boolean": resources.query.explain(&doc) })
}

fn report_json(r: &EvalReport) -> Value {
    json!({
        "model_id": r.model_id,
        "auc_roc": r.auc_roc,
        "auc_pr": r.auc_pr,
        "roc": r.roc.as_ref().map(|c| &c.points),
        "pr": r.pr.as_ref().map(|c| &c.points),
    })
}

/// A small synthetic corpus held in memory so the forest models can be
/// re-run with different settings.
pub struct Lab {
    resources: Resources,
    corpus: Corpus,
    prepared: Prepared,
    opts: EvalOptions,
    model1: Value,
    model2: Option<EvalReport>,
    model3: Option<EvalReport>,
}

impl Lab {
    pub fn new(seed: u64, n_docs: usize, n_trees: usize, k: usize) -> litscreen::Result<Lab> {
        let resources = Resources::bundled();
        let corpus = generate(&SyntheticConfig {
            n_docs,
            ..SyntheticConfig::with_seed(seed)
        });
        let prepared = Prepared::new(&corpus, &resources.lemmas);
        let mut opts = EvalOptions::new(seed);
        opts.k = k;
        opts.pipeline.forest.n_trees = n_trees;
        let m1 = cross_validate(&corpus, Recipe::Model1, &resources, &opts)?;
        let model1 = json!(m1.boolean);
        Ok(Lab {
            resources,
            corpus,
            prepared,
            opts,
            model1,
            model2: None,
            model3: None,
        })
    }

    fn run(&self, recipe: Recipe) -> litscreen::Result<EvalReport> {
        cross_validate_prepared(
            &self.corpus,
            &self.prepared,
            recipe,
            &self.resources,
            &self.opts,
        )
    }

    /// Cross-validates model 2 (once) and model 3 with `n_top` tokens.
    pub fn compare(&mut self, n_top: usize) -> litscreen::Result<Value> {
        if self.model2.is_none() {
            self.model2 = Some(self.run(Recipe::Model2)?);
        }
        let m3 = self.run(Recipe::Model3 { n_top })?;
        let out = json!({
            "n_docs": self.corpus.len(),
            "model1": self.model1,
            "model2": report_json(self.model2.as_ref().expect("set above")),
            "model3": report_json(&m3),
        });
        self.model3 = Some(m3);
        Ok(out)
    }

    /// Reading workload of the last compared models at `target_recall`.
    pub fn workload(&self, target_recall: f64) -> litscreen::Result<Value> {
        let at = |r: &Option<EvalReport>| -> litscreen::Result<Value> {
            match r {
                Some(r) => Ok(json!(workload(&r.scores, target_recall)?)),
                None => Ok(Value::Null),
            }
        };
        Ok(json!({ "model2": at(&self.model2)?, "model3": at(&self.model3)? }))
    }
}

fn to_js(e: litscreen::Error) -> JsValue {
    JsValue::from_str(&e.to_string())
}

#[wasm_bindgen]
pub fn analyze(title: &str, abstract_text: &str) -> String {
    thread_local! {
        static RESOURCES: Resources = Resources::bundled();
    }
    RESOURCES.with(|r| analyze_json(r, title, abstract_text).to_string())
}

#[wasm_bindgen]
pub struct Explorer {
    lab: Lab,
}

#[wasm_bindgen]
impl Explorer {
    #[wasm_bindgen(constructor)]
    pub fn new(seed: u32, n_docs: usize, n_trees: usize) -> Result<Explorer, JsValue> {
        Lab::new(seed.into(), n_docs, n_trees, 5)
            .map(|lab| Explorer { lab })
            .map_err(to_js)
    }

    pub fn compare(&mut self, n_top: usize) -> Result<String, JsValue> {
        self.lab
            .compare(n_top)
            .map(|v| v.to_string())
            .map_err(to_js)
    }

    pub fn workload(&self, target_recall: f64) -> Result<String, JsValue> {
        self.lab
            .workload(target_recall)
            .map(|v| v.to_string())
            .map_err(to_js)
    }
}
