//! `litscreen`: screen documents for a systematic review with a Boolean
//! query or a balanced random forest, and evaluate the models.

mod commands;
mod settings;

use std::process::ExitCode;

use clap::{Arg, ArgAction, Command};

/// A failure with the exit code of its class.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_DATA: u8 = 4;
pub const EXIT_MODEL: u8 = 5;

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_IO,
            message: message.into(),
        }
    }

    fn class(&self) -> &'static str {
        match self.code {
            EXIT_CONFIG => "config error",
            EXIT_IO => "I/O error",
            EXIT_DATA => "data error",
            EXIT_MODEL => "model error",
            _ => "error",
        }
    }
}

impl From<litscreen::Error> for Failure {
    fn from(e: litscreen::Error) -> Self {
        use litscreen::Error as E;
        let code = match &e {
            E::Io { .. } => EXIT_IO,
            E::Config(_) | E::InvalidArgument(_) => EXIT_CONFIG,
            E::MalformedRow { .. }
            | E::DuplicateId { .. }
            | E::DegenerateStratification(_)
            | E::Unlabeled(_)
            | E::SingleClass(_)
            | E::Empty(_) => EXIT_DATA,
            E::DimensionMismatch { .. } | E::Provenance { .. } | E::ModelFormat(_) => EXIT_MODEL,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn opt(name: &'static str, help: &'static str) -> Arg {
    Arg::new(name).long(name).value_name("VALUE").help(help)
}

fn switch(name: &'static str, help: &'static str) -> Arg {
    Arg::new(name)
        .long(name)
        .num_args(0..=1)
        .require_equals(true)
        .default_missing_value("true")
        .value_name("BOOL")
        .help(help)
}

fn common() -> Vec<Arg> {
    vec![
        opt(
            "config",
            "key = value settings file; keys are the flag names",
        ),
        opt("corpus", "corpus file (.jsonl or .csv)"),
        opt(
            "format",
            "corpus format: jsonl or csv (default: from extension)",
        ),
        opt(
            "lemmas",
            "lemma table (form<TAB>lemma); default: bundled English table",
        ),
        opt("clusters", "cluster config; default: bundled 15 clusters"),
        opt("keywords", "Boolean keyword config; default: bundled query"),
        opt("out", "output directory [default: out]"),
        opt("threads", "worker threads for forest training"),
    ]
}

fn model_knobs() -> Vec<Arg> {
    vec![
        opt("n-trees", "trees per forest [default: 500]"),
        opt(
            "mtry",
            "features tried per split, or auto for ceil(sqrt(p)) [default: auto]",
        ),
        opt("max-depth", "tree depth cap, or none [default: none]"),
        opt("min-leaf", "minimum samples per leaf [default: 1]"),
        opt(
            "balance",
            "downsample_majority or none [default: downsample_majority]",
        ),
        opt("min-df", "drop tokens in fewer documents [default: 1]"),
        opt("t-formula", "welch or raw [default: welch]"),
        switch(
            "include-cluster-tokens",
            "let cluster member tokens be selected as top-N tokens",
        ),
        switch(
            "pooled-selection",
            "rank tokens once on all rows instead of per training fold",
        ),
    ]
}

fn cli() -> Command {
    let seed = || opt("seed", "master random seed");
    Command::new("litscreen")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Document screening for systematic reviews")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .subcommand(
            Command::new("evaluate")
                .about("Cross-validate models and write ROC/PR reports")
                .args(common())
                .args(model_knobs())
                .arg(seed())
                .arg(opt(
                    "recipes",
                    "comma list of model1, model2, model3:N [default: model1,model2,model3:20,model3:50,model3:100,model3:250,model3:500]",
                ))
                .arg(opt("k", "folds [default: 5]"))
                .arg(opt("target-recall", "recall for the workload figure [default: 0.8]"))
                .arg(opt("cutoffs", "comma list of probability cutoffs to report [default: 0.5]"))
                .arg(opt("pr-integrator", "trapezoid or average_precision [default: trapezoid]"))
                .arg(switch("svg", "also write ROC and PR overlay charts")),
        )
        .subcommand(
            Command::new("train")
                .about("Train one model on all labeled documents")
                .args(common())
                .args(model_knobs())
                .arg(seed())
                .arg(opt("recipe", "model2 or model3:N [default: model3:250]"))
                .arg(opt("model", "output model path [default: <out>/<recipe>_seed<seed>.model]")),
        )
        .subcommand(
            Command::new("rank")
                .about("Rank documents by predicted relevance")
                .args(common())
                .arg(opt("model", "trained model file"))
                .arg(opt("output", "ranked CSV path [default: <out>/ranked.csv]")),
        )
        .subcommand(
            Command::new("sensitivity")
                .about("Training-fraction sensitivity sweep")
                .args(common())
                .args(model_knobs())
                .arg(seed())
                .arg(opt("recipe", "model2 or model3:N [default: model3:250]"))
                .arg(opt("fractions", "comma list of training fractions [default: 0.01,...,0.8]"))
                .arg(opt("replicates", "replicates per fraction [default: 5]"))
                .arg(opt("pr-integrator", "trapezoid or average_precision [default: trapezoid]"))
                .arg(switch("svg", "also write an AUC-vs-fraction chart")),
        )
        .subcommand(
            Command::new("audit")
                .about("List confident predictions that contradict the labels")
                .args(common())
                .arg(opt("model", "trained model file"))
                .arg(opt("high", "flag irrelevant-labeled documents with p >= high [default: 0.9]"))
                .arg(opt("low", "flag relevant-labeled documents with p <= low [default: 0.1]"))
                .arg(opt("output", "audit CSV path [default: <out>/audit.csv]")),
        )
        .subcommand(
            Command::new("gen-synthetic")
                .about("Write the synthetic labeled corpus")
                .arg(opt("config", "key = value settings file"))
                .arg(opt("out", "output directory [default: out]"))
                .arg(opt("output", "corpus path [default: <out>/synthetic_seed<seed>.jsonl]"))
                .arg(opt("seed", "generator seed [default: 1]"))
                .arg(opt("n-docs", "number of documents [default: 10000]"))
                .arg(opt("label-noise", "share of labels flipped [default: 0.005]"))
                .arg(opt("format", "jsonl or csv (default: from extension)")),
        )
        .arg(Arg::new("quiet").long("quiet").short('q').global(true).action(ArgAction::SetTrue).help("no progress messages"))
}

fn main() -> ExitCode {
    let matches = cli().get_matches();
    let quiet = matches.get_flag("quiet");
    let (name, sub) = matches.subcommand().expect("subcommand required");
    let app = cli();
    let known: Vec<String> = app
        .find_subcommand(name)
        .map(|c| c.get_arguments().map(|a| a.get_id().to_string()).collect())
        .unwrap_or_default();
    let result =
        settings::Settings::from_matches(sub, &known).and_then(|s| commands::run(name, &s, quiet));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("litscreen: {}: {}", f.class(), f.message);
            ExitCode::from(f.code)
        }
    }
}
