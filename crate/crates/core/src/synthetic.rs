//! Synthetic labeled corpus with planted signal, for tests and demos.
//!
//! Relevant documents talk about sex work together with HIV and/or violence,
//! using a mix of phrasings some of which the Boolean query misses.
//! Irrelevant documents come from neighbouring topics (general HIV studies,
//! violence studies) and sometimes mention sex work in passing. On top of
//! that, 100 pseudo-words are over-represented in relevant documents, and
//! all documents draw filler from a Zipf-distributed pseudo-word vocabulary.
//! Pseudo-words are screened so that none matches a query term or cluster,
//! or appears in the lemma table.

use std::collections::HashSet;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Poisson;
use serde::{Deserialize, Serialize};

use crate::boolquery::BooleanQuery;
use crate::corpus::{Corpus, Document, Label};
use crate::seed::{self, Stream};
use crate::textprep::{porter, tokenize, LemmaTable};
use crate::vectorize::ClusterSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub n_docs: usize,
    /// Irrelevant documents per relevant one.
    pub imbalance: usize,
    pub n_planted: usize,
    pub n_noise: usize,
    /// Per-document probability of each planted word, by class.
    pub planted_rate_relevant: f64,
    pub planted_rate_irrelevant: f64,
    /// Share of labels flipped after generation (marked in `source`).
    pub label_noise: f64,
    pub mean_abstract_words: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            n_docs: 10_000,
            imbalance: 10,
            n_planted: 100,
            n_noise: 3000,
            planted_rate_relevant: 0.08,
            planted_rate_irrelevant: 0.015,
            label_noise: 0.005,
            mean_abstract_words: 110.0,
            seed: 1,
        }
    }
}

impl SyntheticConfig {
    pub fn with_seed(seed: u64) -> Self {
        SyntheticConfig {
            seed,
            ..Self::default()
        }
    }

    pub fn n_relevant(&self) -> usize {
        self.n_docs / (self.imbalance + 1)
    }
}

type Bank = &'static [(&'static str, f64)];

const SEX_WORK: Bank = &[
    ("female sex workers", 2.0),
    ("sex workers", 2.0),
    ("sex worker", 1.0),
    ("sex-workers", 1.5),
    ("FSW", 3.0),
    ("FSWs", 1.0),
    ("prostitution", 1.0),
    ("prostitutes", 1.0),
    ("commercial sex", 0.8),
    ("transactional sex", 0.8),
    ("sex trade", 0.4),
    ("women who sell sex", 0.8),
];

const HIV: Bank = &[
    ("HIV", 4.0),
    ("HIV/AIDS", 1.0),
    ("AIDS", 0.6),
    ("HIV infection", 1.0),
    ("human immunodeficiency virus", 0.4),
    ("antiretroviral therapy", 1.0),
    ("sexually transmitted infections", 1.0),
];

const VIOLENCE: Bank = &[
    ("violence", 3.0),
    ("violent", 0.8),
    ("physical abuse", 1.0),
    ("sexual abuse", 0.8),
    ("rape", 0.8),
    ("sexual assault", 0.8),
    ("victims", 0.8),
    ("police harassment", 1.0),
    ("coercion", 0.6),
    ("intimidation", 0.4),
    ("exploitation", 0.5),
    ("intimate partner violence", 1.0),
    ("homicide", 0.2),
    ("torture", 0.2),
    ("extortion", 0.3),
    ("arrest", 0.8),
];

/// Per-class topic mix: probability a document covers the topic and the
/// mean number of extra mentions when it does.
struct Topic {
    p: f64,
    extra: f64,
}

struct Profile {
    sex_work: Topic,
    hiv: Topic,
    violence: Topic,
}

const RELEVANT: Profile = Profile {
    sex_work: Topic {
        p: 0.92,
        extra: 3.0,
    },
    hiv: Topic {
        p: 0.62,
        extra: 2.0,
    },
    violence: Topic {
        p: 0.55,
        extra: 2.0,
    },
};

const IRRELEVANT: Profile = Profile {
    sex_work: Topic {
        p: 0.40,
        extra: 0.2,
    },
    hiv: Topic {
        p: 0.40,
        extra: 1.2,
    },
    violence: Topic {
        p: 0.28,
        extra: 1.0,
    },
};

const CONSONANTS: &[u8] = b"bdfgklmnprstvz";
const VOWELS: &[u8] = b"aeiou";

/// Pseudo-words of 2-3 syllables whose stems are distinct and collide with
/// nothing the query, clusters or lemma table know about.
pub fn pseudo_words(
    n: usize,
    rng: &mut ChaCha8Rng,
    taken_stems: &mut HashSet<String>,
) -> Vec<String> {
    let query = BooleanQuery::default_query();
    let clusters = ClusterSet::default_set();
    let lemmas = LemmaTable::english();
    let mut out = Vec::with_capacity(n);
    let mut seen = HashSet::new();
    while out.len() < n {
        let syllables = rng.random_range(2..=3);
        let mut w = String::new();
        for _ in 0..syllables {
            w.push(CONSONANTS[rng.random_range(0..CONSONANTS.len())] as char);
            w.push(VOWELS[rng.random_range(0..VOWELS.len())] as char);
        }
        if rng.random_bool(0.4) {
            w.push(CONSONANTS[rng.random_range(0..CONSONANTS.len())] as char);
        }
        if !seen.insert(w.clone()) || lemmas.lookup(&w) != w {
            continue;
        }
        let stem = porter::stem(&w);
        if !clusters.assign(&stem).is_empty() || taken_stems.contains(&stem) {
            continue;
        }
        let probe = Document::new("probe", "", w.as_str());
        let m = query.explain(&probe);
        if !(m.fsw.is_empty() && m.hiv.is_empty() && m.violence.is_empty()) {
            continue;
        }
        taken_stems.insert(stem);
        out.push(w);
    }
    out
}

fn bank_index(bank: Bank) -> WeightedIndex<f64> {
    WeightedIndex::new(bank.iter().map(|b| b.1)).expect("positive weights")
}

fn poisson(rng: &mut ChaCha8Rng, mean: f64) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive mean").sample(rng) as usize
}

struct Generator {
    planted: Vec<String>,
    noise: Vec<String>,
    zipf: WeightedIndex<f64>,
    banks: [(Bank, WeightedIndex<f64>); 3],
}

impl Generator {
    fn new(cfg: &SyntheticConfig) -> Self {
        let mut rng = seed::rng(seed::derive(cfg.seed, Stream::Synthetic, 0));
        let mut taken: HashSet<String> = HashSet::new();
        for bank in [SEX_WORK, HIV, VIOLENCE] {
            for (phrase, _) in bank {
                for t in tokenize(phrase) {
                    taken.insert(porter::stem(&t));
                }
            }
        }
        let planted = pseudo_words(cfg.n_planted, &mut rng, &mut taken);
        let noise = pseudo_words(cfg.n_noise, &mut rng, &mut taken);
        let zipf = WeightedIndex::new((1..=noise.len().max(1)).map(|k| 1.0 / k as f64))
            .expect("non-empty");
        Generator {
            planted,
            noise,
            zipf,
            banks: [SEX_WORK, HIV, VIOLENCE].map(|b| (b, bank_index(b))),
        }
    }

    fn filler(&self, rng: &mut ChaCha8Rng) -> &str {
        &self.noise[self.zipf.sample(rng)]
    }

    fn document(
        &self,
        id: String,
        label: Label,
        cfg: &SyntheticConfig,
        rng: &mut ChaCha8Rng,
    ) -> Document {
        let profile = if label.is_relevant() {
            &RELEVANT
        } else {
            &IRRELEVANT
        };
        let mut mentions: Vec<&str> = Vec::new();
        for (topic, (bank, idx)) in [&profile.sex_work, &profile.hiv, &profile.violence]
            .into_iter()
            .zip(&self.banks)
        {
            if rng.random_bool(topic.p) {
                for _ in 0..1 + poisson(rng, topic.extra) {
                    mentions.push(bank[idx.sample(rng)].0);
                }
            }
        }
        let rate = if label.is_relevant() {
            cfg.planted_rate_relevant
        } else {
            cfg.planted_rate_irrelevant
        };
        for w in &self.planted {
            if rng.random_bool(rate) {
                mentions.push(w);
            }
        }
        mentions.shuffle(rng);

        let n_title = rng.random_range(5..=9);
        let mut title: Vec<&str> = (0..n_title).map(|_| self.filler(rng)).collect();
        if !mentions.is_empty() && rng.random_bool(0.5) {
            let pos = rng.random_range(0..=title.len());
            title.insert(pos, mentions.pop().expect("non-empty"));
        }
        let n_body = 20 + poisson(rng, (cfg.mean_abstract_words - 20.0).max(0.0));
        let mut body: Vec<&str> = (0..n_body).map(|_| self.filler(rng)).collect();
        for m in mentions {
            let pos = rng.random_range(0..=body.len());
            body.insert(pos, m);
        }
        let mut title = title.join(" ");
        if let Some(first) = title.get(..1) {
            title = first.to_uppercase() + &title[1..];
        }
        Document::new(id, title, body.join(" ") + ".").with_label(label)
    }
}

/// Generates the corpus. Documents are shuffled so that ids carry no label
/// information; flipped labels are marked `source = "synthetic-flipped"`.
pub fn generate(cfg: &SyntheticConfig) -> Corpus {
    let gen = Generator::new(cfg);
    let n_rel = cfg.n_relevant();
    let mut labels: Vec<Label> = (0..cfg.n_docs)
        .map(|i| {
            if i < n_rel {
                Label::Relevant
            } else {
                Label::Irrelevant
            }
        })
        .collect();
    let mut rng = seed::rng(seed::derive(cfg.seed, Stream::Synthetic, 1));
    labels.shuffle(&mut rng);
    let width = cfg.n_docs.to_string().len();
    let docs = labels
        .iter()
        .enumerate()
        .map(|(i, &label)| {
            let mut doc_rng = seed::rng(seed::derive(cfg.seed, Stream::Synthetic, 2 + i as u64));
            let mut d = gen.document(format!("syn{i:0width$}"), label, cfg, &mut doc_rng);
            if doc_rng.random_bool(cfg.label_noise.clamp(0.0, 1.0)) {
                d.label = Some(match label {
                    Label::Relevant => Label::Irrelevant,
                    Label::Irrelevant => Label::Relevant,
                });
                d.source = Some("synthetic-flipped".into());
            } else {
                d.source = Some("synthetic".into());
            }
            d
        })
        .collect();
    Corpus::new(docs).expect("generated ids are unique")
}

/// The planted discriminative pseudo-words for `cfg`, in generation order.
pub fn planted_words(cfg: &SyntheticConfig) -> Vec<String> {
    Generator::new(cfg).planted
}
