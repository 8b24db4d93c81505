use litscreen::boolquery::{classify_boolean, BooleanQuery, KeywordCategory, TermKind};
use litscreen::corpus::{Document, Label};
use proptest::prelude::*;

const POOL: &[&str] = &[
    "sex",
    "Sex",
    "worker",
    "workers",
    "WORKERS",
    "sex-workers",
    "FSW",
    "fsws",
    "FSW,",
    "prostitutes",
    "prostitution.",
    "commercial",
    "transactional",
    "trade",
    "HIV",
    "hiv/aids",
    "(HIV)",
    "AIDS",
    "aid",
    "human",
    "immunodeficiency",
    "virus",
    "viruses",
    "violence",
    "violent",
    "nonviolent",
    "victims",
    "abuse",
    "rape.",
    "battered",
    "women,",
    "crime",
    "health",
    "study",
    "the",
    "of",
    "and",
    "in",
    "2019",
    "risk",
    "ipv",
    "csw",
    "sw",
];

/// Whitespace-split, lowercased, letters-only tokens.
fn ref_tokens(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for piece in text.split_whitespace() {
        let mut t = String::new();
        for c in piece.chars() {
            if c.is_ascii_alphabetic() {
                t.push(c.to_ascii_lowercase());
            }
        }
        if !t.is_empty() {
            out.push(t);
        }
    }
    out
}

fn ref_phrase(text: &[u8], phrase: &[u8], open_end: bool) -> bool {
    if phrase.len() > text.len() {
        return false;
    }
    for i in 0..=text.len() - phrase.len() {
        let mut same = true;
        for j in 0..phrase.len() {
            if text[i + j] != phrase[j] {
                same = false;
                break;
            }
        }
        if !same {
            continue;
        }
        let left = i == 0 || !text[i - 1].is_ascii_alphabetic();
        let end = i + phrase.len();
        let right = open_end || end == text.len() || !text[end].is_ascii_alphabetic();
        if left && right {
            return true;
        }
    }
    false
}

fn ref_category(doc_text: &str, cat: &KeywordCategory) -> bool {
    let tokens = ref_tokens(doc_text);
    let lowered: Vec<String> = doc_text
        .split_whitespace()
        .map(|w| w.to_lowercase())
        .collect();
    let text = lowered.join(" ");
    for term in &cat.terms {
        let prefix = term.kind == TermKind::Prefix;
        let hit = if term.words.len() > 1 {
            ref_phrase(text.as_bytes(), term.words.join(" ").as_bytes(), prefix)
        } else {
            let w = &term.words[0];
            tokens.iter().any(|t| {
                if prefix {
                    t.starts_with(w.as_str())
                } else {
                    t == w
                }
            })
        };
        if hit {
            return true;
        }
    }
    false
}

fn ref_classify(doc: &Document, q: &BooleanQuery) -> Label {
    let text = doc.text();
    let [fsw, hiv, violence] = q.categories();
    if ref_category(&text, fsw) && (ref_category(&text, hiv) || ref_category(&text, violence)) {
        Label::Relevant
    } else {
        Label::Irrelevant
    }
}

fn words() -> impl Strategy<Value = String> {
    proptest::collection::vec(proptest::sample::select(POOL), 0..25).prop_map(|w| w.join(" "))
}

proptest! {
    #[test]
    fn matches_reference_matcher(title in words(), abs in words()) {
        let q = BooleanQuery::default_query();
        let doc = Document::new("d", title, abs);
        prop_assert_eq!(classify_boolean(&doc, &q), ref_classify(&doc, &q));
    }

    #[test]
    fn adding_text_never_unflags(title in words(), abs in words(), extra in words()) {
        let q = BooleanQuery::default_query();
        let doc = Document::new("d", title.clone(), abs.clone());
        if classify_boolean(&doc, &q) == Label::Relevant {
            let longer = Document::new("d", title, format!("{abs} {extra}"));
            prop_assert_eq!(classify_boolean(&longer, &q), Label::Relevant);
        }
    }
}

#[test]
fn violence_branch_carries_documents_without_hiv() {
    let q = BooleanQuery::default_query();
    let with = Document::new(
        "a",
        "Violence against FSW",
        "A survey of police harassment.",
    );
    assert_eq!(classify_boolean(&with, &q), Label::Relevant);
    let without = Document::new("a", "Experiences of FSW", "A survey of police conduct.");
    assert_eq!(classify_boolean(&without, &q), Label::Irrelevant);
}

#[test]
fn phrase_needs_word_boundaries() {
    let q = BooleanQuery::default_query();
    let label = |title: &str| classify_boolean(&Document::new("a", title, ""), &q);
    assert_eq!(label("A sex worker and HIV"), Label::Relevant);
    assert_eq!(label("Commercial sex work and HIV"), Label::Relevant);
    assert_eq!(label("A unisex worker and HIV"), Label::Irrelevant);
    // Phrases without a trailing * are whole-word matches.
    assert_eq!(label("Sex workers and HIV"), Label::Irrelevant);
}
