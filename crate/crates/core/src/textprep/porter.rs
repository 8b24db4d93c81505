//! Porter's suffix-stripping algorithm, as published in 1980.
//!
//! This is the original rule set (steps 1a to 5b), not Porter2/Snowball and
//! not the later reference implementations, which replace `abli -> able`
//! with `bli -> ble`, add `logi -> log` and skip words of one or two letters.
//!
//! Within a step the rules are scanned in order and the first rule whose
//! suffix matches is the only candidate: if its condition fails the word is
//! left unchanged for that step.
//!
//! Input is expected to be lowercase ASCII letters; other bytes are treated
//! as consonants.

/// Stems a single lowercase word.
///
/// ```
/// use litscreen::textprep::porter::stem;
/// assert_eq!(stem("stay"), "stai");
/// assert_eq!(stem("generalizations"), "gener");
/// ```
pub fn stem(word: &str) -> String {
    let mut w = word.as_bytes().to_vec();
    step1a(&mut w);
    step1b(&mut w);
    step1c(&mut w);
    step2(&mut w);
    step3(&mut w);
    step4(&mut w);
    step5a(&mut w);
    step5b(&mut w);
    // Only ASCII bytes are ever removed or appended.
    String::from_utf8(w).expect("stemmer keeps input valid UTF-8")
}

fn is_consonant(w: &[u8], i: usize) -> bool {
    match w[i] {
        b'a' | b'e' | b'i' | b'o' | b'u' => false,
        b'y' => i == 0 || !is_consonant(w, i - 1),
        _ => true,
    }
}

/// The measure m of a stem: the number of VC sequences in `[C](VC)^m[V]`.
fn measure(w: &[u8]) -> usize {
    let mut m = 0;
    let mut prev_vowel = false;
    for i in 0..w.len() {
        let vowel = !is_consonant(w, i);
        if prev_vowel && !vowel {
            m += 1;
        }
        prev_vowel = vowel;
    }
    m
}

fn has_vowel(w: &[u8]) -> bool {
    (0..w.len()).any(|i| !is_consonant(w, i))
}

fn ends_double_consonant(w: &[u8]) -> bool {
    let n = w.len();
    n >= 2 && w[n - 1] == w[n - 2] && is_consonant(w, n - 1)
}

/// `*o`: the stem ends consonant-vowel-consonant and the final consonant is
/// not w, x or y.
fn ends_cvc(w: &[u8]) -> bool {
    let n = w.len();
    n >= 3
        && is_consonant(w, n - 3)
        && !is_consonant(w, n - 2)
        && is_consonant(w, n - 1)
        && !matches!(w[n - 1], b'w' | b'x' | b'y')
}

type Condition = fn(&[u8]) -> bool;

fn m_gt_0(stem: &[u8]) -> bool {
    measure(stem) > 0
}

fn m_gt_1(stem: &[u8]) -> bool {
    measure(stem) > 1
}

fn m_gt_1_and_s_or_t(stem: &[u8]) -> bool {
    measure(stem) > 1 && matches!(stem.last(), Some(b's' | b't'))
}

/// Applies the first rule whose suffix matches. Returns whether a rule fired.
fn apply_rules(w: &mut Vec<u8>, rules: &[(&str, &str, Option<Condition>)]) -> bool {
    for &(suffix, replacement, condition) in rules {
        if w.ends_with(suffix.as_bytes()) {
            let stem_len = w.len() - suffix.len();
            if condition.is_none_or(|c| c(&w[..stem_len])) {
                w.truncate(stem_len);
                w.extend_from_slice(replacement.as_bytes());
                return true;
            }
            return false;
        }
    }
    false
}

fn step1a(w: &mut Vec<u8>) {
    apply_rules(
        w,
        &[
            ("sses", "ss", None),
            ("ies", "i", None),
            ("ss", "ss", None),
            ("s", "", None),
        ],
    );
}

fn step1b(w: &mut Vec<u8>) {
    if w.ends_with(b"eed") {
        if measure(&w[..w.len() - 3]) > 0 {
            w.pop();
        }
        return;
    }
    let stripped = if w.ends_with(b"ed") && has_vowel(&w[..w.len() - 2]) {
        w.truncate(w.len() - 2);
        true
    } else if w.ends_with(b"ing") && has_vowel(&w[..w.len() - 3]) {
        w.truncate(w.len() - 3);
        true
    } else {
        false
    };
    if !stripped {
        return;
    }
    if w.ends_with(b"at") || w.ends_with(b"bl") || w.ends_with(b"iz") {
        w.push(b'e');
    } else if ends_double_consonant(w) {
        if !matches!(w.last(), Some(b'l' | b's' | b'z')) {
            w.pop();
        }
    } else if measure(w) == 1 && ends_cvc(w) {
        w.push(b'e');
    }
}

fn step1c(w: &mut [u8]) {
    if w.ends_with(b"y") && has_vowel(&w[..w.len() - 1]) {
        let n = w.len();
        w[n - 1] = b'i';
    }
}

fn step2(w: &mut Vec<u8>) {
    apply_rules(
        w,
        &[
            ("ational", "ate", Some(m_gt_0)),
            ("tional", "tion", Some(m_gt_0)),
            ("enci", "ence", Some(m_gt_0)),
            ("anci", "ance", Some(m_gt_0)),
            ("izer", "ize", Some(m_gt_0)),
            ("abli", "able", Some(m_gt_0)),
            ("alli", "al", Some(m_gt_0)),
            ("entli", "ent", Some(m_gt_0)),
            ("eli", "e", Some(m_gt_0)),
            ("ousli", "ous", Some(m_gt_0)),
            ("ization", "ize", Some(m_gt_0)),
            ("ation", "ate", Some(m_gt_0)),
            ("ator", "ate", Some(m_gt_0)),
            ("alism", "al", Some(m_gt_0)),
            ("iveness", "ive", Some(m_gt_0)),
            ("fulness", "ful", Some(m_gt_0)),
            ("ousness", "ous", Some(m_gt_0)),
            ("aliti", "al", Some(m_gt_0)),
            ("iviti", "ive", Some(m_gt_0)),
            ("biliti", "ble", Some(m_gt_0)),
        ],
    );
}

fn step3(w: &mut Vec<u8>) {
    apply_rules(
        w,
        &[
            ("icate", "ic", Some(m_gt_0)),
            ("ative", "", Some(m_gt_0)),
            ("alize", "al", Some(m_gt_0)),
            ("iciti", "ic", Some(m_gt_0)),
            ("ical", "ic", Some(m_gt_0)),
            ("ful", "", Some(m_gt_0)),
            ("ness", "", Some(m_gt_0)),
        ],
    );
}

fn step4(w: &mut Vec<u8>) {
    apply_rules(
        w,
        &[
            ("al", "", Some(m_gt_1)),
            ("ance", "", Some(m_gt_1)),
            ("ence", "", Some(m_gt_1)),
            ("er", "", Some(m_gt_1)),
            ("ic", "", Some(m_gt_1)),
            ("able", "", Some(m_gt_1)),
            ("ible", "", Some(m_gt_1)),
            ("ant", "", Some(m_gt_1)),
            ("ement", "", Some(m_gt_1)),
            ("ment", "", Some(m_gt_1)),
            ("ent", "", Some(m_gt_1)),
            ("ion", "", Some(m_gt_1_and_s_or_t)),
            ("ou", "", Some(m_gt_1)),
            ("ism", "", Some(m_gt_1)),
            ("ate", "", Some(m_gt_1)),
            ("iti", "", Some(m_gt_1)),
            ("ous", "", Some(m_gt_1)),
            ("ive", "", Some(m_gt_1)),
            ("ize", "", Some(m_gt_1)),
        ],
    );
}

fn step5a(w: &mut Vec<u8>) {
    if w.ends_with(b"e") {
        let stem = &w[..w.len() - 1];
        let m = measure(stem);
        if m > 1 || (m == 1 && !ends_cvc(stem)) {
            w.pop();
        }
    }
}

fn step5b(w: &mut Vec<u8>) {
    if w.ends_with(b"ll") && measure(&w[..w.len() - 1]) > 1 {
        w.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn measure_examples() {
        for (w, m) in [
            ("tr", 0),
            ("ee", 0),
            ("tree", 0),
            ("y", 0),
            ("by", 0),
            ("trouble", 1),
            ("oats", 1),
            ("trees", 1),
            ("ivy", 1),
            ("troubles", 2),
            ("private", 2),
            ("oaten", 2),
            ("orrery", 2),
        ] {
            assert_eq!(measure(w.as_bytes()), m, "{w}");
        }
    }

    #[test]
    fn rule_examples() {
        for (w, s) in [
            ("caresses", "caress"),
            ("ponies", "poni"),
            ("caress", "caress"),
            ("cats", "cat"),
            ("feed", "feed"),
            ("agreed", "agre"),
            ("plastered", "plaster"),
            ("bled", "bled"),
            ("motoring", "motor"),
            ("sing", "sing"),
            ("conflated", "conflat"),
            ("hopping", "hop"),
            ("falling", "fall"),
            ("filing", "file"),
            ("happy", "happi"),
            ("sky", "sky"),
            ("relational", "relat"),
            ("conditional", "condit"),
            ("rational", "ration"),
            ("triplicate", "triplic"),
            ("formative", "form"),
            ("adoption", "adopt"),
            ("controll", "control"),
            ("roll", "roll"),
            ("probate", "probat"),
            ("rate", "rate"),
            ("cease", "ceas"),
        ] {
            assert_eq!(stem(w), s, "{w}");
        }
    }

    #[test]
    fn original_rules_not_later_variants() {
        // 1980 rules: abli -> able only, no logi rule, short words are stemmed.
        assert_eq!(stem("possibly"), "possibli");
        assert_eq!(stem("apology"), "apologi");
        assert_eq!(stem("is"), "i");
        assert_eq!(stem("as"), "a");
    }

    #[test]
    fn degenerate_inputs() {
        assert_eq!(stem(""), "");
        assert_eq!(stem("s"), "");
        assert_eq!(stem("a"), "a");
    }
}
