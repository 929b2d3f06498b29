//! Small rule-based English verb lemmatizer used to group relation phrases.
//!
//! Order of rules: auxiliary forms, irregular-verb table, then suffix
//! stripping (`-ies`, `-es`, `-s`, `-ied`, `-ed`, `-ing`) with undoubling of
//! a final double consonant and `e`-restoration for short
//! consonant-vowel-consonant stems.

const BE: &[&str] = &["am", "are", "be", "been", "being", "is", "was", "were"];
const HAVE: &[&str] = &["had", "has", "have", "having"];
const DO: &[&str] = &["did", "do", "does", "doing", "done"];

/// Irregular past forms; `born` is deliberately absent so that "was born in"
/// groups as "be born in".
const IRREGULAR: &[(&str, &str)] = &[
    ("ate", "eat"),
    ("became", "become"),
    ("began", "begin"),
    ("begun", "begin"),
    ("bought", "buy"),
    ("brought", "bring"),
    ("built", "build"),
    ("came", "come"),
    ("chose", "choose"),
    ("chosen", "choose"),
    ("drew", "draw"),
    ("drove", "drive"),
    ("fell", "fall"),
    ("felt", "feel"),
    ("fought", "fight"),
    ("found", "find"),
    ("gave", "give"),
    ("given", "give"),
    ("gone", "go"),
    ("got", "get"),
    ("gotten", "get"),
    ("grew", "grow"),
    ("grown", "grow"),
    ("held", "hold"),
    ("kept", "keep"),
    ("knew", "know"),
    ("known", "know"),
    ("led", "lead"),
    ("left", "leave"),
    ("lost", "lose"),
    ("made", "make"),
    ("meant", "mean"),
    ("met", "meet"),
    ("paid", "pay"),
    ("ran", "run"),
    ("said", "say"),
    ("sat", "sit"),
    ("saw", "see"),
    ("seen", "see"),
    ("sent", "send"),
    ("sold", "sell"),
    ("spent", "spend"),
    ("spoke", "speak"),
    ("spoken", "speak"),
    ("stood", "stand"),
    ("taken", "take"),
    ("taught", "teach"),
    ("thought", "think"),
    ("told", "tell"),
    ("took", "take"),
    ("went", "go"),
    ("won", "win"),
    ("wore", "wear"),
    ("worn", "wear"),
    ("written", "write"),
    ("wrote", "write"),
];

fn is_vowel(c: u8) -> bool {
    matches!(c, b'a' | b'e' | b'i' | b'o' | b'u')
}

/// Number of vowel-consonant sequences in the stem (Porter's "measure").
fn measure(stem: &[u8]) -> usize {
    let mut m = 0;
    let mut prev_vowel = false;
    for (i, &c) in stem.iter().enumerate() {
        let v = is_vowel(c) || (c == b'y' && i > 0 && !is_vowel(stem[i - 1]));
        if prev_vowel && !v {
            m += 1;
        }
        prev_vowel = v;
    }
    m
}

fn ends_cvc(stem: &[u8]) -> bool {
    let n = stem.len();
    n >= 3
        && !is_vowel(stem[n - 3])
        && is_vowel(stem[n - 2])
        && !is_vowel(stem[n - 1])
        && !matches!(stem[n - 1], b'w' | b'x' | b'y')
}

fn repair_stem(stem: &str) -> String {
    let b = stem.as_bytes();
    let n = b.len();
    if n >= 2 && b[n - 1] == b[n - 2] && !is_vowel(b[n - 1]) && !matches!(b[n - 1], b'l' | b's' | b'z') {
        return stem[..n - 1].to_string();
    }
    if measure(b) == 1 && ends_cvc(b) {
        return format!("{stem}e");
    }
    stem.to_string()
}

fn has_vowel(s: &str) -> bool {
    s.bytes().any(is_vowel)
}

pub fn lemmatize(token: &str) -> String {
    let w = token.to_lowercase();
    if BE.contains(&w.as_str()) {
        return "be".into();
    }
    if HAVE.contains(&w.as_str()) {
        return "have".into();
    }
    if DO.contains(&w.as_str()) {
        return "do".into();
    }
    if let Ok(i) = IRREGULAR.binary_search_by(|(form, _)| form.cmp(&w.as_str())) {
        return IRREGULAR[i].1.into();
    }
    if !w.is_ascii() || w.len() <= 3 {
        return w;
    }
    if let Some(stem) = w.strip_suffix("ies") {
        if stem.len() >= 2 {
            return format!("{stem}y");
        }
    }
    if let Some(stem) = w.strip_suffix("ied") {
        if stem.len() >= 2 {
            return format!("{stem}y");
        }
    }
    if let Some(stem) = w.strip_suffix("es") {
        if ["ss", "sh", "ch", "x", "z"].iter().any(|s| stem.ends_with(s)) {
            return stem.to_string();
        }
    }
    if w.ends_with('s') && !["ss", "us", "is"].iter().any(|s| w.ends_with(s)) {
        return w[..w.len() - 1].to_string();
    }
    if w.ends_with("eed") {
        return w;
    }
    if let Some(stem) = w.strip_suffix("ed") {
        if stem.len() >= 2 && has_vowel(stem) {
            return repair_stem(stem);
        }
    }
    if let Some(stem) = w.strip_suffix("ing") {
        if stem.len() >= 2 && has_vowel(stem) {
            return repair_stem(stem);
        }
    }
    w
}
