//! Matches between a document's creation date and date expressions in its
//! text.
//!
//! Grammar:
//! * year: a token equal to the four-digit creation year;
//! * month: an English month name (full or three-letter, plus "sept"), or
//!   the month group of a numeric date `Y-M-D`, `M/D/Y`, `Y-M` or `M/D`
//!   (separator `-` or `/`, used consistently, month and day groups of one
//!   or two digits, zero padding allowed);
//! * day: for month names, an adjacent day token (`3`, `03`, `3rd`, or
//!   `3rd of`) on either side; for numeric dates, the day group.
//!
//! Per sentence, year-month matches are `min(years, months)` and
//! year-month-day matches are `min(years, months with matching day)`, so the
//! three counts are nested.

use chrono::{DateTime, Datelike};

use crate::analyzed::AnalyzedDocument;
use crate::corpus::Document;
use crate::text::Token;

const MONTHS: [&str; 12] = [
    "january", "february", "march", "april", "may", "june", "july", "august", "september",
    "october", "november", "december",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Timeliness {
    pub tmatch_y: usize,
    pub tmatch_ym: usize,
    pub tmatch_ymd: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CivilDate {
    pub year: i32,
    pub month: u32,
    pub day: u32,
}

impl CivilDate {
    /// UTC calendar date of a unix timestamp.
    pub fn from_timestamp(t: i64) -> Option<Self> {
        let dt = DateTime::from_timestamp(t, 0)?;
        Some(CivilDate {
            year: dt.year(),
            month: dt.month(),
            day: dt.day(),
        })
    }
}

/// 1-based month number of a month-name token.
pub fn month_of_name(token: &str) -> Option<u32> {
    if token == "sept" {
        return Some(9);
    }
    MONTHS
        .iter()
        .position(|m| *m == token || (token.len() == 3 && m.starts_with(token)))
        .map(|i| i as u32 + 1)
}

fn is_day_token(token: &str, day: u32) -> bool {
    let digits: &str = token.trim_end_matches(|c: char| c.is_ascii_alphabetic());
    let suffix = &token[digits.len()..];
    if !(suffix.is_empty() || ["st", "nd", "rd", "th"].contains(&suffix)) {
        return false;
    }
    !digits.is_empty()
        && digits.len() <= 2
        && digits.bytes().all(|b| b.is_ascii_digit())
        && digits.parse::<u32>().ok() == Some(day)
}

fn small_number(group: &str) -> Option<u32> {
    (group.len() <= 2).then(|| group.parse().ok()).flatten()
}

/// Numeric date expressions in `text` as `(month, day)` groups.
fn numeric_dates(text: &str) -> Vec<(Option<u32>, Option<u32>)> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let starts_run = chars[i].is_ascii_digit() && (i == 0 || !chars[i - 1].is_alphanumeric());
        if !starts_run {
            i += 1;
            continue;
        }
        let mut groups: Vec<String> = Vec::new();
        let mut sep: Option<char> = None;
        let mut j = i;
        loop {
            let start = j;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            groups.push(chars[start..j].iter().collect());
            let next_sep = chars.get(j).copied().filter(|c| *c == '-' || *c == '/');
            let continues = next_sep.is_some()
                && sep.is_none_or(|s| Some(s) == next_sep)
                && chars.get(j + 1).is_some_and(|c| c.is_ascii_digit());
            if !continues {
                break;
            }
            sep = next_sep;
            j += 1;
        }
        let clean_end = j >= chars.len() || !chars[j].is_alphanumeric();
        if clean_end {
            let lens: Vec<usize> = groups.iter().map(String::len).collect();
            let parsed = match lens.as_slice() {
                [4, _, _] => Some((small_number(&groups[1]), small_number(&groups[2]))),
                [_, _, 4] => Some((small_number(&groups[0]), small_number(&groups[1]))),
                [4, _] => Some((small_number(&groups[1]), None)),
                [a, b] if *a <= 2 && *b <= 2 => Some((small_number(&groups[0]), small_number(&groups[1]))),
                _ => None,
            };
            if let Some(p) = parsed {
                out.push(p);
            }
        }
        i = j;
    }
    out
}

/// Month matches and month-with-day matches in one sentence.
fn month_matches(tokens: &[Token], text: &str, date: CivilDate) -> (usize, usize) {
    let mut months = 0;
    let mut with_day = 0;
    for (i, t) in tokens.iter().enumerate() {
        if month_of_name(&t.text) != Some(date.month) {
            continue;
        }
        months += 1;
        let after = tokens.get(i + 1).is_some_and(|n| is_day_token(&n.text, date.day));
        let before = i >= 1 && is_day_token(&tokens[i - 1].text, date.day);
        let before_of = i >= 2 && tokens[i - 1].text == "of" && is_day_token(&tokens[i - 2].text, date.day);
        if after || before || before_of {
            with_day += 1;
        }
    }
    for (month, day) in numeric_dates(text) {
        if month == Some(date.month) {
            months += 1;
            if day == Some(date.day) {
                with_day += 1;
            }
        }
    }
    (months, with_day)
}

pub fn timeliness(doc: &AnalyzedDocument<'_>) -> Timeliness {
    let Some(date) = CivilDate::from_timestamp(doc.doc.stream_time) else {
        return Timeliness::default();
    };
    let year = format!("{:04}", date.year);
    let is_year = |t: &Token| t.text == year;

    let mut out = Timeliness {
        tmatch_y: doc.tokens.iter().filter(|t| is_year(t)).count(),
        ..Default::default()
    };
    for i in 0..doc.sentences.len() {
        let tokens = doc.sentence_tokens(i);
        let years = tokens.iter().filter(|t| is_year(t)).count();
        if years == 0 {
            continue;
        }
        let (months, with_day) = month_matches(tokens, doc.sentence_text(i), date);
        out.tmatch_ym += years.min(months);
        out.tmatch_ymd += years.min(with_day);
    }
    out
}

pub fn extract_timeliness(doc: &Document) -> Timeliness {
    timeliness(&AnalyzedDocument::new(doc))
}
