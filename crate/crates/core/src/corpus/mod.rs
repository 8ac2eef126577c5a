//! Seed bibliography: parsing, normalization, deduplication and exclusions.
//!
//! The seed format is a tab-separated document with a header row:
//!
//! ```text
//! raw_key	chapter_tag	title	authors	year	doi
//! batty2013	ch1	The new science of cities	Batty, M.	2013	10.7551/mitpress/9399.001.0001
//! ```
//!
//! One row is one citation of a reference by a chapter. Rows describing the
//! same reference (same normalized title and year) are merged and their
//! chapter tags unioned.

mod language;

pub use language::{detect_language, language_shares, LanguageDetector, LanguageTag, UNDETERMINED};

use std::collections::{BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

/// Column order of the seed TSV header.
pub const SEED_COLUMNS: [&str; 6] = ["raw_key", "chapter_tag", "title", "authors", "year", "doi"];

#[derive(Debug, Error, PartialEq)]
pub enum CorpusError {
    #[error("empty corpus")]
    Empty,
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("invalid JSON corpus: {0}")]
    Json(String),
    #[error("empty title")]
    EmptyTitle,
    #[error("no titles given")]
    NoTitles,
}

/// One bibliographic entry of the seed corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceRecord {
    pub raw_key: String,
    pub title: String,
    pub authors: Vec<String>,
    pub year: Option<i32>,
    pub chapter_tags: BTreeSet<String>,
    pub doi: Option<String>,
}

impl ReferenceRecord {
    /// Key used to merge duplicates: folded title plus year.
    pub fn dedup_key(&self) -> (String, Option<i32>) {
        (normalize_title(&self.title), self.year)
    }

    fn validate(&self) -> Result<(), String> {
        if self.raw_key.trim().is_empty() {
            return Err("empty raw_key".into());
        }
        if collapse_whitespace(&self.title).is_empty() {
            return Err(format!("record {}: empty title", self.raw_key));
        }
        if self.chapter_tags.is_empty() {
            return Err(format!("record {}: no chapter tag", self.raw_key));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Corpus {
    pub records: Vec<ReferenceRecord>,
    #[serde(default)]
    pub exclusions_applied: Vec<String>,
}

/// Result of [`apply_exclusions`]: the filtered corpus and the requested keys
/// that matched nothing.
#[derive(Debug, Clone, PartialEq)]
pub struct Exclusion {
    pub corpus: Corpus,
    pub missing: Vec<String>,
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Builds a corpus from records, merging duplicates in first-seen order.
    pub fn from_records<I: IntoIterator<Item = ReferenceRecord>>(records: I) -> Self {
        let mut merged: Vec<ReferenceRecord> = Vec::new();
        let mut index: HashMap<(String, Option<i32>), usize> = HashMap::new();
        for record in records {
            match index.get(&record.dedup_key()) {
                Some(&i) => {
                    let existing = &mut merged[i];
                    existing.chapter_tags.extend(record.chapter_tags);
                    if existing.doi.is_none() {
                        existing.doi = record.doi;
                    }
                    if existing.authors.is_empty() {
                        existing.authors = record.authors;
                    }
                }
                None => {
                    index.insert(record.dedup_key(), merged.len());
                    merged.push(record);
                }
            }
        }
        Corpus {
            records: merged,
            exclusions_applied: Vec::new(),
        }
    }

    /// Records cited by the given chapter.
    pub fn chapter(&self, tag: &str) -> impl Iterator<Item = &ReferenceRecord> {
        let tag = tag.to_string();
        self.records.iter().filter(move |r| r.chapter_tags.contains(&tag))
    }

    /// All chapter tags, sorted.
    pub fn chapter_tags(&self) -> BTreeSet<String> {
        self.records
            .iter()
            .flat_map(|r| r.chapter_tags.iter().cloned())
            .collect()
    }

    /// Serializes to the seed TSV format, one row per (record, chapter).
    pub fn to_tsv(&self) -> String {
        let mut out = SEED_COLUMNS.join("\t");
        out.push('\n');
        for r in &self.records {
            for tag in &r.chapter_tags {
                let fields = [
                    sanitize_field(&r.raw_key),
                    sanitize_field(tag),
                    sanitize_field(&r.title),
                    r.authors
                        .iter()
                        .map(|a| sanitize_field(a))
                        .collect::<Vec<_>>()
                        .join("; "),
                    r.year.map(|y| y.to_string()).unwrap_or_default(),
                    r.doi.as_deref().map(sanitize_field).unwrap_or_default(),
                ];
                out.push_str(&fields.join("\t"));
                out.push('\n');
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("corpus serializes")
    }
}

/// Parses a seed bibliography in the TSV format.
pub fn parse_corpus(input: &str) -> Result<Corpus, CorpusError> {
    let mut lines = input
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'));

    let (header_line, header) = lines.next().ok_or(CorpusError::Empty)?;
    let columns: Vec<&str> = header.split('\t').map(str::trim).collect();
    if columns != SEED_COLUMNS {
        return Err(CorpusError::Malformed {
            line: header_line,
            message: format!("expected header `{}`", SEED_COLUMNS.join("\\t")),
        });
    }

    let mut records = Vec::new();
    for (line, text) in lines {
        let record = parse_row(text).map_err(|message| CorpusError::Malformed { line, message })?;
        records.push(record);
    }
    if records.is_empty() {
        return Err(CorpusError::Empty);
    }
    Ok(Corpus::from_records(records))
}

/// Parses the JSON form of a corpus (as produced by [`Corpus::to_json`]).
pub fn parse_corpus_json(input: &str) -> Result<Corpus, CorpusError> {
    let raw: Corpus = serde_json::from_str(input).map_err(|e| CorpusError::Json(e.to_string()))?;
    if raw.records.is_empty() {
        return Err(CorpusError::Empty);
    }
    let mut records = Vec::with_capacity(raw.records.len());
    for (i, mut r) in raw.records.into_iter().enumerate() {
        r.validate()
            .map_err(|m| CorpusError::Json(format!("record {}: {m}", i + 1)))?;
        r.title = collapse_whitespace(&r.title);
        records.push(r);
    }
    let mut corpus = Corpus::from_records(records);
    corpus.exclusions_applied = raw.exclusions_applied;
    Ok(corpus)
}

fn parse_row(text: &str) -> Result<ReferenceRecord, String> {
    let fields: Vec<&str> = text.split('\t').collect();
    if fields.len() != SEED_COLUMNS.len() {
        return Err(format!(
            "expected {} tab-separated fields, found {}",
            SEED_COLUMNS.len(),
            fields.len()
        ));
    }
    let raw_key = fields[0].trim().to_string();
    let chapter = fields[1].trim();
    if chapter.is_empty() {
        return Err("empty chapter_tag".into());
    }
    let year = match fields[4].trim() {
        "" => None,
        y => Some(y.parse::<i32>().map_err(|_| format!("invalid year `{y}`"))?),
    };
    let doi = Some(fields[5].trim()).filter(|d| !d.is_empty()).map(str::to_string);
    let authors = fields[3]
        .split(';')
        .map(str::trim)
        .filter(|a| !a.is_empty())
        .map(str::to_string)
        .collect();
    let record = ReferenceRecord {
        raw_key,
        title: collapse_whitespace(fields[2]),
        authors,
        year,
        chapter_tags: BTreeSet::from([chapter.to_string()]),
        doi,
    };
    record.validate()?;
    Ok(record)
}

/// Parses an exclusion list: one raw key per line, `#` starts a comment.
pub fn parse_exclusions(input: &str) -> BTreeSet<String> {
    input
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect()
}

/// Removes every record whose raw key is listed. Keys that match nothing are
/// reported in [`Exclusion::missing`] and logged.
pub fn apply_exclusions(corpus: &Corpus, exclusion_keys: &BTreeSet<String>) -> Exclusion {
    let present: HashSet<&str> = corpus.records.iter().map(|r| r.raw_key.as_str()).collect();
    let already: HashSet<&str> = corpus.exclusions_applied.iter().map(String::as_str).collect();

    let mut missing = Vec::new();
    for key in exclusion_keys {
        if !present.contains(key.as_str()) && !already.contains(key.as_str()) {
            log::warn!("exclusion key `{key}` not present in corpus");
            missing.push(key.clone());
        }
    }

    let records = corpus
        .records
        .iter()
        .filter(|r| !exclusion_keys.contains(&r.raw_key))
        .cloned()
        .collect();
    let mut exclusions_applied = corpus.exclusions_applied.clone();
    for key in exclusion_keys {
        if present.contains(key.as_str()) && !already.contains(key.as_str()) {
            exclusions_applied.push(key.clone());
        }
    }

    Exclusion {
        corpus: Corpus {
            records,
            exclusions_applied,
        },
        missing,
    }
}

/// Case-folded, diacritic-stripped, punctuation-free title with single spaces.
pub fn normalize_title(title: &str) -> String {
    let folded: String = title
        .nfd()
        .filter(|c| !is_combining_mark(*c))
        .flat_map(char::to_lowercase)
        .map(|c| if c.is_alphanumeric() { c } else { ' ' })
        .collect();
    collapse_whitespace(&folded)
}

fn is_combining_mark(c: char) -> bool {
    matches!(c as u32, 0x0300..=0x036F | 0x1AB0..=0x1AFF | 0x1DC0..=0x1DFF | 0x20D0..=0x20FF | 0xFE20..=0xFE2F)
}

pub(crate) fn collapse_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn sanitize_field(s: &str) -> String {
    s.replace(['\t', '\n', '\r'], " ")
}
