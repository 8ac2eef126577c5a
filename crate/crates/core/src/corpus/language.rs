//! Title language identification.
//!
//! A multinomial naive Bayes classifier over space-padded character trigrams,
//! trained from one plain-text sample per language. Titles written mostly in
//! Han characters skip the trigram model and are tagged `zh` by script.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use super::CorpusError;

/// Code for titles whose language could not be determined.
pub const UNDETERMINED: &str = "und";

const BUNDLED: [(&str, &str); 5] = [
    ("de", include_str!("../../profiles/de.txt")),
    ("en", include_str!("../../profiles/en.txt")),
    ("es", include_str!("../../profiles/es.txt")),
    ("fr", include_str!("../../profiles/fr.txt")),
    ("pt", include_str!("../../profiles/pt.txt")),
];

const SMOOTHING: f64 = 0.5;
/// Below this share of trigrams seen in training, the title is `und`.
const MIN_KNOWN_SHARE: f64 = 0.3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LanguageTag {
    pub code: String,
    pub confidence: f64,
}

impl LanguageTag {
    pub fn new(code: &str, confidence: f64) -> Option<Self> {
        let valid = code == UNDETERMINED
            || (code.len() == 2 && code.chars().all(|c| c.is_ascii_lowercase()));
        (valid && (0.0..=1.0).contains(&confidence)).then(|| LanguageTag {
            code: code.to_string(),
            confidence,
        })
    }

    pub fn undetermined() -> Self {
        LanguageTag {
            code: UNDETERMINED.to_string(),
            confidence: 0.0,
        }
    }

    pub fn is_undetermined(&self) -> bool {
        self.code == UNDETERMINED
    }
}

#[derive(Debug, Clone)]
struct Profile {
    code: String,
    counts: HashMap<String, u32>,
    total: u64,
}

#[derive(Debug, Clone)]
pub struct LanguageDetector {
    profiles: Vec<Profile>,
    vocabulary: usize,
}

impl LanguageDetector {
    /// Detector trained on the bundled samples (de, en, es, fr, pt; zh by script).
    pub fn bundled() -> &'static LanguageDetector {
        static DETECTOR: OnceLock<LanguageDetector> = OnceLock::new();
        DETECTOR.get_or_init(|| {
            LanguageDetector::from_samples(BUNDLED.iter().map(|(c, t)| (c.to_string(), t.to_string())))
        })
    }

    /// Trains one profile per `(code, sample text)` pair.
    pub fn from_samples<I: IntoIterator<Item = (String, String)>>(samples: I) -> Self {
        let mut profiles: Vec<Profile> = samples
            .into_iter()
            .map(|(code, text)| {
                let mut counts = HashMap::new();
                let mut total = 0u64;
                for token in tokenize(&text) {
                    for tri in trigrams(&token) {
                        *counts.entry(tri).or_insert(0) += 1;
                        total += 1;
                    }
                }
                Profile { code, counts, total }
            })
            .collect();
        profiles.sort_by(|a, b| a.code.cmp(&b.code));
        let vocabulary = profiles
            .iter()
            .flat_map(|p| p.counts.keys())
            .collect::<HashSet<_>>()
            .len()
            .max(1);
        LanguageDetector { profiles, vocabulary }
    }

    /// Trains from a directory holding one `<code>.txt` sample per language.
    pub fn from_dir(dir: &Path) -> std::io::Result<Self> {
        let mut samples = Vec::new();
        for entry in fs::read_dir(dir)? {
            let path = entry?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("txt") {
                continue;
            }
            let Some(code) = path.file_stem().and_then(|s| s.to_str()) else {
                continue;
            };
            if LanguageTag::new(code, 0.0).is_none() || code == UNDETERMINED {
                log::warn!("skipping profile with invalid language code: {}", path.display());
                continue;
            }
            samples.push((code.to_string(), fs::read_to_string(&path)?));
        }
        Ok(Self::from_samples(samples))
    }

    pub fn languages(&self) -> Vec<&str> {
        self.profiles.iter().map(|p| p.code.as_str()).collect()
    }

    pub fn detect(&self, title: &str) -> Result<LanguageTag, CorpusError> {
        if title.trim().is_empty() {
            return Err(CorpusError::EmptyTitle);
        }
        if let Some(tag) = script_vote(title) {
            return Ok(tag);
        }
        let tokens = tokenize(title);
        if tokens.len() < 2 || self.profiles.is_empty() {
            return Ok(LanguageTag::undetermined());
        }

        let grams: Vec<String> = tokens.iter().flat_map(|t| trigrams(t)).collect();
        let known = grams
            .iter()
            .filter(|g| self.profiles.iter().any(|p| p.counts.contains_key(*g)))
            .count();
        if (known as f64) < MIN_KNOWN_SHARE * grams.len() as f64 {
            return Ok(LanguageTag::undetermined());
        }

        let scores: Vec<f64> = self
            .profiles
            .iter()
            .map(|p| {
                let denom = (p.total as f64 + SMOOTHING * self.vocabulary as f64).ln();
                grams
                    .iter()
                    .map(|g| {
                        let c = p.counts.get(g).copied().unwrap_or(0) as f64;
                        (c + SMOOTHING).ln() - denom
                    })
                    .sum()
            })
            .collect();

        // Posterior over languages, then margin between the two best.
        let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
        let norm: f64 = weights.iter().sum();
        let mut order: Vec<usize> = (0..scores.len()).collect();
        // Ties resolve to the alphabetically first code.
        order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
        let best = order[0];
        let runner_up = order.get(1).map(|&i| weights[i] / norm).unwrap_or(0.0);
        let confidence = (weights[best] / norm - runner_up).clamp(0.0, 1.0);
        Ok(LanguageTag {
            code: self.profiles[best].code.clone(),
            confidence,
        })
    }
}

/// Tags a title with the bundled detector.
pub fn detect_language(title: &str) -> Result<LanguageTag, CorpusError> {
    LanguageDetector::bundled().detect(title)
}

/// Share of titles per detected language code. Shares sum to one.
pub fn language_shares<S: AsRef<str>>(
    detector: &LanguageDetector,
    titles: &[S],
) -> Result<BTreeMap<String, f64>, CorpusError> {
    if titles.is_empty() {
        return Err(CorpusError::NoTitles);
    }
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for title in titles {
        let code = match detector.detect(title.as_ref()) {
            Ok(tag) => tag.code,
            Err(CorpusError::EmptyTitle) => UNDETERMINED.to_string(),
            Err(e) => return Err(e),
        };
        *counts.entry(code).or_insert(0) += 1;
    }
    let n = titles.len() as f64;
    Ok(counts
        .into_iter()
        .map(|(code, c)| (code, c as f64 / n))
        .collect())
}

/// Majority vote on East-Asian scripts. Returns `None` for other scripts.
fn script_vote(title: &str) -> Option<LanguageTag> {
    let (mut han, mut kana, mut hangul, mut letters) = (0usize, 0usize, 0usize, 0usize);
    for c in title.chars().filter(|c| c.is_alphabetic()) {
        letters += 1;
        match c as u32 {
            0x3400..=0x4DBF | 0x4E00..=0x9FFF | 0xF900..=0xFAFF | 0x20000..=0x2FA1F => han += 1,
            0x3040..=0x30FF | 0x31F0..=0x31FF => kana += 1,
            0xAC00..=0xD7AF | 0x1100..=0x11FF => hangul += 1,
            _ => {}
        }
    }
    if letters == 0 || 2 * (han + kana + hangul) < letters {
        return None;
    }
    // Japanese mixes kana with Han; neither it nor Korean has a profile.
    if kana > 0 || hangul > han {
        return Some(LanguageTag::undetermined());
    }
    Some(LanguageTag {
        code: "zh".to_string(),
        confidence: han as f64 / letters as f64,
    })
}

fn tokenize(text: &str) -> Vec<String> {
    let lowered: String = text.nfc().flat_map(char::to_lowercase).collect();
    lowered
        .split(|c: char| !c.is_alphabetic())
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

fn trigrams(token: &str) -> Vec<String> {
    let chars: Vec<char> = std::iter::once(' ')
        .chain(token.chars())
        .chain(std::iter::once(' '))
        .collect();
    chars.windows(3).map(|w| w.iter().collect()).collect()
}
