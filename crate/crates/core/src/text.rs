//! Query and tag normalization.
//!
//! Every word that reaches the scoring engine passes through [`tokenize`]:
//! lowercase, whitespace split, leading/trailing punctuation stripped, empty
//! tokens dropped. Word identity across the detector vocabulary, the graph
//! and the tag corpus is decided by [`stem`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Read;
use std::str::FromStr;

use rust_stemmers::{Algorithm, Stemmer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper bound on stemmer passes. Snowball English reaches a fixed point in
/// at most two extra passes on every input we have seen.
const MAX_STEM_PASSES: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub stem: String,
}

impl Token {
    pub fn new(surface: impl Into<String>) -> Self {
        let surface = surface.into();
        let stem = stem(&surface);
        Token { surface, stem }
    }
}

/// Splits `text` into normalized tokens in first-occurrence order, each
/// surface form appearing once.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut seen = BTreeSet::new();
    let mut tokens = Vec::new();
    for raw in text.split_whitespace() {
        let surface = normalize_word(raw);
        if surface.is_empty() || !seen.insert(surface.clone()) {
            continue;
        }
        tokens.push(Token::new(surface));
    }
    tokens
}

/// Set view of [`tokenize`]: the surface words a query contributes to scoring.
pub fn token_set(text: &str) -> BTreeSet<String> {
    tokenize(text).into_iter().map(|t| t.surface).collect()
}

/// Lowercases a single word and strips leading/trailing punctuation.
/// Interior characters (`t-shirt`, `o'clock`) are kept.
pub fn normalize_word(raw: &str) -> String {
    raw.trim_matches(|c: char| !c.is_alphanumeric())
        .to_lowercase()
}

/// English Snowball (Porter2) stem, iterated to a fixed point so that
/// `stem(stem(w)) == stem(w)` holds for every input.
pub fn stem(word: &str) -> String {
    let stemmer = Stemmer::create(Algorithm::English);
    let mut current = stemmer.stem(word).into_owned();
    for _ in 0..MAX_STEM_PASSES {
        let next = stemmer.stem(&current);
        if next == current {
            break;
        }
        current = next.into_owned();
    }
    current
}

pub fn stem_set<'a, I>(words: I) -> BTreeSet<String>
where
    I: IntoIterator<Item = &'a str>,
{
    words.into_iter().map(stem).collect()
}

// Articles, prepositions, pronouns, conjunctions and auxiliaries.
const STOPWORDS: &[&str] = &[
    "a", "about", "above", "after", "again", "against", "all", "am", "an", "and", "any", "are",
    "around", "as", "at", "be", "been", "before", "being", "below", "between", "both", "but",
    "by", "can", "could", "did", "do", "does", "doing", "down", "during", "each", "few", "for",
    "from", "further", "had", "has", "have", "having", "he", "her", "here", "hers", "herself",
    "him", "himself", "his", "how", "i", "if", "in", "into", "is", "it", "its", "itself", "just",
    "may", "me", "might", "more", "most", "must", "my", "myself", "near", "no", "nor", "not",
    "of", "off", "on", "once", "only", "onto", "or", "other", "our", "ours", "ourselves", "out",
    "over", "own", "same", "shall", "she", "should", "so", "some", "such", "than", "that", "the",
    "their", "theirs", "them", "themselves", "then", "there", "these", "they", "this", "those",
    "through", "to", "too", "toward", "towards", "under", "until", "up", "upon", "very", "was",
    "we", "were", "what", "when", "where", "which", "while", "who", "whom", "why", "will", "with",
    "within", "without", "would", "you", "your", "yours", "yourself", "yourselves",
];

pub fn is_stopword(word: &str) -> bool {
    STOPWORDS.binary_search(&word).is_ok()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WordClass {
    Noun,
    Verb,
    Adjective,
    Other,
}

impl FromStr for WordClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "noun" => Ok(WordClass::Noun),
            "verb" => Ok(WordClass::Verb),
            "adjective" => Ok(WordClass::Adjective),
            "other" => Ok(WordClass::Other),
            other => Err(format!("unknown word class `{other}`")),
        }
    }
}

impl fmt::Display for WordClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WordClass::Noun => "noun",
            WordClass::Verb => "verb",
            WordClass::Adjective => "adjective",
            WordClass::Other => "other",
        })
    }
}

/// Word → part-of-speech map supplied alongside the detector bank.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordClassMap {
    entries: BTreeMap<String, WordClass>,
}

impl WordClassMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, word: &str, class: WordClass) {
        self.entries.insert(word.to_lowercase(), class);
    }

    /// Class of `word`, falling back to any entry sharing its stem, then
    /// to [`WordClass::Other`].
    pub fn class_of(&self, word: &str) -> WordClass {
        if let Some(class) = self.entries.get(word) {
            return *class;
        }
        let target = stem(word);
        self.entries
            .iter()
            .find(|(w, _)| stem(w) == target)
            .map(|(_, c)| *c)
            .unwrap_or(WordClass::Other)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, WordClass)> {
        self.entries.iter().map(|(w, c)| (w.as_str(), *c))
    }

    /// Reads `word,class` lines. A leading `word,class` header is optional.
    pub fn from_csv<R: Read>(reader: R, file: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(reader);
        let mut map = WordClassMap::new();
        for (i, record) in rdr.records().enumerate() {
            let line = i + 1;
            let record = record.map_err(|e| Error::parse(file, line, e.to_string()))?;
            if record.len() != 2 {
                return Err(Error::parse(
                    file,
                    line,
                    format!("expected `word,class`, found {} fields", record.len()),
                ));
            }
            if line == 1 && record[0].eq_ignore_ascii_case("word") {
                continue;
            }
            let word = normalize_word(&record[0]);
            if word.is_empty() {
                return Err(Error::parse(file, line, "empty word"));
            }
            let class = record[1]
                .parse::<WordClass>()
                .map_err(|e| Error::parse(file, line, e))?;
            map.entries.insert(word, class);
        }
        Ok(map)
    }
}
