//! The detector bank: vocabulary `V` and the sparse per-image score matrix.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::BufRead;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::text::{normalize_word, stem};

/// Vocabulary, image ids and detector scores. Missing `(image, word)`
/// entries score 0. Immutable once built.
#[derive(Debug, Clone)]
pub struct DetectorBank {
    vocab: Vec<String>,
    word_index: HashMap<String, u32>,
    images: Vec<String>,
    image_index: HashMap<String, u32>,
    /// Per image, `(word index, score)` sorted by word index.
    scores: Vec<Vec<(u32, f64)>>,
    stem_index: BTreeMap<String, Vec<u32>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HeaderLine {
    vocab: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ImageLine {
    image: String,
    scores: BTreeMap<String, f64>,
}

impl DetectorBank {
    /// Builds a bank from an explicit vocabulary and per-image score lists.
    pub fn new<I, S>(vocab: Vec<String>, images: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, S)>,
        S: IntoIterator<Item = (String, f64)>,
    {
        let mut builder = Builder::new(vocab).map_err(Error::Config)?;
        for (image, scores) in images {
            builder.push(image, scores).map_err(Error::Config)?;
        }
        Ok(builder.finish())
    }

    /// Reads the JSON-lines detector file: a `{"vocab": [...]}` header line,
    /// then one `{"image": ..., "scores": {...}}` object per line.
    pub fn from_jsonl<R: BufRead>(reader: R, file: &str) -> Result<Self> {
        let mut lines = reader.lines().enumerate();
        let mut builder = None;
        for (i, line) in lines.by_ref() {
            let line_no = i + 1;
            let line = line.map_err(|e| Error::parse(file, line_no, e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let header: HeaderLine = serde_json::from_str(&line)
                .map_err(|e| Error::parse(file, line_no, format!("bad vocab header: {e}")))?;
            builder = Some(Builder::new(header.vocab).map_err(|e| Error::parse(file, line_no, e))?);
            break;
        }
        let Some(mut builder) = builder else {
            return Err(Error::parse(file, 1, "missing vocab header line"));
        };
        for (i, line) in lines {
            let line_no = i + 1;
            let line = line.map_err(|e| Error::parse(file, line_no, e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: ImageLine =
                serde_json::from_str(&line).map_err(|e| Error::parse(file, line_no, e.to_string()))?;
            builder
                .push(rec.image, rec.scores)
                .map_err(|e| Error::parse(file, line_no, e))?;
        }
        Ok(builder.finish())
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn images(&self) -> &[String] {
        &self.images
    }

    pub fn num_images(&self) -> usize {
        self.images.len()
    }

    pub fn contains_word(&self, word: &str) -> bool {
        self.word_index.contains_key(word)
    }

    pub fn word_index(&self, word: &str) -> Option<usize> {
        self.word_index.get(word).map(|&i| i as usize)
    }

    pub fn image_index(&self, image: &str) -> Option<usize> {
        self.image_index.get(image).map(|&i| i as usize)
    }

    /// Stored `(word, score)` entries of one image, in vocabulary order.
    pub fn image_scores(&self, image_idx: usize) -> impl Iterator<Item = (&str, f64)> + '_ {
        self.scores[image_idx]
            .iter()
            .map(|&(w, s)| (self.vocab[w as usize].as_str(), s))
    }

    /// Score of vocabulary entry `word_idx` on image `image_idx`; 0 when absent.
    pub fn score_at(&self, image_idx: usize, word_idx: usize) -> f64 {
        let row = &self.scores[image_idx];
        match row.binary_search_by_key(&(word_idx as u32), |&(w, _)| w) {
            Ok(pos) => row[pos].1,
            Err(_) => 0.0,
        }
    }

    pub fn detector_score(&self, image: &str, word: &str) -> Result<f64> {
        let image_idx = self
            .image_index(image)
            .ok_or_else(|| Error::UnknownImage(image.to_string()))?;
        let word_idx = self
            .word_index(word)
            .ok_or_else(|| Error::NotInVocabulary(word.to_string()))?;
        Ok(self.score_at(image_idx, word_idx))
    }

    /// Vocabulary indices sharing the stem of `word` (`stDet`).
    pub fn st_det_indices(&self, word: &str) -> &[u32] {
        self.stem_index
            .get(&stem(word))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Words of `V` sharing the stem of `word`.
    pub fn st_det(&self, word: &str) -> BTreeSet<&str> {
        self.st_det_indices(word)
            .iter()
            .map(|&i| self.vocab[i as usize].as_str())
            .collect()
    }

    pub fn is_stem_detectable(&self, word: &str) -> bool {
        !self.st_det_indices(word).is_empty()
    }

    /// Max detector score over a stem class on one image.
    pub fn max_score_at(&self, image_idx: usize, class: &[u32]) -> f64 {
        class
            .iter()
            .map(|&w| self.score_at(image_idx, w as usize))
            .fold(0.0, f64::max)
    }

    /// `max_{w' ∈ stDet(word)} P̂_V(w'|image)`.
    pub fn stem_max_estimate(&self, word: &str, image: &str) -> Result<f64> {
        let class = self.st_det_indices(word);
        if class.is_empty() {
            return Err(Error::NoStemDetector(word.to_string()));
        }
        let image_idx = self
            .image_index(image)
            .ok_or_else(|| Error::UnknownImage(image.to_string()))?;
        Ok(self.max_score_at(image_idx, class))
    }

    pub fn stem_index(&self) -> &BTreeMap<String, Vec<u32>> {
        &self.stem_index
    }
}

struct Builder {
    vocab: Vec<String>,
    word_index: HashMap<String, u32>,
    images: Vec<String>,
    image_index: HashMap<String, u32>,
    scores: Vec<Vec<(u32, f64)>>,
}

impl Builder {
    fn new(raw_vocab: Vec<String>) -> Result<Self, String> {
        let mut vocab = Vec::with_capacity(raw_vocab.len());
        let mut word_index = HashMap::with_capacity(raw_vocab.len());
        for raw in raw_vocab {
            let word = normalize_word(&raw);
            if word.is_empty() || word.contains(char::is_whitespace) {
                return Err(format!("invalid vocabulary word `{raw}`"));
            }
            if word_index.insert(word.clone(), vocab.len() as u32).is_some() {
                return Err(format!("duplicate vocabulary word `{word}`"));
            }
            vocab.push(word);
        }
        Ok(Builder {
            vocab,
            word_index,
            images: Vec::new(),
            image_index: HashMap::new(),
            scores: Vec::new(),
        })
    }

    fn push<S>(&mut self, image: String, scores: S) -> Result<(), String>
    where
        S: IntoIterator<Item = (String, f64)>,
    {
        if image.is_empty() {
            return Err("empty image id".into());
        }
        if self.image_index.contains_key(&image) {
            return Err(format!("duplicate image id `{image}`"));
        }
        let mut row = Vec::new();
        for (raw, score) in scores {
            let word = normalize_word(&raw);
            let &idx = self
                .word_index
                .get(&word)
                .ok_or_else(|| format!("score for `{raw}` which is not in the vocabulary"))?;
            if !(0.0..=1.0).contains(&score) {
                return Err(format!("score {score} for `{word}` is outside [0, 1]"));
            }
            row.push((idx, score));
        }
        row.sort_by_key(|&(w, _)| w);
        if row.windows(2).any(|p| p[0].0 == p[1].0) {
            return Err(format!("repeated word in scores of image `{image}`"));
        }
        self.image_index.insert(image.clone(), self.images.len() as u32);
        self.images.push(image);
        self.scores.push(row);
        Ok(())
    }

    fn finish(self) -> DetectorBank {
        let mut stem_index: BTreeMap<String, Vec<u32>> = BTreeMap::new();
        for (i, w) in self.vocab.iter().enumerate() {
            stem_index.entry(stem(w)).or_default().push(i as u32);
        }
        DetectorBank {
            vocab: self.vocab,
            word_index: self.word_index,
            images: self.images,
            image_index: self.image_index,
            scores: self.scores,
            stem_index,
        }
    }
}
