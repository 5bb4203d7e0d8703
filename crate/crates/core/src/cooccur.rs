//! Tag-corpus co-occurrence counts and the conditional estimates
//! `P(w | w')` and `P(w | ¬w')` derived from them.
//!
//! Counting is over images: each image's tags are stemmed and deduplicated
//! before anything is counted.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::io::BufRead;
use std::sync::RwLock;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::text::{stem, tokenize};

/// When pair counts are materialized. Both modes return identical values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PairCounting {
    /// Count every co-occurring pair at ingest.
    Eager,
    /// Intersect posting lists on first request and cache the result.
    #[default]
    Lazy,
}

#[derive(Debug)]
enum PairCache {
    Eager(HashMap<(String, String), u32>),
    Lazy(RwLock<HashMap<(String, String), u32>>),
}

#[derive(Debug)]
pub struct CooccurrenceModel {
    image_ids: Vec<String>,
    tag_sets: Vec<BTreeSet<String>>,
    /// Stem → sorted indices of the images tagged with it.
    postings: BTreeMap<String, Vec<u32>>,
    pairs: PairCache,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TagLine {
    image: String,
    tags: Vec<String>,
}

fn pair_key(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

fn intersection_len(a: &[u32], b: &[u32]) -> u32 {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

impl CooccurrenceModel {
    /// Builds the model from `(image id, raw tags)` pairs. Multi-word tags
    /// contribute each of their words.
    pub fn from_tagged_images<I, T, S>(images: I, mode: PairCounting) -> Result<Self>
    where
        I: IntoIterator<Item = (String, T)>,
        T: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut builder = Builder::default();
        for (image, tags) in images {
            builder.push(image, tags).map_err(Error::Config)?;
        }
        Ok(builder.finish(mode))
    }

    /// Reads the JSON-lines tag corpus `{"image": ..., "tags": [...]}`.
    pub fn from_jsonl<R: BufRead>(reader: R, file: &str, mode: PairCounting) -> Result<Self> {
        let mut builder = Builder::default();
        for (i, line) in reader.lines().enumerate() {
            let line_no = i + 1;
            let line = line.map_err(|e| Error::parse(file, line_no, e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: TagLine =
                serde_json::from_str(&line).map_err(|e| Error::parse(file, line_no, e.to_string()))?;
            builder
                .push(rec.image, rec.tags)
                .map_err(|e| Error::parse(file, line_no, e))?;
        }
        Ok(builder.finish(mode))
    }

    pub fn n_images(&self) -> u32 {
        self.image_ids.len() as u32
    }

    pub fn image_ids(&self) -> &[String] {
        &self.image_ids
    }

    /// Stemmed, deduplicated tag set of each image, in ingest order.
    pub fn tag_sets(&self) -> &[BTreeSet<String>] {
        &self.tag_sets
    }

    /// All stems seen in the corpus.
    pub fn stems(&self) -> impl Iterator<Item = &str> {
        self.postings.keys().map(String::as_str)
    }

    /// Number of images tagged with stem `s`.
    pub fn df(&self, s: &str) -> u32 {
        self.postings.get(s).map_or(0, |p| p.len() as u32)
    }

    /// Number of images tagged with both stems. `co_df(a, a) == df(a)`.
    pub fn co_df(&self, a: &str, b: &str) -> u32 {
        if a == b {
            return self.df(a);
        }
        let (Some(pa), Some(pb)) = (self.postings.get(a), self.postings.get(b)) else {
            return 0;
        };
        let key = pair_key(a, b);
        match &self.pairs {
            PairCache::Eager(map) => map.get(&key).copied().unwrap_or(0),
            PairCache::Lazy(cache) => {
                if let Some(&n) = cache.read().expect("pair cache poisoned").get(&key) {
                    return n;
                }
                let n = intersection_len(pa, pb);
                cache.write().expect("pair cache poisoned").insert(key, n);
                n
            }
        }
    }

    /// `P(w | given)`: images tagged with both over images tagged with `given`.
    /// Zero when `given` never occurs.
    pub fn cond_prob(&self, w: &str, given: &str) -> f64 {
        let (sw, sg) = (stem(w), stem(given));
        let denom = self.df(&sg);
        if denom == 0 {
            return 0.0;
        }
        self.co_df(&sw, &sg) as f64 / denom as f64
    }

    /// `P(w | ¬given)`: images tagged with `w` but not `given`, over images
    /// not tagged with `given`. Zero when every image carries `given`.
    pub fn cond_prob_neg(&self, w: &str, given: &str) -> f64 {
        let (sw, sg) = (stem(w), stem(given));
        let denom = self.n_images() - self.df(&sg);
        if denom == 0 {
            return 0.0;
        }
        (self.df(&sw) - self.co_df(&sw, &sg)) as f64 / denom as f64
    }

    /// Stems co-occurring with `s` on at least one image, excluding `s`.
    pub fn cooccurring(&self, s: &str) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        if let Some(posting) = self.postings.get(s) {
            for &img in posting {
                for t in &self.tag_sets[img as usize] {
                    if t != s {
                        out.insert(t.as_str());
                    }
                }
            }
        }
        out
    }

    /// Ids of the images with a tag whose stem equals `stem(word)`.
    pub fn images_tagged(&self, word: &str) -> Vec<&str> {
        self.postings
            .get(&stem(word))
            .map(|p| p.iter().map(|&i| self.image_ids[i as usize].as_str()).collect())
            .unwrap_or_default()
    }
}

#[derive(Default)]
struct Builder {
    image_ids: Vec<String>,
    seen: HashSet<String>,
    tag_sets: Vec<BTreeSet<String>>,
}

impl Builder {
    fn push<T, S>(&mut self, image: String, tags: T) -> Result<(), String>
    where
        T: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        if image.is_empty() {
            return Err("empty image id".into());
        }
        if !self.seen.insert(image.clone()) {
            return Err(format!("duplicate image id `{image}`"));
        }
        let set = tags
            .into_iter()
            .flat_map(|t| tokenize(t.as_ref()))
            .map(|t| t.stem)
            .collect();
        self.image_ids.push(image);
        self.tag_sets.push(set);
        Ok(())
    }

    fn finish(self, mode: PairCounting) -> CooccurrenceModel {
        let mut postings: BTreeMap<String, Vec<u32>> = BTreeMap::new();
        for (i, set) in self.tag_sets.iter().enumerate() {
            for t in set {
                postings.entry(t.clone()).or_default().push(i as u32);
            }
        }
        let pairs = match mode {
            PairCounting::Lazy => PairCache::Lazy(RwLock::new(HashMap::new())),
            PairCounting::Eager => {
                let mut map = HashMap::new();
                for set in &self.tag_sets {
                    let tags: Vec<&String> = set.iter().collect();
                    for (i, a) in tags.iter().enumerate() {
                        for b in &tags[i + 1..] {
                            *map.entry(((*a).clone(), (*b).clone())).or_insert(0u32) += 1;
                        }
                    }
                }
                PairCache::Eager(map)
            }
        };
        CooccurrenceModel {
            image_ids: self.image_ids,
            tag_sets: self.tag_sets,
            postings,
            pairs,
        }
    }
}
