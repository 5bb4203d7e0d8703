//! Random tiny worlds and a brute-force reference scorer.
//!
//! The reference works on the raw records only: linear scans, direct
//! products, no log space and none of the library's indices. It shares only
//! the text normalization (`tokenize`, `stem`, `is_stopword`), which defines
//! word identity for both sides.

#![allow(dead_code)]

use std::collections::BTreeSet;

use cnret::cooccur::{CooccurrenceModel, PairCounting};
use cnret::detectors::DetectorBank;
use cnret::knowledge::{EdgeFilter, KnowledgeGraph, Relatedness, Relation};
use cnret::scoring::{Aggregator, ConditionalEstimator, ScoreConfig, World};
use cnret::text::{is_stopword, stem, tokenize, WordClass, WordClassMap};
use cnret::Dataset;
use rand::seq::SliceRandom;
use rand::Rng;

/// Words with shared stems (dog/dogs, run/runs/running, ...), stopwords,
/// and graph-only concepts.
pub const POOL: [&str; 24] = [
    "dog", "dogs", "run", "runs", "running", "man", "person", "kitchen", "chef", "tuxedo",
    "jacket", "bagel", "bread", "doughnut", "hotel", "resort", "grass", "table", "the", "a",
    "cat", "cats", "prom", "dish",
];

const REL_TYPES: [&str; 5] = ["IsA", "AtLocation", "RelatedTo", "Antonym", "CapableOf"];

#[derive(Debug, Clone)]
pub struct RawWorld {
    pub vocab: Vec<String>,
    pub images: Vec<(String, Vec<(String, f64)>)>,
    pub edges: Vec<Relation>,
    pub tags: Vec<(String, Vec<String>)>,
    pub classes: Vec<(String, WordClass)>,
}

fn pick<R: Rng>(rng: &mut R, n: usize) -> Vec<String> {
    let mut pool = POOL.to_vec();
    pool.shuffle(rng);
    pool.into_iter().take(n).map(String::from).collect()
}

fn random_score<R: Rng>(rng: &mut R) -> f64 {
    match rng.gen_range(0..10) {
        0 => 0.0,
        1 => 1.0,
        _ => rng.gen_range(0.0..1.0),
    }
}

impl RawWorld {
    /// At most 10 images, 12 vocabulary words, 20 edges, 10 tagged images.
    pub fn random<R: Rng>(rng: &mut R) -> Self {
        let n_vocab = rng.gen_range(1..=12);
        let vocab = pick(rng, n_vocab);
        let images = (0..rng.gen_range(1..=10))
            .map(|i| {
                let mut scores = Vec::new();
                for w in &vocab {
                    if rng.gen_bool(0.7) {
                        scores.push((w.clone(), random_score(rng)));
                    }
                }
                (format!("img{i:02}"), scores)
            })
            .collect();
        let edges = (0..rng.gen_range(0..=20))
            .map(|_| {
                let ends = pick(rng, 2);
                let (start, end) = if rng.gen_bool(0.1) {
                    (ends[0].clone(), format!("{} {}", ends[0], ends[1]))
                } else {
                    (ends[0].clone(), ends[1].clone())
                };
                Relation {
                    rel_type: REL_TYPES[rng.gen_range(0..REL_TYPES.len())].to_string(),
                    start,
                    end,
                    weight: (rng.gen_range(0.0..4.0_f64) * 4.0).round() / 4.0,
                }
            })
            .collect();
        let tags = (0..rng.gen_range(0..=10))
            .map(|i| {
                let n = rng.gen_range(1..=5);
                (format!("t{i:02}"), pick(rng, n))
            })
            .collect();
        let mut classes = Vec::new();
        for w in POOL {
            if rng.gen_bool(0.5) {
                let c = [WordClass::Noun, WordClass::Verb, WordClass::Adjective][rng.gen_range(0..3)];
                classes.push((w.to_string(), c));
            }
        }
        RawWorld {
            vocab,
            images,
            edges,
            tags,
            classes,
        }
    }

    pub fn random_query<R: Rng>(rng: &mut R) -> Vec<String> {
        let n = rng.gen_range(1..=6);
        pick(rng, n)
    }

    pub fn dataset(&self) -> Dataset {
        let mut word_classes = WordClassMap::new();
        for (w, c) in &self.classes {
            word_classes.insert(w, *c);
        }
        Dataset {
            bank: DetectorBank::new(self.vocab.clone(), self.images.clone()).unwrap(),
            edges: self.edges.clone(),
            corpus: CooccurrenceModel::from_tagged_images(self.tags.clone(), PairCounting::Lazy)
                .unwrap(),
            word_classes,
        }
    }
}

/// Owned sources plus a graph, so a [`World`] can be borrowed from it.
pub struct Built {
    pub ds: Dataset,
    pub graph: KnowledgeGraph,
}

impl Built {
    pub fn new(raw: &RawWorld, min_weight: f64) -> Self {
        let ds = raw.dataset();
        let graph = KnowledgeGraph::build(
            &ds.edges,
            EdgeFilter {
                min_weight,
                allowed_rel_types: None,
            },
        );
        Built { ds, graph }
    }

    pub fn world(&self) -> World<'_> {
        self.ds.world(&self.graph)
    }
}

/// Brute-force reference over a [`RawWorld`].
pub struct Oracle<'a> {
    pub raw: &'a RawWorld,
    pub config: ScoreConfig,
}

impl<'a> Oracle<'a> {
    pub fn new(raw: &'a RawWorld, config: ScoreConfig) -> Self {
        Oracle { raw, config }
    }

    fn image(&self, image: &str) -> &[(String, f64)] {
        &self
            .raw
            .images
            .iter()
            .find(|(id, _)| id == image)
            .expect("known image")
            .1
    }

    pub fn detector(&self, image: &str, word: &str) -> f64 {
        for (w, s) in self.image(image) {
            if w == word {
                return *s;
            }
        }
        0.0
    }

    pub fn in_vocab(&self, word: &str) -> bool {
        self.raw.vocab.iter().any(|v| v == word)
    }

    pub fn st_det(&self, word: &str) -> Vec<String> {
        let s = stem(word);
        self.raw
            .vocab
            .iter()
            .filter(|v| stem(v) == s)
            .cloned()
            .collect()
    }

    pub fn stem_max(&self, image: &str, word: &str) -> f64 {
        let mut best = 0.0;
        for v in self.st_det(word) {
            let s = self.detector(image, &v);
            if s > best {
                best = s;
            }
        }
        best
    }

    pub fn neighbors(&self, word: &str) -> BTreeSet<String> {
        let s = stem(word);
        let mut out = BTreeSet::new();
        for e in &self.raw.edges {
            if e.weight < self.config.min_weight || e.start.contains(' ') || e.end.contains(' ') {
                continue;
            }
            let (sa, sb) = (stem(&e.start), stem(&e.end));
            if sa == s && sb != s {
                out.insert(e.end.clone());
            }
            if sb == s && sa != s {
                out.insert(e.start.clone());
            }
        }
        out
    }

    fn tag_sets(&self) -> Vec<BTreeSet<String>> {
        self.raw
            .tags
            .iter()
            .map(|(_, tags)| {
                tags.iter()
                    .flat_map(|t| tokenize(t))
                    .map(|t| t.stem)
                    .collect()
            })
            .collect()
    }

    pub fn df(&self, word: &str) -> u32 {
        let s = stem(word);
        self.tag_sets().iter().filter(|t| t.contains(&s)).count() as u32
    }

    pub fn co_df(&self, a: &str, b: &str) -> u32 {
        let (sa, sb) = (stem(a), stem(b));
        self.tag_sets()
            .iter()
            .filter(|t| t.contains(&sa) && t.contains(&sb))
            .count() as u32
    }

    pub fn n_images(&self) -> u32 {
        self.raw.tags.len() as u32
    }

    pub fn esp_related(&self, word: &str) -> BTreeSet<String> {
        let s = stem(word);
        let mut out = BTreeSet::new();
        for set in self.tag_sets() {
            if set.contains(&s) {
                out.extend(set.iter().filter(|t| **t != s).cloned());
            }
        }
        out
    }

    pub fn related_detectable(&self, word: &str) -> BTreeSet<String> {
        let related = match self.config.relatedness {
            Relatedness::Graph => self.neighbors(word),
            Relatedness::CorpusCooccurrence => self.esp_related(word),
        };
        related
            .into_iter()
            .filter(|c| !self.st_det(c).is_empty())
            .collect()
    }

    fn class_of(&self, word: &str) -> WordClass {
        if let Some((_, c)) = self.raw.classes.iter().find(|(w, _)| w == word) {
            return *c;
        }
        let s = stem(word);
        let mut sorted = self.raw.classes.clone();
        sorted.sort();
        sorted
            .iter()
            .find(|(w, _)| stem(w) == s)
            .map(|(_, c)| *c)
            .unwrap_or(WordClass::Other)
    }

    /// `(detectable, stem, cn)` word lists.
    pub fn partition(&self, query: &[String]) -> (Vec<String>, Vec<String>, Vec<String>) {
        let words: BTreeSet<String> = query
            .iter()
            .flat_map(|q| tokenize(q))
            .map(|t| t.surface)
            .collect();
        let (mut det, mut st, mut cn) = (Vec::new(), Vec::new(), Vec::new());
        for w in words {
            if self.in_vocab(&w) {
                det.push(w);
            } else if !self.st_det(&w).is_empty() {
                st.push(w);
            } else {
                let gate = !(self.config.stopword_filter && is_stopword(&w))
                    && (!self.config.noun_only || self.class_of(&w) == WordClass::Noun);
                if gate && !self.related_detectable(&w).is_empty() {
                    cn.push(w);
                }
            }
        }
        (det, st, cn)
    }

    fn conditionals(&self, word: &str, related: &str) -> (f64, f64) {
        match self.config.conditional_estimator {
            ConditionalEstimator::Corpus => {
                let dg = self.df(related);
                let co = self.co_df(word, related);
                let given = if dg == 0 { 0.0 } else { co as f64 / dg as f64 };
                let rest = self.n_images() - dg;
                let given_not = if rest == 0 {
                    0.0
                } else {
                    (self.df(word) - co) as f64 / rest as f64
                };
                (given, given_not)
            }
            ConditionalEstimator::ConstantOne => (1.0, 0.0),
            ConditionalEstimator::GraphWeight => {
                let mut max = 0.0f64;
                let mut w = 0.0f64;
                let sw = stem(word);
                for e in &self.raw.edges {
                    if e.weight < self.config.min_weight {
                        continue;
                    }
                    max = max.max(e.weight);
                    if e.start.contains(' ') || e.end.contains(' ') {
                        continue;
                    }
                    let (sa, sb) = (stem(&e.start), stem(&e.end));
                    if sa == sb {
                        continue;
                    }
                    if (sa == sw && e.end == related) || (sb == sw && e.start == related) {
                        w = w.max(e.weight);
                    }
                }
                (if max > 0.0 { (w / max).min(1.0) } else { 0.0 }, 0.0)
            }
        }
    }

    pub fn pair(&self, image: &str, word: &str, related: &str) -> f64 {
        let q = self.stem_max(image, related);
        let (g, n) = self.conditionals(word, related);
        g * q + n * (1.0 - q)
    }

    pub fn aggregate(&self, image: &str, word: &str) -> f64 {
        let vals: Vec<f64> = self
            .related_detectable(word)
            .iter()
            .map(|r| self.pair(image, word, r))
            .collect();
        let n = vals.len() as f64;
        match self.config.aggregator {
            Aggregator::Min => vals.iter().copied().fold(f64::INFINITY, f64::min),
            Aggregator::Max => vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            Aggregator::MeanArithmetic => vals.iter().sum::<f64>() / n,
            Aggregator::MeanGeometric => vals.iter().product::<f64>().powf(1.0 / n),
        }
    }

    fn clamp(&self, p: f64) -> f64 {
        p.max(self.config.clamp_epsilon)
    }

    pub fn mil(&self, image: &str, query: &[String]) -> f64 {
        let (det, _, _) = self.partition(query);
        let mut prod = 1.0;
        for w in &det {
            prod *= self.clamp(self.detector(image, w));
        }
        prod
    }

    pub fn milstem(&self, image: &str, query: &[String]) -> f64 {
        let (_, st, _) = self.partition(query);
        let mut prod = self.mil(image, query);
        for w in &st {
            prod *= self.clamp(self.stem_max(image, w));
        }
        prod
    }

    pub fn cn(&self, image: &str, query: &[String]) -> f64 {
        let (_, _, cn) = self.partition(query);
        let mut prod = self.milstem(image, query);
        for w in &cn {
            prod *= self.clamp(self.aggregate(image, w));
        }
        prod
    }
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    if a == b {
        return true;
    }
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

pub fn query_tokens(words: &[String]) -> Vec<cnret::text::Token> {
    tokenize(&words.join(" "))
}
