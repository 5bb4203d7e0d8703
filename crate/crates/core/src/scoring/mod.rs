//! Query scoring: word partition, MIL, MILSTEM and the neighbor-expanded
//! CN score.
//!
//! Every score is a product of per-word probability factors. Products are
//! accumulated as sums of logs, each factor floored at
//! [`ScoreConfig::clamp_epsilon`] first, so long queries with tiny factors
//! still rank correctly.

mod aggregate;
mod config;
mod plan;
mod registry;

use std::collections::BTreeSet;

pub use aggregate::Aggregator;
pub use config::{ConditionalEstimator, ScoreConfig, DEFAULT_CLAMP_EPSILON};
pub use plan::{CnTerm, QueryPlan, RelatedTerm};
pub use registry::{CnScorer, MilScorer, MilStemScorer, Scorer, ScorerFactory, ScorerRegistry};

use crate::cooccur::CooccurrenceModel;
use crate::detectors::DetectorBank;
use crate::error::{Error, Result};
use crate::knowledge::{KnowledgeGraph, Relatedness, RelatednessSource};
use crate::text::{is_stopword, Token, WordClass, WordClassMap};

/// Borrowed view of every loaded source a scorer may consult.
#[derive(Debug, Clone, Copy)]
pub struct World<'a> {
    pub bank: &'a DetectorBank,
    pub graph: &'a KnowledgeGraph,
    pub corpus: &'a CooccurrenceModel,
    pub word_classes: &'a WordClassMap,
}

impl<'a> World<'a> {
    pub fn relatedness(&self, kind: Relatedness) -> RelatednessSource<'a> {
        match kind {
            Relatedness::Graph => RelatednessSource::Graph(self.graph),
            Relatedness::CorpusCooccurrence => RelatednessSource::Corpus(self.corpus),
        }
    }

    fn image_idx(&self, image: &str) -> Result<usize> {
        self.bank
            .image_index(image)
            .ok_or_else(|| Error::UnknownImage(image.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum WordKind {
    Detectable,
    StemDetectable,
    CnDetectable,
    Undetected,
}

impl WordKind {
    pub fn label(self) -> &'static str {
        match self {
            WordKind::Detectable => "detectable",
            WordKind::StemDetectable => "stem",
            WordKind::CnDetectable => "cn",
            WordKind::Undetected => "undetected",
        }
    }
}

/// One query word and the detectors it resolves to: itself, its stem class,
/// or its related concepts with a stem detector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordAssignment {
    pub word: String,
    pub kind: WordKind,
    pub via: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WordPartition {
    pub detectable: BTreeSet<String>,
    pub stem_detectable: BTreeSet<String>,
    pub cn_detectable: BTreeSet<String>,
    pub undetected: BTreeSet<String>,
}

impl WordPartition {
    pub fn kind_of(&self, word: &str) -> Option<WordKind> {
        [
            (&self.detectable, WordKind::Detectable),
            (&self.stem_detectable, WordKind::StemDetectable),
            (&self.cn_detectable, WordKind::CnDetectable),
            (&self.undetected, WordKind::Undetected),
        ]
        .into_iter()
        .find(|(set, _)| set.contains(word))
        .map(|(_, k)| k)
    }
}

fn passes_cn_gate(word: &str, classes: &WordClassMap, config: &ScoreConfig) -> bool {
    if config.stopword_filter && is_stopword(word) {
        return false;
    }
    !config.noun_only || classes.class_of(word) == WordClass::Noun
}

/// Classifies each distinct query word, first match wins:
/// detectable → stem-detectable → CN-detectable → undetected.
/// The stopword and noun-only filters only gate the CN class.
pub fn classify_words(query: &[Token], world: &World, config: &ScoreConfig) -> Vec<WordAssignment> {
    let source = world.relatedness(config.relatedness);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for token in query {
        let word = token.surface.as_str();
        if !seen.insert(word) {
            continue;
        }
        let bank = world.bank;
        let (kind, via) = if bank.contains_word(word) {
            (WordKind::Detectable, vec![word.to_string()])
        } else if bank.is_stem_detectable(word) {
            let via = bank.st_det(word).into_iter().map(String::from).collect();
            (WordKind::StemDetectable, via)
        } else {
            let related = if passes_cn_gate(word, world.word_classes, config) {
                source.related_detectable(word, bank)
            } else {
                BTreeSet::new()
            };
            if related.is_empty() {
                (WordKind::Undetected, Vec::new())
            } else {
                (
                    WordKind::CnDetectable,
                    related.into_iter().map(String::from).collect(),
                )
            }
        };
        out.push(WordAssignment {
            word: word.to_string(),
            kind,
            via,
        });
    }
    out
}

pub fn partition_query(query: &[Token], world: &World, config: &ScoreConfig) -> WordPartition {
    let mut p = WordPartition::default();
    for a in classify_words(query, world, config) {
        let set = match a.kind {
            WordKind::Detectable => &mut p.detectable,
            WordKind::StemDetectable => &mut p.stem_detectable,
            WordKind::CnDetectable => &mut p.cn_detectable,
            WordKind::Undetected => &mut p.undetected,
        };
        set.insert(a.word);
    }
    p
}

/// `(P̂(w|w'), P̂(w|¬w'))` under the configured estimator.
pub fn conditional_pair(word: &str, related: &str, world: &World, config: &ScoreConfig) -> (f64, f64) {
    match config.conditional_estimator {
        ConditionalEstimator::Corpus => (
            world.corpus.cond_prob(word, related),
            world.corpus.cond_prob_neg(word, related),
        ),
        ConditionalEstimator::ConstantOne => (1.0, 0.0),
        ConditionalEstimator::GraphWeight => {
            let max = world.graph.max_weight();
            let w = world.graph.edge_weight(word, related).unwrap_or(0.0);
            let given = if max > 0.0 { (w / max).min(1.0) } else { 0.0 };
            (given, 0.0)
        }
    }
}

/// Total-probability estimate of `word` from one related concept:
/// `P̂(w|w')·q + P̂(w|¬w')·(1 − q)` with `q` the stem-max detector score of
/// `related`.
pub fn pair_estimate(
    word: &str,
    related: &str,
    image: &str,
    world: &World,
    config: &ScoreConfig,
) -> Result<f64> {
    let q = world.bank.stem_max_estimate(related, image)?;
    let (given, given_not) = conditional_pair(word, related, world, config);
    Ok(plan::mix(given, given_not, q))
}

/// `F` over the pair estimates of every related detectable concept.
pub fn aggregate_estimate(word: &str, image: &str, world: &World, config: &ScoreConfig) -> Result<f64> {
    let related = world
        .relatedness(config.relatedness)
        .related_detectable(word, world.bank);
    let estimates = related
        .iter()
        .map(|r| pair_estimate(word, r, image, world, config))
        .collect::<Result<Vec<_>>>()?;
    config
        .aggregator
        .apply(&estimates)
        .ok_or_else(|| Error::NoRelatedDetector(word.to_string()))
}

fn score_with(scorer: &dyn Scorer, query: &[Token], image: &str, world: &World) -> Result<f64> {
    let idx = world.image_idx(image)?;
    Ok(scorer.plan(query, world).score(world.bank, idx))
}

/// Product of the detector scores of the query's vocabulary words.
pub fn mil_score(query: &[Token], image: &str, world: &World, config: &ScoreConfig) -> Result<f64> {
    score_with(&MilScorer::new(config.clamp_epsilon), query, image, world)
}

/// MIL extended with stem-max estimates for stem-detectable words.
pub fn milstem_score(query: &[Token], image: &str, world: &World, config: &ScoreConfig) -> Result<f64> {
    score_with(&MilStemScorer::new(config.clamp_epsilon), query, image, world)
}

/// MILSTEM extended with aggregated neighbor estimates for CN-detectable words.
pub fn cn_score(query: &[Token], image: &str, world: &World, config: &ScoreConfig) -> Result<f64> {
    score_with(&CnScorer::new("CN", config.clone()), query, image, world)
}
