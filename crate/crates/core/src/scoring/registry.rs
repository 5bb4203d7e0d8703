//! Named scorers behind a common trait, selected at runtime by name.

use std::collections::{BTreeMap, BTreeSet};

use super::plan::{CnTerm, QueryPlan, RelatedTerm};
use super::{classify_words, conditional_pair, Aggregator, ScoreConfig, WordKind, World};
use crate::error::{Error, Result};
use crate::knowledge::Relatedness;
use crate::text::Token;

pub trait Scorer: Send + Sync {
    fn name(&self) -> &str;

    /// Compiles `query` against the sources in `world`.
    fn plan(&self, query: &[Token], world: &World) -> QueryPlan;

    /// Log score of every image of the bank, in bank order.
    fn log_scores(&self, query: &[Token], world: &World) -> Vec<f64> {
        let plan = self.plan(query, world);
        (0..world.bank.num_images())
            .map(|i| plan.log_score(world.bank, i))
            .collect()
    }
}

fn distinct_words(query: &[Token]) -> BTreeSet<&str> {
    query.iter().map(|t| t.surface.as_str()).collect()
}

fn mil_plan(query: &[Token], world: &World, epsilon: f64, with_stems: bool) -> QueryPlan {
    let bank = world.bank;
    let mut plan = QueryPlan::empty(Aggregator::Max, epsilon);
    for word in distinct_words(query) {
        if let Some(idx) = bank.word_index(word) {
            plan.detectable.push(idx as u32);
        } else if with_stems && bank.is_stem_detectable(word) {
            plan.stem_classes.push(bank.st_det_indices(word).to_vec());
        }
    }
    plan
}

/// Product of detector scores over vocabulary words.
#[derive(Debug, Clone)]
pub struct MilScorer {
    epsilon: f64,
}

impl MilScorer {
    pub fn new(epsilon: f64) -> Self {
        MilScorer { epsilon }
    }
}

impl Scorer for MilScorer {
    fn name(&self) -> &str {
        "MIL"
    }

    fn plan(&self, query: &[Token], world: &World) -> QueryPlan {
        mil_plan(query, world, self.epsilon, false)
    }
}

/// MIL plus stem-class maxima for words reachable only through stemming.
#[derive(Debug, Clone)]
pub struct MilStemScorer {
    epsilon: f64,
}

impl MilStemScorer {
    pub fn new(epsilon: f64) -> Self {
        MilStemScorer { epsilon }
    }
}

impl Scorer for MilStemScorer {
    fn name(&self) -> &str {
        "MILSTEM"
    }

    fn plan(&self, query: &[Token], world: &World) -> QueryPlan {
        mil_plan(query, world, self.epsilon, true)
    }
}

/// MILSTEM plus aggregated related-concept estimates for the remaining
/// words. Covers both graph (`CN_*`) and corpus (`ESP_*`) relatedness.
#[derive(Debug, Clone)]
pub struct CnScorer {
    name: String,
    config: ScoreConfig,
}

impl CnScorer {
    pub fn new(name: impl Into<String>, config: ScoreConfig) -> Self {
        CnScorer {
            name: name.into(),
            config,
        }
    }

    pub fn config(&self) -> &ScoreConfig {
        &self.config
    }
}

impl Scorer for CnScorer {
    fn name(&self) -> &str {
        &self.name
    }

    fn plan(&self, query: &[Token], world: &World) -> QueryPlan {
        let bank = world.bank;
        let mut plan = QueryPlan::empty(self.config.aggregator, self.config.clamp_epsilon);
        let mut assignments = classify_words(query, world, &self.config);
        assignments.sort_by(|a, b| a.word.cmp(&b.word));
        for a in assignments {
            match a.kind {
                WordKind::Detectable => {
                    plan.detectable.push(bank.word_index(&a.word).expect("detectable word") as u32)
                }
                WordKind::StemDetectable => {
                    plan.stem_classes.push(bank.st_det_indices(&a.word).to_vec())
                }
                WordKind::CnDetectable => {
                    let related = a
                        .via
                        .iter()
                        .map(|concept| {
                            let (given, given_not) =
                                conditional_pair(&a.word, concept, world, &self.config);
                            RelatedTerm {
                                concept: concept.clone(),
                                class: bank.st_det_indices(concept).to_vec(),
                                given,
                                given_not,
                            }
                        })
                        .collect();
                    plan.cn_terms.push(CnTerm {
                        word: a.word,
                        related,
                    });
                }
                WordKind::Undetected => {}
            }
        }
        plan
    }
}

pub type ScorerFactory = Box<dyn Fn(&ScoreConfig) -> Box<dyn Scorer> + Send + Sync>;

/// Scorers by name. [`ScorerRegistry::builtin`] holds MIL, MILSTEM, `CN`
/// (the base configuration as given), `CN_{MIN,MEAN_G,MEAN_A,MAX}`,
/// `ESP_{MIN,MEAN_G,MEAN_A,MAX}` and `CN_MAX_NN`.
pub struct ScorerRegistry {
    factories: BTreeMap<String, ScorerFactory>,
}

impl Default for ScorerRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

impl ScorerRegistry {
    pub fn empty() -> Self {
        ScorerRegistry {
            factories: BTreeMap::new(),
        }
    }

    pub fn builtin() -> Self {
        let mut reg = Self::empty();
        reg.register("MIL", |c| Box::new(MilScorer::new(c.clamp_epsilon)));
        reg.register("MILSTEM", |c| Box::new(MilStemScorer::new(c.clamp_epsilon)));
        reg.register("CN", |c| Box::new(CnScorer::new("CN", c.clone())));
        for agg in Aggregator::ALL {
            for (prefix, relatedness) in [
                ("CN", Relatedness::Graph),
                ("ESP", Relatedness::CorpusCooccurrence),
            ] {
                let name = format!("{prefix}_{}", agg.suffix());
                let label = name.clone();
                reg.register(&name, move |c| {
                    let config = c
                        .clone()
                        .with_aggregator(agg)
                        .with_relatedness(relatedness);
                    Box::new(CnScorer::new(label.clone(), config))
                });
            }
        }
        reg.register("CN_MAX_NN", |c| {
            let mut config = c
                .clone()
                .with_aggregator(Aggregator::Max)
                .with_relatedness(Relatedness::Graph);
            config.noun_only = true;
            Box::new(CnScorer::new("CN_MAX_NN", config))
        });
        reg
    }

    pub fn register<F>(&mut self, name: &str, factory: F)
    where
        F: Fn(&ScoreConfig) -> Box<dyn Scorer> + Send + Sync + 'static,
    {
        self.factories
            .insert(name.to_ascii_uppercase(), Box::new(factory));
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.factories.keys().map(String::as_str)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.factories.contains_key(&name.to_ascii_uppercase())
    }

    /// Instantiates `name` on top of `base`. Names are case-insensitive.
    pub fn create(&self, name: &str, base: &ScoreConfig) -> Result<Box<dyn Scorer>> {
        let factory = self
            .factories
            .get(&name.trim().to_ascii_uppercase())
            .ok_or_else(|| Error::UnknownScorer(name.to_string()))?;
        Ok(factory(base))
    }
}
