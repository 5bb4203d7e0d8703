use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::Aggregator;
use crate::error::{Error, Result};
use crate::knowledge::{Relatedness, DEFAULT_MIN_WEIGHT};

pub const DEFAULT_CLAMP_EPSILON: f64 = 1e-12;

/// Source of `P̂(w | w', I)` and `P̂(w | ¬w', I)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConditionalEstimator {
    /// Tag-corpus co-occurrence `P(w | w')`, `P(w | ¬w')`.
    Corpus,
    /// `1` and `0`: the estimate is the related concept's detector score.
    ConstantOne,
    /// Edge weight over the largest retained weight, and `0`.
    GraphWeight,
}

impl FromStr for ConditionalEstimator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "corpus" => Ok(ConditionalEstimator::Corpus),
            "constant-one" | "one" => Ok(ConditionalEstimator::ConstantOne),
            "graph-weight" => Ok(ConditionalEstimator::GraphWeight),
            other => Err(format!(
                "unknown estimator `{other}` (expected corpus, constant-one, graph-weight)"
            )),
        }
    }
}

impl fmt::Display for ConditionalEstimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConditionalEstimator::Corpus => "corpus",
            ConditionalEstimator::ConstantOne => "constant-one",
            ConditionalEstimator::GraphWeight => "graph-weight",
        })
    }
}

impl FromStr for Relatedness {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "graph" | "cn" => Ok(Relatedness::Graph),
            "corpus" | "corpus-cooccurrence" | "esp" => Ok(Relatedness::CorpusCooccurrence),
            other => Err(format!("unknown relatedness `{other}` (expected graph, corpus)")),
        }
    }
}

impl fmt::Display for Relatedness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relatedness::Graph => "graph",
            Relatedness::CorpusCooccurrence => "corpus-cooccurrence",
        })
    }
}

/// Knobs of the CN score. Defaults are the best-performing system: graph
/// neighbors, corpus conditionals, max aggregation, edge weight ≥ 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct ScoreConfig {
    pub aggregator: Aggregator,
    pub relatedness: Relatedness,
    pub conditional_estimator: ConditionalEstimator,
    /// Applied when the graph is built from its edge list.
    pub min_weight: f64,
    pub noun_only: bool,
    pub stopword_filter: bool,
    pub clamp_epsilon: f64,
}

impl Default for ScoreConfig {
    fn default() -> Self {
        ScoreConfig {
            aggregator: Aggregator::Max,
            relatedness: Relatedness::Graph,
            conditional_estimator: ConditionalEstimator::Corpus,
            min_weight: DEFAULT_MIN_WEIGHT,
            noun_only: false,
            stopword_filter: true,
            clamp_epsilon: DEFAULT_CLAMP_EPSILON,
        }
    }
}

impl ScoreConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.clamp_epsilon > 0.0 && self.clamp_epsilon < 1.0) {
            return Err(Error::Config(format!(
                "clamp epsilon {} must lie in (0, 1)",
                self.clamp_epsilon
            )));
        }
        if !(self.min_weight.is_finite() && self.min_weight >= 0.0) {
            return Err(Error::Config(format!(
                "min weight {} must be finite and >= 0",
                self.min_weight
            )));
        }
        Ok(())
    }

    pub fn with_aggregator(mut self, aggregator: Aggregator) -> Self {
        self.aggregator = aggregator;
        self
    }

    pub fn with_relatedness(mut self, relatedness: Relatedness) -> Self {
        self.relatedness = relatedness;
        self
    }
}
