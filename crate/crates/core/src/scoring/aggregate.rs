use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// How per-concept estimates of one undetectable word are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Aggregator {
    Min,
    Max,
    MeanArithmetic,
    MeanGeometric,
}

impl Aggregator {
    pub const ALL: [Aggregator; 4] = [
        Aggregator::Min,
        Aggregator::MeanGeometric,
        Aggregator::MeanArithmetic,
        Aggregator::Max,
    ];

    /// Suffix used in scorer names (`CN_MEAN_G`, `ESP_MAX`, ...).
    pub fn suffix(self) -> &'static str {
        match self {
            Aggregator::Min => "MIN",
            Aggregator::Max => "MAX",
            Aggregator::MeanArithmetic => "MEAN_A",
            Aggregator::MeanGeometric => "MEAN_G",
        }
    }

    /// `None` for an empty slice. Inputs are probabilities in `[0, 1]`.
    pub fn apply(self, values: &[f64]) -> Option<f64> {
        if values.is_empty() {
            return None;
        }
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let n = values.len() as f64;
        Some(match self {
            Aggregator::Min => min,
            Aggregator::Max => max,
            Aggregator::MeanArithmetic => (values.iter().sum::<f64>() / n).clamp(min, max),
            Aggregator::MeanGeometric => {
                if min <= 0.0 {
                    0.0
                } else {
                    let mean_log = values.iter().map(|v| v.ln()).sum::<f64>() / n;
                    // Rounding in exp/ln can step just outside [min, max].
                    mean_log.exp().clamp(min, max)
                }
            }
        })
    }
}

impl FromStr for Aggregator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "min" => Ok(Aggregator::Min),
            "max" => Ok(Aggregator::Max),
            "mean_a" | "mean_arithmetic" | "mean" => Ok(Aggregator::MeanArithmetic),
            "mean_g" | "mean_geometric" => Ok(Aggregator::MeanGeometric),
            other => Err(format!(
                "unknown aggregator `{other}` (expected min, max, mean-arithmetic, mean-geometric)"
            )),
        }
    }
}

impl fmt::Display for Aggregator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Aggregator::Min => "min",
            Aggregator::Max => "max",
            Aggregator::MeanArithmetic => "mean-arithmetic",
            Aggregator::MeanGeometric => "mean-geometric",
        })
    }
}
