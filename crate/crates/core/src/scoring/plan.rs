use super::Aggregator;
use crate::detectors::DetectorBank;

/// `given·q + given_not·(1 − q)`.
pub(crate) fn mix(given: f64, given_not: f64, q: f64) -> f64 {
    given * q + given_not * (1.0 - q)
}

/// A related concept resolved to its stem class in the bank, with the
/// conditional pair used to turn its detector score into an estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct RelatedTerm {
    pub concept: String,
    pub class: Vec<u32>,
    pub given: f64,
    pub given_not: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CnTerm {
    pub word: String,
    pub related: Vec<RelatedTerm>,
}

/// A query compiled against one bank: everything except the image is
/// resolved, so scoring an image is a handful of lookups.
///
/// Factors are accumulated in a fixed order (vocabulary words, then stem
/// classes, then CN words, each sorted by word) so the log score is
/// bitwise reproducible.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryPlan {
    pub detectable: Vec<u32>,
    pub stem_classes: Vec<Vec<u32>>,
    pub cn_terms: Vec<CnTerm>,
    pub aggregator: Aggregator,
    pub clamp_epsilon: f64,
}

impl QueryPlan {
    pub fn empty(aggregator: Aggregator, clamp_epsilon: f64) -> Self {
        QueryPlan {
            detectable: Vec::new(),
            stem_classes: Vec::new(),
            cn_terms: Vec::new(),
            aggregator,
            clamp_epsilon,
        }
    }

    pub fn num_factors(&self) -> usize {
        self.detectable.len() + self.stem_classes.len() + self.cn_terms.len()
    }

    fn log_factor(&self, p: f64) -> f64 {
        p.max(self.clamp_epsilon).ln()
    }

    /// Aggregated estimate of one CN word on one image.
    pub fn cn_estimate(&self, term: &CnTerm, bank: &DetectorBank, image_idx: usize) -> f64 {
        let estimates: Vec<f64> = term
            .related
            .iter()
            .map(|r| mix(r.given, r.given_not, bank.max_score_at(image_idx, &r.class)))
            .collect();
        // Plans are only built with non-empty related lists.
        self.aggregator.apply(&estimates).unwrap_or(0.0)
    }

    /// Natural log of the score; the ranking key.
    pub fn log_score(&self, bank: &DetectorBank, image_idx: usize) -> f64 {
        let mut acc = 0.0;
        for &w in &self.detectable {
            acc += self.log_factor(bank.score_at(image_idx, w as usize));
        }
        for class in &self.stem_classes {
            acc += self.log_factor(bank.max_score_at(image_idx, class));
        }
        for term in &self.cn_terms {
            acc += self.log_factor(self.cn_estimate(term, bank, image_idx));
        }
        acc
    }

    pub fn score(&self, bank: &DetectorBank, image_idx: usize) -> f64 {
        self.log_score(bank, image_idx).exp()
    }
}
