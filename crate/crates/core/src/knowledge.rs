//! Commonsense graph ingestion and single-hop neighbor lookup.
//!
//! Edges are undirected for lookup purposes, keyed by the stem of each
//! endpoint. Multi-word concepts are kept in the edge list but never
//! returned as neighbors, and edges joining two concepts with the same stem
//! are dropped.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::cooccur::CooccurrenceModel;
use crate::detectors::DetectorBank;
use crate::error::{Error, Result};
use crate::text::stem;

pub const DEFAULT_MIN_WEIGHT: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Relation {
    pub rel_type: String,
    pub start: String,
    pub end: String,
    pub weight: f64,
}

/// Lowercases a concept and turns underscores into spaces.
pub fn normalize_concept(raw: &str) -> String {
    raw.trim()
        .to_lowercase()
        .replace('_', " ")
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

fn is_single_token(concept: &str) -> bool {
    !concept.contains(' ')
}

/// Reads the `rel_type,start,end,weight` edge file.
pub fn read_edges_csv<R: Read>(reader: R, file: &str) -> Result<Vec<Relation>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::parse(file, 1, e.to_string()))?
        .clone();
    let expected = ["rel_type", "start", "end", "weight"];
    if headers.iter().ne(expected.iter().copied()) {
        return Err(Error::parse(
            file,
            1,
            format!("expected header `{}`", expected.join(",")),
        ));
    }
    let mut edges = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| Error::parse(file, line, e.to_string()))?;
        let rel_type = record[0].to_string();
        let start = normalize_concept(&record[1]);
        let end = normalize_concept(&record[2]);
        if rel_type.is_empty() || start.is_empty() || end.is_empty() {
            return Err(Error::parse(file, line, "empty relation type or concept"));
        }
        let weight: f64 = record[3]
            .parse()
            .map_err(|e| Error::parse(file, line, format!("bad weight `{}`: {e}", &record[3])))?;
        if !weight.is_finite() || weight < 0.0 {
            return Err(Error::parse(file, line, format!("weight {weight} must be finite and >= 0")));
        }
        edges.push(Relation {
            rel_type,
            start,
            end,
            weight,
        });
    }
    Ok(edges)
}

/// Which edges survive into a [`KnowledgeGraph`].
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeFilter {
    pub min_weight: f64,
    /// `None` admits every relation type.
    pub allowed_rel_types: Option<BTreeSet<String>>,
}

impl Default for EdgeFilter {
    fn default() -> Self {
        EdgeFilter {
            min_weight: DEFAULT_MIN_WEIGHT,
            allowed_rel_types: None,
        }
    }
}

impl EdgeFilter {
    pub fn admits(&self, r: &Relation) -> bool {
        r.weight >= self.min_weight
            && self
                .allowed_rel_types
                .as_ref()
                .is_none_or(|allowed| allowed.contains(&r.rel_type))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IngestStats {
    pub total: usize,
    pub retained: usize,
    pub multiword: usize,
    pub same_stem: usize,
}

#[derive(Debug, Clone)]
pub struct KnowledgeGraph {
    edges: Vec<Relation>,
    filter: EdgeFilter,
    /// Stem → neighbor concept → strongest retained edge weight.
    adjacency: BTreeMap<String, BTreeMap<String, f64>>,
    stem_node_index: BTreeMap<String, BTreeSet<String>>,
    max_weight: f64,
    stats: IngestStats,
}

impl KnowledgeGraph {
    pub fn build(all_edges: &[Relation], filter: EdgeFilter) -> Self {
        let mut stats = IngestStats {
            total: all_edges.len(),
            ..Default::default()
        };
        let mut edges = Vec::new();
        let mut adjacency: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
        let mut stem_node_index: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        let mut max_weight: f64 = 0.0;

        for r in all_edges.iter().filter(|r| filter.admits(r)) {
            edges.push(r.clone());
            max_weight = max_weight.max(r.weight);
            for node in [&r.start, &r.end] {
                if is_single_token(node) {
                    stem_node_index
                        .entry(stem(node))
                        .or_default()
                        .insert(node.clone());
                }
            }
            if !is_single_token(&r.start) || !is_single_token(&r.end) {
                stats.multiword += 1;
                continue;
            }
            let (s_start, s_end) = (stem(&r.start), stem(&r.end));
            if s_start == s_end {
                stats.same_stem += 1;
                continue;
            }
            for (from, to) in [(&s_start, &r.end), (&s_end, &r.start)] {
                let w = adjacency
                    .entry(from.clone())
                    .or_default()
                    .entry(to.clone())
                    .or_insert(r.weight);
                *w = w.max(r.weight);
            }
        }
        stats.retained = edges.len();

        KnowledgeGraph {
            edges,
            filter,
            adjacency,
            stem_node_index,
            max_weight,
            stats,
        }
    }

    pub fn edges(&self) -> &[Relation] {
        &self.edges
    }

    pub fn filter(&self) -> &EdgeFilter {
        &self.filter
    }

    pub fn stats(&self) -> &IngestStats {
        &self.stats
    }

    pub fn stem_node_index(&self) -> &BTreeMap<String, BTreeSet<String>> {
        &self.stem_node_index
    }

    /// Largest retained edge weight, 0 for an empty graph.
    pub fn max_weight(&self) -> f64 {
        self.max_weight
    }

    /// `cn(word)`: single-token concepts one edge away from any node
    /// sharing the stem of `word`, in either direction.
    pub fn neighbors(&self, word: &str) -> BTreeSet<&str> {
        self.adjacency
            .get(&stem(word))
            .map(|m| m.keys().map(String::as_str).collect())
            .unwrap_or_default()
    }

    /// Strongest retained edge weight between `word`'s stem and `concept`.
    pub fn edge_weight(&self, word: &str, concept: &str) -> Option<f64> {
        self.adjacency.get(&stem(word))?.get(concept).copied()
    }

    /// `cnDet(word, V)`: neighbors with at least one stemming-based detector.
    pub fn cn_det<'a>(&'a self, word: &str, bank: &DetectorBank) -> BTreeSet<&'a str> {
        self.neighbors(word)
            .into_iter()
            .filter(|c| bank.is_stem_detectable(c))
            .collect()
    }
}

/// Stemmed tags sharing at least one corpus image with `stem(word)`.
pub fn esp_related<'a>(word: &str, corpus: &'a CooccurrenceModel) -> BTreeSet<&'a str> {
    corpus.cooccurring(&stem(word))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relatedness {
    /// Graph neighbors, `cn(w)`.
    Graph,
    /// Tag co-occurrence in the corpus.
    CorpusCooccurrence,
}

/// A relatedness set provider backed by exactly one source.
#[derive(Debug, Clone, Copy)]
pub enum RelatednessSource<'a> {
    Graph(&'a KnowledgeGraph),
    Corpus(&'a CooccurrenceModel),
}

impl<'a> RelatednessSource<'a> {
    pub fn kind(&self) -> Relatedness {
        match self {
            RelatednessSource::Graph(_) => Relatedness::Graph,
            RelatednessSource::Corpus(_) => Relatedness::CorpusCooccurrence,
        }
    }

    pub fn related(&self, word: &str) -> BTreeSet<&'a str> {
        match self {
            RelatednessSource::Graph(g) => g.neighbors(word),
            RelatednessSource::Corpus(c) => esp_related(word, c),
        }
    }

    /// Related concepts that have a stemming-based detector in `bank`.
    pub fn related_detectable(&self, word: &str, bank: &DetectorBank) -> BTreeSet<&'a str> {
        self.related(word)
            .into_iter()
            .filter(|c| bank.is_stem_detectable(c))
            .collect()
    }
}
