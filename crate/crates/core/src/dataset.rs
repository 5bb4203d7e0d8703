use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use crate::cooccur::{CooccurrenceModel, PairCounting};
use crate::detectors::DetectorBank;
use crate::error::{Error, Result};
use crate::knowledge::{read_edges_csv, EdgeFilter, KnowledgeGraph, Relation};
use crate::scoring::{ScoreConfig, World};
use crate::text::WordClassMap;

/// Everything ingested from disk. The edge list is kept unfiltered so the
/// confidence threshold can change between runs without re-ingesting.
#[derive(Debug)]
pub struct Dataset {
    pub bank: DetectorBank,
    pub edges: Vec<Relation>,
    pub corpus: CooccurrenceModel,
    pub word_classes: WordClassMap,
}

/// Input file locations for [`Dataset::load`].
#[derive(Debug, Clone, Default)]
pub struct DatasetPaths<'a> {
    pub detectors: Option<&'a Path>,
    pub graph: Option<&'a Path>,
    pub corpus: Option<&'a Path>,
    pub word_classes: Option<&'a Path>,
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

impl Dataset {
    /// Loads the text inputs. The detector file is required; a missing graph,
    /// corpus or word-class file yields an empty source.
    pub fn load(paths: &DatasetPaths) -> Result<Self> {
        let det = paths
            .detectors
            .ok_or_else(|| Error::Config("a detector file is required".into()))?;
        let bank = DetectorBank::from_jsonl(open(det)?, &det.display().to_string())?;
        let edges = match paths.graph {
            Some(p) => read_edges_csv(open(p)?, &p.display().to_string())?,
            None => Vec::new(),
        };
        let corpus = match paths.corpus {
            Some(p) => CooccurrenceModel::from_jsonl(open(p)?, &p.display().to_string(), PairCounting::Lazy)?,
            None => CooccurrenceModel::from_tagged_images(
                Vec::<(String, Vec<String>)>::new(),
                PairCounting::Lazy,
            )?,
        };
        let word_classes = match paths.word_classes {
            Some(p) => WordClassMap::from_csv(open(p)?, &p.display().to_string())?,
            None => WordClassMap::new(),
        };
        Ok(Dataset {
            bank,
            edges,
            corpus,
            word_classes,
        })
    }

    /// Graph over the edges admitted by `config.min_weight`, all relation types.
    pub fn graph(&self, config: &ScoreConfig) -> KnowledgeGraph {
        KnowledgeGraph::build(
            &self.edges,
            EdgeFilter {
                min_weight: config.min_weight,
                allowed_rel_types: None,
            },
        )
    }

    pub fn world<'a>(&'a self, graph: &'a KnowledgeGraph) -> World<'a> {
        World {
            bank: &self.bank,
            graph,
            corpus: &self.corpus,
            word_classes: &self.word_classes,
        }
    }
}
