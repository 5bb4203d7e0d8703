//! Sentence-to-image retrieval scoring over a fixed bank of word detectors,
//! extended to undetectable words through stemming, commonsense-graph
//! neighbors and tag co-occurrence statistics.
//!
//! The pieces, bottom up:
//!
//! - [`text`]: tokenization, stemming, stopwords, word classes.
//! - [`detectors`]: the vocabulary and sparse image × word score matrix.
//! - [`knowledge`]: weighted typed edges and neighbor lookup.
//! - [`cooccur`]: tag-corpus counts and conditional estimates.
//! - [`scoring`]: word partition, MIL / MILSTEM / CN scores, and the
//!   [`scoring::ScorerRegistry`] of named scorers.
//! - [`evalx`]: ranking, r@k, median and mean rank.
//! - [`snapshot`] and [`cli`]: persisted ingest and the command-line surface.

pub mod cli;
pub mod cooccur;
pub mod dataset;
pub mod detectors;
pub mod error;
pub mod evalx;
pub mod fixtures;
pub mod knowledge;
pub mod scoring;
pub mod snapshot;
pub mod text;

pub use dataset::{Dataset, DatasetPaths};
pub use error::{Error, Result};
