//! Rank-based evaluation: per-query image ranking, r@k, median and mean
//! rank of the ground truth.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io::BufRead;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cooccur::CooccurrenceModel;
use crate::error::{Error, Result};
use crate::scoring::{Scorer, World};
use crate::text::tokenize;

pub const DEFAULT_KS: [usize; 3] = [1, 5, 10];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    /// The image the sentence was written for.
    Sentence,
    /// Every image with a tag containing the query word.
    SingleWord,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryRecord {
    pub query_id: String,
    pub text: String,
    pub ground_truth: BTreeSet<String>,
    pub protocol: Protocol,
}

pub fn read_queries_jsonl<R: BufRead>(reader: R, file: &str) -> Result<Vec<QueryRecord>> {
    let mut out = Vec::new();
    let mut ids = BTreeSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::parse(file, line_no, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: QueryRecord =
            serde_json::from_str(&line).map_err(|e| Error::parse(file, line_no, e.to_string()))?;
        if rec.text.trim().is_empty() {
            return Err(Error::parse(file, line_no, "empty query text"));
        }
        if rec.ground_truth.is_empty() {
            return Err(Error::parse(file, line_no, "empty ground truth"));
        }
        if !ids.insert(rec.query_id.clone()) {
            return Err(Error::parse(
                file,
                line_no,
                format!("duplicate query id `{}`", rec.query_id),
            ));
        }
        out.push(rec);
    }
    Ok(out)
}

/// One single-word query per word; ground truth is every corpus image
/// with a tag sharing the word's stem. Words tagging no image are skipped.
pub fn single_word_queries<'a, I>(words: I, corpus: &CooccurrenceModel) -> Vec<QueryRecord>
where
    I: IntoIterator<Item = &'a str>,
{
    words
        .into_iter()
        .filter_map(|w| {
            let gt: BTreeSet<String> = corpus.images_tagged(w).into_iter().map(String::from).collect();
            (!gt.is_empty()).then(|| QueryRecord {
                query_id: w.to_string(),
                text: w.to_string(),
                ground_truth: gt,
                protocol: Protocol::SingleWord,
            })
        })
        .collect()
}

/// Images by descending score, ties broken by ascending image id.
pub fn rank_images<'a>(images: &'a [String], scores: &[f64]) -> Vec<(&'a str, f64)> {
    assert_eq!(images.len(), scores.len(), "one score per image");
    let mut ranking: Vec<(&str, f64)> = images
        .iter()
        .map(String::as_str)
        .zip(scores.iter().copied())
        .collect();
    ranking.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    ranking
}

/// 1-based position of the best-ranked ground-truth image.
pub fn rank_of_ground_truth(
    query_id: &str,
    ranking: &[(&str, f64)],
    ground_truth: &BTreeSet<String>,
) -> Result<usize> {
    let mut best = None;
    let mut found = 0;
    for (i, (id, _)) in ranking.iter().enumerate() {
        if ground_truth.contains(*id) {
            best.get_or_insert(i + 1);
            found += 1;
        }
    }
    if found < ground_truth.len() {
        let present: BTreeSet<&str> = ranking.iter().map(|(id, _)| *id).collect();
        let missing = ground_truth
            .iter()
            .find(|g| !present.contains(g.as_str()))
            .cloned()
            .unwrap_or_default();
        return Err(Error::GroundTruthMissing {
            query_id: query_id.to_string(),
            image: missing,
        });
    }
    best.ok_or_else(|| Error::Config(format!("query `{query_id}` has no ground truth")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryRank {
    pub query_id: String,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub scorer: String,
    pub num_images: usize,
    pub per_query: Vec<QueryRank>,
    /// k → percentage of queries with rank ≤ k.
    pub r_at: BTreeMap<usize, f64>,
    pub median_rank: f64,
    pub mean_rank: f64,
}

/// Median with the two central values averaged for even counts.
pub fn median(values: &[usize]) -> f64 {
    let mut v = values.to_vec();
    v.sort_unstable();
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2] as f64
    } else {
        (v[n / 2 - 1] as f64 + v[n / 2] as f64) / 2.0
    }
}

impl EvalReport {
    pub fn from_ranks(
        scorer: impl Into<String>,
        num_images: usize,
        per_query: Vec<QueryRank>,
        ks: &[usize],
    ) -> Result<Self> {
        if per_query.is_empty() {
            return Err(Error::EmptyQuerySet);
        }
        let ranks: Vec<usize> = per_query.iter().map(|q| q.rank).collect();
        let n = ranks.len() as f64;
        let r_at = ks
            .iter()
            .map(|&k| {
                let hits = ranks.iter().filter(|&&r| r <= k).count();
                (k, 100.0 * hits as f64 / n)
            })
            .collect();
        let mean_rank = ranks.iter().map(|&r| r as f64).sum::<f64>() / n;
        Ok(EvalReport {
            scorer: scorer.into(),
            num_images,
            median_rank: median(&ranks),
            mean_rank,
            r_at,
            per_query,
        })
    }
}

fn run_jobs<T, F>(records: &[QueryRecord], jobs: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&QueryRecord) -> Result<T> + Sync,
{
    if jobs <= 1 {
        return records.iter().map(&f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {jobs} workers: {e}")))?;
    pool.install(|| records.par_iter().map(&f).collect())
}

/// Ranks `images` for every query with `score_fn` (one score per image, in
/// `images` order) and summarizes the ground-truth ranks. Results do not
/// depend on `jobs`.
pub fn compute_report<F>(
    scorer: &str,
    records: &[QueryRecord],
    images: &[String],
    score_fn: F,
    ks: &[usize],
    jobs: usize,
) -> Result<EvalReport>
where
    F: Fn(&QueryRecord) -> Result<Vec<f64>> + Sync,
{
    if records.is_empty() {
        return Err(Error::EmptyQuerySet);
    }
    let per_query = run_jobs(records, jobs, |rec| {
        let scores = score_fn(rec)?;
        let ranking = rank_images(images, &scores);
        Ok(QueryRank {
            query_id: rec.query_id.clone(),
            rank: rank_of_ground_truth(&rec.query_id, &ranking, &rec.ground_truth)?,
        })
    })?;
    EvalReport::from_ranks(scorer, images.len(), per_query, ks)
}

/// [`compute_report`] with a registered scorer over the bank's images.
pub fn evaluate_scorer(
    scorer: &dyn Scorer,
    world: &World,
    records: &[QueryRecord],
    ks: &[usize],
    jobs: usize,
) -> Result<EvalReport> {
    compute_report(
        scorer.name(),
        records,
        world.bank.images(),
        |rec| Ok(scorer.log_scores(&tokenize(&rec.text), world)),
        ks,
        jobs,
    )
}

/// Aligned text table, one row per report:
/// `scorer  r@1  r@5  r@10  median rank  mean rank`.
pub fn format_table(reports: &[EvalReport]) -> String {
    let ks: BTreeSet<usize> = reports.iter().flat_map(|r| r.r_at.keys().copied()).collect();
    let name_w = reports
        .iter()
        .map(|r| r.scorer.len())
        .chain(std::iter::once("scorer".len()))
        .max()
        .unwrap_or(6);
    let mut out = String::new();
    let _ = write!(out, "{:<name_w$}", "scorer");
    for k in &ks {
        let _ = write!(out, "  {:>6}", format!("r@{k}"));
    }
    let _ = writeln!(out, "  {:>11}  {:>9}", "median rank", "mean rank");
    for r in reports {
        let _ = write!(out, "{:<name_w$}", r.scorer);
        for k in &ks {
            match r.r_at.get(k) {
                Some(v) => {
                    let _ = write!(out, "  {v:>6.1}");
                }
                None => {
                    let _ = write!(out, "  {:>6}", "-");
                }
            }
        }
        let _ = writeln!(out, "  {:>11.1}  {:>9.1}", r.median_rank, r.mean_rank);
    }
    out
}
