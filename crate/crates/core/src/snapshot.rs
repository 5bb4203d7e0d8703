//! Versioned binary snapshot of an ingested [`Dataset`].
//!
//! Layout: 8-byte magic, `u32` format version, `u32` section count, then per
//! section a 4-byte tag, `u64` payload length, SHA-256 of the payload and
//! the bincode payload. All integers little-endian. Identical inputs give
//! byte-identical snapshots.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::cooccur::{CooccurrenceModel, PairCounting};
use crate::dataset::Dataset;
use crate::detectors::DetectorBank;
use crate::error::{Error, Result};
use crate::knowledge::Relation;
use crate::text::{WordClass, WordClassMap};

pub const MAGIC: &[u8; 8] = b"CNRETSNP";
pub const FORMAT_VERSION: u32 = 1;

const SECTIONS: [&[u8; 4]; 4] = [b"DETS", b"EDGE", b"TAGS", b"WCLS"];

type BankRecords = (Vec<String>, Vec<(String, Vec<(String, f64)>)>);

fn encode<T: Serialize>(value: &T) -> Vec<u8> {
    bincode::serialize(value).expect("in-memory bincode serialization")
}

fn decode<T: DeserializeOwned>(tag: &[u8; 4], bytes: &[u8]) -> Result<T> {
    bincode::deserialize(bytes).map_err(|e| {
        Error::SnapshotCorrupt(format!("section {}: {e}", String::from_utf8_lossy(tag)))
    })
}

pub fn to_bytes(ds: &Dataset) -> Vec<u8> {
    let bank: BankRecords = (
        ds.bank.vocab().to_vec(),
        ds.bank
            .images()
            .iter()
            .enumerate()
            .map(|(i, id)| {
                let scores = ds.bank.image_scores(i).map(|(w, s)| (w.to_string(), s)).collect();
                (id.clone(), scores)
            })
            .collect(),
    );
    let tags: Vec<(String, Vec<String>)> = ds
        .corpus
        .image_ids()
        .iter()
        .zip(ds.corpus.tag_sets())
        .map(|(id, set)| (id.clone(), set.iter().cloned().collect()))
        .collect();
    let classes: Vec<(String, WordClass)> = ds
        .word_classes
        .iter()
        .map(|(w, c)| (w.to_string(), c))
        .collect();
    let payloads = [
        encode(&bank),
        encode(&ds.edges),
        encode(&tags),
        encode(&classes),
    ];

    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(SECTIONS.len() as u32).to_le_bytes());
    for (tag, payload) in SECTIONS.iter().zip(&payloads) {
        out.extend_from_slice(*tag);
        out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
        out.extend_from_slice(&Sha256::digest(payload));
        out.extend_from_slice(payload);
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::SnapshotCorrupt("truncated".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn from_bytes(bytes: &[u8]) -> Result<Dataset> {
    let mut cur = Cursor { bytes, pos: 0 };
    if cur.take(MAGIC.len())? != MAGIC {
        return Err(Error::SnapshotCorrupt("not a snapshot file".into()));
    }
    let version = cur.u32()?;
    if version != FORMAT_VERSION {
        return Err(Error::SnapshotVersion {
            found: version,
            supported: FORMAT_VERSION,
        });
    }
    let count = cur.u32()? as usize;
    if count != SECTIONS.len() {
        return Err(Error::SnapshotCorrupt(format!("expected 4 sections, found {count}")));
    }
    let mut payloads = Vec::with_capacity(count);
    for expected in SECTIONS {
        let tag = cur.take(4)?;
        if tag != expected {
            return Err(Error::SnapshotCorrupt(format!(
                "expected section {}, found {}",
                String::from_utf8_lossy(expected),
                String::from_utf8_lossy(tag)
            )));
        }
        let len = usize::try_from(cur.u64()?)
            .map_err(|_| Error::SnapshotCorrupt("section too large".into()))?;
        let digest = cur.take(32)?;
        let payload = cur.take(len)?;
        if Sha256::digest(payload).as_slice() != digest {
            return Err(Error::SnapshotCorrupt(format!(
                "checksum mismatch in section {}",
                String::from_utf8_lossy(expected)
            )));
        }
        payloads.push(payload);
    }
    if cur.pos != bytes.len() {
        return Err(Error::SnapshotCorrupt("trailing bytes".into()));
    }

    let (vocab, images): BankRecords = decode(SECTIONS[0], payloads[0])?;
    let bank = DetectorBank::new(vocab, images)
        .map_err(|e| Error::SnapshotCorrupt(format!("detector section: {e}")))?;
    let edges: Vec<Relation> = decode(SECTIONS[1], payloads[1])?;
    let tags: Vec<(String, Vec<String>)> = decode(SECTIONS[2], payloads[2])?;
    let corpus = CooccurrenceModel::from_tagged_images(tags, PairCounting::Lazy)
        .map_err(|e| Error::SnapshotCorrupt(format!("corpus section: {e}")))?;
    let classes: Vec<(String, WordClass)> = decode(SECTIONS[3], payloads[3])?;
    let mut word_classes = WordClassMap::new();
    for (w, c) in classes {
        word_classes.insert(&w, c);
    }
    Ok(Dataset {
        bank,
        edges,
        corpus,
        word_classes,
    })
}

pub fn save(ds: &Dataset, path: &Path) -> Result<()> {
    std::fs::write(path, to_bytes(ds)).map_err(|e| Error::io(path, e))
}

pub fn load(path: &Path) -> Result<Dataset> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    from_bytes(&bytes)
}
