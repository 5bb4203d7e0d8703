//! A hand-built six-image world: a chef in a kitchen, a man in a tuxedo,
//! a bagel on a table, a hotel resort and two outdoor scenes. Used by the
//! tests and handy for trying the CLI.

use crate::cooccur::{CooccurrenceModel, PairCounting};
use crate::dataset::Dataset;
use crate::detectors::DetectorBank;
use crate::knowledge::Relation;
use crate::text::{WordClass, WordClassMap};

pub const VOCAB: [&str; 12] = [
    "a", "in", "man", "person", "dish", "kitchen", "jacket", "dog", "grass", "doughnut", "bread",
    "hotel",
];

pub const IMAGES: [(&str, &[(&str, f64)]); 6] = [
    (
        "img_bakery",
        &[("a", 0.9), ("doughnut", 0.8), ("bread", 0.7), ("dish", 0.3)],
    ),
    (
        "img_beach",
        &[("a", 0.9), ("in", 0.8), ("man", 0.6), ("dog", 0.3), ("grass", 0.1)],
    ),
    (
        "img_dog_park",
        &[("a", 0.9), ("dog", 0.9), ("grass", 0.8), ("man", 0.2), ("person", 0.3)],
    ),
    ("img_hotel", &[("a", 0.9), ("in", 0.5), ("hotel", 0.9), ("person", 0.2)]),
    (
        "img_kitchen",
        &[
            ("a", 0.9),
            ("in", 0.7),
            ("man", 0.5),
            ("person", 0.8),
            ("dish", 0.7),
            ("kitchen", 0.9),
        ],
    ),
    (
        "img_prom",
        &[("a", 0.9), ("in", 0.6), ("man", 0.8), ("person", 0.7), ("jacket", 0.85)],
    ),
];

pub const EDGES: [(&str, &str, &str, f64); 11] = [
    ("AtLocation", "chef", "kitchen", 3.0),
    ("IsA", "chef", "person", 2.5),
    ("CapableOf", "chef", "dish", 1.5),
    ("IsA", "tuxedo", "jacket", 2.0),
    ("RelatedTo", "tuxedo", "prom", 1.0),
    ("IsA", "bagel", "bread", 2.0),
    ("RelatedTo", "bagel", "doughnut", 1.0),
    ("RelatedTo", "resort", "hotel", 2.0),
    ("IsA", "man", "person", 2.0),
    ("AtLocation", "pen", "pen", 1.0),
    ("Antonym", "cat", "dog", 0.5),
];

pub const TAGS: [(&str, &[&str]); 10] = [
    ("c01", &["chef", "kitchen", "person"]),
    ("c02", &["chef", "dish", "kitchen"]),
    ("c03", &["man", "tuxedo", "jacket"]),
    ("c04", &["bagel", "bread", "doughnut"]),
    ("c05", &["dog", "grass"]),
    ("c06", &["hotel", "resort", "pool"]),
    ("c07", &["person", "man"]),
    ("c08", &["dish", "table"]),
    ("c09", &["bread", "table"]),
    ("c10", &["dog", "man", "grass"]),
];

pub const WORD_CLASSES: [(&str, WordClass); 6] = [
    ("chef", WordClass::Noun),
    ("tuxedo", WordClass::Noun),
    ("bagel", WordClass::Noun),
    ("resort", WordClass::Noun),
    ("man", WordClass::Noun),
    ("cooking", WordClass::Verb),
];

pub fn bank() -> DetectorBank {
    DetectorBank::new(
        VOCAB.iter().map(|w| w.to_string()).collect(),
        IMAGES.iter().map(|(id, scores)| {
            (
                id.to_string(),
                scores.iter().map(|(w, s)| (w.to_string(), *s)).collect::<Vec<_>>(),
            )
        }),
    )
    .expect("fixture bank is valid")
}

pub fn edges() -> Vec<Relation> {
    EDGES
        .iter()
        .map(|&(t, a, b, w)| Relation {
            rel_type: t.into(),
            start: a.into(),
            end: b.into(),
            weight: w,
        })
        .collect()
}

pub fn corpus() -> CooccurrenceModel {
    CooccurrenceModel::from_tagged_images(
        TAGS.iter().map(|(id, tags)| (id.to_string(), tags.to_vec())),
        PairCounting::Eager,
    )
    .expect("fixture corpus is valid")
}

pub fn word_classes() -> WordClassMap {
    let mut map = WordClassMap::new();
    for (w, c) in WORD_CLASSES {
        map.insert(w, c);
    }
    map
}

pub fn tiny_world() -> Dataset {
    Dataset {
        bank: bank(),
        edges: edges(),
        corpus: corpus(),
        word_classes: word_classes(),
    }
}
