use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A malformed record in one of the text inputs. `line` is 1-based.
    #[error("{file}:{line}: {message}")]
    Parse {
        file: String,
        line: usize,
        message: String,
    },

    #[error("unknown image id `{0}`")]
    UnknownImage(String),

    #[error("word `{0}` is not in the detector vocabulary")]
    NotInVocabulary(String),

    #[error("word `{0}` has no stemming-based detector")]
    NoStemDetector(String),

    #[error("word `{0}` has no related detectable concept")]
    NoRelatedDetector(String),

    #[error("evaluation needs at least one query")]
    EmptyQuerySet,

    #[error("query `{query_id}`: ground-truth image `{image}` is not in the ranking")]
    GroundTruthMissing { query_id: String, image: String },

    #[error("unknown scorer `{0}`")]
    UnknownScorer(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("snapshot format version {found} is not supported (this build reads version {supported})")]
    SnapshotVersion { found: u32, supported: u32 },

    #[error("corrupt snapshot: {0}")]
    SnapshotCorrupt(String),
}

impl Error {
    pub(crate) fn parse(file: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            file: file.into(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
