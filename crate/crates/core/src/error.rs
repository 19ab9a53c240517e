use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed line in a line-oriented input (CSV, TSV, JSONL, rule files).
    #[error("{context}, line {line}: {msg}")]
    Parse {
        context: String,
        line: usize,
        msg: String,
    },

    #[error("newick parse error at offset {offset}: {msg}")]
    Newick { offset: usize, msg: String },

    #[error("invalid IPA character {ch:?} (U+{code:04X}) at offset {offset}", code = *ch as u32)]
    Tokenize { ch: char, offset: usize },

    #[error("no grapheme mapping for {ch:?}")]
    Unmapped { ch: char },

    #[error("no sound class for segment {0:?}")]
    UnknownSoundClass(String),

    #[error("invalid parameter: {0}")]
    Param(String),

    /// Input data violates an invariant of the domain model.
    #[error("{0}")]
    Data(String),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(context: impl Into<String>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            context: context.into(),
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }
}

pub(crate) fn read_to_string(path: &std::path::Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_string(path: &std::path::Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
