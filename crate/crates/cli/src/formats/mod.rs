//! On-disk formats.

pub mod ids;
pub mod lexicon;
pub mod model;
pub mod params;
pub mod snapshot;
pub mod table;
pub mod tensor;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("bad magic bytes, expected {expected:?}")]
    BadMagic { expected: &'static str },
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u16),
    #[error("truncated file: {0}")]
    Truncated(&'static str),
    #[error("corrupt header: {0}")]
    CorruptHeader(String),
    #[error("unsorted payload at id index {0}")]
    Unsorted(u64),
    #[error("{0} trailing bytes after payload")]
    TrailingBytes(usize),
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error(transparent)]
    Image(#[from] electorate_core::image::ImageError),
    #[error(transparent)]
    Params(#[from] electorate_core::cnn::ParamsError),
}
