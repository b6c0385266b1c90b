use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("element {value} out of field of order {order}")]
    ElementOutOfField { value: u32, order: u32 },

    #[error("division by zero")]
    DivisionByZero,

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("enumeration of {size} items exceeds the cap of {cap}")]
    EnumerationCap { size: u128, cap: u64 },

    #[error("index {index} out of range (size {size})")]
    IndexOutOfRange { index: u128, size: u128 },

    #[error("zero vector where a nonzero vector is required")]
    ZeroVector,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("layer {layer} out of range 1..={layers}")]
    LayerOutOfRange { layer: u64, layers: u64 },

    #[error("duplicate layer {0} within one query")]
    DuplicateLayer(u64),

    #[error("field mismatch: query is over GF({query_p}^{query_m}), database over GF({db_p}^{db_m})")]
    FieldMismatch { query_p: u32, query_m: u32, db_p: u32, db_m: u32 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("answer does not match query: {0}")]
    MisalignedAnswer(String),

    #[error("malformed data: {0}")]
    Codec(#[from] CodecError),

    #[error("transport error: {0}")]
    Transport(String),

    #[error("server {server} reported error {code}: {message}")]
    Remote { server: usize, code: u16, message: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("internal error: {0}")]
    Internal(String),
}

/// Decoding failures for database files and wire frames.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("bad magic")]
    BadMagic,

    #[error("unsupported version {0}")]
    BadVersion(u8),

    #[error("truncated input")]
    Truncated,

    #[error("trailing bytes after message")]
    TrailingBytes,

    #[error("unknown message type {0:#04x}")]
    BadMessageType(u8),

    #[error("element out of field: {value} >= {order}")]
    ElementOutOfField { value: u16, order: u32 },

    #[error("invalid header: {0}")]
    BadHeader(String),

    #[error("frame of {0} bytes exceeds the size limit")]
    FrameTooLarge(u64),

    #[error("invalid utf-8 in error message")]
    BadUtf8,
}

impl Error {
    /// Process exit code for the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Transport(_) | Error::Io(_) | Error::Remote { .. } => 2,
            _ => 1,
        }
    }
}
