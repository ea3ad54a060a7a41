//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid shape {shape:?}: {reason}")]
    InvalidShape { shape: Vec<usize>, reason: String },

    #[error("shape mismatch: expected {expected:?}, got {actual:?}")]
    ShapeMismatch {
        expected: Vec<usize>,
        actual: Vec<usize>,
    },

    #[error("invalid channel count {channels}: {reason}")]
    InvalidChannels { channels: usize, reason: String },

    #[error("data length {actual} does not match shape/channels (expected {expected})")]
    DataLength { expected: usize, actual: usize },

    #[error("pixel {pixel} violates the simplex constraint (defect {defect:.3e})")]
    SimplexViolation { pixel: usize, defect: f64 },

    #[error("pixel {pixel} channel {channel} is not a positive finite value ({value})")]
    NonPositiveParameter {
        pixel: usize,
        channel: usize,
        value: f64,
    },

    #[error("label {label} out of range for {channels} categories at pixel {pixel}")]
    LabelOutOfRange {
        pixel: usize,
        label: u32,
        channels: usize,
    },

    #[error("pixel {pixel} holds a sentinel label where a plain category is required")]
    SentinelLabel { pixel: usize },

    #[error("category index {index} out of range for {channels} channels")]
    CategoryOutOfRange { index: usize, channels: usize },

    #[error("set image supports at most 64 categories, got {categories}")]
    TooManyCategories { categories: usize },

    #[error("structuring element error: {0}")]
    InvalidStructuringElement(String),

    #[error("empty neighborhood at pixel {pixel}: no in-domain offsets and origin not in SE")]
    EmptyNeighborhood { pixel: usize },

    #[error("ambiguous tie at pixel {pixel}: multiple nearest categories and no ranking supplied")]
    AmbiguousTheta { pixel: usize },

    #[error("tie-break weights requested at pixel {pixel} where the eroded channel is not saturated")]
    ThetaContract { pixel: usize },

    #[error("eroding through a saturated pixel {pixel} requires a ball structuring element")]
    ThetaRequiresBall { pixel: usize },

    #[error("category {category} is protected and cannot be operated on")]
    ProtectedCategory { category: usize },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("bad magic at offset 0: expected \"CATD\", got {found:?}")]
    BadMagic { found: [u8; 4] },

    #[error("unsupported container version {0}")]
    UnsupportedVersion(u32),

    #[error("unknown payload kind {0}")]
    UnknownPayloadKind(u32),

    #[error("truncated payload: expected {expected} bytes, got {actual}")]
    TruncatedPayload { expected: usize, actual: usize },

    #[error("payload kind mismatch: expected {expected}, found {found}")]
    PayloadKind { expected: String, found: String },

    #[error("unmapped color {color:?} at pixel ({x}, {y})")]
    UnmappedColor { color: [u8; 3], x: usize, y: usize },

    #[error("palette has {palette} entries but the image has {channels} categories")]
    PaletteSize { palette: usize, channels: usize },

    #[error("pipeline parse error on line {line}: {reason}")]
    PipelineParse { line: usize, reason: String },

    #[error("pipeline step {index} invalid: {reason}")]
    PipelineStep { index: usize, reason: String },

    #[error("{0}")]
    Unsupported(String),
}
