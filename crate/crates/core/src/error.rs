use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("empty mask")]
    EmptyMask,
    #[error("zero variance")]
    ZeroVariance,
    #[error("anisotropic spacing ({0}, {1}, {2}); resample to isotropic first")]
    Anisotropic(f64, f64, f64),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("no co-occurrences")]
    NoCooccurrences,
    #[error("surface is not closed: {0}")]
    OpenSurface(String),
    #[error("labels contain a single class")]
    OneClass,
    #[error("class {label} has {count} subjects, need at least {needed}")]
    ClassTooSmall { label: u8, count: usize, needed: usize },
    #[error("feature mismatch: {0}")]
    FeatureMismatch(String),
    #[error("subject mismatch: {0}")]
    SubjectMismatch(String),
    #[error("singular covariance; use shrinkage > 0")]
    SingularCovariance,
    #[error("non-finite input")]
    NonFinite,
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("selection failed: {0}")]
    SelectionFailed(String),
}
