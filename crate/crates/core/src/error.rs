use thiserror::Error;

/// Errors produced by the block-space toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Malformed input, shape mismatch or an out-of-range argument.
    #[error("usage error: {0}")]
    Usage(String),

    /// Mathematically undefined request, e.g. inverting zero.
    #[error("domain error: {0}")]
    Domain(String),

    /// A table entry that should be a permutation is not one.
    #[error("level {level} tail {tail}: {reason}")]
    NotPermutation {
        level: usize,
        tail: u64,
        reason: String,
    },

    /// The map is not a bijection of the point set.
    #[error("not a bijection: {0}")]
    NotBijection(String),

    /// The map does not preserve distance on the witness pair `(u, v)`.
    #[error("not an isometry: d({u}, {v}) = {before} but d(f({u}), f({v})) = {after}")]
    NotIsometry {
        u: u64,
        v: u64,
        before: u32,
        after: u32,
    },

    /// A level of the map depends on coordinates below it.
    #[error("level {level} output at row {row} depends on lower levels")]
    PrefixDependence { row: u64, level: usize },

    /// A guardrail refused to materialize a space that is too large.
    #[error("refusing {what}: {size} points exceeds cap {cap} (search size ~10^{log10_estimate:.1}); pass a larger --cap to override")]
    CapExceeded {
        what: String,
        size: u64,
        cap: u64,
        log10_estimate: f64,
    },

    /// A structural property that should hold by theory failed.
    #[error("internal consistency failure on chain {chain}: {reason}")]
    Internal { chain: usize, reason: String },

    /// Text or JSON input that could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }

    /// Whether the error stems from bad invocation rather than from the
    /// mathematical content of otherwise well-formed input.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Usage(_) | Error::Parse(_) | Error::CapExceeded { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
