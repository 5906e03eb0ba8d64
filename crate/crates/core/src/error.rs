use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A caller violated a shape or precondition contract.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("self-loop on `{label}` at line {line}")]
    SelfLoop { label: String, line: usize },

    #[error("unknown label `{label}` in {side} graph")]
    UnknownLabel { label: String, side: &'static str },

    #[error("one-to-one violation: `{label}` appears twice on the {side} side")]
    DuplicateAnchor { label: String, side: &'static str },

    #[error("format error: {0}")]
    Format(String),

    /// Non-finite values reached a parameter, gradient or loss.
    #[error("training diverged in `{block}`: {detail}")]
    NonFinite { block: String, detail: String },

    /// No unmasked candidate remains on one side.
    #[error("episode exhausted: no selectable {0} identity")]
    Exhausted(&'static str),

    #[error("metric undefined: {0}")]
    UndefinedMetric(&'static str),
}

macro_rules! ensure {
    ($cond:expr, $($arg:tt)+) => {
        if !$cond {
            return Err($crate::error::Error::Contract(alloc::format!($($arg)+)));
        }
    };
}
pub(crate) use ensure;
