use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NnError {
    #[error("dimension mismatch in {context}: expected {expected:?}, found {found:?}")]
    Dimension {
        context: &'static str,
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("empty input sequence")]
    EmptySequence,
    #[error("tape was recorded by a different network or before a parameter update")]
    StaleTape,
    #[error("invalid network spec: {0}")]
    InvalidSpec(String),
    #[error("interpolation factor {0} outside [0, 1]")]
    InvalidTau(f64),
    #[error("parameter layout mismatch")]
    LayoutMismatch,
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },
}

pub(crate) fn check_len(context: &'static str, expected: usize, found: usize) -> Result<(), NnError> {
    if expected == found {
        Ok(())
    } else {
        Err(NnError::Dimension { context, expected: (expected, 1), found: (found, 1) })
    }
}
