use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("degenerate channel: {0}")]
    DegenerateChannel(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

/// Rejects non-finite values and values outside `[lo, +inf)` (or `(lo, +inf)` when `strict`).
pub(crate) fn check_lower(name: &'static str, value: f64, lo: f64, strict: bool) -> Result<()> {
    let ok = if strict { value > lo } else { value >= lo };
    if ok && value.is_finite() {
        Ok(())
    } else {
        let op = if strict { ">" } else { ">=" };
        Err(Error::invalid(
            name,
            format!("must be {op} {lo}, got {value}"),
        ))
    }
}
