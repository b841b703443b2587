//! UTC timestamps normalized to the trailing-`Z` form.

use chrono::{DateTime, SecondsFormat, Utc};

use super::ModelError;

/// An instant in UTC. Offset inputs are converted on ingest so that two
/// records always compare and serialize the same way; output renders as
/// ISO 8601 with a trailing `Z`, keeping sub-second digits only when the
/// value has them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Timestamp(DateTime<Utc>);

impl Timestamp {
    pub fn parse(text: &str) -> Result<Timestamp, ModelError> {
        let parsed = DateTime::parse_from_rfc3339(text)
            .map_err(|e| ModelError::InvalidTimestamp(format!("{text:?}: {e}")))?;
        Ok(Timestamp(parsed.with_timezone(&Utc)))
    }

    pub fn from_datetime(dt: DateTime<Utc>) -> Timestamp {
        Timestamp(dt)
    }

    pub fn now() -> Timestamp {
        Timestamp(Utc::now())
    }

    pub fn datetime(&self) -> DateTime<Utc> {
        self.0
    }
}

impl std::fmt::Display for Timestamp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0.to_rfc3339_opts(SecondsFormat::AutoSi, true))
    }
}
