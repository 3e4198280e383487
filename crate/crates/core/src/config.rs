//! Run configuration, read from a TOML file.
//!
//! ```toml
//! inputs = ["alerts/1998.txt", "alerts/2009.txt"]
//! format = "personal"
//! exclusions = ["galaxy cluster"]
//! years = [1994, 2011]
//! out_dir = "out"
//! k = 5
//! axes = 2
//!
//! [weights]
//! title = 3.0
//! keywords = 2.0
//! ```
//!
//! Every key is optional. Command-line flags override file values.

use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::record::RecordFormat;
use crate::search::FieldWeights;
use crate::tables::DEFAULT_EXCLUSIONS;

pub const CONFIG_ENV: &str = "BIBCARTO_CONFIG";

#[derive(Debug, thiserror::Error)]
pub enum ConfigFileError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config {path}: {source}")]
    Toml {
        path: PathBuf,
        source: Box<toml::de::Error>,
    },
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub inputs: Vec<PathBuf>,
    pub format: Option<String>,
    pub exclusions: Vec<String>,
    pub catalog: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub years: (u16, u16),
    pub out_dir: PathBuf,
    pub k: usize,
    /// Axes written to the coordinate file; all retained axes when unset.
    pub axes: Option<usize>,
    pub weights: FieldWeights,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            inputs: Vec::new(),
            format: None,
            exclusions: DEFAULT_EXCLUSIONS.iter().map(|s| s.to_string()).collect(),
            catalog: None,
            lexicon: None,
            years: (1994, 2011),
            out_dir: PathBuf::from("out"),
            k: 5,
            axes: None,
            weights: FieldWeights::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str, path: &Path) -> Result<Self, ConfigFileError> {
        let config: RunConfig = toml::from_str(text).map_err(|e| ConfigFileError::Toml {
            path: path.to_owned(),
            source: Box::new(e),
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigFileError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigFileError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_toml(&text, path)
    }

    /// Loads `explicit` if given, else the file named by `BIBCARTO_CONFIG`,
    /// else the defaults.
    pub fn resolve(explicit: Option<&Path>) -> Result<Self, ConfigFileError> {
        match explicit {
            Some(p) => Self::load(p),
            None => match std::env::var_os(CONFIG_ENV) {
                Some(p) if !p.is_empty() => Self::load(Path::new(&p)),
                _ => Ok(Self::default()),
            },
        }
    }

    pub fn validate(&self) -> Result<(), ConfigFileError> {
        if self.years.0 > self.years.1 {
            return Err(ConfigFileError::Invalid(format!(
                "empty year range {}..{}",
                self.years.0, self.years.1
            )));
        }
        if self.k == 0 {
            return Err(ConfigFileError::Invalid("k must be at least 1".into()));
        }
        if self.axes == Some(0) {
            return Err(ConfigFileError::Invalid("axes must be at least 1".into()));
        }
        if let Some(f) = &self.format {
            self.parsed_format(f)?;
        }
        self.weights
            .validate()
            .map_err(|e| ConfigFileError::Invalid(e.to_string()))
    }

    fn parsed_format(&self, f: &str) -> Result<RecordFormat, ConfigFileError> {
        f.parse().map_err(ConfigFileError::Invalid)
    }

    pub fn record_format(&self) -> Option<RecordFormat> {
        self.format.as_deref().and_then(|f| f.parse().ok())
    }

    pub fn year_range(&self) -> RangeInclusive<u16> {
        self.years.0..=self.years.1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig, ConfigFileError> {
        RunConfig::from_toml(text, Path::new("test.toml"))
    }

    #[test]
    fn empty_file_is_default() {
        assert_eq!(parse("").unwrap(), RunConfig::default());
    }

    #[test]
    fn full_file() {
        let c = parse(
            r#"
            inputs = ["a.txt"]
            format = "research"
            exclusions = []
            years = [2000, 2003]
            out_dir = "maps"
            k = 2
            axes = 3
            [weights]
            title = 5.0
            "#,
        )
        .unwrap();
        assert_eq!(c.record_format(), Some(RecordFormat::ResearchAlert));
        assert_eq!(c.year_range(), 2000..=2003);
        assert_eq!((c.k, c.axes), (2, Some(3)));
        assert_eq!(c.weights.title, 5.0);
        assert_eq!(c.weights.keywords, 2.0);
        assert!(c.exclusions.is_empty());
    }

    #[test]
    fn rejects_bad_values() {
        for text in [
            "k = 0",
            "years = [2011, 1994]",
            "format = \"marc\"",
            "axes = 0",
            "[weights]\ntitle = -1.0",
        ] {
            assert!(
                matches!(parse(text), Err(ConfigFileError::Invalid(_))),
                "{text}"
            );
        }
        assert!(matches!(
            parse("colour = 1"),
            Err(ConfigFileError::Toml { .. })
        ));
    }
}
