//! Profile catalog and discipline lexicon, and the per-record classifiers
//! built on them.
//!
//! Both load from a tab-separated text format, one entry per line:
//!
//! ```text
//! # profile catalog: id, match tokens, optional active years
//! Carroll70,80<TAB>CARROLL JD 70,CARROLL JD 80
//! Blashfield76<TAB>BLASHFIELD RK 76<TAB>2004-2011
//!
//! # discipline lexicon: label, match terms
//! Psy<TAB>psychiatry,psychiatric
//! ```
//!
//! Blank lines and lines starting with `#` are ignored.

use std::collections::{BTreeSet, HashSet};
use std::ops::RangeInclusive;

use crate::record::{normalize_whitespace, BibRecord, RecordFormat};

const DEFAULT_PROFILES: &str = include_str!("../data/profiles.tsv");
const DEFAULT_DISCIPLINES: &str = include_str!("../data/disciplines.tsv");

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("duplicate entry `{0}`")]
    Duplicate(String),
}

fn malformed(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError::Malformed {
        line,
        message: message.into(),
    }
}

/// Non-comment lines split on tabs, with 1-based line numbers.
fn entry_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            None
        } else {
            Some((i + 1, line.split('\t').map(str::trim).collect()))
        }
    })
}

fn comma_list(field: &str) -> Vec<String> {
    field
        .split(',')
        .map(normalize_whitespace)
        .filter(|s| !s.is_empty())
        .collect()
}

/// One profile publication, possibly standing for several merged works.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfileEntry {
    pub id: String,
    /// Author-year tokens as they appear in citation lines, e.g. `BREIMAN L 84`.
    pub match_tokens: Vec<String>,
    /// Labels of the constituent works when the entry merges several,
    /// e.g. `Kruskal64` and `Kruskal78`; empty otherwise.
    pub merged_ids: Vec<String>,
    pub active_years: Option<RangeInclusive<u16>>,
}

impl ProfileEntry {
    /// Author part of a match token: everything before the trailing year.
    fn author_part(token: &str) -> &str {
        match token.rsplit_once(' ') {
            Some((author, year)) if year.chars().all(|c| c.is_ascii_digit()) => author,
            _ => token,
        }
    }
}

/// Citation-token based catalog of profile publications.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfileCatalog {
    pub entries: Vec<ProfileEntry>,
}

fn parse_year_range(field: &str) -> Option<RangeInclusive<u16>> {
    let (a, b) = field.split_once('-')?;
    let (a, b): (u16, u16) = (a.trim().parse().ok()?, b.trim().parse().ok()?);
    (a <= b).then_some(a..=b)
}

fn merged_ids(id: &str, tokens: &[String]) -> Vec<String> {
    if tokens.len() < 2 {
        return Vec::new();
    }
    let stem: String = id.chars().take_while(|c| c.is_alphabetic()).collect();
    tokens
        .iter()
        .map(|t| {
            let year = t.rsplit(' ').next().unwrap_or_default();
            format!("{stem}{year}")
        })
        .collect()
}

impl ProfileCatalog {
    /// The 82-entry catalog shipped with the crate.
    pub fn default_catalog() -> Self {
        Self::parse(DEFAULT_PROFILES).expect("bundled catalog is well formed")
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = Vec::new();
        let mut seen = HashSet::new();
        for (line, fields) in entry_lines(text) {
            if !(2..=3).contains(&fields.len()) {
                return Err(malformed(line, "expected `id<TAB>tokens[<TAB>years]`"));
            }
            let id = fields[0].to_owned();
            let match_tokens: Vec<String> = comma_list(fields[1])
                .into_iter()
                .map(|t| t.to_ascii_uppercase())
                .collect();
            if id.is_empty() || match_tokens.is_empty() {
                return Err(malformed(line, "empty id or token list"));
            }
            let active_years = match fields.get(2) {
                Some(f) => Some(
                    parse_year_range(f)
                        .ok_or_else(|| malformed(line, format!("bad year range `{f}`")))?,
                ),
                None => None,
            };
            if !seen.insert(id.clone()) {
                return Err(ConfigError::Duplicate(id));
            }
            entries.push(ProfileEntry {
                merged_ids: merged_ids(&id, &match_tokens),
                id,
                match_tokens,
                active_years,
            });
        }
        Ok(Self { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn ids(&self) -> Vec<String> {
        self.entries.iter().map(|e| e.id.clone()).collect()
    }

    pub fn get(&self, id: &str) -> Option<&ProfileEntry> {
        self.entries.iter().find(|e| e.id == id)
    }
}

/// Profile ids a record cites.
///
/// Research Alert: a `W.` line, whitespace-collapsed, equals a match token.
/// Personal Alert: an `rauth` search term is a prefix of a token's author
/// part; a trailing `*` on the term is dropped first.
pub fn match_profiles(record: &BibRecord, catalog: &ProfileCatalog) -> BTreeSet<String> {
    let mut hits = BTreeSet::new();
    match record.raw_format {
        RecordFormat::ResearchAlert => {
            let cited: Vec<String> = record
                .profile_citations
                .iter()
                .map(|c| normalize_whitespace(c).to_ascii_uppercase())
                .collect();
            for entry in &catalog.entries {
                if entry.match_tokens.iter().any(|t| cited.contains(t)) {
                    hits.insert(entry.id.clone());
                }
            }
        }
        RecordFormat::PersonalAlert => {
            let authors: Vec<String> = record
                .search_terms
                .iter()
                .filter(|t| t.qualifier.eq_ignore_ascii_case("rauth"))
                .map(|t| normalize_whitespace(t.term.trim_end_matches('*')).to_ascii_uppercase())
                .filter(|t| !t.is_empty())
                .collect();
            for entry in &catalog.entries {
                let cited = entry.match_tokens.iter().any(|token| {
                    let author = ProfileEntry::author_part(token);
                    authors.iter().any(|a| author.starts_with(a.as_str()))
                });
                if cited {
                    hits.insert(entry.id.clone());
                }
            }
        }
    }
    hits
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DisciplineEntry {
    pub label: String,
    /// Lower-cased substrings.
    pub match_terms: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DisciplineLexicon {
    pub entries: Vec<DisciplineEntry>,
}

impl DisciplineLexicon {
    /// The fourteen tabulated disciplines plus Ecol and Mgt.
    pub fn default_lexicon() -> Self {
        Self::parse(DEFAULT_DISCIPLINES).expect("bundled lexicon is well formed")
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = Vec::new();
        let mut seen = HashSet::new();
        for (line, fields) in entry_lines(text) {
            if fields.len() != 2 {
                return Err(malformed(line, "expected `label<TAB>terms`"));
            }
            let label = fields[0].to_owned();
            let match_terms: Vec<String> = comma_list(fields[1])
                .into_iter()
                .map(|t| t.to_lowercase())
                .collect();
            if label.is_empty() || match_terms.is_empty() {
                return Err(malformed(line, "empty label or term list"));
            }
            if !seen.insert(label.clone()) {
                return Err(ConfigError::Duplicate(label));
            }
            entries.push(DisciplineEntry { label, match_terms });
        }
        Ok(Self { entries })
    }

    pub fn labels(&self) -> Vec<String> {
        self.entries.iter().map(|e| e.label.clone()).collect()
    }
}

struct Occurrence {
    entry: usize,
    start: usize,
    end: usize,
}

/// Labels whose terms occur in `text`. When occurrences of two different
/// labels overlap (`astrophysics` holds both `astrophysics` and `physics`),
/// only the longer one counts.
fn labels_in(text: &str, lexicon: &DisciplineLexicon, out: &mut BTreeSet<usize>) {
    let text = text.to_lowercase();
    let mut found = Vec::new();
    for (entry, d) in lexicon.entries.iter().enumerate() {
        for term in &d.match_terms {
            for (start, _) in text.match_indices(term.as_str()) {
                found.push(Occurrence {
                    entry,
                    start,
                    end: start + term.len(),
                });
            }
        }
    }
    for occ in &found {
        let shadowed = found.iter().any(|other| {
            other.entry != occ.entry
                && other.start < occ.end
                && occ.start < other.end
                && other.end - other.start > occ.end - occ.start
        });
        if !shadowed {
            out.insert(occ.entry);
        }
    }
}

/// Discipline labels of a record, looked up case-insensitively in its
/// title, source, keywords and `KEYWORDS+`.
pub fn tag_disciplines(record: &BibRecord, lexicon: &DisciplineLexicon) -> BTreeSet<String> {
    let mut hit = BTreeSet::new();
    labels_in(&record.title, lexicon, &mut hit);
    labels_in(&record.source, lexicon, &mut hit);
    for k in record.keywords.iter().chain(&record.keywords_plus) {
        labels_in(k, lexicon, &mut hit);
    }
    hit.into_iter()
        .map(|i| lexicon.entries[i].label.clone())
        .collect()
}
