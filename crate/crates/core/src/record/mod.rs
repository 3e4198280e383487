//! Citation-alert records.
//!
//! Two plain-text layouts are supported:
//!
//! * the tag-prefixed *Research Alert* layout, one tag (`T`, `A`, `K`, `U`,
//!   `W`, `W.`) per line, used up to 2003;
//! * the labelled-block *Personal Alert* layout (`TITLE:`, `AUTHOR:`, ...)
//!   with indented continuation lines, used from 2004.
//!
//! Both parse into the same [`BibRecord`].

mod personal_alert;
mod research_alert;
mod write;

use std::fmt;
use std::str::FromStr;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

pub use personal_alert::parse_personal_alert;
pub use research_alert::parse_research_alert;
pub use write::{to_personal_alert, to_research_alert, write_records};

/// Which of the two alert layouts a record was read from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RecordFormat {
    ResearchAlert,
    PersonalAlert,
}

impl fmt::Display for RecordFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RecordFormat::ResearchAlert => f.write_str("research"),
            RecordFormat::PersonalAlert => f.write_str("personal"),
        }
    }
}

impl FromStr for RecordFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "research" | "research-alert" | "researchalert" => Ok(RecordFormat::ResearchAlert),
            "personal" | "personal-alert" | "personalalert" => Ok(RecordFormat::PersonalAlert),
            other => Err(format!("unknown record format `{other}`")),
        }
    }
}

/// A `SEARCH TERM(S)` entry: the matched term and its qualifier
/// (`rauth` for a cited author, `rwork` for a cited work).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SearchTerm {
    pub term: String,
    pub qualifier: String,
}

impl SearchTerm {
    pub fn new(term: impl Into<String>, qualifier: impl Into<String>) -> Self {
        Self {
            term: term.into(),
            qualifier: qualifier.into(),
        }
    }
}

/// One bibliographic citation record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BibRecord {
    pub title: String,
    pub authors: Vec<String>,
    pub source: String,
    pub keywords: Vec<String>,
    /// `KEYWORDS+` (Personal Alert only).
    pub keywords_plus: Vec<String>,
    /// Personal Alert only.
    pub search_terms: Vec<SearchTerm>,
    /// Cited profile items, one per Research Alert `W.` line, kept verbatim.
    pub profile_citations: Vec<String>,
    pub address: String,
    pub year: Option<u16>,
    pub raw_format: RecordFormat,
}

impl BibRecord {
    /// An empty record of the given layout with only a title.
    pub fn new(title: impl Into<String>, raw_format: RecordFormat) -> Self {
        Self {
            title: title.into(),
            authors: Vec::new(),
            source: String::new(),
            keywords: Vec::new(),
            keywords_plus: Vec::new(),
            search_terms: Vec::new(),
            profile_citations: Vec::new(),
            address: String::new(),
            year: None,
            raw_format,
        }
    }

    /// Whether the record carries the evidence that got it selected:
    /// a `W.` line for Research Alert, a search term for Personal Alert.
    pub fn has_selection_evidence(&self) -> bool {
        match self.raw_format {
            RecordFormat::ResearchAlert => !self.profile_citations.is_empty(),
            RecordFormat::PersonalAlert => !self.search_terms.is_empty(),
        }
    }

    /// Serializes the record as a single JSON line.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("BibRecord serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("input matches neither or both alert grammars")]
    AmbiguousFormat,
    #[error("line {line}: unknown tag `{tag}`")]
    UnknownTag { line: usize, tag: String },
    #[error("line {line}: unknown header `{header}`")]
    UnknownHeader { line: usize, header: String },
    #[error("line {line}: continuation line with no preceding header")]
    OrphanContinuation { line: usize },
    #[error("record {block} (line {line}): missing title")]
    MissingTitle { block: usize, line: usize },
}

impl ParseError {
    /// Input line the error refers to, when it refers to one.
    pub fn line(&self) -> Option<usize> {
        match self {
            ParseError::AmbiguousFormat => None,
            ParseError::UnknownTag { line, .. }
            | ParseError::UnknownHeader { line, .. }
            | ParseError::OrphanContinuation { line }
            | ParseError::MissingTitle { line, .. } => Some(*line),
        }
    }
}

/// Records parsed from a stream plus the errors of the blocks that were
/// skipped. A strict parse fails on the first error instead.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParseReport {
    pub records: Vec<BibRecord>,
    pub errors: Vec<ParseError>,
}

impl ParseReport {
    pub fn into_result(self) -> Result<Vec<BibRecord>, ParseError> {
        match self.errors.into_iter().next() {
            Some(err) => Err(err),
            None => Ok(self.records),
        }
    }
}

pub(crate) const RESEARCH_TAGS: [&str; 6] = ["T", "A", "K", "U", "W", "W."];

fn is_blank(line: &str) -> bool {
    line.trim().is_empty()
}

/// `T`, `A`, ... at column 0, followed by whitespace.
fn is_research_line(line: &str) -> bool {
    match line.find(char::is_whitespace) {
        Some(end) => RESEARCH_TAGS.contains(&&line[..end]),
        None => false,
    }
}

static HEADER_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^[A-Z][A-Z()+]*(?: [A-Z()+]+)*:").expect("valid regex"));

/// `LABEL:` at column 0, where the label is upper-case words separated by
/// single spaces.
fn is_header_line(line: &str) -> bool {
    HEADER_RE.is_match(line)
}

fn is_continuation_line(line: &str) -> bool {
    line.starts_with(char::is_whitespace) && !is_blank(line)
}

/// Decides which grammar a record block follows. Every non-blank line has
/// to fit the grammar, and the block must fit exactly one of them.
pub fn detect_format(text: &str) -> Result<RecordFormat, ParseError> {
    let lines: Vec<&str> = text.lines().filter(|l| !is_blank(l)).collect();
    let Some(first) = lines.first() else {
        return Err(ParseError::AmbiguousFormat);
    };
    let research = lines.iter().all(|l| is_research_line(l));
    let personal = is_header_line(first)
        && lines
            .iter()
            .all(|l| is_header_line(l) || is_continuation_line(l));
    match (research, personal) {
        (true, false) => Ok(RecordFormat::ResearchAlert),
        (false, true) => Ok(RecordFormat::PersonalAlert),
        _ => Err(ParseError::AmbiguousFormat),
    }
}

/// Guesses the layout of a whole stream from its first non-blank line, so
/// that a malformed line further down is reported by the parser with its
/// line number instead of making the whole stream undetectable.
pub fn sniff_format(text: &str) -> Result<RecordFormat, ParseError> {
    let first = text
        .lines()
        .find(|l| !is_blank(l))
        .ok_or(ParseError::AmbiguousFormat)?;
    detect_format(first)
}

/// Parses a stream in the given layout, or the sniffed one when `format`
/// is `None`, recovering from malformed blocks.
pub fn parse_lenient(text: &str, format: Option<RecordFormat>) -> ParseReport {
    let format = match format.map(Ok).unwrap_or_else(|| sniff_format(text)) {
        Ok(f) => f,
        Err(_) if text.lines().all(is_blank) => return ParseReport::default(),
        Err(e) => {
            return ParseReport {
                records: Vec::new(),
                errors: vec![e],
            }
        }
    };
    match format {
        RecordFormat::ResearchAlert => research_alert::parse_report(text),
        RecordFormat::PersonalAlert => personal_alert::parse_report(text),
    }
}

/// Strict counterpart of [`parse_lenient`].
pub fn parse(text: &str, format: Option<RecordFormat>) -> Result<Vec<BibRecord>, ParseError> {
    parse_lenient(text, format).into_result()
}

/// Collapses whitespace runs to single spaces and trims.
pub fn normalize_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn join_lines(parts: &[String]) -> String {
    normalize_whitespace(&parts.join(" "))
}

fn split_list(joined: &str) -> Vec<String> {
    joined
        .split(';')
        .map(normalize_whitespace)
        .filter(|s| !s.is_empty())
        .collect()
}

const MIN_YEAR: u16 = 1900;
const MAX_YEAR: u16 = 2100;

static DATE_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"(?i)\b(?:JAN|FEB|MAR|APR|MAY|JUN|JUL|AUG|SEP|OCT|NOV|DEC)[A-Z]*\.?(?:\s+\d{1,2})?,?\s+(\d{4})\b",
    )
    .expect("valid regex")
});

fn year_in_range(digits: &str) -> Option<u16> {
    let year: u16 = digits.parse().ok()?;
    (MIN_YEAR..=MAX_YEAR).contains(&year).then_some(year)
}

/// Publication year of a source/date field.
///
/// A month-led date (`APR 1998`, `MAR 22 2009`) wins; otherwise the last
/// standalone four-digit number in 1900..=2100. Page ranges such as
/// `p.1551-1557` fall outside the range.
pub fn extract_year(source: &str) -> Option<u16> {
    if let Some(year) = DATE_RE
        .captures_iter(source)
        .filter_map(|c| year_in_range(&c[1]))
        .last()
    {
        return Some(year);
    }
    source
        .split(|c: char| !c.is_ascii_digit())
        .filter(|run| run.len() == 4)
        .filter_map(year_in_range)
        .next_back()
}

/// Text of a plain-text file, read as UTF-8 when valid and byte-per-char
/// (Latin-1) otherwise, so no byte is ever dropped.
pub fn decode_bytes(bytes: &[u8]) -> String {
    match std::str::from_utf8(bytes) {
        Ok(s) => s.to_owned(),
        Err(_) => bytes.iter().map(|&b| b as char).collect(),
    }
}
