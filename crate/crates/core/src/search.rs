//! In-memory inverted index over records, with field-constrained
//! conjunctive queries, paging and More-Like-This.
//!
//! Query syntax: whitespace-separated terms, each optionally prefixed by
//! `field:`; the keyword `AND` may separate them but every term is required
//! either way. A term that tokenizes into several words (`f-measure`)
//! requires each word.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::record::BibRecord;

pub const PAGE_SIZE: usize = 10;
pub const MLT_RESULTS: usize = 3;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SearchError {
    #[error("empty query")]
    EmptyQuery,
    #[error("unknown field `{0}`")]
    UnknownField(String),
    #[error("no searchable term after `{0}`")]
    EmptyTerm(String),
    #[error("pages are numbered from 1")]
    BadPage,
    #[error("no record with id {0}")]
    UnknownRecord(usize),
    #[error("field weight for {0} must be positive and finite")]
    BadWeight(Field),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    Title,
    Authors,
    Source,
    Keywords,
    KeywordsPlus,
    Address,
}

impl Field {
    pub const ALL: [Field; 6] = [
        Field::Title,
        Field::Authors,
        Field::Source,
        Field::Keywords,
        Field::KeywordsPlus,
        Field::Address,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Field::Title => "title",
            Field::Authors => "authors",
            Field::Source => "source",
            Field::Keywords => "keywords",
            Field::KeywordsPlus => "keywords_plus",
            Field::Address => "address",
        }
    }

    fn index(self) -> usize {
        self as usize
    }

    /// The field's text, values joined by newlines.
    pub fn text(self, record: &BibRecord) -> String {
        match self {
            Field::Title => record.title.clone(),
            Field::Authors => record.authors.join("\n"),
            Field::Source => record.source.clone(),
            Field::Keywords => record.keywords.join("\n"),
            Field::KeywordsPlus => record.keywords_plus.join("\n"),
            Field::Address => record.address.clone(),
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Field {
    type Err = SearchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "title" | "ti" => Ok(Field::Title),
            "author" | "authors" | "au" => Ok(Field::Authors),
            "source" | "so" => Ok(Field::Source),
            "keyword" | "keywords" | "kw" => Ok(Field::Keywords),
            "keywords_plus" | "keywordsplus" | "keywords+" => Ok(Field::KeywordsPlus),
            "address" | "ad" => Ok(Field::Address),
            _ => Err(SearchError::UnknownField(s.to_owned())),
        }
    }
}

/// Maximal alphanumeric runs, lowercased.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldWeights {
    pub title: f64,
    pub authors: f64,
    pub source: f64,
    pub keywords: f64,
    pub keywords_plus: f64,
    pub address: f64,
}

impl Default for FieldWeights {
    fn default() -> Self {
        Self {
            title: 3.0,
            authors: 1.0,
            source: 1.0,
            keywords: 2.0,
            keywords_plus: 1.0,
            address: 1.0,
        }
    }
}

impl FieldWeights {
    pub fn get(&self, field: Field) -> f64 {
        match field {
            Field::Title => self.title,
            Field::Authors => self.authors,
            Field::Source => self.source,
            Field::Keywords => self.keywords,
            Field::KeywordsPlus => self.keywords_plus,
            Field::Address => self.address,
        }
    }

    pub fn validate(&self) -> Result<(), SearchError> {
        match Field::ALL
            .into_iter()
            .find(|&f| !(self.get(f) > 0.0 && self.get(f).is_finite()))
        {
            Some(f) => Err(SearchError::BadWeight(f)),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Conjunct {
    pub field: Option<Field>,
    pub term: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub conjuncts: Vec<Conjunct>,
}

pub fn parse_query(text: &str) -> Result<Query, SearchError> {
    let mut conjuncts = Vec::new();
    for word in text.split_whitespace().filter(|w| *w != "AND") {
        let (field, term) = match word.split_once(':') {
            Some((name, term)) => (Some(name.parse::<Field>()?), term),
            None => (None, word),
        };
        let tokens = tokenize(term);
        if tokens.is_empty() {
            return Err(SearchError::EmptyTerm(word.to_owned()));
        }
        conjuncts.extend(tokens.into_iter().map(|term| Conjunct { field, term }));
    }
    if conjuncts.is_empty() {
        return Err(SearchError::EmptyQuery);
    }
    Ok(Query { conjuncts })
}

/// Term frequencies of one record, per field.
type FieldCounts = [BTreeMap<String, u32>; 6];

#[derive(Debug, Clone)]
pub struct Index {
    /// term → field → (record id, term frequency), ids ascending.
    postings: BTreeMap<String, BTreeMap<Field, Vec<(usize, u32)>>>,
    weights: FieldWeights,
    docs: Vec<FieldCounts>,
    records: Vec<BibRecord>,
}

pub fn build_index(records: &[BibRecord]) -> Index {
    build_index_with(records, FieldWeights::default()).expect("default weights are valid")
}

pub fn build_index_with(
    records: &[BibRecord],
    weights: FieldWeights,
) -> Result<Index, SearchError> {
    weights.validate()?;
    let mut postings: BTreeMap<String, BTreeMap<Field, Vec<(usize, u32)>>> = BTreeMap::new();
    let mut docs = Vec::with_capacity(records.len());
    for (id, record) in records.iter().enumerate() {
        let mut counts: FieldCounts = Default::default();
        for field in Field::ALL {
            for token in tokenize(&field.text(record)) {
                *counts[field.index()].entry(token).or_insert(0) += 1;
            }
            for (term, &tf) in &counts[field.index()] {
                postings
                    .entry(term.clone())
                    .or_default()
                    .entry(field)
                    .or_default()
                    .push((id, tf));
            }
        }
        docs.push(counts);
    }
    Ok(Index {
        postings,
        weights,
        docs,
        records: records.to_vec(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hit {
    pub id: usize,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchPage {
    pub page: usize,
    pub total_hits: usize,
    pub hits: Vec<Hit>,
}

impl SearchPage {
    pub fn page_count(&self) -> usize {
        self.total_hits.div_ceil(PAGE_SIZE)
    }
}

fn rank(mut hits: Vec<Hit>) -> Vec<Hit> {
    hits.sort_by(|x, y| y.score.total_cmp(&x.score).then(x.id.cmp(&y.id)));
    hits
}

impl Index {
    pub fn doc_count(&self) -> usize {
        self.docs.len()
    }

    pub fn record(&self, id: usize) -> Option<&BibRecord> {
        self.records.get(id)
    }

    pub fn weights(&self) -> &FieldWeights {
        &self.weights
    }

    /// Postings of `term` (lowercased) in `field`.
    pub fn postings(&self, term: &str, field: Field) -> &[(usize, u32)] {
        self.postings
            .get(term)
            .and_then(|m| m.get(&field))
            .map_or(&[], Vec::as_slice)
    }

    /// Weighted frequency of one conjunct per matching record.
    fn conjunct_scores(&self, c: &Conjunct) -> BTreeMap<usize, f64> {
        let mut scores = BTreeMap::new();
        let Some(by_field) = self.postings.get(&c.term) else {
            return scores;
        };
        for (&field, list) in by_field {
            if c.field.is_some_and(|f| f != field) {
                continue;
            }
            let w = self.weights.get(field);
            for &(id, tf) in list {
                *scores.entry(id).or_insert(0.0) += w * f64::from(tf);
            }
        }
        scores
    }

    /// All records satisfying every conjunct, best first.
    pub fn matches(&self, query: &Query) -> Vec<Hit> {
        let mut iter = query.conjuncts.iter();
        let Some(first) = iter.next() else {
            return Vec::new();
        };
        let mut acc = self.conjunct_scores(first);
        for c in iter {
            if acc.is_empty() {
                break;
            }
            let next = self.conjunct_scores(c);
            acc = acc
                .into_iter()
                .filter_map(|(id, s)| next.get(&id).map(|t| (id, s + t)))
                .collect();
        }
        rank(
            acc.into_iter()
                .map(|(id, score)| Hit { id, score })
                .collect(),
        )
    }

    /// One page of ranked results; pages past the end are empty.
    pub fn search(&self, query: &Query, page: usize) -> Result<SearchPage, SearchError> {
        if page == 0 {
            return Err(SearchError::BadPage);
        }
        let all = self.matches(query);
        let total_hits = all.len();
        let hits = all
            .into_iter()
            .skip((page - 1) * PAGE_SIZE)
            .take(PAGE_SIZE)
            .collect();
        Ok(SearchPage {
            page,
            total_hits,
            hits,
        })
    }

    /// The three records sharing the most weighted (field, term) pairs with
    /// record `id`. Records sharing nothing still fill the list, by id.
    pub fn more_like_this(&self, id: usize) -> Result<Vec<Hit>, SearchError> {
        let doc = self.docs.get(id).ok_or(SearchError::UnknownRecord(id))?;
        let mut scores = vec![0.0; self.docs.len()];
        for field in Field::ALL {
            let w = self.weights.get(field);
            for term in doc[field.index()].keys() {
                for &(other, _) in self.postings(term, field) {
                    scores[other] += w;
                }
            }
        }
        let hits = scores
            .into_iter()
            .enumerate()
            .filter(|&(other, _)| other != id)
            .map(|(id, score)| Hit { id, score })
            .collect();
        Ok(rank(hits).into_iter().take(MLT_RESULTS).collect())
    }
}

pub fn search(index: &Index, query: &Query, page: usize) -> Result<SearchPage, SearchError> {
    index.search(query, page)
}

pub fn more_like_this(index: &Index, id: usize) -> Result<Vec<Hit>, SearchError> {
    index.more_like_this(id)
}
