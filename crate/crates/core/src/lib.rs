//! Bibliometric mapping of a research field from citation-alert records.
//!
//! The pipeline runs from raw alert text to a map of the field:
//!
//! * [`record`] parses the two alert layouts into [`record::BibRecord`]s;
//! * [`catalog`] and [`tables`] classify records against the profile catalog
//!   and the discipline lexicon and cross-tabulate them by year;
//! * [`ca`] runs correspondence analysis on a contingency table and projects
//!   supplementary rows and columns;
//! * [`ward`] clusters the factor-space points with Ward's criterion;
//! * [`search`] is a small field-aware inverted index with More-Like-This.

pub mod ca;
pub mod catalog;
pub mod cli;
pub mod config;
pub mod fixtures;
pub mod linalg;
pub mod record;
pub mod search;
pub mod tables;
pub mod ward;
