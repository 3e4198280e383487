use super::{
    extract_year, is_blank, join_lines, normalize_whitespace, split_list, BibRecord, ParseError,
    ParseReport, RecordFormat, SearchTerm,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Header {
    Title,
    Author,
    Source,
    SearchTerms,
    Keywords,
    KeywordsPlus,
    AuthorAddress,
}

impl Header {
    fn from_label(label: &str) -> Option<Self> {
        Some(match label {
            "TITLE" => Header::Title,
            "AUTHOR" => Header::Author,
            "SOURCE" => Header::Source,
            "SEARCH TERM(S)" => Header::SearchTerms,
            "KEYWORDS" => Header::Keywords,
            "KEYWORDS+" => Header::KeywordsPlus,
            "AUTHOR ADDRESS" => Header::AuthorAddress,
            _ => return None,
        })
    }
}

struct Pending {
    number: usize,
    fields: Vec<(Header, Vec<String>)>,
}

impl Pending {
    fn has(&self, header: Header) -> bool {
        self.fields.iter().any(|(h, _)| *h == header)
    }

    fn joined(&self, header: Header) -> String {
        self.fields
            .iter()
            .find(|(h, _)| *h == header)
            .map(|(_, parts)| join_lines(parts))
            .unwrap_or_default()
    }

    fn finish(self, line: usize) -> Result<BibRecord, ParseError> {
        let title = self.joined(Header::Title);
        if title.is_empty() {
            return Err(ParseError::MissingTitle {
                block: self.number,
                line,
            });
        }
        let source = self.joined(Header::Source);
        Ok(BibRecord {
            title,
            authors: split_list(&self.joined(Header::Author)),
            year: extract_year(&source),
            source,
            keywords: split_list(&self.joined(Header::Keywords)),
            keywords_plus: split_list(&self.joined(Header::KeywordsPlus)),
            search_terms: split_list(&self.joined(Header::SearchTerms))
                .iter()
                .map(|entry| split_search_term(entry))
                .collect(),
            profile_citations: Vec::new(),
            address: self.joined(Header::AuthorAddress),
            raw_format: RecordFormat::PersonalAlert,
        })
    }
}

/// `RIPLEY BD  rauth` -> (`RIPLEY BD`, `rauth`): the qualifier follows the
/// last whitespace run.
fn split_search_term(entry: &str) -> SearchTerm {
    let entry = normalize_whitespace(entry);
    match entry.rsplit_once(' ') {
        Some((term, qualifier)) => SearchTerm::new(term, qualifier),
        None => SearchTerm::new(entry, ""),
    }
}

/// Personal Alert records are introduced by `TITLE:`. Blank lines end a
/// continuation but not a record, since the layout itself spaces header
/// groups apart. A header repeated before the next `TITLE:` means the next
/// record has lost its title.
pub(super) fn parse_report(text: &str) -> ParseReport {
    let mut report = ParseReport::default();
    let mut current: Option<(usize, Pending)> = None;
    let mut open_field = false;
    let mut skipping = false;
    let mut records_seen = 0usize;

    let flush = |current: &mut Option<(usize, Pending)>, report: &mut ParseReport| {
        if let Some((start, pending)) = current.take() {
            match pending.finish(start) {
                Ok(rec) => report.records.push(rec),
                Err(e) => report.errors.push(e),
            }
        }
    };

    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if is_blank(line) {
            open_field = false;
            continue;
        }
        if line.starts_with(char::is_whitespace) {
            if skipping {
                continue;
            }
            match current.as_mut() {
                Some((_, pending)) if open_field => {
                    let (_, parts) = pending.fields.last_mut().expect("open field exists");
                    parts.push(line.trim().to_owned());
                }
                _ => {
                    report
                        .errors
                        .push(ParseError::OrphanContinuation { line: line_no });
                    current = None;
                    skipping = true;
                }
            }
            continue;
        }

        let Some((label, value)) = line.split_once(':') else {
            report.errors.push(ParseError::UnknownHeader {
                line: line_no,
                header: line
                    .split_whitespace()
                    .next()
                    .unwrap_or_default()
                    .to_owned(),
            });
            current = None;
            skipping = true;
            continue;
        };
        let Some(header) = Header::from_label(label.trim_end()) else {
            report.errors.push(ParseError::UnknownHeader {
                line: line_no,
                header: format!("{}:", label.trim_end()),
            });
            current = None;
            skipping = true;
            continue;
        };

        if header == Header::Title {
            flush(&mut current, &mut report);
            records_seen += 1;
            skipping = false;
            current = Some((
                line_no,
                Pending {
                    number: records_seen,
                    fields: Vec::new(),
                },
            ));
        } else if skipping {
            continue;
        } else if current.as_ref().is_none_or(|(_, p)| p.has(header)) {
            flush(&mut current, &mut report);
            records_seen += 1;
            report.errors.push(ParseError::MissingTitle {
                block: records_seen,
                line: line_no,
            });
            skipping = true;
            continue;
        }

        let (_, pending) = current.as_mut().expect("record is open");
        pending.fields.push((header, vec![value.trim().to_owned()]));
        open_field = true;
    }
    flush(&mut current, &mut report);
    report
}

/// Parses a Personal Alert stream of labelled blocks. Fails on the first
/// malformed record.
pub fn parse_personal_alert(text: &str) -> Result<Vec<BibRecord>, ParseError> {
    parse_report(text).into_result()
}

#[cfg(test)]
mod tests {
    use super::super::samples::PERSONAL_ALERT;
    use super::*;

    #[test]
    fn table_record_golden() {
        let records = parse_personal_alert(PERSONAL_ALERT).unwrap();
        assert_eq!(records.len(), 1);
        let r = &records[0];
        assert!(r
            .title
            .starts_with("Multiscale spatial variation of the bark beetle"));
        assert_eq!(
            r.title,
            "Multiscale spatial variation of the bark beetle Ips sexdentatus damage in a pine \
             plantation forest (Landes de Gascogne, Southwestern France) (Article, English)"
        );
        assert_eq!(
            r.authors,
            [
                "Rossi, JP",
                "Samalens, JC",
                "Guyon, D",
                "van Halder, I",
                "Jactel, H",
                "Menassieu, P",
                "Piou, D"
            ]
        );
        assert_eq!(
            r.search_terms,
            [
                SearchTerm::new("RIPLEY BD", "rauth"),
                SearchTerm::new("DENSITY ESTIM*", "rwork"),
                SearchTerm::new("MULTI*", "rwork"),
            ]
        );
        assert_eq!(r.year, Some(2009));
        assert_eq!(
            r.source,
            "FOREST ECOLOGY AND MANAGEMENT 257 (7). MAR 22 2009. p.1551-1557 ELSEVIER SCIENCE BV, AMSTERDAM"
        );
        assert_eq!(r.keywords.len(), 8);
        assert_eq!(r.keywords[3], "Spatial statistics");
        assert_eq!(r.keywords_plus.len(), 10);
        assert_eq!(r.keywords_plus[0], "POINT PATTERN-ANALYSIS");
        assert_eq!(
            r.address,
            "JP Rossi, INRA, UMR BIOGECO, Domaine Hermitage 69 Route Arcachon, F-33612 Cestas, France"
        );
        assert!(r.profile_citations.is_empty());
    }

    #[test]
    fn keywords_plus_is_optional() {
        let text = "TITLE: A\nSEARCH TERM(S): WARD JH  rauth\nKEYWORDS: one; two\n";
        let r = &parse_personal_alert(text).unwrap()[0];
        assert!(r.keywords_plus.is_empty());
        assert_eq!(r.keywords, ["one", "two"]);
    }

    #[test]
    fn stray_header_is_rejected_with_line() {
        let text = "TITLE: A\nAUTHOR: X, Y\nFOO: bar\n";
        assert_eq!(
            parse_personal_alert(text).unwrap_err(),
            ParseError::UnknownHeader {
                line: 3,
                header: "FOO:".into()
            }
        );
    }

    #[test]
    fn two_records_in_order() {
        let text = format!(
            "{PERSONAL_ALERT}\nTITLE:          Second\nSOURCE:         X 1 (2). JAN 2004.\n"
        );
        let records = parse_personal_alert(&text).unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(records[1].title, "Second");
        assert_eq!(records[1].year, Some(2004));
    }

    #[test]
    fn record_lacking_title() {
        let text = "TITLE: first\nAUTHOR: A, B\n\nAUTHOR: C, D\nSOURCE: J\n\nTITLE: third\n";
        let report = parse_report(text);
        assert_eq!(
            report.errors,
            [ParseError::MissingTitle { block: 2, line: 4 }]
        );
        let titles: Vec<_> = report.records.iter().map(|r| r.title.as_str()).collect();
        assert_eq!(titles, ["first", "third"]);
    }

    #[test]
    fn leading_header_without_title() {
        let err = parse_personal_alert("AUTHOR: A, B\n").unwrap_err();
        assert_eq!(err, ParseError::MissingTitle { block: 1, line: 1 });
    }

    #[test]
    fn continuation_after_blank_line_is_orphaned() {
        let err = parse_personal_alert("TITLE: x\n\n      dangling\n").unwrap_err();
        assert_eq!(err, ParseError::OrphanContinuation { line: 3 });
    }

    #[test]
    fn term_without_qualifier() {
        assert_eq!(split_search_term("WARD"), SearchTerm::new("WARD", ""));
        assert_eq!(
            split_search_term(" DENSITY   ESTIM*   rwork "),
            SearchTerm::new("DENSITY ESTIM*", "rwork")
        );
    }
}
