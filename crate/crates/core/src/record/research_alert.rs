use super::{
    extract_year, is_blank, join_lines, normalize_whitespace, BibRecord, ParseError, ParseReport,
    RecordFormat,
};

/// Lines of one blank-line separated block, with their 1-based numbers.
pub(super) struct Block<'a> {
    pub number: usize,
    pub lines: Vec<(usize, &'a str)>,
}

pub(super) fn split_blocks(text: &str) -> Vec<Block<'_>> {
    let mut blocks = Vec::new();
    let mut current: Vec<(usize, &str)> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if is_blank(line) {
            if !current.is_empty() {
                blocks.push(std::mem::take(&mut current));
            }
        } else {
            current.push((idx + 1, line));
        }
    }
    if !current.is_empty() {
        blocks.push(current);
    }
    blocks
        .into_iter()
        .enumerate()
        .map(|(i, lines)| Block {
            number: i + 1,
            lines,
        })
        .collect()
}

#[derive(Default)]
struct Fields {
    title: Vec<String>,
    authors: Vec<String>,
    keywords: Vec<String>,
    source: Vec<String>,
    address: Vec<String>,
    citations: Vec<String>,
}

fn parse_block(block: &Block<'_>) -> Result<BibRecord, ParseError> {
    let mut fields = Fields::default();
    for &(line_no, line) in &block.lines {
        let (tag, value) = match line.find(char::is_whitespace) {
            Some(end) => (&line[..end], line[end..].trim()),
            None => (line, ""),
        };
        match tag {
            "T" => fields.title.push(value.to_owned()),
            "A" => fields.authors.push(normalize_whitespace(value)),
            "K" => fields.keywords.push(normalize_whitespace(value)),
            "U" => fields.source.push(value.to_owned()),
            "W" => fields.address.push(value.to_owned()),
            // the cited item keeps its column padding
            "W." => fields.citations.push(value.to_owned()),
            _ => {
                return Err(ParseError::UnknownTag {
                    line: line_no,
                    tag: tag.to_owned(),
                })
            }
        }
    }

    let title = join_lines(&fields.title);
    if title.is_empty() {
        return Err(ParseError::MissingTitle {
            block: block.number,
            line: block.lines[0].0,
        });
    }
    let source = join_lines(&fields.source);
    Ok(BibRecord {
        title,
        authors: fields
            .authors
            .into_iter()
            .filter(|a| !a.is_empty())
            .collect(),
        year: extract_year(&source),
        source,
        keywords: fields
            .keywords
            .into_iter()
            .filter(|k| !k.is_empty())
            .collect(),
        keywords_plus: Vec::new(),
        search_terms: Vec::new(),
        profile_citations: fields
            .citations
            .into_iter()
            .filter(|c| !c.is_empty())
            .collect(),
        address: join_lines(&fields.address),
        raw_format: RecordFormat::ResearchAlert,
    })
}

pub(super) fn parse_report(text: &str) -> ParseReport {
    let mut report = ParseReport::default();
    for block in split_blocks(text) {
        match parse_block(&block) {
            Ok(record) => report.records.push(record),
            Err(err) => report.errors.push(err),
        }
    }
    report
}

/// Parses a Research Alert stream: blank-line separated blocks of
/// `T`/`A`/`K`/`U`/`W`/`W.` lines. Fails on the first malformed block.
pub fn parse_research_alert(text: &str) -> Result<Vec<BibRecord>, ParseError> {
    parse_report(text).into_result()
}
