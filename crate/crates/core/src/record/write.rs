use super::{BibRecord, RecordFormat};

const WRAP: usize = 64;

/// Greedy word wrap; a single overlong word gets a line of its own.
fn wrap(text: &str) -> Vec<String> {
    let mut lines = Vec::new();
    let mut line = String::new();
    for word in text.split_whitespace() {
        if !line.is_empty() && line.len() + 1 + word.len() > WRAP {
            lines.push(std::mem::take(&mut line));
        }
        if !line.is_empty() {
            line.push(' ');
        }
        line.push_str(word);
    }
    if !line.is_empty() {
        lines.push(line);
    }
    lines
}

fn push_tagged(out: &mut String, tag: &str, value: &str) {
    out.push_str(&format!("{tag:<8}{value}\n"));
}

/// Renders a record in the tag-prefixed Research Alert layout. Long titles
/// and addresses are split over repeated tag lines.
pub fn to_research_alert(record: &BibRecord) -> String {
    let mut out = String::new();
    for part in wrap(&record.title) {
        push_tagged(&mut out, "T", &part);
    }
    for author in &record.authors {
        push_tagged(&mut out, "A", author);
    }
    for keyword in &record.keywords {
        push_tagged(&mut out, "K", keyword);
    }
    if !record.source.is_empty() {
        push_tagged(&mut out, "U", &record.source);
    }
    for part in wrap(&record.address) {
        push_tagged(&mut out, "W", &format!("  {part}"));
    }
    for citation in &record.profile_citations {
        push_tagged(&mut out, "W.", citation);
    }
    out
}

const INDENT: usize = 16;

fn push_header(out: &mut String, label: &str, value: &str) {
    if value.is_empty() {
        return;
    }
    let label = format!("{label}:");
    for (i, part) in wrap(value).iter().enumerate() {
        if i == 0 {
            out.push_str(&format!("{label:<INDENT$}{part}\n"));
        } else {
            out.push_str(&format!("{:INDENT$}{part}\n", ""));
        }
    }
}

/// Renders a record in the labelled Personal Alert layout.
pub fn to_personal_alert(record: &BibRecord) -> String {
    let mut out = String::new();
    push_header(&mut out, "TITLE", &record.title);
    push_header(&mut out, "AUTHOR", &record.authors.join("; "));
    push_header(&mut out, "SOURCE", &record.source);
    let terms: Vec<String> = record
        .search_terms
        .iter()
        .map(|t| {
            if t.qualifier.is_empty() {
                t.term.clone()
            } else {
                format!("{}  {}", t.term, t.qualifier)
            }
        })
        .collect();
    push_header(&mut out, "SEARCH TERM(S)", &terms.join("; "));
    push_header(&mut out, "KEYWORDS", &record.keywords.join("; "));
    push_header(&mut out, "KEYWORDS+", &record.keywords_plus.join("; "));
    push_header(&mut out, "AUTHOR ADDRESS", &record.address);
    out
}

/// Renders records in one layout, separated by blank lines.
pub fn write_records(records: &[BibRecord], format: RecordFormat) -> String {
    records
        .iter()
        .map(|r| match format {
            RecordFormat::ResearchAlert => to_research_alert(r),
            RecordFormat::PersonalAlert => to_personal_alert(r),
        })
        .collect::<Vec<_>>()
        .join("\n")
}
