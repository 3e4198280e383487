//! The two published frequency tables, 1994 to 2011, compiled in verbatim.
//!
//! * `Table1`: the 82 profile publications by year.
//! * `Table2`: the 14 tabulated discipline terms by year.

use std::fmt;
use std::str::FromStr;

use crate::tables::ContingencyTable;

const TABLE1: &str = include_str!("../data/table1.txt");
const TABLE2: &str = include_str!("../data/table2.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Fixture {
    Table1,
    Table2,
}

impl Fixture {
    pub const ALL: [Fixture; 2] = [Fixture::Table1, Fixture::Table2];

    /// Grand total as printed in the table's caption.
    pub fn caption_total(self) -> u64 {
        match self {
            Fixture::Table1 => 135_088,
            Fixture::Table2 => 23_997,
        }
    }

    fn source(self) -> &'static str {
        match self {
            Fixture::Table1 => TABLE1,
            Fixture::Table2 => TABLE2,
        }
    }
}

impl fmt::Display for Fixture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fixture::Table1 => f.write_str("Table1"),
            Fixture::Table2 => f.write_str("Table2"),
        }
    }
}

impl FromStr for Fixture {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "table1" | "profiles" => Ok(Fixture::Table1),
            "table2" | "disciplines" => Ok(Fixture::Table2),
            _ => Err(format!("unknown fixture `{s}` (expected Table1 or Table2)")),
        }
    }
}

/// Two-digit column heading to a calendar year.
fn full_year(yy: &str) -> String {
    let yy: u16 = yy.parse().expect("numeric year heading");
    let year = if yy >= 50 { 1900 + yy } else { 2000 + yy };
    year.to_string()
}

fn parse_fixed_width(text: &str) -> ContingencyTable {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().expect("fixture header");
    let years: Vec<String> = header.split_whitespace().map(full_year).collect();
    let mut labels = Vec::new();
    let mut counts = Vec::new();
    for line in lines {
        let mut fields = line.split_whitespace();
        labels.push(fields.next().expect("row label").to_owned());
        let row: Vec<u64> = fields.map(|f| f.parse().expect("numeric cell")).collect();
        assert_eq!(
            row.len(),
            years.len(),
            "fixture row `{}`",
            labels.last().unwrap()
        );
        counts.extend(row);
    }
    ContingencyTable::new(labels, years, counts).expect("fixture is rectangular")
}

pub fn load_fixture(fixture: Fixture) -> ContingencyTable {
    parse_fixed_width(fixture.source())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{DisciplineLexicon, ProfileCatalog};

    #[test]
    fn table1_shape() {
        let t = load_fixture(Fixture::Table1);
        assert_eq!((t.n_rows(), t.n_cols()), (82, 18));
        assert_eq!(t.col_labels().first().unwrap(), "1994");
        assert_eq!(t.col_labels().last().unwrap(), "2011");
        assert_eq!(t.row_labels()[0], "Adams72");
        assert_eq!(t.row(t.row_index("Duda73").unwrap())[17], 1316);
        // Verbatim cell sum. The caption's 135,088 is this plus Table 2's
        // 23,997.
        assert_eq!(t.total(), 111_091);
    }

    #[test]
    fn table2_shape_and_first_cell() {
        let t = load_fixture(Fixture::Table2);
        assert_eq!((t.n_rows(), t.n_cols()), (14, 18));
        assert_eq!(t.total(), Fixture::Table2.caption_total());
        assert_eq!(t.row_labels()[0], "Med");
        assert_eq!(t.get(0, t.col_index("1994").unwrap()), 1);
        assert_eq!(
            t.get(t.row_index("Eng").unwrap(), t.col_index("2008").unwrap()),
            753
        );
    }

    #[test]
    fn fixtures_are_stable() {
        for f in Fixture::ALL {
            assert_eq!(load_fixture(f).to_csv(), load_fixture(f).to_csv());
        }
    }

    #[test]
    fn fixture_rows_line_up_with_catalog_and_lexicon() {
        assert_eq!(
            load_fixture(Fixture::Table1).row_labels(),
            ProfileCatalog::default_catalog().ids()
        );
        let lex = DisciplineLexicon::default_lexicon().labels();
        assert_eq!(load_fixture(Fixture::Table2).row_labels(), &lex[..14]);
    }

    #[test]
    fn fixture_names() {
        assert_eq!("table2".parse::<Fixture>(), Ok(Fixture::Table2));
        assert_eq!("Table1".parse::<Fixture>(), Ok(Fixture::Table1));
        assert!("table3".parse::<Fixture>().is_err());
    }
}
