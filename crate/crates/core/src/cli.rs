//! Command-line front end: `parse`, `tables`, `analyze` and `search`.
//!
//! Exit codes: 0 on success, 1 on a data error, 2 on a usage error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::ca::{ca_fit, CaError, CaResult};
use crate::catalog::{
    match_profiles, tag_disciplines, ConfigError, DisciplineLexicon, ProfileCatalog,
};
use crate::config::{ConfigFileError, RunConfig};
use crate::fixtures::{load_fixture, Fixture};
use crate::record::{decode_bytes, parse_lenient, BibRecord, ParseError, RecordFormat};
use crate::search::{build_index_with, parse_query, Index, SearchError, SearchPage};
use crate::tables::{build_table, filter_records, ContingencyTable, TableError};
use crate::ward::{embed_for_clustering, ward_hac, Partition, PointSet, WardError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DATA: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: ParseError },
    #[error(transparent)]
    Config(#[from] ConfigFileError),
    #[error("{path}: {source}")]
    Catalog { path: PathBuf, source: ConfigError },
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    Ca(#[from] CaError),
    #[error(transparent)]
    Ward(#[from] WardError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error("supplementary table has columns {got:?}, the fitted table has {expected:?}")]
    SupplementaryColumns {
        expected: Vec<String>,
        got: Vec<String>,
    },
    #[error("no input: give a fixture, a table or record files")]
    NoInput,
    #[error("{0} parse error(s)")]
    ParseFailures(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::NoInput => EXIT_USAGE,
            CliError::Search(
                SearchError::EmptyQuery | SearchError::EmptyTerm(_) | SearchError::UnknownField(_),
            ) => EXIT_USAGE,
            _ => EXIT_DATA,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_owned(),
        source,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "bibcarto",
    version,
    about = "Map a research field from citation-alert records"
)]
pub struct Cli {
    /// TOML run configuration (defaults to $BIBCARTO_CONFIG)
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse alert files and print one JSON record per line
    Parse(ParseArgs),
    /// Cross-tabulate records (or a built-in table) by year
    Tables(TablesArgs),
    /// Correspondence analysis, Ward clustering and export
    Analyze(AnalyzeArgs),
    /// Query records, or list records similar to one
    Search(SearchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableKind {
    Profiles,
    Disciplines,
}

#[derive(Debug, Args)]
pub struct ParseArgs {
    pub files: Vec<PathBuf>,
    /// research or personal; sniffed per file when absent
    #[arg(long)]
    pub format: Option<RecordFormat>,
    /// Skip malformed records instead of failing
    #[arg(long)]
    pub lenient: bool,
}

#[derive(Debug, Args)]
pub struct RecordArgs {
    /// Alert files
    pub files: Vec<PathBuf>,
    #[arg(long)]
    pub format: Option<RecordFormat>,
    /// Which table to build from records
    #[arg(long, value_enum, default_value = "disciplines")]
    pub kind: TableKind,
    /// Year range, e.g. 1994-2011
    #[arg(long, value_parser = parse_years)]
    pub years: Option<(u16, u16)>,
}

fn parse_years(s: &str) -> Result<(u16, u16), String> {
    let (a, b) = s.split_once('-').ok_or("expected FIRST-LAST")?;
    let a: u16 = a.trim().parse().map_err(|e| format!("{e}"))?;
    let b: u16 = b.trim().parse().map_err(|e| format!("{e}"))?;
    if a > b {
        return Err(format!("empty year range {a}-{b}"));
    }
    Ok((a, b))
}

#[derive(Debug, Args)]
pub struct TablesArgs {
    #[command(flatten)]
    pub records: RecordArgs,
    /// Print a built-in table (Table1 or Table2) instead
    #[arg(long, conflicts_with = "files")]
    pub fixture: Option<Fixture>,
    /// Aligned text instead of CSV
    #[arg(long)]
    pub text: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub records: RecordArgs,
    /// Built-in active table (Table1 or Table2)
    #[arg(long, conflicts_with_all = ["files", "table"])]
    pub fixture: Option<Fixture>,
    /// Active table as CSV
    #[arg(long, conflicts_with = "files")]
    pub table: Option<PathBuf>,
    /// Rows projected as supplementary points: a fixture name or a CSV path
    #[arg(long)]
    pub supplementary: Option<String>,
    /// Number of clusters in the exported partition
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub k: Option<u32>,
    /// Axes written to coordinates.csv
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub axes: Option<u32>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Alert files to index
    #[arg(required = true)]
    pub files: Vec<PathBuf>,
    #[arg(long)]
    pub format: Option<RecordFormat>,
    /// e.g. "computational AND network" or "author:Arabie"
    #[arg(long, short, conflicts_with = "mlt")]
    pub query: Option<String>,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub page: u32,
    /// Record id (0-based, in input order) to find similar records for
    #[arg(long)]
    pub mlt: Option<usize>,
    /// Read queries from standard input, one per line; `n` shows the next
    /// page, `q` or end of input quits
    #[arg(long, short, conflicts_with_all = ["query", "mlt"])]
    pub interactive: bool,
}

/// Where a contingency table comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum TableSource {
    Fixture(Fixture),
    Csv(PathBuf),
    Records {
        files: Vec<PathBuf>,
        kind: TableKind,
    },
}

impl TableSource {
    fn from_name(s: &str) -> Self {
        match s.parse::<Fixture>() {
            Ok(f) => TableSource::Fixture(f),
            Err(_) => TableSource::Csv(PathBuf::from(s)),
        }
    }
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read(path)
        .map(|b| decode_bytes(&b))
        .map_err(io_err(path))
}

/// Parses every file strictly, in order.
pub fn load_records(
    files: &[PathBuf],
    format: Option<RecordFormat>,
) -> Result<Vec<BibRecord>, CliError> {
    let mut records = Vec::new();
    for path in files {
        let report = parse_lenient(&read_text(path)?, format);
        if let Some(source) = report.errors.into_iter().next() {
            return Err(CliError::Parse {
                path: path.clone(),
                source,
            });
        }
        records.extend(report.records);
    }
    Ok(records)
}

fn load_catalog(config: &RunConfig) -> Result<ProfileCatalog, CliError> {
    match &config.catalog {
        None => Ok(ProfileCatalog::default_catalog()),
        Some(p) => ProfileCatalog::parse(&read_text(p)?).map_err(|source| CliError::Catalog {
            path: p.clone(),
            source,
        }),
    }
}

fn load_lexicon(config: &RunConfig) -> Result<DisciplineLexicon, CliError> {
    match &config.lexicon {
        None => Ok(DisciplineLexicon::default_lexicon()),
        Some(p) => DisciplineLexicon::parse(&read_text(p)?).map_err(|source| CliError::Catalog {
            path: p.clone(),
            source,
        }),
    }
}

/// A table with notes about records or labels left out of it.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedTable {
    pub table: ContingencyTable,
    pub notes: Vec<String>,
}

pub fn load_table(source: &TableSource, config: &RunConfig) -> Result<LoadedTable, CliError> {
    match source {
        TableSource::Fixture(f) => Ok(LoadedTable {
            table: load_fixture(*f),
            notes: Vec::new(),
        }),
        TableSource::Csv(p) => Ok(LoadedTable {
            table: ContingencyTable::from_csv(&read_text(p)?)?,
            notes: Vec::new(),
        }),
        TableSource::Records { files, kind } => {
            let records = load_records(files, config.record_format())?;
            let (kept, excluded) = filter_records(records, &config.exclusions);
            let build = match kind {
                TableKind::Profiles => {
                    let catalog = load_catalog(config)?;
                    build_table(
                        &kept,
                        |r| match_profiles(r, &catalog),
                        &catalog.ids(),
                        config.year_range(),
                    )?
                }
                TableKind::Disciplines => {
                    let lexicon = load_lexicon(config)?;
                    build_table(
                        &kept,
                        |r| tag_disciplines(r, &lexicon),
                        &lexicon.labels(),
                        config.year_range(),
                    )?
                }
            };
            let mut notes = Vec::new();
            if !excluded.is_empty() {
                notes.push(format!("{} record(s) excluded by title", excluded.len()));
            }
            if build.skipped > 0 {
                notes.push(format!(
                    "{} record(s) without a year in range",
                    build.skipped
                ));
            }
            Ok(LoadedTable {
                table: build.table,
                notes,
            })
        }
    }
}

/// Files written by [`cmd_analyze`] and a short report.
#[derive(Debug, Clone)]
pub struct AnalyzeOutput {
    pub result: CaResult,
    pub points: PointSet,
    pub partition: Partition,
    pub files: Vec<PathBuf>,
    pub report: String,
}

pub const ANALYZE_FILES: [&str; 4] = [
    "coordinates.csv",
    "inertia.csv",
    "dendrogram.nwk",
    "partition.csv",
];

/// CSV `label,kind,axis1..axisK` over all points.
pub fn coordinates_csv(points: &PointSet, axes: usize) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["label".to_string(), "kind".to_string()];
    header.extend((1..=axes).map(|k| format!("axis{k}")));
    w.write_record(&header).expect("in-memory write");
    for ((label, kind), coords) in points.labels.iter().zip(&points.kinds).zip(&points.coords) {
        let mut row = vec![label.clone(), kind.to_string()];
        row.extend(coords.iter().take(axes).map(|x| x.to_string()));
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

/// Fits the active table, projects supplementary rows, clusters all points
/// and writes the four output files to `config.out_dir`.
pub fn cmd_analyze(
    source: &TableSource,
    supplementary: Option<&TableSource>,
    config: &RunConfig,
) -> Result<AnalyzeOutput, CliError> {
    let mut report = String::new();
    let active = load_table(source, config)?;
    let (table, dropped) = active.table.drop_empty();
    for note in &active.notes {
        let _ = writeln!(report, "note: {note}");
    }
    if !dropped.is_empty() {
        let _ = writeln!(
            report,
            "note: dropped empty rows/columns: {}",
            dropped.join(", ")
        );
    }
    let result = ca_fit(&table)?;

    let mut sup_points = Vec::new();
    if let Some(s) = supplementary {
        let sup = load_table(s, config)?.table;
        if sup.col_labels() != table.col_labels() {
            return Err(CliError::SupplementaryColumns {
                expected: table.col_labels().to_vec(),
                got: sup.col_labels().to_vec(),
            });
        }
        for (i, label) in sup.row_labels().iter().enumerate() {
            let counts: Vec<f64> = sup.row(i).iter().map(|&c| c as f64).collect();
            match result.project_supplementary_row(&counts) {
                Ok(coords) => sup_points.push((label.clone(), coords)),
                Err(CaError::EmptyProfile) => {
                    let _ = writeln!(report, "note: supplementary row {label} is empty, skipped");
                }
                Err(e) => return Err(e.into()),
            }
        }
    }

    let points = embed_for_clustering(&result, &sup_points)?;
    let dendrogram = ward_hac(&points)?;
    let k = config.k.min(points.len());
    let partition = dendrogram.cut(k)?;
    let axes = config.axes.unwrap_or(result.dims()).min(result.dims());

    std::fs::create_dir_all(&config.out_dir).map_err(io_err(&config.out_dir))?;
    let contents = [
        coordinates_csv(&points, axes),
        result.inertia_csv(),
        dendrogram.to_newick() + "\n",
        partition.to_csv(),
    ];
    let mut files = Vec::new();
    for (name, body) in ANALYZE_FILES.iter().zip(contents) {
        let path = config.out_dir.join(name);
        std::fs::write(&path, body).map_err(io_err(&path))?;
        files.push(path);
    }

    let inertia = result.inertia_report();
    let _ = writeln!(
        report,
        "{} rows x {} columns, {} supplementary; {} axes",
        table.n_rows(),
        table.n_cols(),
        sup_points.len(),
        result.dims()
    );
    for a in inertia.iter().take(axes.max(2).min(inertia.len())) {
        let _ = writeln!(
            report,
            "axis {}: {:.2}% (cumulative {:.2}%)",
            a.axis, a.percentage, a.cumulative
        );
    }
    for (c, members) in partition.members().iter().enumerate() {
        let _ = writeln!(report, "cluster {}: {}", c + 1, members.join(" "));
    }
    for f in &files {
        let _ = writeln!(report, "wrote {}", f.display());
    }

    Ok(AnalyzeOutput {
        result,
        points,
        partition,
        files,
        report,
    })
}

fn format_hit(index: &Index, id: usize, score: f64) -> String {
    let r = index.record(id).expect("hit ids come from the index");
    let mut out = format!("[{id}] {}  (score {score})\n", r.title);
    if !r.authors.is_empty() {
        let _ = writeln!(out, "    {}", r.authors.join("; "));
    }
    if !r.source.is_empty() {
        let _ = writeln!(out, "    {}", r.source);
    }
    out.push_str("----\n");
    out
}

pub fn format_page(index: &Index, page: &SearchPage) -> String {
    let mut out = format!(
        "{} result(s), page {} of {}\n",
        page.total_hits,
        page.page,
        page.page_count().max(1)
    );
    for h in &page.hits {
        out.push_str(&format_hit(index, h.id, h.score));
    }
    out
}

fn cmd_parse(
    args: &ParseArgs,
    config: &RunConfig,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), CliError> {
    let format = args.format.or(config.record_format());
    let files = if args.files.is_empty() {
        &config.inputs
    } else {
        &args.files
    };
    if files.is_empty() {
        return Err(CliError::NoInput);
    }
    let mut dump = String::new();
    let mut failures = 0;
    for path in files {
        let report = parse_lenient(&read_text(path)?, format);
        for e in &report.errors {
            let _ = writeln!(err, "{}: {e}", path.display());
        }
        failures += report.errors.len();
        for r in &report.records {
            dump.push_str(&r.to_json_line());
            dump.push('\n');
        }
    }
    if failures > 0 && !args.lenient {
        return Err(CliError::ParseFailures(failures));
    }
    out.write_all(dump.as_bytes())
        .map_err(io_err(Path::new("<stdout>")))
}

fn merge_record_args(args: &RecordArgs, config: &mut RunConfig) {
    if let Some(f) = args.format {
        config.format = Some(f.to_string());
    }
    if let Some(y) = args.years {
        config.years = y;
    }
}

fn record_source(args: &RecordArgs, config: &RunConfig) -> Result<TableSource, CliError> {
    let files = if args.files.is_empty() {
        config.inputs.clone()
    } else {
        args.files.clone()
    };
    if files.is_empty() {
        return Err(CliError::NoInput);
    }
    Ok(TableSource::Records {
        files,
        kind: args.kind,
    })
}

fn cmd_tables(
    args: &TablesArgs,
    mut config: RunConfig,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), CliError> {
    merge_record_args(&args.records, &mut config);
    let source = match args.fixture {
        Some(f) => TableSource::Fixture(f),
        None => record_source(&args.records, &config)?,
    };
    let loaded = load_table(&source, &config)?;
    for note in &loaded.notes {
        let _ = writeln!(err, "note: {note}");
    }
    let body = if args.text {
        loaded.table.to_text()
    } else {
        loaded.table.to_csv()
    };
    match &args.out {
        Some(p) => std::fs::write(p, body).map_err(io_err(p)),
        None => out
            .write_all(body.as_bytes())
            .map_err(io_err(Path::new("<stdout>"))),
    }
}

fn run_analyze(
    args: &AnalyzeArgs,
    mut config: RunConfig,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    merge_record_args(&args.records, &mut config);
    if let Some(k) = args.k {
        config.k = k as usize;
    }
    if let Some(a) = args.axes {
        config.axes = Some(a as usize);
    }
    if let Some(d) = &args.out_dir {
        config.out_dir = d.clone();
    }
    let source = match (&args.fixture, &args.table) {
        (Some(f), _) => TableSource::Fixture(*f),
        (None, Some(p)) => TableSource::Csv(p.clone()),
        (None, None) => record_source(&args.records, &config)?,
    };
    let supplementary = args.supplementary.as_deref().map(TableSource::from_name);
    let output = cmd_analyze(&source, supplementary.as_ref(), &config)?;
    out.write_all(output.report.as_bytes())
        .map_err(io_err(Path::new("<stdout>")))
}

fn cmd_search(
    args: &SearchArgs,
    config: &RunConfig,
    input: &mut dyn BufRead,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let records = load_records(&args.files, args.format.or(config.record_format()))?;
    let index = build_index_with(&records, config.weights.clone())?;
    let stdout = |e| CliError::Io {
        path: PathBuf::from("<stdout>"),
        source: e,
    };
    if let Some(id) = args.mlt {
        let hits = index.more_like_this(id)?;
        let mut text = format!("{} record(s) like [{id}]\n", hits.len());
        for h in hits {
            text.push_str(&format_hit(&index, h.id, h.score));
        }
        return out.write_all(text.as_bytes()).map_err(stdout);
    }
    if let Some(q) = &args.query {
        let page = index.search(&parse_query(q)?, args.page as usize)?;
        return out
            .write_all(format_page(&index, &page).as_bytes())
            .map_err(stdout);
    }
    if !args.interactive {
        return Err(CliError::Search(SearchError::EmptyQuery));
    }

    let mut current: Option<(crate::search::Query, usize)> = None;
    let mut line = String::new();
    loop {
        write!(out, "> ")
            .and_then(|_| out.flush())
            .map_err(stdout)?;
        line.clear();
        if input
            .read_line(&mut line)
            .map_err(io_err(Path::new("<stdin>")))?
            == 0
        {
            break;
        }
        let text = line.trim();
        let reply = match text {
            "" => continue,
            "q" | "quit" => break,
            "n" | "next" => match &mut current {
                Some((q, page)) => {
                    *page += 1;
                    format_page(&index, &index.search(q, *page)?)
                }
                None => "no query yet\n".to_string(),
            },
            _ => match parse_query(text) {
                Ok(q) => {
                    let reply = format_page(&index, &index.search(&q, 1)?);
                    current = Some((q, 1));
                    reply
                }
                Err(e) => format!("error: {e}\n"),
            },
        };
        out.write_all(reply.as_bytes()).map_err(stdout)?;
    }
    Ok(())
}

/// Runs the program on `args` (including the program name) and returns the
/// exit code.
pub fn run<I, T>(args: I, input: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let result = RunConfig::resolve(cli.config.as_deref())
        .map_err(CliError::from)
        .and_then(|config| match &cli.command {
            Command::Parse(a) => cmd_parse(a, &config, out, err),
            Command::Tables(a) => cmd_tables(a, config, out, err),
            Command::Analyze(a) => run_analyze(a, config, out),
            Command::Search(a) => cmd_search(a, &config, input, out),
        });
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str], stdin: &str) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(
            std::iter::once("bibcarto").chain(args.iter().copied()),
            &mut stdin.as_bytes(),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run_args(&["frobnicate"], "").0, EXIT_USAGE);
        assert_eq!(
            run_args(&["analyze", "--fixture", "Table2", "--k", "0"], "").0,
            EXIT_USAGE
        );
        assert_eq!(
            run_args(&["analyze", "--fixture", "Table9"], "").0,
            EXIT_USAGE
        );
        assert_eq!(run_args(&["parse"], "").0, EXIT_USAGE);
        let (code, out, _) = run_args(&["--help"], "");
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("analyze"));
    }

    #[test]
    fn tables_prints_fixture() {
        let (code, out, _) = run_args(&["tables", "--fixture", "table2"], "");
        assert_eq!(code, EXIT_OK);
        assert!(out.starts_with("label,1994,1995,"));
        assert!(out.contains("\nHum,"));
        assert_eq!(out.lines().count(), 15);
    }

    #[test]
    fn years_flag() {
        assert_eq!(parse_years("1994-2011"), Ok((1994, 2011)));
        assert!(parse_years("2011-1994").is_err());
        assert!(parse_years("1994").is_err());
    }

    #[test]
    fn fixture_or_path() {
        assert_eq!(
            TableSource::from_name("Table1"),
            TableSource::Fixture(Fixture::Table1)
        );
        assert_eq!(
            TableSource::from_name("sup.csv"),
            TableSource::Csv("sup.csv".into())
        );
    }
}
