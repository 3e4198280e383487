//! Oracles and generators shared by the integration and acceptance tests.
#![allow(dead_code, clippy::needless_range_loop)]

use bibcarto::ca::{ca_fit, CaResult};
use bibcarto::record::{BibRecord, RecordFormat};
use bibcarto::search::FieldWeights;
use bibcarto::tables::ContingencyTable;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

pub const RESEARCH_ALERT: &str = include_str!("../data/research_alert.txt");
pub const PERSONAL_ALERT: &str = include_str!("../data/personal_alert.txt");

/// Random table with every row and column total positive. About a third of
/// the cells are zero.
pub fn random_table(rng: &mut StdRng, rows: usize, cols: usize) -> ContingencyTable {
    let mut counts: Vec<u64> = (0..rows * cols)
        .map(|_| {
            if rng.gen_bool(0.35) {
                0
            } else {
                rng.gen_range(1..=60)
            }
        })
        .collect();
    for i in 0..rows.max(cols) {
        let (r, c) = (i % rows, i % cols);
        counts[r * cols + c] += 1;
    }
    let rl = (0..rows).map(|i| format!("r{i}")).collect();
    let cl = (0..cols).map(|j| format!("c{j}")).collect();
    ContingencyTable::new(rl, cl, counts).unwrap()
}

/// Pearson's statistic over N, from the counts.
pub fn chi2_over_n(t: &ContingencyTable) -> f64 {
    let n = t.total() as f64;
    let (rt, ct) = (t.row_totals(), t.col_totals());
    let mut s = 0.0;
    for i in 0..t.n_rows() {
        for j in 0..t.n_cols() {
            let e = rt[i] as f64 * ct[j] as f64 / n;
            let d = t.get(i, j) as f64 - e;
            s += d * d / e;
        }
    }
    s / n
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Checks the fitted result's invariants; returns a description of each
/// violation.
pub fn ca_violations(t: &ContingencyTable, tol: f64) -> Vec<String> {
    let mut bad = Vec::new();
    let res = match ca_fit(t) {
        Ok(r) => r,
        Err(e) => return vec![format!("fit failed: {e}")],
    };
    let (fi, fj) = (t.row_masses(), t.col_masses());
    let k = res.dims();
    let n = t.total() as f64;

    for a in 0..k {
        let rb: f64 = (0..t.n_rows())
            .map(|i| fi[i] * res.row_coords[(i, a)])
            .sum();
        let cb: f64 = (0..t.n_cols())
            .map(|j| fj[j] * res.col_coords[(j, a)])
            .sum();
        if rb.abs() > tol || cb.abs() > tol {
            bad.push(format!("axis {a}: barycenters {rb:e}, {cb:e}"));
        }
    }

    let l = &res.eigenvalues;
    if l.iter().any(|&x| !(-tol..=1.0 + tol).contains(&x)) {
        bad.push(format!("eigenvalue outside [0,1]: {l:?}"));
    }
    if l.windows(2).any(|w| w[1] > w[0]) {
        bad.push(format!("eigenvalues not descending: {l:?}"));
    }
    let sum: f64 = l.iter().sum();
    let chi = chi2_over_n(t);
    if (sum - res.total_inertia).abs() > tol || (res.total_inertia - chi).abs() > tol {
        bad.push(format!(
            "sum λ {sum}, inertia {}, χ²/N {chi}",
            res.total_inertia
        ));
    }

    // Transition formulas in both directions.
    for a in 0..k {
        let s = l[a].sqrt();
        for i in 0..t.n_rows() {
            let rhs: f64 = (0..t.n_cols())
                .map(|j| t.get(i, j) as f64 / n / fi[i] * res.col_coords[(j, a)])
                .sum();
            if (s * res.row_coords[(i, a)] - rhs).abs() > tol {
                bad.push(format!("row transition fails at ({i},{a})"));
            }
        }
        for j in 0..t.n_cols() {
            let rhs: f64 = (0..t.n_rows())
                .map(|i| t.get(i, j) as f64 / n / fj[j] * res.row_coords[(i, a)])
                .sum();
            if (s * res.col_coords[(j, a)] - rhs).abs() > tol {
                bad.push(format!("column transition fails at ({j},{a})"));
            }
        }
    }

    // Active rows and columns projected as supplementary.
    for i in 0..t.n_rows() {
        let counts: Vec<f64> = t.row(i).iter().map(|&c| c as f64).collect();
        let p = res.project_supplementary_row(&counts).unwrap();
        if max_abs_diff(&p, res.row_coords.row(i)) > tol {
            bad.push(format!("row {i} as supplementary moves"));
        }
    }
    for j in 0..t.n_cols() {
        let counts: Vec<f64> = t.col(j).iter().map(|&c| c as f64).collect();
        let p = res.project_supplementary_col(&counts).unwrap();
        if max_abs_diff(&p, res.col_coords.row(j)) > tol {
            bad.push(format!("column {j} as supplementary moves"));
        }
    }

    // Scale invariance.
    let scaled = ca_fit(&t.scaled(7)).unwrap();
    if !same_fit(&res, &scaled, tol) {
        bad.push("scaling the counts changes the fit".into());
    }
    bad
}

pub fn same_fit(a: &CaResult, b: &CaResult, tol: f64) -> bool {
    a.dims() == b.dims()
        && max_abs_diff(&a.eigenvalues, &b.eigenvalues) <= tol
        && (0..a.row_coords.rows())
            .all(|i| max_abs_diff(a.row_coords.row(i), b.row_coords.row(i)) <= tol)
        && (0..a.col_coords.rows())
            .all(|j| max_abs_diff(a.col_coords.row(j), b.col_coords.row(j)) <= tol)
}

/// Ward clustering that recomputes every cluster centroid and every pair
/// criterion at each step. Returns (smaller id, larger id, height).
pub fn naive_ward(coords: &[Vec<f64>]) -> Vec<(usize, usize, f64)> {
    let n = coords.len();
    let mut clusters: Vec<(usize, Vec<usize>)> = (0..n).map(|i| (i, vec![i])).collect();
    let centroid = |members: &[usize]| -> Vec<f64> {
        let d = coords[0].len();
        let mut c = vec![0.0; d];
        for &m in members {
            for (x, y) in c.iter_mut().zip(&coords[m]) {
                *x += y;
            }
        }
        c.iter().map(|x| x / members.len() as f64).collect()
    };
    let mut merges = Vec::new();
    for step in 0..n - 1 {
        let mut best: Option<(f64, (usize, usize), usize, usize)> = None;
        for p in 0..clusters.len() {
            for q in p + 1..clusters.len() {
                let (ca, cb) = (centroid(&clusters[p].1), centroid(&clusters[q].1));
                let (ma, mb) = (clusters[p].1.len() as f64, clusters[q].1.len() as f64);
                let d2: f64 = ca.iter().zip(&cb).map(|(x, y)| (x - y).powi(2)).sum();
                let h = ma * mb / (ma + mb) * d2;
                let key = (
                    clusters[p].0.min(clusters[q].0),
                    clusters[p].0.max(clusters[q].0),
                );
                let better = match &best {
                    None => true,
                    Some((bh, bk, _, _)) => h < *bh || (h == *bh && key < *bk),
                };
                if better {
                    best = Some((h, key, p, q));
                }
            }
        }
        let (h, key, p, q) = best.unwrap();
        let mut members = clusters[p].1.clone();
        members.extend(clusters[q].1.iter().copied());
        clusters.remove(q);
        clusters[p] = (n + step, members);
        merges.push((key.0, key.1, h));
    }
    merges
}

pub fn random_points(rng: &mut StdRng, n: usize, d: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..d).map(|_| rng.gen_range(-5.0..5.0)).collect())
        .collect()
}

const WORDS: [&str; 24] = [
    "cluster",
    "analysis",
    "network",
    "computational",
    "neural",
    "density",
    "kernel",
    "estimation",
    "spatial",
    "ward",
    "hierarchical",
    "pattern",
    "recognition",
    "bayesian",
    "mixture",
    "model",
    "forest",
    "classification",
    "correspondence",
    "inertia",
    "graph",
    "tree",
    "species",
    "image",
];
const AUTHORS: [&str; 10] = [
    "ARABIE P",
    "HUBERT L",
    "BREIMAN L",
    "RIPLEY BD",
    "WARD JH",
    "GORDON AD",
    "JAIN AK",
    "DUDA RO",
    "EVERITT B",
    "LEGENDRE P",
];

fn words(rng: &mut StdRng, lo: usize, hi: usize) -> String {
    let k = rng.gen_range(lo..=hi);
    (0..k)
        .map(|_| *WORDS.choose(rng).unwrap())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Records drawn from a small vocabulary so that queries hit often.
pub fn synthetic_corpus(rng: &mut StdRng, n: usize) -> Vec<BibRecord> {
    (0..n)
        .map(|_| {
            let mut r = BibRecord::new(words(rng, 2, 6), RecordFormat::PersonalAlert);
            r.authors = (0..rng.gen_range(1..=3))
                .map(|_| AUTHORS.choose(rng).unwrap().to_string())
                .collect();
            r.source = format!(
                "J {} {} ({})",
                words(rng, 1, 2).to_uppercase(),
                rng.gen_range(1..40),
                rng.gen_range(1994..2012)
            );
            r.keywords = (0..rng.gen_range(0..=3))
                .map(|_| words(rng, 1, 2))
                .collect();
            r.keywords_plus = (0..rng.gen_range(0..=2))
                .map(|_| words(rng, 1, 1).to_uppercase())
                .collect();
            r.address = if rng.gen_bool(0.5) {
                "Univ Network, Dublin".into()
            } else {
                String::new()
            };
            r
        })
        .collect()
}

pub const FIELD_NAMES: [&str; 6] = [
    "title",
    "author",
    "source",
    "keywords",
    "keywords_plus",
    "address",
];

/// A query of one to three conjuncts, some bound to a field.
pub fn random_query(rng: &mut StdRng) -> String {
    let k = rng.gen_range(1..=3);
    (0..k)
        .map(|_| {
            let term = if rng.gen_bool(0.2) {
                AUTHORS
                    .choose(rng)
                    .unwrap()
                    .split(' ')
                    .next()
                    .unwrap()
                    .to_string()
            } else {
                WORDS.choose(rng).unwrap().to_string()
            };
            if rng.gen_bool(0.4) {
                format!("{}:{term}", FIELD_NAMES.choose(rng).unwrap())
            } else {
                term
            }
        })
        .collect::<Vec<_>>()
        .join(" AND ")
}

fn field_values(r: &BibRecord) -> [(&'static str, String); 6] {
    [
        ("title", r.title.clone()),
        ("author", r.authors.join(" ")),
        ("source", r.source.clone()),
        ("keywords", r.keywords.join(" ")),
        ("keywords_plus", r.keywords_plus.join(" ")),
        ("address", r.address.clone()),
    ]
}

fn weight(w: &FieldWeights, field: &str) -> f64 {
    match field {
        "title" => w.title,
        "author" => w.authors,
        "source" => w.source,
        "keywords" => w.keywords,
        "keywords_plus" => w.keywords_plus,
        _ => w.address,
    }
}

/// Count of `term` among the lowercased alphanumeric words of `text`.
pub fn occurrences(text: &str, term: &str) -> usize {
    text.split(|c: char| !c.is_ascii_alphanumeric())
        .filter(|t| t.eq_ignore_ascii_case(term))
        .count()
}

/// Scans every record for a query of the form produced by
/// [`random_query`]. Returns (id, score) best first.
pub fn linear_scan(records: &[BibRecord], query: &str, w: &FieldWeights) -> Vec<(usize, f64)> {
    let conjuncts: Vec<(Option<&str>, String)> = query
        .split(" AND ")
        .map(|c| match c.split_once(':') {
            Some((f, t)) => (Some(f), t.to_lowercase()),
            None => (None, c.to_lowercase()),
        })
        .collect();
    let mut hits = Vec::new();
    'records: for (id, r) in records.iter().enumerate() {
        let fields = field_values(r);
        let mut total = 0.0;
        for (field, term) in &conjuncts {
            let mut s = 0.0;
            for (name, text) in &fields {
                if field.is_none_or(|f| f == *name) {
                    s += weight(w, name) * occurrences(text, term) as f64;
                }
            }
            if s == 0.0 {
                continue 'records;
            }
            total += s;
        }
        hits.push((id, total));
    }
    hits.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    hits
}
