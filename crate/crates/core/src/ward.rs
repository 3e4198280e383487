//! Ward minimum-variance agglomerative clustering of points in the full
//! factor space, with dendrogram cuts and export.
//!
//! Merging clusters a and b increases the within-cluster inertia by
//!
//! ```text
//! ΔI(a, b) = m_a m_b / (m_a + m_b) · ‖c_a − c_b‖²
//! ```
//!
//! and that increase is the height recorded for the merge. After a merge
//! the criterion to every other cluster k follows from the Lance–Williams
//! recurrence
//!
//! ```text
//! ΔI(a∪b, k) = ((m_a + m_k) ΔI(a, k) + (m_b + m_k) ΔI(b, k) − m_k ΔI(a, b)) / (m_a + m_b + m_k)
//! ```

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::ca::CaResult;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WardError {
    #[error("point `{label}` has {got} coordinates, expected {expected}")]
    DimensionMismatch {
        label: String,
        expected: usize,
        got: usize,
    },
    #[error("clustering needs at least two points, got {0}")]
    TooFewPoints(usize),
    #[error("point `{0}` has a non-finite coordinate")]
    NonFinite(String),
    #[error("cannot cut {n} leaves into {k} clusters")]
    BadK { k: usize, n: usize },
    #[error("unknown dendrogram format `{0}` (expected text or newick)")]
    UnknownFormat(String),
}

/// Where a point came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PointKind {
    Row,
    Col,
    Supplementary,
}

impl fmt::Display for PointKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PointKind::Row => "row",
            PointKind::Col => "col",
            PointKind::Supplementary => "sup",
        })
    }
}

/// Labelled points with masses.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    pub labels: Vec<String>,
    pub kinds: Vec<PointKind>,
    pub coords: Vec<Vec<f64>>,
    pub masses: Vec<f64>,
}

impl PointSet {
    /// Unit-mass points.
    pub fn new(labels: Vec<String>, coords: Vec<Vec<f64>>) -> Result<Self, WardError> {
        let dims = coords.first().map_or(0, Vec::len);
        for (label, c) in labels.iter().zip(&coords) {
            if c.len() != dims {
                return Err(WardError::DimensionMismatch {
                    label: label.clone(),
                    expected: dims,
                    got: c.len(),
                });
            }
        }
        assert_eq!(labels.len(), coords.len(), "one label per point");
        Ok(Self {
            kinds: vec![PointKind::Row; labels.len()],
            masses: vec![1.0; labels.len()],
            labels,
            coords,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dims(&self) -> usize {
        self.coords.first().map_or(0, Vec::len)
    }
}

/// Rows, then columns, then supplementary points of a fit, each with unit
/// mass, in all retained dimensions.
pub fn embed_for_clustering(
    result: &CaResult,
    supplementary: &[(String, Vec<f64>)],
) -> Result<PointSet, WardError> {
    let dims = result.dims();
    let mut points = PointSet {
        labels: Vec::new(),
        kinds: Vec::new(),
        coords: Vec::new(),
        masses: Vec::new(),
    };
    let mut push = |label: &str, kind: PointKind, coords: &[f64]| -> Result<(), WardError> {
        if coords.len() != dims {
            return Err(WardError::DimensionMismatch {
                label: label.to_owned(),
                expected: dims,
                got: coords.len(),
            });
        }
        points.labels.push(label.to_owned());
        points.kinds.push(kind);
        points.coords.push(coords.to_vec());
        points.masses.push(1.0);
        Ok(())
    };
    for (i, label) in result.row_labels.iter().enumerate() {
        push(label, PointKind::Row, result.row_coords.row(i))?;
    }
    for (j, label) in result.col_labels.iter().enumerate() {
        push(label, PointKind::Col, result.col_coords.row(j))?;
    }
    for (label, coords) in supplementary {
        push(label, PointKind::Supplementary, coords)?;
    }
    Ok(points)
}

/// One agglomeration step. Leaves are clusters `0..n`; the cluster formed
/// at step s is `n + s`.
#[derive(Debug, Clone, PartialEq)]
pub struct Merge {
    /// Smaller of the two cluster ids.
    pub a: usize,
    pub b: usize,
    pub height: f64,
    pub id: usize,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    pub labels: Vec<String>,
    pub merges: Vec<Merge>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub k: usize,
    pub labels: Vec<String>,
    /// Cluster of each label, 1..=k, numbered by first appearance in label
    /// order.
    pub assignment: Vec<usize>,
}

impl Partition {
    pub fn cluster_of(&self, label: &str) -> Option<usize> {
        let i = self.labels.iter().position(|l| l == label)?;
        Some(self.assignment[i])
    }

    /// Labels of each cluster, in cluster order.
    pub fn members(&self) -> Vec<Vec<String>> {
        let mut out = vec![Vec::new(); self.k];
        for (label, &c) in self.labels.iter().zip(&self.assignment) {
            out[c - 1].push(label.clone());
        }
        out
    }

    /// CSV `label,cluster`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["label", "cluster"])
            .expect("in-memory write");
        for (label, c) in self.labels.iter().zip(&self.assignment) {
            w.write_record([label.as_str(), &c.to_string()])
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
    }
}

fn ward_increase(ma: f64, ca: &[f64], mb: f64, cb: &[f64]) -> f64 {
    let d2: f64 = ca.iter().zip(cb).map(|(x, y)| (x - y) * (x - y)).sum();
    ma * mb / (ma + mb) * d2
}

/// Ward clustering by the Lance–Williams recurrence.
///
/// The pair with the smallest increase is merged; exact ties go to the
/// lexicographically least (smaller id, larger id) pair.
pub fn ward_hac(points: &PointSet) -> Result<Dendrogram, WardError> {
    let n = points.len();
    if n < 2 {
        return Err(WardError::TooFewPoints(n));
    }
    for (label, c) in points.labels.iter().zip(&points.coords) {
        if c.iter().any(|x| !x.is_finite()) {
            return Err(WardError::NonFinite(label.clone()));
        }
    }

    // Slot i holds one active cluster; `ids` maps it to its cluster id.
    let mut ids: Vec<usize> = (0..n).collect();
    let mut mass = points.masses.clone();
    let mut size = vec![1usize; n];
    let mut active = vec![true; n];
    let mut diss = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let d = ward_increase(mass[i], &points.coords[i], mass[j], &points.coords[j]);
            diss[i][j] = d;
            diss[j][i] = d;
        }
    }

    let mut merges = Vec::with_capacity(n - 1);
    for step in 0..n - 1 {
        let mut best: Option<(f64, (usize, usize), usize, usize)> = None;
        for i in 0..n {
            if !active[i] {
                continue;
            }
            for j in i + 1..n {
                if !active[j] {
                    continue;
                }
                let key = (ids[i].min(ids[j]), ids[i].max(ids[j]));
                let better = match &best {
                    None => true,
                    Some((d, k, _, _)) => diss[i][j] < *d || (diss[i][j] == *d && key < *k),
                };
                if better {
                    best = Some((diss[i][j], key, i, j));
                }
            }
        }
        let (height, (a, b), i, j) = best.expect("two active clusters remain");

        let (mi, mj) = (mass[i], mass[j]);
        for k in 0..n {
            if !active[k] || k == i || k == j {
                continue;
            }
            let mk = mass[k];
            let d =
                ((mi + mk) * diss[i][k] + (mj + mk) * diss[j][k] - mk * height) / (mi + mj + mk);
            diss[i][k] = d;
            diss[k][i] = d;
        }
        active[j] = false;
        mass[i] = mi + mj;
        size[i] += size[j];
        ids[i] = n + step;
        merges.push(Merge {
            a,
            b,
            height,
            id: n + step,
            size: size[i],
        });
    }

    Ok(Dendrogram {
        labels: points.labels.clone(),
        merges,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DendrogramFormat {
    Text,
    Newick,
}

impl FromStr for DendrogramFormat {
    type Err = WardError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "text" | "txt" => Ok(DendrogramFormat::Text),
            "newick" | "nwk" => Ok(DendrogramFormat::Newick),
            _ => Err(WardError::UnknownFormat(s.to_owned())),
        }
    }
}

fn newick_label(label: &str) -> String {
    let special = |c: char| c.is_whitespace() || "()[]':;,".contains(c);
    if label.chars().any(special) {
        format!("'{}'", label.replace('\'', "''"))
    } else {
        label.to_owned()
    }
}

impl Dendrogram {
    pub fn n_leaves(&self) -> usize {
        self.labels.len()
    }

    pub fn heights(&self) -> Vec<f64> {
        self.merges.iter().map(|m| m.height).collect()
    }

    fn merge_of(&self, id: usize) -> Option<&Merge> {
        id.checked_sub(self.n_leaves()).map(|s| &self.merges[s])
    }

    /// Undoes the last k − 1 merges.
    pub fn cut(&self, k: usize) -> Result<Partition, WardError> {
        let n = self.n_leaves();
        if k == 0 || k > n {
            return Err(WardError::BadK { k, n });
        }
        // Union-find over cluster ids, leaves and internal nodes alike.
        let mut parent: Vec<usize> = (0..n + self.merges.len()).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for m in &self.merges[..n - k] {
            let (ra, rb) = (find(&mut parent, m.a), find(&mut parent, m.b));
            parent[ra] = m.id;
            parent[rb] = m.id;
        }
        let mut number: BTreeMap<usize, usize> = BTreeMap::new();
        let assignment = (0..n)
            .map(|leaf| {
                let root = find(&mut parent, leaf);
                let next = number.len() + 1;
                *number.entry(root).or_insert(next)
            })
            .collect();
        Ok(Partition {
            k,
            labels: self.labels.clone(),
            assignment,
        })
    }

    /// Newick tree. A node sits at half its merge height, so two leaves
    /// joined at height h hang from branches of length h/2.
    pub fn to_newick(&self) -> String {
        let n = self.n_leaves();
        let depth = |id: usize| self.merge_of(id).map_or(0.0, |m| m.height / 2.0);
        let mut rendered: Vec<Option<String>> = self
            .labels
            .iter()
            .map(|l| Some(newick_label(l)))
            .chain(self.merges.iter().map(|_| None))
            .collect();
        for m in &self.merges {
            let here = m.height / 2.0;
            let a = rendered[m.a].take().expect("child rendered once");
            let b = rendered[m.b].take().expect("child rendered once");
            rendered[m.id] = Some(format!(
                "({a}:{},{b}:{})",
                here - depth(m.a),
                here - depth(m.b)
            ));
        }
        let root = if self.merges.is_empty() {
            0
        } else {
            n + self.merges.len() - 1
        };
        format!("{};", rendered[root].take().unwrap_or_default())
    }

    /// Indented tree, root first, with merge heights on internal nodes.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let root = self.n_leaves() + self.merges.len() - 1;
        self.render_text(root, 0, &mut out);
        out
    }

    fn render_text(&self, id: usize, indent: usize, out: &mut String) {
        match self.merge_of(id) {
            Some(m) => {
                let _ = writeln!(
                    out,
                    "{:indent$}+ [{}] height={} size={}",
                    "", id, m.height, m.size
                );
                self.render_text(m.a, indent + 2, out);
                self.render_text(m.b, indent + 2, out);
            }
            None => {
                let _ = writeln!(out, "{:indent$}- {}", "", self.labels[id]);
            }
        }
    }

    pub fn export(&self, format: DendrogramFormat) -> String {
        match format {
            DendrogramFormat::Text => self.to_text(),
            DendrogramFormat::Newick => self.to_newick(),
        }
    }
}

/// Renders a dendrogram in a format named by string (`text` or `newick`).
pub fn export_dendrogram(dendrogram: &Dendrogram, format: &str) -> Result<String, WardError> {
    Ok(dendrogram.export(format.parse()?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn points(labels: &[&str], coords: &[&[f64]]) -> PointSet {
        PointSet::new(
            labels.iter().map(|s| s.to_string()).collect(),
            coords.iter().map(|c| c.to_vec()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn two_points_merge_at_half_squared_distance() {
        let d = ward_hac(&points(&["A", "B"], &[&[0.0, 0.0], &[3.0, 4.0]])).unwrap();
        assert_eq!(d.merges.len(), 1);
        assert_eq!(d.merges[0].height, 12.5);
        assert_eq!(d.to_newick(), "(A:6.25,B:6.25);");
    }

    #[test]
    fn three_collinear_points() {
        let d = ward_hac(&points(&["A", "B", "C"], &[&[0.0], &[1.0], &[10.0]])).unwrap();
        assert_eq!((d.merges[0].a, d.merges[0].b), (0, 1));
        assert!((d.merges[0].height - 0.5).abs() < 1e-12);
        // 2·1/3 · (10 − 0.5)²
        let expected = 2.0 / 3.0 * 9.5f64.powi(2);
        assert!((d.merges[1].height - expected).abs() < 1e-9);
        assert!((expected - 60.166_666_666_666_67).abs() < 1e-9);
        assert_eq!((d.merges[1].a, d.merges[1].b, d.merges[1].size), (2, 3, 3));
        let nwk = d.to_newick();
        assert!(nwk.starts_with("(C:30.0833333333"), "{nwk}");
        assert!(nwk.contains("(A:0.25,B:0.25):29.8333333333"), "{nwk}");
    }

    #[test]
    fn cuts() {
        let d = ward_hac(&points(&["A", "B", "C"], &[&[0.0], &[1.0], &[10.0]])).unwrap();
        assert_eq!(d.cut(1).unwrap().assignment, [1, 1, 1]);
        assert_eq!(d.cut(2).unwrap().assignment, [1, 1, 2]);
        assert_eq!(d.cut(3).unwrap().assignment, [1, 2, 3]);
        assert_eq!(d.cut(0), Err(WardError::BadK { k: 0, n: 3 }));
        assert_eq!(d.cut(4), Err(WardError::BadK { k: 4, n: 3 }));
        assert_eq!(
            d.cut(2).unwrap().members(),
            [
                vec!["A".to_string(), "B".to_string()],
                vec!["C".to_string()]
            ]
        );
        assert_eq!(d.cut(2).unwrap().to_csv(), "label,cluster\nA,1\nB,1\nC,2\n");
    }

    #[test]
    fn duplicates_merge_first_at_zero() {
        let d = ward_hac(&points(&["A", "B", "C"], &[&[5.0], &[0.0], &[5.0]])).unwrap();
        assert_eq!(
            (d.merges[0].a, d.merges[0].b, d.merges[0].height),
            (0, 2, 0.0)
        );
    }

    #[test]
    fn ties_go_to_the_least_id_pair() {
        let d = ward_hac(&points(
            &["A", "B", "C", "D"],
            &[&[0.0], &[1.0], &[5.0], &[6.0]],
        ))
        .unwrap();
        assert_eq!((d.merges[0].a, d.merges[0].b), (0, 1));
        assert_eq!((d.merges[1].a, d.merges[1].b), (2, 3));
    }

    #[test]
    fn errors() {
        assert_eq!(
            ward_hac(&points(&["A"], &[&[0.0]])),
            Err(WardError::TooFewPoints(1))
        );
        assert!(matches!(
            PointSet::new(
                vec!["A".into(), "B".into()],
                vec![vec![0.0], vec![1.0, 2.0]]
            ),
            Err(WardError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            ward_hac(&points(&["A", "B"], &[&[f64::NAN], &[0.0]])),
            Err(WardError::NonFinite(_))
        ));
    }

    #[test]
    fn formats() {
        let d = ward_hac(&points(&["Carroll70,80", "B"], &[&[0.0], &[2.0]])).unwrap();
        assert_eq!(
            export_dendrogram(&d, "newick").unwrap(),
            "('Carroll70,80':1,B:1);"
        );
        let text = export_dendrogram(&d, "text").unwrap();
        assert_eq!(text, "+ [2] height=2 size=2\n  - Carroll70,80\n  - B\n");
        assert_eq!(
            export_dendrogram(&d, ""),
            Err(WardError::UnknownFormat(String::new()))
        );
    }
}
