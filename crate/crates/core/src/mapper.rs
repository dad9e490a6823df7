//! Mapper: cover a lens, cluster each preimage, join clusters that share
//! points.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::clustering::{agglomerate, cut, groups, ClusterError, CutRule};
use crate::embed::Embedding;
use crate::metricspace::{cosine_from_dot, DistanceMatrix, Metric, PointCloud};
use crate::svg::{self, escape, SvgCanvas};
use crate::textpipeline::DocumentTermMatrix;

#[derive(Debug, Error, PartialEq)]
pub enum MapperError {
    #[error("resolution must be at least 1")]
    InvalidResolution,
    #[error("overlap {0} is outside [0, 1)")]
    InvalidOverlap(f64),
    #[error("lens must be 1- or 2-dimensional, got {0}")]
    LensDimension(usize),
    #[error("lens has {lens} rows but the data has {data}")]
    RowCount { lens: usize, data: usize },
    #[error("lens value {value} in row {row} is not finite")]
    NonFinite { row: usize, value: f64 },
    #[error("{labels} labels for {rows} rows")]
    LabelCount { labels: usize, rows: usize },
    #[error("majority threshold {0} must lie in (0.5, 1]")]
    InvalidThreshold(f64),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
}

/// Overlapping intervals covering one lens axis.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisCover {
    min: f64,
    max: f64,
    resolution: usize,
    overlap: f64,
}

impl AxisCover {
    pub fn new(min: f64, max: f64, resolution: usize, overlap: f64) -> Result<Self, MapperError> {
        if resolution == 0 {
            return Err(MapperError::InvalidResolution);
        }
        if !(0.0..1.0).contains(&overlap) {
            return Err(MapperError::InvalidOverlap(overlap));
        }
        Ok(AxisCover {
            min,
            max,
            resolution,
            overlap,
        })
    }

    fn degenerate(&self) -> bool {
        self.max <= self.min
    }

    /// Number of intervals; a zero-width range gets a single one.
    pub fn len(&self) -> usize {
        if self.degenerate() {
            1
        } else {
            self.resolution
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn width(&self) -> f64 {
        (self.max - self.min) / self.resolution as f64
    }

    fn edge(&self, i: usize) -> f64 {
        if i == self.resolution {
            self.max
        } else {
            self.min + i as f64 * self.width()
        }
    }

    /// Bounds of interval `i`.
    pub fn interval(&self, i: usize) -> (f64, f64) {
        if self.degenerate() {
            return (self.min, self.max);
        }
        let pad = self.overlap * self.width() / 2.0;
        (self.edge(i) - pad, self.edge(i + 1) + pad)
    }

    /// Whether `x` falls in interval `i`. Without overlap the intervals are
    /// half-open, the last one closed.
    pub fn contains(&self, i: usize, x: f64) -> bool {
        if self.degenerate() {
            return true;
        }
        let (lo, hi) = self.interval(i);
        if self.overlap == 0.0 && i + 1 < self.resolution {
            lo <= x && x < hi
        } else {
            lo <= x && x <= hi
        }
    }
}

/// A rectangular bin: one interval per lens axis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bin {
    pub id: usize,
    /// Interval index along each axis.
    pub index: Vec<usize>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// Product of per-axis covers; bins are numbered with the last axis
/// varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Cover {
    axes: Vec<AxisCover>,
    bins: Vec<Bin>,
}

impl Cover {
    pub fn from_axes(axes: Vec<AxisCover>) -> Result<Self, MapperError> {
        if axes.is_empty() || axes.len() > 2 {
            return Err(MapperError::LensDimension(axes.len()));
        }
        let mut indices: Vec<Vec<usize>> = vec![Vec::new()];
        for ax in &axes {
            indices = indices
                .into_iter()
                .flat_map(|prefix| {
                    (0..ax.len()).map(move |i| {
                        let mut p = prefix.clone();
                        p.push(i);
                        p
                    })
                })
                .collect();
        }
        let bins = indices
            .into_iter()
            .enumerate()
            .map(|(id, index)| {
                let (lower, upper) = index.iter().zip(&axes).map(|(&i, ax)| ax.interval(i)).unzip();
                Bin {
                    id,
                    index,
                    lower,
                    upper,
                }
            })
            .collect();
        Ok(Cover { axes, bins })
    }

    pub fn axes(&self) -> &[AxisCover] {
        &self.axes
    }

    pub fn bins(&self) -> &[Bin] {
        &self.bins
    }

    pub fn dims(&self) -> usize {
        self.axes.len()
    }

    pub fn contains(&self, bin: usize, point: &[f64]) -> bool {
        self.bins[bin]
            .index
            .iter()
            .zip(&self.axes)
            .zip(point)
            .all(|((&i, ax), &x)| ax.contains(i, x))
    }

    /// Ids of every bin containing `point`, ascending.
    pub fn bins_of(&self, point: &[f64]) -> Vec<usize> {
        let per_axis: Vec<Vec<usize>> = self
            .axes
            .iter()
            .zip(point)
            .map(|(ax, &x)| (0..ax.len()).filter(|&i| ax.contains(i, x)).collect())
            .collect();
        let mut out = vec![0usize];
        for (ax, hits) in self.axes.iter().zip(&per_axis) {
            out = out
                .into_iter()
                .flat_map(|base| hits.iter().map(move |&i| base * ax.len() + i))
                .collect();
        }
        out
    }
}

/// Covers the range of every lens axis with `resolution` intervals
/// overlapping by the fraction `overlap` of their base width.
pub fn build_cover(lens: &Embedding, resolution: usize, overlap: f64) -> Result<Cover, MapperError> {
    let dim = lens.dim();
    if dim == 0 || dim > 2 {
        return Err(MapperError::LensDimension(dim));
    }
    check_finite(lens)?;
    let axes = (0..dim)
        .map(|a| {
            let col = lens.column(a);
            let min = col.iter().copied().fold(f64::INFINITY, f64::min);
            let max = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            AxisCover::new(min, max, resolution, overlap)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Cover::from_axes(axes)
}

fn check_finite(lens: &Embedding) -> Result<(), MapperError> {
    for (row, r) in lens.coords().iter().enumerate() {
        if let Some(&value) = r.iter().find(|v| !v.is_finite()) {
            return Err(MapperError::NonFinite { row, value });
        }
    }
    Ok(())
}

/// Distances among any subset of the data rows.
pub trait MetricSource: Sync {
    fn n_points(&self) -> usize;
    fn distances(&self, rows: &[usize]) -> DistanceMatrix;
}

impl MetricSource for DistanceMatrix {
    fn n_points(&self) -> usize {
        self.len()
    }

    fn distances(&self, rows: &[usize]) -> DistanceMatrix {
        self.submatrix(rows)
    }
}

// zero vectors sit at cosine distance 1 from everything else
fn cosine_or_orthogonal(dot: f64, nu: f64, nv: f64) -> f64 {
    if nu == 0.0 || nv == 0.0 {
        1.0
    } else {
        cosine_from_dot(dot, nu, nv)
    }
}

/// A point cloud with a metric, distances computed on demand.
pub struct CloudSource<'a> {
    pub cloud: &'a PointCloud,
    pub metric: Metric,
}

impl MetricSource for CloudSource<'_> {
    fn n_points(&self) -> usize {
        self.cloud.len()
    }

    fn distances(&self, rows: &[usize]) -> DistanceMatrix {
        let pts: Vec<&[f64]> = rows.iter().map(|&r| self.cloud.point(r)).collect();
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        match self.metric {
            Metric::Euclidean => DistanceMatrix::from_fn(rows.len(), self.metric, |i, j| {
                pts[i].iter().zip(pts[j]).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
            }),
            Metric::Cosine => {
                let norms: Vec<f64> = pts.iter().map(|p| dot(p, p).sqrt()).collect();
                DistanceMatrix::from_fn(rows.len(), self.metric, |i, j| {
                    cosine_or_orthogonal(dot(pts[i], pts[j]), norms[i], norms[j])
                })
            }
        }
    }
}

/// Rows of a document-term matrix with a metric.
pub struct TermSource<'a> {
    pub dtm: &'a DocumentTermMatrix,
    pub metric: Metric,
}

impl MetricSource for TermSource<'_> {
    fn n_points(&self) -> usize {
        self.dtm.n_docs()
    }

    fn distances(&self, rows: &[usize]) -> DistanceMatrix {
        let norms: Vec<f64> = rows.iter().map(|&r| self.dtm.row_norm(r)).collect();
        DistanceMatrix::from_fn(rows.len(), self.metric, |i, j| {
            let dot = self.dtm.row_dot(rows[i], rows[j]);
            match self.metric {
                Metric::Euclidean => (norms[i] * norms[i] + norms[j] * norms[j] - 2.0 * dot).max(0.0).sqrt(),
                Metric::Cosine => cosine_or_orthogonal(dot, norms[i], norms[j]),
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapperNode {
    pub id: usize,
    pub bin: usize,
    /// Row indices, ascending.
    pub members: Vec<usize>,
    /// Label counts; empty when the graph was built without labels.
    pub composition: BTreeMap<String, usize>,
}

impl MapperNode {
    pub fn size(&self) -> usize {
        self.members.len()
    }

    /// Most frequent label, the smallest one on ties.
    pub fn majority(&self) -> Option<(&str, usize)> {
        let mut best: Option<(&str, usize)> = None;
        for (l, &c) in &self.composition {
            if best.map_or(true, |(_, b)| c > b) {
                best = Some((l, c));
            }
        }
        best
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MapperEdge {
    pub source: usize,
    pub target: usize,
    pub shared: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapperGraph {
    nodes: Vec<MapperNode>,
    edges: Vec<MapperEdge>,
    ids: Vec<String>,
}

#[derive(Serialize)]
struct NodeJson<'a> {
    id: usize,
    bin: usize,
    size: usize,
    members: Vec<&'a str>,
    composition: &'a BTreeMap<String, usize>,
}

#[derive(Serialize)]
struct GraphJson<'a> {
    nodes: Vec<NodeJson<'a>>,
    edges: &'a [MapperEdge],
}

impl MapperGraph {
    pub fn nodes(&self) -> &[MapperNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[MapperEdge] {
        &self.edges
    }

    /// External ids of the data rows.
    pub fn row_ids(&self) -> &[String] {
        &self.ids
    }

    /// Connected-component label of every node.
    pub fn component_labels(&self) -> Vec<usize> {
        let mut parent: Vec<usize> = (0..self.nodes.len()).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for e in &self.edges {
            let (a, b) = (find(&mut parent, e.source), find(&mut parent, e.target));
            parent[a.max(b)] = a.min(b);
        }
        let mut seen = HashMap::new();
        (0..self.nodes.len())
            .map(|i| {
                let r = find(&mut parent, i);
                let next = seen.len();
                *seen.entry(r).or_insert(next)
            })
            .collect()
    }

    pub fn component_count(&self) -> usize {
        self.component_labels().into_iter().max().map_or(0, |m| m + 1)
    }

    /// `edges - nodes + components`, the number of independent cycles.
    pub fn cycle_rank(&self) -> usize {
        self.edges.len() + self.component_count() - self.nodes.len()
    }

    pub fn to_json(&self) -> String {
        let doc = GraphJson {
            nodes: self
                .nodes
                .iter()
                .map(|n| NodeJson {
                    id: n.id,
                    bin: n.bin,
                    size: n.size(),
                    members: n.members.iter().map(|&m| self.ids[m].as_str()).collect(),
                    composition: &n.composition,
                })
                .collect(),
            edges: &self.edges,
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("graph serializes");
        s.push('\n');
        s
    }

    fn label_colors(&self) -> BTreeMap<&str, &'static str> {
        let labels: std::collections::BTreeSet<&str> =
            self.nodes.iter().flat_map(|n| n.composition.keys().map(String::as_str)).collect();
        labels.into_iter().enumerate().map(|(i, l)| (l, svg::palette(i))).collect()
    }

    fn color(&self, colors: &BTreeMap<&str, &'static str>, n: &MapperNode) -> &'static str {
        n.majority().map_or("#999999", |(l, _)| colors[l])
    }

    /// Graphviz source: node width grows with member count, fill colour
    /// follows the majority label.
    pub fn to_dot(&self) -> String {
        let colors = self.label_colors();
        let max = self.nodes.iter().map(MapperNode::size).max().unwrap_or(1) as f64;
        let mut out = String::from("graph mapper {\n  node [shape=circle, style=filled, fontsize=8];\n");
        for n in &self.nodes {
            let width = 0.2 + 0.8 * (n.size() as f64 / max).sqrt();
            let _ = writeln!(
                out,
                "  n{} [label=\"{}\", width={:.3}, fillcolor=\"{}\", tooltip=\"bin {} size {}\"];",
                n.id,
                n.size(),
                width,
                self.color(&colors, n),
                n.bin,
                n.size()
            );
        }
        for e in &self.edges {
            let _ = writeln!(out, "  n{} -- n{} [penwidth={:.2}];", e.source, e.target, 1.0 + (e.shared as f64).ln());
        }
        out.push_str("}\n");
        out
    }

    /// Node positions from a deterministic force-directed layout, in the
    /// unit square.
    pub fn layout(&self) -> Vec<(f64, f64)> {
        let n = self.nodes.len();
        if n == 0 {
            return Vec::new();
        }
        let mut pos: Vec<(f64, f64)> = (0..n)
            .map(|i| {
                let a = std::f64::consts::TAU * i as f64 / n as f64;
                (0.5 + 0.4 * a.cos(), 0.5 + 0.4 * a.sin())
            })
            .collect();
        let k = (1.0 / n as f64).sqrt();
        let iterations = 300;
        for it in 0..iterations {
            let temp = 0.1 * (1.0 - it as f64 / iterations as f64);
            let mut disp = vec![(0.0, 0.0); n];
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        let (dx, dy) = (pos[i].0 - pos[j].0, pos[i].1 - pos[j].1);
                        let d = (dx * dx + dy * dy).sqrt().max(1e-6);
                        let f = k * k / d;
                        disp[i].0 += dx / d * f;
                        disp[i].1 += dy / d * f;
                    }
                }
                // mild pull to the centre keeps components on the canvas
                disp[i].0 += (0.5 - pos[i].0) * k;
                disp[i].1 += (0.5 - pos[i].1) * k;
            }
            for e in &self.edges {
                let (a, b) = (e.source, e.target);
                let (dx, dy) = (pos[a].0 - pos[b].0, pos[a].1 - pos[b].1);
                let d = (dx * dx + dy * dy).sqrt().max(1e-6);
                let f = d * d / k;
                disp[a].0 -= dx / d * f;
                disp[a].1 -= dy / d * f;
                disp[b].0 += dx / d * f;
                disp[b].1 += dy / d * f;
            }
            for i in 0..n {
                let len = (disp[i].0 * disp[i].0 + disp[i].1 * disp[i].1).sqrt();
                if len > 0.0 {
                    let step = len.min(temp);
                    pos[i].0 += disp[i].0 / len * step;
                    pos[i].1 += disp[i].1 / len * step;
                }
            }
        }
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in &pos {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        let sx = if x1 > x0 { x1 - x0 } else { 1.0 };
        let sy = if y1 > y0 { y1 - y0 } else { 1.0 };
        pos.into_iter().map(|(x, y)| ((x - x0) / sx, (y - y0) / sy)).collect()
    }

    pub fn to_svg(&self) -> String {
        let (w, h, margin) = (800.0, 600.0, 40.0);
        let mut canvas = SvgCanvas::new(w, h);
        let pos: Vec<(f64, f64)> = self
            .layout()
            .into_iter()
            .map(|(x, y)| (margin + x * (w - 2.0 * margin), margin + y * (h - 2.0 * margin)))
            .collect();
        for e in &self.edges {
            let (a, b) = (pos[e.source], pos[e.target]);
            canvas.line(a.0, a.1, b.0, b.1, "#888888", 1.0);
        }
        let colors = self.label_colors();
        let max = self.nodes.iter().map(MapperNode::size).max().unwrap_or(1) as f64;
        for (n, &(x, y)) in self.nodes.iter().zip(&pos) {
            let r = 4.0 + 14.0 * (n.size() as f64 / max).sqrt();
            let comp: Vec<String> = n.composition.iter().map(|(l, c)| format!("{l}: {c}")).collect();
            let title = format!("node {} (bin {}, size {}) {}", n.id, n.bin, n.size(), comp.join(", "));
            canvas.circle(x, y, r, self.color(&colors, n), &title);
        }
        for (i, (l, c)) in colors.iter().enumerate() {
            canvas.text(10.0, 16.0 + 14.0 * i as f64, l, 12.0, c);
        }
        canvas.finish()
    }

    /// Standalone page with the graph drawing, node table and optional
    /// per-node term lists.
    pub fn to_html(&self, title: &str, terms: Option<&[Vec<(String, f64)>]>) -> String {
        let mut out = String::new();
        let _ = write!(
            out,
            "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n<title>{t}</title>\n<style>body{{font-family:sans-serif}}table{{border-collapse:collapse}}td,th{{border:1px solid #ccc;padding:2px 6px}}</style>\n</head>\n<body>\n<h1>{t}</h1>\n<p>{} nodes, {} edges, {} components, cycle rank {}</p>\n",
            self.nodes.len(),
            self.edges.len(),
            self.component_count(),
            self.cycle_rank(),
            t = escape(title)
        );
        out.push_str(&self.to_svg());
        out.push_str("<table>\n<tr><th>node</th><th>bin</th><th>size</th><th>composition</th><th>terms</th></tr>\n");
        for n in &self.nodes {
            let comp: Vec<String> = n.composition.iter().map(|(l, c)| format!("{}: {c}", escape(l))).collect();
            let t = terms
                .and_then(|t| t.get(n.id))
                .map(|ts| ts.iter().map(|(w, _)| escape(w)).collect::<Vec<_>>().join(" "))
                .unwrap_or_default();
            let _ = writeln!(
                out,
                "<tr><td>{}</td><td>{}</td><td>{}</td><td>{}</td><td>{}</td></tr>",
                n.id,
                n.bin,
                n.size(),
                comp.join(", "),
                t
            );
        }
        out.push_str("</table>\n</body>\n</html>\n");
        out
    }
}

/// Runs Mapper: rows of `lens` are binned by `cover`, each bin's rows are
/// clustered under the metric of `data` and cut with `rule`, and nodes
/// sharing a row are joined. Node ids follow bin order, then cluster
/// order (clusters numbered by their smallest member).
pub fn build_mapper(
    lens: &Embedding,
    data: &dyn MetricSource,
    cover: &Cover,
    rule: CutRule,
    labels: Option<&[String]>,
) -> Result<MapperGraph, MapperError> {
    let n = lens.len();
    if data.n_points() != n {
        return Err(MapperError::RowCount {
            lens: n,
            data: data.n_points(),
        });
    }
    if lens.dim() != cover.dims() {
        return Err(MapperError::LensDimension(lens.dim()));
    }
    if let Some(l) = labels {
        if l.len() != n {
            return Err(MapperError::LabelCount { labels: l.len(), rows: n });
        }
    }
    check_finite(lens)?;

    let mut members: Vec<Vec<usize>> = vec![Vec::new(); cover.bins().len()];
    for i in 0..n {
        for b in cover.bins_of(lens.row(i)) {
            members[b].push(i);
        }
    }
    let clusters: Vec<Vec<Vec<usize>>> = members
        .par_iter()
        .map(|rows| -> Result<Vec<Vec<usize>>, MapperError> {
            if rows.is_empty() {
                return Ok(Vec::new());
            }
            let dg = agglomerate(&data.distances(rows));
            let assignment = cut(&dg, rule)?;
            Ok(groups(&assignment)
                .into_iter()
                .map(|g| g.into_iter().map(|k| rows[k]).collect())
                .collect())
        })
        .collect::<Result<_, _>>()?;

    let mut nodes = Vec::new();
    for (bin, cs) in clusters.into_iter().enumerate() {
        for members in cs {
            let mut composition = BTreeMap::new();
            if let Some(l) = labels {
                for &m in &members {
                    *composition.entry(l[m].clone()).or_insert(0) += 1;
                }
            }
            nodes.push(MapperNode {
                id: nodes.len(),
                bin,
                members,
                composition,
            });
        }
    }

    let mut nodes_of: Vec<Vec<usize>> = vec![Vec::new(); n];
    for node in &nodes {
        for &m in &node.members {
            nodes_of[m].push(node.id);
        }
    }
    let mut shared: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for list in &nodes_of {
        for (a, &u) in list.iter().enumerate() {
            for &v in &list[a + 1..] {
                *shared.entry((u.min(v), u.max(v))).or_insert(0) += 1;
            }
        }
    }
    let edges = shared
        .into_iter()
        .map(|((source, target), shared)| MapperEdge { source, target, shared })
        .collect();
    Ok(MapperGraph {
        nodes,
        edges,
        ids: lens.ids().to_vec(),
    })
}

/// Cluster a node belongs to in a two-class comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    A,
    B,
    Both,
}

/// Assigns each node to `A` or `B` when that label's share of its members
/// reaches `threshold`, otherwise to `Both`.
pub fn majority_partition(g: &MapperGraph, label_a: &str, label_b: &str, threshold: f64) -> Result<Vec<Side>, MapperError> {
    if !(threshold > 0.5 && threshold <= 1.0) {
        return Err(MapperError::InvalidThreshold(threshold));
    }
    Ok(g.nodes()
        .iter()
        .map(|n| {
            let size = n.size() as f64;
            let count = |l: &str| n.composition.get(l).copied().unwrap_or(0) as f64;
            if count(label_a) / size >= threshold {
                Side::A
            } else if count(label_b) / size >= threshold {
                Side::B
            } else {
                Side::Both
            }
        })
        .collect())
}

/// Share of each label among the documents of the nodes assigned to each
/// side. Counts add up node by node, so a document in two nodes of the
/// same side counts twice. `None` marks a side with no nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Purity {
    pub label_a: String,
    pub label_b: String,
    pub a: Option<f64>,
    pub b: Option<f64>,
    /// Shares of `label_a` and `label_b` within the `Both` side.
    pub both: Option<(f64, f64)>,
    /// Node count and summed size per side, in the order A, B, Both.
    pub totals: [(usize, usize); 3],
}

impl Purity {
    pub fn to_csv(&self) -> String {
        let fmt = |r: Option<f64>| r.map_or(String::new(), |v| format!("{v:.6}"));
        let mut out = String::from("cluster,label,nodes,size,ratio\n");
        let rows = [
            ("A", &self.label_a, self.totals[0], self.a),
            ("B", &self.label_b, self.totals[1], self.b),
            ("both", &self.label_a, self.totals[2], self.both.map(|b| b.0)),
            ("both", &self.label_b, self.totals[2], self.both.map(|b| b.1)),
        ];
        for (side, label, (nodes, size), ratio) in rows {
            let _ = writeln!(out, "{side},{label},{nodes},{size},{}", fmt(ratio));
        }
        out
    }
}

pub fn cluster_purity(g: &MapperGraph, partition: &[Side], label_a: &str, label_b: &str) -> Purity {
    assert_eq!(partition.len(), g.nodes().len(), "every node needs a side");
    let mut totals = [(0usize, 0usize); 3];
    let mut counts = [(0usize, 0usize); 3];
    for (n, side) in g.nodes().iter().zip(partition) {
        let s = match side {
            Side::A => 0,
            Side::B => 1,
            Side::Both => 2,
        };
        totals[s].0 += 1;
        totals[s].1 += n.size();
        counts[s].0 += n.composition.get(label_a).copied().unwrap_or(0);
        counts[s].1 += n.composition.get(label_b).copied().unwrap_or(0);
    }
    let ratio = |c: usize, s: usize| (totals[s].1 > 0).then(|| c as f64 / totals[s].1 as f64);
    Purity {
        label_a: label_a.to_string(),
        label_b: label_b.to_string(),
        a: ratio(counts[0].0, 0),
        b: ratio(counts[1].1, 1),
        both: ratio(counts[2].0, 2).zip(ratio(counts[2].1, 2)),
        totals,
    }
}

/// Terms ranked by summed weight over the node's documents, ties broken
/// alphabetically; zero-weight terms are left out.
pub fn term_summary(node: &MapperNode, dtm: &DocumentTermMatrix, top_k: usize) -> Vec<(String, f64)> {
    let mut sums: BTreeMap<usize, f64> = BTreeMap::new();
    for &m in &node.members {
        for &(t, w) in dtm.row(m) {
            *sums.entry(t).or_insert(0.0) += w;
        }
    }
    let mut ranked: Vec<(String, f64)> = sums
        .into_iter()
        .filter(|&(_, w)| w > 0.0)
        .map(|(t, w)| (dtm.vocab()[t].clone(), w))
        .collect();
    ranked.sort_by(|x, y| y.1.total_cmp(&x.1).then_with(|| x.0.cmp(&y.0)));
    ranked.truncate(top_k);
    ranked
}
