//! Point clouds and pairwise distance matrices.
//!
//! Both the Rips filtration and the per-bin Mapper clustering consume a
//! [`DistanceMatrix`]. Only the strict upper triangle is stored; the diagonal
//! is implicitly zero.

use std::collections::HashSet;
use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("point cloud is empty")]
    Empty,
    #[error("point {index} has dimension {found}, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("points must have dimension at least 1")]
    ZeroDimension,
    #[error("duplicate point id {0:?}")]
    DuplicateId(String),
    #[error("{ids} ids supplied for {points} points")]
    IdCount { ids: usize, points: usize },
    #[error("point {index} is the zero vector, cosine distance is undefined")]
    ZeroVector { index: usize },
    #[error("unknown metric {0:?} (expected euclidean or cosine)")]
    UnknownMetric(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Dissimilarity used to compare two vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Euclidean,
    /// `1 - cos(u, v)`, in `[0, 2]`.
    Cosine,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::Euclidean => f.write_str("euclidean"),
            Metric::Cosine => f.write_str("cosine"),
        }
    }
}

impl FromStr for Metric {
    type Err = MetricError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "euclidean" => Ok(Metric::Euclidean),
            "cosine" => Ok(Metric::Cosine),
            _ => Err(MetricError::UnknownMetric(s.to_string())),
        }
    }
}

/// A finite set of equal-dimension real vectors with unique identifiers.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Vec<Vec<f64>>,
    ids: Vec<String>,
}

impl PointCloud {
    /// Builds a cloud whose ids are the row numbers `0, 1, ...`.
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self, MetricError> {
        let ids = (0..points.len()).map(|i| i.to_string()).collect();
        Self::with_ids(points, ids)
    }

    pub fn with_ids(points: Vec<Vec<f64>>, ids: Vec<String>) -> Result<Self, MetricError> {
        if ids.len() != points.len() {
            return Err(MetricError::IdCount {
                ids: ids.len(),
                points: points.len(),
            });
        }
        if let Some(first) = points.first() {
            let dim = first.len();
            if dim == 0 {
                return Err(MetricError::ZeroDimension);
            }
            for (index, p) in points.iter().enumerate() {
                if p.len() != dim {
                    return Err(MetricError::DimensionMismatch {
                        index,
                        expected: dim,
                        found: p.len(),
                    });
                }
            }
        }
        let mut seen = HashSet::with_capacity(ids.len());
        for id in &ids {
            if !seen.insert(id.as_str()) {
                return Err(MetricError::DuplicateId(id.clone()));
            }
        }
        Ok(PointCloud { points, ids })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Ambient dimension, or 0 for an empty cloud.
    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, Vec::len)
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    /// Parses a headerless CSV with one point per row. When `id_column` is
    /// set, the first field of every row is taken as the point id.
    pub fn from_csv_reader<R: Read>(reader: R, id_column: bool) -> Result<Self, MetricError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .flexible(true)
            .comment(Some(b'#'))
            .from_reader(reader);
        let mut points = Vec::new();
        let mut ids = Vec::new();
        for (row, record) in rdr.records().enumerate() {
            let line = row + 1;
            let record = record.map_err(|e| MetricError::Parse {
                line,
                message: e.to_string(),
            })?;
            if record.iter().all(|f| f.is_empty()) {
                continue;
            }
            let mut fields = record.iter();
            let id = if id_column {
                fields
                    .next()
                    .map(str::to_string)
                    .ok_or_else(|| MetricError::Parse {
                        line,
                        message: "missing id column".into(),
                    })?
            } else {
                points.len().to_string()
            };
            let coords = fields
                .map(|f| {
                    f.parse::<f64>().map_err(|e| MetricError::Parse {
                        line,
                        message: format!("{f:?}: {e}"),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            points.push(coords);
            ids.push(id);
        }
        Self::with_ids(points, ids)
    }

    pub fn from_csv_path(path: impl AsRef<Path>, id_column: bool) -> Result<Self, MetricError> {
        let file = std::fs::File::open(path)?;
        Self::from_csv_reader(std::io::BufReader::new(file), id_column)
    }
}

/// Symmetric matrix of pairwise dissimilarities, stored as a packed strict
/// upper triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    upper: Vec<f64>,
    metric: Metric,
}

impl DistanceMatrix {
    /// Builds a matrix from a full square array. Only the upper triangle is
    /// read; callers are responsible for symmetry.
    pub fn from_square(rows: &[Vec<f64>], metric: Metric) -> Self {
        let n = rows.len();
        let mut upper = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                upper.push(rows[i][j]);
            }
        }
        DistanceMatrix { n, upper, metric }
    }

    /// Builds a matrix by evaluating `f(i, j)` for every `i < j`.
    pub fn from_fn(n: usize, metric: Metric, f: impl Fn(usize, usize) -> f64 + Sync) -> Self {
        let upper = (0..n)
            .into_par_iter()
            .flat_map_iter(|i| {
                let f = &f;
                (i + 1..n).map(move |j| f(i, j))
            })
            .collect();
        DistanceMatrix { n, upper, metric }
    }

    pub fn empty(metric: Metric) -> Self {
        DistanceMatrix {
            n: 0,
            upper: Vec::new(),
            metric,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    fn offset(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.n);
        i * (2 * self.n - i - 1) / 2 + (j - i - 1)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => 0.0,
            std::cmp::Ordering::Less => self.upper[self.offset(i, j)],
            std::cmp::Ordering::Greater => self.upper[self.offset(j, i)],
        }
    }

    /// Largest pairwise distance, 0 for fewer than two points.
    pub fn diameter(&self) -> f64 {
        self.upper.iter().copied().fold(0.0, f64::max)
    }

    /// Restriction to the given rows, in the given order.
    pub fn submatrix(&self, rows: &[usize]) -> DistanceMatrix {
        let n = rows.len();
        let mut upper = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for (a, &i) in rows.iter().enumerate() {
            for &j in &rows[a + 1..] {
                upper.push(self.get(i, j));
            }
        }
        DistanceMatrix {
            n,
            upper,
            metric: self.metric,
        }
    }
}

fn euclidean(u: &[f64], v: &[f64]) -> f64 {
    u.iter()
        .zip(v)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

fn norm(u: &[f64]) -> f64 {
    u.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Cosine distance of two vectors with precomputed norms, clamped to `[0, 2]`.
pub(crate) fn cosine_from_dot(dot: f64, norm_u: f64, norm_v: f64) -> f64 {
    (1.0 - dot / (norm_u * norm_v)).clamp(0.0, 2.0)
}

/// All pairwise distances of `cloud` under `metric`.
pub fn pairwise_distances(cloud: &PointCloud, metric: Metric) -> Result<DistanceMatrix, MetricError> {
    if cloud.is_empty() {
        return Err(MetricError::Empty);
    }
    let pts = cloud.points();
    match metric {
        Metric::Euclidean => Ok(DistanceMatrix::from_fn(pts.len(), metric, |i, j| {
            euclidean(&pts[i], &pts[j])
        })),
        Metric::Cosine => {
            let norms: Vec<f64> = pts.iter().map(|p| norm(p)).collect();
            if let Some(index) = norms.iter().position(|&n| n == 0.0) {
                return Err(MetricError::ZeroVector { index });
            }
            Ok(DistanceMatrix::from_fn(pts.len(), metric, |i, j| {
                let dot: f64 = pts[i].iter().zip(&pts[j]).map(|(a, b)| a * b).sum();
                cosine_from_dot(dot, norms[i], norms[j])
            }))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cloud(points: Vec<Vec<f64>>) -> PointCloud {
        PointCloud::new(points).unwrap()
    }

    #[test]
    fn three_four_five() {
        let dm = pairwise_distances(&cloud(vec![vec![0.0, 0.0], vec![3.0, 4.0]]), Metric::Euclidean)
            .unwrap();
        assert_eq!(dm.get(0, 1), 5.0);
        assert_eq!(dm.get(1, 0), 5.0);
        assert_eq!(dm.get(1, 1), 0.0);
    }

    #[test]
    fn cosine_orthogonal_and_parallel() {
        let dm = pairwise_distances(&cloud(vec![vec![1.0, 0.0], vec![0.0, 1.0]]), Metric::Cosine)
            .unwrap();
        assert_eq!(dm.get(0, 1), 1.0);
        let dm = pairwise_distances(&cloud(vec![vec![1.0, 1.0], vec![2.0, 2.0]]), Metric::Cosine)
            .unwrap();
        assert!(dm.get(0, 1).abs() < 1e-12);
    }

    #[test]
    fn cosine_rejects_zero_vector() {
        let err = pairwise_distances(&cloud(vec![vec![1.0, 0.0], vec![0.0, 0.0]]), Metric::Cosine)
            .unwrap_err();
        assert!(matches!(err, MetricError::ZeroVector { index: 1 }));
    }

    #[test]
    fn rejects_ragged_and_duplicate_ids() {
        let err = PointCloud::new(vec![vec![1.0, 0.0], vec![0.0]]).unwrap_err();
        assert!(matches!(err, MetricError::DimensionMismatch { index: 1, .. }));
        let err = PointCloud::with_ids(vec![vec![1.0], vec![2.0]], vec!["a".into(), "a".into()])
            .unwrap_err();
        assert!(matches!(err, MetricError::DuplicateId(_)));
        assert!(matches!(
            pairwise_distances(&cloud(vec![]), Metric::Euclidean),
            Err(MetricError::Empty)
        ));
    }

    #[test]
    fn csv_with_and_without_ids() {
        let c = PointCloud::from_csv_reader("0,0\n1, 2\n\n3,4\n".as_bytes(), false).unwrap();
        assert_eq!(c.len(), 3);
        assert_eq!(c.point(1), &[1.0, 2.0]);
        let c = PointCloud::from_csv_reader("a,0,0\nb,1,2\n".as_bytes(), true).unwrap();
        assert_eq!(c.ids(), &["a".to_string(), "b".to_string()]);
        assert_eq!(c.dim(), 2);
        let err = PointCloud::from_csv_reader("0,x\n".as_bytes(), false).unwrap_err();
        assert!(matches!(err, MetricError::Parse { line: 1, .. }));
    }

    #[test]
    fn submatrix_reindexes() {
        let c = cloud(vec![vec![0.0], vec![1.0], vec![3.0], vec![6.0]]);
        let dm = pairwise_distances(&c, Metric::Euclidean).unwrap();
        let sub = dm.submatrix(&[3, 1]);
        assert_eq!(sub.len(), 2);
        assert_eq!(sub.get(0, 1), 5.0);
        assert_eq!(dm.diameter(), 6.0);
    }

    fn arb_cloud() -> impl Strategy<Value = Vec<Vec<f64>>> {
        (1usize..4).prop_flat_map(|d| {
            prop::collection::vec(prop::collection::vec(-10.0f64..10.0, d), 1..50)
        })
    }

    proptest! {
        #[test]
        fn euclidean_matches_brute_force(points in arb_cloud()) {
            let c = cloud(points.clone());
            let dm = pairwise_distances(&c, Metric::Euclidean).unwrap();
            for i in 0..points.len() {
                prop_assert_eq!(dm.get(i, i), 0.0);
                for j in 0..points.len() {
                    let mut s = 0.0;
                    for k in 0..points[i].len() {
                        s += (points[i][k] - points[j][k]).powi(2);
                    }
                    prop_assert!((dm.get(i, j) - s.sqrt()).abs() <= 1e-12);
                    prop_assert_eq!(dm.get(i, j), dm.get(j, i));
                }
            }
        }

        #[test]
        fn euclidean_triangle_inequality(points in arb_cloud()) {
            let dm = pairwise_distances(&cloud(points.clone()), Metric::Euclidean).unwrap();
            let n = points.len();
            for i in 0..n.min(12) {
                for j in 0..n.min(12) {
                    for k in 0..n.min(12) {
                        prop_assert!(dm.get(i, k) <= dm.get(i, j) + dm.get(j, k) + 1e-9);
                    }
                }
            }
        }

        #[test]
        fn cosine_in_range_and_symmetric(points in arb_cloud()) {
            prop_assume!(points.iter().all(|p| p.iter().any(|x| *x != 0.0)));
            let dm = pairwise_distances(&cloud(points.clone()), Metric::Cosine).unwrap();
            for i in 0..points.len() {
                prop_assert_eq!(dm.get(i, i), 0.0);
                for j in 0..points.len() {
                    let d = dm.get(i, j);
                    prop_assert!((0.0..=2.0).contains(&d));
                    prop_assert_eq!(d, dm.get(j, i));
                }
            }
        }
    }
}
