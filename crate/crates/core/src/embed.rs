//! Low-dimensional lenses: randomized truncated SVD and coordinate
//! projection.

use std::fmt::{self, Write as _};
use std::io::Read;
use std::path::Path;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::metricspace::PointCloud;
use crate::textpipeline::DocumentTermMatrix;

const OVERSAMPLING: usize = 10;
const POWER_ITERATIONS: usize = 6;

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("k = {k} is outside 1..={max}")]
    InvalidRank { k: usize, max: usize },
    #[error("axis {axis} is out of range for {dim}-dimensional points")]
    InvalidAxis { axis: usize, dim: usize },
    #[error("embedding csv line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LensMethod {
    TruncatedSvd,
    Coordinate(usize),
    /// Read back from a file.
    External,
}

impl fmt::Display for LensMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LensMethod::TruncatedSvd => f.write_str("truncated-svd"),
            LensMethod::Coordinate(a) => write!(f, "axis-{a}"),
            LensMethod::External => f.write_str("external"),
        }
    }
}

/// One coordinate row per document or point.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    coords: Vec<Vec<f64>>,
    ids: Vec<String>,
    method: LensMethod,
    seed: Option<u64>,
    singular_values: Vec<f64>,
    /// Right singular vectors as rows, for SVD lenses.
    components: Vec<Vec<f64>>,
}

impl Embedding {
    pub fn new(coords: Vec<Vec<f64>>, ids: Vec<String>) -> Self {
        assert_eq!(coords.len(), ids.len(), "one id per row");
        Embedding {
            coords,
            ids,
            method: LensMethod::External,
            seed: None,
            singular_values: Vec::new(),
            components: Vec::new(),
        }
    }

    pub fn coords(&self) -> &[Vec<f64>] {
        &self.coords
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.coords[i]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.coords.first().map_or(0, Vec::len)
    }

    pub fn method(&self) -> LensMethod {
        self.method
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.components
    }

    /// Values of column `axis` over all rows.
    pub fn column(&self, axis: usize) -> Vec<f64> {
        self.coords.iter().map(|r| r[axis]).collect()
    }

    /// CSV with header `doc_id,x[,y]` (further columns are `c3`, `c4`, ...).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("doc_id");
        for j in 0..self.dim() {
            match j {
                0 => out.push_str(",x"),
                1 => out.push_str(",y"),
                _ => {
                    let _ = write!(out, ",c{}", j + 1);
                }
            }
        }
        out.push('\n');
        for (id, row) in self.ids.iter().zip(&self.coords) {
            out.push_str(id);
            for v in row {
                let _ = write!(out, ",{v:?}");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self, EmbedError> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let mut coords = Vec::new();
        let mut ids = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| EmbedError::Parse {
                line,
                message: e.to_string(),
            })?;
            let mut fields = rec.iter();
            ids.push(fields.next().unwrap_or_default().to_string());
            let row = fields
                .map(|f| {
                    f.trim().parse::<f64>().map_err(|e| EmbedError::Parse {
                        line,
                        message: format!("{f:?}: {e}"),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            coords.push(row);
        }
        Ok(Embedding::new(coords, ids))
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self, EmbedError> {
        Self::from_csv_reader(std::fs::File::open(path)?)
    }
}

/// A matrix that can be multiplied by dense blocks from either side.
pub trait RowMatrix {
    fn n_rows(&self) -> usize;
    fn n_cols(&self) -> usize;
    /// `A * x` for `x` of shape `n_cols × l`.
    fn mul(&self, x: &DMatrix<f64>) -> DMatrix<f64>;
    /// `Aᵀ * y` for `y` of shape `n_rows × l`.
    fn mul_transpose(&self, y: &DMatrix<f64>) -> DMatrix<f64>;
    fn row_ids(&self) -> Vec<String>;
}

impl RowMatrix for DocumentTermMatrix {
    fn n_rows(&self) -> usize {
        self.n_docs()
    }

    fn n_cols(&self) -> usize {
        self.n_terms()
    }

    fn mul(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.n_docs(), x.ncols());
        for (i, row) in self.rows().iter().enumerate() {
            for &(t, w) in row {
                for c in 0..x.ncols() {
                    out[(i, c)] += w * x[(t, c)];
                }
            }
        }
        out
    }

    fn mul_transpose(&self, y: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.n_terms(), y.ncols());
        for (i, row) in self.rows().iter().enumerate() {
            for &(t, w) in row {
                for c in 0..y.ncols() {
                    out[(t, c)] += w * y[(i, c)];
                }
            }
        }
        out
    }

    fn row_ids(&self) -> Vec<String> {
        self.doc_ids().to_vec()
    }
}

impl RowMatrix for PointCloud {
    fn n_rows(&self) -> usize {
        self.len()
    }

    fn n_cols(&self) -> usize {
        self.dim()
    }

    fn mul(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        dense(self) * x
    }

    fn mul_transpose(&self, y: &DMatrix<f64>) -> DMatrix<f64> {
        dense(self).tr_mul(y)
    }

    fn row_ids(&self) -> Vec<String> {
        self.ids().to_vec()
    }
}

fn dense(cloud: &PointCloud) -> DMatrix<f64> {
    DMatrix::from_fn(cloud.len(), cloud.dim(), |i, j| cloud.point(i)[j])
}

fn orthonormal_basis(m: DMatrix<f64>) -> DMatrix<f64> {
    m.qr().q()
}

/// Projects the rows of `a` onto its top `k` right singular directions,
/// found by randomized subspace iteration seeded with `seed`.
///
/// Each singular vector is signed so that its largest-magnitude entry is
/// positive (the first such entry on ties).
pub fn truncated_svd<M: RowMatrix + ?Sized>(a: &M, k: usize, seed: u64) -> Result<Embedding, EmbedError> {
    let (n, m) = (a.n_rows(), a.n_cols());
    let max = n.min(m);
    if k == 0 || k > max {
        return Err(EmbedError::InvalidRank { k, max });
    }
    let l = (k + OVERSAMPLING).min(max);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let omega = DMatrix::from_fn(m, l, |_, _| StandardNormal.sample(&mut rng));

    let mut q = orthonormal_basis(a.mul(&omega));
    for _ in 0..POWER_ITERATIONS {
        let z = orthonormal_basis(a.mul_transpose(&q));
        q = orthonormal_basis(a.mul(&z));
    }
    // B = Qᵀ A, held as its transpose
    let bt = a.mul_transpose(&q);
    let svd = bt.transpose().svd(false, true);
    let vt = svd.v_t.expect("requested right singular vectors");

    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&x, &y| svd.singular_values[y].total_cmp(&svd.singular_values[x]).then(x.cmp(&y)));
    let order = &order[..k];

    let mut v = DMatrix::zeros(m, k);
    for (c, &r) in order.iter().enumerate() {
        let row = vt.row(r);
        let mut lead = 0;
        for j in 1..m {
            if row[j].abs() > row[lead].abs() {
                lead = j;
            }
        }
        let sign = if row[lead] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..m {
            v[(j, c)] = sign * row[j];
        }
    }
    let projected = a.mul(&v);
    Ok(Embedding {
        coords: (0..n).map(|i| projected.row(i).iter().copied().collect()).collect(),
        ids: a.row_ids(),
        method: LensMethod::TruncatedSvd,
        seed: Some(seed),
        singular_values: order.iter().map(|&r| svd.singular_values[r]).collect(),
        components: (0..k).map(|c| v.column(c).iter().copied().collect()).collect(),
    })
}

/// The 1-dimensional lens given by one coordinate.
pub fn coordinate_projection(cloud: &PointCloud, axis: usize) -> Result<Embedding, EmbedError> {
    if axis >= cloud.dim() {
        return Err(EmbedError::InvalidAxis { axis, dim: cloud.dim() });
    }
    let mut e = Embedding::new(
        cloud.points().iter().map(|p| vec![p[axis]]).collect(),
        cloud.ids().to_vec(),
    );
    e.method = LensMethod::Coordinate(axis);
    Ok(e)
}
