//! Boundary matrices over the two-element field, column reduction, and
//! persistence diagrams.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::Read;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{build_rips, ComplexError, FiltrationComplex};
use crate::metricspace::DistanceMatrix;
use crate::svg::{self, SvgCanvas};

#[derive(Debug, Error)]
pub enum PersistenceError {
    #[error("simplex {simplex:?} has face {face:?} which is not in the complex")]
    MissingFace { simplex: Vec<usize>, face: Vec<usize> },
    #[error("simplex {simplex:?} precedes its face {face:?} in the filtration")]
    FaceOrder { simplex: Vec<usize>, face: Vec<usize> },
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Sparse boundary matrix: column `j` holds the sorted filtration positions
/// of the facets of simplex `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryMatrix {
    columns: Vec<Vec<usize>>,
    dims: Vec<usize>,
}

impl BoundaryMatrix {
    pub fn from_columns(columns: Vec<Vec<usize>>, dims: Vec<usize>) -> Self {
        assert_eq!(columns.len(), dims.len());
        BoundaryMatrix { columns, dims }
    }

    pub fn columns(&self) -> &[Vec<usize>] {
        &self.columns
    }

    pub fn column(&self, j: usize) -> &[usize] {
        &self.columns[j]
    }

    pub fn dim_of(&self, j: usize) -> usize {
        self.dims[j]
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    /// Boundary of a chain given as a sorted list of column indices, mod 2.
    pub fn apply(&self, chain: &[usize]) -> Vec<usize> {
        let mut acc = Vec::new();
        for &j in chain {
            acc = add_columns(&acc, &self.columns[j]);
        }
        acc
    }
}

/// Sum of two sorted index lists over the two-element field (symmetric
/// difference).
pub fn add_columns(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

pub fn boundary_matrix(fc: &FiltrationComplex) -> Result<BoundaryMatrix, PersistenceError> {
    let index: HashMap<&[usize], usize> = fc
        .simplices()
        .iter()
        .enumerate()
        .map(|(i, s)| (s.vertices(), i))
        .collect();
    let mut columns = Vec::with_capacity(fc.len());
    let mut dims = Vec::with_capacity(fc.len());
    for (j, s) in fc.simplices().iter().enumerate() {
        let mut col = Vec::with_capacity(s.dim() + 1);
        for face in s.facets() {
            match index.get(face.as_slice()) {
                Some(&i) if i < j => col.push(i),
                Some(_) => {
                    return Err(PersistenceError::FaceOrder {
                        simplex: s.vertices().to_vec(),
                        face,
                    })
                }
                None => {
                    return Err(PersistenceError::MissingFace {
                        simplex: s.vertices().to_vec(),
                        face,
                    })
                }
            }
        }
        col.sort_unstable();
        columns.push(col);
        dims.push(s.dim());
    }
    Ok(BoundaryMatrix { columns, dims })
}

/// Persistence pairing as filtration positions.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Pairing {
    /// `(birth, death)` positions, sorted by death.
    pub pairs: Vec<(usize, usize)>,
    /// Positions of classes that never die, ascending.
    pub unpaired: Vec<usize>,
}

/// Standard left-to-right column reduction.
pub fn reduce(bm: &BoundaryMatrix) -> Pairing {
    let n = bm.len();
    let mut pivot_col: Vec<Option<usize>> = vec![None; n];
    let mut reduced: Vec<Vec<usize>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut col = bm.columns[j].clone();
        while let Some(&low) = col.last() {
            match pivot_col[low] {
                Some(k) => col = add_columns(&col, &reduced[k]),
                None => break,
            }
        }
        if let Some(&low) = col.last() {
            pivot_col[low] = Some(j);
        }
        reduced.push(col);
    }
    collect_pairing(&pivot_col, |j| reduced[j].is_empty())
}

/// Column reduction with clearing: dimensions are processed from the top
/// down and any column known to be a birth is zeroed without reduction.
/// Produces the same pairing as [`reduce`].
pub fn reduce_twist(bm: &BoundaryMatrix) -> Pairing {
    let n = bm.len();
    let top = bm.dims.iter().copied().max().unwrap_or(0);
    let mut pivot_col: Vec<Option<usize>> = vec![None; n];
    let mut cleared = vec![false; n];
    let mut reduced: Vec<Vec<usize>> = vec![Vec::new(); n];
    for dim in (1..=top).rev() {
        for j in (0..n).filter(|&j| bm.dims[j] == dim) {
            if cleared[j] {
                continue;
            }
            let mut col = bm.columns[j].clone();
            while let Some(&low) = col.last() {
                match pivot_col[low] {
                    Some(k) => col = add_columns(&col, &reduced[k]),
                    None => break,
                }
            }
            if let Some(&low) = col.last() {
                pivot_col[low] = Some(j);
                cleared[low] = true;
            }
            reduced[j] = col;
        }
    }
    collect_pairing(&pivot_col, |j| reduced[j].is_empty())
}

fn collect_pairing(pivot_col: &[Option<usize>], is_zero: impl Fn(usize) -> bool) -> Pairing {
    let mut pairs: Vec<(usize, usize)> = pivot_col
        .iter()
        .enumerate()
        .filter_map(|(i, d)| d.map(|d| (i, d)))
        .collect();
    pairs.sort_by_key(|&(_, d)| d);
    let unpaired = (0..pivot_col.len())
        .filter(|&j| is_zero(j) && pivot_col[j].is_none())
        .collect();
    Pairing { pairs, unpaired }
}

/// One point of a persistence diagram. `death` is `f64::INFINITY` for
/// classes that survive to the end of the filtration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PersistencePair {
    pub dim: usize,
    pub birth: f64,
    pub death: f64,
}

impl PersistencePair {
    pub fn new(dim: usize, birth: f64, death: f64) -> Self {
        PersistencePair { dim, birth, death }
    }

    pub fn is_essential(&self) -> bool {
        self.death.is_infinite()
    }

    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }

    fn key_cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.dim
            .cmp(&other.dim)
            .then(self.birth.total_cmp(&other.birth))
            .then(self.death.total_cmp(&other.death))
    }
}

/// Multiset of persistence pairs, kept sorted by `(dim, birth, death)` so
/// that equality is multiset equality.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PersistenceDiagram {
    pairs: Vec<PersistencePair>,
}

impl PersistenceDiagram {
    pub fn new(mut pairs: Vec<PersistencePair>) -> Self {
        pairs.sort_by(PersistencePair::key_cmp);
        PersistenceDiagram { pairs }
    }

    pub fn pairs(&self) -> &[PersistencePair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn max_dim(&self) -> Option<usize> {
        self.pairs.last().map(|p| p.dim)
    }

    /// `(birth, death)` points of one dimension.
    pub fn points(&self, dim: usize) -> Vec<(f64, f64)> {
        self.pairs
            .iter()
            .filter(|p| p.dim == dim)
            .map(|p| (p.birth, p.death))
            .collect()
    }

    pub fn restrict(&self, dim: usize) -> PersistenceDiagram {
        PersistenceDiagram {
            pairs: self.pairs.iter().filter(|p| p.dim == dim).copied().collect(),
        }
    }

    pub fn without_essential(&self) -> PersistenceDiagram {
        PersistenceDiagram {
            pairs: self.pairs.iter().filter(|p| !p.is_essential()).copied().collect(),
        }
    }

    /// CSV with header `dim,birth,death`; infinite deaths are written as `inf`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("dim,birth,death\n");
        for p in &self.pairs {
            let _ = writeln!(out, "{},{},{}", p.dim, fmt_value(p.birth), fmt_value(p.death));
        }
        out
    }

    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self, PersistenceError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut pairs = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let line = i + 2;
            let err = |message: String| PersistenceError::Parse { line, message };
            let rec = rec.map_err(|e| err(e.to_string()))?;
            if rec.len() != 3 {
                return Err(err(format!("expected 3 fields, found {}", rec.len())));
            }
            let dim = rec[0].parse::<usize>().map_err(|e| err(format!("dim: {e}")))?;
            let birth = rec[1].parse::<f64>().map_err(|e| err(format!("birth: {e}")))?;
            let death = rec[2].parse::<f64>().map_err(|e| err(format!("death: {e}")))?;
            if birth.is_nan() || death.is_nan() || death < birth {
                return Err(err(format!("invalid pair ({birth}, {death})")));
            }
            pairs.push(PersistencePair { dim, birth, death });
        }
        Ok(PersistenceDiagram::new(pairs))
    }

    pub fn from_csv_path(path: impl AsRef<std::path::Path>) -> Result<Self, PersistenceError> {
        let file = std::fs::File::open(path)?;
        Self::from_csv_reader(std::io::BufReader::new(file))
    }

    /// Barcode: one horizontal bar per pair, dimensions stacked in bands from
    /// top to bottom. Infinite bars are drawn up to `cap`.
    pub fn barcode_svg(&self, cap: f64) -> String {
        let dims: Vec<usize> = {
            let mut d: Vec<usize> = self.pairs.iter().map(|p| p.dim).collect();
            d.dedup();
            d
        };
        let bar_gap = 6.0;
        let band_pad = 24.0;
        let height: f64 = dims
            .iter()
            .map(|&d| band_pad + bar_gap * self.pairs.iter().filter(|p| p.dim == d).count() as f64)
            .sum::<f64>()
            .max(band_pad)
            + 40.0;
        let mut canvas = SvgCanvas::new(640.0, height);
        let (x0, x1) = (50.0, 620.0);
        let scale = if cap > 0.0 { (x1 - x0) / cap } else { 1.0 };
        let mut y = 20.0;
        for &d in &dims {
            canvas.text(5.0, y + 12.0, &format!("H{d}"), 12.0, "#333");
            y += band_pad * 0.5;
            for p in self.pairs.iter().filter(|p| p.dim == d) {
                let end = if p.death.is_finite() { p.death.min(cap) } else { cap };
                y += bar_gap;
                canvas.line(
                    x0 + p.birth * scale,
                    y,
                    x0 + end * scale,
                    y,
                    svg::palette(d),
                    2.0,
                );
            }
            y += band_pad * 0.5;
        }
        canvas.line(x0, height - 20.0, x1, height - 20.0, "#000", 1.0);
        canvas.text(x0, height - 5.0, "0", 10.0, "#000");
        canvas.text(x1 - 30.0, height - 5.0, &format!("{cap:.3}"), 10.0, "#000");
        canvas.finish()
    }
}

fn fmt_value(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:?}")
    }
}

/// Translates a pairing back into filtration values. Pairs whose birth and
/// death values coincide are dropped unless `keep_zero` is set.
pub fn diagram(fc: &FiltrationComplex, pairing: &Pairing, keep_zero: bool) -> PersistenceDiagram {
    let s = fc.simplices();
    let mut pairs = Vec::with_capacity(pairing.pairs.len() + pairing.unpaired.len());
    for &(b, d) in &pairing.pairs {
        let (birth, death) = (s[b].value(), s[d].value());
        if keep_zero || birth < death {
            pairs.push(PersistencePair::new(s[b].dim(), birth, death));
        }
    }
    for &u in &pairing.unpaired {
        pairs.push(PersistencePair::new(s[u].dim(), s[u].value(), f64::INFINITY));
    }
    PersistenceDiagram::new(pairs)
}

/// Boundary matrix, clearing reduction and diagram in one call.
pub fn compute_diagram(fc: &FiltrationComplex, keep_zero: bool) -> Result<PersistenceDiagram, PersistenceError> {
    let bm = boundary_matrix(fc)?;
    Ok(diagram(fc, &reduce_twist(&bm), keep_zero))
}

/// Rips filtration followed by [`compute_diagram`].
pub fn rips_diagram(dm: &DistanceMatrix, max_dim: usize, max_eps: f64) -> Result<PersistenceDiagram, PersistenceError> {
    let fc = build_rips(dm, max_dim, max_eps)?;
    compute_diagram(&fc, false)
}

/// Betti numbers as right-continuous step functions of the scale.
#[derive(Debug, Clone, PartialEq)]
pub struct BettiProfile {
    /// Per dimension, `(eps, betti)` breakpoints: the Betti number equals
    /// `betti` on `[eps, next eps)` and 0 before the first breakpoint.
    steps: Vec<Vec<(f64, usize)>>,
}

impl BettiProfile {
    pub fn steps(&self, dim: usize) -> &[(f64, usize)] {
        self.steps.get(dim).map_or(&[], Vec::as_slice)
    }

    pub fn betti_at(&self, dim: usize, eps: f64) -> usize {
        let steps = self.steps(dim);
        match steps.partition_point(|&(t, _)| t <= eps) {
            0 => 0,
            k => steps[k - 1].1,
        }
    }

    pub fn dims(&self) -> usize {
        self.steps.len()
    }
}

pub fn betti_profile(d: &PersistenceDiagram) -> BettiProfile {
    let dims = d.max_dim().map_or(0, |m| m + 1);
    let steps = (0..dims)
        .map(|dim| {
            let mut events: Vec<(f64, i64)> = Vec::new();
            for p in d.pairs.iter().filter(|p| p.dim == dim) {
                events.push((p.birth, 1));
                if p.death.is_finite() {
                    events.push((p.death, -1));
                }
            }
            events.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut out: Vec<(f64, usize)> = Vec::new();
            let mut level = 0i64;
            for (t, delta) in events {
                level += delta;
                match out.last_mut() {
                    Some(last) if last.0 == t => last.1 = level as usize,
                    _ => out.push((t, level as usize)),
                }
            }
            out
        })
        .collect();
    BettiProfile { steps }
}
