//! Simplices and Vietoris–Rips filtrations.

use std::cmp::Ordering;
use std::fmt::Write as _;

use thiserror::Error;

use crate::metricspace::DistanceMatrix;

#[derive(Debug, Error, PartialEq)]
pub enum ComplexError {
    #[error("max_eps must be a positive finite number, got {0}")]
    InvalidScale(f64),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// A simplex on sorted vertex indices together with the scale at which it
/// enters the filtration.
#[derive(Debug, Clone, PartialEq)]
pub struct Simplex {
    vertices: Vec<usize>,
    value: f64,
}

impl Simplex {
    /// Vertices are sorted and deduplicated.
    pub fn new(mut vertices: Vec<usize>, value: f64) -> Self {
        vertices.sort_unstable();
        vertices.dedup();
        assert!(!vertices.is_empty(), "a simplex needs at least one vertex");
        Simplex { vertices, value }
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    /// Codimension-1 faces, face `i` omitting vertex `i`.
    pub fn facets(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        let k = if self.vertices.len() > 1 { self.vertices.len() } else { 0 };
        (0..k).map(move |skip| {
            self.vertices
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != skip)
                .map(|(_, &v)| v)
                .collect()
        })
    }

    /// Filtration order: value, then dimension, then lexicographic vertices.
    pub fn filtration_cmp(&self, other: &Simplex) -> Ordering {
        self.value
            .total_cmp(&other.value)
            .then_with(|| self.vertices.len().cmp(&other.vertices.len()))
            .then_with(|| self.vertices.cmp(&other.vertices))
    }
}

/// Simplices in filtration order. Every prefix is a simplicial complex when
/// the complex came out of [`build_rips`].
#[derive(Debug, Clone, PartialEq)]
pub struct FiltrationComplex {
    simplices: Vec<Simplex>,
    max_dim: usize,
    max_eps: f64,
}

impl FiltrationComplex {
    /// Sorts arbitrary simplices into filtration order. Face closure is not
    /// checked here; see [`FiltrationComplex::check_closure`].
    pub fn from_simplices(mut simplices: Vec<Simplex>, max_eps: f64) -> Self {
        simplices.sort_by(Simplex::filtration_cmp);
        let max_dim = simplices.iter().map(Simplex::dim).max().unwrap_or(0);
        FiltrationComplex {
            simplices,
            max_dim,
            max_eps,
        }
    }

    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    pub fn max_eps(&self) -> f64 {
        self.max_eps
    }

    pub fn vertex_count(&self) -> usize {
        self.simplices.iter().filter(|s| s.dim() == 0).count()
    }

    /// Returns the first simplex (by filtration position) that has a facet
    /// missing, or one appearing later in the order.
    pub fn check_closure(&self) -> Result<(), String> {
        let index: std::collections::HashMap<&[usize], usize> = self
            .simplices
            .iter()
            .enumerate()
            .map(|(i, s)| (s.vertices(), i))
            .collect();
        for (j, s) in self.simplices.iter().enumerate() {
            for face in s.facets() {
                match index.get(face.as_slice()) {
                    Some(&i) if i < j => {}
                    Some(_) => return Err(format!("face {face:?} of {:?} comes later", s.vertices)),
                    None => return Err(format!("face {face:?} of {:?} is missing", s.vertices)),
                }
            }
        }
        Ok(())
    }

    /// Text dump, one simplex per line: `dim value v0 v1 ...`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for s in &self.simplices {
            let _ = write!(out, "{} {:?}", s.dim(), s.value);
            for v in &s.vertices {
                let _ = write!(out, " {v}");
            }
            out.push('\n');
        }
        out
    }

    /// Inverse of [`FiltrationComplex::dump`].
    pub fn parse_dump(text: &str, max_eps: f64) -> Result<Self, ComplexError> {
        let mut simplices = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| ComplexError::Parse { line: i + 1, message };
            let mut fields = line.split_whitespace();
            let dim: usize = fields
                .next()
                .unwrap()
                .parse()
                .map_err(|e| err(format!("dimension: {e}")))?;
            let value: f64 = fields
                .next()
                .ok_or_else(|| err("missing value".into()))?
                .parse()
                .map_err(|e| err(format!("value: {e}")))?;
            let vertices = fields
                .map(|f| f.parse::<usize>().map_err(|e| err(format!("vertex: {e}"))))
                .collect::<Result<Vec<_>, _>>()?;
            if vertices.len() != dim + 1 {
                return Err(err(format!("{} vertices for a {dim}-simplex", vertices.len())));
            }
            simplices.push(Simplex::new(vertices, value));
        }
        Ok(Self::from_simplices(simplices, max_eps))
    }
}

/// Default truncation scale: the full diameter of the data, so that the
/// filtration runs until the complex is a full skeleton.
pub fn default_max_eps(dm: &DistanceMatrix) -> f64 {
    let d = dm.diameter();
    if d > 0.0 {
        d
    } else {
        1.0
    }
}

/// Vietoris–Rips filtration truncated at dimension `max_dim` and scale
/// `max_eps`.
///
/// Cliques are grown from the `max_eps`-neighbourhood graph by intersecting
/// upper neighbour sets, so each simplex is generated exactly once with its
/// vertices in increasing order.
pub fn build_rips(
    dm: &DistanceMatrix,
    max_dim: usize,
    max_eps: f64,
) -> Result<FiltrationComplex, ComplexError> {
    if !(max_eps > 0.0 && max_eps.is_finite()) {
        return Err(ComplexError::InvalidScale(max_eps));
    }
    let n = dm.len();
    let upper: Vec<Vec<usize>> = (0..n)
        .map(|u| (u + 1..n).filter(|&v| dm.get(u, v) <= max_eps).collect())
        .collect();

    let mut simplices = Vec::new();
    let mut stack = Vec::with_capacity(max_dim + 1);
    for u in 0..n {
        simplices.push(Simplex {
            vertices: vec![u],
            value: 0.0,
        });
        if max_dim > 0 {
            stack.clear();
            stack.push(u);
            expand(dm, &upper, max_dim, &mut stack, 0.0, &upper[u], &mut simplices);
        }
    }
    simplices.sort_by(Simplex::filtration_cmp);
    Ok(FiltrationComplex {
        simplices,
        max_dim,
        max_eps,
    })
}

fn expand(
    dm: &DistanceMatrix,
    upper: &[Vec<usize>],
    max_dim: usize,
    prefix: &mut Vec<usize>,
    value: f64,
    candidates: &[usize],
    out: &mut Vec<Simplex>,
) {
    for (pos, &v) in candidates.iter().enumerate() {
        let value = prefix.iter().fold(value, |acc, &u| acc.max(dm.get(u, v)));
        prefix.push(v);
        out.push(Simplex {
            vertices: prefix.clone(),
            value,
        });
        if prefix.len() <= max_dim {
            // candidates and upper[v] are both sorted
            let next = intersect_sorted(&candidates[pos + 1..], &upper[v]);
            if !next.is_empty() {
                expand(dm, upper, max_dim, prefix, value, &next, out);
            }
        }
        prefix.pop();
    }
}

fn intersect_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Number of simplices per dimension `0..=max_dim` with value `<= eps`.
pub fn complex_at(fc: &FiltrationComplex, eps: f64) -> Vec<usize> {
    let mut counts = vec![0; fc.max_dim + 1];
    for s in fc.simplices.iter().take_while(|s| s.value <= eps) {
        counts[s.dim()] += 1;
    }
    counts
}
