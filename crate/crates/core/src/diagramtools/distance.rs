//! Bottleneck and p-Wasserstein distances between persistence diagrams.
//!
//! Off-diagonal points may match a point of the other diagram or their own
//! diagonal projection; the ground metric is the sup norm. Essential
//! (infinite-death) points are matched among themselves by birth.

use thiserror::Error;

use super::matching::{hopcroft_karp, hungarian};
use crate::persistence::PersistenceDiagram;

#[derive(Debug, Error, PartialEq)]
pub enum DistanceError {
    #[error("Wasserstein order must be at least 1, got {0}")]
    InvalidOrder(f64),
}

/// A diagram distance together with a flag raised when the two diagrams
/// carry different numbers of essential classes (the value is then `+inf`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagramDistance {
    pub value: f64,
    pub essential_mismatch: bool,
}

impl DiagramDistance {
    fn finite(value: f64) -> Self {
        DiagramDistance {
            value,
            essential_mismatch: false,
        }
    }

    fn mismatch() -> Self {
        DiagramDistance {
            value: f64::INFINITY,
            essential_mismatch: true,
        }
    }
}

fn sup_norm(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).abs().max((a.1 - b.1).abs())
}

fn to_diagonal(a: (f64, f64)) -> f64 {
    (a.1 - a.0) / 2.0
}

struct Split {
    finite: Vec<(f64, f64)>,
    essential: Vec<f64>,
}

fn split(d: &PersistenceDiagram, dim: usize) -> Split {
    let mut finite = Vec::new();
    let mut essential = Vec::new();
    for (b, de) in d.points(dim) {
        if de.is_infinite() {
            essential.push(b);
        } else {
            finite.push((b, de));
        }
    }
    essential.sort_by(f64::total_cmp);
    Split { finite, essential }
}

/// Matched essential births in sorted order, which is optimal for every
/// convex cost of the birth difference. `None` when the counts differ.
fn essential_costs(a: &[f64], b: &[f64]) -> Option<Vec<f64>> {
    (a.len() == b.len()).then(|| a.iter().zip(b).map(|(x, y)| (x - y).abs()).collect())
}

/// Bottleneck distance between the dimension-`dim` parts of two diagrams.
pub fn bottleneck(d1: &PersistenceDiagram, d2: &PersistenceDiagram, dim: usize) -> DiagramDistance {
    let (a, b) = (split(d1, dim), split(d2, dim));
    let Some(ess) = essential_costs(&a.essential, &b.essential) else {
        return DiagramDistance::mismatch();
    };
    let ess_max = ess.into_iter().fold(0.0, f64::max);
    DiagramDistance::finite(bottleneck_finite(&a.finite, &b.finite).max(ess_max))
}

/// Bottleneck distance between two finite point sets.
///
/// The answer is one of the pairwise or point-to-diagonal costs, so a binary
/// search over the sorted candidates with a perfect-matching test is exact.
pub fn bottleneck_finite(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let (n1, n2) = (a.len(), b.len());
    if n1 + n2 == 0 {
        return 0.0;
    }
    let pair: Vec<Vec<f64>> = a.iter().map(|&x| b.iter().map(|&y| sup_norm(x, y)).collect()).collect();
    let diag_a: Vec<f64> = a.iter().map(|&x| to_diagonal(x)).collect();
    let diag_b: Vec<f64> = b.iter().map(|&y| to_diagonal(y)).collect();

    let mut candidates: Vec<f64> = pair.iter().flatten().copied().collect();
    candidates.extend_from_slice(&diag_a);
    candidates.extend_from_slice(&diag_b);
    candidates.push(0.0);
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    // rows: a points, then diagonal copies of b points
    // cols: b points, then diagonal copies of a points
    let feasible = |eps: f64| -> bool {
        let mut adj: Vec<Vec<usize>> = Vec::with_capacity(n1 + n2);
        for i in 0..n1 {
            let mut row: Vec<usize> = (0..n2).filter(|&j| pair[i][j] <= eps).collect();
            if diag_a[i] <= eps {
                row.push(n2 + i);
            }
            adj.push(row);
        }
        for j in 0..n2 {
            let mut row = Vec::with_capacity(n1 + 1);
            if diag_b[j] <= eps {
                row.push(j);
            }
            row.extend(n2..n2 + n1);
            adj.push(row);
        }
        hopcroft_karp(&adj, n1 + n2) == n1 + n2
    };

    let (mut lo, mut hi) = (0, candidates.len() - 1);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if feasible(candidates[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    candidates[lo]
}

/// p-Wasserstein distance between the dimension-`dim` parts of two diagrams.
/// `p = inf` falls back to the bottleneck distance.
pub fn wasserstein(
    d1: &PersistenceDiagram,
    d2: &PersistenceDiagram,
    dim: usize,
    p: f64,
) -> Result<DiagramDistance, DistanceError> {
    if p.is_nan() || p < 1.0 {
        return Err(DistanceError::InvalidOrder(p));
    }
    if p.is_infinite() {
        return Ok(bottleneck(d1, d2, dim));
    }
    let (a, b) = (split(d1, dim), split(d2, dim));
    let Some(ess) = essential_costs(&a.essential, &b.essential) else {
        return Ok(DiagramDistance::mismatch());
    };
    let total = wasserstein_cost(&a.finite, &b.finite, p) + ess.iter().map(|c| c.powf(p)).sum::<f64>();
    Ok(DiagramDistance::finite(total.powf(1.0 / p)))
}

/// p-Wasserstein distance between two finite point sets.
pub fn wasserstein_finite(a: &[(f64, f64)], b: &[(f64, f64)], p: f64) -> f64 {
    wasserstein_cost(a, b, p).powf(1.0 / p)
}

/// Optimal total cost `sum ||x - phi(x)||^p` over diagonal-augmented
/// matchings. Any diagonal slot may absorb any point, which is equivalent to
/// matching each point with its own projection and keeps every entry finite.
fn wasserstein_cost(a: &[(f64, f64)], b: &[(f64, f64)], p: f64) -> f64 {
    let (n1, n2) = (a.len(), b.len());
    let n = n1 + n2;
    if n == 0 {
        return 0.0;
    }
    let mut cost = vec![vec![0.0f64; n]; n];
    for i in 0..n1 {
        for j in 0..n2 {
            cost[i][j] = sup_norm(a[i], b[j]).powf(p);
        }
        let c = to_diagonal(a[i]).powf(p);
        for j in n2..n {
            cost[i][j] = c;
        }
    }
    for j in 0..n2 {
        let c = to_diagonal(b[j]).powf(p);
        for row in cost.iter_mut().skip(n1) {
            row[j] = c;
        }
    }
    let assignment = hungarian(&cost);
    assignment.iter().enumerate().map(|(i, &j)| cost[i][j]).sum()
}

/// Distance used for per-part comparison tables: in dimension 0 the
/// essential class of each diagram is left out, since every connected
/// filtration has exactly one.
pub fn table_distance(
    d1: &PersistenceDiagram,
    d2: &PersistenceDiagram,
    dim: usize,
    p: f64,
) -> Result<DiagramDistance, DistanceError> {
    if dim == 0 {
        wasserstein(&d1.without_essential(), &d2.without_essential(), 0, p)
    } else {
        wasserstein(d1, d2, dim, p)
    }
}
