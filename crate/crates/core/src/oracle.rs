//! Brute-force reference implementations used by the test suites.
//!
//! Every routine here is deliberately naive and shares no code path with the
//! production algorithms it checks. Only compiled for tests or with the
//! `oracle` feature.

use crate::complex::{FiltrationComplex, Simplex};
use crate::metricspace::DistanceMatrix;
use crate::persistence::{PersistenceDiagram, PersistencePair};

/// All vertex subsets of size at most `max_dim + 1` with diameter at most
/// `max_eps`, in filtration order.
pub fn rips_by_subsets(dm: &DistanceMatrix, max_dim: usize, max_eps: f64) -> Vec<Simplex> {
    let n = dm.len();
    assert!(n <= 20, "subset enumeration is exponential");
    let mut out = Vec::new();
    for mask in 1u32..(1u32 << n) {
        let vs: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        if vs.len() > max_dim + 1 {
            continue;
        }
        let mut diam = 0.0f64;
        for a in 0..vs.len() {
            for b in a + 1..vs.len() {
                diam = diam.max(dm.get(vs[a], vs[b]));
            }
        }
        if diam <= max_eps {
            out.push(Simplex::new(vs, diam));
        }
    }
    out.sort_by(Simplex::filtration_cmp);
    out
}

#[derive(Clone, PartialEq, Eq)]
struct Bits(Vec<u64>);

impl Bits {
    fn zero(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64).max(1)])
    }
    fn set(&mut self, i: usize) {
        self.0[i / 64] ^= 1 << (i % 64);
    }
    fn xor(&mut self, o: &Bits) {
        for (a, b) in self.0.iter_mut().zip(&o.0) {
            *a ^= b;
        }
    }
    fn highest(&self) -> Option<usize> {
        for (w, &word) in self.0.iter().enumerate().rev() {
            if word != 0 {
                return Some(w * 64 + 63 - word.leading_zeros() as usize);
            }
        }
        None
    }
}

/// Rank over the two-element field by Gaussian elimination.
fn rank(vectors: &[Bits]) -> usize {
    let mut basis: Vec<Bits> = Vec::new();
    for v in vectors {
        let mut v = v.clone();
        loop {
            let Some(h) = v.highest() else { break };
            match basis.iter().find(|b| b.highest() == Some(h)) {
                Some(b) => v.xor(b),
                None => {
                    basis.push(v);
                    break;
                }
            }
        }
    }
    basis.len()
}

/// Kernel basis of the linear map sending each generator to `images[g]`.
fn kernel(generators: &[usize], images: &[Bits], n: usize) -> Vec<Bits> {
    // pairs of (image, combination of generators)
    let mut rows: Vec<(Bits, Bits)> = Vec::new();
    let mut kernel = Vec::new();
    for &g in generators {
        let mut img = images[g].clone();
        let mut combo = Bits::zero(n);
        combo.set(g);
        loop {
            let Some(h) = img.highest() else {
                kernel.push(combo);
                break;
            };
            match rows.iter().find(|(r, _)| r.highest() == Some(h)) {
                Some((r, c)) => {
                    img.xor(r);
                    combo.xor(c);
                }
                None => {
                    rows.push((img, combo));
                    break;
                }
            }
        }
    }
    kernel
}

/// Persistence diagram from persistent Betti numbers
/// `rank(H_p(K_i) -> H_p(K_j)) = rank(Z_p(K_i) + B_p(K_j)) - rank(B_p(K_j))`,
/// evaluated at every critical value and turned into multiplicities by
/// inclusion–exclusion. Zero-persistence classes never appear.
pub fn diagram_by_ranks(fc: &FiltrationComplex) -> PersistenceDiagram {
    let s = fc.simplices();
    let n = s.len();
    if n == 0 {
        return PersistenceDiagram::default();
    }
    let index: std::collections::HashMap<&[usize], usize> =
        s.iter().enumerate().map(|(i, x)| (x.vertices(), i)).collect();
    let images: Vec<Bits> = s
        .iter()
        .map(|x| {
            let mut b = Bits::zero(n);
            if x.dim() > 0 {
                for skip in 0..x.vertices().len() {
                    let face: Vec<usize> = x
                        .vertices()
                        .iter()
                        .enumerate()
                        .filter(|&(k, _)| k != skip)
                        .map(|(_, &v)| v)
                        .collect();
                    b.set(index[face.as_slice()]);
                }
            }
            b
        })
        .collect();

    let mut values: Vec<f64> = s.iter().map(Simplex::value).collect();
    values.sort_by(f64::total_cmp);
    values.dedup();
    let m = values.len();
    let top = s.iter().map(Simplex::dim).max().unwrap();

    let mut pairs = Vec::new();
    for p in 0..=top {
        let cycles: Vec<Vec<Bits>> = values
            .iter()
            .map(|&v| {
                let gens: Vec<usize> = (0..n).filter(|&i| s[i].dim() == p && s[i].value() <= v).collect();
                kernel(&gens, &images, n)
            })
            .collect();
        let boundaries: Vec<Vec<Bits>> = values
            .iter()
            .map(|&v| {
                (0..n)
                    .filter(|&i| s[i].dim() == p + 1 && s[i].value() <= v)
                    .map(|i| images[i].clone())
                    .collect()
            })
            .collect();
        let rank_b: Vec<usize> = boundaries.iter().map(|b| rank(b)).collect();
        // persistent[i][j] for i <= j
        let persistent = |i: usize, j: usize| -> i64 {
            let mut all = cycles[i].clone();
            all.extend(boundaries[j].iter().cloned());
            (rank(&all) - rank_b[j]) as i64
        };
        let mut table = vec![vec![0i64; m]; m];
        for (i, row) in table.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate().skip(i) {
                *cell = persistent(i, j);
            }
        }
        let beta = |i: isize, j: usize| -> i64 {
            if i < 0 {
                0
            } else {
                table[i as usize][j]
            }
        };
        for i in 0..m {
            let ii = i as isize;
            for j in i + 1..m {
                let mu = beta(ii, j - 1) - beta(ii, j) - beta(ii - 1, j - 1) + beta(ii - 1, j);
                for _ in 0..mu {
                    pairs.push(PersistencePair::new(p, values[i], values[j]));
                }
            }
            let mu = beta(ii, m - 1) - beta(ii - 1, m - 1);
            for _ in 0..mu {
                pairs.push(PersistencePair::new(p, values[i], f64::INFINITY));
            }
        }
    }
    PersistenceDiagram::new(pairs)
}

fn sup_dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).abs().max((a.1 - b.1).abs())
}

/// Exhaustive search over all partial matchings between two finite
/// diagrams, unmatched points going to their diagonal projection.
/// `order = None` gives the bottleneck distance, `Some(p)` the
/// p-Wasserstein distance.
pub fn matching_distance(a: &[(f64, f64)], b: &[(f64, f64)], order: Option<f64>) -> f64 {
    fn rec(
        i: usize,
        a: &[(f64, f64)],
        b: &[(f64, f64)],
        used: &mut Vec<bool>,
        costs: &mut Vec<f64>,
        order: Option<f64>,
        best: &mut f64,
    ) {
        if i == a.len() {
            let mut all = costs.clone();
            for (j, &y) in b.iter().enumerate() {
                if !used[j] {
                    all.push((y.1 - y.0) / 2.0);
                }
            }
            let total = match order {
                None => all.iter().copied().fold(0.0, f64::max),
                Some(p) => all.iter().map(|c| c.powf(p)).sum::<f64>(),
            };
            if total < *best {
                *best = total;
            }
            return;
        }
        costs.push((a[i].1 - a[i].0) / 2.0);
        rec(i + 1, a, b, used, costs, order, best);
        costs.pop();
        for j in 0..b.len() {
            if !used[j] {
                used[j] = true;
                costs.push(sup_dist(a[i], b[j]));
                rec(i + 1, a, b, used, costs, order, best);
                costs.pop();
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    rec(0, a, b, &mut vec![false; b.len()], &mut Vec::new(), order, &mut best);
    match order {
        None => best,
        Some(p) => best.powf(1.0 / p),
    }
}

/// `sup { m >= 0 : #{(b, d) : b <= t - m, t + m <= d} >= k }`, or 0 when the
/// set is empty.
pub fn landscape_by_sup(points: &[(f64, f64)], k: usize, t: f64) -> f64 {
    // b <= t - m and t + m <= d, rearranged so that m is compared directly
    let alive_through = |m: f64| points.iter().filter(|&&(b, d)| m <= t - b && m <= d - t).count();
    let mut best = 0.0f64;
    for &(b, d) in points {
        for m in [t - b, d - t] {
            if m >= 0.0 && m > best && alive_through(m) >= k {
                best = m;
            }
        }
    }
    best
}

/// Complete-linkage agglomeration recomputing every inter-cluster distance
/// from scratch at every step. Cluster ids follow the usual convention:
/// leaves are `0..n`, the cluster created by merge `s` is `n + s`.
pub fn complete_linkage_naive(dm: &DistanceMatrix) -> Vec<(usize, usize, f64)> {
    let n = dm.len();
    let mut clusters: Vec<(usize, Vec<usize>)> = (0..n).map(|i| (i, vec![i])).collect();
    let mut merges = Vec::new();
    while clusters.len() > 1 {
        let mut best: Option<(f64, usize, usize, usize, usize)> = None;
        for x in 0..clusters.len() {
            for y in x + 1..clusters.len() {
                let mut d = 0.0f64;
                for &p in &clusters[x].1 {
                    for &q in &clusters[y].1 {
                        d = d.max(dm.get(p, q));
                    }
                }
                let (lo, hi) = {
                    let (u, v) = (clusters[x].0, clusters[y].0);
                    (u.min(v), u.max(v))
                };
                let better = match best {
                    None => true,
                    Some((bd, blo, bhi, _, _)) => (d, lo, hi) < (bd, blo, bhi),
                };
                if better {
                    best = Some((d, lo, hi, x, y));
                }
            }
        }
        let (d, lo, hi, x, y) = best.unwrap();
        let mut members = clusters[x].1.clone();
        members.extend(clusters[y].1.iter().copied());
        clusters.remove(y);
        clusters.remove(x);
        clusters.push((n + merges.len(), members));
        merges.push((lo, hi, d));
    }
    merges
}
