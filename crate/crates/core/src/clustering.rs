//! Complete-linkage agglomerative clustering and dendrogram cuts.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::metricspace::DistanceMatrix;

#[derive(Debug, Error, PartialEq)]
pub enum ClusterError {
    #[error("cannot cut {n} points into {k} clusters")]
    InvalidCount { k: usize, n: usize },
    #[error("invalid cut rule {0:?} (expected first-gap[:g], threshold:t or count:k)")]
    InvalidRule(String),
}

/// One merge step. Leaves are clusters `0..n`; merge `s` creates cluster
/// `n + s`. `left < right`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dendrogram {
    merges: Vec<Merge>,
    leaf_count: usize,
}

impl Dendrogram {
    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    pub fn leaf_count(&self) -> usize {
        self.leaf_count
    }

    /// Leaf labels after applying the first `steps` merges, numbered by
    /// first appearance.
    pub fn assignment_after(&self, steps: usize) -> Vec<usize> {
        let n = self.leaf_count;
        let mut parent: Vec<usize> = (0..n + steps).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for (s, m) in self.merges[..steps].iter().enumerate() {
            let id = n + s;
            let a = find(&mut parent, m.left);
            let b = find(&mut parent, m.right);
            parent[a] = id;
            parent[b] = id;
        }
        let mut label_of_root = std::collections::HashMap::new();
        (0..n)
            .map(|leaf| {
                let r = find(&mut parent, leaf);
                let next = label_of_root.len();
                *label_of_root.entry(r).or_insert(next)
            })
            .collect()
    }
}

/// Complete-linkage agglomeration. At each step the pair of clusters with
/// the smallest maximum inter-point distance is merged; ties go to the
/// pair with the smallest (lower id, higher id).
pub fn agglomerate(dm: &DistanceMatrix) -> Dendrogram {
    let n = dm.len();
    if n <= 1 {
        return Dendrogram {
            merges: Vec::new(),
            leaf_count: n,
        };
    }
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let v = dm.get(i, j);
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
    }
    // cluster id living in each slot
    let mut id: Vec<usize> = (0..n).collect();
    let mut active = vec![true; n];
    let key = |d: &[f64], id: &[usize], a: usize, b: usize| (d[a * n + b], id[a].min(id[b]), id[a].max(id[b]));
    let less = |x: (f64, usize, usize), y: (f64, usize, usize)| x.0.total_cmp(&y.0).then((x.1, x.2).cmp(&(y.1, y.2))).is_lt();

    let nearest = |d: &[f64], id: &[usize], active: &[bool], a: usize| -> Option<usize> {
        let mut best: Option<usize> = None;
        for b in 0..n {
            if b != a && active[b] && best.map_or(true, |c| less(key(d, id, a, b), key(d, id, a, c))) {
                best = Some(b);
            }
        }
        best
    };
    let mut nn: Vec<Option<usize>> = (0..n).map(|a| nearest(&d, &id, &active, a)).collect();

    let mut merges = Vec::with_capacity(n - 1);
    for step in 0..n - 1 {
        let mut best: Option<(usize, usize)> = None;
        for a in (0..n).filter(|&a| active[a]) {
            let b = nn[a].expect("at least two active clusters");
            if best.map_or(true, |(x, y)| less(key(&d, &id, a, b), key(&d, &id, x, y))) {
                best = Some((a, b));
            }
        }
        let (a, b) = best.unwrap();
        let (keep, gone) = (a.min(b), a.max(b));
        merges.push(Merge {
            left: id[a].min(id[b]),
            right: id[a].max(id[b]),
            distance: d[a * n + b],
        });
        active[gone] = false;
        id[keep] = n + step;
        for x in (0..n).filter(|&x| active[x] && x != keep) {
            let v = d[keep * n + x].max(d[gone * n + x]);
            d[keep * n + x] = v;
            d[x * n + keep] = v;
        }
        nn[gone] = None;
        nn[keep] = nearest(&d, &id, &active, keep);
        for x in (0..n).filter(|&x| active[x] && x != keep) {
            let c = nn[x].unwrap();
            if c == keep || c == gone {
                nn[x] = nearest(&d, &id, &active, x);
            } else if less(key(&d, &id, x, keep), key(&d, &id, x, c)) {
                nn[x] = Some(keep);
            }
        }
    }
    Dendrogram { merges, leaf_count: n }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CutRule {
    /// Apply every merge at distance at most the threshold.
    Threshold(f64),
    /// Stop when this many clusters remain.
    Count(usize),
    /// Cut at the largest relative gap `(d[i+1] - d[i]) / d[i]` between
    /// consecutive merge distances if it exceeds `factor`; otherwise keep
    /// one cluster.
    FirstGap { factor: f64 },
}

impl Default for CutRule {
    fn default() -> Self {
        CutRule::FirstGap { factor: 2.0 }
    }
}

impl fmt::Display for CutRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CutRule::Threshold(t) => write!(f, "threshold:{t}"),
            CutRule::Count(k) => write!(f, "count:{k}"),
            CutRule::FirstGap { factor } => write!(f, "first-gap:{factor}"),
        }
    }
}

impl FromStr for CutRule {
    type Err = ClusterError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ClusterError::InvalidRule(s.to_string());
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        match (name, arg) {
            ("first-gap", None) => Ok(CutRule::default()),
            ("first-gap", Some(a)) => match a.parse::<f64>() {
                Ok(g) if g > 0.0 => Ok(CutRule::FirstGap { factor: g }),
                _ => Err(bad()),
            },
            ("threshold", Some(a)) => match a.parse::<f64>() {
                Ok(t) if t >= 0.0 => Ok(CutRule::Threshold(t)),
                _ => Err(bad()),
            },
            ("count", Some(a)) => a.parse().map(CutRule::Count).map_err(|_| bad()),
            _ => Err(bad()),
        }
    }
}

/// Leaf labels `0..k` numbered by first appearance.
pub fn cut(dg: &Dendrogram, rule: CutRule) -> Result<Vec<usize>, ClusterError> {
    let n = dg.leaf_count();
    let merges = dg.merges();
    let steps = match rule {
        CutRule::Threshold(t) => merges.iter().take_while(|m| m.distance <= t).count(),
        CutRule::Count(k) => {
            if k == 0 || k > n {
                return Err(ClusterError::InvalidCount { k, n });
            }
            n - k
        }
        CutRule::FirstGap { factor } => {
            let mut best: Option<(f64, usize)> = None;
            for (i, w) in merges.windows(2).enumerate() {
                let ratio = if w[0].distance > 0.0 {
                    (w[1].distance - w[0].distance) / w[0].distance
                } else if w[1].distance > 0.0 {
                    f64::INFINITY
                } else {
                    continue;
                };
                if best.map_or(true, |(r, _)| ratio > r) {
                    best = Some((ratio, i + 1));
                }
            }
            match best {
                Some((r, steps)) if r > factor => steps,
                _ => merges.len(),
            }
        }
    };
    Ok(dg.assignment_after(steps))
}

/// Groups leaves by label, each group sorted, groups ordered by label.
pub fn groups(labels: &[usize]) -> Vec<Vec<usize>> {
    let k = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut out = vec![Vec::new(); k];
    for (i, &l) in labels.iter().enumerate() {
        out[l].push(i);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metricspace::{pairwise_distances, Metric, PointCloud};
    use crate::oracle::complete_linkage_naive;
    use proptest::prelude::*;

    fn line(xs: &[f64]) -> DistanceMatrix {
        let pts = xs.iter().map(|&x| vec![x]).collect();
        pairwise_distances(&PointCloud::new(pts).unwrap(), Metric::Euclidean).unwrap()
    }

    #[test]
    fn trivial_sizes() {
        assert!(agglomerate(&line(&[3.0])).merges().is_empty());
        let dg = agglomerate(&line(&[1.0, 3.5]));
        assert_eq!(dg.merges(), &[Merge { left: 0, right: 1, distance: 2.5 }]);
        assert_eq!(cut(&dg, CutRule::default()).unwrap(), vec![0, 0]);
    }

    #[test]
    fn line_example() {
        let dg = agglomerate(&line(&[0.0, 0.1, 10.0, 10.1]));
        let d: Vec<f64> = dg.merges().iter().map(|m| m.distance).collect();
        assert!((d[0] - 0.1).abs() < 1e-12 && (d[1] - 0.1).abs() < 1e-9);
        assert!((d[2] - 10.1).abs() < 1e-12);
        assert_eq!(cut(&dg, CutRule::default()).unwrap(), vec![0, 0, 1, 1]);
        assert_eq!(cut(&dg, CutRule::Count(4)).unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(cut(&dg, CutRule::Threshold(1.0)).unwrap(), vec![0, 0, 1, 1]);
        assert_eq!(
            cut(&dg, CutRule::Count(5)),
            Err(ClusterError::InvalidCount { k: 5, n: 4 })
        );
    }

    #[test]
    fn uniform_chain_is_not_split() {
        let xs: Vec<f64> = (0..9).map(|i| (i as f64 * 0.3).sin()).collect();
        let dg = agglomerate(&line(&xs));
        assert_eq!(cut(&dg, CutRule::default()).unwrap(), vec![0; 9]);
        // a larger gap factor than the one present keeps everything together
        let dg = agglomerate(&line(&[0.0, 1.0, 4.5]));
        assert_eq!(cut(&dg, CutRule::default()).unwrap(), vec![0, 0, 1]);
        assert_eq!(cut(&dg, CutRule::FirstGap { factor: 4.0 }).unwrap(), vec![0, 0, 0]);
    }

    #[test]
    fn identical_points_stay_together() {
        let dg = agglomerate(&line(&[2.0; 5]));
        assert_eq!(cut(&dg, CutRule::default()).unwrap(), vec![0; 5]);
    }

    #[test]
    fn ties_prefer_lower_ids() {
        let dg = agglomerate(&line(&[0.0, 1.0, 2.0, 3.0]));
        let pairs: Vec<(usize, usize)> = dg.merges().iter().map(|m| (m.left, m.right)).collect();
        assert_eq!(pairs, vec![(0, 1), (2, 3), (4, 5)]);
    }

    #[test]
    fn rule_parsing() {
        assert_eq!("first-gap".parse::<CutRule>().unwrap(), CutRule::FirstGap { factor: 2.0 });
        assert_eq!("first-gap:3".parse::<CutRule>().unwrap(), CutRule::FirstGap { factor: 3.0 });
        assert_eq!("threshold:0.5".parse::<CutRule>().unwrap(), CutRule::Threshold(0.5));
        assert_eq!("count:3".parse::<CutRule>().unwrap(), CutRule::Count(3));
        assert!("count".parse::<CutRule>().is_err());
        assert!("ward".parse::<CutRule>().is_err());
        let r = CutRule::FirstGap { factor: 2.5 };
        assert_eq!(r.to_string().parse::<CutRule>().unwrap(), r);
    }

    fn arb_dm() -> impl Strategy<Value = DistanceMatrix> {
        (1usize..=20).prop_flat_map(|n| {
            prop::collection::vec(0u32..40, n * (n - 1) / 2).prop_map(move |v| {
                let mut sq = vec![vec![0.0; n]; n];
                let mut it = v.into_iter();
                for i in 0..n {
                    for j in i + 1..n {
                        let x = f64::from(it.next().unwrap()) / 4.0;
                        sq[i][j] = x;
                        sq[j][i] = x;
                    }
                }
                DistanceMatrix::from_square(&sq, Metric::Euclidean)
            })
        })
    }

    fn partition(labels: &[usize]) -> Vec<Vec<usize>> {
        let mut g = groups(labels);
        g.sort();
        g
    }

    proptest! {
        // small integer distances give plenty of ties
        #[test]
        fn matches_naive(dm in arb_dm()) {
            let got: Vec<(usize, usize, f64)> =
                agglomerate(&dm).merges().iter().map(|m| (m.left, m.right, m.distance)).collect();
            prop_assert_eq!(got, complete_linkage_naive(&dm));
        }

        #[test]
        fn merges_nondecreasing(dm in arb_dm()) {
            let dg = agglomerate(&dm);
            prop_assert_eq!(dg.merges().len(), dm.len() - 1);
            prop_assert!(dg.merges().windows(2).all(|w| w[0].distance <= w[1].distance));
        }

        #[test]
        fn thresholds_are_nested(dm in arb_dm(), a in 0.0f64..10.0, b in 0.0f64..10.0) {
            let dg = agglomerate(&dm);
            let fine = cut(&dg, CutRule::Threshold(a.min(b))).unwrap();
            let coarse = cut(&dg, CutRule::Threshold(a.max(b))).unwrap();
            for i in 0..fine.len() {
                for j in 0..fine.len() {
                    if fine[i] == fine[j] {
                        prop_assert_eq!(coarse[i], coarse[j]);
                    }
                }
            }
        }

        #[test]
        fn permutation_relabels(pts in prop::collection::vec(-10.0f64..10.0, 2..15), shift in 1usize..15) {
            let n = pts.len();
            let perm: Vec<usize> = (0..n).map(|i| (i + shift) % n).collect();
            let moved: Vec<f64> = perm.iter().map(|&i| pts[i]).collect();
            let a = cut(&agglomerate(&line(&pts)), CutRule::default()).unwrap();
            let b = cut(&agglomerate(&line(&moved)), CutRule::default()).unwrap();
            let back: Vec<Vec<usize>> = groups(&b).into_iter().map(|g| {
                let mut g: Vec<usize> = g.into_iter().map(|p| perm[p]).collect();
                g.sort();
                g
            }).collect();
            let mut back = back;
            back.sort();
            prop_assert_eq!(partition(&a), back);
        }
    }
}
