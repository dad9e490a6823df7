//! Persistence landscapes stored exactly as piecewise-linear functions.

use std::fmt::Write as _;

use thiserror::Error;

use crate::persistence::PersistenceDiagram;
use crate::svg::{self, SvgCanvas};

#[derive(Debug, Error, PartialEq)]
pub enum LandscapeError {
    #[error("cannot average an empty list of landscapes")]
    EmptyMean,
}

/// Levels `lambda_1 >= lambda_2 >= ...`, each a list of critical points
/// `(t, value)` sorted by `t`, linear in between and zero outside.
#[derive(Debug, Clone, PartialEq)]
pub struct Landscape {
    levels: Vec<Vec<(f64, f64)>>,
    k_max: usize,
}

impl Landscape {
    pub fn zero(k_max: usize) -> Self {
        Landscape {
            levels: Vec::new(),
            k_max,
        }
    }

    /// Stored levels; levels past the end are identically zero.
    pub fn levels(&self) -> &[Vec<(f64, f64)>] {
        &self.levels
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    /// Smallest interval outside which every level vanishes.
    pub fn domain(&self) -> Option<(f64, f64)> {
        let mut it = self.levels.iter().filter_map(|l| Some((l.first()?.0, l.last()?.0)));
        let first = it.next()?;
        Some(it.fold(first, |(lo, hi), (a, b)| (lo.min(a), hi.max(b))))
    }

    pub fn eval(&self, k: usize, t: f64) -> f64 {
        match k.checked_sub(1).and_then(|i| self.levels.get(i)) {
            Some(level) => eval_level(level, t),
            None => 0.0,
        }
    }

    /// CSV rows `k,t,value` at every critical point.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,t,value\n");
        for (i, level) in self.levels.iter().enumerate() {
            for &(t, v) in level {
                let _ = writeln!(out, "{},{:?},{:?}", i + 1, t, v);
            }
        }
        out
    }

    /// Overlaid polylines, one colour per level.
    pub fn to_svg(&self) -> String {
        let (w, h) = (640.0, 360.0);
        let mut canvas = SvgCanvas::new(w, h);
        let (x0, x1, y0, y1) = (50.0, 620.0, 330.0, 20.0);
        canvas.line(x0, y0, x1, y0, "#000", 1.0);
        canvas.line(x0, y0, x0, y1, "#000", 1.0);
        if let Some((lo, hi)) = self.domain() {
            let top = self
                .levels
                .iter()
                .flatten()
                .map(|p| p.1)
                .fold(0.0f64, f64::max)
                .max(f64::MIN_POSITIVE);
            let span = (hi - lo).max(f64::MIN_POSITIVE);
            let sx = |t: f64| x0 + (t - lo) / span * (x1 - x0);
            let sy = |v: f64| y0 - v / top * (y0 - y1);
            for (i, level) in self.levels.iter().enumerate() {
                let pts: Vec<(f64, f64)> = level.iter().map(|&(t, v)| (sx(t), sy(v))).collect();
                canvas.polyline(&pts, svg::palette(i), 1.5);
                canvas.text(x1 - 60.0, y1 + 14.0 * (i as f64 + 1.0), &format!("λ{}", i + 1), 11.0, svg::palette(i));
            }
            canvas.text(x0, h - 8.0, &format!("{lo:.3}"), 10.0, "#000");
            canvas.text(x1 - 40.0, h - 8.0, &format!("{hi:.3}"), 10.0, "#000");
            canvas.text(5.0, y1 + 10.0, &format!("{top:.3}"), 10.0, "#000");
        }
        canvas.finish()
    }
}

fn eval_level(level: &[(f64, f64)], t: f64) -> f64 {
    let (Some(first), Some(last)) = (level.first(), level.last()) else {
        return 0.0;
    };
    if t < first.0 || t > last.0 {
        return 0.0;
    }
    let k = level.partition_point(|p| p.0 <= t);
    if k == level.len() {
        return last.1;
    }
    let (a, b) = (level[k - 1], level[k]);
    if b.0 == a.0 {
        return a.1.max(b.1);
    }
    a.1 + (b.1 - a.1) * (t - a.0) / (b.0 - a.0)
}

/// Landscape of the dimension-`dim` pairs, keeping at most `k_max` levels.
///
/// Essential pairs are truncated at `death_cap` when given and skipped
/// otherwise. Zero-persistence pairs contribute nothing.
pub fn landscape(d: &PersistenceDiagram, dim: usize, k_max: usize, death_cap: Option<f64>) -> Landscape {
    let mut bars: Vec<(f64, f64)> = d
        .points(dim)
        .into_iter()
        .filter_map(|(b, de)| match (de.is_finite(), death_cap) {
            (true, _) => Some((b, de)),
            (false, Some(cap)) => Some((b, cap)),
            (false, None) => None,
        })
        .filter(|&(b, de)| de > b)
        .collect();
    bars.sort_by(bar_order);

    let mut levels = Vec::new();
    while !bars.is_empty() && levels.len() < k_max {
        levels.push(next_level(&mut bars));
    }
    Landscape { levels, k_max }
}

/// Birth ascending, death descending.
fn bar_order(x: &(f64, f64), y: &(f64, f64)) -> std::cmp::Ordering {
    x.0.total_cmp(&y.0).then(y.1.total_cmp(&x.1))
}

/// Peels the upper envelope off `bars`, leaving behind the pieces that feed
/// the next level.
fn next_level(bars: &mut Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    let (b, mut d) = bars.remove(0);
    let mut level = vec![(b, 0.0), ((b + d) / 2.0, (d - b) / 2.0)];
    let mut p = 0;
    loop {
        let Some(q) = (p..bars.len()).find(|&q| bars[q].1 > d) else {
            level.push((d, 0.0));
            break;
        };
        let (nb, nd) = bars.remove(q);
        p = q;
        if nb > d {
            level.push((d, 0.0));
        }
        if nb >= d {
            level.push((nb, 0.0));
        } else {
            // crossing of the falling edge of (b, d) with the rising edge of (nb, nd)
            level.push(((nb + d) / 2.0, (d - nb) / 2.0));
            let piece = (nb, d);
            let mut pos = q;
            while pos < bars.len() && bar_order(&bars[pos], &piece).is_lt() {
                pos += 1;
            }
            bars.insert(pos, piece);
            p = pos + 1;
        }
        level.push(((nb + nd) / 2.0, (nd - nb) / 2.0));
        d = nd;
    }
    level
}

/// Pointwise mean, exact on the union of the critical points of each level.
pub fn mean_landscape(ls: &[Landscape]) -> Result<Landscape, LandscapeError> {
    if ls.is_empty() {
        return Err(LandscapeError::EmptyMean);
    }
    let depth = ls.iter().map(|l| l.levels.len()).max().unwrap_or(0);
    let k_max = ls.iter().map(|l| l.k_max).max().unwrap_or(0);
    let n = ls.len() as f64;
    let levels = (0..depth)
        .map(|i| {
            let mut ts: Vec<f64> = ls
                .iter()
                .filter_map(|l| l.levels.get(i))
                .flat_map(|lv| lv.iter().map(|p| p.0))
                .collect();
            ts.sort_by(f64::total_cmp);
            ts.dedup();
            ts.into_iter()
                .map(|t| {
                    let sum: f64 = ls.iter().map(|l| l.eval(i + 1, t)).sum();
                    (t, sum / n)
                })
                .collect()
        })
        .collect();
    Ok(Landscape { levels, k_max })
}

/// Free-function form of [`Landscape::eval`].
pub fn eval_landscape(l: &Landscape, k: usize, t: f64) -> f64 {
    l.eval(k, t)
}
