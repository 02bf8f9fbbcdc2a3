//! Bi-objective indicators over a reference box `(-inf, r1) x (-inf, r2)`.

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// `a <= b` componentwise with `a != b`.
pub fn dominates(a: &Point, b: &Point) -> bool {
    a[0] <= b[0] && a[1] <= b[1] && a != b
}

pub fn weakly_dominates(a: &Point, b: &Point) -> bool {
    a[0] <= b[0] && a[1] <= b[1]
}

fn inside(p: &Point, r: &Point) -> bool {
    p[0] < r[0] && p[1] < r[1]
}

/// Non-dominated points strictly inside the reference box, sorted by the
/// first objective (ascending) with duplicates removed.
pub fn front(points: &[Point], r: &Point) -> Vec<Point> {
    let mut sorted: Vec<Point> = points.iter().copied().filter(|p| inside(p, r)).collect();
    sorted.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let mut out: Vec<Point> = Vec::with_capacity(sorted.len());
    for p in sorted {
        if out.last().is_none_or(|last| p[1] < last[1]) {
            out.push(p);
        }
    }
    out
}

/// Area of the region dominated by `points` and dominating `r`.
pub fn hypervolume_2d(points: &[Point], r: &Point) -> f64 {
    let mut volume = 0.0;
    let mut ceiling = r[1];
    for p in front(points, r) {
        volume += (r[0] - p[0]) * (ceiling - p[1]);
        ceiling = p[1];
    }
    volume
}

/// Whether `p` lies in the closed region covered by the empirical front:
/// weakly dominated by a point of `set`, or outside the reference box.
pub fn covered(p: &Point, set: &[Point], r: &Point) -> bool {
    !inside(p, r) || set.iter().any(|s| weakly_dominates(s, p))
}

/// `HV(set + {p}) - HV(set)`.
pub fn hvi(p: &Point, set: &[Point], r: &Point) -> f64 {
    if covered(p, set, r) {
        return 0.0;
    }
    let mut joined = set.to_vec();
    joined.push(*p);
    hypervolume_2d(&joined, r) - hypervolume_2d(set, r)
}

/// Distance from `p` to the axis-aligned segment `{(x, y) : x0 <= x <= x1}`
/// at height `y`, or the vertical one when `vertical` (coordinates swapped).
fn segment_distance(p: &Point, fixed: f64, from: f64, to: f64, vertical: bool) -> f64 {
    let (along, across) = if vertical { (p[1], p[0]) } else { (p[0], p[1]) };
    let (lo, hi) = if from <= to { (from, to) } else { (to, from) };
    let gap = (lo - along).max(along - hi).max(0.0);
    gap.hypot(across - fixed)
}

/// Distance to the boundary of the region covered by the empirical front
/// of `set` within the reference box: the line `f2 = r2` left of the
/// front, the staircase through the non-dominated points, and the line
/// `f1 = r1` below it.
pub fn staircase_distance(p: &Point, set: &[Point], r: &Point) -> f64 {
    let pts = front(set, r);
    let (Some(first), Some(last)) = (pts.first(), pts.last()) else {
        let top = segment_distance(p, r[1], f64::NEG_INFINITY, r[0], false);
        let right = segment_distance(p, r[0], f64::NEG_INFINITY, r[1], true);
        return top.min(right);
    };
    let mut best = segment_distance(p, r[1], f64::NEG_INFINITY, first[0], false);
    best = best.min(segment_distance(p, first[0], first[1], r[1], true));
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        best = best.min(segment_distance(p, a[1], a[0], b[0], false));
        best = best.min(segment_distance(p, b[0], b[1], a[1], true));
    }
    best = best.min(segment_distance(p, last[1], last[0], r[0], false));
    best.min(segment_distance(p, r[0], f64::NEG_INFINITY, last[1], true))
}

/// Distance from a covered point to the empirical Pareto front of `set`.
pub fn epf_distance(p: &Point, set: &[Point], r: &Point) -> Result<f64> {
    if set.is_empty() {
        return Err(Error::InvalidParameter(
            "empirical front of an empty set".into(),
        ));
    }
    Ok(staircase_distance(p, set, r))
}

/// Hypervolume improvement for uncovered points, minus the distance to the
/// empirical front for covered ones.
pub fn uhvi(p: &Point, set: &[Point], r: &Point) -> f64 {
    if covered(p, set, r) {
        -staircase_distance(p, set, r)
    } else {
        hvi(p, set, r)
    }
}
