//! Exact maximum discrepancy over balls for small inputs in `d <= 3`.
//!
//! Every subset cut out by a closed ball (points in general position) is
//! either a singleton, the empty set, or is obtained from a ball whose
//! boundary passes through `d` of the points, with those boundary points
//! included or excluded independently. The centers of balls through `d`
//! fixed points form a line `M + t n`, and a point `x` lies strictly inside
//! iff `|x - M|^2 - h^2 < 2 t <x - M, n>`. Sweeping `t` visits every such
//! subset.

use std::collections::HashMap;

use rayon::prelude::*;

use super::Coreset;
use crate::error::{Error, Result};
use crate::points::{check_same_dim, WeightedPointSet};
use crate::sum::{dot, sq_dist};

/// Largest number of distinct locations handled in the plane.
pub const MAX_BALL_POINTS_2D: usize = 500;
/// Largest number of distinct locations handled in space.
pub const MAX_BALL_POINTS_3D: usize = 150;

/// Distinct locations of `P` union `S` with their signed normalized weight
/// `s(x)/W_S - p(x)/W_P`.
fn signed_locations(p: &WeightedPointSet, s: &WeightedPointSet) -> (Vec<f64>, Vec<f64>) {
    let mut slot: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut coords = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    let (wp, ws) = (p.total_mass(), s.total_mass());
    let parts = p
        .iter()
        .map(|(x, m)| (x, -m / wp))
        .chain(s.iter().map(|(x, m)| (x, m / ws)));
    for (x, v) in parts {
        let key: Vec<u64> = x.iter().map(|c| c.to_bits()).collect();
        let i = *slot.entry(key).or_insert_with(|| {
            coords.extend_from_slice(x);
            values.push(0.0);
            values.len() - 1
        });
        values[i] += v;
    }
    (coords, values)
}

/// `max |xi_S(S cap A)/W_S - xi_P(P cap A)/W_P|` over all balls `A`.
///
/// Supports `d = 1` (any size), `d = 2` with at most
/// [`MAX_BALL_POINTS_2D`] distinct locations and `d = 3` with at most
/// [`MAX_BALL_POINTS_3D`]. Cocircular (cospherical) configurations beyond
/// the defining points are assumed absent.
pub fn ball_discrepancy(p: &WeightedPointSet, s: &Coreset) -> Result<f64> {
    check_same_dim(p, &s.subset)?;
    if p.is_empty() || s.is_empty() {
        return Err(Error::EmptyInput("point set for ball discrepancy"));
    }
    let d = p.dim();
    let (coords, values) = signed_locations(p, &s.subset);
    let m = values.len();
    match d {
        1 => Ok(intervals(&coords, &values)),
        2 if m <= MAX_BALL_POINTS_2D => Ok(pencils(2, &coords, &values)),
        3 if m <= MAX_BALL_POINTS_3D => Ok(pencils(3, &coords, &values)),
        2 | 3 => Err(Error::Unsupported(format!(
            "ball discrepancy with {m} distinct points in d = {d}"
        ))),
        _ => Err(Error::Unsupported(format!("ball discrepancy in d = {d}"))),
    }
}

fn intervals(coords: &[f64], values: &[f64]) -> f64 {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| coords[a].total_cmp(&coords[b]));
    let (mut prefix, mut lo, mut hi) = (0.0f64, 0.0f64, 0.0f64);
    for i in order {
        prefix += values[i];
        lo = lo.min(prefix);
        hi = hi.max(prefix);
    }
    hi - lo
}

/// Center line and squared radius of the balls through the given points, or
/// `None` when the points are affinely dependent.
fn pencil(d: usize, pts: &[&[f64]]) -> Option<(Vec<f64>, Vec<f64>, f64)> {
    if d == 2 {
        let (a, b) = (pts[0], pts[1]);
        let dir = [b[0] - a[0], b[1] - a[1]];
        let len = dir[0].hypot(dir[1]);
        if len == 0.0 {
            return None;
        }
        let mid = vec![(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
        let h2 = sq_dist(a, &mid);
        Some((mid, vec![-dir[1] / len, dir[0] / len], h2))
    } else {
        let (a, b, c) = (pts[0], pts[1], pts[2]);
        let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
        let w = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
        let n = cross(&u, &w);
        let n2 = dot(&n, &n);
        if n2 <= 1e-24 * dot(&u, &u) * dot(&w, &w) {
            return None;
        }
        let t1 = cross(&n, &u);
        let t2 = cross(&w, &n);
        let (uu, ww) = (dot(&u, &u), dot(&w, &w));
        let mid: Vec<f64> = (0..3)
            .map(|k| a[k] + (ww * t1[k] + uu * t2[k]) / (2.0 * n2))
            .collect();
        let h2 = sq_dist(a, &mid);
        let len = n2.sqrt();
        Some((mid, n.iter().map(|x| x / len).collect(), h2))
    }
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn sweep(d: usize, coords: &[f64], values: &[f64], defining: &[usize]) -> f64 {
    let pts: Vec<&[f64]> = defining
        .iter()
        .map(|&i| &coords[i * d..(i + 1) * d])
        .collect();
    let Some((mid, normal, h2)) = pencil(d, &pts) else {
        return 0.0;
    };
    let variants: Vec<f64> = (0..1usize << defining.len())
        .map(|mask| {
            defining
                .iter()
                .enumerate()
                .filter(|(b, _)| mask >> b & 1 == 1)
                .map(|(_, &i)| values[i])
                .sum()
        })
        .collect();
    let mut base = 0.0;
    let mut events: Vec<(f64, f64)> = Vec::with_capacity(values.len());
    let mut diff = vec![0.0; d];
    for (i, &v) in values.iter().enumerate() {
        if defining.contains(&i) {
            continue;
        }
        let x = &coords[i * d..(i + 1) * d];
        for k in 0..d {
            diff[k] = x[k] - mid[k];
        }
        let a = dot(&diff, &diff) - h2;
        let b = 2.0 * dot(&diff, &normal);
        if b == 0.0 {
            if a < 0.0 {
                base += v;
            }
        } else if b > 0.0 {
            events.push((a / b, v));
        } else {
            base += v;
            events.push((a / b, -v));
        }
    }
    events.sort_by(|x, y| x.0.total_cmp(&y.0));
    let score = |base: f64| {
        variants
            .iter()
            .map(|w| (base + w).abs())
            .fold(0.0, f64::max)
    };
    let mut best = score(base);
    let mut i = 0;
    while i < events.len() {
        let t = events[i].0;
        while i < events.len() && events[i].0 == t {
            base += events[i].1;
            i += 1;
        }
        best = best.max(score(base));
    }
    best
}

fn pencils(d: usize, coords: &[f64], values: &[f64]) -> f64 {
    let m = values.len();
    let singles = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let tuples = (0..m).into_par_iter().map(|i| {
        let mut best = 0.0f64;
        for j in i + 1..m {
            if d == 2 {
                best = best.max(sweep(d, coords, values, &[i, j]));
            } else {
                for k in j + 1..m {
                    best = best.max(sweep(d, coords, values, &[i, j, k]));
                }
            }
        }
        best
    });
    tuples.reduce(|| 0.0, f64::max).max(singles)
}
