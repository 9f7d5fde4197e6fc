//! Summation helpers.
//!
//! Double sums over point pairs use pairwise (tree) summation, which keeps the
//! rounding error at O(log n) ulps and is independent of the thread count
//! because the tree shape depends only on the length.

const LEAF: usize = 32;

/// Pairwise sum of `f(0) + ... + f(n-1)`.
pub fn pairwise_sum_by<F: Fn(usize) -> f64>(n: usize, f: F) -> f64 {
    fn rec<F: Fn(usize) -> f64>(lo: usize, hi: usize, f: &F) -> f64 {
        let len = hi - lo;
        if len <= LEAF {
            let mut s = 0.0;
            for i in lo..hi {
                s += f(i);
            }
            s
        } else {
            let mid = lo + len / 2;
            rec(lo, mid, f) + rec(mid, hi, f)
        }
    }
    rec(0, n, &f)
}

/// Two independent pairwise sums over the same index range, evaluating `f`
/// once per index.
pub fn pairwise_sum2_by<F: Fn(usize) -> (f64, f64)>(n: usize, f: F) -> (f64, f64) {
    fn rec<F: Fn(usize) -> (f64, f64)>(lo: usize, hi: usize, f: &F) -> (f64, f64) {
        let len = hi - lo;
        if len <= LEAF {
            let mut s = (0.0, 0.0);
            for i in lo..hi {
                let v = f(i);
                s.0 += v.0;
                s.1 += v.1;
            }
            s
        } else {
            let mid = lo + len / 2;
            let (a, b) = (rec(lo, mid, f), rec(mid, hi, f));
            (a.0 + b.0, a.1 + b.1)
        }
    }
    rec(0, n, &f)
}

pub fn pairwise_sum(values: &[f64]) -> f64 {
    pairwise_sum_by(values.len(), |i| values[i])
}

/// Neumaier-compensated sum; used where mass must be conserved to the last bit
/// we can reasonably get.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[inline]
pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        s += d * d;
    }
    s
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
