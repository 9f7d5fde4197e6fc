//! Best-first branch and bound over a candidate grid.
//!
//! Nodes are popped in batches of fixed size and expanded in parallel; the
//! results are merged in batch order, so the outcome does not depend on the
//! thread count. A node is discarded only when its upper bound is strictly
//! below the incumbent, which keeps ties visible to the tie-break.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::GaussianKernel;
use crate::points::WeightedPointSet;
use crate::sum::{pairwise_sum_by, sq_dist};

const BATCH: usize = 64;

/// Batches between greedy dives.
const DIVE_EVERY: u64 = 256;

/// Relative slack on the prune test, absorbing rounding in the bounds.
const BOUND_SLACK: f64 = 1e-12;

pub(crate) enum Item<N, K> {
    /// A block of candidates with an upper bound on their objective.
    Branch(N, f64),
    /// A single candidate with its objective value.
    Leaf(K, f64),
}

pub(crate) trait BranchBound: Sync {
    type Node: Send;
    type Key: Ord + Clone + Send;
    /// Kernel evaluations per bound.
    fn cost(&self) -> f64;
    fn expand(&self, node: Self::Node) -> Vec<Item<Self::Node, Self::Key>>;
}

struct Entry<N> {
    bound: f64,
    seq: u64,
    node: N,
}

impl<N> PartialEq for Entry<N> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<N> Eq for Entry<N> {}
impl<N> PartialOrd for Entry<N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<N> Ord for Entry<N> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound
            .total_cmp(&other.bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

pub(crate) struct Best<K> {
    pub key: K,
    pub evaluated: u64,
}

fn prunable(bound: f64, best: Option<f64>, tolerance: f64) -> bool {
    match best {
        Some(v) if tolerance > 0.0 => bound <= v + tolerance,
        Some(v) => bound < v - BOUND_SLACK * v.abs(),
        None => false,
    }
}

/// Maximize over all leaves reachable from `roots`. Larger value wins, then
/// the smaller key. With `tolerance > 0` blocks that cannot beat the
/// incumbent by more than `tolerance` are dropped, so the result is only
/// within `tolerance` of the best leaf.
pub(crate) fn maximize<P: BranchBound>(
    problem: &P,
    roots: Vec<Item<P::Node, P::Key>>,
    tolerance: f64,
    work_limit: f64,
    advice: &'static str,
) -> Result<Option<Best<P::Key>>>
where
    P::Node: Send,
{
    // Run on a pool thread so each batch does not pay a cross-thread hand-off.
    rayon::scope(|_| maximize_inner(problem, roots, tolerance, work_limit, advice))
}

fn maximize_inner<P: BranchBound>(
    problem: &P,
    roots: Vec<Item<P::Node, P::Key>>,
    tolerance: f64,
    work_limit: f64,
    advice: &'static str,
) -> Result<Option<Best<P::Key>>> {
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    let mut best: Option<(f64, P::Key)> = None;
    let mut evaluated = 0u64;
    let mut work = 0.0;

    let mut merge = |items: Vec<Item<P::Node, P::Key>>,
                     heap: &mut BinaryHeap<Entry<P::Node>>,
                     best: &mut Option<(f64, P::Key)>,
                     evaluated: &mut u64| {
        for item in items {
            match item {
                Item::Branch(node, bound) => {
                    if !prunable(bound, best.as_ref().map(|b| b.0), tolerance) {
                        heap.push(Entry { bound, seq, node });
                        seq += 1;
                    }
                }
                Item::Leaf(key, value) => {
                    *evaluated += 1;
                    let better = match best {
                        None => true,
                        Some((v, k)) => value > *v || (value == *v && key < *k),
                    };
                    if better {
                        *best = Some((value, key));
                    }
                }
            }
        }
    };

    work += roots.len() as f64 * problem.cost();
    merge(roots, &mut heap, &mut best, &mut evaluated);

    let mut batch = Vec::with_capacity(BATCH);
    let mut rounds = 0u64;
    loop {
        if best.is_none() || rounds % DIVE_EVERY == 0 {
            // Greedy descent to a leaf, for an early incumbent.
            let mut next = heap.pop().map(|e| e.node);
            while let Some(node) = next.take() {
                let mut items = problem.expand(node);
                work += items.len() as f64 * problem.cost();
                let pick = items
                    .iter()
                    .enumerate()
                    .filter_map(|(i, it)| match it {
                        Item::Branch(_, b) => Some((i, *b)),
                        Item::Leaf(..) => None,
                    })
                    .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)));
                if let Some((i, _)) = pick {
                    if let Item::Branch(n, _) = items.remove(i) {
                        next = Some(n);
                    }
                }
                merge(items, &mut heap, &mut best, &mut evaluated);
            }
        }
        rounds += 1;
        batch.clear();
        while batch.len() < BATCH {
            match heap.peek() {
                Some(top) if !prunable(top.bound, best.as_ref().map(|b| b.0), tolerance) => {
                    batch.push(heap.pop().unwrap().node);
                }
                _ => break,
            }
        }
        if batch.is_empty() {
            break;
        }
        let expanded: Vec<Vec<Item<P::Node, P::Key>>> =
            batch.par_drain(..).map(|n| problem.expand(n)).collect();
        for items in expanded {
            work += items.len() as f64 * problem.cost();
            merge(items, &mut heap, &mut best, &mut evaluated);
        }
        if work > work_limit {
            return Err(Error::BudgetExceeded {
                work,
                limit: work_limit,
                advice,
            });
        }
    }
    Ok(best.map(|(_, key)| Best { key, evaluated }))
}

/// Upper bound on `sum_x mu(x) K(x, s)` for any single point `s`: with `x*`
/// the point of the set nearest `s`, every `x` is at least `|x - x*| / 2`
/// from `s`.
pub(crate) fn single_point_cap(kernel: &GaussianKernel, set: &WeightedPointSet) -> f64 {
    let s2 = 4.0 * kernel.sigma() * kernel.sigma();
    (0..set.len())
        .map(|a| {
            let pa = set.point(a);
            pairwise_sum_by(set.len(), |b| {
                set.mass(b) * (-sq_dist(pa, set.point(b)) / s2).exp()
            })
        })
        .fold(0.0, f64::max)
}

/// `min` of the row-capped and column-capped sums of `mu_a nu_b t(a, b)`,
/// where `t` bounds the kernel value of each pair.
pub(crate) fn capped_sum(
    p: &WeightedPointSet,
    q: &WeightedPointSet,
    caps: (f64, f64),
    t: impl Fn(usize, usize) -> f64,
) -> f64 {
    let (np, nq) = (p.len(), q.len());
    let mut terms = vec![0.0; np * nq];
    for a in 0..np {
        for b in 0..nq {
            terms[a * nq + b] = t(a, b);
        }
    }
    let by_q = pairwise_sum_by(nq, |b| {
        let s = pairwise_sum_by(np, |a| p.mass(a) * terms[a * nq + b]);
        q.mass(b) * s.min(caps.0)
    });
    let by_p = pairwise_sum_by(np, |a| {
        let s = pairwise_sum_by(nq, |b| q.mass(b) * terms[a * nq + b]);
        p.mass(a) * s.min(caps.1)
    });
    by_q.min(by_p)
}
