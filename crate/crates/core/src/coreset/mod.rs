//! Random-sampling coresets and empirical checks of their quality.
//!
//! A coreset `S` of `P` is a multiset of `k` points drawn from `P`
//! proportionally to mass, each reweighted to `W/k`. Quality is measured by
//! the kernel discrepancy `max_q |kbar_P(P, q) - kbar_S(S, q)|` (normalized
//! kernel sums) and the ball discrepancy (normalized mass in balls).

mod ranges;

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

pub use ranges::{ball_discrepancy, MAX_BALL_POINTS_2D, MAX_BALL_POINTS_3D};

use crate::constants::{C_FEATURE_CORESET, C_RANDOM_CORESET};
use crate::error::{check_open_unit, invalid, Error, Result};
use crate::features::{kernel_distance_features, rff_dimension, rff_embed, FourierBasis};
use crate::kernel::{GaussianKernel, Kernel};
use crate::points::{check_same_dim, WeightedPointSet};
use crate::reduce::sample_by_mass;
use crate::rng::{stream, Stream};
use crate::sum::pairwise_sum_by;

/// How a coreset was built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoresetMethod {
    Random,
    FeatureVerified,
}

/// A reweighted sample of a parent set.
#[derive(Debug, Clone, PartialEq)]
pub struct Coreset {
    pub subset: WeightedPointSet,
    pub parent_size: usize,
    /// Accuracy the size was chosen for, when known.
    pub epsilon_target: Option<f64>,
    pub method: CoresetMethod,
}

impl Coreset {
    /// The sample with repeated points merged (masses added), in order of
    /// first occurrence. Represents the same measure with fewer points.
    pub fn merged(&self) -> WeightedPointSet {
        merge_duplicates(&self.subset)
    }

    pub fn len(&self) -> usize {
        self.subset.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subset.is_empty()
    }
}

pub(crate) fn merge_duplicates(s: &WeightedPointSet) -> WeightedPointSet {
    let d = s.dim();
    let mut slot: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut coords = Vec::new();
    let mut masses: Vec<Vec<f64>> = Vec::new();
    for (x, m) in s.iter() {
        let key: Vec<u64> = x.iter().map(|c| c.to_bits()).collect();
        let i = *slot.entry(key).or_insert_with(|| {
            coords.extend_from_slice(x);
            masses.push(Vec::new());
            masses.len() - 1
        });
        masses[i].push(m);
    }
    let masses = masses
        .into_iter()
        .map(crate::sum::compensated_sum)
        .collect();
    WeightedPointSet::new(d, coords, masses).expect("merged masses stay positive")
}

/// `ceil(8 / eps^2 * (d + ln(1/delta)))` samples for an `eps`-sample with
/// probability `1 - delta`.
pub fn coreset_size_random(eps: f64, delta: f64, d: usize) -> Result<usize> {
    check_unit_closed("eps", eps)?;
    check_open_unit("delta", delta)?;
    if d < 1 {
        return Err(invalid("d", "must be at least 1"));
    }
    Ok((C_RANDOM_CORESET / (eps * eps) * (d as f64 + (1.0 / delta).ln())).ceil() as usize)
}

/// `ceil(16 / eps^3 * ln(n/delta) * ln(ln(n) / (eps delta)))` samples, after
/// which the feature certificate `|Phi(P) - Phi(S)|^2 <= eps W^2` holds with
/// probability `1 - delta`.
pub fn coreset_size_feature(eps: f64, delta: f64, n: usize) -> Result<usize> {
    check_unit_closed("eps", eps)?;
    check_open_unit("delta", delta)?;
    if n < 1 {
        return Err(invalid("n", "must be at least 1"));
    }
    let n = n as f64;
    // ln(ln n) needs n >= 3 to be meaningful; clamp the inner factor at e.
    let inner = ((n.ln() / (eps * delta)).max(std::f64::consts::E)).ln();
    Ok((C_FEATURE_CORESET / eps.powi(3) * (n / delta).ln().max(1.0) * inner).ceil() as usize)
}

fn check_unit_closed(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v <= 1.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("{v} is not in (0, 1]")))
    }
}

/// `k` points drawn i.i.d. proportionally to mass, each with mass `W/k`.
pub fn coreset_random(p: &WeightedPointSet, k: usize, seed: u64) -> Result<Coreset> {
    coreset_random_stream(p, k, seed, Stream::CoresetFirst)
}

/// Same as [`coreset_random`] on an explicit random stream; the second set of
/// a pair uses [`Stream::CoresetSecond`].
pub fn coreset_random_stream(
    p: &WeightedPointSet,
    k: usize,
    seed: u64,
    which: Stream,
) -> Result<Coreset> {
    let subset = sample_by_mass(p, k, &mut stream(seed, which))?;
    Ok(Coreset {
        subset,
        parent_size: p.len(),
        epsilon_target: None,
        method: CoresetMethod::Random,
    })
}

/// Normalized kernel sum `kbar(S, q) = kappa(S, {q}) / W_S`.
fn normalized_density(kernel: &GaussianKernel, s: &WeightedPointSet, q: &[f64]) -> f64 {
    pairwise_sum_by(s.len(), |i| {
        s.mass(i) * kernel.eval_unchecked(s.point(i), q)
    }) / s.total_mass()
}

/// `max_q |kbar_P(P, q) - kbar_S(S, q)|` over the given queries (flat,
/// row-major).
pub fn kernel_discrepancy(
    kernel: &GaussianKernel,
    p: &WeightedPointSet,
    s: &Coreset,
    queries: &[f64],
) -> Result<f64> {
    check_same_dim(p, &s.subset)?;
    let d = p.dim();
    if queries.is_empty() || queries.len() % d != 0 {
        return Err(invalid(
            "queries",
            "need a nonempty list of d-dimensional points",
        ));
    }
    if p.is_empty() || s.is_empty() {
        return Err(Error::EmptyInput("point set for kernel discrepancy"));
    }
    let sm = s.merged();
    Ok(queries
        .par_chunks_exact(d)
        .map(|q| (normalized_density(kernel, p, q) - normalized_density(kernel, &sm, q)).abs())
        .reduce(|| 0.0, f64::max))
}

/// Default query set and its Lipschitz slack.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryGrid {
    pub queries: Vec<f64>,
    /// Grid spacing.
    pub spacing: f64,
    /// The supremum over the inflated box exceeds the grid maximum by at most
    /// this much.
    pub slack: f64,
    /// Outside the inflated box every normalized kernel sum is below this.
    pub tail: f64,
}

/// Largest default query set we build.
pub const MAX_DEFAULT_QUERIES: usize = 4_000_000;

/// Parent points plus a grid of spacing `sigma eps / 4` over the bounding box
/// of `P` inflated by the tail radius for `eps/4`.
pub fn default_queries(
    kernel: &GaussianKernel,
    p: &WeightedPointSet,
    eps: f64,
) -> Result<QueryGrid> {
    check_unit_closed("eps", eps)?;
    if p.is_empty() {
        return Err(Error::EmptyInput("parent set"));
    }
    let d = p.dim();
    let spacing = kernel.sigma() * eps / 4.0;
    let pad = kernel.tail_radius(eps / 4.0)?;
    let (lo, hi) = p.bounding_box();
    let counts: Vec<usize> = (0..d)
        .map(|k| ((hi[k] - lo[k] + 2.0 * pad) / spacing).ceil() as usize + 1)
        .collect();
    let total = counts
        .iter()
        .try_fold(1usize, |acc, &c| acc.checked_mul(c))
        .filter(|&t| t <= MAX_DEFAULT_QUERIES)
        .ok_or(Error::BudgetExceeded {
            work: counts.iter().map(|&c| c as f64).product(),
            limit: MAX_DEFAULT_QUERIES as f64,
            advice: "pass an explicit query set or a larger eps",
        })?;
    let mut queries = p.coords().to_vec();
    queries.reserve(total * d);
    let mut idx = vec![0usize; d];
    for _ in 0..total {
        queries.extend((0..d).map(|k| lo[k] - pad + idx[k] as f64 * spacing));
        for k in (0..d).rev() {
            idx[k] += 1;
            if idx[k] < counts[k] {
                break;
            }
            idx[k] = 0;
        }
    }
    // Both normalized sums are (2L)-Lipschitz in q together, and every point
    // of the box is within spacing * sqrt(d) / 2 of the grid.
    let slack = kernel.lipschitz_bound() * spacing * (d as f64).sqrt();
    Ok(QueryGrid {
        queries,
        spacing,
        slack,
        tail: eps / 4.0,
    })
}

/// Discrepancies of a coreset, normalized by the respective total masses.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscrepancyReport {
    pub kernel_discrepancy: f64,
    /// Only computed for `d <= 3` and small inputs.
    pub ball_discrepancy: Option<f64>,
    pub query_count: usize,
    pub grid_slack: f64,
}

/// Kernel discrepancy on the default query grid, plus the ball discrepancy
/// when it is cheap enough to compute exactly.
pub fn discrepancy_report(
    kernel: &GaussianKernel,
    p: &WeightedPointSet,
    s: &Coreset,
    eps: f64,
) -> Result<DiscrepancyReport> {
    let grid = default_queries(kernel, p, eps)?;
    let kd = kernel_discrepancy(kernel, p, s, &grid.queries)?;
    let ball = match ball_discrepancy(p, s) {
        Ok(v) => Some(v),
        Err(Error::Unsupported(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(DiscrepancyReport {
        kernel_discrepancy: kd,
        ball_discrepancy: ball,
        query_count: grid.queries.len() / p.dim(),
        grid_slack: grid.slack,
    })
}

/// `|Phi(P) - Phi(S)|^2` in the random Fourier basis: a certificate for
/// `D_K(P, S)^2`.
pub fn coreset_feature_bound(
    p: &WeightedPointSet,
    s: &Coreset,
    basis: &FourierBasis,
) -> Result<f64> {
    check_same_dim(p, &s.subset)?;
    kernel_distance_features(&rff_embed(basis, p)?, &rff_embed(basis, &s.merged())?)
}

/// Feature dimension for which the certificate is within `eps W^2 / 2` of
/// `D_K(P, S)^2` with probability `1 - delta/2`: each pair among the `n`
/// distinct locations of `P` gets budget `eps/8`, and the signed sum over
/// `P` and `S` has total weight `(2W)^2`.
pub fn certificate_dimension(eps: f64, delta: f64, n: usize) -> Result<u64> {
    rff_dimension(eps / 8.0, delta / 2.0, n)
}

/// Coreset of the size given by [`coreset_size_feature`], returned with its
/// certificate value.
pub fn coreset_feature_verified(
    p: &WeightedPointSet,
    eps: f64,
    delta: f64,
    basis: &FourierBasis,
    seed: u64,
) -> Result<(Coreset, f64)> {
    let k = coreset_size_feature(eps, delta, p.len())?;
    let mut c = coreset_random(p, k, seed)?;
    c.method = CoresetMethod::FeatureVerified;
    c.epsilon_target = Some(eps);
    let cert = coreset_feature_bound(p, &c, basis)?;
    Ok((c, cert))
}
