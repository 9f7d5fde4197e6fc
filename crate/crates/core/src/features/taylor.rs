use rayon::prelude::*;

use super::{kernel_distance_features, BasisTag, FeatureVector};
use crate::constants::MAX_FEATURE_DIM;
use crate::error::{check_open_unit, check_positive, invalid, Error, Result};
use crate::kernel::GaussianKernel;
use crate::points::{check_same_dim, WeightedPointSet};
use crate::sum::{compensated_sum, sq_dist};

/// Points farther than `sqrt(MAX_RADIUS_SQ) sigma` from the center would
/// underflow `exp(-|u|^2)`.
const MAX_RADIUS_SQ: f64 = 700.0;

/// `C(tau + d - 1, d)`: the number of multiindices of degree below `tau`.
pub fn multiindex_count(d: usize, tau: usize) -> Result<u64> {
    let n = (tau + d - 1) as u128;
    let k = d.min(tau - 1) as u128;
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (n - i) / (i + 1);
        if c > u64::MAX as u128 {
            return Err(Error::Overflow(format!("C({n}, {d}) exceeds 64 bits")));
        }
    }
    Ok(c as u64)
}

/// All multiindices `alpha` in `N^d` with `|alpha| <= tau - 1`, ordered by
/// total degree and then lexicographically.
pub fn multiindex_enumerate(d: usize, tau: usize) -> Vec<Vec<u32>> {
    fn fill(prefix: &mut Vec<u32>, d: usize, left: u32, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == d - 1 {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for a in 0..=left {
            prefix.push(a);
            fill(prefix, d, left - a, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if d == 0 {
        return out;
    }
    for degree in 0..tau as u32 {
        fill(&mut Vec::with_capacity(d), d, degree, &mut out);
    }
    out
}

fn log_error_bound(tau: usize, big_delta: f64) -> f64 {
    let log_fact: f64 = (2..=tau).map(|i| (i as f64).ln()).sum();
    tau as f64 * std::f64::consts::LN_2 - log_fact + 2.0 * tau as f64 * big_delta.ln()
}

/// Truncation error factor `(2^tau / tau!) Delta^(2 tau)`; multiply by
/// `W_P W_Q` for the bound on the similarity error.
pub fn ifgt_error_bound(tau: usize, big_delta: f64) -> f64 {
    if big_delta == 0.0 {
        return 0.0;
    }
    log_error_bound(tau, big_delta).exp()
}

/// Smallest `tau >= 1` with `(2^tau / tau!) Delta^(2 tau) <= eps`.
pub fn ifgt_choose_tau(eps: f64, big_delta: f64) -> Result<usize> {
    check_open_unit("eps", eps)?;
    if !(big_delta >= 0.0 && big_delta.is_finite()) {
        return Err(invalid(
            "Delta",
            format!("{big_delta} is not a finite non-negative number"),
        ));
    }
    if big_delta == 0.0 {
        return Ok(1);
    }
    let target = eps.ln();
    let step = std::f64::consts::LN_2 + 2.0 * big_delta.ln();
    let mut log_term = 0.0;
    for tau in 1..=100_000_000usize {
        log_term += step - (tau as f64).ln();
        if log_term <= target {
            return Ok(tau);
        }
    }
    Err(Error::Overflow(format!(
        "no truncation degree found for Delta = {big_delta}"
    )))
}

/// Taylor basis around `center` truncated below total degree `tau`.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorBasis {
    sigma: f64,
    center: Vec<f64>,
    tau: usize,
    multiindices: Vec<Vec<u32>>,
    /// For index `k > 0`: `(parent, axis)` with `alpha_k = alpha_parent + e_axis`.
    parents: Vec<(usize, usize)>,
}

impl TaylorBasis {
    pub fn new(sigma: f64, center: Vec<f64>, tau: usize) -> Result<Self> {
        check_positive("sigma", sigma)?;
        if center.is_empty() {
            return Err(invalid("center", "dimension must be at least 1"));
        }
        if let Some(c) = center.iter().find(|c| !c.is_finite()) {
            return Err(invalid("center", format!("non-finite coordinate {c}")));
        }
        if tau < 1 {
            return Err(invalid("tau", "must be at least 1"));
        }
        let rho = multiindex_count(center.len(), tau)?;
        if rho > MAX_FEATURE_DIM {
            return Err(Error::FeatureDimensionTooLarge {
                rho,
                max: MAX_FEATURE_DIM,
            });
        }
        let multiindices = multiindex_enumerate(center.len(), tau);
        let index: std::collections::HashMap<&[u32], usize> = multiindices
            .iter()
            .enumerate()
            .map(|(i, a)| (a.as_slice(), i))
            .collect();
        let mut parents = vec![(0, 0); multiindices.len()];
        for (k, alpha) in multiindices.iter().enumerate().skip(1) {
            let axis = alpha.iter().rposition(|&a| a > 0).unwrap();
            let mut parent = alpha.clone();
            parent[axis] -= 1;
            parents[k] = (index[parent.as_slice()], axis);
        }
        Ok(Self {
            sigma,
            center,
            tau,
            multiindices,
            parents,
        })
    }

    /// Basis for comparing `P` and `Q`: center at the mass-weighted centroid
    /// of the union, degree chosen so the similarity error is at most
    /// `eps W_P W_Q`. Also returns the normalized radius `Delta` used for the
    /// bound (twice the largest distance to the center, over sigma).
    pub fn for_sets(
        kernel: &GaussianKernel,
        p: &WeightedPointSet,
        q: &WeightedPointSet,
        eps: f64,
    ) -> Result<(Self, f64)> {
        check_same_dim(p, q)?;
        if p.is_empty() && q.is_empty() {
            return Err(Error::EmptyInput("point sets for the Taylor basis"));
        }
        let d = p.dim();
        let total = compensated_sum(p.masses().iter().chain(q.masses()).copied());
        let center: Vec<f64> = (0..d)
            .map(|k| {
                let s = compensated_sum(p.iter().chain(q.iter()).map(|(x, m)| m * x[k]));
                s / total
            })
            .collect();
        let big_delta = Self::normalized_radius(kernel.sigma(), &center, [p, q]);
        let tau = ifgt_choose_tau(eps, big_delta)?;
        Ok((Self::new(kernel.sigma(), center, tau)?, big_delta))
    }

    /// `2 max |x - center| / sigma` over the given sets.
    pub fn normalized_radius(sigma: f64, center: &[f64], sets: [&WeightedPointSet; 2]) -> f64 {
        let r2 = sets
            .iter()
            .flat_map(|s| s.iter())
            .map(|(x, _)| sq_dist(x, center))
            .fold(0.0, f64::max);
        2.0 * r2.sqrt() / sigma
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn rho(&self) -> usize {
        self.multiindices.len()
    }

    pub fn multiindices(&self) -> &[Vec<u32>] {
        &self.multiindices
    }

    pub fn tag(&self) -> BasisTag {
        BasisTag::Taylor {
            sigma: self.sigma,
            tau: self.tau,
            center: self.center.clone(),
        }
    }

    /// Adds `mass * phi(x)` into `out`.
    fn accumulate(&self, x: &[f64], mass: f64, coef: &mut [f64], out: &mut [f64]) -> Result<()> {
        let u: Vec<f64> = x
            .iter()
            .zip(&self.center)
            .map(|(a, c)| (a - c) / self.sigma)
            .collect();
        let r2: f64 = u.iter().map(|v| v * v).sum();
        if r2 > MAX_RADIUS_SQ {
            return Err(Error::Overflow(format!(
                "point at {:.1} sigma from the expansion center",
                r2.sqrt()
            )));
        }
        coef[0] = mass * (-r2).exp();
        for k in 1..coef.len() {
            let (parent, axis) = self.parents[k];
            let a = self.multiindices[k][axis] as f64;
            coef[k] = coef[parent] * u[axis] * (2.0 / a).sqrt();
        }
        for (o, c) in out.iter_mut().zip(coef.iter()) {
            *o += c;
        }
        Ok(())
    }

    /// Feature vector of a single point.
    pub fn point_features(&self, x: &[f64], mass: f64) -> Result<Vec<f64>> {
        let mut coef = vec![0.0; self.rho()];
        let mut out = vec![0.0; self.rho()];
        self.accumulate(x, mass, &mut coef, &mut out)?;
        Ok(out)
    }
}

fn add_into(a: &mut [f64], b: &[f64]) {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
}

fn tree_reduce(mut parts: Vec<Vec<f64>>) -> Vec<f64> {
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut it = parts.into_iter();
        while let Some(mut a) = it.next() {
            if let Some(b) = it.next() {
                add_into(&mut a, &b);
            }
            next.push(a);
        }
        parts = next;
    }
    parts.pop().unwrap_or_default()
}

/// `Phi(P) = sum_p phi(p)` with
/// `phi(p)_alpha = sqrt(2^|alpha| / alpha!) mu(p) exp(-|u|^2) u^alpha`,
/// `u = (p - center) / sigma`.
pub fn ifgt_embed(basis: &TaylorBasis, p: &WeightedPointSet) -> Result<FeatureVector> {
    if p.dim() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            found: p.dim(),
        });
    }
    let rho = basis.rho();
    // Chunking depends only on n, so the result does not depend on threads.
    let chunk = 256usize.max(p.len().div_ceil(64));
    let parts: Vec<Vec<f64>> = (0..p.len().div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let mut coef = vec![0.0; rho];
            let mut out = vec![0.0; rho];
            for i in c * chunk..((c + 1) * chunk).min(p.len()) {
                basis.accumulate(p.point(i), p.mass(i), &mut coef, &mut out)?;
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut values = tree_reduce(parts);
    values.resize(rho, 0.0);
    Ok(FeatureVector {
        values,
        basis: basis.tag(),
    })
}

/// Result of [`kernel_distance_ifgt`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IfgtEstimate {
    /// Estimate of `D_K(P, Q)^2`.
    pub value: f64,
    pub tau: usize,
    pub rho: usize,
    /// Normalized radius `Delta` of the data around the center.
    pub big_delta: f64,
    /// Guaranteed bound on `|value - D_K^2|`.
    pub error_bound: f64,
}

/// Deterministic Taylor-feature estimate of `D_K(P, Q)^2` within `eps W^2`:
/// each similarity term gets budget `eps/4`.
pub fn kernel_distance_ifgt(
    kernel: &GaussianKernel,
    p: &WeightedPointSet,
    q: &WeightedPointSet,
    eps: f64,
) -> Result<IfgtEstimate> {
    check_open_unit("eps", eps)?;
    let (basis, big_delta) = TaylorBasis::for_sets(kernel, p, q, eps / 4.0)?;
    let value = kernel_distance_features(&ifgt_embed(&basis, p)?, &ifgt_embed(&basis, q)?)?;
    let (wp, wq) = (p.total_mass(), q.total_mass());
    let error_bound = ifgt_error_bound(basis.tau(), big_delta) * (wp + wq).powi(2);
    Ok(IfgtEstimate {
        value,
        tau: basis.tau(),
        rho: basis.rho(),
        big_delta,
        error_bound,
    })
}
