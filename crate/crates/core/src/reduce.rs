//! Reductions to plain weighted point sets: splitting oriented inputs into
//! per-axis signed components, snapping to a lattice, and resampling.

use std::collections::BTreeMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::distance::{clamp_squared_distance, kappa_raw};
use crate::error::{check_positive, invalid, Error, Result};
use crate::kernel::{GaussianKernel, Kernel};
use crate::points::WeightedPointSet;
use crate::rng::{stream, Stream};
use crate::sum::{compensated_sum, dot, pairwise_sum_by};

/// Unit vectors may deviate from norm 1 by this much.
pub const UNIT_TOLERANCE: f64 = 1e-9;

/// Weighted points each carrying a unit orientation vector.
#[derive(Debug, Clone, PartialEq)]
pub struct OrientedPointSet {
    points: WeightedPointSet,
    normals: Vec<f64>,
}

impl OrientedPointSet {
    pub fn new(points: WeightedPointSet, normals: Vec<f64>) -> Result<Self> {
        let d = points.dim();
        if normals.len() != points.len() * d {
            return Err(Error::DimensionMismatch {
                expected: points.len() * d,
                found: normals.len(),
            });
        }
        for (index, u) in normals.chunks_exact(d).enumerate() {
            let norm = dot(u, u).sqrt();
            if !((norm - 1.0).abs() <= UNIT_TOLERANCE) {
                return Err(Error::InvalidOrientation { index, norm });
            }
        }
        Ok(Self { points, normals })
    }

    pub fn points(&self) -> &WeightedPointSet {
        &self.points
    }

    pub fn normal(&self, i: usize) -> &[f64] {
        let d = self.points.dim();
        &self.normals[i * d..(i + 1) * d]
    }

    pub fn dim(&self) -> usize {
        self.points.dim()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// One axis of an orientation split: points with nonzero `U_i(p)`, masses
/// `mu(p) |U_i(p)|`, and the sign of `U_i(p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedComponent {
    pub set: WeightedPointSet,
    pub signs: Vec<i8>,
}

impl SignedComponent {
    fn signed_masses(&self) -> Vec<f64> {
        self.set
            .masses()
            .iter()
            .zip(&self.signs)
            .map(|(m, &s)| m * s as f64)
            .collect()
    }
}

/// The `d` signed components of an oriented set.
#[derive(Debug, Clone, PartialEq)]
pub struct OrientationDecomposition {
    pub components: Vec<SignedComponent>,
}

/// Split an oriented set into one weighted set per coordinate axis.
pub fn split_orientation(p: &OrientedPointSet) -> Result<OrientationDecomposition> {
    let d = p.dim();
    let mut components = Vec::with_capacity(d);
    for axis in 0..d {
        let mut coords = Vec::new();
        let mut masses = Vec::new();
        let mut signs = Vec::new();
        for i in 0..p.len() {
            let u = p.normal(i)[axis];
            if u != 0.0 {
                coords.extend_from_slice(p.points.point(i));
                masses.push(p.points.mass(i) * u.abs());
                signs.push(if u > 0.0 { 1 } else { -1 });
            }
        }
        components.push(SignedComponent {
            set: WeightedPointSet::new(d, coords, masses)?,
            signs,
        });
    }
    Ok(OrientationDecomposition { components })
}

/// `kappa` of two components with each term multiplied by the product of signs.
pub fn kappa_signed<K: Kernel + ?Sized>(
    kernel: &K,
    a: &SignedComponent,
    b: &SignedComponent,
) -> Result<f64> {
    crate::points::check_same_dim(&a.set, &b.set)?;
    Ok(kappa_raw(
        kernel,
        a.set.dim(),
        a.set.coords(),
        &a.signed_masses(),
        b.set.coords(),
        &b.signed_masses(),
    ))
}

/// Oriented similarity `sum_p sum_q K(p, q) <U(p), V(q)> mu(p) nu(q)`,
/// evaluated through the orientation split.
pub fn kappa_oriented<K: Kernel + ?Sized>(
    kernel: &K,
    p: &OrientedPointSet,
    q: &OrientedPointSet,
) -> Result<f64> {
    crate::points::check_same_dim(&p.points, &q.points)?;
    let a = split_orientation(p)?;
    let b = split_orientation(q)?;
    let terms = a
        .components
        .iter()
        .zip(&b.components)
        .map(|(x, y)| kappa_signed(kernel, x, y))
        .collect::<Result<Vec<_>>>()?;
    Ok(pairwise_sum_by(terms.len(), |i| terms[i]))
}

/// Kernel distance between oriented sets.
pub fn kernel_distance_oriented<K: Kernel + ?Sized>(
    kernel: &K,
    p: &OrientedPointSet,
    q: &OrientedPointSet,
) -> Result<f64> {
    let pp = kappa_oriented(kernel, p, p)?;
    let qq = kappa_oriented(kernel, q, q)?;
    let pq = kappa_oriented(kernel, p, q)?;
    let w = p.points.total_mass().max(q.points.total_mass());
    clamp_squared_distance((pp + qq) - 2.0 * pq, w).map(f64::sqrt)
}

/// Lattice spacing `eps * sigma / sqrt(d)` used by [`grid_compress`].
pub fn lattice_spacing(kernel: &GaussianKernel, eps: f64, dim: usize) -> f64 {
    eps * kernel.sigma() / (dim as f64).sqrt()
}

/// Index of the nearest multiple of `spacing`; exact halves go to the lower one.
#[inline]
pub(crate) fn nearest_lattice_index(x: f64, spacing: f64) -> i64 {
    (x / spacing - 0.5).ceil() as i64
}

/// Move every point to its nearest point of the lattice with spacing
/// `eps * sigma / sqrt(d)` and merge masses per lattice point.
///
/// Every point moves by at most `eps * sigma / 2`, so `kappa` against any
/// other set changes by at most `eps * W_P * W_Q`. The output is sorted by
/// lattice coordinates.
pub fn grid_compress(
    kernel: &GaussianKernel,
    p: &WeightedPointSet,
    eps: f64,
) -> Result<WeightedPointSet> {
    check_positive("eps", eps)?;
    let d = p.dim();
    let s = lattice_spacing(kernel, eps, d);
    let mut cells: BTreeMap<Vec<i64>, Vec<f64>> = BTreeMap::new();
    for (x, m) in p.iter() {
        let z: Vec<i64> = x.iter().map(|&c| nearest_lattice_index(c, s)).collect();
        cells.entry(z).or_default().push(m);
    }
    let mut coords = Vec::with_capacity(cells.len() * d);
    let mut masses = Vec::with_capacity(cells.len());
    for (z, ms) in cells {
        coords.extend(z.iter().map(|&i| i as f64 * s));
        masses.push(compensated_sum(ms));
    }
    WeightedPointSet::new(d, coords, masses)
}

/// `k` i.i.d. draws proportional to mass from `rng`, each with mass `W/k`.
pub(crate) fn sample_by_mass<R: Rng>(
    p: &WeightedPointSet,
    k: usize,
    rng: &mut R,
) -> Result<WeightedPointSet> {
    if p.is_empty() {
        return Err(Error::EmptyInput("point set to sample from"));
    }
    if k < 1 {
        return Err(invalid("k", "sample size must be at least 1"));
    }
    let index = WeightedIndex::new(p.masses()).map_err(|e| invalid("mass", e.to_string()))?;
    let d = p.dim();
    let mut coords = Vec::with_capacity(k * d);
    for _ in 0..k {
        coords.extend_from_slice(p.point(index.sample(rng)));
    }
    WeightedPointSet::new(d, coords, vec![p.total_mass() / k as f64; k])
}

/// Replace `P` by `k` points sampled with replacement proportionally to mass,
/// each carrying mass `W/k`.
pub fn sample_discretize(p: &WeightedPointSet, k: usize, seed: u64) -> Result<WeightedPointSet> {
    sample_by_mass(p, k, &mut stream(seed, Stream::Discretize))
}
