use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::GaussianKernel;
use crate::sum::{compensated_sum, sq_dist};

/// A point with a positive mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedPoint {
    pub coords: Vec<f64>,
    pub mass: f64,
}

/// Finite set of `d`-dimensional points with positive masses.
///
/// Coordinates are stored row-major in one flat buffer.
#[derive(Debug, Clone)]
pub struct WeightedPointSet {
    dim: usize,
    coords: Vec<f64>,
    masses: Vec<f64>,
    total_mass: f64,
    diameter: OnceLock<f64>,
}

impl PartialEq for WeightedPointSet {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.coords == other.coords && self.masses == other.masses
    }
}

impl WeightedPointSet {
    /// Build from flat row-major coordinates and one mass per point.
    pub fn new(dim: usize, coords: Vec<f64>, masses: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(crate::error::invalid("dim", "dimension must be at least 1"));
        }
        if coords.len() != dim * masses.len() {
            return Err(Error::DimensionMismatch {
                expected: dim * masses.len(),
                found: coords.len(),
            });
        }
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(crate::error::invalid(
                "coords",
                format!("non-finite coordinate in point {}", i / dim),
            ));
        }
        if let Some(i) = masses.iter().position(|&m| !(m > 0.0 && m.is_finite())) {
            return Err(crate::error::invalid(
                "mass",
                format!("mass of point {i} is {} (must be positive)", masses[i]),
            ));
        }
        let total_mass = compensated_sum(masses.iter().copied());
        Ok(Self {
            dim,
            coords,
            masses,
            total_mass,
            diameter: OnceLock::new(),
        })
    }

    /// Unit masses.
    pub fn uniform(dim: usize, coords: Vec<f64>) -> Result<Self> {
        let n = if dim == 0 { 0 } else { coords.len() / dim };
        Self::new(dim, coords, vec![1.0; n])
    }

    pub fn from_points(dim: usize, points: &[WeightedPoint]) -> Result<Self> {
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in points {
            if p.coords.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.coords.len(),
                });
            }
            coords.extend_from_slice(&p.coords);
        }
        Self::new(dim, coords, points.iter().map(|p| p.mass).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn mass(&self, i: usize) -> f64 {
        self.masses[i]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.coords
            .chunks_exact(self.dim)
            .zip(self.masses.iter().copied())
    }

    pub fn to_points(&self) -> Vec<WeightedPoint> {
        self.iter()
            .map(|(c, m)| WeightedPoint {
                coords: c.to_vec(),
                mass: m,
            })
            .collect()
    }

    /// Maximum pairwise distance (computed once, O(n^2)).
    pub fn diameter(&self) -> f64 {
        *self.diameter.get_or_init(|| {
            let n = self.len();
            let mut best = 0.0f64;
            for i in 0..n {
                for j in i + 1..n {
                    best = best.max(sq_dist(self.point(i), self.point(j)));
                }
            }
            best.sqrt()
        })
    }

    /// Diameter in kernel length units.
    pub fn normalized_diameter(&self, kernel: &GaussianKernel) -> f64 {
        self.diameter() / kernel.sigma()
    }

    /// Per-axis bounding box `(lo, hi)`.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for (p, _) in self.iter() {
            for k in 0..self.dim {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        (lo, hi)
    }

    /// Same points with every mass multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.dim,
            self.coords.clone(),
            self.masses.iter().map(|m| m * factor).collect(),
        )
    }

    /// Disjoint union (concatenation) of two sets.
    pub fn union(&self, other: &Self) -> Result<Self> {
        check_same_dim(self, other)?;
        let mut coords = self.coords.clone();
        coords.extend_from_slice(&other.coords);
        let mut masses = self.masses.clone();
        masses.extend_from_slice(&other.masses);
        Self::new(self.dim, coords, masses)
    }

    /// Apply `f` to every point's coordinates.
    pub fn map_points<F: FnMut(&[f64], &mut [f64])>(&self, mut f: F) -> Self {
        let mut coords = vec![0.0; self.coords.len()];
        for (src, dst) in self
            .coords
            .chunks_exact(self.dim)
            .zip(coords.chunks_exact_mut(self.dim))
        {
            f(src, dst);
        }
        Self {
            dim: self.dim,
            coords,
            masses: self.masses.clone(),
            total_mass: self.total_mass,
            diameter: OnceLock::new(),
        }
    }

    pub fn translated(&self, t: &[f64]) -> Self {
        self.map_points(|s, d| {
            for k in 0..s.len() {
                d[k] = s[k] + t[k];
            }
        })
    }
}

pub(crate) fn check_same_dim(a: &WeightedPointSet, b: &WeightedPointSet) -> Result<()> {
    if a.dim() != b.dim() {
        Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        })
    } else {
        Ok(())
    }
}

/// `W = max(W_P, W_Q)`.
pub fn joint_mass(p: &WeightedPointSet, q: &WeightedPointSet) -> f64 {
    p.total_mass().max(q.total_mass())
}
