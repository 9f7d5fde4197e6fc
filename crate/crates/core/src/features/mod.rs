//! Finite-dimensional feature maps whose inner products approximate the
//! kernel: random Fourier features and truncated Taylor (IFGT) features.
//!
//! An embedding of a set is the mass-weighted sum of its point features, so
//! `|Phi(P) - Phi(Q)|^2` approximates `D_K(P, Q)^2`.

mod fourier;
mod io;
mod taylor;

pub use fourier::{
    draw_frequencies, kernel_distance_rff, rff_dimension, rff_dimension_domain, rff_embed,
    FourierBasis,
};
pub use io::{read_feature_vector, write_feature_vector, FORMAT_VERSION, MAGIC};
pub use taylor::{
    ifgt_choose_tau, ifgt_embed, ifgt_error_bound, kernel_distance_ifgt, multiindex_count,
    multiindex_enumerate, IfgtEstimate, TaylorBasis,
};

use crate::error::{Error, Result};
use crate::sum::pairwise_sum_by;

/// Identifies the basis an embedding was computed in. Two vectors can only be
/// compared when their tags are equal.
#[derive(Debug, Clone, PartialEq)]
pub enum BasisTag {
    Fourier {
        sigma: f64,
        dim: usize,
        rho: usize,
        seed: u64,
    },
    Taylor {
        sigma: f64,
        tau: usize,
        center: Vec<f64>,
    },
}

impl BasisTag {
    pub fn sigma(&self) -> f64 {
        match self {
            BasisTag::Fourier { sigma, .. } | BasisTag::Taylor { sigma, .. } => *sigma,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            BasisTag::Fourier { dim, .. } => *dim,
            BasisTag::Taylor { center, .. } => center.len(),
        }
    }
}

/// `Phi(P)`: a dense vector in the feature space of `basis`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub basis: BasisTag,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Inner product; approximates `kappa` of the two embedded sets.
    pub fn dot(&self, other: &FeatureVector) -> Result<f64> {
        self.check_basis(other)?;
        Ok(pairwise_sum_by(self.len(), |i| {
            self.values[i] * other.values[i]
        }))
    }

    /// Elementwise sum (embedding of a disjoint union).
    pub fn add(&self, other: &FeatureVector) -> Result<FeatureVector> {
        self.check_basis(other)?;
        Ok(FeatureVector {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
            basis: self.basis.clone(),
        })
    }

    fn check_basis(&self, other: &FeatureVector) -> Result<()> {
        if self.basis != other.basis || self.len() != other.len() {
            Err(Error::BasisMismatch)
        } else {
            Ok(())
        }
    }
}

/// `|Phi(P) - Phi(Q)|^2`, the feature-space estimate of `D_K(P, Q)^2`.
pub fn kernel_distance_features(a: &FeatureVector, b: &FeatureVector) -> Result<f64> {
    a.check_basis(b)?;
    let s = pairwise_sum_by(a.len(), |i| {
        let d = a.values[i] - b.values[i];
        d * d
    });
    Ok(s.max(0.0))
}

/// Index of the corpus vector closest to `query` in feature space (exact
/// linear scan). Ties go to the smallest index.
pub fn nn_query(corpus: &[FeatureVector], query: &FeatureVector) -> Result<usize> {
    if corpus.is_empty() {
        return Err(Error::EmptyInput("nearest-neighbour corpus"));
    }
    let mut best = (f64::INFINITY, 0usize);
    for (i, v) in corpus.iter().enumerate() {
        let d = kernel_distance_features(v, query)?;
        if d < best.0 {
            best = (d, i);
        }
    }
    Ok(best.1)
}
