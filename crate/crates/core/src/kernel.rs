//! Kernels: the Gaussian kernel used throughout and the trivial kernel used
//! by tests of the set-difference identity.
//!
//! The Gaussian is parameterised by a length scale `sigma`:
//! `K(p, q) = exp(-|p - q|^2 / sigma^2)`.

use serde::{Deserialize, Serialize};

use crate::error::{check_open_unit, check_positive, Error, Result};
use crate::sum::sq_dist;

/// A similarity kernel on `R^d`.
pub trait Kernel: Sync {
    /// Kernel value; callers guarantee equal lengths.
    fn eval_unchecked(&self, p: &[f64], q: &[f64]) -> f64;

    fn eval(&self, p: &[f64], q: &[f64]) -> Result<f64> {
        if p.len() != q.len() {
            return Err(Error::DimensionMismatch {
                expected: p.len(),
                found: q.len(),
            });
        }
        Ok(self.eval_unchecked(p, q))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianKernel {
    sigma: f64,
}

impl GaussianKernel {
    pub fn new(sigma: f64) -> Result<Self> {
        check_positive("sigma", sigma)?;
        Ok(Self { sigma })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Kernel value as a function of the squared distance.
    #[inline]
    pub fn of_sq_dist(&self, d2: f64) -> f64 {
        (-d2 / (self.sigma * self.sigma)).exp()
    }

    /// Radius beyond which the kernel is below `gamma`: `sigma * sqrt(ln(1/gamma))`.
    pub fn tail_radius(&self, gamma: f64) -> Result<f64> {
        check_open_unit("gamma", gamma)?;
        Ok(self.sigma * (1.0 / gamma).ln().sqrt())
    }

    /// Lipschitz constant of `K(p, .)`: `sqrt(2/e) / sigma`, the maximum slope
    /// of `x -> exp(-x^2/sigma^2)`.
    pub fn lipschitz_bound(&self) -> f64 {
        (2.0 / std::f64::consts::E).sqrt() / self.sigma
    }

    /// Largest kernel value (`K(p, p)`).
    pub fn max_value(&self) -> f64 {
        1.0
    }
}

impl Kernel for GaussianKernel {
    #[inline]
    fn eval_unchecked(&self, p: &[f64], q: &[f64]) -> f64 {
        self.of_sq_dist(sq_dist(p, q))
    }
}

/// `K(p, q) = 1` if `p == q` coordinate-wise (bitwise on the values), else 0.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TrivialKernel;

impl Kernel for TrivialKernel {
    fn eval_unchecked(&self, p: &[f64], q: &[f64]) -> f64 {
        if p.iter().zip(q).all(|(a, b)| a.to_bits() == b.to_bits()) {
            1.0
        } else {
            0.0
        }
    }
}
