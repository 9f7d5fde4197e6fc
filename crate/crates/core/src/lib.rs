//! Kernel distance between weighted point sets.
//!
//! For a Gaussian kernel `K(p, q) = exp(-|p - q|^2 / sigma^2)` and weighted
//! sets `P`, `Q`, the kernel distance is
//! `D_K(P, Q)^2 = kappa(P, P) + kappa(Q, Q) - 2 kappa(P, Q)` with
//! `kappa(P, Q) = sum_p sum_q mu(p) nu(q) K(p, q)`.
//!
//! The crate provides
//! - exact evaluation ([`kernel_distance_exact`]),
//! - a well-separated pair decomposition estimator ([`wspd`]),
//! - random Fourier and truncated Taylor feature embeddings ([`features`]),
//! - random-sampling coresets and discrepancy verifiers ([`coreset`]),
//! - grid search for the translation or rigid motion minimizing `D_K`
//!   ([`align`]),
//! - reductions from oriented and densely sampled inputs ([`reduce`]).
//!
//! Error bounds are additive in `W^2` where `W = max(W_P, W_Q)` is the larger
//! total mass.

pub mod align;
pub mod constants;
pub mod coreset;
pub mod distance;
pub mod error;
pub mod features;
pub mod kernel;
pub mod points;
pub mod reduce;
pub mod rng;
pub mod sum;
pub mod wspd;

pub use distance::{kappa_exact, kernel_distance_exact, kernel_distance_sq_exact};
pub use error::{Error, Result};
pub use kernel::{GaussianKernel, Kernel, TrivialKernel};
pub use points::{joint_mass, WeightedPoint, WeightedPointSet};
