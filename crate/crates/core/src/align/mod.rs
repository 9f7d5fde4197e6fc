//! Minimizing `D_K(P, M(Q))` over translations and rigid motions `M`.
//!
//! `kappa(P, P)` and `kappa(Q, Q)` do not depend on the motion, so the
//! searches maximize the alignment objective `kappa(P, M(Q))`.
//! Candidates come from a lattice of translations and, for rigid motions,
//! grids of rotations about the first matched point. The grid is searched
//! best-first with upper bounds on whole blocks of candidates, so the result
//! equals the best candidate of the full grid.

mod grid;
mod motion;
mod rigid;

mod search;
mod translate;

pub use grid::{rotation_grid, sphere_directions, RotationGrid, TranslationGrid};
pub use motion::{RigidMotion, Rotation};
pub use rigid::{best_rigid_motion, best_rigid_motion_coreset, MAX_RIGID_N_2D, MAX_RIGID_N_3D};
pub use translate::{best_translation, best_translation_coreset};

use serde::Serialize;

use crate::distance::{clamp_squared_distance, kappa_exact};
use crate::error::Result;
use crate::kernel::GaussianKernel;
use crate::points::{check_same_dim, joint_mass, WeightedPointSet};

/// `kappa(P, motion(Q))`, evaluated exactly.
pub fn alignment_objective(
    kernel: &GaussianKernel,
    p: &WeightedPointSet,
    q: &WeightedPointSet,
    motion: &RigidMotion,
) -> Result<f64> {
    check_same_dim(p, q)?;
    motion.check_dim(p.dim())?;
    kappa_exact(kernel, p, &motion.apply(q))
}

/// Outcome of an alignment search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Alignment {
    pub motion: RigidMotion,
    /// Exact `D_K(P, motion(Q))^2` on the inputs passed in.
    pub squared_distance: f64,
    /// `kappa(P, motion(Q))`.
    pub objective: f64,
    /// Candidates whose objective was evaluated exactly.
    pub evaluated: u64,
    /// Size of the full candidate grid.
    pub candidates: u64,
    /// Coreset sizes used for the search, if any.
    pub coreset_sizes: Option<(usize, usize)>,
}

/// Exact `D_K(P, motion(Q))^2` given the objective value.
pub(crate) fn finish(
    kernel: &GaussianKernel,
    p: &WeightedPointSet,
    q: &WeightedPointSet,
    motion: RigidMotion,
    evaluated: u64,
    candidates: u64,
) -> Result<Alignment> {
    let objective = alignment_objective(kernel, p, q, &motion)?;
    let pp = kappa_exact(kernel, p, p)?;
    let qq = kappa_exact(kernel, q, q)?;
    let squared_distance = clamp_squared_distance((pp + qq) - 2.0 * objective, joint_mass(p, q))?;
    Ok(Alignment {
        motion,
        squared_distance,
        objective,
        evaluated,
        candidates,
        coreset_sizes: None,
    })
}
