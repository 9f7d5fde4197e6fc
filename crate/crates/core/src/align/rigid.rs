use std::f64::consts::{PI, TAU};

use super::grid::{axis_angle, lattice_spacing};
use super::search::{capped_sum, maximize, single_point_cap, BranchBound, Item};
use super::translate::{ball_lattice_count, coreset_pair};
use super::{finish, Alignment, RigidMotion, Rotation};
use crate::error::{check_open_unit, Error, Result};
use crate::kernel::GaussianKernel;
use crate::points::{check_same_dim, WeightedPointSet};
use crate::sum::{dot, pairwise_sum_by, sq_dist};

/// Largest `max(|P|, |Q|)` accepted by [`best_rigid_motion`] in 2D.
pub const MAX_RIGID_N_2D: usize = 60;
/// Largest `max(|P|, |Q|)` accepted by [`best_rigid_motion`] in 3D.
pub const MAX_RIGID_N_3D: usize = 25;

const RIGID_WORK_LIMIT: f64 = 2e11;

const ADVICE: &str = "use the coreset variant or a larger eps";

/// Rigid motion (rotation about a point of `Q`, then translation) minimizing
/// `D_K(P, M(Q))` to within `eps W^2`, for `d` in {2, 3}.
///
/// For each anchor `q1` in `Q`, `q1` is sent to lattice points `g` within
/// `sigma sqrt(ln max(1/eps, n^2))` of `P` (covering radius
/// `eps sigma / (2d)`), and the rest of `Q` is rotated about `g` using grids
/// built on the point of `Q` farthest from `q1`. These grids move every point
/// of `Q` by at most `eps sigma / (2d)` per rotational degree of freedom
/// relative to any rotation.
pub fn best_rigid_motion(
    kernel: &GaussianKernel,
    p: &WeightedPointSet,
    q: &WeightedPointSet,
    eps: f64,
) -> Result<Alignment> {
    check_open_unit("eps", eps)?;
    check_same_dim(p, q)?;
    let d = p.dim();
    if d != 2 && d != 3 {
        return Err(Error::Unsupported(format!(
            "rigid alignment supports d = 2 and d = 3, got d = {d}"
        )));
    }
    if p.is_empty() || q.is_empty() {
        return Err(Error::EmptyInput("alignment needs non-empty P and Q"));
    }
    let n = p.len().max(q.len());
    let limit = if d == 2 {
        MAX_RIGID_N_2D
    } else {
        MAX_RIGID_N_3D
    };
    if n > limit {
        return Err(Error::BudgetExceeded {
            work: n as f64,
            limit: limit as f64,
            advice: ADVICE,
        });
    }
    let search = RigidSearch::new(kernel, p, q, eps);
    let best = maximize(
        &search,
        search.roots(),
        search.tolerance,
        RIGID_WORK_LIMIT,
        ADVICE,
    )?
    .expect("the identity rotation at the nearest lattice point is always a candidate");
    let motion = search.motion(&best.key);
    finish(
        kernel,
        p,
        q,
        motion,
        best.evaluated,
        search.candidate_count(),
    )
}

/// [`best_rigid_motion`] on random coresets (accuracy `eps/4`, failure
/// probability `delta/2` per side), re-evaluated on the full sets. Sets no
/// larger than the coreset size are used whole, so the output then equals
/// [`best_rigid_motion`].
pub fn best_rigid_motion_coreset(
    kernel: &GaussianKernel,
    p: &WeightedPointSet,
    q: &WeightedPointSet,
    eps: f64,
    delta: f64,
    seed: u64,
) -> Result<Alignment> {
    check_open_unit("eps", eps)?;
    check_open_unit("delta", delta)?;
    check_same_dim(p, q)?;
    let (sp, sq) = coreset_pair(p, q, eps, delta, seed)?;
    let inner = best_rigid_motion(kernel, &sp, &sq, eps)?;
    let mut out = finish(
        kernel,
        p,
        q,
        inner.motion,
        inner.evaluated,
        inner.candidates,
    )?;
    out.coreset_sizes = Some((sp.len(), sq.len()));
    Ok(out)
}

/// Geometry of `Q` relative to one anchor point `q1`.
struct Anchor {
    /// `q - q1`, flat.
    y: Vec<f64>,
    r: Vec<f64>,
    /// Rotation grid: `cells` indices per axis of step `step` (angle in 2D,
    /// axis-angle vector components in 3D).
    cells: u32,
    step: f64,
}

struct RigidSearch<'a> {
    kernel: &'a GaussianKernel,
    p: &'a WeightedPointSet,
    q: &'a WeightedPointSet,
    dim: usize,
    spacing: f64,
    reach: f64,
    anchors: Vec<Anchor>,
    /// Single-point caps of `P` and `Q`.
    caps: (f64, f64),
    /// Objective slack granted to pruning.
    tolerance: f64,
}

/// Lattice box and rotation-index box for one anchor.
#[derive(Clone)]
struct Node {
    q1: usize,
    lo: [i64; 3],
    hi: [i64; 3],
    rlo: [u32; 3],
    rhi: [u32; 3],
}

/// `(q1, lattice point, rotation index)`.
type Key = (usize, [i64; 3], [u32; 3]);

impl<'a> RigidSearch<'a> {
    fn new(
        kernel: &'a GaussianKernel,
        p: &'a WeightedPointSet,
        q: &'a WeightedPointSet,
        eps: f64,
    ) -> Self {
        let d = p.dim();
        let sigma = kernel.sigma();
        let n = p.len().max(q.len()) as f64;
        // In 3D the grids are twice as fine and the freed error budget goes
        // to pruning: a motion within e of the optimum loses at most
        // L e W_P W_Q of objective, and the objective may lose
        // eps W_P W_Q / 2 in total.
        let fineness = if d == 3 { 0.5 } else { 1.0 };
        let eps_g = fineness * eps * sigma / d as f64;
        let eps_r = fineness * eps * sigma / (2.0 * d as f64);
        let grid_error = eps_g / 2.0 + (d - 1) as f64 * eps_r;
        let tolerance = if d == 3 {
            (eps / 2.0 - kernel.lipschitz_bound() * grid_error).max(0.0)
                * p.total_mass()
                * q.total_mass()
        } else {
            0.0
        };
        let radius = sigma * (1.0 / eps).max(n * n).ln().sqrt();
        let anchors = (0..q.len())
            .map(|i| {
                let q1 = q.point(i);
                let y: Vec<f64> = q
                    .iter()
                    .flat_map(|(x, _)| x.iter().zip(q1).map(|(a, b)| a - b))
                    .collect();
                let r: Vec<f64> = y.chunks_exact(d).map(|v| dot(v, v).sqrt()).collect();
                let rmax = r.iter().copied().fold(0.0, f64::max);
                let (cells, step) = if rmax == 0.0 {
                    (1, TAU)
                } else if d == 2 {
                    // Nearest angle within step / 2: moves points by <= eps_r.
                    let cells = (PI * rmax / eps_r).ceil();
                    (cells as u32, TAU / cells)
                } else {
                    // Axis-angle cube centers, odd count so the identity is one.
                    // The nearest center is within sqrt(3) step / 2 of any
                    // rotation vector, which moves points by <= 2 eps_r.
                    let step = 4.0 * eps_r / (3f64.sqrt() * rmax);
                    let half = (PI / step).ceil();
                    ((2.0 * half + 1.0) as u32, step)
                };
                Anchor { y, r, cells, step }
            })
            .collect();
        Self {
            kernel,
            p,
            q,
            dim: d,
            spacing: lattice_spacing(eps_g, d),
            reach: radius + eps_g / 2.0,
            anchors,
            caps: (single_point_cap(kernel, p), single_point_cap(kernel, q)),
            tolerance,
        }
    }

    fn rot_dims(&self) -> usize {
        if self.dim == 2 {
            1
        } else {
            3
        }
    }

    fn roots(&self) -> Vec<Item<Node, Key>> {
        let (lo, hi) = self.p.bounding_box();
        let mut blo = [0i64; 3];
        let mut bhi = [0i64; 3];
        for k in 0..self.dim {
            blo[k] = ((lo[k] - self.reach) / self.spacing).ceil() as i64;
            bhi[k] = ((hi[k] + self.reach) / self.spacing).floor() as i64;
        }
        (0..self.q.len())
            .filter_map(|q1| {
                let mut rhi = [0u32; 3];
                for k in 0..self.rot_dims() {
                    rhi[k] = self.anchors[q1].cells - 1;
                }
                self.score(Node {
                    q1,
                    lo: blo,
                    hi: bhi,
                    rlo: [0; 3],
                    rhi,
                })
            })
            .collect()
    }

    fn candidate_count(&self) -> u64 {
        let lattice: u64 = (0..self.p.len())
            .map(|i| ball_lattice_count(self.p.point(i), self.reach, self.spacing))
            .sum();
        let rotations: u64 = self
            .anchors
            .iter()
            .map(|a| (a.cells as u64).pow(self.rot_dims() as u32))
            .sum();
        lattice * rotations
    }

    /// Rotation at fractional grid coordinates `c` (cell index units).
    fn rotation(&self, q1: usize, c: [f64; 3]) -> Vec<f64> {
        let a = &self.anchors[q1];
        if self.dim == 2 {
            let (s, co) = (c[0] * a.step).sin_cos();
            return vec![co, -s, s, co];
        }
        let mid = (a.cells - 1) as f64 / 2.0;
        let v: [f64; 3] = std::array::from_fn(|k| (c[k] - mid) * a.step);
        let angle = dot(&v, &v).sqrt();
        if angle == 0.0 {
            return vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
        }
        axis_angle(&[v[0] / angle, v[1] / angle, v[2] / angle], angle).to_vec()
    }

    fn motion(&self, key: &Key) -> RigidMotion {
        let &(q1, z, ri) = key;
        let d = self.dim;
        let anchor = self.q.point(q1).to_vec();
        let t = (0..d)
            .map(|k| z[k] as f64 * self.spacing - anchor[k])
            .collect();
        let c = ri.map(|x| x as f64);
        let rotation = if d == 2 {
            Rotation::Angle(c[0] * self.anchors[q1].step)
        } else {
            Rotation::Matrix(self.rotation(q1, c))
        };
        RigidMotion {
            dim: d,
            translation: t,
            rotation,
            anchor,
        }
    }

    fn score(&self, n: Node) -> Option<Item<Node, Key>> {
        let d = self.dim;
        let rd = self.rot_dims();
        let mut g0 = [0.0; 3];
        let mut rb2 = 0.0;
        for k in 0..d {
            g0[k] = (n.lo[k] + n.hi[k]) as f64 * 0.5 * self.spacing;
            rb2 += ((n.hi[k] - n.lo[k]) as f64 * 0.5 * self.spacing).powi(2);
        }
        let rb = rb2.sqrt();
        if (0..self.p.len()).all(|a| sq_dist(self.p.point(a), &g0[..d]).sqrt() - rb > self.reach) {
            return None;
        }
        let anchor = &self.anchors[n.q1];
        let mut c = [0.0; 3];
        let mut half2 = 0.0;
        for k in 0..rd {
            c[k] = (n.rlo[k] + n.rhi[k]) as f64 * 0.5;
            half2 += ((n.rhi[k] - n.rlo[k]) as f64 * 0.5 * anchor.step).powi(2);
        }
        let half = half2.sqrt();
        let m = self.rotation(n.q1, c);
        let images = self.images(n.q1, &g0, &m);
        let leaf = rb == 0.0 && half == 0.0;
        let s2 = self.kernel.sigma() * self.kernel.sigma();
        if leaf {
            let v = pairwise_sum_by(self.p.len(), |a| {
                let pa = self.p.point(a);
                let inner = pairwise_sum_by(self.q.len(), |b| {
                    self.q.mass(b)
                        * self
                            .kernel
                            .of_sq_dist(sq_dist(pa, &images[b * d..(b + 1) * d]))
                });
                self.p.mass(a) * inner
            });
            return Some(Item::Leaf((n.q1, n.lo, n.rlo), v));
        }
        let ub = capped_sum(self.p, self.q, self.caps, |a, b| {
            let dist = sq_dist(self.p.point(a), &images[b * d..(b + 1) * d]).sqrt();
            let gap = (dist - rb - anchor.r[b] * half).max(0.0);
            (-gap * gap / s2).exp()
        });
        Some(Item::Branch(n, ub))
    }

    fn images(&self, q1: usize, g: &[f64; 3], m: &[f64]) -> Vec<f64> {
        let d = self.dim;
        let y = &self.anchors[q1].y;
        let mut out = vec![0.0; y.len()];
        for (src, dst) in y.chunks_exact(d).zip(out.chunks_exact_mut(d)) {
            for i in 0..d {
                dst[i] = g[i] + (0..d).map(|k| m[i * d + k] * src[k]).sum::<f64>();
            }
        }
        out
    }
}

impl BranchBound for RigidSearch<'_> {
    type Node = Node;
    type Key = Key;

    fn cost(&self) -> f64 {
        (self.p.len() * self.q.len()) as f64
    }

    fn expand(&self, n: Node) -> Vec<Item<Node, Key>> {
        let d = self.dim;
        let anchor = &self.anchors[n.q1];
        let rmax = anchor.r.iter().copied().fold(0.0, f64::max);
        // Split whichever axis contributes the largest displacement.
        let t_axis = (0..d)
            .max_by_key(|&k| (n.hi[k] - n.lo[k], std::cmp::Reverse(k)))
            .unwrap();
        let t_len = (n.hi[t_axis] - n.lo[t_axis]) as f64 * self.spacing;
        let r_axis = (0..self.rot_dims())
            .max_by_key(|&k| (n.rhi[k] - n.rlo[k], std::cmp::Reverse(k)))
            .unwrap();
        let r_len = (n.rhi[r_axis] - n.rlo[r_axis]) as f64 * anchor.step * rmax;
        let (mut a, mut b) = (n.clone(), n.clone());
        if n.rhi[r_axis] > n.rlo[r_axis] && (r_len >= t_len || n.hi[t_axis] == n.lo[t_axis]) {
            let mid = n.rlo[r_axis] + (n.rhi[r_axis] - n.rlo[r_axis]) / 2;
            a.rhi[r_axis] = mid;
            b.rlo[r_axis] = mid + 1;
        } else {
            let mid = n.lo[t_axis] + (n.hi[t_axis] - n.lo[t_axis]) / 2;
            a.hi[t_axis] = mid;
            b.lo[t_axis] = mid + 1;
        }
        [a, b].into_iter().filter_map(|c| self.score(c)).collect()
    }
}
