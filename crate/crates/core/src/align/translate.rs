use super::grid::{advance, lattice_spacing};
use super::search::{maximize, BranchBound, Item};
use super::{finish, Alignment, RigidMotion};
use crate::coreset::{coreset_random_stream, coreset_size_random};
use crate::error::{check_open_unit, Error, Result};
use crate::kernel::GaussianKernel;
use crate::points::{check_same_dim, WeightedPointSet};
use crate::rng::Stream;
use crate::sum::{pairwise_sum_by, sq_dist};

/// Kernel evaluations allowed in one translation search.
pub(crate) const TRANSLATION_WORK_LIMIT: f64 = 5e11;

/// Search radius `sigma sqrt(ln(n^2))` around each point of `P`.
pub(crate) fn feasibility_radius(kernel: &GaussianKernel, n: usize) -> f64 {
    kernel.sigma() * (2.0 * (n as f64).ln()).max(0.0).sqrt()
}

/// Translation minimizing `D_K(P, Q + T)` over the lattice candidates
/// `T = g - q`, `g` within `sigma sqrt(ln n^2)` of a point of `P`, lattice
/// covering radius `eps sigma / 4`. The result is within `eps W^2` of the
/// optimal squared distance.
pub fn best_translation(
    kernel: &GaussianKernel,
    p: &WeightedPointSet,
    q: &WeightedPointSet,
    eps: f64,
) -> Result<Alignment> {
    check_open_unit("eps", eps)?;
    check_same_dim(p, q)?;
    if p.is_empty() || q.is_empty() {
        return Err(Error::EmptyInput("alignment needs non-empty P and Q"));
    }
    let search = TranslationSearch::new(kernel, p, q, eps);
    let (t, evaluated) = search.run()?;
    finish(
        kernel,
        p,
        q,
        RigidMotion::translation(t),
        evaluated,
        search.candidate_count(),
    )
}

/// [`best_translation`] on random coresets of `P` and `Q` (accuracy `eps/4`,
/// failure probability `delta/2` each); the returned distance is evaluated
/// on the full sets. Sets no larger than the coreset size are used whole.
pub fn best_translation_coreset(
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
    let inner = best_translation(kernel, &sp, &sq, eps)?;
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

/// Merged coresets for both sides, or the sets themselves when small.
pub(crate) fn coreset_pair(
    p: &WeightedPointSet,
    q: &WeightedPointSet,
    eps: f64,
    delta: f64,
    seed: u64,
) -> Result<(WeightedPointSet, WeightedPointSet)> {
    let k = coreset_size_random(eps / 4.0, delta / 2.0, p.dim())?;
    let side = |s: &WeightedPointSet, stream: Stream| -> Result<WeightedPointSet> {
        if k >= s.len() {
            Ok(s.clone())
        } else {
            Ok(coreset_random_stream(s, k, seed, stream)?.merged())
        }
    };
    Ok((
        side(p, Stream::CoresetFirst)?,
        side(q, Stream::CoresetSecond)?,
    ))
}

struct TranslationSearch<'a> {
    kernel: &'a GaussianKernel,
    p: &'a WeightedPointSet,
    q: &'a WeightedPointSet,
    dim: usize,
    spacing: f64,
    /// Translations farther than this from every difference `p - q` are not candidates.
    reach: f64,
    /// Blocks that cannot beat the incumbent by more than this are dropped.
    tolerance: f64,
}

/// Box of lattice translations `spacing * z`, `lo <= z <= hi`.
#[derive(Clone)]
struct Node {
    lo: Vec<i64>,
    hi: Vec<i64>,
}

impl<'a> TranslationSearch<'a> {
    fn new(
        kernel: &'a GaussianKernel,
        p: &'a WeightedPointSet,
        q: &'a WeightedPointSet,
        eps: f64,
    ) -> Self {
        let dim = p.dim();
        let eps_g = eps * kernel.sigma() / 2.0;
        let spacing = lattice_spacing(eps_g, dim);
        let radius = feasibility_radius(kernel, p.len().max(q.len()));
        // The grid loses at most L eps_g/2 W_P W_Q of objective and the
        // objective may lose eps W_P W_Q / 2 in total; the rest goes to pruning.
        let tolerance = (eps / 2.0 - kernel.lipschitz_bound() * eps_g / 2.0).max(0.0)
            * p.total_mass()
            * q.total_mass();
        Self {
            kernel,
            p,
            q,
            dim,
            spacing,
            reach: radius + eps_g / 2.0,
            tolerance,
        }
    }

    fn root(&self) -> Node {
        let (plo, phi) = self.p.bounding_box();
        let (qlo, qhi) = self.q.bounding_box();
        Node {
            lo: (0..self.dim)
                .map(|k| ((plo[k] - qhi[k] - self.reach) / self.spacing).ceil() as i64)
                .collect(),
            hi: (0..self.dim)
                .map(|k| ((phi[k] - qlo[k] + self.reach) / self.spacing).floor() as i64)
                .collect(),
        }
    }

    /// Size of the `(p, q, g)` candidate set, `g` on the grid around `p`.
    fn candidate_count(&self) -> u64 {
        let per_p: u64 = (0..self.p.len())
            .map(|i| ball_lattice_count(self.p.point(i), self.reach, self.spacing))
            .sum();
        per_p * self.q.len() as u64
    }

    fn run(&self) -> Result<(Vec<f64>, u64)> {
        let roots = self.score(self.root()).into_iter().collect();
        let best = maximize(
            self,
            roots,
            self.tolerance,
            TRANSLATION_WORK_LIMIT,
            "use the coreset variant or a larger eps",
        )?
        .expect("the lattice point nearest to some p - q is always a candidate");
        let t = best.key.iter().map(|&z| z as f64 * self.spacing).collect();
        Ok((t, best.evaluated))
    }

    /// Center and half-diagonal of the box.
    fn ball(&self, n: &Node) -> (Vec<f64>, f64) {
        let mut c = vec![0.0; self.dim];
        let mut r2 = 0.0;
        for k in 0..self.dim {
            c[k] = (n.lo[k] + n.hi[k]) as f64 * 0.5 * self.spacing;
            let h = (n.hi[k] - n.lo[k]) as f64 * 0.5 * self.spacing;
            r2 += h * h;
        }
        (c, r2.sqrt())
    }

    /// Upper bound on the objective over the box (the exact value for a
    /// single translation); `None` if the box holds no candidate.
    fn score(&self, n: Node) -> Option<Item<Node, Vec<i64>>> {
        let (t0, r) = self.ball(&n);
        let d = self.dim;
        let s2 = self.kernel.sigma() * self.kernel.sigma();
        let reach = self.reach + r;
        let mut feasible = false;
        let mut gaps = vec![0.0; self.q.len()];
        let mut rows = Vec::with_capacity(self.p.len());
        for a in 0..self.p.len() {
            let pa = self.p.point(a);
            for (b, g) in gaps.iter_mut().enumerate() {
                let qb = self.q.point(b);
                let mut s = 0.0;
                for k in 0..d {
                    let x = pa[k] - qb[k] - t0[k];
                    s += x * x;
                }
                let dist = s.sqrt();
                feasible |= dist <= reach;
                *g = (dist - r).max(0.0);
            }
            rows.push(
                self.p.mass(a)
                    * pairwise_sum_by(self.q.len(), |b| {
                        self.q.mass(b) * (-gaps[b] * gaps[b] / s2).exp()
                    }),
            );
        }
        if !feasible {
            return None;
        }
        let bound = pairwise_sum_by(rows.len(), |i| rows[i]);
        if n.lo == n.hi {
            Some(Item::Leaf(n.lo, bound))
        } else {
            Some(Item::Branch(n, bound))
        }
    }
}

impl BranchBound for TranslationSearch<'_> {
    type Node = Node;
    type Key = Vec<i64>;

    fn cost(&self) -> f64 {
        (self.p.len() * self.q.len()) as f64
    }

    fn expand(&self, n: Node) -> Vec<Item<Node, Self::Key>> {
        let k = (0..self.dim)
            .max_by_key(|&k| (n.hi[k] - n.lo[k], std::cmp::Reverse(k)))
            .unwrap();
        let mid = n.lo[k] + (n.hi[k] - n.lo[k]).div_euclid(2);
        let mut a = n.clone();
        a.hi[k] = mid;
        let mut b = n;
        b.lo[k] = mid + 1;
        [a, b].into_iter().filter_map(|c| self.score(c)).collect()
    }
}

/// Lattice points `spacing * z` within `reach` of `c` (estimated from the
/// ball volume when there are more than a million cells to scan).
pub(crate) fn ball_lattice_count(c: &[f64], reach: f64, spacing: f64) -> u64 {
    let d = c.len();
    let lo: Vec<i64> = c
        .iter()
        .map(|x| ((x - reach) / spacing).ceil() as i64)
        .collect();
    let hi: Vec<i64> = c
        .iter()
        .map(|x| ((x + reach) / spacing).floor() as i64)
        .collect();
    let cells: f64 = lo
        .iter()
        .zip(&hi)
        .map(|(l, h)| (h - l + 1).max(0) as f64)
        .product();
    if cells > 1e6 {
        let unit = std::f64::consts::PI.powf(d as f64 / 2.0) / gamma_half(d as f64 / 2.0 + 1.0);
        return (unit * (reach / spacing).powi(d as i32)) as u64;
    }
    if cells == 0.0 {
        return 0;
    }
    let mut count = 0;
    let mut z = lo.clone();
    let mut g = vec![0.0; d];
    loop {
        for k in 0..d {
            g[k] = z[k] as f64 * spacing;
        }
        if sq_dist(&g, c) <= reach * reach {
            count += 1;
        }
        if !advance(&mut z, &lo, &hi) {
            return count;
        }
    }
}

/// Gamma function for positive half-integers and integers.
fn gamma_half(x: f64) -> f64 {
    if x == 0.5 {
        return std::f64::consts::PI.sqrt();
    }
    if x == 1.0 {
        return 1.0;
    }
    (x - 1.0) * gamma_half(x - 1.0)
}
