//! Well-separated pair decomposition and the kernel-distance estimator built
//! on it.
//!
//! The split tree halves the tight bounding box of each node across its
//! longest side. Two nodes `A`, `B` are `alpha`-separated when the larger of
//! their box diagonals is at most `alpha` times the distance between the
//! boxes; then every cross distance is within `2 alpha D` of the
//! representative distance `D`.

use crate::distance::clamp_squared_distance;
use crate::error::{check_open_unit, invalid, Error, Result};
use crate::kernel::GaussianKernel;
use crate::points::{check_same_dim, joint_mass, WeightedPointSet};
use crate::sum::sq_dist;

/// Largest supported dimension; the pair count grows like `alpha^-d`.
pub const MAX_DIM: usize = 4;

const NONE: u32 = u32::MAX;

/// Which input set a point of the union came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    P = 0,
    Q = 1,
}

#[derive(Debug, Clone)]
pub struct Node {
    lo: [f64; MAX_DIM],
    hi: [f64; MAX_DIM],
    start: u32,
    end: u32,
    left: u32,
    right: u32,
    rep: u32,
    /// Total mass of the node's points from `P` and from `Q`.
    pub mass: [f64; 2],
}

impl Node {
    pub fn is_leaf(&self) -> bool {
        self.left == NONE
    }

    /// Index (into the union) of the representative point.
    pub fn rep(&self) -> usize {
        self.rep as usize
    }

    pub fn len(&self) -> usize {
        (self.end - self.start) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }

    pub fn children(&self) -> Option<(usize, usize)> {
        (!self.is_leaf()).then_some((self.left as usize, self.right as usize))
    }

    fn diag_sq(&self, dim: usize) -> f64 {
        (0..dim).map(|k| (self.hi[k] - self.lo[k]).powi(2)).sum()
    }
}

fn box_dist_sq(a: &Node, b: &Node, dim: usize) -> f64 {
    let mut s = 0.0;
    for k in 0..dim {
        let gap = (a.lo[k] - b.hi[k]).max(b.lo[k] - a.hi[k]).max(0.0);
        s += gap * gap;
    }
    s
}

/// Split tree over the union `P` then `Q`. Points are numbered in that order.
#[derive(Debug, Clone)]
pub struct SplitTree {
    dim: usize,
    coords: Vec<f64>,
    masses: Vec<f64>,
    sides: Vec<Side>,
    order: Vec<u32>,
    nodes: Vec<Node>,
}

impl SplitTree {
    /// Tree over a single set (every point labelled `P`).
    pub fn build(p: &WeightedPointSet) -> Result<Self> {
        Self::from_parts(
            p.dim(),
            p.coords().to_vec(),
            p.masses().to_vec(),
            vec![Side::P; p.len()],
        )
    }

    /// Tree over the disjoint union of `P` and `Q`.
    pub fn build_joint(p: &WeightedPointSet, q: &WeightedPointSet) -> Result<Self> {
        check_same_dim(p, q)?;
        let mut coords = p.coords().to_vec();
        coords.extend_from_slice(q.coords());
        let mut masses = p.masses().to_vec();
        masses.extend_from_slice(q.masses());
        let mut sides = vec![Side::P; p.len()];
        sides.resize(p.len() + q.len(), Side::Q);
        Self::from_parts(p.dim(), coords, masses, sides)
    }

    fn from_parts(
        dim: usize,
        coords: Vec<f64>,
        masses: Vec<f64>,
        sides: Vec<Side>,
    ) -> Result<Self> {
        if dim > MAX_DIM {
            return Err(Error::Unsupported(format!(
                "WSPD supports d <= {MAX_DIM}, got d = {dim}"
            )));
        }
        let n = masses.len();
        if n >= NONE as usize {
            return Err(invalid("n", "too many points"));
        }
        let mut tree = Self {
            dim,
            coords,
            masses,
            sides,
            order: (0..n as u32).collect(),
            nodes: Vec::with_capacity(2 * n),
        };
        if n > 0 {
            tree.build_nodes();
        }
        Ok(tree)
    }

    fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    fn make_node(&self, start: u32, end: u32) -> Node {
        let mut lo = [0.0; MAX_DIM];
        let mut hi = [0.0; MAX_DIM];
        lo[..self.dim].fill(f64::INFINITY);
        hi[..self.dim].fill(f64::NEG_INFINITY);
        let mut mass = [0.0; 2];
        let mut rep = u32::MAX;
        for &i in &self.order[start as usize..end as usize] {
            let x = self.point(i as usize);
            for k in 0..self.dim {
                lo[k] = lo[k].min(x[k]);
                hi[k] = hi[k].max(x[k]);
            }
            mass[self.sides[i as usize] as usize] += self.masses[i as usize];
            rep = rep.min(i);
        }
        Node {
            lo,
            hi,
            start,
            end,
            left: NONE,
            right: NONE,
            rep,
            mass,
        }
    }

    fn build_nodes(&mut self) {
        let root = self.make_node(0, self.order.len() as u32);
        self.nodes.push(root);
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            let (start, end) = (self.nodes[id].start as usize, self.nodes[id].end as usize);
            if end - start < 2 {
                continue;
            }
            let node = &self.nodes[id];
            let axis = (0..self.dim)
                .max_by(|&a, &b| {
                    (node.hi[a] - node.lo[a])
                        .partial_cmp(&(node.hi[b] - node.lo[b]))
                        .unwrap()
                        .then(b.cmp(&a))
                })
                .unwrap();
            let extent = node.hi[axis] - node.lo[axis];
            let mut mid = start;
            if extent > 0.0 {
                let cut = node.lo[axis] + 0.5 * extent;
                let (dim, coords) = (self.dim, &self.coords);
                let slice = &mut self.order[start..end];
                // Stable partition keeps index order inside each side.
                let (mut left, right): (Vec<u32>, Vec<u32>) = slice
                    .iter()
                    .partition(|&&i| coords[i as usize * dim + axis] <= cut);
                mid = start + left.len();
                left.extend(right);
                slice.copy_from_slice(&left);
            }
            if mid == start || mid == end {
                mid = start + (end - start) / 2;
            }
            let l = self.make_node(start as u32, mid as u32);
            let r = self.make_node(mid as u32, end as u32);
            let li = self.nodes.len();
            self.nodes.push(l);
            self.nodes.push(r);
            self.nodes[id].left = li as u32;
            self.nodes[id].right = li as u32 + 1;
            stack.push(li + 1);
            stack.push(li);
        }
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

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> &Node {
        &self.nodes[id]
    }

    /// Union indices of the points below `id`.
    pub fn points_of(&self, id: usize) -> impl Iterator<Item = usize> + '_ {
        let n = &self.nodes[id];
        self.order[n.start as usize..n.end as usize]
            .iter()
            .map(|&i| i as usize)
    }

    pub fn coords_of(&self, i: usize) -> &[f64] {
        self.point(i)
    }

    pub fn side_of(&self, i: usize) -> Side {
        self.sides[i]
    }

    /// Walk the `alpha`-separated pairs. Node pairs whose boxes are farther
    /// apart than `cutoff` are skipped together with everything below them.
    /// Unseparated node pairs spanning at most `block` point pairs are handed
    /// over whole as [`Visit::Block`], and nodes with at most `block` internal
    /// pairs as [`Visit::Within`].
    fn for_each_pair<F: FnMut(Visit)>(&self, alpha: f64, cutoff: f64, block: usize, mut visit: F) {
        if self.nodes.is_empty() {
            return;
        }
        let dim = self.dim;
        let cutoff_sq = cutoff * cutoff;
        let mut stack: Vec<(u32, u32)> = Vec::new();
        let mut within = vec![0u32];
        while let Some(s) = within.pop() {
            let node = &self.nodes[s as usize];
            if node.is_leaf() {
                continue;
            }
            let m = node.len();
            if m * (m - 1) / 2 <= block {
                visit(Visit::Within(s as usize));
                continue;
            }
            within.push(node.right);
            within.push(node.left);
            stack.push((node.left, node.right));
            while let Some((a, b)) = stack.pop() {
                let (na, nb) = (&self.nodes[a as usize], &self.nodes[b as usize]);
                let gap = box_dist_sq(na, nb, dim);
                if gap > cutoff_sq {
                    continue;
                }
                let (da, db) = (na.diag_sq(dim), nb.diag_sq(dim));
                if da.max(db) <= alpha * alpha * gap {
                    visit(Visit::Separated(a as usize, b as usize));
                } else if na.len() * nb.len() <= block {
                    visit(Visit::Block(a as usize, b as usize));
                } else if nb.is_leaf() || (!na.is_leaf() && da >= db) {
                    stack.push((na.right, b));
                    stack.push((na.left, b));
                } else {
                    stack.push((a, nb.right));
                    stack.push((a, nb.left));
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Visit {
    Separated(usize, usize),
    /// All point pairs across two nodes.
    Block(usize, usize),
    /// All point pairs inside one node.
    Within(usize),
}

/// One separated pair `{A, B}`.
#[derive(Debug, Clone, PartialEq)]
pub struct WspdPair {
    /// Node ids in the split tree.
    pub a: usize,
    pub b: usize,
    /// Representative points (union indices).
    pub rep_a: usize,
    pub rep_b: usize,
    /// Distance between the representatives.
    pub distance: f64,
    /// `[P mass, Q mass]` of each side.
    pub mass_a: [f64; 2],
    pub mass_b: [f64; 2],
    pub size_a: usize,
    pub size_b: usize,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 0.5 {
        Ok(())
    } else {
        Err(invalid("alpha", format!("{alpha} is not in (0, 1/2)")))
    }
}

fn make_pair(tree: &SplitTree, a: usize, b: usize) -> WspdPair {
    let (na, nb) = (tree.node(a), tree.node(b));
    WspdPair {
        a,
        b,
        rep_a: na.rep(),
        rep_b: nb.rep(),
        distance: sq_dist(tree.point(na.rep()), tree.point(nb.rep())).sqrt(),
        mass_a: na.mass,
        mass_b: nb.mass,
        size_a: na.len(),
        size_b: nb.len(),
    }
}

/// Build an `alpha`-WSPD of a single point set.
pub fn build_wspd(points: &WeightedPointSet, alpha: f64) -> Result<(SplitTree, Vec<WspdPair>)> {
    check_alpha(alpha)?;
    let tree = SplitTree::build(points)?;
    let pairs = wspd_pairs(&tree, alpha)?;
    Ok((tree, pairs))
}

/// All `alpha`-separated pairs of an existing tree.
pub fn wspd_pairs(tree: &SplitTree, alpha: f64) -> Result<Vec<WspdPair>> {
    check_alpha(alpha)?;
    let mut pairs = Vec::new();
    tree.for_each_pair(alpha, f64::INFINITY, 0, |v| match v {
        Visit::Separated(a, b) => pairs.push(make_pair(tree, a, b)),
        Visit::Block(..) | Visit::Within(_) => unreachable!("singleton pairs are separated"),
    });
    Ok(pairs)
}

/// Separation parameter used for error budget `eps/4` per similarity term.
///
/// Takes the smaller of `eps / (4 sqrt(ln(4/eps)))` and
/// `e eps / (16 + 2 e eps)`. The second value makes the per-pair error at most
/// `eps/4` for every distance: a relative distance error of `2 alpha/(1 - 2 alpha)`
/// changes `exp(-t^2)` by at most `(2/e) * 2 alpha / (1 - 2 alpha)`.
pub fn alpha_for_eps(eps: f64) -> Result<f64> {
    check_open_unit("eps", eps)?;
    let e = std::f64::consts::E;
    let a1 = 0.25 * eps / (4.0 / eps).ln().sqrt();
    let a2 = e * eps / (16.0 + 2.0 * e * eps);
    Ok(a1.min(a2))
}

/// Pairs whose representatives are farther apart than this are dropped:
/// `2 sigma sqrt(ln(4/eps))`.
pub fn pruning_radius(kernel: &GaussianKernel, eps: f64) -> Result<f64> {
    check_open_unit("eps", eps)?;
    Ok(2.0 * kernel.sigma() * (4.0 / eps).ln().sqrt())
}

/// The three similarities estimated from one decomposition, plus the number of
/// pairs that contributed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WspdEstimate {
    pub kappa_pp: f64,
    pub kappa_qq: f64,
    pub kappa_pq: f64,
    /// Separated pairs evaluated at their representatives.
    pub pairs: usize,
    /// Point pairs in small unseparated blocks, summed exactly.
    pub exact_pairs: u64,
    pub alpha: f64,
}

#[derive(Default)]
struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    #[inline]
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Running `kappa` sums over unordered pairs of distinct points.
#[derive(Default)]
struct Terms {
    pp: Kahan,
    qq: Kahan,
    pq: Kahan,
}

impl Terms {
    /// Add `[PP, QQ, PQ, QP]` cross sums between two disjoint groups.
    fn block(&mut self, s: &[f64; 4]) {
        self.pp.add(2.0 * s[0]);
        self.qq.add(2.0 * s[1]);
        self.pq.add(s[2] + s[3]);
    }
}

/// Unseparated node pairs with at most this many point pairs are summed
/// exactly instead of being refined further.
const EXACT_BLOCK: usize = 64;

/// Estimate `kappa(P,P)`, `kappa(Q,Q)` and `kappa(P,Q)` from one WSPD of
/// `P` union `Q`, each within `(eps/4) W_P W_Q`-type budgets.
pub fn wspd_estimate(
    kernel: &GaussianKernel,
    p: &WeightedPointSet,
    q: &WeightedPointSet,
    eps: f64,
) -> Result<WspdEstimate> {
    check_same_dim(p, q)?;
    let alpha = alpha_for_eps(eps)?;
    let cutoff = pruning_radius(kernel, eps)?;
    let tree = SplitTree::build_joint(p, q)?;
    let mut terms = Terms::default();
    for &m in p.masses() {
        terms.pp.add(m * m);
    }
    for &m in q.masses() {
        terms.qq.add(m * m);
    }
    let mut count = 0usize;
    let mut exact_pairs = 0u64;
    let cutoff_sq = cutoff * cutoff;
    let split = |i: usize| match tree.side_of(i) {
        Side::P => (tree.masses[i], 0.0),
        Side::Q => (0.0, tree.masses[i]),
    };
    tree.for_each_pair(alpha, cutoff, EXACT_BLOCK, |v| match v {
        Visit::Separated(a, b) => {
            let (na, nb) = (tree.node(a), tree.node(b));
            let d2 = sq_dist(tree.point(na.rep()), tree.point(nb.rep()));
            if d2 <= cutoff_sq {
                count += 1;
                let [ap, aq] = na.mass;
                let [bp, bq] = nb.mass;
                let k = kernel.of_sq_dist(d2);
                terms.block(&[ap * bp * k, aq * bq * k, ap * bq * k, aq * bp * k]);
            }
        }
        Visit::Block(a, b) => {
            let mut s = [0.0; 4];
            for i in tree.points_of(a) {
                let (ip, iq) = split(i);
                for j in tree.points_of(b) {
                    let (jp, jq) = split(j);
                    let k = kernel.of_sq_dist(sq_dist(tree.point(i), tree.point(j)));
                    s[0] += ip * jp * k;
                    s[1] += iq * jq * k;
                    s[2] += ip * jq * k;
                    s[3] += iq * jp * k;
                }
            }
            exact_pairs += (tree.node(a).len() * tree.node(b).len()) as u64;
            terms.block(&s);
        }
        Visit::Within(a) => {
            let idx: Vec<usize> = tree.points_of(a).collect();
            let mut s = [0.0; 4];
            for (x, &i) in idx.iter().enumerate() {
                let (ip, iq) = split(i);
                for &j in &idx[x + 1..] {
                    let (jp, jq) = split(j);
                    let k = kernel.of_sq_dist(sq_dist(tree.point(i), tree.point(j)));
                    s[0] += ip * jp * k;
                    s[1] += iq * jq * k;
                    s[2] += ip * jq * k;
                    s[3] += iq * jp * k;
                }
            }
            exact_pairs += (idx.len() * (idx.len() - 1) / 2) as u64;
            terms.block(&s);
        }
    });
    Ok(WspdEstimate {
        kappa_pp: terms.pp.value(),
        kappa_qq: terms.qq.value(),
        kappa_pq: terms.pq.value(),
        pairs: count,
        exact_pairs,
        alpha,
    })
}

/// WSPD estimate of `kappa(P, Q)` within `(eps/4) W_P W_Q`.
pub fn kappa_wspd(
    kernel: &GaussianKernel,
    p: &WeightedPointSet,
    q: &WeightedPointSet,
    eps: f64,
) -> Result<f64> {
    check_same_dim(p, q)?;
    if p.is_empty() || q.is_empty() {
        check_open_unit("eps", eps)?;
        return Ok(0.0);
    }
    Ok(wspd_estimate(kernel, p, q, eps)?.kappa_pq)
}

/// Estimate `U` of the squared kernel distance with `|U - D_K^2| <= eps W^2`.
///
/// `U` is returned unclamped; it can be slightly negative for nearly equal
/// sets. Use [`kernel_distance_wspd_checked`] for a clamped value.
pub fn kernel_distance_wspd(
    kernel: &GaussianKernel,
    p: &WeightedPointSet,
    q: &WeightedPointSet,
    eps: f64,
) -> Result<f64> {
    let e = wspd_estimate(kernel, p, q, eps)?;
    Ok((e.kappa_pp + e.kappa_qq) - 2.0 * e.kappa_pq)
}

/// `max(U, 0)`, or an error if `U` is below `-eps W^2` (which would mean the
/// bound was violated).
pub fn kernel_distance_wspd_checked(
    kernel: &GaussianKernel,
    p: &WeightedPointSet,
    q: &WeightedPointSet,
    eps: f64,
) -> Result<f64> {
    let u = kernel_distance_wspd(kernel, p, q, eps)?;
    let w = joint_mass(p, q);
    if u < 0.0 && u >= -eps * w * w {
        Ok(0.0)
    } else {
        clamp_squared_distance(u, w)
    }
}
