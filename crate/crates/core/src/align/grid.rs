use std::f64::consts::{PI, TAU};

use serde::Serialize;

use super::motion::{angle_matrix, identity_matrix, Rotation};
use crate::error::{check_positive, invalid, Error, Result};
use crate::sum::{dot, sq_dist};

/// Lattice points `(eps_g / sqrt(d)) z` near a center.
///
/// The lattice has covering radius `eps_g / 2`. Points up to
/// `radius + eps_g / 2` from the center are kept, so every point within
/// `radius` of the center has a grid point within `eps_g / 2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TranslationGrid {
    pub center: Vec<f64>,
    pub radius: f64,
    pub eps_g: f64,
    /// Lattice spacing `eps_g / sqrt(d)`.
    pub spacing: f64,
    /// Integer lattice coordinates, one row of `d` per grid point.
    pub indices: Vec<i64>,
}

/// Refuse to materialize grids larger than this.
const MAX_GRID_POINTS: usize = 50_000_000;

impl TranslationGrid {
    pub fn new(center: &[f64], radius: f64, eps_g: f64) -> Result<Self> {
        check_positive("eps_g", eps_g)?;
        if !(radius >= 0.0 && radius.is_finite()) {
            return Err(invalid(
                "radius",
                format!("{radius} is not a finite non-negative number"),
            ));
        }
        let d = center.len();
        if d == 0 {
            return Err(invalid("center", "dimension must be at least 1"));
        }
        let spacing = lattice_spacing(eps_g, d);
        let reach = radius + eps_g / 2.0;
        let lo: Vec<i64> = center
            .iter()
            .map(|c| ((c - reach) / spacing).ceil() as i64)
            .collect();
        let hi: Vec<i64> = center
            .iter()
            .map(|c| ((c + reach) / spacing).floor() as i64)
            .collect();
        let volume: f64 = lo
            .iter()
            .zip(&hi)
            .map(|(l, h)| (h - l + 1).max(0) as f64)
            .product();
        if volume > MAX_GRID_POINTS as f64 {
            return Err(Error::BudgetExceeded {
                work: volume,
                limit: MAX_GRID_POINTS as f64,
                advice: "increase eps or shrink the radius",
            });
        }
        let mut indices = Vec::new();
        let mut z = lo.clone();
        let mut g = vec![0.0; d];
        if lo.iter().zip(&hi).all(|(l, h)| l <= h) {
            loop {
                for k in 0..d {
                    g[k] = z[k] as f64 * spacing;
                }
                if sq_dist(&g, center) <= reach * reach {
                    indices.extend_from_slice(&z);
                }
                if !advance(&mut z, &lo, &hi) {
                    break;
                }
            }
        }
        Ok(Self {
            center: center.to_vec(),
            radius,
            eps_g,
            spacing,
            indices,
        })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn len(&self) -> usize {
        self.indices.len() / self.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn point(&self, i: usize) -> Vec<f64> {
        let d = self.dim();
        self.indices[i * d..(i + 1) * d]
            .iter()
            .map(|&z| z as f64 * self.spacing)
            .collect()
    }
}

pub(crate) fn lattice_spacing(eps_g: f64, d: usize) -> f64 {
    eps_g / (d as f64).sqrt()
}

/// Odometer increment over the box `[lo, hi]`; false after the last point.
pub(crate) fn advance(z: &mut [i64], lo: &[i64], hi: &[i64]) -> bool {
    for k in (0..z.len()).rev() {
        if z[k] < hi[k] {
            z[k] += 1;
            return true;
        }
        z[k] = lo[k];
    }
    false
}

/// Rotations fixing a set `S` (all rotations act about `anchor = S[0]`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RotationGrid {
    pub anchor: Vec<f64>,
    pub fixed: Vec<Vec<f64>>,
    pub eps_r: f64,
    pub extent: f64,
    /// The reachable image of `q` closest to `p`.
    pub q_hat: Vec<f64>,
    pub rotations: Vec<Rotation>,
}

impl RotationGrid {
    pub fn len(&self) -> usize {
        self.rotations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rotations.is_empty()
    }

    /// Image of `x` under candidate `i`.
    pub fn apply(&self, i: usize, x: &[f64]) -> Vec<f64> {
        let d = x.len();
        let m = match &self.rotations[i] {
            Rotation::Angle(a) => angle_matrix(*a),
            Rotation::Matrix(m) => m.clone(),
        };
        (0..d)
            .map(|r| {
                self.anchor[r]
                    + (0..d)
                        .map(|c| m[r * d + c] * (x[c] - self.anchor[c]))
                        .sum::<f64>()
            })
            .collect()
    }
}

/// Grid of rotations fixing `s` pointwise such that every reachable image
/// `q'` of `q` with `|q' - q_hat| <= lambda` has a candidate image within
/// `eps_r`, where `q_hat` is the reachable image closest to `p`.
pub fn rotation_grid(
    p: &[f64],
    q: &[f64],
    s: &[Vec<f64>],
    eps_r: f64,
    lambda: f64,
) -> Result<RotationGrid> {
    check_positive("eps_r", eps_r)?;
    check_positive("lambda", lambda)?;
    let d = p.len();
    if q.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: q.len(),
        });
    }
    if d != 2 && d != 3 {
        return Err(Error::Unsupported(format!(
            "rotation grids are implemented for d = 2 and 3, got d = {d}"
        )));
    }
    if s.is_empty() || s.len() >= d {
        return Err(invalid(
            "S",
            format!("need 1 <= |S| < d, got |S| = {}", s.len()),
        ));
    }
    if let Some(x) = s.iter().find(|x| x.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: x.len(),
        });
    }
    let anchor = s[0].clone();
    let mut grid = RotationGrid {
        anchor: anchor.clone(),
        fixed: s.to_vec(),
        eps_r,
        extent: lambda,
        q_hat: q.to_vec(),
        rotations: Vec::new(),
    };
    let identity = if d == 2 {
        Rotation::Angle(0.0)
    } else {
        Rotation::Matrix(identity_matrix(3))
    };
    let rel = |x: &[f64]| -> Vec<f64> { x.iter().zip(&anchor).map(|(a, b)| a - b).collect() };
    let y = rel(q);
    let w = rel(p);

    if d == 2 {
        let r = dot(&y, &y).sqrt();
        if r == 0.0 {
            grid.rotations.push(identity);
            return Ok(grid);
        }
        let base = y[1].atan2(y[0]);
        let target = if dot(&w, &w) > 0.0 {
            w[1].atan2(w[0])
        } else {
            base
        };
        let offset = target - base;
        grid.q_hat = vec![anchor[0] + r * target.cos(), anchor[1] + r * target.sin()];
        grid.rotations = arc_angles(r, eps_r, lambda, offset)
            .into_iter()
            .map(Rotation::Angle)
            .collect();
        return Ok(grid);
    }

    let axis_pair = if s.len() == 2 {
        let b = rel(&s[1]);
        let n = dot(&b, &b).sqrt();
        (n > 0.0).then(|| [b[0] / n, b[1] / n, b[2] / n])
    } else {
        None
    };
    match axis_pair {
        Some(axis) => {
            // One degree of freedom: rotation about the line through S.
            let h = dot(&y, &axis);
            let yp = [y[0] - h * axis[0], y[1] - h * axis[1], y[2] - h * axis[2]];
            let rho = dot(&yp, &yp).sqrt();
            if rho == 0.0 {
                grid.rotations.push(identity);
                return Ok(grid);
            }
            let e1 = [yp[0] / rho, yp[1] / rho, yp[2] / rho];
            let e2 = cross(&axis, &e1);
            let hw = dot(&w, &axis);
            let wp = [
                w[0] - hw * axis[0],
                w[1] - hw * axis[1],
                w[2] - hw * axis[2],
            ];
            let offset = if dot(&wp, &wp) > 0.0 {
                dot(&wp, &e2).atan2(dot(&wp, &e1))
            } else {
                0.0
            };
            let (so, co) = offset.sin_cos();
            grid.q_hat = (0..3)
                .map(|k| anchor[k] + h * axis[k] + rho * (co * e1[k] + so * e2[k]))
                .collect();
            grid.rotations = arc_angles(rho, eps_r, lambda, offset)
                .into_iter()
                .map(|a| Rotation::Matrix(axis_angle(&axis, a).to_vec()))
                .collect();
        }
        None => {
            // Two degrees of freedom: directions of q's image on its sphere.
            let r = dot(&y, &y).sqrt();
            if r == 0.0 {
                grid.rotations.push(identity);
                return Ok(grid);
            }
            let u = [y[0] / r, y[1] / r, y[2] / r];
            let wn = dot(&w, &w).sqrt();
            let pole = if wn > 0.0 {
                [w[0] / wn, w[1] / wn, w[2] / wn]
            } else {
                u
            };
            grid.q_hat = (0..3).map(|k| anchor[k] + r * pole[k]).collect();
            let cap = cap_angle(r, lambda);
            let step = eps_r / r.max(lambda);
            let rings = SphereRings::new(pole, step, cap);
            grid.rotations = rings
                .directions()
                .map(|v| Rotation::Matrix(min_rotation(&u, &v).to_vec()))
                .collect();
        }
    }
    Ok(grid)
}

/// Angular half-width of the arc of a radius-`r` orbit within `lambda` of a point on it.
fn cap_angle(r: f64, lambda: f64) -> f64 {
    if lambda >= 2.0 * r {
        PI
    } else {
        2.0 * (lambda / (2.0 * r)).asin()
    }
}

/// Angles whose images of a radius-`r` orbit point cover, within `eps_r`,
/// the arc of the orbit within `lambda` of the point at angle `center`.
fn arc_angles(r: f64, eps_r: f64, lambda: f64, center: f64) -> Vec<f64> {
    let step = eps_r / r.max(lambda);
    let half = cap_angle(r, lambda);
    if half >= PI || 2.0 * half + step >= TAU {
        let n = (TAU / step).ceil() as usize;
        return (0..n).map(|j| j as f64 * TAU / n as f64).collect();
    }
    let k = (half / step).ceil() as i64;
    (-k..=k).map(|j| center + j as f64 * step).collect()
}

/// Directions within angle `cap` of `pole`, on rings of constant polar angle.
///
/// Rings are at most `h` apart in polar angle and points on a ring at most
/// `h` apart in arc length, so every direction in the cap is within angle
/// `h` of some listed direction.
#[derive(Debug, Clone)]
pub(crate) struct SphereRings {
    pub pole: [f64; 3],
    pub e1: [f64; 3],
    pub e2: [f64; 3],
    /// `(polar angle, number of azimuths)` per ring.
    pub rings: Vec<(f64, usize)>,
}

impl SphereRings {
    pub fn new(pole: [f64; 3], h: f64, cap: f64) -> Self {
        let (e1, e2) = frame(&pole);
        let cap = cap.min(PI);
        let k = (cap / h).ceil().max(1.0) as usize;
        let rings = (0..=k)
            .map(|i| {
                let psi = cap * i as f64 / k as f64;
                let m = (TAU * psi.sin() / h).ceil().max(1.0) as usize;
                (psi, m)
            })
            .collect();
        Self {
            pole,
            e1,
            e2,
            rings,
        }
    }

    pub fn direction_at(&self, psi: f64, phi: f64) -> [f64; 3] {
        let (sp, cp) = psi.sin_cos();
        let (sf, cf) = phi.sin_cos();
        let mut v = [0.0; 3];
        for k in 0..3 {
            v[k] = cp * self.pole[k] + sp * (cf * self.e1[k] + sf * self.e2[k]);
        }
        v
    }

    pub fn direction(&self, ring: usize, j: usize) -> [f64; 3] {
        let (psi, m) = self.rings[ring];
        self.direction_at(psi, TAU * j as f64 / m as f64)
    }

    pub fn directions(&self) -> impl Iterator<Item = [f64; 3]> + '_ {
        self.rings
            .iter()
            .enumerate()
            .flat_map(move |(i, &(_, m))| (0..m).map(move |j| self.direction(i, j)))
    }
}

/// Directions covering the cap of angle `cap` around `pole` to angle `h`.
pub fn sphere_directions(pole: [f64; 3], h: f64, cap: f64) -> Result<Vec<[f64; 3]>> {
    check_positive("h", h)?;
    let n = dot(&pole, &pole).sqrt();
    if !(n > 0.0) {
        return Err(invalid("pole", "zero vector"));
    }
    let pole = [pole[0] / n, pole[1] / n, pole[2] / n];
    Ok(SphereRings::new(pole, h, cap).directions().collect())
}

pub(crate) fn cross(a: &[f64], b: &[f64]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Orthonormal pair perpendicular to the unit vector `n`.
pub(crate) fn frame(n: &[f64; 3]) -> ([f64; 3], [f64; 3]) {
    let k = (0..3)
        .min_by(|&a, &b| n[a].abs().total_cmp(&n[b].abs()))
        .unwrap();
    let mut e = [0.0; 3];
    e[k] = 1.0;
    let c = cross(n, &e);
    let l = dot(&c, &c).sqrt();
    let e1 = [c[0] / l, c[1] / l, c[2] / l];
    (e1, cross(n, &e1))
}

/// Rotation by `theta` about the unit `axis` (right-hand rule), row-major.
pub(crate) fn axis_angle(axis: &[f64; 3], theta: f64) -> [f64; 9] {
    let (s, c) = theta.sin_cos();
    let t = 1.0 - c;
    let [x, y, z] = *axis;
    [
        c + t * x * x,
        t * x * y - s * z,
        t * x * z + s * y,
        t * x * y + s * z,
        c + t * y * y,
        t * y * z - s * x,
        t * x * z - s * y,
        t * y * z + s * x,
        c + t * z * z,
    ]
}

/// Smallest rotation taking the unit vector `u` to the unit vector `v`.
pub(crate) fn min_rotation(u: &[f64; 3], v: &[f64; 3]) -> [f64; 9] {
    let c = cross(u, v);
    let sn = dot(&c, &c).sqrt();
    let cs = dot(u, v);
    if sn < 1e-15 {
        if cs > 0.0 {
            let mut m = [0.0; 9];
            m[0] = 1.0;
            m[4] = 1.0;
            m[8] = 1.0;
            return m;
        }
        let (e1, _) = frame(u);
        return axis_angle(&e1, PI);
    }
    axis_angle(&[c[0] / sn, c[1] / sn, c[2] / sn], sn.atan2(cs))
}
