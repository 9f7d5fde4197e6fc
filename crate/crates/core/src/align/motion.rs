use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::points::WeightedPointSet;

/// Rotation part of a rigid motion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rotation {
    /// Counter-clockwise angle in radians (2D only).
    Angle(f64),
    /// Row-major `d x d` orthonormal matrix with determinant +1.
    Matrix(Vec<f64>),
}

/// `x -> R (x - anchor) + anchor + T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidMotion {
    pub dim: usize,
    pub translation: Vec<f64>,
    pub rotation: Rotation,
    pub anchor: Vec<f64>,
}

/// Orthonormality tolerance on `|R R^T - I|` (max entry).
const ORTHO_TOL: f64 = 1e-12;

pub(crate) fn angle_matrix(theta: f64) -> Vec<f64> {
    let (s, c) = theta.sin_cos();
    vec![c, -s, s, c]
}

impl RigidMotion {
    pub fn identity(dim: usize) -> Self {
        Self::translation(vec![0.0; dim])
    }

    pub fn translation(t: Vec<f64>) -> Self {
        let dim = t.len();
        let rotation = if dim == 2 {
            Rotation::Angle(0.0)
        } else {
            Rotation::Matrix(identity_matrix(dim))
        };
        Self {
            dim,
            translation: t,
            rotation,
            anchor: vec![0.0; dim],
        }
    }

    /// Rotation about `anchor` followed by translation by `t`.
    pub fn new(rotation: Rotation, anchor: Vec<f64>, t: Vec<f64>) -> Result<Self> {
        let m = Self {
            dim: t.len(),
            translation: t,
            rotation,
            anchor,
        };
        m.validate()?;
        Ok(m)
    }

    /// Checks lengths, finiteness and orthonormality.
    pub fn validate(&self) -> Result<()> {
        let d = self.dim;
        if d == 0 {
            return Err(invalid("motion", "dimension must be at least 1"));
        }
        for v in [&self.translation, &self.anchor] {
            if v.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(invalid("motion", "non-finite component"));
            }
        }
        match &self.rotation {
            Rotation::Angle(a) => {
                if d != 2 {
                    return Err(invalid("motion", "an angle rotation requires d = 2"));
                }
                if !a.is_finite() {
                    return Err(invalid("motion", "non-finite angle"));
                }
            }
            Rotation::Matrix(m) => {
                if m.len() != d * d {
                    return Err(Error::DimensionMismatch {
                        expected: d * d,
                        found: m.len(),
                    });
                }
                let err = orthonormality_error(m, d);
                if !(err <= ORTHO_TOL) {
                    return Err(invalid(
                        "motion",
                        format!("rotation is not orthonormal (|R R^T - I| = {err:e})"),
                    ));
                }
                if determinant(m, d) < 0.0 {
                    return Err(invalid("motion", "rotation has determinant -1"));
                }
            }
        }
        Ok(())
    }

    pub(crate) fn check_dim(&self, d: usize) -> Result<()> {
        if self.dim != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: self.dim,
            });
        }
        Ok(())
    }

    /// Row-major rotation matrix.
    pub fn matrix(&self) -> Vec<f64> {
        match &self.rotation {
            Rotation::Angle(a) => angle_matrix(*a),
            Rotation::Matrix(m) => m.clone(),
        }
    }

    pub fn apply_point(&self, x: &[f64], out: &mut [f64]) {
        let d = self.dim;
        let m = self.matrix();
        apply_with(&m, d, &self.anchor, &self.translation, x, out);
    }

    pub fn apply(&self, q: &WeightedPointSet) -> WeightedPointSet {
        let d = self.dim;
        let m = self.matrix();
        q.map_points(|x, out| apply_with(&m, d, &self.anchor, &self.translation, x, out))
    }

    /// Same motion written as `x -> R x + T'` (anchor at the origin).
    pub fn canonical(&self) -> Self {
        let d = self.dim;
        let m = self.matrix();
        let mut t = vec![0.0; d];
        apply_with(
            &m,
            d,
            &self.anchor,
            &self.translation,
            &vec![0.0; d],
            &mut t,
        );
        Self {
            dim: d,
            translation: t,
            rotation: self.rotation.clone(),
            anchor: vec![0.0; d],
        }
    }
}

#[inline]
fn apply_with(m: &[f64], d: usize, a: &[f64], t: &[f64], x: &[f64], out: &mut [f64]) {
    for i in 0..d {
        let mut s = 0.0;
        for j in 0..d {
            s += m[i * d + j] * (x[j] - a[j]);
        }
        out[i] = s + a[i] + t[i];
    }
}

pub(crate) fn identity_matrix(d: usize) -> Vec<f64> {
    let mut m = vec![0.0; d * d];
    for i in 0..d {
        m[i * d + i] = 1.0;
    }
    m
}

fn orthonormality_error(m: &[f64], d: usize) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            let s: f64 = (0..d).map(|k| m[i * d + k] * m[j * d + k]).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((s - target).abs());
        }
    }
    worst
}

fn determinant(m: &[f64], d: usize) -> f64 {
    match d {
        1 => m[0],
        2 => m[0] * m[3] - m[1] * m[2],
        3 => {
            m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6])
                + m[2] * (m[3] * m[7] - m[4] * m[6])
        }
        _ => {
            // Gaussian elimination with partial pivoting.
            let mut a = m.to_vec();
            let mut det = 1.0;
            for c in 0..d {
                let piv = (c..d)
                    .max_by(|&x, &y| a[x * d + c].abs().total_cmp(&a[y * d + c].abs()))
                    .unwrap();
                if a[piv * d + c] == 0.0 {
                    return 0.0;
                }
                if piv != c {
                    for k in 0..d {
                        a.swap(piv * d + k, c * d + k);
                    }
                    det = -det;
                }
                det *= a[c * d + c];
                for r in c + 1..d {
                    let f = a[r * d + c] / a[c * d + c];
                    for k in c..d {
                        a[r * d + k] -= f * a[c * d + k];
                    }
                }
            }
            det
        }
    }
}
