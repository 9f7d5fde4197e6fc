//! Exact quadratic-time evaluation of the cross-similarity
//! `kappa(P, Q) = sum_p sum_q mu(p) nu(q) K(p, q)` and of the kernel distance
//! `D_K(P, Q) = sqrt(kappa(P,P) + kappa(Q,Q) - 2 kappa(P,Q))`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::points::{check_same_dim, joint_mass, WeightedPointSet};
use crate::sum::{pairwise_sum, pairwise_sum_by};

/// Negative radicands down to `-RADICAND_TOLERANCE * W^2` are treated as 0.
pub const RADICAND_TOLERANCE: f64 = 1e-9;

/// Rows above this count are summed in parallel.
const PAR_ROWS: usize = 256;

/// Weighted double sum over two flat coordinate buffers. Weights may be
/// signed (oriented inputs).
pub(crate) fn kappa_raw<K: Kernel + ?Sized>(
    kernel: &K,
    dim: usize,
    pc: &[f64],
    pw: &[f64],
    qc: &[f64],
    qw: &[f64],
) -> f64 {
    let row = |i: usize| -> f64 {
        let p = &pc[i * dim..(i + 1) * dim];
        let s = pairwise_sum_by(qw.len(), |j| {
            qw[j] * kernel.eval_unchecked(p, &qc[j * dim..(j + 1) * dim])
        });
        pw[i] * s
    };
    if pw.len() >= PAR_ROWS && pw.len() * qw.len() >= 1 << 16 {
        let rows: Vec<f64> = (0..pw.len()).into_par_iter().map(row).collect();
        pairwise_sum(&rows)
    } else {
        pairwise_sum_by(pw.len(), row)
    }
}

/// Exact `kappa(P, Q)` in `O(|P||Q|)` kernel evaluations.
pub fn kappa_exact<K: Kernel + ?Sized>(
    kernel: &K,
    p: &WeightedPointSet,
    q: &WeightedPointSet,
) -> Result<f64> {
    check_same_dim(p, q)?;
    Ok(kappa_raw(
        kernel,
        p.dim(),
        p.coords(),
        p.masses(),
        q.coords(),
        q.masses(),
    ))
}

/// Clamp a squared distance estimate. `w` is the mass scale `W`.
pub fn clamp_squared_distance(radicand: f64, w: f64) -> Result<f64> {
    if radicand >= 0.0 {
        return Ok(radicand);
    }
    let tolerance = RADICAND_TOLERANCE * w * w;
    if radicand >= -tolerance {
        Ok(0.0)
    } else {
        Err(Error::NumericalInstability {
            radicand,
            tolerance,
        })
    }
}

/// Whether `(p, q)` is already in the fixed order used for cross terms, so
/// that swapping the arguments sums in the same order.
pub(crate) fn canonical_order(p: &WeightedPointSet, q: &WeightedPointSet) -> bool {
    let key = |s: &WeightedPointSet| {
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<u64>>();
        (s.len(), bits(s.coords()), bits(s.masses()))
    };
    key(p) <= key(q)
}

/// Exact `D_K(P, Q)^2`, clamped at 0. Symmetric in `(P, Q)` bit for bit.
pub fn kernel_distance_sq_exact<K: Kernel + ?Sized>(
    kernel: &K,
    p: &WeightedPointSet,
    q: &WeightedPointSet,
) -> Result<f64> {
    check_same_dim(p, q)?;
    let pp = kappa_exact(kernel, p, p)?;
    let qq = kappa_exact(kernel, q, q)?;
    let (a, b) = if canonical_order(p, q) {
        (p, q)
    } else {
        (q, p)
    };
    let pq = kappa_exact(kernel, a, b)?;
    clamp_squared_distance((pp + qq) - 2.0 * pq, joint_mass(p, q))
}

/// Exact kernel distance `D_K(P, Q)`.
pub fn kernel_distance_exact<K: Kernel + ?Sized>(
    kernel: &K,
    p: &WeightedPointSet,
    q: &WeightedPointSet,
) -> Result<f64> {
    kernel_distance_sq_exact(kernel, p, q).map(f64::sqrt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{GaussianKernel, TrivialKernel};
    use rand::{Rng, SeedableRng};

    fn random_set(rng: &mut impl Rng, n: usize, d: usize) -> WeightedPointSet {
        let coords = (0..n * d).map(|_| rng.random_range(-2.0..2.0)).collect();
        let masses = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
        WeightedPointSet::new(d, coords, masses).unwrap()
    }

    #[test]
    fn kappa_examples() {
        let k = GaussianKernel::new(1.0).unwrap();
        let p = WeightedPointSet::new(2, vec![0.0, 0.0], vec![1.0]).unwrap();
        assert_eq!(kappa_exact(&k, &p, &p).unwrap(), 1.0);
        let p = WeightedPointSet::new(2, vec![0.0, 0.0], vec![2.0]).unwrap();
        let q = WeightedPointSet::new(2, vec![2f64.ln().sqrt(), 0.0], vec![3.0]).unwrap();
        assert!((kappa_exact(&k, &p, &q).unwrap() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn kappa_matches_double_loop() {
        let k = GaussianKernel::new(0.7).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let p = random_set(&mut rng, 50, 2);
        let q = random_set(&mut rng, 50, 2);
        let mut naive = 0.0;
        for i in 0..p.len() {
            for j in 0..q.len() {
                let d2: f64 = (0..2)
                    .map(|t| (p.point(i)[t] - q.point(j)[t]).powi(2))
                    .sum();
                naive += p.mass(i) * q.mass(j) * (-d2 / 0.49).exp();
            }
        }
        let got = kappa_exact(&k, &p, &q).unwrap();
        assert!((got - naive).abs() <= 1e-12 * naive);
    }

    #[test]
    fn parallel_path_agrees_with_sequential() {
        let k = GaussianKernel::new(1.0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let p = random_set(&mut rng, 600, 2);
        let q = random_set(&mut rng, 300, 2);
        let par = kappa_exact(&k, &p, &q).unwrap();
        let seq = pairwise_sum_by(p.len(), |i| {
            p.mass(i)
                * pairwise_sum_by(q.len(), |j| {
                    q.mass(j) * k.eval_unchecked(p.point(i), q.point(j))
                })
        });
        assert!((par - seq).abs() <= 1e-10 * seq);
    }

    #[test]
    fn distance_examples() {
        let k = GaussianKernel::new(1.0).unwrap();
        let p = WeightedPointSet::new(2, vec![0.0, 0.0], vec![1.0]).unwrap();
        let q = WeightedPointSet::new(2, vec![2f64.ln().sqrt(), 0.0], vec![1.0]).unwrap();
        let d2 = kernel_distance_sq_exact(&k, &p, &q).unwrap();
        assert!((d2 - 1.0).abs() < 1e-14);
        assert_eq!(kernel_distance_exact(&k, &p, &p).unwrap(), 0.0);
    }

    #[test]
    fn distance_is_symmetric_bit_for_bit() {
        let k = GaussianKernel::new(0.8).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let p = random_set(&mut rng, 37, 2);
            let q = random_set(&mut rng, 23, 2);
            assert_eq!(
                kernel_distance_sq_exact(&k, &p, &q).unwrap().to_bits(),
                kernel_distance_sq_exact(&k, &q, &p).unwrap().to_bits()
            );
        }
    }

    #[test]
    fn trivial_kernel_symmetric_difference() {
        let a = [0.0, 0.0];
        let b = [1.0, 0.0];
        let c = [0.0, 1.0];
        let p = WeightedPointSet::uniform(2, [a, b].concat()).unwrap();
        let q = WeightedPointSet::uniform(2, [b, c].concat()).unwrap();
        assert_eq!(
            kernel_distance_sq_exact(&TrivialKernel, &p, &q).unwrap(),
            2.0
        );
    }

    #[test]
    fn clamping_rules() {
        assert_eq!(clamp_squared_distance(-1e-12, 1.0).unwrap(), 0.0);
        assert!(matches!(
            clamp_squared_distance(-1e-6, 1.0),
            Err(Error::NumericalInstability { .. })
        ));
        assert_eq!(clamp_squared_distance(0.25, 1.0).unwrap(), 0.25);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let k = GaussianKernel::new(1.0).unwrap();
        let p = WeightedPointSet::uniform(2, vec![0.0, 0.0]).unwrap();
        let q = WeightedPointSet::uniform(3, vec![0.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            kernel_distance_exact(&k, &p, &q),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
