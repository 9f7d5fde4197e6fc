use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use super::{kernel_distance_features, BasisTag, FeatureVector};
use crate::constants::{C_RFF, MAX_FEATURE_DIM};
use crate::error::{check_open_unit, check_positive, invalid, Error, Result};
use crate::kernel::GaussianKernel;
use crate::points::{check_same_dim, WeightedPointSet};
use crate::rng::{stream, Stream};
use crate::sum::{dot, pairwise_sum2_by};

fn even_ceil(x: f64) -> Result<u64> {
    let half = x.ceil();
    if !half.is_finite() || half > (u64::MAX / 4) as f64 {
        return Err(Error::Overflow(format!(
            "feature dimension {x:e} is not representable"
        )));
    }
    Ok(2 * (half as u64).max(1))
}

/// Number of random Fourier features so that all `n^2` pairwise kernel values
/// are within `eps mu nu` with probability `1 - delta`:
/// `2 ceil(32/eps^2 ln(2 n^2 / delta))`.
pub fn rff_dimension(eps: f64, delta: f64, n: usize) -> Result<u64> {
    check_open_unit("eps", eps)?;
    check_open_unit("delta", delta)?;
    if n < 1 {
        return Err(invalid("n", "must be at least 1"));
    }
    let n = n as f64;
    even_ceil(C_RFF / (eps * eps) * (2.0 * n * n / delta).ln())
}

/// Domain-based variant independent of `n`:
/// `2 ceil(32 d / eps^2 ln(2 Delta / (eps delta)))`. The constant is a
/// heuristic choice matching [`rff_dimension`].
pub fn rff_dimension_domain(eps: f64, delta: f64, big_delta: f64, d: usize) -> Result<u64> {
    check_open_unit("eps", eps)?;
    check_open_unit("delta", delta)?;
    check_positive("Delta", big_delta)?;
    if d < 1 {
        return Err(invalid("d", "must be at least 1"));
    }
    let arg = 2.0 * big_delta / (eps * delta);
    // Keep the logarithm positive for tiny domains.
    even_ceil(C_RFF * d as f64 / (eps * eps) * arg.max(std::f64::consts::E).ln())
}

/// `rho/2` frequencies drawn from `N(0, 2/sigma^2 I)`, reproducible from
/// `(seed, sigma, d, rho)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierBasis {
    sigma: f64,
    dim: usize,
    rho: usize,
    seed: u64,
    frequencies: Vec<f64>,
}

impl FourierBasis {
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rho(&self) -> usize {
        self.rho
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Frequency `i` (`0 <= i < rho/2`).
    pub fn frequency(&self, i: usize) -> &[f64] {
        &self.frequencies[i * self.dim..(i + 1) * self.dim]
    }

    pub fn tag(&self) -> BasisTag {
        BasisTag::Fourier {
            sigma: self.sigma,
            dim: self.dim,
            rho: self.rho,
            seed: self.seed,
        }
    }

    /// Feature vector of a single point with mass `mass`.
    pub fn point_features(&self, x: &[f64], mass: f64) -> Vec<f64> {
        let scale = mass * (2.0 / self.rho as f64).sqrt();
        let mut out = Vec::with_capacity(self.rho);
        for i in 0..self.rho / 2 {
            let (s, c) = dot(self.frequency(i), x).sin_cos();
            out.push(scale * c);
            out.push(scale * s);
        }
        out
    }
}

/// Draw a Fourier basis.
pub fn draw_frequencies(sigma: f64, d: usize, rho: u64, seed: u64) -> Result<FourierBasis> {
    check_positive("sigma", sigma)?;
    if d < 1 {
        return Err(invalid("d", "must be at least 1"));
    }
    if rho < 2 || rho % 2 != 0 {
        return Err(invalid("rho", format!("{rho} is not an even number >= 2")));
    }
    if rho > MAX_FEATURE_DIM {
        return Err(Error::FeatureDimensionTooLarge {
            rho,
            max: MAX_FEATURE_DIM,
        });
    }
    let rho = rho as usize;
    let normal =
        Normal::new(0.0, 2f64.sqrt() / sigma).map_err(|e| invalid("sigma", e.to_string()))?;
    let mut rng = stream(seed, Stream::Frequencies);
    let frequencies = (0..rho / 2 * d).map(|_| normal.sample(&mut rng)).collect();
    Ok(FourierBasis {
        sigma,
        dim: d,
        rho,
        seed,
        frequencies,
    })
}

/// `Phi(P) = sum_p mu(p) sqrt(2/rho) (cos <w_i, p>, sin <w_i, p>)_i`.
pub fn rff_embed(basis: &FourierBasis, p: &WeightedPointSet) -> Result<FeatureVector> {
    if p.dim() != basis.dim {
        return Err(Error::DimensionMismatch {
            expected: basis.dim,
            found: p.dim(),
        });
    }
    let scale = (2.0 / basis.rho as f64).sqrt();
    let mut values = vec![0.0; basis.rho];
    values.par_chunks_mut(2).enumerate().for_each(|(i, out)| {
        let w = basis.frequency(i);
        let (c, s) = pairwise_sum2_by(p.len(), |j| {
            let (s, c) = dot(w, p.point(j)).sin_cos();
            (p.mass(j) * c, p.mass(j) * s)
        });
        out[0] = scale * c;
        out[1] = scale * s;
    });
    Ok(FeatureVector {
        values,
        basis: basis.tag(),
    })
}

/// Random Fourier feature estimate of `D_K(P, Q)^2` within `eps W^2` with
/// probability `1 - delta`. Each of the three similarity terms gets budget
/// `eps/4` over the pairs of `P` union `Q`. Returns the estimate and `rho`.
pub fn kernel_distance_rff(
    kernel: &GaussianKernel,
    p: &WeightedPointSet,
    q: &WeightedPointSet,
    eps: f64,
    delta: f64,
    seed: u64,
) -> Result<(f64, usize)> {
    check_same_dim(p, q)?;
    let rho = rff_dimension(eps / 4.0, delta, (p.len() + q.len()).max(1))?;
    let basis = draw_frequencies(kernel.sigma(), p.dim(), rho, seed)?;
    let u = kernel_distance_features(&rff_embed(&basis, p)?, &rff_embed(&basis, q)?)?;
    Ok((u, basis.rho))
}
