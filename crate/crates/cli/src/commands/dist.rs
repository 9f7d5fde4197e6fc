use std::time::Instant;

use kerneldist::features::kernel_distance_ifgt;
use kerneldist::features::kernel_distance_rff;
use kerneldist::reduce::kernel_distance_oriented;
use kerneldist::wspd::wspd_estimate;
use kerneldist::{joint_mass, kernel_distance_sq_exact, Error, GaussianKernel};
use serde::Serialize;

use crate::args::{DistArgs, DistMethod, Params};
use crate::error::{CliError, Result};
use crate::io::{read_point_set, write_text, PointSetFile};
use crate::report::{elapsed_ms, to_json, SetSummary};

/// Method-specific evidence for the reported value.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Certificate {
    /// Well-separated pairs used.
    pub pairs: Option<usize>,
    /// Point pairs summed exactly by the WSPD estimator.
    pub exact_pairs: Option<u64>,
    pub alpha: Option<f64>,
    /// Feature dimension.
    pub rho: Option<usize>,
    /// Taylor truncation degree.
    pub tau: Option<usize>,
    /// Normalized data radius for the Taylor bound.
    pub big_delta: Option<f64>,
    /// Deterministic Taylor bound on the error.
    pub taylor_bound: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DistReport {
    pub command: &'static str,
    pub method: DistMethod,
    pub distance: f64,
    pub squared_distance: f64,
    /// `eps W^2` for approximate methods (with probability `1 - delta` for
    /// rff); absent for exact evaluation.
    pub error_bound: Option<f64>,
    pub certificate: Certificate,
    pub params: Params,
    pub p: SetSummary,
    pub q: SetSummary,
    pub wall_time_ms: f64,
}

/// `(D_K^2, certificate)` for loaded sets.
pub fn squared_distance(
    method: DistMethod,
    params: &Params,
    p: &PointSetFile,
    q: &PointSetFile,
) -> Result<(f64, Certificate)> {
    let kernel = GaussianKernel::new(params.sigma)?;
    match (p.oriented()?, q.oriented()?) {
        (Some(a), Some(b)) => {
            if method != DistMethod::Exact {
                return Err(Error::Unsupported(
                    "oriented inputs support only --method exact".into(),
                )
                .into());
            }
            let d = kernel_distance_oriented(&kernel, &a, &b)?;
            return Ok((d * d, Certificate::default()));
        }
        (None, None) => {}
        _ => {
            return Err(CliError::Usage(
                "either both inputs or neither must carry orientation columns".into(),
            ))
        }
    }
    let (p, q) = (&p.points, &q.points);
    Ok(match method {
        DistMethod::Exact => (
            kernel_distance_sq_exact(&kernel, p, q)?,
            Certificate::default(),
        ),
        DistMethod::Wspd => {
            let e = wspd_estimate(&kernel, p, q, params.eps)?;
            let u = (e.kappa_pp + e.kappa_qq) - 2.0 * e.kappa_pq;
            let w = joint_mass(p, q);
            let value = if u < 0.0 && u >= -params.eps * w * w {
                0.0
            } else {
                kerneldist::distance::clamp_squared_distance(u, w)?
            };
            let cert = Certificate {
                pairs: Some(e.pairs),
                exact_pairs: Some(e.exact_pairs),
                alpha: Some(e.alpha),
                ..Default::default()
            };
            (value, cert)
        }
        DistMethod::Rff => {
            let (value, rho) =
                kernel_distance_rff(&kernel, p, q, params.eps, params.delta, params.seed)?;
            let cert = Certificate {
                rho: Some(rho),
                ..Default::default()
            };
            (value, cert)
        }
        DistMethod::Ifgt => {
            let e = kernel_distance_ifgt(&kernel, p, q, params.eps)?;
            let cert = Certificate {
                rho: Some(e.rho),
                tau: Some(e.tau),
                big_delta: Some(e.big_delta),
                taylor_bound: Some(e.error_bound),
                ..Default::default()
            };
            (e.value, cert)
        }
    })
}

pub fn dist_report(args: &DistArgs) -> Result<DistReport> {
    let start = Instant::now();
    let p = read_point_set(&args.p)?;
    let q = read_point_set(&args.q)?;
    let (squared_distance, certificate) = squared_distance(args.method, &args.params, &p, &q)?;
    let w = joint_mass(&p.points, &q.points);
    Ok(DistReport {
        command: "dist",
        method: args.method,
        distance: squared_distance.sqrt(),
        squared_distance,
        error_bound: (args.method != DistMethod::Exact).then(|| args.params.eps * w * w),
        certificate,
        params: args.params.clone(),
        p: SetSummary::new(&args.p, &p),
        q: SetSummary::new(&args.q, &q),
        wall_time_ms: elapsed_ms(start),
    })
}

pub fn run(args: &DistArgs) -> Result<()> {
    write_text(args.out.as_ref(), &to_json(&dist_report(args)?))
}
