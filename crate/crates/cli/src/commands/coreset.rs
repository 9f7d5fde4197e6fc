use std::time::Instant;

use kerneldist::coreset::{
    certificate_dimension, coreset_feature_bound, coreset_random, coreset_size_feature,
    coreset_size_random, discrepancy_report, CoresetMethod, DiscrepancyReport,
};
use kerneldist::features::draw_frequencies;
use kerneldist::{Error, GaussianKernel};
use serde::Serialize;

use crate::args::{CoresetArgs, CoresetKind, Params};
use crate::error::Result;
use crate::io::{read_point_set, write_point_set, write_text, PointSetFile};
use crate::report::{elapsed_ms, to_json, SetSummary};

#[derive(Debug, Clone, Serialize)]
pub struct FeatureCertificate {
    pub rho: u64,
    /// `|Phi(P) - Phi(S)|^2` in a random Fourier basis drawn from the seed.
    pub value: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoresetReport {
    pub command: &'static str,
    pub method: CoresetMethod,
    /// Draws with replacement.
    pub sample_size: usize,
    /// Distinct points written to the output file.
    pub size: usize,
    pub parent_size: usize,
    pub output: String,
    pub discrepancy: DiscrepancyReport,
    /// `2 kernel_discrepancy W^2`, an upper bound on `D_K(P, S)^2`: the
    /// query set contains every point of `P` and `S`.
    pub squared_distance_bound: f64,
    pub certificate: Option<FeatureCertificate>,
    pub params: Params,
    pub input: SetSummary,
    pub wall_time_ms: f64,
}

pub fn coreset_report(args: &CoresetArgs) -> Result<CoresetReport> {
    let start = Instant::now();
    let pf = read_point_set(&args.p)?;
    if pf.normals.is_some() {
        return Err(Error::Unsupported("coresets of oriented point sets".into()).into());
    }
    let prm = &args.params;
    let kernel = GaussianKernel::new(prm.sigma)?;
    let p = &pf.points;
    let k = match (args.size, args.method) {
        (Some(k), _) => k,
        (None, CoresetKind::Random) => coreset_size_random(prm.eps, prm.delta, p.dim())?,
        (None, CoresetKind::Feature) => coreset_size_feature(prm.eps, prm.delta, p.len())?,
    };
    let mut c = coreset_random(p, k, prm.seed)?;
    c.epsilon_target = Some(prm.eps);
    let certificate = match args.method {
        CoresetKind::Random => None,
        CoresetKind::Feature => {
            c.method = CoresetMethod::FeatureVerified;
            let rho = certificate_dimension(prm.eps, prm.delta, p.len())?;
            let basis = draw_frequencies(prm.sigma, p.dim(), rho, prm.seed)?;
            let w = p.total_mass();
            Some(FeatureCertificate {
                rho,
                value: coreset_feature_bound(p, &c, &basis)?,
                bound: prm.eps * w * w,
            })
        }
    };
    let discrepancy = discrepancy_report(&kernel, p, &c, prm.eps)?;
    let merged = c.merged();
    let out = PointSetFile {
        points: merged,
        normals: None,
    };
    write_point_set(&args.out, &out)?;
    let w = p.total_mass();
    Ok(CoresetReport {
        command: "coreset",
        method: c.method,
        sample_size: c.len(),
        size: out.points.len(),
        parent_size: c.parent_size,
        output: args.out.display().to_string(),
        squared_distance_bound: 2.0 * discrepancy.kernel_discrepancy * w * w,
        discrepancy,
        certificate,
        params: prm.clone(),
        input: SetSummary::new(&args.p, &pf),
        wall_time_ms: elapsed_ms(start),
    })
}

pub fn run(args: &CoresetArgs) -> Result<()> {
    let report = coreset_report(args)?;
    write_text(args.report.as_ref(), &to_json(&report))
}
