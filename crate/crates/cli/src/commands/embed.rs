use std::fs::File;
use std::io::{BufWriter, Write};
use std::time::Instant;

use kerneldist::features::{
    draw_frequencies, ifgt_choose_tau, ifgt_embed, rff_dimension, rff_embed, write_feature_vector,
    TaylorBasis,
};
use kerneldist::{Error, GaussianKernel, WeightedPointSet};
use serde::Serialize;

use crate::args::{EmbedArgs, EmbedMethod, Params};
use crate::error::{io_error, CliError, Result};
use crate::io::{read_point_set, write_text};
use crate::report::{elapsed_ms, to_json, SetSummary};

#[derive(Debug, Clone, Serialize)]
pub struct EmbedReport {
    pub command: &'static str,
    pub method: EmbedMethod,
    pub rho: usize,
    pub tau: Option<usize>,
    pub center: Option<Vec<f64>>,
    pub output: String,
    pub params: Params,
    pub input: SetSummary,
    pub wall_time_ms: f64,
}

fn centroid(p: &WeightedPointSet) -> Vec<f64> {
    let w = p.total_mass();
    (0..p.dim())
        .map(|k| kerneldist::sum::compensated_sum(p.iter().map(|(x, m)| m * x[k])) / w)
        .collect()
}

pub fn embed_report(args: &EmbedArgs) -> Result<EmbedReport> {
    let start = Instant::now();
    let pf = read_point_set(&args.p)?;
    if pf.normals.is_some() {
        return Err(Error::Unsupported("embedding oriented point sets".into()).into());
    }
    let prm = &args.params;
    let kernel = GaussianKernel::new(prm.sigma)?;
    let p = &pf.points;
    let (v, tau, center) = match args.method {
        EmbedMethod::Rff => {
            let rho = match args.rho {
                Some(r) => r,
                None => rff_dimension(prm.eps, prm.delta, p.len().max(1))?,
            };
            let basis = draw_frequencies(prm.sigma, p.dim(), rho, prm.seed)?;
            (rff_embed(&basis, p)?, None, None)
        }
        EmbedMethod::Ifgt => {
            if p.is_empty() && args.center.is_none() {
                return Err(Error::EmptyInput("point set to embed").into());
            }
            let center = args.center.clone().unwrap_or_else(|| centroid(p));
            if center.len() != p.dim() {
                return Err(CliError::Usage(format!(
                    "--center has {} coordinates, the input has dimension {}",
                    center.len(),
                    p.dim()
                )));
            }
            let tau = match args.tau {
                Some(t) => t,
                None => {
                    let big_delta = TaylorBasis::normalized_radius(kernel.sigma(), &center, [p, p]);
                    ifgt_choose_tau(prm.eps, big_delta)?
                }
            };
            let basis = TaylorBasis::new(prm.sigma, center.clone(), tau)?;
            (ifgt_embed(&basis, p)?, Some(tau), Some(center))
        }
    };
    let file = File::create(&args.out).map_err(io_error(&args.out))?;
    let mut w = BufWriter::new(file);
    write_feature_vector(&v, &mut w)?;
    w.flush().map_err(io_error(&args.out))?;
    Ok(EmbedReport {
        command: "embed",
        method: args.method,
        rho: v.len(),
        tau,
        center,
        output: args.out.display().to_string(),
        params: prm.clone(),
        input: SetSummary::new(&args.p, &pf),
        wall_time_ms: elapsed_ms(start),
    })
}

pub fn run(args: &EmbedArgs) -> Result<()> {
    write_text(args.report.as_ref(), &to_json(&embed_report(args)?))
}
