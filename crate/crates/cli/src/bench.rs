//! Timing tables for the approximate distance methods against exact
//! evaluation.

use std::io::Write;
use std::time::Instant;

use kerneldist::features::{
    ifgt_choose_tau, kernel_distance_ifgt, kernel_distance_rff, multiindex_count, rff_dimension,
    TaylorBasis,
};
use kerneldist::rng::{stream, Stream};
use kerneldist::sum::compensated_sum;
use kerneldist::wspd::kernel_distance_wspd;
use kerneldist::{joint_mass, kernel_distance_sq_exact, GaussianKernel, WeightedPointSet};
use rand::Rng;
use serde::Serialize;

use crate::args::{DistMethod, Params};
use crate::error::{CliError, Result};

pub const SUITES: &[&str] = &["dist"];

/// Feature runs needing more than this many feature evaluations
/// (`rho * points`) are reported as skipped.
pub const FEATURE_WORK_LIMIT: f64 = 2e9;

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub suite: String,
    pub sizes: Vec<usize>,
    pub dim: usize,
    pub extents: Vec<f64>,
    pub methods: Vec<DistMethod>,
    pub params: Params,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub suite: String,
    pub n: usize,
    pub dim: usize,
    pub extent: f64,
    pub eps: f64,
    pub method: String,
    /// Absent for skipped runs.
    pub time_ms: Option<f64>,
    pub squared_distance: Option<f64>,
    pub abs_error: Option<f64>,
    pub error_bound: Option<f64>,
    /// Exact time over this method's time.
    pub speedup: Option<f64>,
    pub status: String,
}

/// Two independent sets of `n` unit-mass points, uniform in
/// `[0, extent sigma]^dim`. Size `n` under `seed` uses the instance stream of
/// `seed + n`, so a row does not depend on which other sizes were run.
pub fn instance(
    n: usize,
    dim: usize,
    extent: f64,
    sigma: f64,
    seed: u64,
) -> Result<[WeightedPointSet; 2]> {
    let mut rng = stream(seed.wrapping_add(n as u64), Stream::Instances);
    let side = extent * sigma;
    let mut draw = || {
        (0..n * dim)
            .map(|_| rng.random::<f64>() * side)
            .collect::<Vec<_>>()
    };
    let p = WeightedPointSet::uniform(dim, draw())?;
    let q = WeightedPointSet::uniform(dim, draw())?;
    Ok([p, q])
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64() * 1e3)
}

pub fn run_suite(cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    match cfg.suite.as_str() {
        "dist" => dist_suite(cfg),
        "" => Err(CliError::Usage("empty suite name".into())),
        s => Err(CliError::Usage(format!(
            "unknown suite `{s}`; available: {}",
            SUITES.join(", ")
        ))),
    }
}

fn dist_suite(cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    if cfg.sizes.is_empty() || cfg.sizes.contains(&0) {
        return Err(CliError::Usage("sizes must be positive".into()));
    }
    if cfg.extents.is_empty() || !cfg.extents.iter().all(|e| *e > 0.0 && e.is_finite()) {
        return Err(CliError::Usage("extents must be positive".into()));
    }
    let mut rows = Vec::new();
    for &extent in &cfg.extents {
        for &n in &cfg.sizes {
            dist_rows(cfg, n, extent, &mut rows)?;
        }
    }
    Ok(rows)
}

/// Feature count of the Taylor basis `kernel_distance_ifgt` would build.
fn ifgt_rho(
    kernel: &GaussianKernel,
    p: &WeightedPointSet,
    q: &WeightedPointSet,
    eps: f64,
) -> Result<u64> {
    let u = p.union(q)?;
    let w = u.total_mass();
    let center: Vec<f64> = (0..u.dim())
        .map(|k| compensated_sum(u.iter().map(|(x, m)| m * x[k])) / w)
        .collect();
    let big_delta = TaylorBasis::normalized_radius(kernel.sigma(), &center, [p, q]);
    Ok(multiindex_count(
        u.dim(),
        ifgt_choose_tau(eps / 4.0, big_delta)?,
    )?)
}

fn dist_rows(cfg: &BenchConfig, n: usize, extent: f64, rows: &mut Vec<BenchRow>) -> Result<()> {
    let prm = &cfg.params;
    let kernel = GaussianKernel::new(prm.sigma)?;
    let points = (2 * n) as f64;
    {
        let [p, q] = instance(n, cfg.dim, extent, prm.sigma, prm.seed)?;
        let w = joint_mass(&p, &q);
        let bound = prm.eps * w * w;
        let (exact, exact_ms) = timed(|| kernel_distance_sq_exact(&kernel, &p, &q));
        let exact = exact?;
        let row = |method: &str, ms: f64, value: Option<f64>, status: String| BenchRow {
            suite: cfg.suite.clone(),
            n,
            dim: cfg.dim,
            extent,
            eps: prm.eps,
            method: method.into(),
            time_ms: value.map(|_| ms),
            squared_distance: value,
            abs_error: value.map(|v| (v - exact).abs()),
            error_bound: (method != "exact").then_some(bound),
            speedup: value.map(|_| exact_ms / ms.max(1e-6)),
            status,
        };
        rows.push(row("exact", exact_ms, Some(exact), "ok".into()));
        for &m in &cfg.methods {
            let r = match m {
                DistMethod::Exact => continue,
                DistMethod::Wspd => {
                    let (v, ms) = timed(|| kernel_distance_wspd(&kernel, &p, &q, prm.eps));
                    row("wspd", ms, Some(v?), "ok".into())
                }
                DistMethod::Ifgt => match ifgt_rho(&kernel, &p, &q, prm.eps) {
                    Ok(rho) if rho as f64 * points <= FEATURE_WORK_LIMIT => {
                        let (v, ms) = timed(|| kernel_distance_ifgt(&kernel, &p, &q, prm.eps));
                        row("ifgt", ms, Some(v?.value), "ok".into())
                    }
                    Ok(rho) => row("ifgt", 0.0, None, format!("skipped: rho = {rho}")),
                    Err(e) => row("ifgt", 0.0, None, format!("skipped: {e}")),
                },
                DistMethod::Rff => {
                    let rho = rff_dimension(prm.eps / 4.0, prm.delta, 2 * n)?;
                    if rho as f64 * points > FEATURE_WORK_LIMIT {
                        row("rff", 0.0, None, format!("skipped: rho = {rho}"))
                    } else {
                        let (v, ms) = timed(|| {
                            kernel_distance_rff(&kernel, &p, &q, prm.eps, prm.delta, prm.seed)
                        });
                        row("rff", ms, Some(v?.0), "ok".into())
                    }
                }
            };
            rows.push(r);
        }
    }
    Ok(())
}

/// Write rows as CSV with a header.
pub fn write_csv<W: Write>(rows: &[BenchRow], out: W) -> Result<()> {
    let err = |source: std::io::Error| CliError::Io {
        path: "<table>".into(),
        source,
    };
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| err(e.into()))?;
    }
    w.flush().map_err(err)
}
