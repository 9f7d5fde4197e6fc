use std::time::Instant;

use kerneldist::align::{
    best_rigid_motion, best_rigid_motion_coreset, best_translation, best_translation_coreset,
    RigidMotion,
};
use kerneldist::{joint_mass, Error, GaussianKernel};
use serde::Serialize;

use crate::args::{AlignArgs, AlignMode, Params};
use crate::error::Result;
use crate::io::{read_point_set, write_text};
use crate::report::{elapsed_ms, to_json, SetSummary};

#[derive(Debug, Clone, Serialize)]
pub struct AlignReport {
    pub command: &'static str,
    pub mode: AlignMode,
    pub coreset: bool,
    /// Motion applied to Q.
    pub motion: RigidMotion,
    /// Exact `D_K(P, motion(Q))^2` on the full inputs.
    pub squared_distance: f64,
    pub distance: f64,
    /// `kappa(P, motion(Q))`.
    pub objective: f64,
    /// Additive accuracy `eps W^2` relative to the best motion.
    pub error_bound: f64,
    pub evaluated: u64,
    pub candidates: u64,
    pub coreset_sizes: Option<(usize, usize)>,
    pub params: Params,
    pub p: SetSummary,
    pub q: SetSummary,
    pub wall_time_ms: f64,
}

pub fn align_report(args: &AlignArgs) -> Result<AlignReport> {
    let start = Instant::now();
    let pf = read_point_set(&args.p)?;
    let qf = read_point_set(&args.q)?;
    if pf.normals.is_some() || qf.normals.is_some() {
        return Err(Error::Unsupported("alignment of oriented point sets".into()).into());
    }
    let prm = &args.params;
    let kernel = GaussianKernel::new(prm.sigma)?;
    let (p, q) = (&pf.points, &qf.points);
    let a = match (args.mode, args.coreset) {
        (AlignMode::Translate, false) => best_translation(&kernel, p, q, prm.eps)?,
        (AlignMode::Translate, true) => {
            best_translation_coreset(&kernel, p, q, prm.eps, prm.delta, prm.seed)?
        }
        (AlignMode::Rigid, false) => best_rigid_motion(&kernel, p, q, prm.eps)?,
        (AlignMode::Rigid, true) => {
            best_rigid_motion_coreset(&kernel, p, q, prm.eps, prm.delta, prm.seed)?
        }
    };
    let w = joint_mass(p, q);
    Ok(AlignReport {
        command: "align",
        mode: args.mode,
        coreset: args.coreset,
        motion: a.motion,
        squared_distance: a.squared_distance,
        distance: a.squared_distance.sqrt(),
        objective: a.objective,
        error_bound: prm.eps * w * w,
        evaluated: a.evaluated,
        candidates: a.candidates,
        coreset_sizes: a.coreset_sizes,
        params: prm.clone(),
        p: SetSummary::new(&args.p, &pf),
        q: SetSummary::new(&args.q, &qf),
        wall_time_ms: elapsed_ms(start),
    })
}

pub fn run(args: &AlignArgs) -> Result<()> {
    write_text(args.out.as_ref(), &to_json(&align_report(args)?))
}
