//! JSON report types. Schemas for each live in `schemas/` at the repository
//! root.

use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use crate::io::PointSetFile;

#[derive(Debug, Clone, Serialize)]
pub struct SetSummary {
    pub path: String,
    pub points: usize,
    pub dim: usize,
    pub total_mass: f64,
    pub oriented: bool,
}

impl SetSummary {
    pub fn new(path: &Path, set: &PointSetFile) -> Self {
        SetSummary {
            path: path.display().to_string(),
            points: set.points.len(),
            dim: set.dim(),
            total_mass: set.points.total_mass(),
            oriented: set.normals.is_some(),
        }
    }
}

pub(crate) fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}
