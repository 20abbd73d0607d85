//! CSV traces (`t,re,im`, 12 significant digits) and JSON reports.

use std::io::Write;
use std::path::Path;

use radres_core::loopsoup::LoopSample;
use radres_core::sampler::{EstimateReport, MartingaleReport, SampleK};
use radres_core::C;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Writes `t,re,im` rows.
pub fn write_trace_csv<W: Write>(w: W, times: &[f64], points: &[C]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let err = |e| CliError::Csv { path: "<trace>".into(), source: e };
    out.write_record(["t", "re", "im"]).map_err(err)?;
    for (t, p) in times.iter().zip(points) {
        out.write_record([sig12(*t), sig12(p.re), sig12(p.im)]).map_err(err)?;
    }
    out.flush().map_err(|e| CliError::io("<trace>", e))
}

/// 12 significant digits in scientific notation.
pub fn sig12(x: f64) -> String {
    format!("{x:.11e}")
}

#[derive(Deserialize)]
struct PointRow {
    re: f64,
    im: f64,
}

/// Reads a `re,im` CSV; a `t` column, if present, is ignored.
pub fn read_points_csv(path: &Path) -> Result<Vec<C>> {
    let name = path.display().to_string();
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::Csv { path: name.clone(), source: e })?;
    let mut pts = Vec::new();
    for row in r.deserialize::<PointRow>() {
        let row = row.map_err(|e| CliError::Csv { path: name.clone(), source: e })?;
        pts.push(C::new(row.re, row.im));
    }
    Ok(pts)
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct LawJson {
    pub alpha: f64,
    pub beta: f64,
}

/// The report schema `{law, hull, n, p_hat, se, target, z, dt, seed, wall_ms}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ReportJson {
    pub law: LawJson,
    pub hull: String,
    pub n: u64,
    pub p_hat: Option<f64>,
    pub se: Option<f64>,
    pub target: f64,
    pub z: Option<f64>,
    pub dt: f64,
    pub seed: u64,
    pub wall_ms: Option<u64>,
}

impl From<&EstimateReport> for ReportJson {
    fn from(r: &EstimateReport) -> Self {
        ReportJson {
            law: LawJson { alpha: r.law.alpha, beta: r.law.beta },
            hull: r.hull.clone(),
            n: r.n,
            p_hat: Some(r.p_hat),
            se: Some(r.se),
            target: r.target,
            z: Some(r.z),
            dt: r.dt,
            seed: r.seed,
            wall_ms: r.wall_ms,
        }
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct MartingaleJson {
    pub rho: f64,
    pub hull: String,
    pub n: u64,
    pub m0: f64,
    pub m0_formula: f64,
    pub times: Vec<f64>,
    pub means: Vec<f64>,
    pub ses: Vec<f64>,
    pub z: Vec<f64>,
    pub max_abs_z: f64,
    pub hits: u64,
    pub mean_m_at_hit: f64,
    pub dt: f64,
    pub seed: u64,
}

impl MartingaleJson {
    pub fn new(r: &MartingaleReport, hull: &str, n: u64, dt: f64, seed: u64) -> Self {
        MartingaleJson {
            rho: r.rho,
            hull: hull.into(),
            n,
            m0: r.m0,
            m0_formula: r.m0_formula,
            times: r.times.clone(),
            means: r.means.clone(),
            ses: r.ses.clone(),
            z: r.z.clone(),
            max_abs_z: r.max_abs_z,
            hits: r.hits,
            mean_m_at_hit: r.mean_m_at_hit,
            dt,
            seed,
        }
    }
}

pub fn pair(p: C) -> [f64; 2] {
    [p.re, p.im]
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct LoopJson {
    pub root: [f64; 2],
    pub duration: f64,
    pub winding: i32,
    pub hits: Vec<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<[f64; 2]>>,
}

impl LoopJson {
    pub fn new(l: &LoopSample, with_points: bool) -> Self {
        LoopJson {
            root: pair(l.root),
            duration: l.duration,
            winding: l.winding,
            hits: l.hull_hits.clone(),
            points: with_points.then(|| l.points.iter().map(|&p| pair(p)).collect()),
        }
    }
}

/// Region polygon and attached loops of a sample.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct RegionJson {
    pub rho: f64,
    pub region: Vec<[f64; 2]>,
    pub loops: Vec<Vec<[f64; 2]>>,
}

impl From<&SampleK> for RegionJson {
    fn from(k: &SampleK) -> Self {
        RegionJson {
            rho: k.rho,
            region: k.region.iter().map(|&p| pair(p)).collect(),
            loops: k.loops.iter().map(|l| l.points.iter().map(|&p| pair(p)).collect()).collect(),
        }
    }
}

pub fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("report types serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_csv_round_trips_points() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let pts = [C::new(1.0, 0.0), C::new(0.5, 1.0 / 3.0)];
        write_trace_csv(std::fs::File::create(&path).unwrap(), &[0.0, 0.1], &pts).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("t,re,im\n"));
        assert!(text.contains("3.33333333333e-1"));
        let back = read_points_csv(&path).unwrap();
        assert_eq!(back.len(), 2);
        assert!((back[1] - pts[1]).norm() < 1e-12);
    }

    #[test]
    fn points_csv_without_time_column() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        std::fs::write(&path, "re,im\n-1,0\n-0.8,0.01\n").unwrap();
        assert_eq!(read_points_csv(&path).unwrap()[1], C::new(-0.8, 0.01));
        assert!(read_points_csv(&dir.path().join("missing.csv")).is_err());
    }
}
