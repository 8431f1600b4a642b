//! Report emission: JSON run reports and CSV sample tables.
//!
//! JSON uses the field order of the report structs (stable across runs);
//! CSV files carry a header row so any external plotting tool can consume
//! them directly.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{BoundaryDatum, TangentField};
use crate::geometry::{Surface, SurfacePoint};
use crate::linalg::Vec3;
use crate::qtensor::{QField, QFrame};
use crate::vmo::{bmo_modulus, mollify, mollify_datum, VmoReport};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Envelope for every CLI run: the command, the effective configuration,
/// and the command-specific results.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub version: String,
    /// Echo of the effective configuration, sorted by key.
    pub config: BTreeMap<String, String>,
    pub timing_ms: u128,
    pub results: serde_json::Value,
}

impl RunReport {
    pub fn new(
        command: &str,
        config: BTreeMap<String, String>,
        timing_ms: u128,
        results: &impl Serialize,
    ) -> Result<RunReport> {
        Ok(RunReport {
            command: command.into(),
            version: TOOL_VERSION.into(),
            config,
            timing_ms,
            results: serde_json::to_value(results)
                .map_err(|e| Error::Config(format!("serialization failed: {e}")))?,
        })
    }
}

/// Writes a pretty-printed JSON document, creating parent directories.
pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Config(format!("serialization failed: {e}")))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}

fn scan_points(s: &Surface, n: usize) -> Vec<SurfacePoint> {
    let mut out = Vec::new();
    for chart_idx in 0..s.charts.len() {
        let c = &s.charts[chart_idx];
        let [u0, u1, v0, v1] = c.zero_scan;
        for i in 0..n {
            for j in 0..n {
                let u = u0 + (u1 - u0) * (i as f64 + 0.5) / n as f64;
                let v = v0 + (v1 - v0) * (j as f64 + 0.5) / n as f64;
                out.push(SurfacePoint { chart: chart_idx, u, v, pos: c.embed(u, v) });
            }
        }
    }
    out
}

/// Samples a tangent field on an n-by-n grid per chart:
/// `chart,u,v,w1,w2,w3` with ambient components.
pub fn field_samples_csv(s: &Surface, f: &TangentField, n: usize) -> String {
    let mut out = String::from("chart,u,v,w1,w2,w3\n");
    for p in scan_points(s, n) {
        if !s.is_closed() && s.distance_to_boundary(p.pos) < 0.0 {
            continue;
        }
        let w = f.eval(s, &p);
        let _ = writeln!(out, "{},{:.12},{:.12},{:.12e},{:.12e},{:.12e}", p.chart, p.u, p.v, w.x, w.y, w.z);
    }
    out
}

/// Samples a Q-field as its five frame coefficients:
/// `chart,u,v,x_coeff,y_coeff,e_coeff,f_coeff,g_coeff`.
pub fn qfield_csv(s: &Surface, q: &QField, n: usize) -> String {
    let mut out = String::from("chart,u,v,x_coeff,y_coeff,e_coeff,f_coeff,g_coeff\n");
    for p in scan_points(s, n) {
        let frame = QFrame::at(s, &p);
        let t = q.eval(s, &p);
        let a = t.m.frobenius_dot(&frame.x_mat) / 2.0;
        let b = t.m.frobenius_dot(&frame.y_mat) / 2.0;
        let e = t.m.frobenius_dot(&frame.e_mat) / frame.e_mat.frobenius_dot(&frame.e_mat);
        let fc = t.m.frobenius_dot(&frame.f_mat) / 2.0;
        let g = t.m.frobenius_dot(&frame.g_mat) / 2.0;
        let _ = writeln!(
            out,
            "{},{:.12},{:.12},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
            p.chart, p.u, p.v, a, b, e, fc, g
        );
    }
    out
}

/// Convergence diagnostics across the radius grid:
/// `eps,omega,sup_projection_gap,sup_boundary_gap,min_g_eps,max_g_eps`.
/// omega is the mean-oscillation modulus at each radius; the boundary
/// columns are empty on closed surfaces.
pub fn vmo_diagnostics_csv(s: &Surface, f: &TangentField, report: &VmoReport) -> Result<String> {
    let grid: Vec<f64> = report.rows.iter().map(|r| r.eps).collect();
    let modulus = bmo_modulus(s, f, &grid)?;
    let datum = if s.is_closed() { None } else { Some(BoundaryDatum::trace(f)) };
    let mut out = String::from("eps,omega,sup_projection_gap,sup_boundary_gap,min_g_eps,max_g_eps\n");
    for (k, row) in report.rows.iter().enumerate() {
        let (bgap, gmin, gmax) = match &datum {
            Some(g) => {
                let ge = mollify_datum(g, row.eps, 65);
                let mut lo = f64::INFINITY;
                let mut hi = 0.0f64;
                for curve in 0..s.boundary.len() {
                    for i in 0..512 {
                        let theta = std::f64::consts::TAU * (i as f64 + 0.37) / 512.0;
                        let n = ge.eval(s, curve, theta).norm();
                        lo = lo.min(n);
                        hi = hi.max(n);
                    }
                }
                (format!("{:.12e}", row.boundary_gap), format!("{lo:.12e}"), format!("{hi:.12e}"))
            }
            None => (String::new(), String::new(), String::new()),
        };
        let _ = writeln!(
            out,
            "{:.12},{:.12e},{:.12e},{},{},{}",
            row.eps, modulus.modulus[k], row.projection_gap, bgap, gmin, gmax
        );
    }
    Ok(out)
}

/// Samples the mollified field at one radius, same layout as
/// [`field_samples_csv`].
pub fn mollified_samples_csv(s: &Surface, f: &TangentField, eps: f64, n: usize) -> Result<String> {
    let fe = mollify(s, f, eps, 128)?;
    Ok(field_samples_csv(s, &fe, n))
}

/// Loads a sampled tangent field from CSV rows `chart,u,v,w1,w2,w3`;
/// evaluation returns the nearest sample in chart coordinates.
pub fn field_from_csv(name: &str, text: &str) -> Result<TangentField> {
    let mut rows: Vec<(usize, f64, f64, Vec3)> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with("chart") || line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = line.split(',').map(str::trim).collect();
        if parts.len() != 6 {
            return Err(Error::Parse(format!("line {}: expected 6 CSV fields", lineno + 1)));
        }
        let chart: usize = parts[0]
            .parse()
            .map_err(|_| Error::Parse(format!("line {}: bad chart id", lineno + 1)))?;
        let mut nums = [0.0f64; 5];
        for (k, p) in parts[1..].iter().enumerate() {
            nums[k] = p
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: bad number `{p}`", lineno + 1)))?;
        }
        rows.push((chart, nums[0], nums[1], Vec3::new(nums[2], nums[3], nums[4])));
    }
    if rows.is_empty() {
        return Err(Error::Parse("no sample rows in CSV field".into()));
    }
    let rows = std::sync::Arc::new(rows);
    Ok(TangentField::new(
        name,
        std::sync::Arc::new(move |s: &Surface, p: &SurfacePoint| {
            let mut best = f64::INFINITY;
            let mut w = Vec3::ZERO;
            for (chart, u, v, val) in rows.iter() {
                if *chart != p.chart {
                    continue;
                }
                let d = (u - p.u).powi(2) + (v - p.v).powi(2);
                if d < best {
                    best = d;
                    w = *val;
                }
            }
            s.tangent_project(p, w)
        }),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::catalog_field;

    #[test]
    fn field_csv_round_trips_through_nearest_neighbor() {
        let d = Surface::disk();
        let f = catalog_field(&d, "rotation").unwrap();
        let csv = field_samples_csv(&d, &f, 40);
        assert!(csv.starts_with("chart,u,v,w1,w2,w3\n"));
        let g = field_from_csv("loaded", &csv).unwrap();
        // At a sample-dense region the nearest-neighbor field is close.
        let p = d.point(0, 0.31, 0.22).unwrap();
        assert!((g.eval(&d, &p) - f.eval(&d, &p)).norm() < 0.1);
    }

    #[test]
    fn run_report_serializes_with_stable_keys() {
        let mut cfg = BTreeMap::new();
        cfg.insert("surface".to_string(), "disk".to_string());
        cfg.insert("field".to_string(), "rotation".to_string());
        let rep = RunReport::new("index", cfg, 12, &serde_json::json!({"ind": 1})).unwrap();
        let text = serde_json::to_string(&rep).unwrap();
        let cmd = text.find("\"command\"").unwrap();
        let ver = text.find("\"version\"").unwrap();
        let res = text.find("\"results\"").unwrap();
        assert!(cmd < ver && ver < res);
    }

    #[test]
    fn diagnostics_csv_has_boundary_columns_on_the_disk() {
        let d = Surface::disk();
        let f = catalog_field(&d, "rotation").unwrap();
        let params = crate::fields::ZeroFindParams { grid: 20, ..Default::default() };
        let grid = [0.25, 0.125, 0.0625, 0.03125];
        let rep = crate::vmo::vmo_index(&d, &f, &grid, 2, &params).unwrap();
        let csv = vmo_diagnostics_csv(&d, &f, &rep).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), grid.len() + 1);
        assert!(lines[1].split(',').count() == 6);
        assert!(!lines[1].ends_with(",,"));
    }
}
