//! Averaged (mean-oscillation) indices.
//!
//! A merely bounded, possibly discontinuous tangent field still has a
//! well-defined index when its mean oscillation vanishes at small scales.
//! The computation replaces the field by geodesic-ball averages projected
//! back to the tangent bundle, evaluates the classical indices of the
//! mollified fields over a grid of radii, and certifies the common value
//! once it stabilizes.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{smoothstep, BoundaryDatum, TangentField, ZeroFindParams};
use crate::geometry::{Surface, SurfacePoint};
use crate::index::{inward_boundary_index, IndexDiagnostics, IndexReport, ZeroRecord};
use crate::linalg::{Sym2, Vec2, Vec3};

/// Default radius grid: r0 / 2, r0 / 4, ..., r0 / 64.
pub fn default_eps_grid(r0: f64) -> Vec<f64> {
    (1..=6).map(|k| r0 / (1 << k) as f64).collect()
}

/// Midpoint quadrature nodes on the unit disk; weights sum to one.
fn unit_disk_nodes(n_r: usize) -> Vec<(Vec2, f64)> {
    let n_a = 2 * n_r;
    let drho = 1.0 / n_r as f64;
    let dalpha = TAU / n_a as f64;
    let mut nodes = Vec::with_capacity(n_r * n_a);
    for i in 0..n_r {
        let rho = (i as f64 + 0.5) * drho;
        for j in 0..n_a {
            let alpha = (j as f64 + 0.5) * dalpha;
            let w = rho * drho * dalpha / PI;
            nodes.push((Vec2::new(rho * alpha.cos(), rho * alpha.sin()), w));
        }
    }
    nodes
}

/// The standard extension of a boundary datum to the outside of a planar
/// surface: g at the nearest boundary point, faded out by a smooth cutoff
/// over the outer half of the collar. Zero beyond the collar.
pub fn standard_extension(s: &Surface, g: &BoundaryDatum, pos: Vec3) -> Vec3 {
    match s.boundary_signed_distance(pos) {
        Some((curve, theta, sdist)) if sdist < 0.0 => {
            let w = s.collars[curve].width;
            let d = -sdist;
            let chi = 1.0 - smoothstep((d - w / 2.0) / (w / 2.0));
            g.eval(s, curve, theta) * chi
        }
        _ => Vec3::ZERO,
    }
}

/// The glued field: the interior field on the surface, the standard
/// extension of the datum outside it. This is the integrand for planar
/// mollification near the boundary.
pub fn glued_value(s: &Surface, f: &TangentField, g: &BoundaryDatum, pos: Vec3) -> Vec3 {
    match s.boundary_signed_distance(pos) {
        Some((_, _, sdist)) if sdist < 0.0 => standard_extension(s, g, pos),
        _ => match s.ambient_to_point(pos) {
            Ok(p) => f.eval(s, &p),
            Err(_) => Vec3::ZERO,
        },
    }
}

/// Raw ball average of the glued field, before tangent projection.
pub fn ball_average(
    s: &Surface,
    f: &TangentField,
    g: &BoundaryDatum,
    x: &SurfacePoint,
    eps: f64,
    nodes: &[(Vec2, f64)],
) -> Result<Vec3> {
    if s.is_planar() {
        let mut acc = Vec3::ZERO;
        for (e, w) in nodes {
            let pos = x.pos + Vec3::new(eps * e.x, eps * e.y, 0.0);
            acc = acc + glued_value(s, f, g, pos) * *w;
        }
        Ok(acc)
    } else {
        let samples = s.metric_ball_sample(x, eps, nodes.len())?;
        let mut acc = Vec3::ZERO;
        let mut total = 0.0;
        for (p, w) in &samples {
            acc = acc + f.eval(s, p) * *w;
            total += w;
        }
        Ok(acc * (1.0 / total))
    }
}

/// Admissibility limit for the averaging radius: half the narrowest collar
/// on planar surfaces (so the glued field is exact where the ball crosses
/// the boundary), r0 on closed surfaces.
pub fn max_mollify_eps(s: &Surface) -> f64 {
    if s.is_planar() {
        let w = s.collars.iter().map(|c| c.width).fold(f64::INFINITY, f64::min);
        (w / 2.0).min(s.r0)
    } else {
        s.r0
    }
}

/// Mollified field u_eps: the ball average of the (glued) field, projected
/// back onto the tangent plane at the center.
pub fn mollify(s: &Surface, f: &TangentField, eps: f64, n_nodes: usize) -> Result<TangentField> {
    let limit = max_mollify_eps(s);
    if eps > limit {
        return Err(Error::EpsTooLarge { eps, limit, context: "mollification radius" });
    }
    let g = if s.is_closed() {
        BoundaryDatum::new("none", Arc::new(|_: &Surface, _, _| Vec3::ZERO))
    } else {
        BoundaryDatum::trace(f)
    };
    let f = f.clone();
    let n_r = ((n_nodes as f64 / 2.0).sqrt().ceil() as usize).max(3);
    let nodes = unit_disk_nodes(n_r);
    Ok(TangentField::new(
        &format!("mollified({}, {eps:.5})", f.name),
        Arc::new(move |s: &Surface, p: &SurfacePoint| {
            match ball_average(s, &f, &g, p, eps, &nodes) {
                Ok(avg) => s.tangent_project(p, avg),
                // Outside the admissible evaluation set (the metric ellipse
                // leaves the chart): return a huge tangent vector so root
                // finders cannot mistake the failure for a zero.
                Err(_) => {
                    let (fu, _) = s.charts[p.chart].partials(p.u, p.v);
                    fu.normalized() * 1e9
                }
            }
        }),
    ))
}

/// Arc-averaged boundary datum g_eps: the mean of g over the boundary arc of
/// arclength radius eps, projected onto the tangent plane at the center.
pub fn mollify_datum(g: &BoundaryDatum, eps: f64, m: usize) -> BoundaryDatum {
    let g = g.clone();
    BoundaryDatum::new(
        &format!("mollified({}, {eps:.5})", g.name),
        Arc::new(move |s: &Surface, curve: usize, theta: f64| {
            let speed = s.boundary[curve].speed();
            let delta = eps / speed;
            let mut acc = Vec3::ZERO;
            for k in 0..m {
                let t = theta - delta + 2.0 * delta * (k as f64 + 0.5) / m as f64;
                acc = acc + g.eval(s, curve, t);
            }
            let avg = acc * (1.0 / m as f64);
            let x = s
                .ambient_to_point(s.boundary[curve].point(theta))
                .expect("boundary point");
            s.tangent_project(&x, avg)
        }),
    )
}

/// The mean-oscillation modulus of the field over a radius grid: for each
/// eps, the largest ball average of |f - f_ball| over interior sample
/// points at depth 2 eps.
#[derive(Debug, Clone, Serialize)]
pub struct VmoModulus {
    pub eps: Vec<f64>,
    pub modulus: Vec<f64>,
}

pub fn bmo_modulus(s: &Surface, f: &TangentField, eps_grid: &[f64]) -> Result<VmoModulus> {
    let g = if s.is_closed() {
        BoundaryDatum::new("none", Arc::new(|_: &Surface, _, _| Vec3::ZERO))
    } else {
        BoundaryDatum::trace(f)
    };
    let nodes = unit_disk_nodes(12);

    // Oscillation concentrates where the field is smallest, so besides the
    // coarse grid we zoom in around the minimal-norm point at every scale.
    let mut focus: Option<SurfacePoint> = None;
    let mut focus_norm = f64::INFINITY;
    for chart_idx in 0..s.charts.len() {
        let c = &s.charts[chart_idx];
        let [u0, u1, v0, v1] = c.zero_scan;
        for i in 0..48 {
            for j in 0..48 {
                let u = u0 + (u1 - u0) * (i as f64 + 0.5) / 48.0;
                let v = v0 + (v1 - v0) * (j as f64 + 0.5) / 48.0;
                let p = SurfacePoint { chart: chart_idx, u, v, pos: c.embed(u, v) };
                let n = f.eval(s, &p).norm();
                if n < focus_norm {
                    focus_norm = n;
                    focus = Some(p);
                }
            }
        }
    }

    let mut modulus = Vec::with_capacity(eps_grid.len());
    // Argmax of the previous (coarser) pass; zooming in around it tracks
    // oscillation that concentrates on small sets as the radius shrinks.
    let mut prev_argmax: Option<SurfacePoint> = None;
    for &eps in eps_grid {
        let mut centers: Vec<SurfacePoint> = Vec::new();
        for chart_idx in 0..s.charts.len() {
            let c = &s.charts[chart_idx];
            let [u0, u1, v0, v1] = c.zero_scan;
            for i in 0..12 {
                for j in 0..12 {
                    let u = u0 + (u1 - u0) * (i as f64 + 0.5) / 12.0;
                    let v = v0 + (v1 - v0) * (j as f64 + 0.5) / 12.0;
                    centers.push(SurfacePoint { chart: chart_idx, u, v, pos: c.embed(u, v) });
                }
            }
        }
        for x0 in [focus, prev_argmax].into_iter().flatten() {
            let c = &s.charts[x0.chart];
            for i in -4i32..=4 {
                for j in -4i32..=4 {
                    let u = x0.u + eps * 0.5 * i as f64;
                    let v = x0.v + eps * 0.5 * j as f64;
                    if c.contains(u, v) {
                        centers.push(SurfacePoint { chart: x0.chart, u, v, pos: c.embed(u, v) });
                    }
                }
            }
        }

        let mut sup = 0.0f64;
        let mut argmax: Option<SurfacePoint> = None;
        {
            {
                for p in &centers {
                    let p = *p;
                    if s.distance_to_boundary(p.pos) < 2.0 * eps {
                        continue;
                    }
                    let avg = ball_average(s, f, &g, &p, eps, &nodes)?;
                    // Oscillation around the ball average.
                    let osc = if s.is_planar() {
                        let mut acc = 0.0;
                        for (e, w) in &nodes {
                            let pos = p.pos + Vec3::new(eps * e.x, eps * e.y, 0.0);
                            acc += (glued_value(s, f, &g, pos) - avg).norm() * w;
                        }
                        acc
                    } else {
                        let samples = s.metric_ball_sample(&p, eps, nodes.len())?;
                        let total: f64 = samples.iter().map(|(_, w)| w).sum();
                        samples
                            .iter()
                            .map(|(q, w)| (f.eval(s, q) - avg).norm() * w)
                            .sum::<f64>()
                            / total
                    };
                    if osc > sup {
                        sup = osc;
                        argmax = Some(p);
                    }
                }
            }
        }
        prev_argmax = argmax;
        modulus.push(sup);
    }
    Ok(VmoModulus { eps: eps_grid.to_vec(), modulus })
}

/// One row of the radius-grid diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct VmoRow {
    pub eps: f64,
    pub ind: i64,
    pub ind_minus: i64,
    /// sup over the boundary of |u_eps - g_eps|.
    pub boundary_gap: f64,
    /// sup over the interior of the tangent-projection correction
    /// |u_eps - ball average|.
    pub projection_gap: f64,
    /// min over the boundary of |u_eps|.
    pub min_boundary_norm: f64,
}

/// The averaged-index certificate over a radius grid.
#[derive(Debug, Clone, Serialize)]
pub struct VmoReport {
    pub surface: String,
    pub field: String,
    pub chi: i64,
    pub ind: i64,
    pub ind_minus: i64,
    pub morse_residual: i64,
    pub rows: Vec<VmoRow>,
    /// Number of trailing grid entries over which the indices were constant.
    pub certified_tail: usize,
}

impl VmoReport {
    /// Flattens into the common index-report shape.
    pub fn to_index_report(&self) -> IndexReport {
        IndexReport {
            surface: self.surface.clone(),
            field: self.field.clone(),
            chi: self.chi,
            ind: self.ind,
            ind_minus: self.ind_minus,
            morse_residual: self.morse_residual,
            zeros: Vec::<ZeroRecord>::new(),
            epsilon1: None,
            diagnostics: IndexDiagnostics {
                min_boundary_norm: self.rows.last().map(|r| r.min_boundary_norm),
                perturbed: false,
                perturbation_budget: None,
                zero_count: 0,
            },
        }
    }
}

/// Computes the averaged index of a bounded tangent field over the radius
/// grid and certifies constancy over the last `tail` entries (default grids
/// use tail = 4).
///
/// Fails with [`Error::NotConstantOverGrid`] when the indices have not
/// stabilized, which signals that the field is not in the vanishing
/// mean-oscillation class at the resolved scales (or the grid is too coarse).
pub fn vmo_index(
    s: &Surface,
    f: &TangentField,
    eps_grid: &[f64],
    tail: usize,
    params: &ZeroFindParams,
) -> Result<VmoReport> {
    if eps_grid.len() < tail || tail < 2 {
        return Err(Error::Config(format!(
            "radius grid of length {} cannot certify a tail of {tail}",
            eps_grid.len()
        )));
    }
    let g = if s.is_closed() { None } else { Some(BoundaryDatum::trace(f)) };
    let mut rows: Vec<VmoRow> = Vec::with_capacity(eps_grid.len());
    for &eps in eps_grid {
        let u = mollify(s, f, eps, 256)?;
        let zeros = crate::fields::find_zeros(s, &u, params)?;
        let ind: i64 = zeros.iter().map(|z| z.sign).sum();
        let (ind_minus, boundary_gap, min_bnorm) = match &g {
            None => (0, 0.0, f64::INFINITY),
            Some(g) => {
                let g_eps = mollify_datum(g, eps, 65);
                let im = inward_boundary_index(s, &g_eps)?;
                let mut gap = 0.0f64;
                let mut mn = f64::INFINITY;
                for curve in 0..s.boundary.len() {
                    for (theta, p) in boundary_probe(s, curve, 256) {
                        let ue = u.eval(s, &p);
                        gap = gap.max((ue - g_eps.eval(s, curve, theta)).norm());
                        mn = mn.min(ue.norm());
                    }
                }
                (im, gap, mn)
            }
        };
        let projection_gap = projection_gap(s, f, eps)?;
        rows.push(VmoRow { eps, ind, ind_minus, boundary_gap, projection_gap, min_boundary_norm: min_bnorm });
    }

    let tail_rows = &rows[rows.len() - tail..];
    let first = (tail_rows[0].ind, tail_rows[0].ind_minus);
    if !tail_rows.iter().all(|r| (r.ind, r.ind_minus) == first) {
        return Err(Error::NotConstantOverGrid {
            values: rows.iter().map(|r| (r.ind, r.ind_minus)).collect(),
        });
    }
    let chi = s.euler_characteristic();
    Ok(VmoReport {
        surface: s.name.clone(),
        field: f.name.clone(),
        chi,
        ind: first.0,
        ind_minus: first.1,
        morse_residual: first.0 + first.1 - chi,
        rows,
        certified_tail: tail,
    })
}

fn boundary_probe(s: &Surface, curve: usize, n: usize) -> Vec<(f64, SurfacePoint)> {
    (0..n)
        .map(|k| {
            let theta = TAU * (k as f64 + 0.37) / n as f64;
            let pos = s.boundary[curve].point(theta);
            (theta, s.ambient_to_point(pos).expect("boundary point"))
        })
        .collect()
}

/// sup over interior samples of |u_eps - ball average|, the size of the
/// tangent-projection correction. Identically zero on flat surfaces.
fn projection_gap(s: &Surface, f: &TangentField, eps: f64) -> Result<f64> {
    let g = if s.is_closed() {
        BoundaryDatum::new("none", Arc::new(|_: &Surface, _, _| Vec3::ZERO))
    } else {
        BoundaryDatum::trace(f)
    };
    let nodes = unit_disk_nodes(8);
    let mut sup = 0.0f64;
    for chart_idx in 0..s.charts.len() {
        let c = &s.charts[chart_idx];
        let [u0, u1, v0, v1] = c.zero_scan;
        for i in 0..10 {
            for j in 0..10 {
                let u = u0 + (u1 - u0) * (i as f64 + 0.5) / 10.0;
                let v = v0 + (v1 - v0) * (j as f64 + 0.5) / 10.0;
                let p = SurfacePoint { chart: chart_idx, u, v, pos: c.embed(u, v) };
                if s.distance_to_boundary(p.pos) < 2.0 * eps {
                    continue;
                }
                let avg = ball_average(s, f, &g, &p, eps, &nodes)?;
                let proj = s.tangent_project(&p, avg);
                sup = sup.max((proj - avg).norm());
            }
        }
    }
    Ok(sup)
}

/// Relative measure of the surface side inside small metric balls centered
/// on the boundary of the doubled surface, computed in collar coordinates
/// with the mirrored metric. The reflection is an isometry of the double, so
/// the ratio equals 1/2 up to quadrature roundoff; the returned samples let
/// callers certify the quadratic closeness bound directly.
pub fn boundary_density_check(
    s: &Surface,
    collar_idx: usize,
    theta0: f64,
    eps_list: &[f64],
    n_r: usize,
) -> Result<Vec<(f64, f64)>> {
    if s.is_closed() {
        return Err(Error::Config("boundary density needs a surface with boundary".into()));
    }
    let collar = &s.collars[collar_idx];
    let h = 1e-6;
    // Metric of the double in collar coordinates (theta, t): mirror across
    // t = 0 by evaluating at |t|.
    let metric = |theta: f64, t: f64| -> Sym2 {
        let a = t.abs();
        let pt = |th: f64, tt: f64| collar.point(th, tt.max(0.0));
        let ft = (pt(theta + h, a) - pt(theta - h, a)) * (0.5 / h);
        let fs = (pt(theta, a + h) - pt(theta, (a - h).max(0.0))) * (1.0 / (h + a.min(h)));
        Sym2 { a: ft.dot(ft), b: ft.dot(fs), c: fs.dot(fs) }
    };
    let mut out = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        if eps > collar.width / 2.0 {
            return Err(Error::EpsTooLarge {
                eps,
                limit: collar.width / 2.0,
                context: "density radius exceeds half the collar width",
            });
        }
        let g0 = metric(theta0, 0.0);
        let m = g0.inv_sqrt();
        let sdet0 = g0.det().sqrt();
        let n_a = 2 * n_r;
        let drho = 1.0 / n_r as f64;
        let dalpha = TAU / n_a as f64;
        let mut inside = 0.0f64;
        let mut total = 0.0f64;
        for i in 0..n_r {
            let rho = (i as f64 + 0.5) * drho;
            for j in 0..n_a {
                let alpha = (j as f64 + 0.5) * dalpha;
                let e = Vec2::new(rho * alpha.cos(), rho * alpha.sin());
                let th = theta0 + eps * (m[0][0] * e.x + m[0][1] * e.y);
                let t = eps * (m[1][0] * e.x + m[1][1] * e.y);
                let w = metric(th, t).det().sqrt() / sdet0 * eps * eps * rho * drho * dalpha;
                total += w;
                if t > 0.0 {
                    inside += w;
                }
            }
        }
        out.push((eps, inside / total));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{catalog_field, find_zeros};

    #[test]
    fn mollified_smooth_field_keeps_its_index() {
        let d = Surface::disk();
        let f = catalog_field(&d, "rotation").unwrap();
        let u = mollify(&d, &f, 0.1, 128).unwrap();
        let zeros = find_zeros(&d, &u, &ZeroFindParams { grid: 24, ..Default::default() }).unwrap();
        assert_eq!(zeros.len(), 1);
        assert_eq!(zeros[0].sign, 1);
    }

    #[test]
    fn mollifying_linear_field_on_disk_is_exact() {
        // Averaging a linear field over centered balls reproduces the field
        // where the ball does not cross the boundary.
        let d = Surface::disk();
        let f = catalog_field(&d, "hyperbolic").unwrap();
        let u = mollify(&d, &f, 0.05, 512).unwrap();
        let p = d.point(0, 0.21, -0.13).unwrap();
        let diff = (u.eval(&d, &p) - f.eval(&d, &p)).norm();
        assert!(diff < 1e-12, "diff = {diff:.3e}");
    }

    #[test]
    fn eps_guard_matches_collar() {
        let d = Surface::disk();
        let f = catalog_field(&d, "rotation").unwrap();
        assert!(mollify(&d, &f, 0.26, 64).is_err());
        assert!(mollify(&d, &f, 0.25, 64).is_ok());
    }

    #[test]
    fn vmo_index_certifies_figure_fields() {
        let d = Surface::disk();
        let params = ZeroFindParams { grid: 20, ..Default::default() };
        let grid = default_eps_grid(d.r0);
        for (name, ind, ind_minus) in
            [("vertical", 0i64, 1i64), ("rotation", 1, 0), ("hyperbolic", -1, 2)]
        {
            let f = catalog_field(&d, name).unwrap();
            let r = vmo_index(&d, &f, &grid, 4, &params).unwrap();
            assert_eq!((r.ind, r.ind_minus, r.morse_residual), (ind, ind_minus, 0), "{name}");
        }
    }

    #[test]
    fn vmo_index_on_closed_surface() {
        let s = Surface::sphere();
        let f = catalog_field(&s, "rotation-z").unwrap();
        let r = vmo_index(&s, &f, &default_eps_grid(s.r0), 4, &ZeroFindParams { grid: 20, ..Default::default() })
            .unwrap();
        assert_eq!((r.ind, r.chi, r.morse_residual), (2, 2, 0));
        // On a curved surface the projection correction is visible and
        // shrinks with eps.
        let first = r.rows.first().unwrap().projection_gap;
        let last = r.rows.last().unwrap().projection_gap;
        assert!(first > 0.0 && last < first);
    }

    #[test]
    fn bmo_modulus_vanishes_for_smooth_fields_only() {
        let d = Surface::disk();
        let grid = default_eps_grid(d.r0);
        let smooth = catalog_field(&d, "rotation").unwrap();
        let m = bmo_modulus(&d, &smooth, &grid).unwrap();
        assert!(m.modulus.last().unwrap() < &(m.modulus.first().unwrap() / 8.0));

        // The normalized hedgehog is bounded but its oscillation near the
        // origin does not vanish at small scales.
        let hedgehog = TangentField::from_ambient("hedgehog", |p| {
            let r = (p.x * p.x + p.y * p.y).sqrt();
            if r == 0.0 {
                Vec3::ZERO
            } else {
                Vec3::new(p.x / r, p.y / r, 0.0)
            }
        });
        let m = bmo_modulus(&d, &hedgehog, &grid).unwrap();
        assert!(m.modulus.last().unwrap() > &0.2, "modulus = {:?}", m.modulus);
    }

    #[test]
    fn boundary_density_is_half() {
        let d = Surface::disk();
        let eps = [0.2, 0.1, 0.05, 0.025];
        let ratios = boundary_density_check(&d, 0, 1.2, &eps, 48).unwrap();
        for (eps, ratio) in ratios {
            assert!((ratio - 0.5).abs() < 1e-12, "eps {eps}: ratio {ratio}");
        }
        let a = Surface::annulus();
        let ratios = boundary_density_check(&a, 1, 0.4, &[0.05, 0.025], 48).unwrap();
        for (eps, ratio) in ratios {
            assert!((ratio - 0.5).abs() < 1e-12, "inner curve eps {eps}: ratio {ratio}");
        }
    }

    #[test]
    fn standard_extension_fades_over_collar() {
        let d = Surface::disk();
        let f = catalog_field(&d, "vertical").unwrap();
        let g = BoundaryDatum::trace(&f);
        // Just outside: full strength.
        let v = standard_extension(&d, &g, Vec3::new(1.05, 0.0, 0.0));
        assert!((v - Vec3::new(0.0, 1.0, 0.0)).norm() < 1e-12);
        // Beyond the collar: zero.
        let v = standard_extension(&d, &g, Vec3::new(1.6, 0.0, 0.0));
        assert!(v.norm() == 0.0);
        // Inside the surface the extension is not used.
        let v = standard_extension(&d, &g, Vec3::new(0.5, 0.0, 0.0));
        assert!(v.norm() == 0.0);
    }
}
