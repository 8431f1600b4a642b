//! Vector-field indices: local and total indices of tangent fields, the
//! inward boundary index, the Morse identity and its stability radius.

use std::f64::consts::TAU;

use serde::Serialize;

use crate::degree::winding_number;
use crate::error::{Error, Result};
use crate::fields::{
    find_zeros, min_boundary_norm, pushforward, transverse_perturb, BoundaryDatum, Region,
    TangentField, Zero, ZeroFindParams,
};
use crate::geometry::{Surface, SurfacePoint};
use crate::linalg::Vec2;

/// Golden-ratio stability factor: perturbations of the boundary values
/// smaller than this multiple of the minimal boundary norm cannot change any
/// of the indices.
pub const STABILITY_FACTOR: f64 = 0.30901699437494742; // (sqrt(5) - 1) / 4

const BOUNDARY_SAMPLES: usize = 2048;
const BOUNDARY_NORM_TOL: f64 = 1e-9;

/// Total index as the sum of Jacobian signs over transverse zeros.
///
/// Fails with [`Error::ZeroOnBoundary`] when the field (sampled densely)
/// vanishes on the boundary, and propagates [`Error::DegenerateZero`] from
/// the zero finder.
pub fn index_transverse(
    s: &Surface,
    f: &TangentField,
    params: &ZeroFindParams,
) -> Result<(i64, Vec<Zero>)> {
    if !s.is_closed() {
        let mn = min_boundary_norm(s, f, BOUNDARY_SAMPLES);
        if mn < BOUNDARY_NORM_TOL {
            return Err(Error::ZeroOnBoundary { min_norm: mn });
        }
    }
    let zeros = find_zeros(s, f, params)?;
    Ok((zeros.iter().map(|z| z.sign).sum(), zeros))
}

/// Local index of an isolated zero as the winding number of the pushforward
/// around a chart circle of radius `r`.
///
/// Fails with [`Error::BallContainsOtherZero`] if another of the supplied
/// zeros lies within ambient distance `3 r` of the center, and with
/// [`Error::VanishingOnCircle`] when the field vanishes on the circle.
pub fn index_winding(
    s: &Surface,
    f: &TangentField,
    center: &SurfacePoint,
    r: f64,
    all_zeros: &[Zero],
) -> Result<i64> {
    for z in all_zeros {
        let d = (z.point.pos - center.pos).norm();
        if d > 1e-9 && d <= 3.0 * r {
            return Err(Error::BallContainsOtherZero { r });
        }
    }
    winding_number(
        |t| {
            pushforward(s, f, center.chart, center.u + r * t.cos(), center.v + r * t.sin())
                .unwrap_or(Vec2::ZERO)
        },
        1e-12,
    )
}

/// Maximal closed arcs of a boundary curve on which the field points inward
/// (v . nu < 0), as theta intervals (a, b) with b in (a, a + 2 pi]. Crossing
/// endpoints are refined by bisection.
pub fn inward_boundary_region(
    s: &Surface,
    g: &BoundaryDatum,
    curve: usize,
) -> Result<Vec<(f64, f64)>> {
    let h = |theta: f64| g.eval(s, curve, theta).dot(s.boundary[curve].conormal(theta));
    let n = 4096;
    // Irrational grid offset so that crossings of symmetric data never land
    // exactly on a sample point.
    let off = 1.0 / std::f64::consts::PI;
    let node = |k: usize| TAU * (k as f64 + off) / n as f64;
    let vals: Vec<f64> = (0..n).map(|k| h(node(k))).collect();

    // Locate sign crossings of h.
    let mut crossings: Vec<(f64, bool)> = Vec::new(); // (theta, entering_inward)
    for k in 0..n {
        let a = vals[k];
        let b = vals[(k + 1) % n];
        if a == 0.0 || a * b >= 0.0 {
            continue;
        }
        let (mut lo, mut hi) = (node(k), node(k) + TAU / n as f64);
        let flo = a;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if h(mid) * flo > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let theta = crate::geometry::wrap_angle(0.5 * (lo + hi));
        crossings.push((theta, a > 0.0));
    }

    if crossings.is_empty() {
        // No sign change: the curve is entirely inward, entirely outward, or
        // h is identically zero (tangential field, treated as not inward).
        let all_negative = vals.iter().all(|&v| v < 0.0);
        return Ok(if all_negative { vec![(0.0, TAU)] } else { vec![] });
    }

    crossings.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut arcs = Vec::new();
    for (i, &(theta, entering)) in crossings.iter().enumerate() {
        if !entering {
            continue;
        }
        // The matching exit is the next crossing going outward.
        let (exit, _) = crossings[(i + 1) % crossings.len()];
        let end = if exit > theta { exit } else { exit + TAU };
        arcs.push((theta, end));
    }
    Ok(arcs)
}

/// Inward boundary index: on each closed arc where the datum points inward,
/// the zeros of the tangential component tau = v . t are counted with the
/// sign of d tau / d theta.
///
/// A full inward circle with identically vanishing tangential component
/// contributes zero (the tangential projection has no crossings, and the
/// circle's Euler characteristic vanishes).
pub fn inward_boundary_index(s: &Surface, g: &BoundaryDatum) -> Result<i64> {
    let mn = g.min_norm(s, BOUNDARY_SAMPLES);
    if mn < BOUNDARY_NORM_TOL {
        return Err(Error::VanishingOnBoundary);
    }
    let mut total = 0i64;
    for curve in 0..s.boundary.len() {
        let tau = |theta: f64| g.eval(s, curve, theta).dot(s.boundary[curve].unit_tangent(theta));
        for (a, b) in inward_boundary_region(s, g, curve)? {
            let full_circle = (b - a - TAU).abs() < 1e-9;
            let m = ((b - a) / TAU * 2048.0).ceil() as usize + 8;
            let sup_tau = (0..=m)
                .map(|k| tau(a + (b - a) * k as f64 / m as f64).abs())
                .fold(0.0f64, f64::max);
            if sup_tau < BOUNDARY_NORM_TOL {
                if full_circle {
                    // Purely inward-conormal datum on a closed circle.
                    continue;
                }
                return Err(Error::DegenerateBoundaryZero { theta: a });
            }
            // Interior sample points; on a full circle the endpoints meet so
            // the last interval closes the loop.
            let upper = if full_circle { m } else { m - 1 };
            for k in 0..upper {
                let t0 = a + (b - a) * (k as f64 + 0.5) / m as f64;
                let t1 = a + (b - a) * (k as f64 + 1.5) / m as f64;
                let (f0, f1) = (tau(t0), tau(t1));
                if f0 == 0.0 {
                    // Exact zero at a sample point.
                    let d = 1e-6;
                    let slope = (tau(t0 + d) - tau(t0 - d)) / (2.0 * d);
                    if slope.abs() < 1e-8 {
                        return Err(Error::DegenerateBoundaryZero { theta: t0 });
                    }
                    total += if slope > 0.0 { 1 } else { -1 };
                    continue;
                }
                if f0 * f1 >= 0.0 {
                    continue;
                }
                let (mut lo, mut hi) = (t0, t1);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if tau(mid) * f0 > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let root = 0.5 * (lo + hi);
                let d = 1e-6;
                let slope = (tau(root + d) - tau(root - d)) / (2.0 * d);
                if slope.abs() < 1e-8 {
                    return Err(Error::DegenerateBoundaryZero { theta: root });
                }
                total += if slope > 0.0 { 1 } else { -1 };
            }
        }
    }
    Ok(total)
}

/// Largest admissible boundary perturbation: eps1 = (sqrt(5) - 1) / 4 times
/// the minimal boundary norm of the field.
pub fn stability_radius(s: &Surface, f: &TangentField) -> Result<f64> {
    if s.is_closed() {
        return Err(Error::BoundaryPresent);
    }
    let mn = min_boundary_norm(s, f, BOUNDARY_SAMPLES);
    if mn < BOUNDARY_NORM_TOL {
        return Err(Error::ZeroOnBoundary { min_norm: mn });
    }
    Ok(STABILITY_FACTOR * mn)
}

/// Per-zero record in an [`IndexReport`].
#[derive(Debug, Clone, Serialize)]
pub struct ZeroRecord {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub chart: usize,
    pub u: f64,
    pub v: f64,
    pub sign: i64,
}

impl From<&Zero> for ZeroRecord {
    fn from(z: &Zero) -> Self {
        ZeroRecord {
            x: z.point.pos.x,
            y: z.point.pos.y,
            z: z.point.pos.z,
            chart: z.point.chart,
            u: z.point.u,
            v: z.point.v,
            sign: z.sign,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IndexDiagnostics {
    pub min_boundary_norm: Option<f64>,
    pub perturbed: bool,
    pub perturbation_budget: Option<f64>,
    pub zero_count: usize,
}

/// Certified index data for one field on one surface: the Morse identity
/// ind + ind_minus = chi must close exactly (residual zero) for the
/// computation to count as certified.
#[derive(Debug, Clone, Serialize)]
pub struct IndexReport {
    pub surface: String,
    pub field: String,
    pub chi: i64,
    pub ind: i64,
    pub ind_minus: i64,
    pub morse_residual: i64,
    pub zeros: Vec<ZeroRecord>,
    pub epsilon1: Option<f64>,
    pub diagnostics: IndexDiagnostics,
}

/// Total index of a continuous field: transverse zeros are summed directly;
/// a degenerate zero triggers an automatic boundary-preserving perturbation
/// within a fraction of the stability radius, which cannot change the total.
pub fn index_continuous(
    s: &Surface,
    f: &TangentField,
    params: &ZeroFindParams,
    seed: u64,
) -> Result<(i64, Vec<Zero>, bool)> {
    match index_transverse(s, f, params) {
        Ok((ind, zeros)) => Ok((ind, zeros, false)),
        Err(Error::DegenerateZero { .. }) => {
            let budget = if s.is_closed() {
                0.05 * sup_norm_estimate(s, f).max(1e-6)
            } else {
                0.5 * stability_radius(s, f)?
            };
            let (g, zeros) = transverse_perturb(s, f, budget, seed, params)?;
            let _ = g;
            Ok((zeros.iter().map(|z| z.sign).sum(), zeros, true))
        }
        Err(e) => Err(e),
    }
}

fn sup_norm_estimate(s: &Surface, f: &TangentField) -> f64 {
    let mut sup = 0.0f64;
    for chart_idx in 0..s.charts.len() {
        let c = &s.charts[chart_idx];
        let [u0, u1, v0, v1] = c.zero_scan;
        for i in 0..16 {
            for j in 0..16 {
                let u = u0 + (u1 - u0) * (i as f64 + 0.5) / 16.0;
                let v = v0 + (v1 - v0) * (j as f64 + 0.5) / 16.0;
                let p = SurfacePoint { chart: chart_idx, u, v, pos: c.embed(u, v) };
                sup = sup.max(f.eval(s, &p).norm());
            }
        }
    }
    sup
}

/// Runs the full certification for one field: total index, inward boundary
/// index, Euler characteristic and the Morse residual, plus the stability
/// radius when the surface has a boundary.
pub fn morse_check(
    s: &Surface,
    f: &TangentField,
    params: &ZeroFindParams,
    seed: u64,
) -> Result<IndexReport> {
    let (ind, zeros, perturbed) = index_continuous(s, f, params, seed)?;
    let (ind_minus, min_bnorm, eps1) = if s.is_closed() {
        (0, None, None)
    } else {
        let g = BoundaryDatum::trace(f);
        (
            inward_boundary_index(s, &g)?,
            Some(min_boundary_norm(s, f, BOUNDARY_SAMPLES)),
            Some(stability_radius(s, f)?),
        )
    };
    let chi = s.euler_characteristic();
    Ok(IndexReport {
        surface: s.name.clone(),
        field: f.name.clone(),
        chi,
        ind,
        ind_minus,
        morse_residual: ind + ind_minus - chi,
        zeros: zeros.iter().map(ZeroRecord::from).collect(),
        epsilon1: eps1,
        diagnostics: IndexDiagnostics {
            min_boundary_norm: min_bnorm,
            perturbed,
            perturbation_budget: None,
            zero_count: zeros.len(),
        },
    })
}

/// Additivity of the index over disjoint subregions: every zero must fall in
/// exactly one region, and the per-region indices must sum to the total.
pub fn excision_check(
    s: &Surface,
    f: &TangentField,
    regions: &[Region],
    params: &ZeroFindParams,
) -> Result<Vec<i64>> {
    let (total, zeros) = index_transverse(s, f, params)?;
    let mut sums = vec![0i64; regions.len()];
    for z in &zeros {
        let mut hit = None;
        for (i, r) in regions.iter().enumerate() {
            if (r.contains)(z.point.pos) {
                hit = Some(i);
                break;
            }
        }
        match hit {
            Some(i) => sums[i] += z.sign,
            None => return Err(Error::ZeroOutsideSubregions),
        }
    }
    debug_assert_eq!(sums.iter().sum::<i64>(), total);
    Ok(sums)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::catalog_field;
    use crate::linalg::Vec3;

    fn disk_report(name: &str) -> IndexReport {
        let d = Surface::disk();
        let f = catalog_field(&d, name).unwrap();
        morse_check(&d, &f, &ZeroFindParams::default(), 1).unwrap()
    }

    #[test]
    fn vertical_field_on_disk() {
        let r = disk_report("vertical");
        assert_eq!((r.ind, r.ind_minus, r.chi, r.morse_residual), (0, 1, 1, 0));
        assert!(r.zeros.is_empty());
        // Unit boundary norm gives the golden-ratio radius directly.
        assert!((r.epsilon1.unwrap() - STABILITY_FACTOR).abs() < 1e-12);
    }

    #[test]
    fn rotation_field_on_disk() {
        let r = disk_report("rotation");
        assert_eq!((r.ind, r.ind_minus, r.chi, r.morse_residual), (1, 0, 1, 0));
        assert_eq!(r.zeros.len(), 1);
    }

    #[test]
    fn hyperbolic_field_on_disk() {
        let r = disk_report("hyperbolic");
        assert_eq!((r.ind, r.ind_minus, r.chi, r.morse_residual), (-1, 2, 1, 0));
    }

    #[test]
    fn vertical_field_on_annulus_cancels_across_curves() {
        let a = Surface::annulus();
        let f = catalog_field(&a, "vertical").unwrap();
        let r = morse_check(&a, &f, &ZeroFindParams::default(), 1).unwrap();
        assert_eq!((r.ind, r.ind_minus, r.chi, r.morse_residual), (0, 0, 0, 0));
    }

    #[test]
    fn radial_field_on_annulus_full_inward_circle() {
        // (x, y) points outward on the outer circle, inward on the inner one,
        // with identically vanishing tangential part: contributes 0.
        let a = Surface::annulus();
        let f = catalog_field(&a, "radial").unwrap();
        let r = morse_check(&a, &f, &ZeroFindParams::default(), 1).unwrap();
        assert_eq!((r.ind, r.ind_minus, r.chi, r.morse_residual), (0, 0, 0, 0));
    }

    #[test]
    fn poincare_hopf_on_closed_surfaces() {
        let s = Surface::sphere();
        let f = catalog_field(&s, "rotation-z").unwrap();
        let r = morse_check(&s, &f, &ZeroFindParams::default(), 1).unwrap();
        assert_eq!((r.ind, r.chi, r.morse_residual), (2, 2, 0));

        let t = Surface::torus();
        let f = catalog_field(&t, "angular").unwrap();
        let r = morse_check(&t, &f, &ZeroFindParams::default(), 1).unwrap();
        assert_eq!((r.ind, r.chi, r.morse_residual), (0, 0, 0));
    }

    #[test]
    fn winding_index_agrees_with_jacobian_sign() {
        let d = Surface::disk();
        for (name, expect) in [("rotation", 1i64), ("hyperbolic", -1), ("radial", 1)] {
            let f = catalog_field(&d, name).unwrap();
            let zeros = find_zeros(&d, &f, &ZeroFindParams::default()).unwrap();
            let w = index_winding(&d, &f, &zeros[0].point, 0.05, &zeros).unwrap();
            assert_eq!(w, expect, "{name}");
            assert_eq!(zeros[0].sign, expect, "{name}");
        }
    }

    #[test]
    fn winding_index_rejects_crowded_ball() {
        let d = Surface::disk();
        let f = TangentField::from_ambient("pair", |p| Vec3::new(p.x * p.x - 0.09, p.y, 0.0));
        let zeros = find_zeros(&d, &f, &ZeroFindParams::default()).unwrap();
        assert_eq!(zeros.len(), 2);
        let r = index_winding(&d, &f, &zeros[0].point, 0.3, &zeros);
        assert!(matches!(r, Err(Error::BallContainsOtherZero { .. })));
    }

    #[test]
    fn excision_splits_index_between_zeros() {
        let d = Surface::disk();
        let f = TangentField::from_ambient("pair", |p| Vec3::new(p.x * p.x - 0.09, p.y, 0.0));
        let regions = [
            Region::ball(Vec3::new(0.3, 0.0, 0.0), 0.2),
            Region::ball(Vec3::new(-0.3, 0.0, 0.0), 0.2),
        ];
        let sums = excision_check(&d, &f, &regions, &ZeroFindParams::default()).unwrap();
        assert_eq!(sums, vec![1, -1]);

        let tight = [Region::ball(Vec3::new(0.3, 0.0, 0.0), 0.2)];
        assert!(matches!(
            excision_check(&d, &f, &tight, &ZeroFindParams::default()),
            Err(Error::ZeroOutsideSubregions)
        ));
    }

    #[test]
    fn degenerate_zero_resolved_by_perturbation() {
        let d = Surface::disk();
        let f = TangentField::from_ambient("deg", |p| Vec3::new(p.x * p.x, p.y, 0.0));
        let (ind, _, perturbed) = index_continuous(&d, &f, &ZeroFindParams::default(), 5).unwrap();
        assert!(perturbed);
        assert_eq!(ind, 0);
        // The Morse identity still closes after perturbation.
        let r = morse_check(&d, &f, &ZeroFindParams::default(), 5).unwrap();
        assert_eq!(r.morse_residual, 0);
    }

    #[test]
    fn boundary_zero_is_rejected() {
        let d = Surface::disk();
        // Vanishes at (1, 0).
        let f = TangentField::from_ambient("bad", |p| Vec3::new(p.x - 1.0, p.y, 0.0));
        assert!(matches!(
            index_transverse(&d, &f, &ZeroFindParams::default()),
            Err(Error::ZeroOnBoundary { .. })
        ));
    }

    #[test]
    fn inward_region_of_vertical_field_on_disk() {
        let d = Surface::disk();
        let f = catalog_field(&d, "vertical").unwrap();
        let g = BoundaryDatum::trace(&f);
        let arcs = inward_boundary_region(&d, &g, 0).unwrap();
        assert_eq!(arcs.len(), 1);
        // (0, 1) . (cos, sin) < 0 exactly on (pi, 2 pi).
        assert!((arcs[0].0 - std::f64::consts::PI).abs() < 1e-9);
        assert!((arcs[0].1 - TAU).abs() < 1e-9);
    }

    #[test]
    fn index_is_stable_under_small_boundary_perturbations() {
        let d = Surface::disk();
        let f = catalog_field(&d, "hyperbolic").unwrap();
        let eps1 = stability_radius(&d, &f).unwrap();
        // A constant shift well within the stability radius.
        let shift = eps1 * 0.8;
        let g = TangentField::from_ambient("shifted", move |p| {
            Vec3::new(p.y + 0.37 * shift, p.x - 0.21 * shift, 0.0)
        });
        let rf = morse_check(&d, &f, &ZeroFindParams::default(), 1).unwrap();
        let rg = morse_check(&d, &g, &ZeroFindParams::default(), 1).unwrap();
        assert_eq!((rf.ind, rf.ind_minus), (rg.ind, rg.ind_minus));
    }
}
