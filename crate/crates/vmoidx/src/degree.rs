//! Brouwer degree of maps between circles and spheres.
//!
//! Two independent computations are provided: a preimage count with signs at
//! a regular value, and the normalized pullback integral. Both must agree;
//! the integral version also serves as a cross-check that the value is an
//! integer within quadrature tolerance.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fields::{find_chart_roots, Region, ZeroFindParams};
use crate::geometry::{integrate_patch, QuadratureSpec, Surface};
use crate::linalg::{Vec2, Vec3};

/// A continuous map from the n-sphere to itself, n = 1 or 2. Values need not
/// be normalized; they are radially projected, so any nowhere-vanishing map
/// into punctured space qualifies.
#[derive(Clone)]
pub enum SphereMap {
    /// t in [0, 2 pi) maps to a nonzero plane vector.
    Circle(Arc<dyn Fn(f64) -> Vec2 + Send + Sync>),
    /// A unit vector maps to a nonzero space vector.
    Sphere(Arc<dyn Fn(Vec3) -> Vec3 + Send + Sync>),
}

impl SphereMap {
    pub fn circle<F>(f: F) -> SphereMap
    where
        F: Fn(f64) -> Vec2 + Send + Sync + 'static,
    {
        SphereMap::Circle(Arc::new(f))
    }

    pub fn sphere<F>(f: F) -> SphereMap
    where
        F: Fn(Vec3) -> Vec3 + Send + Sync + 'static,
    {
        SphereMap::Sphere(Arc::new(f))
    }
}

/// Winding number of a closed curve of nonzero plane vectors, by angle
/// accumulation with automatic refinement until every step is below pi / 2.
///
/// Fails with [`Error::VanishingOnCircle`] when a sample norm drops below
/// `min_norm_tol` and with [`Error::UnderResolved`] if the refinement cap is
/// reached before the steps resolve.
pub fn winding_number<F>(f: F, min_norm_tol: f64) -> Result<i64>
where
    F: Fn(f64) -> Vec2,
{
    let mut n = 64usize;
    loop {
        let mut min_norm = f64::INFINITY;
        let mut total = 0.0f64;
        let mut ok = true;
        let mut prev = f(0.0);
        min_norm = min_norm.min(prev.norm());
        for k in 1..=n {
            let cur = f(TAU * k as f64 / n as f64);
            min_norm = min_norm.min(cur.norm());
            let cross = prev.x * cur.y - prev.y * cur.x;
            let dot = prev.dot(cur);
            let step = cross.atan2(dot);
            if step.abs() >= PI / 2.0 {
                ok = false;
                break;
            }
            total += step;
            prev = cur;
        }
        if min_norm < min_norm_tol {
            return Err(Error::VanishingOnCircle { min_norm });
        }
        if ok {
            let w = total / TAU;
            let rounded = w.round();
            if (w - rounded).abs() > 1e-6 {
                return Err(Error::NonIntegerResult { value: w, tol: 1e-6 });
            }
            return Ok(rounded as i64);
        }
        n *= 2;
        if n > (1 << 22) {
            return Err(Error::UnderResolved);
        }
    }
}

/// Oriented orthonormal tangent basis at a point of the unit sphere:
/// b1 x b2 = x.
fn sphere_basis(x: Vec3) -> (Vec3, Vec3) {
    let helper = if x.x.abs() < 0.9 { Vec3::new(1.0, 0.0, 0.0) } else { Vec3::new(0.0, 1.0, 0.0) };
    let b1 = (helper - x * helper.dot(x)).normalized();
    let b2 = x.cross(b1);
    (b1, b2)
}

fn normalized_value(f: &Arc<dyn Fn(Vec3) -> Vec3 + Send + Sync>, x: Vec3) -> Vec3 {
    f(x.normalized()).normalized()
}

/// Degree of a sphere self-map as the signed count of preimages of the
/// regular value `y`. Returns the degree together with the preimages.
///
/// Fails with [`Error::NotRegularValue`] when some preimage has a singular
/// differential at the tolerance `jac_tol`.
pub fn degree_preimage(
    map: &SphereMap,
    y: Vec3,
    params: &ZeroFindParams,
) -> Result<(i64, Vec<Vec3>)> {
    let f = match map {
        SphereMap::Sphere(f) => f.clone(),
        SphereMap::Circle(f) => return circle_preimage_degree(f, y, params),
    };
    let y = y.normalized();
    let (c1, c2) = sphere_basis(y);
    let source = Surface::sphere();

    // phi(x) = y exactly when both components of phi - y along the tangent
    // plane at y vanish and phi is in the hemisphere of y; the complementary
    // roots are preimages of -y and are filtered out afterwards.
    let g = {
        let f = f.clone();
        let source = &source;
        move |chart: usize, u: f64, v: f64| {
            let c = &source.charts[chart];
            if !c.contains(u, v) {
                return None;
            }
            let x = c.embed(u, v);
            let d = normalized_value(&f, x) - y;
            Some(Vec2::new(d.dot(c1), d.dot(c2)))
        }
    };
    let roots = find_chart_roots(&source, params, &Region::everything(), g);

    let mut degree = 0i64;
    let mut preimages = Vec::new();
    let h = 1e-6;
    for (_, _, _, x) in roots {
        let x = x.normalized();
        if (normalized_value(&f, x) - y).norm() > 0.5 {
            continue; // preimage of -y
        }
        let (b1, b2) = sphere_basis(x);
        let d1 = (normalized_value(&f, x + b1 * h) - normalized_value(&f, x - b1 * h)) * (0.5 / h);
        let d2 = (normalized_value(&f, x + b2 * h) - normalized_value(&f, x - b2 * h)) * (0.5 / h);
        let det = c1.dot(d1) * c2.dot(d2) - c1.dot(d2) * c2.dot(d1);
        if det.abs() < params.jac_tol {
            return Err(Error::NotRegularValue(format!(
                "preimage ({:.6}, {:.6}, {:.6}) has |det| = {:.3e}",
                x.x, x.y, x.z, det.abs()
            )));
        }
        degree += if det > 0.0 { 1 } else { -1 };
        preimages.push(x);
    }
    Ok((degree, preimages))
}

/// Preimage count with slope signs for a circle map: zeros of the wrapped
/// angle difference to the target, located by sign changes and bisection.
/// The z component of the target is ignored.
fn circle_preimage_degree(
    f: &Arc<dyn Fn(f64) -> Vec2 + Send + Sync>,
    y: Vec3,
    params: &ZeroFindParams,
) -> Result<(i64, Vec<Vec3>)> {
    let beta = y.y.atan2(y.x);
    // Wrapped angle difference in (-pi, pi]: continuous near its zeros, with
    // a 2 pi jump elsewhere that must not be mistaken for a crossing.
    let h = |t: f64| -> Result<f64> {
        let v = f(t);
        if v.norm() < 1e-12 {
            return Err(Error::VanishingOnCircle { min_norm: v.norm() });
        }
        let mut d = v.y.atan2(v.x) - beta;
        while d > PI {
            d -= TAU;
        }
        while d <= -PI {
            d += TAU;
        }
        Ok(d)
    };
    let n = 8192usize;
    // Irrational grid offset keeps roots away from the sample points.
    let node = |k: usize| TAU * (k as f64 + 1.0 / PI) / n as f64;
    let mut degree = 0i64;
    let mut preimages = Vec::new();
    let slope_at = |t: f64| -> Result<f64> {
        let s = 1e-6;
        Ok((h(t + s)? - h(t - s)?) / (2.0 * s))
    };
    let mut count_root = |t: f64| -> Result<()> {
        let slope = slope_at(t)?;
        if slope.abs() < params.jac_tol {
            return Err(Error::NotRegularValue(format!(
                "circle preimage at t = {t:.6} has |slope| = {:.3e}",
                slope.abs()
            )));
        }
        degree += if slope > 0.0 { 1 } else { -1 };
        preimages.push(Vec3::new(t.cos(), t.sin(), 0.0));
        Ok(())
    };
    for k in 0..n {
        let (t0, t1) = (node(k), node(k + 1));
        let (h0, h1) = (h(t0)?, h(t1)?);
        if h0 == 0.0 {
            count_root(t0)?;
            continue;
        }
        // A genuine crossing stays small across the step; the branch-cut
        // jump moves by almost 2 pi.
        if h0 * h1 < 0.0 && (h1 - h0).abs() < PI {
            let (mut a, mut b, mut ha) = (t0, t1, h0);
            for _ in 0..60 {
                let m = 0.5 * (a + b);
                let hm = h(m)?;
                if ha * hm <= 0.0 {
                    b = m;
                } else {
                    a = m;
                    ha = hm;
                }
            }
            count_root(0.5 * (a + b))?;
        }
    }
    Ok((degree, preimages))
}

/// Degree by preimage counting at a randomly drawn regular value, retrying
/// with fresh values when the regularity check fails.
pub fn degree(map: &SphereMap, seed: u64, params: &ZeroFindParams) -> Result<i64> {
    match map {
        SphereMap::Circle(f) => winding_number(|t| f(t), 1e-12),
        SphereMap::Sphere(_) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut last = None;
            for _ in 0..10 {
                let y = Vec3::new(
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                );
                if y.norm() < 1e-3 {
                    continue;
                }
                match degree_preimage(map, y, params) {
                    Ok((d, _)) => return Ok(d),
                    Err(e @ Error::NotRegularValue(_)) => last = Some(e),
                    Err(e) => return Err(e),
                }
            }
            Err(last.unwrap_or(Error::NotRegularValue("no regular value found".into())))
        }
    }
}

/// Degree as the normalized pullback integral: the accumulated angle over
/// 2 pi for circle maps, (1 / 4 pi) times the pullback of the area form for
/// sphere maps. The result is checked to be within `tol` of an integer.
pub fn degree_integral(map: &SphereMap, quad: QuadratureSpec, tol: f64) -> Result<f64> {
    match map {
        SphereMap::Circle(f) => {
            let d = winding_number(|t| f(t), 1e-12)?;
            Ok(d as f64)
        }
        SphereMap::Sphere(f) => {
            let f = f.clone();
            // Parametrize the source by spherical coordinates; the integrand
            // phi . (phi_theta x phi_phi) is the pullback density, so no
            // separate area element appears.
            let h = 1e-5;
            let value = integrate_patch([0.0 + 1e-9, PI - 1e-9, 0.0, TAU], quad, move |t, p| {
                let x = |t: f64, p: f64| {
                    Vec3::new(t.sin() * p.cos(), t.sin() * p.sin(), t.cos())
                };
                let phi = normalized_value(&f, x(t, p));
                let dt = (normalized_value(&f, x(t + h, p)) - normalized_value(&f, x(t - h, p)))
                    * (0.5 / h);
                let dp = (normalized_value(&f, x(t, p + h)) - normalized_value(&f, x(t, p - h)))
                    * (0.5 / h);
                phi.dot(dt.cross(dp))
            }) / (4.0 * PI);
            if (value - value.round()).abs() > tol {
                return Err(Error::NonIntegerResult { value, tol });
            }
            Ok(value)
        }
    }
}
