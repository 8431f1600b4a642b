//! Nowhere-vanishing extensions of boundary data.
//!
//! Given a nonvanishing tangent datum on the boundary of a planar catalog
//! surface, a zero-free extension to the interior exists exactly when the
//! inward boundary index equals the Euler characteristic. The constructive
//! pipeline: extend through a collar by arc mollification, fill the interior
//! with a faded copy plus a generic transverse perturbation, cancel the
//! resulting zeros in pairs of opposite sign (possible because each pair is
//! enclosed by a circle of winding zero), and clamp the norm into the range
//! of the datum.

use std::f64::consts::TAU;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{smoothstep, transverse_perturb, BoundaryDatum, TangentField, Zero, ZeroFindParams};
use crate::geometry::{Surface, SurfacePoint};
use crate::index::inward_boundary_index;
use crate::linalg::{Vec2, Vec3};
use crate::vmo::mollify_datum;

const BOUNDARY_SAMPLES: usize = 2048;

/// Range of the datum norm over dense boundary samples.
pub fn datum_norm_range(s: &Surface, g: &BoundaryDatum) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for curve in 0..s.boundary.len() {
        for k in 0..BOUNDARY_SAMPLES {
            let n = g.eval(s, curve, TAU * (k as f64 + 0.29) / BOUNDARY_SAMPLES as f64).norm();
            lo = lo.min(n);
            hi = hi.max(n);
        }
    }
    (lo, hi)
}

/// Extends the datum through the collar by depth-dependent arc averaging:
/// at distance d from the boundary the value is the datum averaged over an
/// arc of radius d, so the trace at d = 0 is the datum itself. The width is
/// halved until the averaged norms stay within [c1 / 3, 3 c2].
///
/// The returned field is defined on all of the surface: it fades to zero
/// over the outer half of the working collar.
pub fn collar_extension(s: &Surface, g: &BoundaryDatum) -> Result<(TangentField, f64)> {
    if s.is_closed() || !s.is_planar() {
        return Err(Error::Config("collar extension needs a planar surface with boundary".into()));
    }
    let (c1, _c2) = datum_norm_range(s, g);
    if c1 < 1e-9 {
        return Err(Error::VanishingOnBoundary);
    }
    let max_width = s.collars.iter().map(|c| c.width).fold(f64::INFINITY, f64::min);
    let mut width = max_width;
    'widths: loop {
        if width < 1e-4 {
            return Err(Error::NormCollapse { bound: c1 / 3.0, min_norm: 0.0 });
        }
        // Check the averaged norms throughout the collar.
        let mut min_norm = f64::INFINITY;
        for curve in 0..s.boundary.len() {
            for level in 0..8 {
                let d = width * (level as f64 + 0.5) / 8.0;
                let gd = mollify_datum(g, d.max(1e-9), 65);
                for k in 0..256 {
                    let theta = TAU * (k as f64 + 0.5) / 256.0;
                    min_norm = min_norm.min(gd.eval(s, curve, theta).norm());
                }
            }
        }
        if min_norm < c1 / 3.0 {
            width *= 0.5;
            continue 'widths;
        }
        let g = g.clone();
        let w = width;
        let field = TangentField::new(
            &format!("collar({})", g.name),
            Arc::new(move |s: &Surface, p: &SurfacePoint| {
                let (curve, theta, d) = match s.boundary_signed_distance(p.pos) {
                    Some(t) => t,
                    None => return Vec3::ZERO,
                };
                if d >= w {
                    return Vec3::ZERO;
                }
                let d = d.max(0.0);
                let gd = mollify_datum(&g, d.max(1e-9), 65);
                let chi = 1.0 - smoothstep((d - w / 2.0) / (w / 2.0));
                gd.eval(s, curve, theta) * chi
            }),
        );
        return Ok((field, width));
    }
}

/// Fills the interior: adds a generic boundary-frozen transverse
/// perturbation to the faded collar field, producing a field with the right
/// trace and finitely many nondegenerate zeros.
pub fn interior_fill(
    s: &Surface,
    collar_field: &TangentField,
    budget: f64,
    seed: u64,
    params: &ZeroFindParams,
) -> Result<(TangentField, Vec<Zero>)> {
    transverse_perturb(s, collar_field, budget, seed, params)
}

/// A cancellation disk: inside it the field is replaced by the radial
/// interpolation between its boundary-circle values and their mean. The
/// interpolation is performed on an angle lift, which exists because the
/// winding of the field around the circle is zero.
struct CancelDisk {
    center: Vec2,
    radius: f64,
    /// Lifted direction angles at uniformly spaced circle parameters.
    psi: Vec<f64>,
    mag: Vec<f64>,
    psi_mean: f64,
    mag_mean: f64,
}

const CANCEL_SAMPLES: usize = 720;

impl CancelDisk {
    fn build(s: &Surface, f: &TangentField, center: Vec2, radius: f64) -> Result<CancelDisk> {
        let mut psi = Vec::with_capacity(CANCEL_SAMPLES);
        let mut mag = Vec::with_capacity(CANCEL_SAMPLES);
        let mut prev_angle = 0.0f64;
        for k in 0..CANCEL_SAMPLES {
            let t = TAU * k as f64 / CANCEL_SAMPLES as f64;
            let pos = Vec3::new(center.x + radius * t.cos(), center.y + radius * t.sin(), 0.0);
            let p = s.ambient_to_point(pos)?;
            let v = f.eval(s, &p);
            let n = (v.x * v.x + v.y * v.y).sqrt();
            if n < 1e-10 {
                return Err(Error::VanishingOnCircle { min_norm: n });
            }
            let raw = v.y.atan2(v.x);
            let lifted = if k == 0 {
                raw
            } else {
                // Continuous lift.
                let mut a = raw;
                while a - prev_angle > std::f64::consts::PI {
                    a -= TAU;
                }
                while a - prev_angle < -std::f64::consts::PI {
                    a += TAU;
                }
                a
            };
            prev_angle = lifted;
            psi.push(lifted);
            mag.push(n);
        }
        // Closure of the lift: the total turn must vanish.
        let first = psi[0];
        let last_step = {
            let raw = first;
            let mut a = raw;
            while a - prev_angle > std::f64::consts::PI {
                a -= TAU;
            }
            while a - prev_angle < -std::f64::consts::PI {
                a += TAU;
            }
            a
        };
        let winding = ((last_step - first) / TAU).round() as i64;
        if winding != 0 {
            return Err(Error::NonzeroIndex { winding });
        }
        let psi_mean = psi.iter().sum::<f64>() / psi.len() as f64;
        let mag_mean = mag.iter().sum::<f64>() / mag.len() as f64;
        Ok(CancelDisk { center, radius, psi, mag, psi_mean, mag_mean })
    }

    fn contains(&self, pos: Vec3) -> bool {
        let dx = pos.x - self.center.x;
        let dy = pos.y - self.center.y;
        dx * dx + dy * dy <= self.radius * self.radius
    }

    fn eval(&self, pos: Vec3) -> Vec3 {
        let dx = pos.x - self.center.x;
        let dy = pos.y - self.center.y;
        let r = (dx * dx + dy * dy).sqrt();
        let lambda = (r / self.radius).clamp(0.0, 1.0);
        let t = crate::geometry::wrap_angle(dy.atan2(dx));
        // Periodic linear interpolation of the lift and the magnitude.
        let ft = t / TAU * CANCEL_SAMPLES as f64;
        let k0 = (ft.floor() as usize) % CANCEL_SAMPLES;
        let k1 = (k0 + 1) % CANCEL_SAMPLES;
        let frac = ft - ft.floor();
        // The lift closes up (winding zero), so interpolating across the
        // wrap joint is continuous.
        let psi_t = self.psi[k0] * (1.0 - frac) + self.psi[k1] * frac;
        let mag_t = self.mag[k0] * (1.0 - frac) + self.mag[k1] * frac;
        let psi = lambda * psi_t + (1.0 - lambda) * self.psi_mean;
        let mag = lambda * mag_t + (1.0 - lambda) * self.mag_mean;
        Vec3::new(mag * psi.cos(), mag * psi.sin(), 0.0)
    }
}

/// Replaces the field inside disjoint disks, each containing exactly one
/// pair of opposite-sign zeros, by a zero-free interpolation. Tries all
/// pairings of positive with negative zeros until one admits valid disks.
///
/// Fails with [`Error::ClusterUnresolved`] when no pairing yields disjoint
/// interior disks free of third zeros.
pub fn cancel_zeros(s: &Surface, f: &TangentField, zeros: &[Zero]) -> Result<TangentField> {
    let pos_z: Vec<&Zero> = zeros.iter().filter(|z| z.sign > 0).collect();
    let neg_z: Vec<&Zero> = zeros.iter().filter(|z| z.sign < 0).collect();
    if pos_z.len() != neg_z.len() {
        return Err(Error::NonzeroIndex {
            winding: zeros.iter().map(|z| z.sign).sum(),
        });
    }
    if pos_z.is_empty() {
        return Ok(f.clone());
    }
    if neg_z.len() > 6 {
        // Factorial pairing search is only sensible for small zero sets.
        return Err(Error::ClusterUnresolved);
    }

    let disks_for = |perm: &[usize]| -> Option<Vec<(Vec2, f64)>> {
        let mut disks: Vec<(Vec2, f64)> = Vec::new();
        for (i, &j) in perm.iter().enumerate() {
            let a = pos_z[i].point.pos;
            let b = neg_z[j].point.pos;
            let center = Vec2::new(0.5 * (a.x + b.x), 0.5 * (a.y + b.y));
            let radius = 0.75 * (a - b).norm().max(0.02);
            // Must stay strictly inside the surface.
            let cpos = Vec3::new(center.x, center.y, 0.0);
            if s.distance_to_boundary(cpos) < radius + 0.02 {
                return None;
            }
            // Must not contain or approach any third zero.
            for z in zeros {
                let d = (z.point.pos - cpos).norm();
                let is_member = (z.point.pos - a).norm() < 1e-9 || (z.point.pos - b).norm() < 1e-9;
                if !is_member && d < radius + 0.02 {
                    return None;
                }
            }
            // Must not meet previously placed disks.
            for (c, r) in &disks {
                let d = ((center.x - c.x).powi(2) + (center.y - c.y).powi(2)).sqrt();
                if d < radius + r + 0.01 {
                    return None;
                }
            }
            disks.push((center, radius));
        }
        Some(disks)
    };

    // Iterate over permutations of the negative zeros (Heap's algorithm).
    let n = neg_z.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut stack = vec![0usize; n];
    let mut candidates: Vec<Vec<(Vec2, f64)>> = Vec::new();
    if let Some(d) = disks_for(&perm) {
        candidates.push(d);
    }
    let mut i = 0;
    while i < n {
        if stack[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(stack[i], i);
            }
            if let Some(d) = disks_for(&perm) {
                candidates.push(d);
            }
            stack[i] += 1;
            i = 0;
        } else {
            stack[i] = 0;
            i += 1;
        }
    }

    for disks in candidates {
        let mut built = Vec::new();
        let mut ok = true;
        for (center, radius) in &disks {
            match CancelDisk::build(s, f, *center, *radius) {
                Ok(d) => built.push(d),
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let base = f.clone();
        let built = Arc::new(built);
        return Ok(TangentField::new(
            &format!("cancelled({})", f.name),
            Arc::new(move |s: &Surface, p: &SurfacePoint| {
                for d in built.iter() {
                    if d.contains(p.pos) {
                        return d.eval(p.pos);
                    }
                }
                base.eval(s, p)
            }),
        ));
    }
    Err(Error::ClusterUnresolved)
}

/// Rescales the field pointwise so its norm lies in [c1, c2]; the direction
/// is untouched. The field must be zero-free (checked on dense samples).
pub fn clamp_norm(s: &Surface, f: &TangentField, c1: f64, c2: f64) -> Result<TangentField> {
    let mn = interior_min_norm(s, f, 200);
    if mn < 1e-6 * c1 {
        return Err(Error::ZeroNorm { min_norm: mn });
    }
    let f = f.clone();
    Ok(TangentField::new(
        &format!("clamped({})", f.name),
        Arc::new(move |s: &Surface, p: &SurfacePoint| {
            let v = f.eval(s, p);
            let n = v.norm();
            if n == 0.0 {
                return v;
            }
            v * (n.clamp(c1, c2) / n)
        }),
    ))
}

/// Minimum field norm over a dense grid of interior sample points.
pub fn interior_min_norm(s: &Surface, f: &TangentField, n: usize) -> f64 {
    let mut mn = f64::INFINITY;
    for chart_idx in 0..s.charts.len() {
        let c = &s.charts[chart_idx];
        let [u0, u1, v0, v1] = c.zero_scan;
        for i in 0..n {
            for j in 0..n {
                let u = u0 + (u1 - u0) * (i as f64 + 0.5) / n as f64;
                let v = v0 + (v1 - v0) * (j as f64 + 0.5) / n as f64;
                let p = SurfacePoint { chart: chart_idx, u, v, pos: c.embed(u, v) };
                if s.distance_to_boundary(p.pos) < -1e-9 {
                    continue;
                }
                mn = mn.min(f.eval(s, &p).norm());
            }
        }
    }
    mn
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtensionReport {
    pub surface: String,
    pub datum: String,
    pub chi: i64,
    pub ind_minus: i64,
    pub collar_width: f64,
    pub zeros_cancelled: usize,
    pub attempts: usize,
    pub c1: f64,
    pub c2: f64,
    pub min_norm: f64,
    pub max_norm: f64,
    pub boundary_mismatch: f64,
}

/// Builds a nowhere-vanishing extension of the boundary datum, or proves
/// that none exists.
///
/// Fails with [`Error::TopologicalObstruction`] when the inward boundary
/// index differs from the Euler characteristic, with
/// [`Error::VanishingOnBoundary`] for degenerate data, and with
/// [`Error::ClusterUnresolved`] when the zero-cancellation step cannot be
/// completed within the retry budget.
pub fn extend_boundary_datum(
    s: &Surface,
    g: &BoundaryDatum,
    params: &ZeroFindParams,
    seed: u64,
) -> Result<(TangentField, ExtensionReport)> {
    let (c1, c2) = datum_norm_range(s, g);
    if c1 < 1e-9 {
        return Err(Error::VanishingOnBoundary);
    }
    let chi = s.euler_characteristic();
    let ind_minus = inward_boundary_index(s, g)?;
    if ind_minus != chi {
        return Err(Error::TopologicalObstruction { ind_minus, chi });
    }
    let (collar_field, width) = collar_extension(s, g)?;

    let mut last_err = Error::ClusterUnresolved;
    for attempt in 0..10u64 {
        let (filled, zeros) =
            interior_fill(s, &collar_field, 0.15 * c1, seed.wrapping_add(attempt * 101), params)?;
        let clean = match cancel_zeros(s, &filled, &zeros) {
            Ok(c) => c,
            Err(e) => {
                last_err = e;
                continue;
            }
        };
        let mn = interior_min_norm(s, &clean, 200);
        if mn < 1e-4 * c1 {
            last_err = Error::ZeroNorm { min_norm: mn };
            continue;
        }
        let clamped = clamp_norm(s, &clean, c1, c2)?;

        // Verify the trace.
        let mut mismatch = 0.0f64;
        for curve in 0..s.boundary.len() {
            for k in 0..512 {
                let theta = TAU * (k as f64 + 0.13) / 512.0;
                let pos = s.boundary[curve].point(theta);
                let p = s.ambient_to_point(pos).expect("boundary point");
                mismatch = mismatch.max((clamped.eval(s, &p) - g.eval(s, curve, theta)).norm());
            }
        }
        let (out_min, out_max) = extension_norm_range(s, &clamped, 200);
        let report = ExtensionReport {
            surface: s.name.clone(),
            datum: g.name.clone(),
            chi,
            ind_minus,
            collar_width: width,
            zeros_cancelled: zeros.len(),
            attempts: attempt as usize + 1,
            c1,
            c2,
            min_norm: out_min,
            max_norm: out_max,
            boundary_mismatch: mismatch,
        };
        return Ok((clamped, report));
    }
    Err(last_err)
}

fn extension_norm_range(s: &Surface, f: &TangentField, n: usize) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for chart_idx in 0..s.charts.len() {
        let c = &s.charts[chart_idx];
        let [u0, u1, v0, v1] = c.zero_scan;
        for i in 0..n {
            for j in 0..n {
                let u = u0 + (u1 - u0) * (i as f64 + 0.5) / n as f64;
                let v = v0 + (v1 - v0) * (j as f64 + 0.5) / n as f64;
                let p = SurfacePoint { chart: chart_idx, u, v, pos: c.embed(u, v) };
                let nn = f.eval(s, &p).norm();
                lo = lo.min(nn);
                hi = hi.max(nn);
            }
        }
    }
    (lo, hi)
}

// ---------------------------------------------------------------------------
// Half-plane averaging extension of periodic scalar data.
// ---------------------------------------------------------------------------

/// The averaging extension of a periodic function to the upper half plane:
/// v(y, t) is the mean of g over [y - t, y + t]. For g = sin this is
/// sin(y) sin(t) / t.
pub fn gagliardo_extension(
    g: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    m: usize,
) -> impl Fn(f64, f64) -> f64 {
    move |y: f64, t: f64| {
        if t <= 0.0 {
            return g(y);
        }
        let mut acc = 0.0;
        for k in 0..m {
            acc += g(y - t + 2.0 * t * (k as f64 + 0.5) / m as f64);
        }
        acc / m as f64
    }
}

/// p-energy of the gradient of the averaging extension over the strip
/// [0, 2 pi] x [t0, t1], by midpoint quadrature and finite differences.
pub fn gagliardo_strip_energy(
    g: &Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    p: f64,
    t0: f64,
    t1: f64,
    ny: usize,
    nt: usize,
) -> f64 {
    let v = gagliardo_extension(g.clone(), 257);
    let mut acc = 0.0;
    let dy = TAU / ny as f64;
    let dt = (t1 - t0) / nt as f64;
    for i in 0..ny {
        let y = (i as f64 + 0.5) * dy;
        for j in 0..nt {
            let t = t0 + (j as f64 + 0.5) * dt;
            let h = (0.25 * t).min(1e-3);
            let vy = (v(y + h, t) - v(y - h, t)) / (2.0 * h);
            let vt = (v(y, t + h) - v(y, t - h)) / (2.0 * h);
            acc += (vy * vy + vt * vt).powf(p / 2.0) * dy * dt;
        }
    }
    acc
}

/// Dyadic-strip energies of the averaging extension: strip k covers
/// t in [2^-(k+1), 2^-k]. The total energy is finite exactly when the series
/// is summable; a non-decaying tail proves the datum lies outside the trace
/// space.
///
/// Fails with [`Error::NonIntegrableDatum`] when the last strip energies do
/// not decay geometrically.
pub fn gagliardo_divergence_check(
    g: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    p: f64,
    levels: usize,
) -> Result<Vec<f64>> {
    let mut energies = Vec::with_capacity(levels);
    for k in 0..levels {
        let t1 = 0.5f64.powi(k as i32);
        let t0 = 0.5 * t1;
        // The extension varies over a y-scale comparable to t, so the grid
        // must refine with the strip depth to resolve transition layers.
        let ny = ((8.0 * TAU / t0).ceil() as usize).clamp(256, 20000);
        energies.push(gagliardo_strip_energy(&g, p, t0, t1, ny, 8));
    }
    let tail = &energies[energies.len().saturating_sub(3)..];
    let decaying = tail.windows(2).all(|w| w[1] < 0.85 * w[0]);
    if decaying {
        Ok(energies)
    } else {
        Err(Error::NonIntegrableDatum { values: energies })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::catalog_field;
    use crate::fields::find_zeros;

    #[test]
    fn collar_extension_traces_and_bounds() {
        let d = Surface::disk();
        let f = catalog_field(&d, "vertical").unwrap();
        let g = BoundaryDatum::trace(&f);
        let (cf, width) = collar_extension(&d, &g).unwrap();
        assert!(width > 0.01);
        // On the boundary the collar field equals the datum.
        for k in 0..32 {
            let theta = TAU * k as f64 / 32.0;
            let p = d.ambient_to_point(d.boundary[0].point(theta)).unwrap();
            let diff = (cf.eval(&d, &p) - g.eval(&d, 0, theta)).norm();
            assert!(diff < 1e-6, "theta {theta}: diff {diff:.2e}");
        }
        // Deep inside it fades to zero.
        let p = d.point(0, 0.0, 0.0).unwrap();
        assert!(cf.eval(&d, &p).norm() < 1e-12);
    }

    #[test]
    fn obstructed_datum_is_rejected() {
        // The tangential (rotation) datum has inward index 0 != chi(disk).
        let d = Surface::disk();
        let f = catalog_field(&d, "rotation").unwrap();
        let g = BoundaryDatum::trace(&f);
        match extend_boundary_datum(&d, &g, &ZeroFindParams::default(), 1) {
            Err(Error::TopologicalObstruction { ind_minus, chi }) => {
                assert_eq!((ind_minus, chi), (0, 1));
            }
            other => panic!("expected obstruction, got {:?}", other.map(|(_, r)| r)),
        }
    }

    #[test]
    fn vertical_datum_on_disk_extends_without_zeros() {
        let d = Surface::disk();
        let f = catalog_field(&d, "vertical").unwrap();
        let g = BoundaryDatum::trace(&f);
        let params = ZeroFindParams { grid: 32, ..Default::default() };
        let (v, report) = extend_boundary_datum(&d, &g, &params, 7).unwrap();
        assert_eq!(report.morse_obstruction(), 0);
        assert!(report.boundary_mismatch < 1e-6, "mismatch {}", report.boundary_mismatch);
        assert!(report.min_norm >= report.c1 - 1e-9);
        assert!(report.max_norm <= report.c2 + 1e-9);
        // Independent verification: the zero finder finds nothing.
        let zeros = find_zeros(&d, &v, &params).unwrap();
        assert!(zeros.is_empty(), "{zeros:?}");
    }

    #[test]
    fn vertical_datum_on_annulus_extends() {
        let a = Surface::annulus();
        let f = catalog_field(&a, "vertical").unwrap();
        let g = BoundaryDatum::trace(&f);
        let params = ZeroFindParams { grid: 32, ..Default::default() };
        let (v, report) = extend_boundary_datum(&a, &g, &params, 11).unwrap();
        assert!(report.boundary_mismatch < 1e-6);
        let zeros = find_zeros(&a, &v, &params).unwrap();
        assert!(zeros.is_empty());
    }

    #[test]
    fn cancel_zeros_removes_an_opposite_pair() {
        let d = Surface::disk();
        let f = TangentField::from_ambient("pair", |p| {
            Vec3::new(p.x * p.x - 0.09, p.y, 0.0)
        });
        let params = ZeroFindParams::default();
        let zeros = find_zeros(&d, &f, &params).unwrap();
        assert_eq!(zeros.len(), 2);
        let clean = cancel_zeros(&d, &f, &zeros).unwrap();
        let remaining = find_zeros(&d, &clean, &params).unwrap();
        assert!(remaining.is_empty(), "{remaining:?}");
        // Outside the cancellation disk the field is untouched.
        let p = d.ambient_to_point(Vec3::new(0.0, 0.8, 0.0)).unwrap();
        assert!((clean.eval(&d, &p) - f.eval(&d, &p)).norm() < 1e-12);
    }

    #[test]
    fn cancel_zeros_rejects_unbalanced_sets() {
        let d = Surface::disk();
        let f = catalog_field(&d, "rotation").unwrap();
        let zeros = find_zeros(&d, &f, &ZeroFindParams::default()).unwrap();
        assert!(matches!(
            cancel_zeros(&d, &f, &zeros),
            Err(Error::NonzeroIndex { winding: 1 })
        ));
    }

    #[test]
    fn gagliardo_extension_matches_closed_form() {
        let g: Arc<dyn Fn(f64) -> f64 + Send + Sync> = Arc::new(|y: f64| y.sin());
        let v = gagliardo_extension(g, 2001);
        for (y, t) in [(0.3f64, 0.5f64), (1.2, 0.01), (4.0, 1.5)] {
            let expect = y.sin() * t.sin() / t;
            assert!((v(y, t) - expect).abs() < 1e-6, "({y}, {t})");
        }
    }

    #[test]
    fn smooth_datum_has_summable_energy_and_jump_does_not() {
        let smooth: Arc<dyn Fn(f64) -> f64 + Send + Sync> = Arc::new(|y: f64| y.sin());
        let energies = gagliardo_divergence_check(smooth, 2.0, 8).unwrap();
        assert!(energies.last().unwrap() < &energies[0]);

        // A square wave is not in the p = 2 trace space; the strip energies
        // stay of constant order.
        let jump: Arc<dyn Fn(f64) -> f64 + Send + Sync> =
            Arc::new(|y: f64| if y.sin() >= 0.0 { 1.0 } else { -1.0 });
        assert!(matches!(
            gagliardo_divergence_check(jump, 2.0, 8),
            Err(Error::NonIntegrableDatum { .. })
        ));
    }
}

impl ExtensionReport {
    /// ind_minus - chi: zero exactly when an extension can exist.
    pub fn morse_obstruction(&self) -> i64 {
        self.ind_minus - self.chi
    }
}
