//! Tangent vector fields on surfaces: evaluation, chart pushforwards, zero
//! localization and transverse perturbation.

use std::f64::consts::TAU;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::geometry::{wrap_angle, Surface, SurfaceKind, SurfacePoint};
use crate::linalg::{Mat2, Vec2, Vec3};
use crate::par;

pub type FieldFn = Arc<dyn Fn(&Surface, &SurfacePoint) -> Vec3 + Send + Sync>;

/// A tangent vector field, evaluated in ambient coordinates. Constructors
/// guarantee tangency either intrinsically or by projection.
#[derive(Clone)]
pub struct TangentField {
    pub name: String,
    eval: FieldFn,
}

impl TangentField {
    pub fn new(name: &str, eval: FieldFn) -> Self {
        TangentField { name: name.into(), eval }
    }

    /// Wraps an ambient vector field, projecting onto the tangent plane at
    /// each evaluation point.
    pub fn from_ambient<F>(name: &str, f: F) -> Self
    where
        F: Fn(Vec3) -> Vec3 + Send + Sync + 'static,
    {
        TangentField::new(
            name,
            Arc::new(move |s: &Surface, p: &SurfacePoint| s.tangent_project(p, f(p.pos))),
        )
    }

    /// Parses three ambient component expressions over x, y, z; the result is
    /// tangent-projected.
    pub fn from_exprs(name: &str, ex: &str, ey: &str, ez: &str) -> Result<Self> {
        let fx = Expr::parse(ex, &["x", "y", "z"])?;
        let fy = Expr::parse(ey, &["x", "y", "z"])?;
        let fz = Expr::parse(ez, &["x", "y", "z"])?;
        Ok(TangentField::from_ambient(name, move |p| {
            let vars = [p.x, p.y, p.z];
            Vec3::new(fx.eval(&vars), fy.eval(&vars), fz.eval(&vars))
        }))
    }

    pub fn eval(&self, s: &Surface, p: &SurfacePoint) -> Vec3 {
        (self.eval)(s, p)
    }

    /// Pointwise sum of two fields.
    pub fn sum(name: &str, a: TangentField, b: TangentField) -> TangentField {
        TangentField::new(
            name,
            Arc::new(move |s: &Surface, p: &SurfacePoint| a.eval(s, p) + b.eval(s, p)),
        )
    }
}

/// Components of the field in the chart coordinate basis, obtained by solving
/// the Gram system of the first fundamental form.
pub fn pushforward(s: &Surface, f: &TangentField, chart: usize, u: f64, v: f64) -> Result<Vec2> {
    let p = s.point(chart, u, v)?;
    let w = f.eval(s, &p);
    let c = &s.charts[chart];
    let (fu, fv) = c.partials(u, v);
    let g = c.metric(u, v);
    Ok(g.inv_apply(Vec2::new(w.dot(fu), w.dot(fv))))
}

/// Central-difference Jacobian of the pushforward in chart coordinates.
pub fn pushforward_jacobian(
    s: &Surface,
    f: &TangentField,
    chart: usize,
    u: f64,
    v: f64,
    h: f64,
) -> Result<Mat2> {
    let wu_p = pushforward(s, f, chart, u + h, v)?;
    let wu_m = pushforward(s, f, chart, u - h, v)?;
    let wv_p = pushforward(s, f, chart, u, v + h)?;
    let wv_m = pushforward(s, f, chart, u, v - h)?;
    let inv = 0.5 / h;
    Ok(Mat2::new(
        (wu_p.x - wu_m.x) * inv,
        (wv_p.x - wv_m.x) * inv,
        (wu_p.y - wu_m.y) * inv,
        (wv_p.y - wv_m.y) * inv,
    ))
}

/// A nondegenerate zero of a tangent field.
#[derive(Debug, Clone, Copy)]
pub struct Zero {
    pub point: SurfacePoint,
    /// Chart Jacobian of the pushforward at the zero.
    pub jacobian: Mat2,
    /// Local index: the sign of the Jacobian determinant. Invariant under
    /// chart changes because the Jacobian conjugates at a zero.
    pub sign: i64,
}

#[derive(Debug, Clone, Copy)]
pub struct ZeroFindParams {
    /// Newton starts per chart direction.
    pub grid: usize,
    /// Convergence threshold on the chart components of the field.
    pub zero_tol: f64,
    /// Nondegeneracy threshold on |det| of the chart Jacobian.
    pub jac_tol: f64,
    /// Ambient distance below which two roots are considered identical.
    pub separation_tol: f64,
    pub parallel: bool,
}

impl Default for ZeroFindParams {
    fn default() -> Self {
        ZeroFindParams {
            grid: 48,
            zero_tol: 1e-9,
            jac_tol: 1e-8,
            separation_tol: 1e-5,
            parallel: true,
        }
    }
}

/// Optional restriction of the zero search to an ambient region.
#[derive(Clone)]
pub struct Region {
    pub contains: Arc<dyn Fn(Vec3) -> bool + Send + Sync>,
}

impl Region {
    pub fn everything() -> Region {
        Region { contains: Arc::new(|_| true) }
    }

    pub fn ball(center: Vec3, r: f64) -> Region {
        Region { contains: Arc::new(move |p| (p - center).norm() <= r) }
    }
}

/// Locates all zeros of the field by a damped Newton iteration started from a
/// grid over every chart's scan window, deduplicated across charts by ambient
/// distance.
///
/// Fails with [`Error::DegenerateZero`] when a converged zero has a Jacobian
/// determinant below `jac_tol` in absolute value.
pub fn find_zeros(s: &Surface, f: &TangentField, params: &ZeroFindParams) -> Result<Vec<Zero>> {
    find_zeros_in(s, f, params, &Region::everything())
}

/// [`find_zeros`] restricted to an ambient region.
pub fn find_zeros_in(
    s: &Surface,
    f: &TangentField,
    params: &ZeroFindParams,
    region: &Region,
) -> Result<Vec<Zero>> {
    let unique = find_chart_roots(s, params, region, |chart, u, v| {
        pushforward(s, f, chart, u, v).ok()
    });
    let mut zeros = Vec::with_capacity(unique.len());
    for (chart, u, v, pos) in unique {
        let jac = pushforward_jacobian(s, f, chart, u, v, 1e-5)?;
        let det = jac.det();
        if det.abs() < params.jac_tol {
            return Err(Error::DegenerateZero { x: pos.x, y: pos.y, z: pos.z });
        }
        let point = SurfacePoint { chart, u, v, pos };
        zeros.push(Zero { point, jacobian: jac, sign: if det > 0.0 { 1 } else { -1 } });
    }
    // Canonical report order.
    zeros.sort_by(|a, b| {
        (a.point.pos.x, a.point.pos.y, a.point.pos.z)
            .partial_cmp(&(b.point.pos.x, b.point.pos.y, b.point.pos.z))
            .unwrap()
    });
    Ok(zeros)
}

/// Grid-seeded damped Newton over every chart's scan window for an arbitrary
/// chart-indexed 2-vector map `g`. Roots are deduplicated across charts by
/// ambient distance, preferring lower chart indices so a root covered by
/// several charts is reported once in a canonical chart.
pub fn find_chart_roots<G>(
    s: &Surface,
    params: &ZeroFindParams,
    region: &Region,
    g: G,
) -> Vec<(usize, f64, f64, Vec3)>
where
    G: Fn(usize, f64, f64) -> Option<Vec2> + Sync + Send,
{
    let mut roots: Vec<(usize, f64, f64, Vec3)> = Vec::new();
    for chart_idx in 0..s.charts.len() {
        let c = &s.charts[chart_idx];
        let [u0, u1, v0, v1] = c.zero_scan;
        let n = params.grid;
        let du = (u1 - u0) / n as f64;
        let dv = (v1 - v0) / n as f64;
        let candidates = par::map_collect(n * n, params.parallel, |idx| {
            let i = idx / n;
            let j = idx % n;
            let u = u0 + (i as f64 + 0.5) * du;
            let v = v0 + (j as f64 + 0.5) * dv;
            newton(s, &g, chart_idx, u, v, params)
        });
        for cand in candidates.into_iter().flatten() {
            roots.push(cand);
        }
    }
    roots.sort_by(|a, b| a.0.cmp(&b.0));
    let mut unique: Vec<(usize, f64, f64, Vec3)> = Vec::new();
    for r in roots {
        if !(region.contains)(r.3) {
            continue;
        }
        if unique.iter().all(|u| (u.3 - r.3).norm() > params.separation_tol) {
            unique.push(r);
        }
    }
    unique
}

/// Central-difference Jacobian of a chart-indexed 2-vector map.
fn fd_jacobian<G>(g: &G, chart: usize, u: f64, v: f64, h: f64) -> Option<Mat2>
where
    G: Fn(usize, f64, f64) -> Option<Vec2>,
{
    let wu_p = g(chart, u + h, v)?;
    let wu_m = g(chart, u - h, v)?;
    let wv_p = g(chart, u, v + h)?;
    let wv_m = g(chart, u, v - h)?;
    let inv = 0.5 / h;
    Some(Mat2::new(
        (wu_p.x - wu_m.x) * inv,
        (wv_p.x - wv_m.x) * inv,
        (wu_p.y - wu_m.y) * inv,
        (wv_p.y - wv_m.y) * inv,
    ))
}

/// Damped Newton iteration on a chart-indexed 2-vector map. Returns the root
/// in (possibly wrapped) chart coordinates plus its ambient position.
fn newton<G>(
    s: &Surface,
    g: &G,
    chart_idx: usize,
    mut u: f64,
    mut v: f64,
    params: &ZeroFindParams,
) -> Option<(usize, f64, f64, Vec3)>
where
    G: Fn(usize, f64, f64) -> Option<Vec2>,
{
    let c = &s.charts[chart_idx];
    let mut w = g(chart_idx, u, v)?;
    let accept = |u: f64, v: f64| {
        let (mut uu, mut vv) = (u, v);
        if c.periodic_u {
            uu = wrap_angle(uu);
        }
        if c.periodic_v {
            vv = wrap_angle(vv);
        }
        if !c.contains(uu, vv) {
            return None;
        }
        Some((chart_idx, uu, vv, c.embed(uu, vv)))
    };
    for _ in 0..100 {
        let jac = fd_jacobian(g, chart_idx, u, v, 1e-6)?;
        let det = jac.det();
        if det.abs() < 1e-16 {
            // Stalled on a (near-)singular Jacobian; report the point if the
            // residual already qualifies so degeneracy is diagnosed upstream.
            return if w.norm() < params.zero_tol { accept(u, v) } else { None };
        }
        // Solve J step = -w.
        let sx = (-w.x * jac.m[1][1] + w.y * jac.m[0][1]) / det;
        let sy = (w.x * jac.m[1][0] - w.y * jac.m[0][0]) / det;
        let mut t = 1.0;
        let mut advanced = false;
        for _ in 0..12 {
            let (nu, nv) = (u + t * sx, v + t * sy);
            if c.contains(nu, nv) {
                if let Some(nw) = g(chart_idx, nu, nv) {
                    if nw.norm() < w.norm() {
                        u = nu;
                        v = nv;
                        w = nw;
                        advanced = true;
                        break;
                    }
                }
            }
            t *= 0.5;
        }
        let step = Vec2::new(t * sx, t * sy).norm();
        // A small residual alone is not enough: degenerate zeros pass the
        // residual test far from the root, so also require a tiny last step.
        if w.norm() < params.zero_tol && step < 1e-11 {
            return accept(u, v);
        }
        if !advanced {
            return if w.norm() < params.zero_tol { accept(u, v) } else { None };
        }
    }
    if w.norm() < params.zero_tol {
        return accept(u, v);
    }
    None
}

/// Boundary points of a curve, sampled uniformly in theta.
pub fn boundary_samples(s: &Surface, curve: usize, n: usize) -> Vec<(f64, SurfacePoint)> {
    (0..n)
        .map(|k| {
            let theta = TAU * k as f64 / n as f64;
            let pos = s.boundary[curve].point(theta);
            let p = s.ambient_to_point(pos).expect("boundary point must be locatable");
            (theta, p)
        })
        .collect()
}

/// Minimum of |v| over uniform samples of every boundary curve.
pub fn min_boundary_norm(s: &Surface, f: &TangentField, n: usize) -> f64 {
    let mut m = f64::INFINITY;
    for curve in 0..s.boundary.len() {
        for (_, p) in boundary_samples(s, curve, n) {
            m = m.min(f.eval(s, &p).norm());
        }
    }
    m
}

/// A tangent datum defined along the boundary curves.
#[derive(Clone)]
pub struct BoundaryDatum {
    pub name: String,
    eval: Arc<dyn Fn(&Surface, usize, f64) -> Vec3 + Send + Sync>,
}

impl BoundaryDatum {
    pub fn new(name: &str, eval: Arc<dyn Fn(&Surface, usize, f64) -> Vec3 + Send + Sync>) -> Self {
        BoundaryDatum { name: name.into(), eval }
    }

    /// Trace of an interior field on the boundary.
    pub fn trace(f: &TangentField) -> Self {
        let f = f.clone();
        BoundaryDatum::new(
            &format!("trace({})", f.name),
            Arc::new(move |s: &Surface, curve: usize, theta: f64| {
                let pos = s.boundary[curve].point(theta);
                let p = s.ambient_to_point(pos).expect("boundary point");
                f.eval(s, &p)
            }),
        )
    }

    /// Parses per-curve component expressions over theta. `exprs[i]` gives
    /// (tangential, conormal) components of the datum on curve i:
    /// g = a(theta) t(theta) + b(theta) nu(theta).
    pub fn from_exprs(name: &str, exprs: &[(&str, &str)]) -> Result<Self> {
        let mut parsed = Vec::new();
        for (a, b) in exprs {
            parsed.push((Expr::parse(a, &["theta"])?, Expr::parse(b, &["theta"])?));
        }
        Ok(BoundaryDatum::new(
            name,
            Arc::new(move |s: &Surface, curve: usize, theta: f64| {
                let (a, b) = &parsed[curve.min(parsed.len() - 1)];
                let t = s.boundary[curve].unit_tangent(theta);
                let nu = s.boundary[curve].conormal(theta);
                t * a.eval(&[theta]) + nu * b.eval(&[theta])
            }),
        ))
    }

    pub fn eval(&self, s: &Surface, curve: usize, theta: f64) -> Vec3 {
        (self.eval)(s, curve, theta)
    }

    pub fn min_norm(&self, s: &Surface, n: usize) -> f64 {
        let mut m = f64::INFINITY;
        for curve in 0..s.boundary.len() {
            for k in 0..n {
                m = m.min(self.eval(s, curve, TAU * k as f64 / n as f64).norm());
            }
        }
        m
    }
}

/// Adds a random tangent polynomial perturbation of sup-norm at most `budget`
/// so that every zero of the result is nondegenerate. On surfaces with
/// boundary the perturbation is frozen near the boundary by a smooth cutoff,
/// so boundary values are untouched.
///
/// Retries with fresh coefficients (derived from `seed`) until the zero
/// finder certifies transversality; fails with [`Error::BudgetExceeded`]
/// after 25 attempts.
pub fn transverse_perturb(
    s: &Surface,
    f: &TangentField,
    budget: f64,
    seed: u64,
    params: &ZeroFindParams,
) -> Result<(TangentField, Vec<Zero>)> {
    if budget <= 0.0 {
        return Err(Error::Config("perturbation budget must be positive".into()));
    }
    let freeze_width = s.collars.iter().map(|c| c.width).fold(f64::INFINITY, f64::min);
    for attempt in 0..25u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt.wrapping_mul(0x9e3779b9)));
        let coeffs: Vec<[f64; 3]> =
            (0..10).map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
        let raw = move |p: Vec3| {
            let mono = [
                1.0,
                p.x,
                p.y,
                p.z,
                p.x * p.x,
                p.y * p.y,
                p.z * p.z,
                p.x * p.y,
                p.x * p.z,
                p.y * p.z,
            ];
            let mut v = Vec3::ZERO;
            for (c, m) in coeffs.iter().zip(mono) {
                v = v + Vec3::new(c[0], c[1], c[2]) * m;
            }
            v
        };

        // Scale so the tangent-projected, cutoff perturbation stays within
        // budget everywhere (sampled on the scan grids).
        let mut sup = 0.0f64;
        for chart_idx in 0..s.charts.len() {
            let c = &s.charts[chart_idx];
            let [u0, u1, v0, v1] = c.zero_scan;
            for i in 0..24 {
                for j in 0..24 {
                    let u = u0 + (u1 - u0) * (i as f64 + 0.5) / 24.0;
                    let v = v0 + (v1 - v0) * (j as f64 + 0.5) / 24.0;
                    let p = SurfacePoint { chart: chart_idx, u, v, pos: c.embed(u, v) };
                    sup = sup.max(s.tangent_project(&p, raw(p.pos)).norm());
                }
            }
        }
        if sup == 0.0 {
            continue;
        }
        let scale = 0.9 * budget / sup;

        let surface_kind_closed = s.is_closed();
        let delta = TangentField::new(
            "delta",
            Arc::new(move |s: &Surface, p: &SurfacePoint| {
                let cutoff = if surface_kind_closed {
                    1.0
                } else {
                    smoothstep(s.distance_to_boundary(p.pos) / freeze_width)
                };
                s.tangent_project(p, raw(p.pos)) * (scale * cutoff)
            }),
        );
        let perturbed =
            TangentField::sum(&format!("{}+delta", f.name), f.clone(), delta);
        match find_zeros(s, &perturbed, params) {
            Ok(zeros) => return Ok((perturbed, zeros)),
            Err(Error::DegenerateZero { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::BudgetExceeded { budget, retries: 25 })
}

/// Smooth cutoff: 0 at t <= 0, 1 at t >= 1, C^1 in between.
pub fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

/// Looks up a named catalog field for a surface.
///
/// Names: `vertical` (0, 1, 0), `rotation` (-y, x, 0), `hyperbolic`
/// (y, x, 0), `radial` (x, y, 0), `hedgehog` (the unit radial field,
/// bounded with a point singularity), `rotation-z` (e_z cross position, the
/// rigid-rotation field on the sphere), `angular` (unit e_phi on the torus),
/// `meridian` (unit e_theta on the torus), and `twist:<k>` which rotates
/// between the torus frame vectors k times per longitude:
/// cos(k phi) e_theta + sin(k phi) e_phi.
pub fn catalog_field(s: &Surface, name: &str) -> Result<TangentField> {
    match (s.kind, name) {
        (_, "vertical") => Ok(TangentField::from_ambient("vertical", |_| Vec3::new(0.0, 1.0, 0.0))),
        (_, "rotation") => {
            Ok(TangentField::from_ambient("rotation", |p| Vec3::new(-p.y, p.x, 0.0)))
        }
        (_, "hyperbolic") => {
            Ok(TangentField::from_ambient("hyperbolic", |p| Vec3::new(p.y, p.x, 0.0)))
        }
        (_, "radial") => Ok(TangentField::from_ambient("radial", |p| Vec3::new(p.x, p.y, 0.0))),
        (_, "hedgehog") => Ok(TangentField::from_ambient("hedgehog", |p| {
            // Unit radial field: bounded with a point singularity at the
            // origin, the standard small-mean-oscillation example.
            let r = (p.x * p.x + p.y * p.y).sqrt();
            if r < 1e-300 {
                Vec3::ZERO
            } else {
                Vec3::new(p.x / r, p.y / r, 0.0)
            }
        })),
        (SurfaceKind::Sphere, "rotation-z") => Ok(TangentField::from_ambient("rotation-z", |p| {
            Vec3::new(0.0, 0.0, 1.0).cross(p)
        })),
        (SurfaceKind::Torus, "angular") => Ok(torus_twist(0.0, 1.0, "angular")),
        (SurfaceKind::Torus, "meridian") => Ok(torus_twist(0.0, 0.0, "meridian")),
        (SurfaceKind::Torus, name) if name.starts_with("twist:") => {
            let k: f64 = name["twist:".len()..]
                .parse()
                .map_err(|_| Error::Config(format!("bad twist count in `{name}`")))?;
            Ok(torus_twist(k, 0.0, name))
        }
        (_, other) => Err(Error::Config(format!(
            "field `{other}` is not available on surface `{}`",
            s.name
        ))),
    }
}

/// cos(k phi + o pi/2) e_theta + sin(k phi + o pi/2) e_phi on the torus.
fn torus_twist(k: f64, offset_quarter: f64, name: &str) -> TangentField {
    TangentField::new(
        name,
        Arc::new(move |s: &Surface, p: &SurfacePoint| {
            let (ft, fp) = s.charts[p.chart].partials(p.u, p.v);
            let e_theta = ft.normalized();
            let e_phi = fp.normalized();
            let a = k * p.v + offset_quarter * std::f64::consts::FRAC_PI_2;
            e_theta * a.cos() + e_phi * a.sin()
        }),
    )
}
