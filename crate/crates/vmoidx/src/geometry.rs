//! Parametric surfaces: charts, metric data, boundary curves, collars and
//! quadrature.
//!
//! The catalog covers the unit disk, an annulus (radii 1/2 and 1), the round
//! sphere and the axisymmetric torus with radii R = 2, r = 1. Custom closed
//! surfaces can be loaded from a declarative config with chart expressions.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::linalg::{Sym2, Vec2, Vec3};
use crate::par;

pub const ANNULUS_INNER: f64 = 0.5;
pub const TORUS_MAJOR: f64 = 2.0;
pub const TORUS_MINOR: f64 = 1.0;

/// Wraps an angle into [0, 2*pi).
pub fn wrap_angle(t: f64) -> f64 {
    let mut t = t % TAU;
    if t < 0.0 {
        t += TAU;
    }
    t
}

type EmbedFn = Arc<dyn Fn(f64, f64) -> Vec3 + Send + Sync>;
type PartialsFn = Arc<dyn Fn(f64, f64) -> (Vec3, Vec3) + Send + Sync>;
type CurveFn = Arc<dyn Fn(f64) -> Vec3 + Send + Sync>;
type ScalarFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// One coordinate chart of a surface.
#[derive(Clone)]
pub struct Chart {
    /// Parameter rectangle [u0, u1] x [v0, v1] on which `embed` is defined.
    pub domain: [f64; 4],
    /// Subrectangle scanned during zero localization. Charts overlap; the
    /// scan windows are chosen so that together they cover the surface while
    /// keeping Newton iterates well inside each domain.
    pub zero_scan: [f64; 4],
    pub orientation_sign: f64,
    pub periodic_u: bool,
    pub periodic_v: bool,
    embed: EmbedFn,
    partials: Option<PartialsFn>,
}

impl Chart {
    pub fn new(domain: [f64; 4], embed: EmbedFn) -> Self {
        Chart {
            domain,
            zero_scan: domain,
            orientation_sign: 1.0,
            periodic_u: false,
            periodic_v: false,
            embed,
            partials: None,
        }
    }

    pub fn with_partials(mut self, partials: PartialsFn) -> Self {
        self.partials = Some(partials);
        self
    }

    pub fn embed(&self, u: f64, v: f64) -> Vec3 {
        (self.embed)(u, v)
    }

    pub fn contains(&self, u: f64, v: f64) -> bool {
        let [u0, u1, v0, v1] = self.domain;
        (self.periodic_u || (u >= u0 && u <= u1)) && (self.periodic_v || (v >= v0 && v <= v1))
    }

    /// First partial derivatives of the embedding, analytic when available.
    pub fn partials(&self, u: f64, v: f64) -> (Vec3, Vec3) {
        if let Some(p) = &self.partials {
            return p(u, v);
        }
        let h = 1e-6;
        let fu = (self.embed(u + h, v) - self.embed(u - h, v)) * (0.5 / h);
        let fv = (self.embed(u, v + h) - self.embed(u, v - h)) * (0.5 / h);
        (fu, fv)
    }

    /// First fundamental form at (u, v).
    pub fn metric(&self, u: f64, v: f64) -> Sym2 {
        let (fu, fv) = self.partials(u, v);
        Sym2 { a: fu.dot(fu), b: fu.dot(fv), c: fv.dot(fv) }
    }

    /// Unit normal consistent with the surface orientation.
    pub fn normal(&self, u: f64, v: f64) -> Vec3 {
        let (fu, fv) = self.partials(u, v);
        fu.cross(fv).normalized() * self.orientation_sign
    }
}

/// A closed boundary curve, parametrized by theta in [0, 2*pi) at constant
/// speed, oriented so that the unit tangent equals gamma x nu.
#[derive(Clone)]
pub struct BoundaryCurve {
    point: CurveFn,
    conormal: CurveFn,
    tangent: CurveFn,
    pub length: f64,
}

impl BoundaryCurve {
    pub fn new(point: CurveFn, conormal: CurveFn, tangent: CurveFn, length: f64) -> Self {
        BoundaryCurve { point, conormal, tangent, length }
    }

    pub fn point(&self, theta: f64) -> Vec3 {
        (self.point)(theta)
    }

    /// Outward unit conormal nu: tangent to the surface, orthogonal to the
    /// boundary, pointing out of the surface.
    pub fn conormal(&self, theta: f64) -> Vec3 {
        (self.conormal)(theta)
    }

    pub fn unit_tangent(&self, theta: f64) -> Vec3 {
        (self.tangent)(theta)
    }

    /// Arclength per unit of theta.
    pub fn speed(&self) -> f64 {
        self.length / TAU
    }
}

/// Boundary collar phi(theta, s) with dist(phi(theta, s), boundary) = s for
/// s in [0, width]; s < 0 continues across the boundary to the reflected
/// side, the local model of the double.
#[derive(Clone)]
pub struct CollarMap {
    pub curve: usize,
    pub width: f64,
    map: Arc<dyn Fn(f64, f64) -> Vec3 + Send + Sync>,
}

impl CollarMap {
    pub fn point(&self, theta: f64, s: f64) -> Vec3 {
        (self.map)(theta, s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurfaceKind {
    Disk,
    Annulus,
    Sphere,
    Torus,
    Custom,
}

/// A point on a surface: chart coordinates plus the ambient position.
#[derive(Debug, Clone, Copy)]
pub struct SurfacePoint {
    pub chart: usize,
    pub u: f64,
    pub v: f64,
    pub pos: Vec3,
}

/// Non-overlapping integration patch used for surface integrals on closed
/// surfaces.
#[derive(Clone)]
struct QuadPatch {
    domain: [f64; 4],
    area_element: ScalarFn,
    gauss_curvature: ScalarFn,
}

#[derive(Debug, Clone, Copy)]
pub struct QuadratureSpec {
    /// Nodes per direction of the tensor-product midpoint rule.
    pub n: usize,
    pub parallel: bool,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { n: 256, parallel: true }
    }
}

impl QuadratureSpec {
    pub fn new(n: usize) -> Self {
        QuadratureSpec { n, parallel: true }
    }

    pub fn sequential(n: usize) -> Self {
        QuadratureSpec { n, parallel: false }
    }
}

#[derive(Clone)]
pub struct Surface {
    pub name: String,
    pub kind: SurfaceKind,
    pub charts: Vec<Chart>,
    pub boundary: Vec<BoundaryCurve>,
    pub collars: Vec<CollarMap>,
    pub genus: i64,
    pub orientation: f64,
    /// Injectivity-radius proxy; averaging radii must stay below this.
    pub r0: f64,
    /// Radius used by the disk and sphere catalog entries.
    pub radius: f64,
    quad_patches: Vec<QuadPatch>,
}

impl Surface {
    pub fn euler_characteristic(&self) -> i64 {
        2 - 2 * self.genus - self.boundary.len() as i64
    }

    pub fn is_closed(&self) -> bool {
        self.boundary.is_empty()
    }

    /// True for the flat catalog surfaces that live in the z = 0 plane.
    pub fn is_planar(&self) -> bool {
        matches!(self.kind, SurfaceKind::Disk | SurfaceKind::Annulus)
    }

    pub fn point(&self, chart: usize, u: f64, v: f64) -> Result<SurfacePoint> {
        let c = &self.charts[chart];
        if !c.contains(u, v) {
            return Err(Error::OutOfChart { chart, u, v });
        }
        Ok(SurfacePoint { chart, u, v, pos: c.embed(u, v) })
    }

    pub fn normal_at(&self, p: &SurfacePoint) -> Vec3 {
        self.charts[p.chart].normal(p.u, p.v)
    }

    /// Orthogonal projection of an ambient vector onto the tangent plane.
    pub fn tangent_project(&self, p: &SurfacePoint, w: Vec3) -> Vec3 {
        let n = self.normal_at(p);
        w - n * w.dot(n)
    }

    /// Locates the chart coordinates of an ambient point assumed to lie on
    /// the surface (catalog kinds only).
    pub fn ambient_to_point(&self, pos: Vec3) -> Result<SurfacePoint> {
        match self.kind {
            SurfaceKind::Disk => {
                let rho = (pos.x * pos.x + pos.y * pos.y).sqrt();
                if rho <= 0.68 {
                    Ok(SurfacePoint { chart: 0, u: pos.x, v: pos.y, pos: Vec3::new(pos.x, pos.y, 0.0) })
                } else {
                    let theta = wrap_angle(pos.y.atan2(pos.x));
                    Ok(SurfacePoint {
                        chart: 1,
                        u: rho,
                        v: theta,
                        pos: Vec3::new(rho * theta.cos(), rho * theta.sin(), 0.0),
                    })
                }
            }
            SurfaceKind::Annulus => {
                let rho = (pos.x * pos.x + pos.y * pos.y).sqrt();
                let theta = wrap_angle(pos.y.atan2(pos.x));
                Ok(SurfacePoint {
                    chart: 0,
                    u: rho,
                    v: theta,
                    pos: Vec3::new(rho * theta.cos(), rho * theta.sin(), 0.0),
                })
            }
            SurfaceKind::Sphere => {
                let p = pos.normalized() * self.radius;
                let q = p * (1.0 / self.radius);
                if q.z >= 0.0 {
                    let u = q.x / (1.0 + q.z);
                    let v = q.y / (1.0 + q.z);
                    Ok(SurfacePoint { chart: 0, u, v, pos: p })
                } else {
                    let u = q.x / (1.0 - q.z);
                    let v = -q.y / (1.0 - q.z);
                    Ok(SurfacePoint { chart: 1, u, v, pos: p })
                }
            }
            SurfaceKind::Torus => {
                let phi = wrap_angle(pos.y.atan2(pos.x));
                let rho_xy = (pos.x * pos.x + pos.y * pos.y).sqrt();
                let theta = wrap_angle(pos.z.atan2(rho_xy - TORUS_MAJOR));
                let p = self.charts[0].embed(theta, phi);
                Ok(SurfacePoint { chart: 0, u: theta, v: phi, pos: p })
            }
            SurfaceKind::Custom => Err(Error::Config(
                "ambient point lookup is not supported for custom surfaces".into(),
            )),
        }
    }

    /// Signed distance to the boundary for the planar catalog surfaces:
    /// positive inside the surface, negative on the reflected side.
    pub fn boundary_signed_distance(&self, pos: Vec3) -> Option<(usize, f64, f64)> {
        let rho = (pos.x * pos.x + pos.y * pos.y).sqrt();
        match self.kind {
            SurfaceKind::Disk => {
                let theta = wrap_angle(pos.y.atan2(pos.x));
                Some((0, theta, 1.0 - rho))
            }
            SurfaceKind::Annulus => {
                let alpha = pos.y.atan2(pos.x);
                let d_out = 1.0 - rho;
                let d_in = rho - ANNULUS_INNER;
                if d_out <= d_in {
                    Some((0, wrap_angle(alpha), d_out))
                } else {
                    Some((1, wrap_angle(-alpha), d_in))
                }
            }
            _ => None,
        }
    }

    /// Distance from an interior point to the boundary (infinite for closed
    /// surfaces).
    pub fn distance_to_boundary(&self, pos: Vec3) -> f64 {
        match self.boundary_signed_distance(pos) {
            Some((_, _, s)) => s,
            None => f64::INFINITY,
        }
    }

    /// (1 / 2 pi) times the integral of the Gaussian curvature; equals the
    /// Euler characteristic for closed surfaces.
    pub fn gauss_bonnet_chi(&self, quad: QuadratureSpec) -> Result<f64> {
        if !self.is_closed() {
            return Err(Error::BoundaryPresent);
        }
        let mut total = 0.0;
        for patch in &self.quad_patches {
            let area = patch.area_element.clone();
            let kappa = patch.gauss_curvature.clone();
            total += integrate_patch(patch.domain, quad, move |u, v| kappa(u, v) * area(u, v));
        }
        Ok(total / TAU)
    }

    /// Total surface area by the same quadrature.
    pub fn area(&self, quad: QuadratureSpec) -> Result<f64> {
        if self.quad_patches.is_empty() {
            return Err(Error::BoundaryPresent);
        }
        let mut total = 0.0;
        for patch in &self.quad_patches {
            let area = patch.area_element.clone();
            total += integrate_patch(patch.domain, quad, move |u, v| area(u, v));
        }
        Ok(total)
    }

    /// Quadrature nodes covering the geodesic ball B_eps(x), approximated by
    /// the chart preimage of the metric ellipse of the first fundamental
    /// form, with metric-corrected weights. Weights sum to the ball measure
    /// up to O(eps^3).
    pub fn metric_ball_sample(
        &self,
        x: &SurfacePoint,
        eps: f64,
        n: usize,
    ) -> Result<Vec<(SurfacePoint, f64)>> {
        if eps > self.r0 {
            return Err(Error::EpsTooLarge { eps, limit: self.r0, context: "eps exceeds r0" });
        }
        if !self.is_closed() {
            let d = self.distance_to_boundary(x.pos);
            if d < 2.0 * eps {
                return Err(Error::EpsTooLarge {
                    eps,
                    limit: d / 2.0,
                    context: "interior averaging requires dist(x, boundary) >= 2 eps",
                });
            }
        }
        let chart = &self.charts[x.chart];
        let g0 = chart.metric(x.u, x.v);
        let m = g0.inv_sqrt();
        let sdet0 = g0.det().sqrt();
        let n_r = ((n as f64 / 2.0).sqrt().ceil() as usize).max(2);
        let n_a = 2 * n_r;
        let drho = 1.0 / n_r as f64;
        let dalpha = TAU / n_a as f64;
        let mut out = Vec::with_capacity(n_r * n_a);
        for i in 0..n_r {
            let rho = (i as f64 + 0.5) * drho;
            for j in 0..n_a {
                let alpha = (j as f64 + 0.5) * dalpha;
                let e = Vec2::new(rho * alpha.cos(), rho * alpha.sin());
                let xi = Vec2::new(
                    x.u + eps * (m[0][0] * e.x + m[0][1] * e.y),
                    x.v + eps * (m[1][0] * e.x + m[1][1] * e.y),
                );
                if !chart.contains(xi.x, xi.y) {
                    return Err(Error::EpsTooLarge {
                        eps,
                        limit: self.r0,
                        context: "metric ellipse leaves the chart domain",
                    });
                }
                let w = chart.metric(xi.x, xi.y).det().sqrt() / sdet0
                    * eps
                    * eps
                    * rho
                    * drho
                    * dalpha;
                let pos = chart.embed(xi.x, xi.y);
                out.push((SurfacePoint { chart: x.chart, u: xi.x, v: xi.y, pos }, w));
            }
        }
        Ok(out)
    }

    // ----- catalog -----

    pub fn disk() -> Surface {
        let embed_cart: EmbedFn = Arc::new(|u, v| Vec3::new(u, v, 0.0));
        let partials_cart: PartialsFn =
            Arc::new(|_, _| (Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0)));
        let cart = Chart::new([-0.7, 0.7, -0.7, 0.7], embed_cart).with_partials(partials_cart);

        let embed_polar: EmbedFn =
            Arc::new(|rho, th| Vec3::new(rho * th.cos(), rho * th.sin(), 0.0));
        let partials_polar: PartialsFn = Arc::new(|rho: f64, th: f64| {
            (
                Vec3::new(th.cos(), th.sin(), 0.0),
                Vec3::new(-rho * th.sin(), rho * th.cos(), 0.0),
            )
        });
        let mut polar =
            Chart::new([0.35, 1.0, -1.0, TAU + 1.0], embed_polar).with_partials(partials_polar);
        polar.zero_scan = [0.45, 1.0, 0.0, TAU];
        polar.periodic_v = true;

        let curve = circle_boundary(1.0, false);
        let collar = CollarMap {
            curve: 0,
            width: 0.5,
            map: Arc::new(|theta: f64, s: f64| {
                Vec3::new((1.0 - s) * theta.cos(), (1.0 - s) * theta.sin(), 0.0)
            }),
        };

        Surface {
            name: "disk".into(),
            kind: SurfaceKind::Disk,
            charts: vec![cart, polar],
            boundary: vec![curve],
            collars: vec![collar],
            genus: 0,
            orientation: 1.0,
            r0: 0.5,
            radius: 1.0,
            quad_patches: vec![],
        }
    }

    pub fn annulus() -> Surface {
        let embed_polar: EmbedFn =
            Arc::new(|rho, th| Vec3::new(rho * th.cos(), rho * th.sin(), 0.0));
        let partials_polar: PartialsFn = Arc::new(|rho: f64, th: f64| {
            (
                Vec3::new(th.cos(), th.sin(), 0.0),
                Vec3::new(-rho * th.sin(), rho * th.cos(), 0.0),
            )
        });
        let mut polar = Chart::new([ANNULUS_INNER, 1.0, -1.0, TAU + 1.0], embed_polar)
            .with_partials(partials_polar);
        polar.zero_scan = [ANNULUS_INNER, 1.0, 0.0, TAU];
        polar.periodic_v = true;

        let outer = circle_boundary(1.0, false);
        let inner = circle_boundary(ANNULUS_INNER, true);
        let collar_outer = CollarMap {
            curve: 0,
            width: 0.2,
            map: Arc::new(|theta: f64, s: f64| {
                Vec3::new((1.0 - s) * theta.cos(), (1.0 - s) * theta.sin(), 0.0)
            }),
        };
        let collar_inner = CollarMap {
            curve: 1,
            width: 0.2,
            map: Arc::new(|theta: f64, s: f64| {
                let r = ANNULUS_INNER + s;
                Vec3::new(r * theta.cos(), -r * theta.sin(), 0.0)
            }),
        };

        Surface {
            name: "annulus".into(),
            kind: SurfaceKind::Annulus,
            charts: vec![polar],
            boundary: vec![outer, inner],
            collars: vec![collar_outer, collar_inner],
            genus: 0,
            orientation: 1.0,
            r0: 0.2,
            radius: 1.0,
            quad_patches: vec![],
        }
    }

    pub fn sphere() -> Surface {
        Surface::sphere_with_radius(1.0)
    }

    pub fn sphere_with_radius(a: f64) -> Surface {
        // Two stereographic charts, both oriented with the outward normal.
        let north_embed: EmbedFn = Arc::new(move |u, v| {
            let w = 1.0 + u * u + v * v;
            Vec3::new(2.0 * u / w, 2.0 * v / w, (1.0 - u * u - v * v) / w) * a
        });
        let north_partials: PartialsFn = Arc::new(move |u: f64, v: f64| {
            let w = 1.0 + u * u + v * v;
            let w2 = w * w;
            (
                Vec3::new(2.0 * (w - 2.0 * u * u), -4.0 * u * v, -4.0 * u) * (a / w2),
                Vec3::new(-4.0 * u * v, 2.0 * (w - 2.0 * v * v), -4.0 * v) * (a / w2),
            )
        });
        // The chart domain is much larger than the scan window so metric
        // ellipses around any scanned point stay inside a single chart even
        // at the largest averaging radius.
        let mut north = Chart::new([-3.0, 3.0, -3.0, 3.0], north_embed).with_partials(north_partials);
        north.zero_scan = [-1.05, 1.05, -1.05, 1.05];

        let south_embed: EmbedFn = Arc::new(move |u, v| {
            let w = 1.0 + u * u + v * v;
            Vec3::new(2.0 * u / w, -2.0 * v / w, (u * u + v * v - 1.0) / w) * a
        });
        let south_partials: PartialsFn = Arc::new(move |u: f64, v: f64| {
            let w = 1.0 + u * u + v * v;
            let w2 = w * w;
            (
                Vec3::new(2.0 * (w - 2.0 * u * u), 4.0 * u * v, 4.0 * u) * (a / w2),
                Vec3::new(-4.0 * u * v, -2.0 * (w - 2.0 * v * v), 4.0 * v) * (a / w2),
            )
        });
        let mut south = Chart::new([-3.0, 3.0, -3.0, 3.0], south_embed).with_partials(south_partials);
        south.zero_scan = [-1.05, 1.05, -1.05, 1.05];

        let patch = QuadPatch {
            domain: [0.0, PI, 0.0, TAU],
            area_element: Arc::new(move |t, _| a * a * t.sin()),
            gauss_curvature: Arc::new(move |_, _| 1.0 / (a * a)),
        };

        Surface {
            name: if a == 1.0 { "sphere".into() } else { format!("sphere-r{a}") },
            kind: SurfaceKind::Sphere,
            charts: vec![north, south],
            boundary: vec![],
            collars: vec![],
            genus: 0,
            orientation: 1.0,
            r0: PI / 2.0 * a,
            radius: a,
            quad_patches: vec![patch],
        }
    }

    /// Axisymmetric torus with the catalog radii R = 2, r = 1, parametrized
    /// by X(theta, phi) = ((R + cos theta) cos phi, (R + cos theta) sin phi,
    /// sin theta).
    pub fn torus() -> Surface {
        let embed: EmbedFn = Arc::new(|theta, phi| {
            let w = TORUS_MAJOR + TORUS_MINOR * theta.cos();
            Vec3::new(w * phi.cos(), w * phi.sin(), TORUS_MINOR * theta.sin())
        });
        let partials: PartialsFn = Arc::new(|theta: f64, phi: f64| {
            let w = TORUS_MAJOR + TORUS_MINOR * theta.cos();
            (
                Vec3::new(
                    -TORUS_MINOR * theta.sin() * phi.cos(),
                    -TORUS_MINOR * theta.sin() * phi.sin(),
                    TORUS_MINOR * theta.cos(),
                ),
                Vec3::new(-w * phi.sin(), w * phi.cos(), 0.0),
            )
        });
        let mut chart = Chart::new([-1.0, TAU + 1.0, -1.0, TAU + 1.0], embed).with_partials(partials);
        chart.zero_scan = [0.0, TAU, 0.0, TAU];
        chart.periodic_u = true;
        chart.periodic_v = true;
        // f_theta x f_phi points inward for this parametrization.
        chart.orientation_sign = -1.0;

        let patch = QuadPatch {
            domain: [0.0, TAU, 0.0, TAU],
            area_element: Arc::new(|theta, _| TORUS_MINOR * (TORUS_MAJOR + TORUS_MINOR * theta.cos())),
            gauss_curvature: Arc::new(|theta: f64, _| {
                theta.cos() / (TORUS_MINOR * (TORUS_MAJOR + TORUS_MINOR * theta.cos()))
            }),
        };

        Surface {
            name: "torus".into(),
            kind: SurfaceKind::Torus,
            charts: vec![chart],
            boundary: vec![],
            collars: vec![],
            genus: 1,
            orientation: 1.0,
            r0: 0.5,
            radius: TORUS_MINOR,
            quad_patches: vec![patch],
        }
    }

    /// Looks up a catalog surface by name.
    pub fn by_name(name: &str) -> Result<Surface> {
        match name {
            "disk" => Ok(Surface::disk()),
            "annulus" => Ok(Surface::annulus()),
            "sphere" => Ok(Surface::sphere()),
            "torus" => Ok(Surface::torus()),
            other => Err(Error::Config(format!(
                "unknown surface `{other}` (catalog: disk, annulus, sphere, torus)"
            ))),
        }
    }

    /// Builds a custom closed surface from a key-value config. Required keys:
    /// `x`, `y`, `z` (expressions over u, v), `u.min`, `u.max`, `v.min`,
    /// `v.max`, `genus`, `r0`. Optional: `periodic.u`, `periodic.v`,
    /// `orientation` (+1/-1 chart orientation sign).
    pub fn from_config(text: &str) -> Result<Surface> {
        let kv = parse_key_values(text)?;
        let get = |k: &str| -> Result<&str> {
            kv.iter()
                .find(|(key, _)| key == k)
                .map(|(_, v)| v.as_str())
                .ok_or_else(|| Error::Config(format!("missing key `{k}`")))
        };
        let num = |k: &str| -> Result<f64> {
            get(k)?.parse::<f64>().map_err(|_| Error::Config(format!("bad number for `{k}`")))
        };
        if let Ok(bc) = get("boundary_count") {
            if bc.trim() != "0" {
                return Err(Error::Config(
                    "custom surfaces must be closed (boundary_count = 0); \
                     surfaces with boundary come from the catalog"
                        .into(),
                ));
            }
        }
        let ex = Expr::parse(get("x")?, &["u", "v"])?;
        let ey = Expr::parse(get("y")?, &["u", "v"])?;
        let ez = Expr::parse(get("z")?, &["u", "v"])?;
        let domain = [num("u.min")?, num("u.max")?, num("v.min")?, num("v.max")?];
        let genus = num("genus")? as i64;
        let r0 = num("r0")?;
        let orientation = num("orientation").unwrap_or(1.0);
        let embed: EmbedFn = Arc::new(move |u, v| {
            Vec3::new(ex.eval(&[u, v]), ey.eval(&[u, v]), ez.eval(&[u, v]))
        });
        let mut chart = Chart::new(domain, embed.clone());
        chart.orientation_sign = orientation;
        chart.periodic_u = get("periodic.u").map(|s| s == "true").unwrap_or(false);
        chart.periodic_v = get("periodic.v").map(|s| s == "true").unwrap_or(false);

        // Finite-difference area element and Gaussian curvature for the
        // single-chart integration patch.
        let area_embed = embed.clone();
        let area: ScalarFn = Arc::new(move |u, v| {
            let h = 1e-5;
            let fu = (area_embed(u + h, v) - area_embed(u - h, v)) * (0.5 / h);
            let fv = (area_embed(u, v + h) - area_embed(u, v - h)) * (0.5 / h);
            fu.cross(fv).norm()
        });
        let kap_embed = embed.clone();
        let kappa: ScalarFn = Arc::new(move |u, v| fd_gauss_curvature(&kap_embed, u, v));

        let patch = QuadPatch { domain, area_element: area, gauss_curvature: kappa };

        Ok(Surface {
            name: get("name").unwrap_or("custom").to_string(),
            kind: SurfaceKind::Custom,
            charts: vec![chart],
            boundary: vec![],
            collars: vec![],
            genus,
            orientation: 1.0,
            r0,
            radius: 1.0,
            quad_patches: vec![patch],
        })
    }
}

/// Integrates `f` over a parameter rectangle with a composite tensor-product
/// 2-point Gauss rule (fourth order): `quad.n` cells per direction, four
/// nodes per cell.
pub fn integrate_patch<F>(domain: [f64; 4], quad: QuadratureSpec, f: F) -> f64
where
    F: Fn(f64, f64) -> f64 + Sync + Send,
{
    let [u0, u1, v0, v1] = domain;
    let n = quad.n;
    let du = (u1 - u0) / n as f64;
    let dv = (v1 - v0) / n as f64;
    // Offsets of the 2-point Gauss nodes from the cell center, in cell units.
    let g = 0.5 / 3.0f64.sqrt();
    let offs = [-g, g];
    par::sum_over(n * n, quad.parallel, |idx| {
        let i = idx / n;
        let j = idx % n;
        let uc = u0 + (i as f64 + 0.5) * du;
        let vc = v0 + (j as f64 + 0.5) * dv;
        let mut cell = 0.0;
        for a in offs {
            for b in offs {
                cell += f(uc + a * du, vc + b * dv);
            }
        }
        cell * 0.25 * du * dv
    })
}

/// Gaussian curvature from finite differences of the embedding.
fn fd_gauss_curvature(embed: &EmbedFn, u: f64, v: f64) -> f64 {
    let h = 1e-4;
    let f = |a: f64, b: f64| embed(a, b);
    let fu = (f(u + h, v) - f(u - h, v)) * (0.5 / h);
    let fv = (f(u, v + h) - f(u, v - h)) * (0.5 / h);
    let fuu = (f(u + h, v) + f(u - h, v) - f(u, v) * 2.0) * (1.0 / (h * h));
    let fvv = (f(u, v + h) + f(u, v - h) - f(u, v) * 2.0) * (1.0 / (h * h));
    let fuv = (f(u + h, v + h) + f(u - h, v - h) - f(u + h, v - h) - f(u - h, v + h))
        * (1.0 / (4.0 * h * h));
    let n = fu.cross(fv).normalized();
    let e = fu.dot(fu);
    let ff = fu.dot(fv);
    let g = fv.dot(fv);
    let l = n.dot(fuu);
    let m = n.dot(fuv);
    let nn = n.dot(fvv);
    (l * nn - m * m) / (e * g - ff * ff)
}

/// Circle boundary of a planar region. `inner` flips the conormal and
/// reverses the parametrization so that the tangent stays gamma x nu.
fn circle_boundary(r: f64, inner: bool) -> BoundaryCurve {
    if !inner {
        BoundaryCurve::new(
            Arc::new(move |t: f64| Vec3::new(r * t.cos(), r * t.sin(), 0.0)),
            Arc::new(|t: f64| Vec3::new(t.cos(), t.sin(), 0.0)),
            Arc::new(|t: f64| Vec3::new(-t.sin(), t.cos(), 0.0)),
            TAU * r,
        )
    } else {
        BoundaryCurve::new(
            Arc::new(move |t: f64| Vec3::new(r * t.cos(), -r * t.sin(), 0.0)),
            Arc::new(|t: f64| Vec3::new(-t.cos(), t.sin(), 0.0)),
            Arc::new(|t: f64| Vec3::new(-t.sin(), -t.cos(), 0.0)),
            TAU * r,
        )
    }
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_key_values(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_surfaces() -> Vec<Surface> {
        vec![Surface::disk(), Surface::annulus(), Surface::sphere(), Surface::torus()]
    }

    #[test]
    fn euler_characteristics_match_catalog() {
        assert_eq!(Surface::sphere().euler_characteristic(), 2);
        assert_eq!(Surface::torus().euler_characteristic(), 0);
        assert_eq!(Surface::disk().euler_characteristic(), 1);
        assert_eq!(Surface::annulus().euler_characteristic(), 0);
    }

    #[test]
    fn normals_are_unit_and_orthogonal_to_tangents() {
        for s in all_surfaces() {
            for chart_idx in 0..s.charts.len() {
                let c = &s.charts[chart_idx];
                let [u0, u1, v0, v1] = c.zero_scan;
                for i in 0..5 {
                    for j in 0..5 {
                        let u = u0 + (u1 - u0) * (0.1 + 0.2 * i as f64);
                        let v = v0 + (v1 - v0) * (0.1 + 0.2 * j as f64);
                        let n = c.normal(u, v);
                        let (fu, fv) = c.partials(u, v);
                        assert!((n.norm() - 1.0).abs() < 1e-9, "{} chart {chart_idx}", s.name);
                        assert!(n.dot(fu).abs() < 1e-8 * fu.norm().max(1.0));
                        assert!(n.dot(fv).abs() < 1e-8 * fv.norm().max(1.0));
                        assert!(c.metric(u, v).det() > 1e-12, "immersion fails");
                    }
                }
            }
        }
    }

    #[test]
    fn sphere_normals_point_outward_on_both_charts() {
        let s = Surface::sphere();
        for c in &s.charts {
            for (u, v) in [(0.0, 0.0), (0.5, -0.3), (1.0, 1.0)] {
                let p = c.embed(u, v);
                let n = c.normal(u, v);
                assert!(n.dot(p) > 0.9, "normal must be outward radial");
            }
        }
    }

    #[test]
    fn torus_normal_points_outward() {
        let s = Surface::torus();
        let c = &s.charts[0];
        // theta = 0 is the outer equator; outward normal is radial in xy.
        let n = c.normal(0.0, 0.3);
        let expected = Vec3::new(0.3f64.cos(), 0.3f64.sin(), 0.0);
        assert!((n - expected).norm() < 1e-9);
    }

    #[test]
    fn gauss_bonnet_matches_chi_sphere_and_torus() {
        let quad = QuadratureSpec::new(256);
        let sph = Surface::sphere();
        assert!((sph.gauss_bonnet_chi(quad).unwrap() - 2.0).abs() < 1e-6);
        let tor = Surface::torus();
        assert!(tor.gauss_bonnet_chi(quad).unwrap().abs() < 1e-6);
        // chi is scale invariant.
        let big = Surface::sphere_with_radius(3.0);
        assert!((big.gauss_bonnet_chi(quad).unwrap() - 2.0).abs() < 1e-6);
    }

    #[test]
    fn gauss_bonnet_rejects_boundary() {
        let d = Surface::disk();
        assert!(matches!(d.gauss_bonnet_chi(QuadratureSpec::new(16)), Err(Error::BoundaryPresent)));
    }

    #[test]
    fn tangent_project_examples() {
        let s = Surface::sphere();
        // North pole is (0, 0) in the north chart.
        let p = s.point(0, 0.0, 0.0).unwrap();
        let n = s.normal_at(&p);
        assert!((n - Vec3::new(0.0, 0.0, 1.0)).norm() < 1e-12);
        // Projection kills the normal component.
        assert!(s.tangent_project(&p, n).norm() < 1e-12);
        // (1, 0, 1) projects to (1, 0, 0) at the north pole.
        let w = s.tangent_project(&p, Vec3::new(1.0, 0.0, 1.0));
        assert!((w - Vec3::new(1.0, 0.0, 0.0)).norm() < 1e-12);
        // Idempotence.
        let w2 = s.tangent_project(&p, w);
        assert!((w2 - w).norm() < 1e-14);
    }

    #[test]
    fn flat_ball_weights_sum_to_area() {
        let d = Surface::disk();
        let x = d.point(0, 0.0, 0.0).unwrap();
        let nodes = d.metric_ball_sample(&x, 0.1, 512).unwrap();
        let total: f64 = nodes.iter().map(|(_, w)| w).sum();
        assert!((total - PI * 0.01).abs() < 1e-8, "total = {total}");
    }

    #[test]
    fn small_ball_area_asymptotics_on_sphere() {
        let s = Surface::sphere();
        let x = s.point(0, 0.2, 0.1).unwrap();
        // Geodesic ball area = pi eps^2 (1 - kappa eps^2 / 12 + ...).
        for eps in [0.2, 0.1, 0.05] {
            let nodes = s.metric_ball_sample(&x, eps, 2048).unwrap();
            let total: f64 = nodes.iter().map(|(_, w)| w).sum();
            let ratio = total / (PI * eps * eps);
            assert!((ratio - 1.0).abs() < 0.02, "eps={eps} ratio={ratio}");
        }
    }

    #[test]
    fn ball_sample_guards() {
        let d = Surface::disk();
        let x = d.point(0, 0.0, 0.0).unwrap();
        assert!(d.metric_ball_sample(&x, 0.9, 64).is_err()); // > r0
        let near = d.ambient_to_point(Vec3::new(0.95, 0.0, 0.0)).unwrap();
        assert!(d.metric_ball_sample(&near, 0.1, 64).is_err()); // boundary proximity
    }

    #[test]
    fn collar_round_trip() {
        for s in [Surface::disk(), Surface::annulus()] {
            for collar in &s.collars {
                for k in 0..10 {
                    let theta = 0.61 * k as f64;
                    let dist = 0.3 * collar.width + 0.05 * (k as f64 / 10.0);
                    let p = collar.point(theta, dist);
                    let (curve, th_back, s_back) = s.boundary_signed_distance(p).unwrap();
                    assert_eq!(curve, collar.curve);
                    let y = s.boundary[curve].point(th_back);
                    let y0 = s.boundary[curve].point(wrap_angle(theta));
                    assert!((y - y0).norm() < 1e-6, "nearest boundary point mismatch");
                    assert!((s_back - dist).abs() < 1e-9);
                    // phi(., 0) is the identity on the boundary.
                    let b = collar.point(theta, 0.0);
                    assert!((b - y0).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn boundary_frames_are_orthonormal() {
        for s in [Surface::disk(), Surface::annulus()] {
            for curve in &s.boundary {
                for k in 0..16 {
                    let t = TAU * k as f64 / 16.0;
                    let nu = curve.conormal(t);
                    let tg = curve.unit_tangent(t);
                    assert!((nu.norm() - 1.0).abs() < 1e-12);
                    assert!((tg.norm() - 1.0).abs() < 1e-12);
                    assert!(nu.dot(tg).abs() < 1e-12);
                    // tangent = gamma x nu with gamma = +z for planar surfaces.
                    let expect = Vec3::new(0.0, 0.0, 1.0).cross(nu);
                    assert!((tg - expect).norm() < 1e-12);
                    // finite-difference check of the parametrization direction
                    let h = 1e-6;
                    let dp = (curve.point(t + h) - curve.point(t - h)) * (0.5 / h);
                    assert!((dp.normalized() - tg).norm() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn ambient_round_trip() {
        for s in all_surfaces() {
            for chart_idx in 0..s.charts.len() {
                let c = &s.charts[chart_idx];
                let [u0, u1, v0, v1] = c.zero_scan;
                for i in 1..4 {
                    for j in 1..4 {
                        let u = u0 + (u1 - u0) * i as f64 / 4.0;
                        let v = v0 + (v1 - v0) * j as f64 / 4.0;
                        let pos = c.embed(u, v);
                        let p = s.ambient_to_point(pos).unwrap();
                        assert!((p.pos - pos).norm() < 1e-9, "{} chart {chart_idx}", s.name);
                    }
                }
            }
        }
    }

    #[test]
    fn custom_surface_from_config() {
        let cfg = "
            name = torus-custom
            x = (2 + cos(u)) * cos(v)
            y = (2 + cos(u)) * sin(v)
            z = sin(u)
            u.min = 0
            u.max = 2 * pi
            v.min = 0
            v.max = 2 * pi
            periodic.u = true
            periodic.v = true
            genus = 1
            boundary_count = 0
            r0 = 0.5
        ";
        // `u.min = 0` style keys have expressions on the rhs only for chart
        // components; bounds are plain numbers, so rewrite 2 * pi.
        let cfg = cfg.replace("u.max = 2 * pi", &format!("u.max = {TAU}"));
        let cfg = cfg.replace("v.max = 2 * pi", &format!("v.max = {TAU}"));
        let s = Surface::from_config(&cfg).unwrap();
        assert_eq!(s.euler_characteristic(), 0);
        let chi = s.gauss_bonnet_chi(QuadratureSpec::new(128)).unwrap();
        assert!(chi.abs() < 1e-3, "chi = {chi}");
    }

    #[test]
    fn custom_surface_with_boundary_rejected() {
        let cfg = "x = u\ny = v\nz = 0\nu.min = 0\nu.max = 1\nv.min = 0\nv.max = 1\n\
                   genus = 0\nboundary_count = 1\nr0 = 0.1";
        assert!(Surface::from_config(cfg).is_err());
    }
}
