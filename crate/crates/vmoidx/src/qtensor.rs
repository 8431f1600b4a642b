//! Q-tensor algebra on shells and line fields.
//!
//! A tangent uniaxial Q-tensor at a surface point x is a symmetric traceless
//! 3x3 matrix Q with Q gamma(x) = 0; it encodes an unoriented tangent
//! direction n and an order parameter s through Q = s (n (x) n - P_x / 2),
//! where P_x projects onto the tangent plane. The admissible tensors at x
//! form a two-plane spanned by the frame matrices X, Y built from any
//! orthonormal tangent frame. Because Q is quadratic in n, sign bookkeeping
//! for directions disappears: line fields are exactly the unit-norm
//! admissible Q-fields.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::TangentField;
use crate::geometry::{Surface, SurfacePoint};
use crate::linalg::{Mat3, Vec3};

/// Admissibility tolerance on |Q gamma|.
pub const ADMISSIBLE_TOL: f64 = 1e-8;
/// Below this norm a tensor is treated as isotropic (s = 0).
pub const DEGENERATE_TOL: f64 = 1e-12;

/// A symmetric traceless 3x3 tensor.
#[derive(Debug, Clone, Copy)]
pub struct QTensor {
    pub m: Mat3,
}

impl QTensor {
    /// Wraps a matrix, verifying symmetry and tracelessness.
    pub fn new(m: Mat3) -> Result<QTensor> {
        let sym = (m.m[0][1] - m.m[1][0]).abs().max((m.m[0][2] - m.m[2][0]).abs()).max((m.m[1][2] - m.m[2][1]).abs());
        if sym > 1e-12 || m.trace().abs() > 1e-12 {
            return Err(Error::Config(format!(
                "not a symmetric traceless tensor: asymmetry {sym:.2e}, trace {:.2e}",
                m.trace()
            )));
        }
        Ok(QTensor { m })
    }

    pub fn zero() -> QTensor {
        QTensor { m: Mat3::outer(Vec3::ZERO, Vec3::ZERO) }
    }

    pub fn dot(&self, o: &QTensor) -> f64 {
        self.m.frobenius_dot(&o.m)
    }

    pub fn norm(&self) -> f64 {
        self.m.frobenius_norm()
    }

    pub fn add(&self, o: &QTensor) -> QTensor {
        QTensor { m: self.m.add(&o.m) }
    }

    pub fn sub(&self, o: &QTensor) -> QTensor {
        QTensor { m: self.m.sub(&o.m) }
    }

    pub fn scale(&self, s: f64) -> QTensor {
        QTensor { m: self.m.scale(s) }
    }
}

fn sym_outer(a: Vec3, b: Vec3) -> Mat3 {
    Mat3::outer(a, b).add(&Mat3::outer(b, a))
}

/// Orthogonal frame of the traceless symmetric tensors at a point, built
/// from an orthonormal frame (n, m, gamma) with (n, m) tangent. (X, Y) spans
/// the admissible tensors; E, F, G span the complement.
#[derive(Debug, Clone)]
pub struct QFrame {
    pub n: Vec3,
    pub m: Vec3,
    pub gamma: Vec3,
    pub x_mat: Mat3,
    pub y_mat: Mat3,
    pub e_mat: Mat3,
    pub f_mat: Mat3,
    pub g_mat: Mat3,
}

impl QFrame {
    /// Frame at a surface point, using the normalized first chart partial as
    /// the tangent reference direction.
    pub fn at(s: &Surface, p: &SurfacePoint) -> QFrame {
        let (fu, _) = s.charts[p.chart].partials(p.u, p.v);
        let gamma = s.normal_at(p);
        let n = (fu - gamma * fu.dot(gamma)).normalized();
        let m = gamma.cross(n);
        QFrame {
            n,
            m,
            gamma,
            x_mat: Mat3::outer(n, n).sub(&Mat3::outer(m, m)),
            y_mat: sym_outer(n, m),
            e_mat: Mat3::outer(gamma, gamma).sub(&Mat3::identity().scale(1.0 / 3.0)),
            f_mat: sym_outer(n, gamma),
            g_mat: sym_outer(m, gamma),
        }
    }

    /// Coefficients (a, b) of the admissible part of Q on (X, Y); the frame
    /// matrices have squared norm 2.
    pub fn admissible_coefficients(&self, q: &QTensor) -> (f64, f64) {
        (q.m.frobenius_dot(&self.x_mat) / 2.0, q.m.frobenius_dot(&self.y_mat) / 2.0)
    }

    /// Orthogonal projection onto span(X, Y).
    pub fn project(&self, q: &QTensor) -> QTensor {
        let (a, b) = self.admissible_coefficients(q);
        QTensor { m: self.x_mat.scale(a).add(&self.y_mat.scale(b)) }
    }
}

/// Q = s (n (x) n - P_x / 2). Sign-invariant in n.
///
/// Fails with [`Error::NotTangent`] when n is not a unit tangent vector.
pub fn q_from_director(s: &Surface, p: &SurfacePoint, n: Vec3, order: f64) -> Result<QTensor> {
    let gamma = s.normal_at(p);
    let normal_component = n.dot(gamma).abs();
    if normal_component > 1e-8 || (n.norm() - 1.0).abs() > 1e-8 {
        return Err(Error::NotTangent { normal_component });
    }
    let proj = Mat3::identity().sub(&Mat3::outer(gamma, gamma));
    Ok(QTensor { m: Mat3::outer(n, n).sub(&proj.scale(0.5)).scale(order) })
}

/// Order parameter and unoriented direction recovered from an admissible Q.
#[derive(Debug, Clone, Copy)]
pub struct Director {
    pub s: f64,
    /// Defined up to sign; arbitrary when `degenerate` is set.
    pub n: Vec3,
    /// True when s = 0 within tolerance: any direction is admissible.
    pub degenerate: bool,
}

/// Inverts the representation: s = sqrt(2) |Q| and n the positive-eigenvalue
/// eigendirection in the tangent plane.
///
/// Fails with [`Error::NotAdmissible`] when |Q gamma| exceeds tolerance.
/// A vanishing tensor is returned flagged, not as an error: any direction
/// is then admissible.
pub fn director_from_q(s: &Surface, p: &SurfacePoint, q: &QTensor) -> Result<Director> {
    let gamma = s.normal_at(p);
    let residual = q.m.apply(gamma).norm();
    if residual > ADMISSIBLE_TOL * (1.0 + q.norm()) {
        return Err(Error::NotAdmissible { residual });
    }
    let frame = QFrame::at(s, p);
    let (a, b) = frame.admissible_coefficients(q);
    let order = 2.0 * (a * a + b * b).sqrt();
    if order < DEGENERATE_TOL {
        return Ok(Director { s: 0.0, n: frame.n, degenerate: true });
    }
    // Q = (s/2)(cos 2a X + sin 2a Y) for n at angle a in the (n0, m0) frame.
    let alpha = 0.5 * b.atan2(a);
    Ok(Director {
        s: order,
        n: frame.n * alpha.cos() + frame.m * alpha.sin(),
        degenerate: false,
    })
}

type QFn = Arc<dyn Fn(&Surface, &SurfacePoint) -> QTensor + Send + Sync>;

/// A field of admissible Q-tensors.
#[derive(Clone)]
pub struct QField {
    pub name: String,
    eval: QFn,
}

impl QField {
    pub fn new(name: &str, eval: QFn) -> QField {
        QField { name: name.into(), eval }
    }

    pub fn eval(&self, s: &Surface, p: &SurfacePoint) -> QTensor {
        (self.eval)(s, p)
    }
}

/// An unoriented direction field with order parameter, stored as its
/// Q-tensor field so that sign-invariance is structural.
#[derive(Clone)]
pub struct LineField {
    pub q: QField,
}

impl LineField {
    /// Line field spanned by a vector field: direction v/|v|, order |v|.
    pub fn from_vector_field(f: &TangentField) -> LineField {
        let f = f.clone();
        let name = format!("line({})", f.name);
        LineField {
            q: QField::new(
                &name,
                Arc::new(move |s: &Surface, p: &SurfacePoint| {
                    let v = f.eval(s, p);
                    let order = v.norm();
                    if order < DEGENERATE_TOL {
                        return QTensor::zero();
                    }
                    q_from_director(s, p, v * (1.0 / order), order).unwrap_or_else(|_| QTensor::zero())
                }),
            ),
        }
    }

    /// Line field from a director closure on chart coordinates with constant
    /// order parameter.
    pub fn from_director(name: &str, order: f64, dir: Arc<dyn Fn(&Surface, &SurfacePoint) -> Vec3 + Send + Sync>) -> LineField {
        LineField {
            q: QField::new(
                name,
                Arc::new(move |s: &Surface, p: &SurfacePoint| {
                    let d = dir(s, p);
                    let n = s.tangent_project(p, d).normalized();
                    q_from_director(s, p, n, order).unwrap_or_else(|_| QTensor::zero())
                }),
            ),
        }
    }

    /// The axisymmetric torus fields n_i = cos((2i+1) phi / 2) e_theta +
    /// sin((2i+1) phi / 2) e_phi: well-defined line fields that admit no
    /// global orientation.
    pub fn torus_half_twist(i: usize) -> LineField {
        let k = (2 * i + 1) as f64;
        LineField::from_director(
            &format!("torus-n{i}"),
            1.0,
            Arc::new(move |s: &Surface, p: &SurfacePoint| {
                let (ft, fp) = s.charts[p.chart].partials(p.u, p.v);
                let e_theta = ft.normalized();
                let e_phi = fp.normalized();
                let a = k * p.v / 2.0;
                e_theta * a.cos() + e_phi * a.sin()
            }),
        )
    }

    pub fn director_at(&self, s: &Surface, p: &SurfacePoint) -> Result<Director> {
        director_from_q(s, p, &self.q.eval(s, p))
    }
}

/// Ball-averages the tensor field and projects the average back onto the
/// admissible plane at the center. Averaging failures (ball leaving the
/// chart atlas) surface as a huge tensor, never as a spurious zero.
pub fn mollify_q(s: &Surface, q: &QField, eps: f64, n_nodes: usize) -> Result<QField> {
    if eps >= s.r0 {
        return Err(Error::EpsTooLarge { eps, limit: s.r0, context: "mollification scale must stay below r0" });
    }
    let q = q.clone();
    let name = format!("mollified({}, {eps:.5})", q.name);
    Ok(QField::new(
        &name,
        Arc::new(move |s: &Surface, p: &SurfacePoint| {
            let frame = QFrame::at(s, p);
            let nodes = match s.metric_ball_sample(p, eps, n_nodes) {
                Ok(n) => n,
                Err(_) => return QTensor { m: frame.x_mat.scale(1e9) },
            };
            let mut acc = Mat3::outer(Vec3::ZERO, Vec3::ZERO);
            let mut wsum = 0.0;
            for (node, w) in &nodes {
                acc = acc.add(&q.eval(s, node).m.scale(*w));
                wsum += w;
            }
            frame.project(&QTensor { m: acc.scale(1.0 / wsum) })
        }),
    ))
}

/// Half-integer index of a line field at an isolated degenerate point: the
/// winding of the doubled-angle coefficients (a, b) around a chart circle,
/// halved.
///
/// Fails with [`Error::VanishingOnCircle`] when |Q| degenerates on the
/// circle and with [`Error::UnderResolved`] when the doubled angle cannot be
/// tracked with steps below pi / 2.
pub fn linefield_index(s: &Surface, l: &LineField, chart: usize, u0: f64, v0: f64, r: f64) -> Result<f64> {
    let mut n = 64usize;
    'resolution: loop {
        let mut prev = 0.0f64;
        let mut first = 0.0f64;
        let mut total = 0.0f64;
        let mut min_norm = f64::INFINITY;
        for k in 0..=n {
            let t = TAU * k as f64 / n as f64;
            let p = s.point(chart, u0 + r * t.cos(), v0 + r * t.sin())?;
            let q = l.q.eval(s, &p);
            let frame = QFrame::at(s, &p);
            let (a, b) = frame.admissible_coefficients(&q);
            let norm = (a * a + b * b).sqrt();
            min_norm = min_norm.min(norm);
            if norm < 1e-10 {
                return Err(Error::VanishingOnCircle { min_norm: norm });
            }
            let angle = b.atan2(a);
            if k == 0 {
                first = angle;
            } else {
                let mut step = angle - prev;
                while step > PI {
                    step -= TAU;
                }
                while step < -PI {
                    step += TAU;
                }
                if step.abs() > PI / 2.0 {
                    if n >= 1 << 20 {
                        return Err(Error::UnderResolved);
                    }
                    n *= 2;
                    continue 'resolution;
                }
                total += step;
            }
            prev = angle;
        }
        let _ = first;
        let winding = total / TAU;
        let rounded = winding.round();
        if (winding - rounded).abs() > 1e-6 {
            return Err(Error::NonIntegerResult { value: winding, tol: 1e-6 });
        }
        return Ok(rounded / 2.0);
    }
}

/// A closed loop on the surface, as chart coordinates over t in [0, 1].
pub struct SurfaceLoop {
    pub name: String,
    pub chart: usize,
    pub coords: Arc<dyn Fn(f64) -> (f64, f64) + Send + Sync>,
}

/// Generating loops of the fundamental group for catalog surfaces. The
/// sphere is simply connected and gets none: a nonvanishing line field on it
/// would automatically be orientable.
pub fn generating_loops(s: &Surface) -> Vec<SurfaceLoop> {
    match s.kind {
        crate::geometry::SurfaceKind::Torus => vec![
            SurfaceLoop {
                name: "theta-loop".into(),
                chart: 0,
                coords: Arc::new(|t| (TAU * t, 0.9)),
            },
            SurfaceLoop {
                name: "phi-loop".into(),
                chart: 0,
                coords: Arc::new(|t| (0.9, TAU * t)),
            },
        ],
        _ => Vec::new(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HolonomyReport {
    pub surface: String,
    pub field: String,
    pub orientable: bool,
    pub loops: Vec<(String, i64)>,
}

/// Transports the direction continuously along each loop and records the
/// holonomy sign: +1 when the direction returns to itself, -1 when it
/// returns to its negation. Orientable iff every holonomy is +1.
///
/// Fails with [`Error::UnderResolved`] when no refinement keeps successive
/// directions within pi / 4, and with [`Error::DegenerateQ`] when the order
/// parameter vanishes on a loop.
pub fn orientability_check(s: &Surface, l: &LineField, loops: &[SurfaceLoop]) -> Result<HolonomyReport> {
    let mut out = Vec::with_capacity(loops.len());
    for lp in loops {
        let mut steps = 256usize;
        'refine: loop {
            let (u, v) = (lp.coords)(0.0);
            let p0 = s.point(lp.chart, u, v)?;
            let d0 = l.director_at(s, &p0)?;
            if d0.degenerate {
                return Err(Error::DegenerateQ { norm: 0.0 });
            }
            let start = d0.n;
            let mut current = start;
            for k in 1..=steps {
                let (u, v) = (lp.coords)(k as f64 / steps as f64);
                let p = s.point(lp.chart, u, v)?;
                let d = l.director_at(s, &p)?;
                if d.degenerate {
                    return Err(Error::DegenerateQ { norm: 0.0 });
                }
                let c = d.n.dot(current);
                if c.abs() < (PI / 4.0).cos() {
                    if steps >= 1 << 16 {
                        return Err(Error::UnderResolved);
                    }
                    steps *= 2;
                    continue 'refine;
                }
                current = if c >= 0.0 { d.n } else { d.n * -1.0 };
            }
            let sign = if current.dot(start) >= 0.0 { 1 } else { -1 };
            out.push((lp.name.clone(), sign));
            break;
        }
    }
    Ok(HolonomyReport {
        surface: s.name.clone(),
        field: l.q.name.clone(),
        orientable: out.iter().all(|(_, h)| *h == 1),
        loops: out,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LinefieldRow {
    pub eps: f64,
    pub min_norm: f64,
    pub max_norm: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct LinefieldVerdict {
    pub surface: String,
    pub field: String,
    pub chi: i64,
    pub c1: f64,
    pub c2: f64,
    pub bounds_ok: bool,
    pub rows: Vec<LinefieldRow>,
    pub certified: bool,
    pub verdict: String,
}

/// Checks whether a Q-field certifies as a line field across an eps grid:
/// sampled bounds c1 <= |Q| <= c2, then mollified norms staying within
/// [c1 / 2, 2 c2] at every scale. Certification on a surface with nonzero
/// Euler characteristic is impossible, so the verdict records the
/// topological obstruction instead of erroring.
pub fn vmo_linefield_obstruction(s: &Surface, q: &QField, eps_grid: &[f64]) -> LinefieldVerdict {
    let chi = s.euler_characteristic();
    let samples = sample_points(s, 24);
    let mut c1 = f64::INFINITY;
    let mut c2 = 0.0f64;
    for p in &samples {
        let n = q.eval(s, p).norm();
        c1 = c1.min(n);
        c2 = c2.max(n);
    }
    let bounds_ok = c1 > 1e-9;

    let mut rows = Vec::with_capacity(eps_grid.len());
    let mut certified = bounds_ok;
    let coarse = sample_points(s, 12);
    for &eps in eps_grid {
        let (min_norm, max_norm) = match mollify_q(s, q, eps, 64) {
            Ok(qe) => {
                let mut lo = f64::INFINITY;
                let mut hi = 0.0f64;
                for p in &coarse {
                    let n = qe.eval(s, p).norm();
                    lo = lo.min(n);
                    hi = hi.max(n);
                }
                (lo, hi)
            }
            Err(_) => (0.0, 0.0),
        };
        let ok = bounds_ok && min_norm >= c1 / 2.0 && max_norm <= 2.0 * c2;
        certified &= ok;
        rows.push(LinefieldRow { eps, min_norm, max_norm, ok });
    }

    let verdict = if !bounds_ok {
        "bounds-violated".to_string()
    } else if certified && chi == 0 {
        "certified".to_string()
    } else if certified {
        // A certified line field forces chi = 0; reaching this branch means
        // the sampling resolution missed a degeneracy.
        "inconsistent".to_string()
    } else if chi != 0 {
        "topological-obstruction".to_string()
    } else {
        "not-certified".to_string()
    };
    LinefieldVerdict {
        surface: s.name.clone(),
        field: q.name.clone(),
        chi,
        c1,
        c2,
        bounds_ok,
        rows,
        certified,
        verdict,
    }
}

fn sample_points(s: &Surface, n: usize) -> Vec<SurfacePoint> {
    let mut out = Vec::new();
    for chart_idx in 0..s.charts.len() {
        let c = &s.charts[chart_idx];
        let [u0, u1, v0, v1] = c.zero_scan;
        for i in 0..n {
            for j in 0..n {
                let u = u0 + (u1 - u0) * (i as f64 + 0.37) / n as f64;
                let v = v0 + (v1 - v0) * (j as f64 + 0.61) / n as f64;
                out.push(SurfacePoint { chart: chart_idx, u, v, pos: c.embed(u, v) });
            }
        }
    }
    out
}

/// A random unit tangent vector at p.
pub fn random_tangent(s: &Surface, p: &SurfacePoint, rng: &mut impl Rng) -> Vec3 {
    let gamma = s.normal_at(p);
    loop {
        let w = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let t = w - gamma * w.dot(gamma);
        if t.norm() > 1e-3 {
            return t.normalized();
        }
    }
}
