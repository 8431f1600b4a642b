//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("surface has a boundary; the operation requires a closed surface")]
    BoundaryPresent,

    #[error("averaging radius {eps} is not admissible (limit {limit}): {context}")]
    EpsTooLarge { eps: f64, limit: f64, context: &'static str },

    #[error("chart point ({u}, {v}) lies outside the parameter domain of chart {chart}")]
    OutOfChart { chart: usize, u: f64, v: f64 },

    #[error("field vanishes on the boundary (min sampled |v| = {min_norm})")]
    ZeroOnBoundary { min_norm: f64 },

    #[error("newton iterates from adjacent cells collide without resolving a zero cluster")]
    ClusterUnresolved,

    #[error("no admissible transverse perturbation found within budget {budget} after {retries} retries")]
    BudgetExceeded { budget: f64, retries: usize },

    #[error("{0} is not a regular value of the map")]
    NotRegularValue(String),

    #[error("degree integral {value} is not within {tol} of an integer; quadrature failed")]
    NonIntegerResult { value: f64, tol: f64 },

    #[error("curve field vanishes on the circle (min sampled norm {min_norm})")]
    VanishingOnCircle { min_norm: f64 },

    #[error("sampling refinement cap reached before the angle steps resolved")]
    UnderResolved,

    #[error("field has a degenerate zero at ({x}, {y}, {z}); perturb it first")]
    DegenerateZero { x: f64, y: f64, z: f64 },

    #[error("ball of radius {r} around the zero contains another zero")]
    BallContainsOtherZero { r: f64 },

    #[error("field vanishes on the boundary curve")]
    VanishingOnBoundary,

    #[error("tangential boundary zero at theta = {theta} has derivative below tolerance")]
    DegenerateBoundaryZero { theta: f64 },

    #[error("a zero of the field lies outside both excision subregions")]
    ZeroOutsideSubregions,

    #[error("index values are not constant over the epsilon grid: {values:?}")]
    NotConstantOverGrid { values: Vec<(i64, i64)> },

    #[error("collar of width {width} is narrower than the requested cutoff {requested}")]
    CollarTooNarrow { width: f64, requested: f64 },

    #[error("field norm collapsed below {bound} (min sampled {min_norm})")]
    NormCollapse { bound: f64, min_norm: f64 },

    #[error("boundary winding is {winding}, not zero; the zeros cannot be cancelled")]
    NonzeroIndex { winding: i64 },

    #[error("field has a zero of norm {min_norm}; cannot rescale")]
    ZeroNorm { min_norm: f64 },

    #[error("boundary datum has inward index {ind_minus} but the surface has Euler characteristic {chi}; no nowhere-vanishing extension exists")]
    TopologicalObstruction { ind_minus: i64, chi: i64 },

    #[error("vector is not tangent to the surface at the given point (normal component {normal_component})")]
    NotTangent { normal_component: f64 },

    #[error("tensor does not annihilate the surface normal (|Q gamma| = {residual})")]
    NotAdmissible { residual: f64 },

    #[error("tensor norm {norm} is below tolerance; the direction is arbitrary")]
    DegenerateQ { norm: f64 },

    #[error("fractional seminorm estimator diverges under refinement ({values:?})")]
    NonIntegrableDatum { values: Vec<f64> },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("expression parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
