//! Command-line front end: index certificates, averaged-index grids,
//! boundary-datum extensions, and line-field verdicts on catalog surfaces.
//!
//! Exit codes: 0 success, 2 topological obstruction, 3 numerical
//! certification failure, 4 configuration error.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use vmoidx::error::Error;
use vmoidx::extension::extend_boundary_datum;
use vmoidx::fields::{catalog_field, BoundaryDatum, TangentField, ZeroFindParams};
use vmoidx::geometry::Surface;
use vmoidx::index::morse_check;
use vmoidx::qtensor::{generating_loops, orientability_check, vmo_linefield_obstruction, LineField};
use vmoidx::report::{
    field_from_csv, field_samples_csv, qfield_csv, vmo_diagnostics_csv, write_json, write_text,
    RunReport,
};
use vmoidx::vmo::{default_eps_grid, vmo_index};

#[derive(Parser)]
#[command(
    name = "vmoidx",
    version,
    about = "Index certificates for tangent fields, boundary data, and line fields on surfaces"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Zero set, total index, inward boundary index, and Morse residual.
    Index(CommonOpts),
    /// Averaged index over a shrinking radius grid, with constancy
    /// certificate and convergence diagnostics.
    VmoIndex(CommonOpts),
    /// Nowhere-vanishing extension of a boundary datum, or its topological
    /// obstruction.
    Extend(CommonOpts),
    /// Line-field orientability, holonomy, and existence verdict.
    Linefield(CommonOpts),
    /// Condensed built-in verification suite.
    Selftest(CommonOpts),
}

#[derive(Args, Default, Clone)]
struct CommonOpts {
    /// Catalog surface name (disk, annulus, sphere, torus) or a path to a
    /// key=value surface description.
    #[arg(long)]
    surface: Option<String>,
    /// Catalog field name, `ex;ey;ez` ambient expressions over x,y,z, or a
    /// path to a CSV sample table.
    #[arg(long)]
    field: Option<String>,
    /// Boundary datum: `trace:<field>` or per-curve
    /// `tangential;conormal` expressions over theta, curves joined by `|`.
    #[arg(long)]
    datum: Option<String>,
    /// Comma-separated strictly decreasing radii in (0, r0].
    #[arg(long, value_name = "E1,E2,...")]
    eps_grid: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Convergence threshold for the zero finder.
    #[arg(long)]
    tol_zero: Option<f64>,
    /// Nondegeneracy threshold on the chart Jacobian determinant.
    #[arg(long)]
    tol_jac: Option<f64>,
    /// Output directory for JSON reports and CSV tables.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Named experiment: figure1-a/b/c, figure2-n0/n1, sphere-rotation,
    /// torus-coordinate, disk-hedgehog, annulus-angular.
    #[arg(long)]
    preset: Option<String>,
    /// key=value file mirroring the flags; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Effective configuration after merging defaults, config file, preset,
/// and flags (in increasing precedence).
struct RunConfig {
    surface: String,
    field: Option<String>,
    datum: Option<String>,
    eps_grid: Option<Vec<f64>>,
    seed: u64,
    tol_zero: f64,
    tol_jac: f64,
    out: PathBuf,
    preset: Option<String>,
}

impl RunConfig {
    fn echo(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("surface".into(), self.surface.clone());
        if let Some(f) = &self.field {
            m.insert("field".into(), f.clone());
        }
        if let Some(d) = &self.datum {
            m.insert("datum".into(), d.clone());
        }
        if let Some(g) = &self.eps_grid {
            m.insert(
                "eps_grid".into(),
                g.iter().map(|e| format!("{e}")).collect::<Vec<_>>().join(","),
            );
        }
        m.insert("seed".into(), self.seed.to_string());
        m.insert("tol_zero".into(), format!("{}", self.tol_zero));
        m.insert("tol_jac".into(), format!("{}", self.tol_jac));
        m.insert("out".into(), self.out.display().to_string());
        if let Some(p) = &self.preset {
            m.insert("preset".into(), p.clone());
        }
        m
    }

    fn params(&self) -> ZeroFindParams {
        ZeroFindParams {
            zero_tol: self.tol_zero,
            jac_tol: self.tol_jac,
            ..Default::default()
        }
    }
}

fn preset_values(name: &str) -> Result<Vec<(&'static str, &'static str)>, Error> {
    Ok(match name {
        // Figure-style disk fields: (ind, ind_minus) = (0,1), (1,0), (-1,2).
        "figure1-a" => vec![("surface", "disk"), ("field", "vertical"), ("datum", "trace:vertical")],
        "figure1-b" => vec![("surface", "disk"), ("field", "rotation"), ("datum", "trace:rotation")],
        "figure1-c" => vec![("surface", "disk"), ("field", "hyperbolic"), ("datum", "trace:hyperbolic")],
        // Half-twist torus line fields (non-orientable).
        "figure2-n0" => vec![("surface", "torus"), ("field", "linefield:n0")],
        "figure2-n1" => vec![("surface", "torus"), ("field", "linefield:n1")],
        "sphere-rotation" => vec![("surface", "sphere"), ("field", "rotation-z")],
        "torus-coordinate" => vec![("surface", "torus"), ("field", "angular")],
        "disk-hedgehog" => vec![("surface", "disk"), ("field", "hedgehog")],
        "annulus-angular" => vec![("surface", "annulus"), ("field", "rotation"), ("datum", "trace:rotation")],
        other => return Err(Error::Config(format!("unknown preset `{other}`"))),
    })
}

fn resolve_config(opts: &CommonOpts) -> Result<RunConfig, Error> {
    let mut kv: BTreeMap<String, String> = BTreeMap::new();
    if let Some(path) = &opts.config {
        let text = std::fs::read_to_string(path)?;
        for (k, v) in vmoidx::geometry::parse_key_values(&text)? {
            kv.insert(k, v);
        }
    }
    let preset = opts.preset.clone().or_else(|| kv.get("preset").cloned());
    if let Some(p) = &preset {
        for (k, v) in preset_values(p)? {
            kv.entry(k.to_string()).or_insert_with(|| v.to_string());
        }
    }
    let pick = |flag: &Option<String>, key: &str| flag.clone().or_else(|| kv.get(key).cloned());

    let surface = pick(&opts.surface, "surface")
        .ok_or_else(|| Error::Config("no surface given (use --surface or --preset)".into()))?;
    let field = pick(&opts.field, "field");
    let datum = pick(&opts.datum, "datum");
    let eps_grid = match pick(&opts.eps_grid.clone(), "eps_grid") {
        Some(text) => {
            let mut grid = Vec::new();
            for part in text.split(',') {
                grid.push(
                    part.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Config(format!("bad radius `{part}` in eps grid")))?,
                );
            }
            Some(grid)
        }
        None => None,
    };
    let parse_num = |flag: Option<f64>, key: &str, default: f64| -> Result<f64, Error> {
        if let Some(v) = flag {
            return Ok(v);
        }
        match kv.get(key) {
            Some(t) => t
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("bad number for {key}: `{t}`"))),
            None => Ok(default),
        }
    };
    let defaults = ZeroFindParams::default();
    let tol_zero = parse_num(opts.tol_zero, "tol_zero", defaults.zero_tol)?;
    let tol_jac = parse_num(opts.tol_jac, "tol_jac", defaults.jac_tol)?;
    if tol_zero <= 0.0 || tol_jac <= 0.0 {
        return Err(Error::Config("tolerances must be positive".into()));
    }
    let seed = match opts.seed {
        Some(s) => s,
        None => match kv.get("seed") {
            Some(t) => t
                .parse::<u64>()
                .map_err(|_| Error::Config(format!("bad seed `{t}`")))?,
            None => 0,
        },
    };
    let out = opts
        .out
        .clone()
        .or_else(|| kv.get("out").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    Ok(RunConfig { surface, field, datum, eps_grid, seed, tol_zero, tol_jac, out, preset })
}

fn resolve_surface(name: &str) -> Result<Surface, Error> {
    if Path::new(name).is_file() {
        let text = std::fs::read_to_string(name)?;
        return Surface::from_config(&text);
    }
    Surface::by_name(name)
}

fn resolve_field(s: &Surface, spec: &str) -> Result<TangentField, Error> {
    if spec.contains(';') {
        let parts: Vec<&str> = spec.split(';').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(Error::Config(format!(
                "field expressions need exactly 3 components, got {}",
                parts.len()
            )));
        }
        return TangentField::from_exprs("custom", parts[0], parts[1], parts[2]);
    }
    if Path::new(spec).is_file() {
        let text = std::fs::read_to_string(spec)?;
        return field_from_csv("csv-field", &text);
    }
    catalog_field(s, spec)
}

fn resolve_datum(s: &Surface, spec: &str) -> Result<BoundaryDatum, Error> {
    if let Some(field_spec) = spec.strip_prefix("trace:") {
        let f = resolve_field(s, field_spec)?;
        return Ok(BoundaryDatum::trace(&f));
    }
    let mut pairs = Vec::new();
    for curve_spec in spec.split('|') {
        let parts: Vec<&str> = curve_spec.split(';').map(str::trim).collect();
        if parts.len() != 2 {
            return Err(Error::Config(
                "datum expressions need `tangential;conormal` per curve".into(),
            ));
        }
        pairs.push((parts[0], parts[1]));
    }
    if pairs.len() != s.boundary.len() {
        return Err(Error::Config(format!(
            "datum gives {} curves but the surface has {}",
            pairs.len(),
            s.boundary.len()
        )));
    }
    BoundaryDatum::from_exprs("custom-datum", &pairs)
}

fn resolve_eps_grid(s: &Surface, cfg: &RunConfig) -> Result<Vec<f64>, Error> {
    let grid = cfg.eps_grid.clone().unwrap_or_else(|| default_eps_grid(s.r0));
    if grid.len() < 2 {
        return Err(Error::Config("eps grid needs at least 2 radii".into()));
    }
    for w in grid.windows(2) {
        if w[1] >= w[0] {
            return Err(Error::Config("eps grid must be strictly decreasing".into()));
        }
    }
    if grid[0] > s.r0 || *grid.last().unwrap() <= 0.0 {
        return Err(Error::Config(format!("eps grid must lie in (0, {}]", s.r0)));
    }
    Ok(grid)
}

fn finish(cfg: &RunConfig, command: &str, started: Instant, results: &impl Serialize) -> Result<(), Error> {
    let report = RunReport::new(command, cfg.echo(), started.elapsed().as_millis(), results)?;
    write_json(&cfg.out.join("report.json"), &report)?;
    Ok(())
}

fn cmd_index(opts: &CommonOpts) -> Result<(), Error> {
    let started = Instant::now();
    let cfg = resolve_config(opts)?;
    let s = resolve_surface(&cfg.surface)?;
    let spec = cfg
        .field
        .clone()
        .ok_or_else(|| Error::Config("index needs --field".into()))?;
    let f = resolve_field(&s, &spec)?;
    let report = morse_check(&s, &f, &cfg.params(), cfg.seed)?;
    write_text(&cfg.out.join("field_samples.csv"), &field_samples_csv(&s, &f, 96))?;
    finish(&cfg, "index", started, &report)?;
    println!(
        "{} / {}: ind {} ind_minus {} chi {} residual {}",
        report.surface, report.field, report.ind, report.ind_minus, report.chi, report.morse_residual
    );
    if report.morse_residual != 0 {
        return Err(Error::NotConstantOverGrid {
            values: vec![(report.ind, report.ind_minus)],
        });
    }
    Ok(())
}

fn cmd_vmo_index(opts: &CommonOpts) -> Result<(), Error> {
    let started = Instant::now();
    let cfg = resolve_config(opts)?;
    let s = resolve_surface(&cfg.surface)?;
    let spec = cfg
        .field
        .clone()
        .ok_or_else(|| Error::Config("vmo-index needs --field".into()))?;
    let f = resolve_field(&s, &spec)?;
    let grid = resolve_eps_grid(&s, &cfg)?;
    let tail = 4.min(grid.len());
    let report = vmo_index(&s, &f, &grid, tail, &cfg.params())?;
    write_text(&cfg.out.join("diagnostics.csv"), &vmo_diagnostics_csv(&s, &f, &report)?)?;
    write_text(&cfg.out.join("field_samples.csv"), &field_samples_csv(&s, &f, 96))?;
    finish(&cfg, "vmo-index", started, &report)?;
    println!(
        "{} / {}: ind {} ind_minus {} chi {} certified over last {} radii",
        report.surface, report.field, report.ind, report.ind_minus, report.chi, report.certified_tail
    );
    Ok(())
}

fn cmd_extend(opts: &CommonOpts) -> Result<(), Error> {
    let started = Instant::now();
    let cfg = resolve_config(opts)?;
    let s = resolve_surface(&cfg.surface)?;
    let spec = cfg
        .datum
        .clone()
        .ok_or_else(|| Error::Config("extend needs --datum".into()))?;
    let g = resolve_datum(&s, &spec)?;
    let (v, report) = extend_boundary_datum(&s, &g, &cfg.params(), cfg.seed)?;
    write_text(&cfg.out.join("extended_field.csv"), &field_samples_csv(&s, &v, 128))?;
    finish(&cfg, "extend", started, &report)?;
    println!(
        "{} / {}: extension with |v| in [{:.6}, {:.6}], {} zeros cancelled, trace mismatch {:.2e}",
        report.surface,
        report.datum,
        report.min_norm,
        report.max_norm,
        report.zeros_cancelled,
        report.boundary_mismatch
    );
    Ok(())
}

#[derive(Serialize)]
struct LinefieldResults {
    holonomy: vmoidx::qtensor::HolonomyReport,
    verdict: vmoidx::qtensor::LinefieldVerdict,
}

fn resolve_linefield(s: &Surface, spec: &str) -> Result<LineField, Error> {
    if let Some(rest) = spec.strip_prefix("linefield:n") {
        let i: usize = rest
            .parse()
            .map_err(|_| Error::Config(format!("bad line-field preset `{spec}`")))?;
        return Ok(LineField::torus_half_twist(i));
    }
    Ok(LineField::from_vector_field(&resolve_field(s, spec)?))
}

fn cmd_linefield(opts: &CommonOpts) -> Result<(), Error> {
    let started = Instant::now();
    let cfg = resolve_config(opts)?;
    let s = resolve_surface(&cfg.surface)?;
    if !s.is_closed() {
        return Err(Error::Config("line-field analysis runs on closed surfaces".into()));
    }
    let spec = cfg
        .field
        .clone()
        .ok_or_else(|| Error::Config("linefield needs --field".into()))?;
    let l = resolve_linefield(&s, &spec)?;
    let grid = resolve_eps_grid(&s, &cfg)?;
    let holonomy = orientability_check(&s, &l, &generating_loops(&s))?;
    let verdict = vmo_linefield_obstruction(&s, &l.q, &grid);
    write_text(&cfg.out.join("qfield.csv"), &qfield_csv(&s, &l.q, 96))?;
    let obstructed = verdict.verdict == "topological-obstruction";
    let results = LinefieldResults { holonomy, verdict };
    finish(&cfg, "linefield", started, &results)?;
    println!(
        "{} / {}: orientable {} verdict {}",
        s.name, results.verdict.field, results.holonomy.orientable, results.verdict.verdict
    );
    if obstructed {
        return Err(Error::TopologicalObstruction {
            ind_minus: 0,
            chi: results.verdict.chi,
        });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Selftest
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct SelftestResults {
    checks: Vec<(String, bool, String)>,
    passed: usize,
    failed: usize,
}

fn selftest_checks(seed: u64) -> Vec<(String, Result<String, String>)> {
    let params = ZeroFindParams { grid: 32, ..Default::default() };
    let mut out: Vec<(String, Result<String, String>)> = Vec::new();
    let mut push = |name: &str, r: Result<String, String>| out.push((name.to_string(), r));

    // Disk triple: (ind, ind_minus) for the three standard fields.
    {
        let d = Surface::disk();
        let mut r = Ok(String::new());
        for (name, want) in [("vertical", (0, 1)), ("rotation", (1, 0)), ("hyperbolic", (-1, 2))] {
            let f = catalog_field(&d, name).unwrap();
            match morse_check(&d, &f, &params, seed) {
                Ok(rep) if (rep.ind, rep.ind_minus) == want && rep.morse_residual == 0 => {}
                Ok(rep) => {
                    r = Err(format!("{name}: got ({}, {})", rep.ind, rep.ind_minus));
                    break;
                }
                Err(e) => {
                    r = Err(format!("{name}: {e}"));
                    break;
                }
            }
        }
        push("disk-index-triple", r.map(|_| "(0,1) (1,0) (-1,2)".into()));
    }

    // Closed surfaces: total index equals the Euler characteristic.
    for (sname, fname, want) in [("sphere", "rotation-z", 2i64), ("torus", "angular", 0)] {
        let s = Surface::by_name(sname).unwrap();
        let f = catalog_field(&s, fname).unwrap();
        let r = match morse_check(&s, &f, &params, seed) {
            Ok(rep) if rep.ind == want => Ok(format!("ind {} = chi", rep.ind)),
            Ok(rep) => Err(format!("ind {} != {want}", rep.ind)),
            Err(e) => Err(e.to_string()),
        };
        push(&format!("{sname}-poincare-hopf"), r);
    }

    // Curvature integral against the Euler characteristic.
    for (sname, want) in [("sphere", 1.0), ("torus", 0.0)] {
        let s = Surface::by_name(sname).unwrap();
        let r = match s.gauss_bonnet_chi(vmoidx::geometry::QuadratureSpec::new(256)) {
            Ok(chi) => {
                let got = chi / 2.0;
                if (got - want).abs() < 1e-4 {
                    Ok(format!("{got:.6}"))
                } else {
                    Err(format!("{got:.6} != {want}"))
                }
            }
            Err(e) => Err(e.to_string()),
        };
        push(&format!("{sname}-curvature-integral"), r);
    }

    // Circle-map degrees: winding of z^k.
    {
        let mut r = Ok(String::new());
        for k in [-2i64, 1, 3] {
            let m = vmoidx::degree::SphereMap::circle(move |t: f64| {
                let a = k as f64 * t;
                vmoidx::linalg::Vec2::new(a.cos(), a.sin())
            });
            match vmoidx::degree::degree(&m, seed, &params) {
                Ok(d) if d == k => {}
                Ok(d) => {
                    r = Err(format!("z^{k}: degree {d}"));
                    break;
                }
                Err(e) => {
                    r = Err(format!("z^{k}: {e}"));
                    break;
                }
            }
        }
        push("circle-degrees", r.map(|_| "k in {-2, 1, 3}".into()));
    }

    // Averaged-index certificate agrees with the continuous index.
    {
        let d = Surface::disk();
        let f = catalog_field(&d, "rotation").unwrap();
        let p = ZeroFindParams { grid: 20, ..Default::default() };
        let grid = [0.25, 0.125, 0.0625, 0.03125];
        let r = match vmo_index(&d, &f, &grid, 2, &p) {
            Ok(rep) if (rep.ind, rep.ind_minus) == (1, 0) => Ok("(1, 0) certified".into()),
            Ok(rep) => Err(format!("got ({}, {})", rep.ind, rep.ind_minus)),
            Err(e) => Err(e.to_string()),
        };
        push("vmo-certificate", r);
    }

    // Obstruction detection for the tangential disk datum.
    {
        let d = Surface::disk();
        let g = BoundaryDatum::trace(&catalog_field(&d, "rotation").unwrap());
        let r = match extend_boundary_datum(&d, &g, &params, seed) {
            Err(Error::TopologicalObstruction { ind_minus, chi }) => {
                Ok(format!("ind_minus {ind_minus} != chi {chi}"))
            }
            Err(e) => Err(format!("wrong error: {e}")),
            Ok(_) => Err("extension should be obstructed".into()),
        };
        push("extension-obstruction", r);
    }

    // Q-tensor norm identity on random directors.
    {
        let t = Surface::torus();
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
        let mut worst = 0.0f64;
        for _ in 0..1000 {
            let p = t
                .point(
                    0,
                    rand::Rng::gen_range(&mut rng, 0.0..std::f64::consts::TAU),
                    rand::Rng::gen_range(&mut rng, 0.0..std::f64::consts::TAU),
                )
                .unwrap();
            let n = vmoidx::qtensor::random_tangent(&t, &p, &mut rng);
            let order: f64 = rand::Rng::gen_range(&mut rng, 0.0..2.0);
            let q = vmoidx::qtensor::q_from_director(&t, &p, n, order).unwrap();
            worst = worst.max((q.dot(&q) - order * order / 2.0).abs());
        }
        let r = if worst < 1e-12 { Ok(format!("max error {worst:.2e}")) } else { Err(format!("max error {worst:.2e}")) };
        push("q-norm-identity", r);
    }

    // Half-twist torus fields are non-orientable along the phi-loop.
    {
        let t = Surface::torus();
        let loops = generating_loops(&t);
        let mut r = Ok(String::new());
        for i in [0usize, 1] {
            let l = LineField::torus_half_twist(i);
            match orientability_check(&t, &l, &loops) {
                Ok(rep) if !rep.orientable => {}
                Ok(_) => {
                    r = Err(format!("n{i} reported orientable"));
                    break;
                }
                Err(e) => {
                    r = Err(format!("n{i}: {e}"));
                    break;
                }
            }
        }
        push("torus-half-twist-holonomy", r.map(|_| "phi-loop holonomy -1".into()));
    }

    // Boundary density ratio of the reflected collar.
    {
        let d = Surface::disk();
        let r = match vmoidx::vmo::boundary_density_check(&d, 0, 1.0, &[0.2, 0.1], 48) {
            Ok(ratios) => {
                let worst = ratios
                    .iter()
                    .map(|(_, r)| (r - 0.5).abs())
                    .fold(0.0f64, f64::max);
                if worst < 1e-6 {
                    Ok(format!("max |ratio - 1/2| = {worst:.2e}"))
                } else {
                    Err(format!("max |ratio - 1/2| = {worst:.2e}"))
                }
            }
            Err(e) => Err(e.to_string()),
        };
        push("boundary-density-half", r);
    }

    out
}

fn cmd_selftest(opts: &CommonOpts) -> Result<(), Error> {
    let started = Instant::now();
    let cfg = resolve_config(&CommonOpts {
        surface: Some(opts.surface.clone().unwrap_or_else(|| "disk".into())),
        ..opts.clone()
    })?;
    let mut checks = Vec::new();
    let mut failed = 0usize;
    for (name, result) in selftest_checks(cfg.seed) {
        match result {
            Ok(note) => {
                println!("PASS {name}: {note}");
                checks.push((name, true, note));
            }
            Err(note) => {
                println!("FAIL {name}: {note}");
                checks.push((name, false, note));
                failed += 1;
            }
        }
    }
    let results = SelftestResults { passed: checks.len() - failed, failed, checks };
    finish(&cfg, "selftest", started, &results)?;
    println!("selftest: {} passed, {} failed", results.passed, results.failed);
    if failed > 0 {
        return Err(Error::NotConstantOverGrid { values: vec![] });
    }
    Ok(())
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::TopologicalObstruction { .. } => 2,
        Error::Config(_) | Error::Parse(_) | Error::Io(_) => 4,
        _ => 3,
    }
}

fn configure_threads() -> Result<(), Error> {
    if let Ok(text) = std::env::var("VMOIDX_THREADS") {
        let n: usize = text
            .parse()
            .map_err(|_| Error::Config(format!("VMOIDX_THREADS must be a positive integer, got `{text}`")))?;
        if n == 0 {
            return Err(Error::Config("VMOIDX_THREADS must be positive".into()));
        }
        #[cfg(feature = "parallel")]
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        #[cfg(not(feature = "parallel"))]
        let _ = n;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 4,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let run = || -> Result<(), Error> {
        configure_threads()?;
        match &cli.cmd {
            Cmd::Index(o) => cmd_index(o),
            Cmd::VmoIndex(o) => cmd_vmo_index(o),
            Cmd::Extend(o) => cmd_extend(o),
            Cmd::Linefield(o) => cmd_linefield(o),
            Cmd::Selftest(o) => cmd_selftest(o),
        }
    };
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
