//! `geodiv` — drive recursive angle-division experiments on the built-in
//! surface gallery.
//!
//! Data (CSV traces, classification records) goes to stdout or `--out`;
//! human-readable summaries and errors go to stderr. Exit codes: 0 success,
//! 1 geometric or I/O failure, 2 the iteration hit its cap without
//! converging, 3 inconclusive classification, 4 Gauss-Bonnet residual above
//! threshold.

mod config;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Error};
use clap::{Args, Parser, Subcommand};

use geodiv::surface::gallery;
use geodiv::{classify_point, ChartPoint, GeodesicTriangle, GeodivError};

use config::{fmt_float, ClassifyOverrides, GbcheckOverrides, RunOverrides};

/// Threshold on |∬K dA - angle excess| above which `gbcheck` fails.
const GB_RESIDUAL_LIMIT: f64 = 1e-5;

#[derive(Parser)]
#[command(
    name = "geodiv",
    version,
    about = "Recursive angle division on geodesic triangles of regular surfaces"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Iterate the division scheme and emit the per-step trace as CSV.
    Run(RunArgs),
    /// Classify a point as elliptic/parabolic/hyperbolic from its limit pair.
    Classify(ClassifyArgs),
    /// Verify Gauss-Bonnet on one geodesic triangle.
    Gbcheck(GbcheckArgs),
    /// List the built-in surfaces, or describe one in detail.
    Gallery(GalleryArgs),
}

/// Shape overrides shared by every surface-taking subcommand. Each applies
/// only to the surfaces that have that parameter.
#[derive(Args, Debug, Default)]
struct ShapeArgs {
    /// Radius of the sphere or cylinder.
    #[arg(long)]
    radius: Option<f64>,
    /// Torus center-circle radius.
    #[arg(long)]
    major: Option<f64>,
    /// Torus tube radius.
    #[arg(long)]
    minor: Option<f64>,
    /// Ellipsoid semi-axis along x.
    #[arg(long)]
    semi_a: Option<f64>,
    /// Ellipsoid semi-axis along y.
    #[arg(long)]
    semi_b: Option<f64>,
    /// Ellipsoid semi-axis along z.
    #[arg(long)]
    semi_c: Option<f64>,
}

impl ShapeArgs {
    fn to_params(&self) -> config::ShapeParams {
        config::ShapeParams {
            radius: self.radius,
            major: self.major,
            minor: self.minor,
            semi_a: self.semi_a,
            semi_b: self.semi_b,
            semi_c: self.semi_c,
        }
    }
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Config file of `key = value` lines; every flag below has a config key
    /// of the same name, and flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Surface id from the gallery.
    #[arg(long)]
    surface: Option<String>,
    #[command(flatten)]
    shape: ShapeArgs,
    /// Vertex u-coordinate (default: domain center).
    #[arg(long)]
    vertex_u: Option<f64>,
    /// Vertex v-coordinate (default: domain center).
    #[arg(long)]
    vertex_v: Option<f64>,
    /// Chart u-component of the first ray's direction.
    #[arg(long)]
    ray_du: Option<f64>,
    /// Chart v-component of the first ray's direction.
    #[arg(long)]
    ray_dv: Option<f64>,
    /// Vertex angle in radians, in (0, pi). Default pi/2.
    #[arg(long)]
    mu: Option<f64>,
    /// Arclength of the first transversal foot from the vertex. Default 0.25.
    #[arg(long)]
    a1: Option<f64>,
    /// Initial angle at the first foot, in radians. Default pi/4.
    #[arg(long)]
    alpha1: Option<f64>,
    /// Geodesic integration step in arclength. Default a1/1000.
    #[arg(long)]
    step: Option<f64>,
    /// Iteration cap. Default 200.
    #[arg(long)]
    max_iters: Option<usize>,
    /// Stop once successive alpha and beta both move less than this.
    /// Default 1e-10.
    #[arg(long)]
    conv_tol: Option<f64>,
    /// Constant division weight at the A-feet.
    #[arg(long)]
    p_const: Option<f64>,
    /// Constant division weight at the B-feet.
    #[arg(long)]
    q_const: Option<f64>,
    /// Named weight mode: `bisection` or `corollary2`.
    #[arg(long)]
    pq: Option<String>,
    /// Write the CSV trace here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the fully resolved config and exit without running.
    #[arg(long)]
    dump_config: bool,
}

#[derive(Args, Debug)]
struct ClassifyArgs {
    /// Config file of `key = value` lines; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Surface id from the gallery.
    #[arg(long)]
    surface: Option<String>,
    #[command(flatten)]
    shape: ShapeArgs,
    /// u-coordinate of the point to classify.
    #[arg(long)]
    u: Option<f64>,
    /// v-coordinate of the point to classify.
    #[arg(long)]
    v: Option<f64>,
    /// Vertex angle in radians. Default pi/2.
    #[arg(long)]
    mu: Option<f64>,
    /// Also run the scheme numerically and classify from its limits.
    #[arg(long)]
    empirical: bool,
    /// Empirical run: first transversal arclength. Default 0.1.
    #[arg(long)]
    a1: Option<f64>,
    /// Empirical run: initial angle. Default pi/4.
    #[arg(long)]
    alpha1: Option<f64>,
    /// Empirical run: integration step. Default 1e-4.
    #[arg(long)]
    step: Option<f64>,
    /// Empirical run: convergence tolerance. Default 1e-8.
    #[arg(long)]
    conv_tol: Option<f64>,
    /// Empirical run: iteration cap. Default 200.
    #[arg(long)]
    max_iters: Option<usize>,
    /// Empirical run: chart u-component of the first ray.
    #[arg(long)]
    ray_du: Option<f64>,
    /// Empirical run: chart v-component of the first ray.
    #[arg(long)]
    ray_dv: Option<f64>,
    /// Write the CSV record here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GbcheckArgs {
    /// Config file of `key = value` lines; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Surface id from the gallery.
    #[arg(long)]
    surface: Option<String>,
    #[command(flatten)]
    shape: ShapeArgs,
    /// First vertex.
    #[arg(long)]
    u1: Option<f64>,
    #[arg(long)]
    v1: Option<f64>,
    /// Second vertex.
    #[arg(long)]
    u2: Option<f64>,
    #[arg(long)]
    v2: Option<f64>,
    /// Third vertex.
    #[arg(long)]
    u3: Option<f64>,
    #[arg(long)]
    v3: Option<f64>,
    /// Geodesic integration step. Default 2.5e-4.
    #[arg(long)]
    step: Option<f64>,
}

#[derive(Args, Debug)]
struct GalleryArgs {
    /// Describe this surface instead of listing all of them.
    #[arg(long)]
    surface: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.cmd {
        Cmd::Run(a) => cmd_run(&a),
        Cmd::Classify(a) => cmd_classify(&a),
        Cmd::Gbcheck(a) => cmd_gbcheck(&a),
        Cmd::Gallery(a) => cmd_gallery(&a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

/// Map library errors onto the documented exit codes; anything not covered
/// by a dedicated code is a plain failure.
fn exit_code_for(e: &Error) -> u8 {
    match e.downcast_ref::<GeodivError>() {
        Some(GeodivError::NoConvergence { .. }) => 2,
        Some(GeodivError::InconclusiveClassification { .. }) => 3,
        _ => 1,
    }
}

fn read_config(path: &Option<PathBuf>) -> anyhow::Result<Option<String>> {
    match path {
        None => Ok(None),
        Some(p) => Ok(Some(
            fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?,
        )),
    }
}

/// Write `text` to `--out` or stdout.
fn emit(out: &Option<PathBuf>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display()))?,
        None => {
            let stdout = std::io::stdout();
            stdout.lock().write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

fn cmd_run(args: &RunArgs) -> anyhow::Result<u8> {
    let file_text = read_config(&args.config)?;
    let over = RunOverrides {
        surface: args.surface.clone(),
        shape: args.shape.to_params(),
        vertex_u: args.vertex_u,
        vertex_v: args.vertex_v,
        ray_du: args.ray_du,
        ray_dv: args.ray_dv,
        mu: args.mu,
        a1: args.a1,
        alpha1: args.alpha1,
        step: args.step,
        max_iters: args.max_iters,
        conv_tol: args.conv_tol,
        p_const: args.p_const,
        q_const: args.q_const,
        pq: args.pq.clone(),
    };
    let spec = config::RunSpec::resolve(file_text.as_deref(), &over).map_err(Error::msg)?;
    if args.dump_config {
        emit(&args.out, &spec.to_config_string())?;
        return Ok(0);
    }
    let (surface, cfg, div) = spec.build().map_err(Error::msg)?;
    let trace = cfg.run(&div)?;

    emit(&args.out, &trace.to_csv_string())?;

    let (r1, r2) = trace.max_residuals();
    let (fa, fb) = (trace.final_alpha(), trace.final_beta());
    eprintln!("surface: {}  divisions: {}", surface.name(), div.label());
    eprintln!(
        "vertex: ({}, {})  mu = {}",
        fmt_float(spec.vertex.0),
        fmt_float(spec.vertex.1),
        fmt_float(spec.mu)
    );
    eprintln!(
        "p(V) = {}  q(V) = {}  rho = {}",
        fmt_float(trace.p_at_v),
        fmt_float(trace.q_at_v),
        fmt_float(trace.rho)
    );
    eprintln!(
        "theoretical limits: alpha = {}  beta = {}",
        fmt_float(trace.alpha_limit),
        fmt_float(trace.beta_limit)
    );
    eprintln!(
        "empirical limits:   alpha = {}  beta = {}",
        fmt_float(fa),
        fmt_float(fb)
    );
    eprintln!(
        "limit gaps: alpha {:.3e}  beta {:.3e}",
        (fa - trace.alpha_limit).abs(),
        (fb - trace.beta_limit).abs()
    );
    eprintln!("max recurrence residuals: {:.3e}  {:.3e}", r1, r2);
    let iters = trace.steps.len().saturating_sub(1);
    if trace.converged {
        eprintln!("converged after {iters} iterations");
        Ok(0)
    } else {
        eprintln!("no convergence within {iters} iterations");
        Ok(2)
    }
}

fn cmd_classify(args: &ClassifyArgs) -> anyhow::Result<u8> {
    let file_text = read_config(&args.config)?;
    let over = ClassifyOverrides {
        surface: args.surface.clone(),
        shape: args.shape.to_params(),
        u: args.u,
        v: args.v,
        mu: args.mu,
        empirical: args.empirical,
        a1: args.a1,
        alpha1: args.alpha1,
        step: args.step,
        conv_tol: args.conv_tol,
        max_iters: args.max_iters,
        ray_du: args.ray_du,
        ray_dv: args.ray_dv,
    };
    let spec = config::ClassifySpec::resolve(file_text.as_deref(), &over).map_err(Error::msg)?;
    let surface = config::build_surface(&spec.surface_id, &spec.shape).map_err(Error::msg)?;
    let empirical = spec.empirical.then_some(geodiv::EmpiricalParams {
        a1: spec.a1,
        alpha1: spec.alpha1,
        step: spec.step,
        conv_tol: spec.conv_tol,
        max_iters: spec.max_iters,
        ray_dir: spec.ray_dir,
    });
    let record = classify_point(&surface, spec.u, spec.v, spec.mu, empirical.as_ref())?;

    let mut csv = Vec::new();
    geodiv::classifier::write_records_csv(std::slice::from_ref(&record), &mut csv)?;
    emit(&args.out, std::str::from_utf8(&csv).expect("ascii csv"))?;

    eprintln!(
        "{} at ({}, {}): K = {}  ->  {}",
        record.surface,
        fmt_float(record.u),
        fmt_float(record.v),
        fmt_float(record.curvature.k),
        record.kind_limits
    );
    Ok(0)
}

fn cmd_gbcheck(args: &GbcheckArgs) -> anyhow::Result<u8> {
    let file_text = read_config(&args.config)?;
    let over = GbcheckOverrides {
        surface: args.surface.clone(),
        shape: args.shape.to_params(),
        coords: [args.u1, args.v1, args.u2, args.v2, args.u3, args.v3],
        step: args.step,
    };
    let spec = config::GbcheckSpec::resolve(file_text.as_deref(), &over).map_err(Error::msg)?;
    let surface = config::build_surface(&spec.surface_id, &spec.shape).map_err(Error::msg)?;
    let [a, b, c] = spec.vertices;
    let tri = GeodesicTriangle::connect(
        &surface,
        ChartPoint::new(a.0, a.1),
        ChartPoint::new(b.0, b.1),
        ChartPoint::new(c.0, c.1),
        spec.step,
    )?;
    let integral = tri.curvature_integral()?;
    let excess = tri.angle_excess();
    let residual = (integral - excess).abs();
    println!("curvature_integral = {}", fmt_float(integral));
    println!("angle_excess = {}", fmt_float(excess));
    println!("residual = {}", fmt_float(residual));
    if residual < GB_RESIDUAL_LIMIT {
        Ok(0)
    } else {
        eprintln!("Gauss-Bonnet residual {residual:.3e} exceeds {GB_RESIDUAL_LIMIT:.1e}");
        Ok(4)
    }
}

/// One-line curvature character per gallery surface, keyed by id.
fn curvature_blurb(name: &str) -> &'static str {
    match name {
        "plane" => "K = 0 everywhere",
        "sphere" => "K = 1/R^2 > 0 everywhere, umbilic",
        "cylinder" => "K = 0 everywhere (k1 = 0, k2 = -1/R)",
        "torus" => {
            "K = cos(u)/(r(R + r cos(u))): > 0 outside, < 0 inside, 0 on the top/bottom circles"
        }
        "saddle" => "K = -4/(1 + 4u^2 + 4v^2)^2 < 0 everywhere",
        "ellipsoid" => "K > 0 everywhere",
        "monkey-saddle" => {
            "K = -36(u^2 + v^2)/(1 + 9(u^2 + v^2)^2)^2 <= 0, flat only at the origin"
        }
        _ => "",
    }
}

fn shape_blurb(name: &str) -> String {
    match name {
        "sphere" => format!("radius R = {} (--radius)", gallery::SPHERE_RADIUS),
        "cylinder" => format!("radius R = {} (--radius)", gallery::CYLINDER_RADIUS),
        "torus" => format!(
            "center-circle R = {} (--major), tube r = {} (--minor)",
            gallery::TORUS_MAJOR,
            gallery::TORUS_MINOR
        ),
        "ellipsoid" => {
            let (a, b, c) = gallery::ELLIPSOID_SEMI_AXES;
            format!("semi-axes ({a}, {b}, {c}) (--semi-a/b/c)")
        }
        _ => "no shape parameters".to_string(),
    }
}

fn cmd_gallery(args: &GalleryArgs) -> anyhow::Result<u8> {
    match &args.surface {
        None => {
            for (name, blurb) in gallery::NAMES.iter().zip(gallery::DESCRIPTIONS) {
                println!("{name}: {blurb}");
            }
            Ok(0)
        }
        Some(name) => {
            let surface = gallery::by_name(name)?;
            let idx = gallery::NAMES
                .iter()
                .position(|n| *n == surface.name())
                .expect("gallery surface is listed");
            let d = surface.domain();
            println!("{}: {}", surface.name(), gallery::DESCRIPTIONS[idx]);
            println!("shape: {}", shape_blurb(surface.name()));
            println!(
                "domain: u in ({}, {}), v in ({}, {})",
                d.u_min, d.u_max, d.v_min, d.v_max
            );
            println!("curvature: {}", curvature_blurb(surface.name()));
            let (cu, cv) = d.center();
            let c = surface.curvature(cu, cv)?;
            println!(
                "at the domain center ({cu}, {cv}): K = {}, k1 = {}, k2 = {}",
                fmt_float(c.k),
                fmt_float(c.k1),
                fmt_float(c.k2)
            );
            Ok(0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use anyhow::anyhow;

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn every_gallery_surface_has_blurbs() {
        for name in gallery::NAMES {
            assert!(
                !curvature_blurb(name).is_empty(),
                "missing blurb for {name}"
            );
            assert!(!shape_blurb(name).is_empty());
        }
    }

    #[test]
    fn exit_codes_follow_the_error_kind() {
        let e = Error::new(GeodivError::NoConvergence { iterations: 7 });
        assert_eq!(exit_code_for(&e), 2);
        let e = Error::new(GeodivError::InconclusiveClassification {
            alpha: 0.3,
            beta: 0.3,
        });
        assert_eq!(exit_code_for(&e), 3);
        let e = Error::new(GeodivError::NonSimplePolygon);
        assert_eq!(exit_code_for(&e), 1);
        let e = anyhow!("plain");
        assert_eq!(exit_code_for(&e), 1);
    }
}
