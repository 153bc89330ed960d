//! Flat `key = value` experiment configs.
//!
//! One key per line, `#` starts a comment, keys mirror the long flag names
//! exactly. Flags override file values. [`RunSpec::to_config_string`] emits
//! floats with 17 significant digits so a dumped config reloads to the very
//! same spec.

use std::collections::BTreeMap;

use geodiv::surface::gallery;
use geodiv::{ChartPoint, DivisionFunctions, Surface, TriangleConfig};

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Parse config text into a key → value map. Duplicate keys and lines
/// without `=` are errors; values never contain `#`.
pub fn parse(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(format!("config line {}: expected `key = value`", idx + 1));
        };
        let (key, value) = (key.trim().to_string(), value.trim().to_string());
        if key.is_empty() || value.is_empty() {
            return Err(format!("config line {}: empty key or value", idx + 1));
        }
        if map.insert(key.clone(), value).is_some() {
            return Err(format!("config line {}: duplicate key `{key}`", idx + 1));
        }
    }
    Ok(map)
}

/// Typed accessors over the parsed map that track which keys were consumed,
/// so leftovers can be reported as unknown.
struct KeyReader {
    map: BTreeMap<String, String>,
}

impl KeyReader {
    fn take(&mut self, key: &str) -> Option<String> {
        self.map.remove(key)
    }

    fn take_f64(&mut self, key: &str) -> Result<Option<f64>, String> {
        match self.take(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<f64>()
                .map(Some)
                .map_err(|_| format!("config key `{key}`: `{v}` is not a number")),
        }
    }

    fn take_usize(&mut self, key: &str) -> Result<Option<usize>, String> {
        match self.take(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<usize>()
                .map(Some)
                .map_err(|_| format!("config key `{key}`: `{v}` is not a count")),
        }
    }

    fn finish(self) -> Result<(), String> {
        if self.map.is_empty() {
            Ok(())
        } else {
            let keys: Vec<&str> = self.map.keys().map(String::as_str).collect();
            Err(format!("unknown config keys: {}", keys.join(", ")))
        }
    }
}

/// Gallery surface choice with optional shape overrides.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ShapeParams {
    pub radius: Option<f64>,
    pub major: Option<f64>,
    pub minor: Option<f64>,
    pub semi_a: Option<f64>,
    pub semi_b: Option<f64>,
    pub semi_c: Option<f64>,
}

impl ShapeParams {
    fn reject_all_but(&self, id: &str, allowed: &[&str]) -> Result<(), String> {
        let fields = [
            ("radius", self.radius),
            ("major", self.major),
            ("minor", self.minor),
            ("semi-a", self.semi_a),
            ("semi-b", self.semi_b),
            ("semi-c", self.semi_c),
        ];
        for (name, value) in fields {
            if value.is_some() && !allowed.contains(&name) {
                return Err(format!("`{name}` does not apply to surface `{id}`"));
            }
        }
        Ok(())
    }
}

pub fn build_surface(id: &str, p: &ShapeParams) -> Result<Surface, String> {
    let positive = |name: &str, v: f64| {
        if v > 0.0 {
            Ok(v)
        } else {
            Err(format!("`{name}` must be positive, got {v}"))
        }
    };
    match id {
        "plane" => {
            p.reject_all_but(id, &[])?;
            Ok(gallery::plane())
        }
        "sphere" => {
            p.reject_all_but(id, &["radius"])?;
            let r = positive("radius", p.radius.unwrap_or(gallery::SPHERE_RADIUS))?;
            Ok(gallery::sphere(r))
        }
        "cylinder" => {
            p.reject_all_but(id, &["radius"])?;
            let r = positive("radius", p.radius.unwrap_or(gallery::CYLINDER_RADIUS))?;
            Ok(gallery::cylinder(r))
        }
        "torus" => {
            p.reject_all_but(id, &["major", "minor"])?;
            let big = positive("major", p.major.unwrap_or(gallery::TORUS_MAJOR))?;
            let small = positive("minor", p.minor.unwrap_or(gallery::TORUS_MINOR))?;
            if big <= small {
                return Err(format!("`major` must exceed `minor`, got {big} <= {small}"));
            }
            Ok(gallery::torus(big, small))
        }
        "saddle" => {
            p.reject_all_but(id, &[])?;
            Ok(gallery::saddle())
        }
        "ellipsoid" => {
            p.reject_all_but(id, &["semi-a", "semi-b", "semi-c"])?;
            let (da, db, dc) = gallery::ELLIPSOID_SEMI_AXES;
            let a = positive("semi-a", p.semi_a.unwrap_or(da))?;
            let b = positive("semi-b", p.semi_b.unwrap_or(db))?;
            let c = positive("semi-c", p.semi_c.unwrap_or(dc))?;
            Ok(gallery::ellipsoid(a, b, c))
        }
        "monkey-saddle" => {
            p.reject_all_but(id, &[])?;
            Ok(gallery::monkey_saddle())
        }
        other => Err(format!(
            "unknown surface `{other}` (expected one of: {})",
            gallery::NAMES.join(", ")
        )),
    }
}

/// Division-weight choice for a run.
#[derive(Debug, Clone, PartialEq)]
pub enum PqSpec {
    /// Constant weights; `bisection` is (1, 1).
    Const(f64, f64),
    /// Curvature-induced weights evaluated along the iteration.
    Corollary2,
}

impl PqSpec {
    pub fn divisions(&self, surface: &Surface) -> Result<DivisionFunctions, String> {
        match *self {
            PqSpec::Const(p, q) => DivisionFunctions::constant(p, q).map_err(|e| e.to_string()),
            PqSpec::Corollary2 => Ok(geodiv::classifier::division_functions(surface)),
        }
    }
}

/// A fully resolved run: every field concrete, round-trippable through the
/// config format.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub surface_id: String,
    pub shape: ShapeParams,
    pub vertex: (f64, f64),
    pub ray_dir: (f64, f64),
    pub mu: f64,
    pub a1: f64,
    pub alpha1: f64,
    pub step: f64,
    pub max_iters: usize,
    pub conv_tol: f64,
    pub pq: PqSpec,
}

/// Flag-level overrides for a run; `None` defers to the config file, then
/// to defaults.
#[derive(Debug, Clone, Default)]
pub struct RunOverrides {
    pub surface: Option<String>,
    pub shape: ShapeParams,
    pub vertex_u: Option<f64>,
    pub vertex_v: Option<f64>,
    pub ray_du: Option<f64>,
    pub ray_dv: Option<f64>,
    pub mu: Option<f64>,
    pub a1: Option<f64>,
    pub alpha1: Option<f64>,
    pub step: Option<f64>,
    pub max_iters: Option<usize>,
    pub conv_tol: Option<f64>,
    pub p_const: Option<f64>,
    pub q_const: Option<f64>,
    pub pq: Option<String>,
}

impl RunSpec {
    /// Merge config-file text (lowest precedence) with flag overrides and
    /// defaults into a concrete spec.
    pub fn resolve(file_text: Option<&str>, over: &RunOverrides) -> Result<RunSpec, String> {
        let mut file = KeyReader {
            map: match file_text {
                Some(t) => parse(t)?,
                None => BTreeMap::new(),
            },
        };

        let surface_id = over
            .surface
            .clone()
            .or_else(|| file.take("surface"))
            .ok_or("no surface given (use --surface or a config file)")?;
        let shape = ShapeParams {
            radius: over.shape.radius.or(file.take_f64("radius")?),
            major: over.shape.major.or(file.take_f64("major")?),
            minor: over.shape.minor.or(file.take_f64("minor")?),
            semi_a: over.shape.semi_a.or(file.take_f64("semi-a")?),
            semi_b: over.shape.semi_b.or(file.take_f64("semi-b")?),
            semi_c: over.shape.semi_c.or(file.take_f64("semi-c")?),
        };
        // The vertex default (domain center) needs the surface.
        let surface = build_surface(&surface_id, &shape)?;
        let center = surface.domain().center();
        let vertex = (
            over.vertex_u
                .or(file.take_f64("vertex-u")?)
                .unwrap_or(center.0),
            over.vertex_v
                .or(file.take_f64("vertex-v")?)
                .unwrap_or(center.1),
        );
        let ray_dir = (
            over.ray_du.or(file.take_f64("ray-du")?).unwrap_or(1.0),
            over.ray_dv.or(file.take_f64("ray-dv")?).unwrap_or(0.0),
        );
        let mu = over.mu.or(file.take_f64("mu")?).unwrap_or(FRAC_PI_2);
        let a1 = over.a1.or(file.take_f64("a1")?).unwrap_or(0.25);
        let alpha1 = over
            .alpha1
            .or(file.take_f64("alpha1")?)
            .unwrap_or(FRAC_PI_4);
        let step = over.step.or(file.take_f64("step")?).unwrap_or(a1 / 1000.0);
        let max_iters = over
            .max_iters
            .or(file.take_usize("max-iters")?)
            .unwrap_or(200);
        let conv_tol = over
            .conv_tol
            .or(file.take_f64("conv-tol")?)
            .unwrap_or(1e-10);

        let p_const = over.p_const.or(file.take_f64("p-const")?);
        let q_const = over.q_const.or(file.take_f64("q-const")?);
        let pq_name = over.pq.clone().or_else(|| file.take("pq"));
        let pq = match (pq_name.as_deref(), p_const, q_const) {
            (Some(name), None, None) => match name {
                "bisection" => PqSpec::Const(1.0, 1.0),
                "corollary2" => PqSpec::Corollary2,
                other => {
                    return Err(format!(
                        "unknown pq mode `{other}` (expected `bisection` or `corollary2`)"
                    ))
                }
            },
            (Some(_), _, _) => {
                return Err("give either --pq or --p-const/--q-const, not both".into())
            }
            (None, Some(p), Some(q)) => PqSpec::Const(p, q),
            (None, None, None) => PqSpec::Const(1.0, 1.0),
            (None, _, _) => return Err("--p-const and --q-const must be given together".into()),
        };

        file.finish()?;
        Ok(RunSpec {
            surface_id,
            shape,
            vertex,
            ray_dir,
            mu,
            a1,
            alpha1,
            step,
            max_iters,
            conv_tol,
            pq,
        })
    }

    /// Build the surface, scheme configuration, and division weights.
    pub fn build(&self) -> Result<(Surface, TriangleConfig, DivisionFunctions), String> {
        let surface = build_surface(&self.surface_id, &self.shape)?;
        let div = self.pq.divisions(&surface)?;
        let cfg = TriangleConfig::new(
            surface.clone(),
            ChartPoint::new(self.vertex.0, self.vertex.1),
            self.mu,
        )
        .with_ray_dir(self.ray_dir.0, self.ray_dir.1)
        .with_a1(self.a1)
        .with_alpha1(self.alpha1)
        .with_step(self.step)
        .with_max_iters(self.max_iters)
        .with_conv_tol(self.conv_tol);
        Ok((surface, cfg, div))
    }

    /// Dump as config text; resolving the result reproduces `self` exactly.
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        kv("surface", self.surface_id.clone());
        let shapes = [
            ("radius", self.shape.radius),
            ("major", self.shape.major),
            ("minor", self.shape.minor),
            ("semi-a", self.shape.semi_a),
            ("semi-b", self.shape.semi_b),
            ("semi-c", self.shape.semi_c),
        ];
        for (k, v) in shapes {
            if let Some(v) = v {
                kv(k, fmt_float(v));
            }
        }
        kv("vertex-u", fmt_float(self.vertex.0));
        kv("vertex-v", fmt_float(self.vertex.1));
        kv("ray-du", fmt_float(self.ray_dir.0));
        kv("ray-dv", fmt_float(self.ray_dir.1));
        kv("mu", fmt_float(self.mu));
        kv("a1", fmt_float(self.a1));
        kv("alpha1", fmt_float(self.alpha1));
        kv("step", fmt_float(self.step));
        kv("max-iters", self.max_iters.to_string());
        kv("conv-tol", fmt_float(self.conv_tol));
        match self.pq {
            PqSpec::Const(p, q) => {
                kv("p-const", fmt_float(p));
                kv("q-const", fmt_float(q));
            }
            PqSpec::Corollary2 => kv("pq", "corollary2".to_string()),
        }
        out
    }
}

/// Resolved classify invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifySpec {
    pub surface_id: String,
    pub shape: ShapeParams,
    pub u: f64,
    pub v: f64,
    pub mu: f64,
    pub empirical: bool,
    pub a1: f64,
    pub alpha1: f64,
    pub step: f64,
    pub conv_tol: f64,
    pub max_iters: usize,
    pub ray_dir: (f64, f64),
}

#[derive(Debug, Clone, Default)]
pub struct ClassifyOverrides {
    pub surface: Option<String>,
    pub shape: ShapeParams,
    pub u: Option<f64>,
    pub v: Option<f64>,
    pub mu: Option<f64>,
    pub empirical: bool,
    pub a1: Option<f64>,
    pub alpha1: Option<f64>,
    pub step: Option<f64>,
    pub conv_tol: Option<f64>,
    pub max_iters: Option<usize>,
    pub ray_du: Option<f64>,
    pub ray_dv: Option<f64>,
}

impl ClassifySpec {
    pub fn resolve(file_text: Option<&str>, over: &ClassifyOverrides) -> Result<Self, String> {
        let mut file = KeyReader {
            map: match file_text {
                Some(t) => parse(t)?,
                None => BTreeMap::new(),
            },
        };
        let surface_id = over
            .surface
            .clone()
            .or_else(|| file.take("surface"))
            .ok_or("no surface given (use --surface or a config file)")?;
        let shape = ShapeParams {
            radius: over.shape.radius.or(file.take_f64("radius")?),
            major: over.shape.major.or(file.take_f64("major")?),
            minor: over.shape.minor.or(file.take_f64("minor")?),
            semi_a: over.shape.semi_a.or(file.take_f64("semi-a")?),
            semi_b: over.shape.semi_b.or(file.take_f64("semi-b")?),
            semi_c: over.shape.semi_c.or(file.take_f64("semi-c")?),
        };
        let u = over
            .u
            .or(file.take_f64("u")?)
            .ok_or("no point given (use --u/--v or config keys u/v)")?;
        let v = over
            .v
            .or(file.take_f64("v")?)
            .ok_or("no point given (use --u/--v or config keys u/v)")?;
        let empirical = over.empirical
            || match file.take("empirical") {
                None => false,
                Some(s) => s
                    .parse::<bool>()
                    .map_err(|_| format!("config key `empirical`: `{s}` is not true/false"))?,
            };
        let spec = ClassifySpec {
            surface_id,
            shape,
            u,
            v,
            mu: over.mu.or(file.take_f64("mu")?).unwrap_or(FRAC_PI_2),
            empirical,
            a1: over.a1.or(file.take_f64("a1")?).unwrap_or(0.1),
            alpha1: over
                .alpha1
                .or(file.take_f64("alpha1")?)
                .unwrap_or(FRAC_PI_4),
            step: over.step.or(file.take_f64("step")?).unwrap_or(1e-4),
            conv_tol: over.conv_tol.or(file.take_f64("conv-tol")?).unwrap_or(1e-8),
            max_iters: over
                .max_iters
                .or(file.take_usize("max-iters")?)
                .unwrap_or(200),
            ray_dir: (
                over.ray_du.or(file.take_f64("ray-du")?).unwrap_or(1.0),
                over.ray_dv.or(file.take_f64("ray-dv")?).unwrap_or(0.0),
            ),
        };
        file.finish()?;
        Ok(spec)
    }
}

/// Resolved Gauss-Bonnet check: a surface and three chart vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct GbcheckSpec {
    pub surface_id: String,
    pub shape: ShapeParams,
    pub vertices: [(f64, f64); 3],
    pub step: f64,
}

#[derive(Debug, Clone, Default)]
pub struct GbcheckOverrides {
    pub surface: Option<String>,
    pub shape: ShapeParams,
    pub coords: [Option<f64>; 6],
    pub step: Option<f64>,
}

impl GbcheckSpec {
    pub fn resolve(file_text: Option<&str>, over: &GbcheckOverrides) -> Result<Self, String> {
        let mut file = KeyReader {
            map: match file_text {
                Some(t) => parse(t)?,
                None => BTreeMap::new(),
            },
        };
        let surface_id = over
            .surface
            .clone()
            .or_else(|| file.take("surface"))
            .ok_or("no surface given (use --surface or a config file)")?;
        let shape = ShapeParams {
            radius: over.shape.radius.or(file.take_f64("radius")?),
            major: over.shape.major.or(file.take_f64("major")?),
            minor: over.shape.minor.or(file.take_f64("minor")?),
            semi_a: over.shape.semi_a.or(file.take_f64("semi-a")?),
            semi_b: over.shape.semi_b.or(file.take_f64("semi-b")?),
            semi_c: over.shape.semi_c.or(file.take_f64("semi-c")?),
        };
        let keys = ["u1", "v1", "u2", "v2", "u3", "v3"];
        let mut coords = [0.0_f64; 6];
        for i in 0..6 {
            coords[i] = over.coords[i]
                .or(file.take_f64(keys[i])?)
                .ok_or_else(|| format!("missing vertex coordinate `{}`", keys[i]))?;
        }
        let step = over.step.or(file.take_f64("step")?).unwrap_or(2.5e-4);
        file.finish()?;
        Ok(GbcheckSpec {
            surface_id,
            shape,
            vertices: [
                (coords[0], coords[1]),
                (coords[2], coords[3]),
                (coords[4], coords[5]),
            ],
            step,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn parse_handles_comments_blanks_and_errors() {
        let map = parse("# experiment\nsurface = sphere\n\nmu = 1.5 # radians\n").unwrap();
        assert_eq!(map["surface"], "sphere");
        assert_eq!(map["mu"], "1.5");
        assert!(parse("surface sphere").is_err());
        assert!(parse("surface = sphere\nsurface = plane").is_err());
        assert!(parse("mu =").is_err());
    }

    #[test]
    fn defaults_fill_unspecified_run_fields() {
        let over = RunOverrides {
            surface: Some("sphere".into()),
            ..Default::default()
        };
        let spec = RunSpec::resolve(None, &over).unwrap();
        assert_eq!(spec.a1, 0.25);
        assert_eq!(spec.step, 0.25 / 1000.0);
        assert_eq!(spec.mu, FRAC_PI_2);
        assert_eq!(spec.pq, PqSpec::Const(1.0, 1.0));
        // Vertex defaults to the domain center.
        assert!((spec.vertex.0 - PI / 2.0).abs() < 1e-12);
        assert!(spec.vertex.1.abs() < 1e-12);
    }

    #[test]
    fn flags_override_file_values() {
        let file = "surface = plane\nmu = 1.0\na1 = 2.0\np-const = 1\nq-const = 4\n";
        let over = RunOverrides {
            mu: Some(2.0),
            ..Default::default()
        };
        let spec = RunSpec::resolve(Some(file), &over).unwrap();
        assert_eq!(spec.mu, 2.0);
        assert_eq!(spec.a1, 2.0);
        assert_eq!(spec.pq, PqSpec::Const(1.0, 4.0));
        // step default derives from the resolved a1.
        assert_eq!(spec.step, 2.0 / 1000.0);
    }

    #[test]
    fn config_round_trips_losslessly() {
        let over = RunOverrides {
            surface: Some("torus".into()),
            shape: ShapeParams {
                major: Some(3.0),
                minor: Some(0.7),
                ..Default::default()
            },
            vertex_u: Some(0.12345678912345678),
            mu: Some(1.0 / 3.0),
            a1: Some(0.2),
            alpha1: Some(0.7),
            step: Some(1e-3 / 3.0),
            conv_tol: Some(1e-9),
            p_const: Some(0.5),
            q_const: Some(4.0),
            ..Default::default()
        };
        let spec = RunSpec::resolve(None, &over).unwrap();
        let dumped = spec.to_config_string();
        let reloaded = RunSpec::resolve(Some(&dumped), &RunOverrides::default()).unwrap();
        assert_eq!(spec, reloaded);

        let over = RunOverrides {
            surface: Some("saddle".into()),
            pq: Some("corollary2".into()),
            ..Default::default()
        };
        let spec = RunSpec::resolve(None, &over).unwrap();
        let reloaded =
            RunSpec::resolve(Some(&spec.to_config_string()), &RunOverrides::default()).unwrap();
        assert_eq!(spec, reloaded);
    }

    #[test]
    fn conflicting_or_unknown_settings_are_rejected() {
        let base = || RunOverrides {
            surface: Some("plane".into()),
            ..Default::default()
        };
        let mut over = base();
        over.pq = Some("corollary2".into());
        over.p_const = Some(1.0);
        over.q_const = Some(1.0);
        assert!(RunSpec::resolve(None, &over).is_err());
        let mut over = base();
        over.p_const = Some(1.0); // q missing
        assert!(RunSpec::resolve(None, &over).is_err());
        let mut over = base();
        over.pq = Some("trisect".into());
        assert!(RunSpec::resolve(None, &over).is_err());
        assert!(RunSpec::resolve(Some("surface = plane\nwavelength = 3"), &base()).is_err());
        assert!(RunSpec::resolve(None, &RunOverrides::default()).is_err());
    }

    #[test]
    fn shape_params_are_surface_checked() {
        let mut over = RunOverrides {
            surface: Some("plane".into()),
            ..Default::default()
        };
        over.shape.radius = Some(2.0);
        assert!(RunSpec::resolve(None, &over).is_err());
        let mut over = RunOverrides {
            surface: Some("torus".into()),
            ..Default::default()
        };
        over.shape.major = Some(1.0);
        over.shape.minor = Some(2.0);
        assert!(RunSpec::resolve(None, &over).is_err());
        let mut over = RunOverrides {
            surface: Some("sphere".into()),
            ..Default::default()
        };
        over.shape.radius = Some(-1.0);
        assert!(RunSpec::resolve(None, &over).is_err());
    }

    #[test]
    fn classify_and_gbcheck_specs_resolve() {
        let over = ClassifyOverrides {
            surface: Some("cylinder".into()),
            u: Some(0.0),
            v: Some(0.0),
            ..Default::default()
        };
        let spec = ClassifySpec::resolve(None, &over).unwrap();
        assert!(!spec.empirical);
        assert_eq!(spec.a1, 0.1);

        let file = "surface = sphere\nu1 = 1.5\nv1 = 0\nu2 = 1.5\nv2 = 0.3\nu3 = 1.2\nv3 = 0\n";
        let spec = GbcheckSpec::resolve(Some(file), &GbcheckOverrides::default()).unwrap();
        assert_eq!(spec.vertices[1], (1.5, 0.3));
        assert_eq!(spec.step, 2.5e-4);
        let missing = "surface = sphere\nu1 = 1.5\n";
        assert!(GbcheckSpec::resolve(Some(missing), &GbcheckOverrides::default()).is_err());
    }
}
