//! Scene description: which mirror, which incident field, how to sample
//! and where to write.
//!
//! A scene file holds one `key = value` per line; `#` starts a comment.
//!
//! ```text
//! surface    = sphere          # built-in name
//! param      = R=2             # repeatable
//! expr-file  = mirror.surf     # instead of `surface`
//! domain     = 0.2, 1.4, -pi, pi
//! grid       = 60, 60
//! field      = flat 0, 0, 1    # or: source 0, 0, 0
//! thresholds = eps_grazing=1e-6, eps_inf=1e-9, max_radius=50
//! orientation = auto           # auto | plus | minus
//! output     = out/sphere
//! format     = obj
//! ```
//!
//! Numbers anywhere in a scene may be constant expressions such as `pi/2`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::builtins::{self, BuiltinError};
use crate::caustic::{IncidentField, DEFAULT_EPS_GRAZING, DEFAULT_EPS_INF};
use crate::diffgeo::Orientation;
use crate::jet::Vec3;
use crate::lang::{eval_expr, parse_expr, parse_surface_file, ParseError, SurfaceAst};
use crate::meshio::Format;
use crate::surface::{Domain, Grid};

pub const DEFAULT_GRID: (usize, usize) = (60, 60);
pub const DEFAULT_OUTPUT: &str = "caustic";

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("{file}:{line}: {message}")]
    File {
        file: String,
        line: usize,
        message: String,
    },
    #[error("{0}")]
    Invalid(String),
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Builtin(#[from] BuiltinError),
    #[error("in {path}: {source}")]
    Expression {
        path: String,
        #[source]
        source: ParseError,
    },
}

fn invalid(msg: impl Into<String>) -> SceneError {
    SceneError::Invalid(msg.into())
}

#[derive(Clone, Debug, PartialEq)]
pub enum SurfaceSource {
    Builtin(String),
    ExprFile(PathBuf),
}

/// A scene with every field optional, as read from a file or from flags.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SceneDraft {
    pub surface: Option<SurfaceSource>,
    pub params: Vec<(String, String)>,
    pub domain: Option<Domain>,
    pub grid: Option<(usize, usize)>,
    pub field: Option<IncidentField>,
    pub eps_grazing: Option<f64>,
    pub eps_inf: Option<f64>,
    pub max_radius: Option<f64>,
    pub orientation: Option<Orientation>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
}

impl SceneDraft {
    /// Fields set in `over` win. Parameters are merged, later ones winning.
    pub fn overlay(self, over: SceneDraft) -> SceneDraft {
        let mut params = self.params;
        params.extend(over.params);
        SceneDraft {
            surface: over.surface.or(self.surface),
            params,
            domain: over.domain.or(self.domain),
            grid: over.grid.or(self.grid),
            field: over.field.or(self.field),
            eps_grazing: over.eps_grazing.or(self.eps_grazing),
            eps_inf: over.eps_inf.or(self.eps_inf),
            max_radius: over.max_radius.or(self.max_radius),
            orientation: over.orientation.or(self.orientation),
            output: over.output.or(self.output),
            format: over.format.or(self.format),
        }
    }

    pub fn finish(self) -> Result<SceneSpec, SceneError> {
        let surface = self
            .surface
            .ok_or_else(|| invalid("no surface given (use --surface NAME or --expr-file PATH)"))?;
        let field = self
            .field
            .ok_or_else(|| invalid("no incident field given (use --flat ax,ay,az or --source ox,oy,oz)"))?;
        let (nu, nv) = self.grid.unwrap_or(DEFAULT_GRID);
        if nu < 2 || nv < 2 {
            return Err(invalid(format!("grid must be at least 2x2, got {nu}x{nv}")));
        }
        let eps_grazing = self.eps_grazing.unwrap_or(DEFAULT_EPS_GRAZING);
        let eps_inf = self.eps_inf.unwrap_or(DEFAULT_EPS_INF);
        for (name, x) in [("eps_grazing", eps_grazing), ("eps_inf", eps_inf)] {
            if !(x >= 0.0) || !x.is_finite() {
                return Err(invalid(format!("{name} must be a finite non-negative number")));
            }
        }
        if let Some(r) = self.max_radius {
            if !(r > 0.0) {
                return Err(invalid("max_radius must be positive"));
            }
        }
        if let Some(d) = &self.domain {
            check_domain(d)?;
        }
        let mut params = BTreeMap::new();
        for (k, v) in self.params {
            params.insert(k, v);
        }
        Ok(SceneSpec {
            surface,
            params,
            domain: self.domain,
            grid: (nu, nv),
            field,
            eps_grazing,
            eps_inf,
            max_radius: self.max_radius,
            orientation: self.orientation.unwrap_or_default(),
            output: self.output.unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT)),
            format: self.format.unwrap_or_default(),
        })
    }
}

fn check_domain(d: &Domain) -> Result<(), SceneError> {
    let ok = |r: [f64; 2]| r[0].is_finite() && r[1].is_finite() && r[0] < r[1];
    if ok(d.u) && ok(d.v) {
        Ok(())
    } else {
        Err(invalid("domain must satisfy u0 < u1 and v0 < v1"))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SceneSpec {
    pub surface: SurfaceSource,
    pub params: BTreeMap<String, String>,
    /// `None` falls back to the built-in's or the expression file's domain.
    pub domain: Option<Domain>,
    pub grid: (usize, usize),
    pub field: IncidentField,
    pub eps_grazing: f64,
    pub eps_inf: f64,
    /// `None` means ten times the sampled mirror's bounding-box diameter.
    pub max_radius: Option<f64>,
    pub orientation: Orientation,
    pub output: PathBuf,
    pub format: Format,
}

/// The mirror and sampling grid a scene resolves to.
pub struct LoadedSurface {
    pub surface: SurfaceAst,
    pub grid: Grid,
}

impl SceneSpec {
    /// Build the surface. Relative expression-file paths resolve against
    /// `base` (the scene file's directory) when given.
    pub fn load_surface(&self, base: Option<&Path>) -> Result<LoadedSurface, SceneError> {
        let (surface, own_domain) = match &self.surface {
            SurfaceSource::Builtin(name) => {
                let (ast, dom) = builtins::build(name, &self.params)?;
                (ast, Some(dom))
            }
            SurfaceSource::ExprFile(path) => {
                let path = match base {
                    Some(b) if path.is_relative() => b.join(path),
                    _ => path.clone(),
                };
                let shown = path.display().to_string();
                let text = std::fs::read_to_string(&path).map_err(|source| SceneError::Read {
                    path: shown.clone(),
                    source,
                })?;
                let mut numbers = BTreeMap::new();
                for (k, v) in &self.params {
                    numbers.insert(k.clone(), number(v).map_err(|m| invalid(format!("parameter {k}: {m}")))?);
                }
                parse_surface_file(&text, &numbers).map_err(|source| SceneError::Expression { path: shown, source })?
            }
        };
        let domain = self
            .domain
            .or(own_domain)
            .ok_or_else(|| invalid("no domain given and the expression file declares none"))?;
        check_domain(&domain)?;
        Ok(LoadedSurface {
            surface,
            grid: Grid::new(self.grid.0, self.grid.1, domain),
        })
    }

    pub fn output_path(&self, suffix: &str) -> PathBuf {
        let mut name = self.output.as_os_str().to_owned();
        name.push(format!("-{suffix}"));
        PathBuf::from(name)
    }
}

impl FromStr for Orientation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "auto" => Ok(Orientation::Auto),
            "plus" | "+" => Ok(Orientation::Plus),
            "minus" | "-" => Ok(Orientation::Minus),
            other => Err(format!("unknown orientation `{other}` (expected auto, plus or minus)")),
        }
    }
}

/// A constant expression such as `1e-3` or `-pi/2`.
pub fn number(text: &str) -> Result<f64, String> {
    let e = parse_expr(text.trim(), &[], &BTreeMap::new()).map_err(|e| format!("`{}`: {e}", text.trim()))?;
    eval_expr(&e, 0.0, 0.0, &BTreeMap::new())
        .map(|j| j.value)
        .map_err(|e| format!("`{}`: {e}", text.trim()))
}

pub fn numbers<const N: usize>(text: &str) -> Result<[f64; N], String> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != N {
        return Err(format!("expected {N} comma-separated numbers, got `{}`", text.trim()));
    }
    let mut out = [0.0; N];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = number(p)?;
    }
    Ok(out)
}

pub fn parse_domain(text: &str) -> Result<Domain, String> {
    let [u0, u1, v0, v1] = numbers::<4>(text)?;
    Ok(Domain::new(u0, u1, v0, v1))
}

pub fn parse_grid(text: &str) -> Result<(usize, usize), String> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] => {
            let n = |s: &str| s.parse::<usize>().map_err(|_| format!("bad grid size `{s}`"));
            Ok((n(a)?, n(b)?))
        }
        _ => Err(format!("expected NU,NV, got `{}`", text.trim())),
    }
}

pub fn parse_flat(text: &str) -> Result<IncidentField, String> {
    let [x, y, z] = numbers::<3>(text)?;
    IncidentField::flat(Vec3::new(x, y, z)).map_err(|e| e.to_string())
}

pub fn parse_source(text: &str) -> Result<IncidentField, String> {
    let [x, y, z] = numbers::<3>(text)?;
    IncidentField::point(Vec3::new(x, y, z)).map_err(|e| e.to_string())
}

pub fn parse_param(text: &str) -> Result<(String, String), String> {
    let (k, v) = text
        .split_once('=')
        .ok_or_else(|| format!("expected NAME=VALUE, got `{}`", text.trim()))?;
    let k = k.trim();
    if k.is_empty() {
        return Err("empty parameter name".to_string());
    }
    Ok((k.to_string(), v.trim().to_string()))
}

/// Parse scene-file text. `file` only labels error messages.
pub fn parse_scene(text: &str, file: &str) -> Result<SceneDraft, SceneError> {
    let mut d = SceneDraft::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fail = |message: String| SceneError::File {
            file: file.to_string(),
            line: idx + 1,
            message,
        };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| fail(format!("expected `key = value`, got `{line}`")))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "surface" => d.surface = Some(SurfaceSource::Builtin(value.to_string())),
            "expr-file" | "expr_file" => d.surface = Some(SurfaceSource::ExprFile(PathBuf::from(value))),
            "param" => d.params.push(parse_param(value).map_err(fail)?),
            "domain" => d.domain = Some(parse_domain(value).map_err(fail)?),
            "grid" => d.grid = Some(parse_grid(value).map_err(fail)?),
            "field" => {
                let (kind, rest) = value.split_once(char::is_whitespace).unwrap_or((value, ""));
                d.field = Some(match kind {
                    "flat" => parse_flat(rest).map_err(fail)?,
                    "source" => parse_source(rest).map_err(fail)?,
                    _ => return Err(fail(format!("field must be `flat ax,ay,az` or `source ox,oy,oz`, got `{value}`"))),
                });
            }
            "thresholds" => {
                for item in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                    let (name, x) = parse_param(item).map_err(fail)?;
                    let x = number(&x).map_err(fail)?;
                    match name.as_str() {
                        "eps_grazing" => d.eps_grazing = Some(x),
                        "eps_inf" => d.eps_inf = Some(x),
                        "max_radius" => d.max_radius = Some(x),
                        _ => return Err(fail(format!("unknown threshold `{name}`"))),
                    }
                }
            }
            "orientation" => d.orientation = Some(value.parse().map_err(fail)?),
            "output" => d.output = Some(PathBuf::from(value)),
            "format" => d.format = Some(value.parse().map_err(|e: crate::meshio::MeshError| fail(e.to_string()))?),
            _ => return Err(fail(format!("unknown key `{key}`"))),
        }
    }
    Ok(d)
}
