//! The `catacaustic` command line.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::builtins;
use crate::caustic::{
    compute_caustic_sheets, reflected_front, CausticError, CausticOptions, IncidentField,
};
use crate::meshio::{clip_sheet, export_mesh, Format, MaskedGrid};
use crate::oracle::{validate_sheets, ValidationOptions, DEFAULT_FD_STEP, DEFAULT_TOL};
use crate::scene::{
    parse_domain, parse_flat, parse_grid, parse_param, parse_scene, parse_source, LoadedSurface,
    SceneDraft, SceneSpec, SurfaceSource,
};
use crate::diffgeo::Orientation;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_EMPTY: i32 = 2;
pub const EXIT_FAIL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "catacaustic", version, about = "Caustics of wavefronts reflected by parametric mirrors")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute both caustic sheets and write them with a statistics file.
    Compute(SceneArgs),
    /// Compare the computed sheets with a finite-difference ray oracle.
    Validate {
        #[command(flatten)]
        scene: SceneArgs,
        /// Finite-difference step.
        #[arg(long, default_value_t = DEFAULT_FD_STEP)]
        fd_step: f64,
        /// Largest accepted distance between the two caustic estimates.
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Write the reflected front after total travel L.
    Front {
        #[command(flatten)]
        scene: SceneArgs,
        /// Travel from the reference plane (flat front) or the source.
        #[arg(short = 'L', long = "travel", allow_hyphen_values = true)]
        travel: f64,
    },
    /// List the built-in surfaces.
    Builtins,
}

#[derive(Debug, Args, Default)]
pub struct SceneArgs {
    /// Scene file of `key = value` lines; flags override it.
    #[arg(long)]
    pub scene: Option<PathBuf>,
    /// Built-in surface name.
    #[arg(long, conflicts_with = "expr_file")]
    pub surface: Option<String>,
    /// File holding `[x, y, z]` in u and v, optionally with a domain clause.
    #[arg(long)]
    pub expr_file: Option<PathBuf>,
    /// Surface parameter NAME=VALUE (repeatable).
    #[arg(long = "param", value_name = "NAME=VALUE")]
    pub params: Vec<String>,
    #[arg(long, value_name = "U0,U1,V0,V1", allow_hyphen_values = true)]
    pub domain: Option<String>,
    #[arg(long, value_name = "NU,NV")]
    pub grid: Option<String>,
    /// Flat front travelling along this direction.
    #[arg(long, value_name = "AX,AY,AZ", allow_hyphen_values = true, conflicts_with = "source")]
    pub flat: Option<String>,
    /// Point source position.
    #[arg(long, value_name = "OX,OY,OZ", allow_hyphen_values = true)]
    pub source: Option<String>,
    #[arg(long)]
    pub eps_grazing: Option<f64>,
    #[arg(long)]
    pub eps_inf: Option<f64>,
    /// Clip caustic points farther than this along their ray.
    #[arg(long)]
    pub max_radius: Option<f64>,
    /// Normal choice: auto, plus or minus.
    #[arg(long)]
    pub orientation: Option<String>,
    /// obj, csv or ply.
    #[arg(long)]
    pub format: Option<String>,
    /// Output path prefix.
    #[arg(long = "out", value_name = "PREFIX")]
    pub output: Option<PathBuf>,
}

/// A failure reported with the pipeline stage it came from.
#[derive(Debug)]
pub struct StageError {
    pub stage: &'static str,
    pub message: String,
    pub code: i32,
}

impl StageError {
    fn input(stage: &'static str, e: impl ToString) -> Self {
        StageError {
            stage,
            message: e.to_string(),
            code: EXIT_INPUT,
        }
    }
}

fn flag<T>(name: &str, value: &Option<String>, parse: impl Fn(&str) -> Result<T, String>) -> Result<Option<T>, StageError> {
    value
        .as_deref()
        .map(|v| parse(v).map_err(|m| StageError::input("scene", format!("--{name}: {m}"))))
        .transpose()
}

impl SceneArgs {
    fn draft(&self) -> Result<SceneDraft, StageError> {
        let mut params = Vec::new();
        for p in &self.params {
            params.push(parse_param(p).map_err(|m| StageError::input("scene", format!("--param: {m}")))?);
        }
        let field: Option<IncidentField> = match (&self.flat, &self.source) {
            (Some(_), _) => flag("flat", &self.flat, parse_flat)?,
            (None, Some(_)) => flag("source", &self.source, parse_source)?,
            (None, None) => None,
        };
        let surface = match (&self.surface, &self.expr_file) {
            (Some(name), _) => Some(SurfaceSource::Builtin(name.clone())),
            (None, Some(path)) => Some(SurfaceSource::ExprFile(path.clone())),
            (None, None) => None,
        };
        Ok(SceneDraft {
            surface,
            params,
            domain: flag("domain", &self.domain, parse_domain)?,
            grid: flag("grid", &self.grid, parse_grid)?,
            field,
            eps_grazing: self.eps_grazing,
            eps_inf: self.eps_inf,
            max_radius: self.max_radius,
            orientation: flag("orientation", &self.orientation, |s| s.parse::<Orientation>())?,
            output: self.output.clone(),
            format: flag("format", &self.format, |s| s.parse::<Format>().map_err(|e| e.to_string()))?,
        })
    }

    /// Merge the scene file and flags, and build the surface.
    pub fn resolve(&self) -> Result<(SceneSpec, LoadedSurface), StageError> {
        let (file_draft, base) = match &self.scene {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| StageError::input("scene", format!("cannot read {}: {e}", path.display())))?;
                let d = parse_scene(&text, &path.display().to_string()).map_err(|e| StageError::input("scene", e))?;
                (d, path.parent().map(Path::to_path_buf))
            }
            None => (SceneDraft::default(), None),
        };
        let spec = file_draft
            .overlay(self.draft()?)
            .finish()
            .map_err(|e| StageError::input("scene", e))?;
        // Paths given on the command line are relative to the working directory.
        let base = match (&self.expr_file, &base) {
            (None, Some(b)) => Some(b.as_path()),
            _ => None,
        };
        let loaded = spec.load_surface(base).map_err(|e| StageError::input("surface", e))?;
        Ok((spec, loaded))
    }
}

fn caustic_options(spec: &SceneSpec) -> CausticOptions {
    CausticOptions {
        eps_grazing: spec.eps_grazing,
        eps_inf: spec.eps_inf,
        orientation: spec.orientation,
    }
}

fn caustic_failure(e: CausticError) -> StageError {
    match e {
        CausticError::NoLitPoints => StageError {
            stage: "caustic",
            message: e.to_string(),
            code: EXIT_EMPTY,
        },
        _ => StageError::input("caustic", e),
    }
}

fn write_mesh(mesh: &MaskedGrid, format: Format, path: &Path, out: &mut dyn Write) -> Result<(), StageError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| StageError::input("output", format!("{}: {e}", dir.display())))?;
    }
    let bytes = export_mesh(mesh, format, path).map_err(|e| StageError::input("output", e))?;
    let _ = writeln!(out, "wrote {} ({bytes} bytes)", path.display());
    Ok(())
}

pub fn cmd_compute(args: &SceneArgs, out: &mut dyn Write) -> Result<i32, StageError> {
    let (spec, loaded) = args.resolve()?;
    let res = compute_caustic_sheets(&loaded.surface, &spec.field, &loaded.grid, &caustic_options(&spec))
        .map_err(caustic_failure)?;
    let max_radius = spec.max_radius.unwrap_or(10.0 * res.stats.surface_diameter);
    let ext = spec.format.extension();
    let mut kept = 0;
    for sheet in &res.sheets {
        let mesh = clip_sheet(sheet, &loaded.grid, max_radius);
        kept += mesh.valid_count();
        write_mesh(&mesh, spec.format, &spec.output_path(&format!("sheet{}.{ext}", sheet.index)), out)?;
    }
    let stats_path = spec.output_path("stats.txt");
    let text = format!("max_radius {max_radius:.9e}\n{}", res.stats);
    std::fs::write(&stats_path, text).map_err(|e| StageError::input("output", format!("{}: {e}", stats_path.display())))?;
    let _ = writeln!(out, "wrote {}", stats_path.display());
    if kept == 0 {
        return Err(StageError {
            stage: "caustic",
            message: "no valid caustic points after masking and clipping".to_string(),
            code: EXIT_EMPTY,
        });
    }
    Ok(EXIT_OK)
}

pub fn cmd_validate(args: &SceneArgs, fd_step: f64, tol: f64, out: &mut dyn Write) -> Result<i32, StageError> {
    if !(fd_step > 0.0) || !(tol >= 0.0) {
        return Err(StageError::input("scene", "--fd-step must be positive and --tol non-negative"));
    }
    let (spec, loaded) = args.resolve()?;
    let res = compute_caustic_sheets(&loaded.surface, &spec.field, &loaded.grid, &caustic_options(&spec))
        .map_err(caustic_failure)?;
    let opts = ValidationOptions {
        fd_step,
        tol,
        max_radius: spec.max_radius.unwrap_or(10.0 * res.stats.surface_diameter),
    };
    let report = validate_sheets(&res, &loaded.surface, &opts).map_err(|e| StageError::input("oracle", e))?;
    let _ = write!(out, "{report}");
    Ok(if report.passed() { EXIT_OK } else { EXIT_FAIL })
}

pub fn cmd_front(args: &SceneArgs, travel: f64, out: &mut dyn Write) -> Result<i32, StageError> {
    let (spec, loaded) = args.resolve()?;
    let front = reflected_front(&loaded.surface, &spec.field, &loaded.grid, travel, &caustic_options(&spec))
        .map_err(caustic_failure)?;
    let mesh = MaskedGrid::from_front(&front);
    let path = spec.output_path(&format!("front.{}", spec.format.extension()));
    write_mesh(&mesh, spec.format, &path, out)?;
    if mesh.valid_count() == 0 {
        return Err(StageError {
            stage: "front",
            message: "the reflected front has not reached any grid point".to_string(),
            code: EXIT_EMPTY,
        });
    }
    Ok(EXIT_OK)
}

pub fn cmd_builtins(out: &mut dyn Write) -> i32 {
    let _ = write!(out, "{}", builtins::listing());
    EXIT_OK
}

/// Run a parsed command line, returning the process exit code.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match &cli.command {
        Command::Compute(scene) => cmd_compute(scene, out),
        Command::Validate { scene, fd_step, tol } => cmd_validate(scene, *fd_step, *tol, out),
        Command::Front { scene, travel } => cmd_front(scene, *travel, out),
        Command::Builtins => Ok(cmd_builtins(out)),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error [{}]: {}", e.stage, e.message);
            e.code
        }
    }
}
