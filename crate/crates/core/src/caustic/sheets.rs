use std::fmt;

use nalgebra::{Matrix3, SymmetricEigen};
use rayon::prelude::*;

use super::{
    analyze_point, CausticError, CausticOptions, CausticPoint, IncidentField, PointAnalysis,
    PointError,
};
use crate::flags::Flags;
use crate::jet::Vec3;
use crate::surface::{Grid, Surface};

#[derive(Clone, Debug)]
pub struct CausticSheet {
    /// 1 or 2.
    pub index: u8,
    /// One entry per grid vertex, row-major.
    pub points: Vec<CausticPoint>,
}

impl CausticSheet {
    pub fn valid_points(&self) -> impl Iterator<Item = &Vec3> {
        self.points.iter().filter(|p| p.flags.is_valid()).map(|p| &p.xi)
    }
}

#[derive(Clone, Debug)]
pub struct CausticResult {
    pub grid: Grid,
    pub field: IncidentField,
    /// Mirror point per vertex.
    pub surface_points: Vec<Vec3>,
    /// Reflected direction per lit vertex.
    pub directions: Vec<Option<Vec3>>,
    /// Valid, shadow or grazing per vertex.
    pub point_flags: Vec<Flags>,
    /// Quadratic vs. eigenvalue residual per lit vertex, NaN elsewhere.
    pub residuals: Vec<f64>,
    pub sheets: [CausticSheet; 2],
    pub stats: FrontStatistics,
}

enum Sample {
    Lit(Box<PointAnalysis>),
    Masked(Vec3, Flags),
}

pub fn compute_caustic_sheets<S: Surface + ?Sized>(
    surface: &S,
    field: &IncidentField,
    grid: &Grid,
    opts: &CausticOptions,
) -> Result<CausticResult, CausticError> {
    if grid.is_empty() {
        return Err(CausticError::EmptyGrid);
    }
    let results: Vec<Result<Sample, PointError>> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let (u, v) = grid.param(k);
            match analyze_point(surface, field, u, v, opts) {
                Ok(p) => Ok(Sample::Lit(Box::new(p))),
                Err(e) => match e.mask() {
                    Some(bit) => Ok(Sample::Masked(surface.position(u, v)?, Flags::only(bit))),
                    None => Err(e),
                },
            }
        })
        .collect();

    let n = grid.len();
    let mut surface_points = Vec::with_capacity(n);
    let mut directions = Vec::with_capacity(n);
    let mut point_flags = Vec::with_capacity(n);
    let mut residuals = Vec::with_capacity(n);
    let mut roots: Vec<Option<[f64; 2]>> = Vec::with_capacity(n);
    for (k, res) in results.into_iter().enumerate() {
        match res {
            Ok(Sample::Lit(p)) => {
                surface_points.push(p.frame.r);
                directions.push(Some(p.refl.b));
                point_flags.push(Flags::valid());
                residuals.push(p.roots.residual);
                roots.push(Some(p.roots.k));
            }
            Ok(Sample::Masked(r, f)) => {
                surface_points.push(r);
                directions.push(None);
                point_flags.push(f);
                residuals.push(f64::NAN);
                roots.push(None);
            }
            Err(source) => {
                let (u, v) = grid.param(k);
                return Err(CausticError::Point { u, v, source });
            }
        }
    }
    if roots.iter().all(Option::is_none) {
        return Err(CausticError::NoLitPoints);
    }

    track_rows(&mut roots, grid);

    let kind = field.kind();
    let mut sheets = [1u8, 2].map(|index| CausticSheet {
        index,
        points: Vec::with_capacity(n),
    });
    for k in 0..n {
        for (s, sheet) in sheets.iter_mut().enumerate() {
            let pt = match (roots[k], directions[k]) {
                (Some(ks), Some(b)) => {
                    super::caustic_point(&surface_points[k], &b, ks[s], kind, opts.eps_inf, sheet.index)
                }
                _ => CausticPoint::masked(sheet.index, point_flags[k]),
            };
            sheet.points.push(pt);
        }
    }

    let stats = FrontStatistics::collect(&surface_points, &point_flags, &residuals, &sheets);
    Ok(CausticResult {
        grid: *grid,
        field: *field,
        surface_points,
        directions,
        point_flags,
        residuals,
        sheets,
        stats,
    })
}

/// Along each row the first lit point keeps ascending order; every later
/// point is paired with the value extrapolated from its two predecessors
/// (or the single predecessor), so roots that cross stay on their sheet.
pub(crate) fn track_rows(roots: &mut [Option<[f64; 2]>], grid: &Grid) {
    for i in 0..grid.nu {
        let mut hist: Vec<[f64; 2]> = Vec::new();
        for j in 0..grid.nv {
            let k = i * grid.nv + j;
            let Some(cur) = roots[k] else {
                hist.clear();
                continue;
            };
            let assigned = match hist.as_slice() {
                [] => cur,
                [.., a, b] if hist.len() >= 2 => pair(cur, [2.0 * b[0] - a[0], 2.0 * b[1] - a[1]]),
                [.., b] => pair(cur, *b),
            };
            roots[k] = Some(assigned);
            hist.push(assigned);
        }
    }
}

fn pair(cur: [f64; 2], pred: [f64; 2]) -> [f64; 2] {
    let keep = gap(cur[0], pred[0]) + gap(cur[1], pred[1]);
    let swap = gap(cur[1], pred[0]) + gap(cur[0], pred[1]);
    // Near-ties fall back to ascending order so that round-off cannot pick the label.
    let scale = cur[0].abs().max(cur[1].abs()).max(pred[0].abs()).max(pred[1].abs());
    if swap < keep - 1e-9 * scale {
        [cur[1], cur[0]]
    } else {
        cur
    }
}

fn gap(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    if d.is_nan() {
        f64::INFINITY
    } else {
        d
    }
}

/// Dimension of a point cloud, judged from its principal extents.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Degeneracy {
    Empty,
    Point,
    Linear,
    Planar,
    Spatial,
}

impl fmt::Display for Degeneracy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Degeneracy::Empty => "empty",
            Degeneracy::Point => "point",
            Degeneracy::Linear => "linear",
            Degeneracy::Planar => "planar",
            Degeneracy::Spatial => "spatial",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SheetStats {
    pub valid: usize,
    pub at_infinity: usize,
    pub excluded_zero_root: usize,
    pub bbox: Option<(Vec3, Vec3)>,
    pub diameter: f64,
    /// Extents along the principal axes of the point cloud, descending.
    pub principal_extents: [f64; 3],
    pub shape: Degeneracy,
}

impl SheetStats {
    pub fn of_points<'a>(points: impl IntoIterator<Item = &'a Vec3>) -> SheetStats {
        let pts: Vec<Vec3> = points.into_iter().copied().collect();
        let bbox = bounding_box(&pts);
        let diameter = bbox.map(|(lo, hi)| (hi - lo).norm()).unwrap_or(0.0);
        let principal_extents = principal_extents(&pts);
        let shape = if pts.is_empty() {
            Degeneracy::Empty
        } else {
            let tol = 1e-9 * diameter.max(1.0);
            match principal_extents.iter().filter(|e| **e <= tol).count() {
                0 => Degeneracy::Spatial,
                1 => Degeneracy::Planar,
                2 => Degeneracy::Linear,
                _ => Degeneracy::Point,
            }
        };
        SheetStats {
            valid: pts.len(),
            at_infinity: 0,
            excluded_zero_root: 0,
            bbox,
            diameter,
            principal_extents,
            shape,
        }
    }
}

pub fn bounding_box(pts: &[Vec3]) -> Option<(Vec3, Vec3)> {
    let first = pts.first()?;
    Some(pts.iter().fold((*first, *first), |(lo, hi), p| (lo.inf(p), hi.sup(p))))
}

fn principal_extents(pts: &[Vec3]) -> [f64; 3] {
    if pts.len() < 2 {
        return [0.0; 3];
    }
    let mean = pts.iter().fold(Vec3::zeros(), |acc, p| acc + p) / pts.len() as f64;
    let cov = pts.iter().fold(Matrix3::zeros(), |acc, p| {
        let d = p - mean;
        acc + d * d.transpose()
    });
    let eig = SymmetricEigen::new(cov);
    let mut ext = [0.0; 3];
    for (e, axis) in ext.iter_mut().zip(eig.eigenvectors.column_iter()) {
        let (lo, hi) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            let t = (p - mean).dot(&axis);
            (lo.min(t), hi.max(t))
        });
        *e = hi - lo;
    }
    ext.sort_by(|a, b| b.total_cmp(a));
    ext
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrontStatistics {
    pub points: usize,
    pub lit: usize,
    pub shadow: usize,
    pub grazing: usize,
    /// Diameter of the sampled mirror's bounding box.
    pub surface_diameter: f64,
    pub max_crosscheck_residual: f64,
    pub crosscheck_violations: usize,
    pub sheets: [SheetStats; 2],
}

impl FrontStatistics {
    fn collect(
        surface_points: &[Vec3],
        point_flags: &[Flags],
        residuals: &[f64],
        sheets: &[CausticSheet; 2],
    ) -> FrontStatistics {
        let count = |bit| point_flags.iter().filter(|f| f.contains(bit)).count();
        let finite: Vec<Vec3> = surface_points
            .iter()
            .filter(|p| p.iter().all(|x| x.is_finite()))
            .copied()
            .collect();
        let surface_diameter = bounding_box(&finite).map(|(lo, hi)| (hi - lo).norm()).unwrap_or(0.0);

        let mut max_res = 0.0f64;
        let mut violations = 0;
        for (k, r) in residuals.iter().enumerate() {
            if r.is_nan() {
                continue;
            }
            max_res = max_res.max(*r);
            let scale = sheets
                .iter()
                .map(|s| s.points[k].k_star.abs())
                .fold(1.0f64, f64::max);
            if *r > 1e-8 * scale {
                violations += 1;
            }
        }

        let sheet_stats = [0, 1].map(|s| {
            let mut st = SheetStats::of_points(sheets[s].valid_points());
            let f = |bit| sheets[s].points.iter().filter(|p| p.flags.contains(bit)).count();
            st.at_infinity = f(Flags::AT_INFINITY);
            st.excluded_zero_root = f(Flags::EXCLUDED_ZERO_ROOT);
            st
        });

        FrontStatistics {
            points: point_flags.len(),
            lit: count(Flags::VALID),
            shadow: count(Flags::SHADOW),
            grazing: count(Flags::GRAZING),
            surface_diameter,
            max_crosscheck_residual: max_res,
            crosscheck_violations: violations,
            sheets: sheet_stats,
        }
    }
}

impl fmt::Display for FrontStatistics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "points {}", self.points)?;
        writeln!(f, "lit {}", self.lit)?;
        writeln!(f, "shadow {}", self.shadow)?;
        writeln!(f, "grazing {}", self.grazing)?;
        writeln!(f, "surface_diameter {:.9e}", self.surface_diameter)?;
        writeln!(f, "crosscheck_max_residual {:.3e}", self.max_crosscheck_residual)?;
        writeln!(f, "crosscheck_violations {}", self.crosscheck_violations)?;
        for (s, st) in self.sheets.iter().enumerate() {
            let name = format!("sheet{}", s + 1);
            writeln!(f, "{name}.valid {}", st.valid)?;
            writeln!(f, "{name}.at_infinity {}", st.at_infinity)?;
            writeln!(f, "{name}.excluded_zero_root {}", st.excluded_zero_root)?;
            if let Some((lo, hi)) = st.bbox {
                writeln!(f, "{name}.bbox_min {:.9e} {:.9e} {:.9e}", lo.x, lo.y, lo.z)?;
                writeln!(f, "{name}.bbox_max {:.9e} {:.9e} {:.9e}", hi.x, hi.y, hi.z)?;
            }
            writeln!(f, "{name}.diameter {:.9e}", st.diameter)?;
            let [e0, e1, e2] = st.principal_extents;
            writeln!(f, "{name}.principal_extents {e0:.9e} {e1:.9e} {e2:.9e}")?;
            writeln!(f, "{name}.shape {}", st.shape)?;
        }
        Ok(())
    }
}
