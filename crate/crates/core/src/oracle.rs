//! Brute-force focal points of the reflected ray family.
//!
//! Rays `F(u, v, lambda) = r + lambda b` are traced at a five-point stencil
//! and differentiated by central differences. A focal point is where
//! `det[F_u, F_v, b]` vanishes; projecting onto the plane orthogonal to `b`
//! turns this into `det(R + lambda D) = 0` for the 2x2 projections `R`, `D`
//! of `(r_u, r_v)` and `(b_u, b_v)`. None of the fundamental-form machinery
//! is used.

use std::fmt;

use nalgebra::Matrix2;
use rayon::prelude::*;
use thiserror::Error;

use crate::caustic::{CausticResult, IncidentField, DEFAULT_EPS_INF};
use crate::diffgeo::sym_eigen2;
use crate::jet::Vec3;
use crate::lang::EvalError;
use crate::surface::{Domain, Surface};

pub const DEFAULT_FD_STEP: f64 = 1e-4;
pub const DEFAULT_TOL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("surface normal undefined at ({u}, {v})")]
    Degenerate { u: f64, v: f64 },
    #[error("grazing incidence at ({u}, {v})")]
    Grazing { u: f64, v: f64 },
    #[error("ray source lies on the surface at ({u}, {v})")]
    SourceOnSurface { u: f64, v: f64 },
    #[error("finite-difference stencil around ({u}, {v}) leaves the domain")]
    OutOfDomain { u: f64, v: f64 },
    #[error("projected ray derivatives are singular at ({u}, {v})")]
    Singular { u: f64, v: f64 },
    #[error("sheets have {found} points, grid has {expected}")]
    GridMismatch { expected: usize, found: usize },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RaySample {
    pub origin: Vec3,
    pub direction: Vec3,
    pub u: f64,
    pub v: f64,
}

/// The reflected ray leaving the mirror at `(u, v)`.
pub fn reflected_ray<S: Surface + ?Sized>(
    surface: &S,
    field: &IncidentField,
    u: f64,
    v: f64,
) -> Result<RaySample, OracleError> {
    let jet = surface.jet(u, v)?;
    let origin = jet.value();
    let cross = jet.d_u().cross(&jet.d_v());
    let len = cross.norm();
    if !(len > 0.0) {
        return Err(OracleError::Degenerate { u, v });
    }
    let a = match field {
        IncidentField::Flat { a } => *a,
        IncidentField::Point { source } => {
            let d = origin - source;
            let dist = d.norm();
            if !(dist > 1e-12) {
                return Err(OracleError::SourceOnSurface { u, v });
            }
            d / dist
        }
    };
    let mut n = cross / len;
    if a.dot(&n) > 0.0 {
        n = -n;
    }
    let c = a.dot(&n);
    if !(c.abs() > 1e-6) {
        return Err(OracleError::Grazing { u, v });
    }
    Ok(RaySample {
        origin,
        direction: a - 2.0 * c * n,
        u,
        v,
    })
}

/// Focal distances along one ray, as roots of
/// `c2 lambda^2 + c1 lambda + c0 = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FocalDistances {
    pub ray: RaySample,
    /// Ascending by `kappa`; `None` marks a root at infinity.
    pub lambda: [Option<f64>; 2],
    /// Eigenvalues of the projected `D R^-1`; `lambda = -1 / kappa`.
    pub kappa: [f64; 2],
    /// `[c0, c1, c2]`.
    pub coeffs: [f64; 3],
}

impl FocalDistances {
    pub fn focal_point(&self, i: usize) -> Option<Vec3> {
        self.lambda[i].map(|l| self.ray.origin + self.ray.direction * l)
    }
}

/// Focal distances of an arbitrary two-parameter ray family at `(u, v)`.
///
/// The reflected rays form a normal congruence, so `D R^-1` is symmetric up
/// to truncation error; its symmetric part is used, which keeps coincident
/// roots real.
pub fn focal_distances_of_rays<F>(rays: F, u: f64, v: f64, h: f64, eps_inf: f64) -> Result<FocalDistances, OracleError>
where
    F: Fn(f64, f64) -> Result<RaySample, OracleError>,
{
    let centre = rays(u, v)?;
    let (up, um) = (rays(u + h, v)?, rays(u - h, v)?);
    let (vp, vm) = (rays(u, v + h)?, rays(u, v - h)?);
    let r_u = (up.origin - um.origin) / (2.0 * h);
    let r_v = (vp.origin - vm.origin) / (2.0 * h);
    let b_u = (up.direction - um.direction) / (2.0 * h);
    let b_v = (vp.direction - vm.direction) / (2.0 * h);

    let b = centre.direction;
    let helper = if b.x.abs() < 0.6 { Vec3::x() } else { Vec3::y() };
    let p1 = b.cross(&helper).normalize();
    let p2 = b.cross(&p1);
    let proj = |x: &Vec3, y: &Vec3| Matrix2::new(p1.dot(x), p1.dot(y), p2.dot(x), p2.dot(y));
    let r = proj(&r_u, &r_v);
    let d = proj(&b_u, &b_v);

    let det_r = r.determinant();
    let scale = r.norm_squared();
    if !(det_r.abs() > 1e-12 * scale) {
        return Err(OracleError::Singular { u, v });
    }
    let x = d * r.try_inverse().ok_or(OracleError::Singular { u, v })?;
    let off = 0.5 * (x[(0, 1)] + x[(1, 0)]);
    let (lo, hi, _) = sym_eigen2(x[(0, 0)], off, x[(1, 1)]);
    let det_x = x[(0, 0)] * x[(1, 1)] - off * off;

    let root = |kappa: f64| if kappa.abs() > eps_inf { Some(-1.0 / kappa) } else { None };
    Ok(FocalDistances {
        ray: centre,
        lambda: [root(lo), root(hi)],
        kappa: [lo, hi],
        coeffs: [det_r, det_r * (x[(0, 0)] + x[(1, 1)]), det_r * det_x],
    })
}

/// Focal distances at `(u, v)` from central differences of step `h`. The
/// whole stencil must lie in `domain`.
pub fn focal_distances_bruteforce<S: Surface + ?Sized>(
    surface: &S,
    field: &IncidentField,
    domain: &Domain,
    u: f64,
    v: f64,
    h: f64,
) -> Result<FocalDistances, OracleError> {
    if !domain.contains(u - h, v - h) || !domain.contains(u + h, v + h) {
        return Err(OracleError::OutOfDomain { u, v });
    }
    focal_distances_of_rays(|s, t| reflected_ray(surface, field, s, t), u, v, h, DEFAULT_EPS_INF)
}

#[derive(Clone, Copy, Debug)]
pub struct ValidationOptions {
    pub fd_step: f64,
    pub tol: f64,
    /// Focal points farther than this from the mirror are not compared.
    pub max_radius: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub fd_step: f64,
    pub tol: f64,
    pub max_radius: f64,
    /// Caustic points compared (two per vertex at most).
    pub compared: usize,
    /// Lit vertices where the stencil left the domain or the oracle failed.
    pub skipped: usize,
    /// Roots that are finite on one side and far on the other.
    pub disagreements: usize,
    pub max_error: f64,
    pub mean_error: f64,
    pub p50: f64,
    pub p95: f64,
    pub p99: f64,
    /// Parameters of the worst point.
    pub worst: Option<(f64, f64)>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.max_error <= self.tol && self.disagreements == 0
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "validation {}", if self.passed() { "PASS" } else { "FAIL" })?;
        writeln!(f, "fd_step {:e}", self.fd_step)?;
        writeln!(f, "tol {:e}", self.tol)?;
        writeln!(f, "max_radius {:e}", self.max_radius)?;
        writeln!(f, "compared {}", self.compared)?;
        writeln!(f, "skipped {}", self.skipped)?;
        writeln!(f, "disagreements {}", self.disagreements)?;
        writeln!(f, "max_error {:.6e}", self.max_error)?;
        writeln!(f, "mean_error {:.6e}", self.mean_error)?;
        writeln!(f, "p50_error {:.6e}", self.p50)?;
        writeln!(f, "p95_error {:.6e}", self.p95)?;
        writeln!(f, "p99_error {:.6e}", self.p99)?;
        if let Some((u, v)) = self.worst {
            writeln!(f, "worst_at {u:.9} {v:.9}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy)]
enum Side {
    Near(Vec3),
    Far(f64),
}

fn classify(lambda: Option<f64>, point: Option<Vec3>, max_radius: f64) -> Side {
    match (lambda, point) {
        (Some(l), Some(p)) if l.abs() <= max_radius => Side::Near(p),
        (Some(l), _) => Side::Far(l.abs()),
        _ => Side::Far(f64::INFINITY),
    }
}

/// Errors of one pairing: `(disagreements, total distance, per-point errors)`.
/// A root just beyond `max_radius` on one side and just inside on the other
/// is neither compared nor counted as a disagreement.
fn score(a: [Side; 2], b: [Side; 2], max_radius: f64) -> (usize, f64, Vec<f64>) {
    let mut bad = 0;
    let mut total = 0.0;
    let mut errs = Vec::new();
    for (x, y) in a.into_iter().zip(b) {
        match (x, y) {
            (Side::Near(p), Side::Near(q)) => {
                let e = (p - q).norm();
                total += e;
                errs.push(e);
            }
            (Side::Near(_), Side::Far(l)) | (Side::Far(l), Side::Near(_)) => {
                if l > 2.0 * max_radius {
                    bad += 1;
                }
            }
            (Side::Far(_), Side::Far(_)) => {}
        }
    }
    (bad, total, errs)
}

/// Compare closed-form caustic sheets with the oracle at every lit vertex.
pub fn validate_sheets<S: Surface + ?Sized>(
    result: &CausticResult,
    surface: &S,
    opts: &ValidationOptions,
) -> Result<ValidationReport, OracleError> {
    let n = result.grid.len();
    for sheet in &result.sheets {
        if sheet.points.len() != n {
            return Err(OracleError::GridMismatch {
                expected: n,
                found: sheet.points.len(),
            });
        }
    }

    enum Outcome {
        Masked,
        Skipped,
        Done(usize, Vec<f64>),
    }

    let outcomes: Vec<Outcome> = (0..n)
        .into_par_iter()
        .map(|k| {
            if !result.point_flags[k].is_valid() {
                return Outcome::Masked;
            }
            let (u, v) = result.grid.param(k);
            let Ok(fd) = focal_distances_bruteforce(
                surface,
                &result.field,
                &result.grid.domain,
                u,
                v,
                opts.fd_step,
            ) else {
                return Outcome::Skipped;
            };
            let oracle = [0, 1].map(|i| classify(fd.lambda[i], fd.focal_point(i), opts.max_radius));
            let closed = [0, 1].map(|s| {
                let p = &result.sheets[s].points[k];
                let lambda = if p.radius.is_finite() { Some(p.radius) } else { None };
                let xi = if p.flags.is_valid() { Some(p.xi) } else { None };
                classify(lambda, xi, opts.max_radius)
            });
            let straight = score(oracle, closed, opts.max_radius);
            let crossed = score(oracle, [closed[1], closed[0]], opts.max_radius);
            let best = if (crossed.0, crossed.1) < (straight.0, straight.1) {
                crossed
            } else {
                straight
            };
            Outcome::Done(best.0, best.2)
        })
        .collect();

    let mut errors: Vec<(f64, usize)> = Vec::new();
    let (mut skipped, mut disagreements) = (0, 0);
    for (k, o) in outcomes.into_iter().enumerate() {
        match o {
            Outcome::Masked => {}
            Outcome::Skipped => skipped += 1,
            Outcome::Done(bad, errs) => {
                disagreements += bad;
                errors.extend(errs.into_iter().map(|e| (e, k)));
            }
        }
    }

    let worst = errors
        .iter()
        .copied()
        .fold(None, |m: Option<(f64, usize)>, x| match m {
            Some(best) if best.0 >= x.0 => Some(best),
            _ => Some(x),
        });
    let mut sorted: Vec<f64> = errors.iter().map(|e| e.0).collect();
    sorted.sort_by(f64::total_cmp);
    let pct = |q: f64| {
        if sorted.is_empty() {
            0.0
        } else {
            let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
            sorted[rank - 1]
        }
    };
    let mean = if sorted.is_empty() {
        0.0
    } else {
        sorted.iter().sum::<f64>() / sorted.len() as f64
    };
    Ok(ValidationReport {
        fd_step: opts.fd_step,
        tol: opts.tol,
        max_radius: opts.max_radius,
        compared: sorted.len(),
        skipped,
        disagreements,
        max_error: worst.map(|w| w.0).unwrap_or(0.0),
        mean_error: mean,
        p50: pct(0.5),
        p95: pct(0.95),
        p99: pct(0.99),
        worst: worst.map(|(_, k)| result.grid.param(k)),
    })
}
