//! Caustics of the reflected front.
//!
//! At the moment of reflection the front coincides with the mirror, and its
//! focal set does not depend on how far the front has travelled since. The
//! front's fundamental forms at that moment follow from the mirror's:
//!
//! ```text
//! g*_ij = g_ij - (r_i, a)(r_j, a)
//! B*_ij = -2 cos(theta) B_ij                  (flat incident front)
//! B*_ij = -2 cos(theta) B_ij - g*_ij / |r - O| (point source at O)
//! ```
//!
//! Its principal curvatures `k*` are the roots of
//! `mu^2 + 2 cos(theta) (2H + k_n(a_t) tan^2(theta)) mu + 4K = 0` with
//! `mu = k*` (flat) or `mu = k* + 1/|r - O|` (point), and each sheet of the
//! caustic is `xi = r + b / k*`.

mod front;
mod sheets;

use nalgebra::Matrix2;
use thiserror::Error;

use crate::diffgeo::{
    cholesky2, fundamental_forms, frame_oriented, normal_curvature, shape_frame, sym_eigen2,
    tangent_coords, FrameData, GeometryError, Orientation, ShapeFrame, SurfaceForms,
};
use crate::flags::Flags;
use crate::jet::Vec3;
use crate::lang::EvalError;
use crate::surface::{Similarity, Surface};

pub use front::{reflected_front, reflected_front_point, FrontGrid, FrontPoint};
pub use sheets::{
    compute_caustic_sheets, CausticResult, CausticSheet, Degeneracy, FrontStatistics, SheetStats,
};

pub const DEFAULT_EPS_GRAZING: f64 = 1e-6;
pub const DEFAULT_EPS_INF: f64 = 1e-9;

/// The incoming wavefront.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum IncidentField {
    /// Parallel rays travelling along the unit vector `a`.
    Flat { a: Vec3 },
    /// Spherical front emitted from `source`.
    Point { source: Vec3 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldKind {
    Flat,
    Point,
}

impl IncidentField {
    /// A flat front along `a`, normalized.
    pub fn flat(a: Vec3) -> Result<Self, PointError> {
        let n = a.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(PointError::BadField("flat direction must be a non-zero finite vector"));
        }
        Ok(IncidentField::Flat { a: a / n })
    }

    pub fn point(source: Vec3) -> Result<Self, PointError> {
        if !source.iter().all(|x| x.is_finite()) {
            return Err(PointError::BadField("source position must be finite"));
        }
        Ok(IncidentField::Point { source })
    }

    pub fn kind(&self) -> FieldKind {
        match self {
            IncidentField::Flat { .. } => FieldKind::Flat,
            IncidentField::Point { .. } => FieldKind::Point,
        }
    }

    pub fn transformed(&self, map: &Similarity) -> Self {
        match self {
            IncidentField::Flat { a } => IncidentField::Flat {
                a: map.apply_direction(a),
            },
            IncidentField::Point { source } => IncidentField::Point {
                source: map.apply_point(source),
            },
        }
    }
}

/// Why a single point produced no caustic data.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PointError {
    #[error("point is on the unlit side of the mirror")]
    Shadow,
    #[error("grazing incidence")]
    Grazing,
    #[error("ray source coincides with the surface point")]
    SourceOnSurface,
    #[error("invalid incident field: {0}")]
    BadField(&'static str),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),
}

/// A run-level failure, located at the grid point that caused it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CausticError {
    #[error("at (u, v) = ({u}, {v}): {source}")]
    Point {
        u: f64,
        v: f64,
        #[source]
        source: PointError,
    },
    #[error("empty sampling grid")]
    EmptyGrid,
    #[error("no lit points: every sample is in shadow or at grazing incidence")]
    NoLitPoints,
}

impl PointError {
    /// Shadow and grazing points are masked; everything else aborts a run.
    pub fn mask(&self) -> Option<u8> {
        match self {
            PointError::Shadow => Some(Flags::SHADOW),
            PointError::Grazing => Some(Flags::GRAZING),
            _ => None,
        }
    }
}

/// Unit direction of the incident ray arriving at `r`, and the distance
/// from the source (zero for a flat front).
pub fn incident_direction(field: &IncidentField, r: &Vec3) -> Result<(Vec3, f64), PointError> {
    match field {
        IncidentField::Flat { a } => Ok((*a, 0.0)),
        IncidentField::Point { source } => {
            let d = r - source;
            let dist = d.norm();
            if !(dist > 1e-12) {
                return Err(PointError::SourceOnSurface);
            }
            Ok((d / dist, dist))
        }
    }
}

/// Mirror reflection `b = a - 2 (a, n) n`.
pub fn reflect_direction(a: &Vec3, n: &Vec3) -> Vec3 {
    a - n * (2.0 * a.dot(n))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReflectionData {
    pub a: Vec3,
    pub cos_theta: f64,
    pub b: Vec3,
    /// Tangential part of `a`, in space and in `(u, v)` coordinates.
    pub a_t: Vec3,
    pub a_t_uv: [f64; 2],
    /// Normal curvature along `a_t`; zero at normal incidence.
    pub k_n_at: f64,
    /// `|r - O|` for a point source, zero for a flat front.
    pub r_dist: f64,
}

pub fn reflection_data(
    frame: &FrameData,
    forms: &SurfaceForms,
    a: &Vec3,
    r_dist: f64,
) -> ReflectionData {
    let n = &frame.n;
    let cos_theta = a.dot(n);
    let a_t = a - n * cos_theta;
    let a_t_uv = tangent_coords(frame, forms, a);
    let k_n_at = normal_curvature(forms, &a_t_uv).unwrap_or(0.0);
    ReflectionData {
        a: *a,
        cos_theta,
        b: reflect_direction(a, n),
        a_t,
        a_t_uv,
        k_n_at,
        r_dist,
    }
}

/// Fundamental forms of the reflected front at the mirror, and its
/// Weingarten matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModifiedForms {
    pub g11: f64,
    pub g12: f64,
    pub g22: f64,
    pub b11: f64,
    pub b12: f64,
    pub b22: f64,
    /// `A* = (g*)^-1 B*` for a flat front, `W* = A* - E / r` for a point source.
    pub weingarten: Matrix2<f64>,
    /// `1 / r` for a point source, zero for a flat front.
    pub shift: f64,
    /// Eigenvalues of `A*` (before the shift), ascending.
    pub a_eigen: [f64; 2],
}

impl ModifiedForms {
    pub fn det_g(&self) -> f64 {
        self.g11 * self.g22 - self.g12 * self.g12
    }
}

fn check_lit(c: f64, eps_grazing: f64) -> Result<(), PointError> {
    if !(c.abs() > eps_grazing) {
        return Err(PointError::Grazing);
    }
    if c > 0.0 {
        return Err(PointError::Shadow);
    }
    Ok(())
}

pub fn modified_forms(
    forms: &SurfaceForms,
    frame: &FrameData,
    refl: &ReflectionData,
    kind: FieldKind,
    eps_grazing: f64,
) -> Result<ModifiedForms, PointError> {
    check_lit(refl.cos_theta, eps_grazing)?;
    let c = refl.cos_theta;
    let t = [frame.r_u.dot(&refl.a), frame.r_v.dot(&refl.a)];
    let (g11, g12, g22) = (
        forms.g11 - t[0] * t[0],
        forms.g12 - t[0] * t[1],
        forms.g22 - t[1] * t[1],
    );
    let flat_b = [-2.0 * c * forms.b11, -2.0 * c * forms.b12, -2.0 * c * forms.b22];
    let shift = match kind {
        FieldKind::Flat => 0.0,
        FieldKind::Point => {
            if !(refl.r_dist > 1e-9) {
                return Err(PointError::SourceOnSurface);
            }
            1.0 / refl.r_dist
        }
    };
    let (b11, b12, b22) = (
        flat_b[0] - shift * g11,
        flat_b[1] - shift * g12,
        flat_b[2] - shift * g22,
    );

    // (g*)^-1 by Sherman-Morrison: g* = g - t t^T and 1 - t^T g^-1 t = cos^2.
    let det = forms.det_g();
    let ginv = Matrix2::new(forms.g22, -forms.g12, -forms.g12, forms.g11) / det;
    let w = ginv * nalgebra::Vector2::new(t[0], t[1]);
    let gs_inv = ginv + w * w.transpose() / (c * c);
    let bflat = Matrix2::new(flat_b[0], flat_b[1], flat_b[1], flat_b[2]);
    let a_star = gs_inv * bflat;

    // Eigenvalues of A* through the similar symmetric matrix L^T B* L,
    // where (g*)^-1 = L L^T.
    let (l11, l21, l22) = cholesky2(gs_inv[(0, 0)], gs_inv[(0, 1)], gs_inv[(1, 1)])
        .ok_or(PointError::Grazing)?;
    let l = Matrix2::new(l11, 0.0, l21, l22);
    let sym = l.transpose() * bflat * l;
    let (lo, hi, _) = sym_eigen2(sym[(0, 0)], 0.5 * (sym[(0, 1)] + sym[(1, 0)]), sym[(1, 1)]);

    Ok(ModifiedForms {
        g11,
        g12,
        g22,
        b11,
        b12,
        b22,
        weingarten: a_star - Matrix2::identity() * shift,
        shift,
        a_eigen: [lo, hi],
    })
}

/// `mu^2 + p mu + q = 0`, with the discriminant carried separately.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CharacteristicQuadratic {
    pub p: f64,
    pub q: f64,
    /// `p^2 - 4q`, evaluated from the principal-frame components of `a` so
    /// that double roots stay accurate.
    pub disc: f64,
    /// `k* = mu - shift`.
    pub shift: f64,
}

pub fn caustic_coefficients(
    forms: &SurfaceForms,
    shape: &ShapeFrame,
    refl: &ReflectionData,
    kind: FieldKind,
    eps_grazing: f64,
) -> Result<CharacteristicQuadratic, PointError> {
    check_lit(refl.cos_theta, eps_grazing)?;
    let c = refl.cos_theta;
    // k_n(a_t) tan^2 = B(a_t, a_t) / cos^2, since g(a_t, a_t) = sin^2; this
    // is zero at normal incidence without a 0 * inf.
    let bat = forms.b(&refl.a_t_uv, &refl.a_t_uv);
    let p = 2.0 * c * (2.0 * forms.h + bat / (c * c));
    let q = 4.0 * forms.k;

    // In the principal frame, a = a1 e1 + a2 e2 + a3 n:
    // (c^2 / 4) disc = (alpha k1 - beta k2)^2 + 4 a1^2 a2^2 k1 k2
    // with alpha = a1^2 + a3^2, beta = a2^2 + a3^2.
    let [a1, a2, _] = shape.decompose(&refl.a);
    let (a1s, a2s, cs) = (a1 * a1, a2 * a2, c * c);
    let (alpha, beta) = (a1s + cs, a2s + cs);
    let diff = alpha * forms.k1 - beta * forms.k2;
    let disc = 4.0 * (diff * diff + 4.0 * a1s * a2s * forms.k1 * forms.k2) / cs;

    let shift = match kind {
        FieldKind::Flat => 0.0,
        FieldKind::Point => 1.0 / refl.r_dist,
    };
    Ok(CharacteristicQuadratic { p, q, disc, shift })
}

/// Roots of the characteristic quadratic, cross-checked against the
/// eigenvalues of the front's Weingarten matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SheetCurvatures {
    /// Principal curvatures `k*` of the reflected front, ascending.
    pub k: [f64; 2],
    /// The corresponding `mu` roots.
    pub mu: [f64; 2],
    /// `max |mu_quadratic - mu_eigen|` over the matched pair.
    pub residual: f64,
}

impl SheetCurvatures {
    /// Whether the residual is within `1e-8` of the root scale.
    pub fn consistent(&self) -> bool {
        let scale = self.mu.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        self.residual <= 1e-8 * scale
    }
}

fn quadratic_roots(p: f64, q: f64, disc: f64) -> Result<[f64; 2], PointError> {
    let tol = 1e-12 * p.abs().powi(2).max(q.abs()).max(1.0);
    let disc = if disc < 0.0 {
        if disc >= -tol {
            0.0
        } else {
            return Err(PointError::Inconsistent(format!(
                "negative discriminant {disc:e} for mu^2 + {p} mu + {q}"
            )));
        }
    } else {
        disc
    };
    let s = disc.sqrt();
    let big = if p > 0.0 { -0.5 * (p + s) } else { 0.5 * (s - p) };
    let small = if big != 0.0 { q / big } else { 0.0 };
    Ok(if small <= big { [small, big] } else { [big, small] })
}

pub fn solve_sheet_curvatures(
    mods: &ModifiedForms,
    quad: &CharacteristicQuadratic,
) -> Result<SheetCurvatures, PointError> {
    let mu = quadratic_roots(quad.p, quad.q, quad.disc)?;
    let eig = mods.a_eigen;
    let residual = (mu[0] - eig[0]).abs().max((mu[1] - eig[1]).abs());
    Ok(SheetCurvatures {
        k: [mu[0] - quad.shift, mu[1] - quad.shift],
        mu,
        residual,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CausticPoint {
    pub k_star: f64,
    pub radius: f64,
    pub xi: Vec3,
    pub sheet: u8,
    pub flags: Flags,
}

impl CausticPoint {
    pub fn masked(sheet: u8, flags: Flags) -> Self {
        CausticPoint {
            k_star: f64::NAN,
            radius: f64::NAN,
            xi: Vec3::repeat(f64::NAN),
            sheet,
            flags,
        }
    }
}

/// `xi = r + b / k*`, or a flagged point when `|k*| <= eps_inf`.
pub fn caustic_point(
    r: &Vec3,
    b: &Vec3,
    k_star: f64,
    kind: FieldKind,
    eps_inf: f64,
    sheet: u8,
) -> CausticPoint {
    if !(k_star.abs() > eps_inf) {
        let reason = match kind {
            FieldKind::Flat => Flags::AT_INFINITY,
            FieldKind::Point => Flags::EXCLUDED_ZERO_ROOT,
        };
        return CausticPoint {
            k_star,
            radius: f64::INFINITY,
            ..CausticPoint::masked(sheet, Flags::only(reason))
        };
    }
    let radius = 1.0 / k_star;
    CausticPoint {
        k_star,
        radius,
        xi: r + b * radius,
        sheet,
        flags: Flags::valid(),
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CausticOptions {
    pub eps_grazing: f64,
    pub eps_inf: f64,
    pub orientation: Orientation,
}

impl Default for CausticOptions {
    fn default() -> Self {
        CausticOptions {
            eps_grazing: DEFAULT_EPS_GRAZING,
            eps_inf: DEFAULT_EPS_INF,
            orientation: Orientation::Auto,
        }
    }
}

/// Everything computed at one lit point.
#[derive(Clone, Copy, Debug)]
pub struct PointAnalysis {
    pub u: f64,
    pub v: f64,
    pub frame: FrameData,
    pub forms: SurfaceForms,
    pub shape: ShapeFrame,
    pub refl: ReflectionData,
    pub mods: ModifiedForms,
    pub quad: CharacteristicQuadratic,
    pub roots: SheetCurvatures,
}

impl PointAnalysis {
    pub fn sheet_point(&self, k_star: f64, sheet: u8, eps_inf: f64, kind: FieldKind) -> CausticPoint {
        caustic_point(&self.frame.r, &self.refl.b, k_star, kind, eps_inf, sheet)
    }
}

/// Run the whole per-point chain at `(u, v)`.
pub fn analyze_point<S: Surface + ?Sized>(
    surface: &S,
    field: &IncidentField,
    u: f64,
    v: f64,
    opts: &CausticOptions,
) -> Result<PointAnalysis, PointError> {
    let jet = surface.jet(u, v)?;
    let (a, r_dist) = incident_direction(field, &jet.value())?;
    let frame = frame_oriented(&jet, &a, opts.orientation)?;
    let forms = fundamental_forms(&frame)?;
    let shape = shape_frame(&frame, &forms);
    let refl = reflection_data(&frame, &forms, &a, r_dist);
    let kind = field.kind();
    let mods = modified_forms(&forms, &frame, &refl, kind, opts.eps_grazing)?;
    let quad = caustic_coefficients(&forms, &shape, &refl, kind, opts.eps_grazing)?;
    let roots = solve_sheet_curvatures(&mods, &quad)?;
    Ok(PointAnalysis {
        u,
        v,
        frame,
        forms,
        shape,
        refl,
        mods,
        quad,
        roots,
    })
}

#[cfg(test)]
mod tests;
