//! Oriented frame, fundamental forms and curvature data at a surface point.
//!
//! Sign convention: `B_ij = (r_ij, n)`. With this choice the unit sphere seen
//! with its inward normal has both principal curvatures equal to `+1`.

use nalgebra::{Matrix2, Vector2};
use thiserror::Error;

use crate::jet::{Jet2Vec3, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum GeometryError {
    #[error("degenerate parameterization: r_u x r_v vanishes")]
    Degenerate,
    #[error("zero-length tangent direction")]
    ZeroDirection,
}

/// How the unit normal is chosen at each point.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Orientation {
    /// Per point, the sign that makes `(a, n) <= 0` for the incident ray.
    #[default]
    Auto,
    /// `n = r_u x r_v / |r_u x r_v|` everywhere.
    Plus,
    /// `n = -r_u x r_v / |r_u x r_v|` everywhere.
    Minus,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameData {
    pub r: Vec3,
    pub r_u: Vec3,
    pub r_v: Vec3,
    pub r_uu: Vec3,
    pub r_uv: Vec3,
    pub r_vv: Vec3,
    pub n: Vec3,
    /// The raw cross-product normal was negated.
    pub orientation_flipped: bool,
    /// `(incident, n) == 0` exactly.
    pub grazing: bool,
}

fn raw_normal(jet: &Jet2Vec3) -> Result<Vec3, GeometryError> {
    let (ru, rv) = (jet.d_u(), jet.d_v());
    let c = ru.cross(&rv);
    let norm = c.norm();
    let (lu, lv) = (ru.norm(), rv.norm());
    // Skewed tangents, or one tangent collapsing relative to the other.
    if !(norm >= 1e-12 * lu * lv) || !(norm >= 1e-12 * lu.max(lv).powi(2)) || norm == 0.0 {
        return Err(GeometryError::Degenerate);
    }
    Ok(c / norm)
}

fn build_frame(jet: &Jet2Vec3, n: Vec3, flipped: bool, incident: &Vec3) -> FrameData {
    FrameData {
        r: jet.value(),
        r_u: jet.d_u(),
        r_v: jet.d_v(),
        r_uu: jet.d_uu(),
        r_uv: jet.d_uv(),
        r_vv: jet.d_vv(),
        n,
        orientation_flipped: flipped,
        grazing: incident.dot(&n) == 0.0,
    }
}

/// Frame with the normal oriented against the incident direction.
pub fn frame_at(jet: &Jet2Vec3, incident_hint: &Vec3) -> Result<FrameData, GeometryError> {
    frame_oriented(jet, incident_hint, Orientation::Auto)
}

pub fn frame_oriented(
    jet: &Jet2Vec3,
    incident_hint: &Vec3,
    orientation: Orientation,
) -> Result<FrameData, GeometryError> {
    let raw = raw_normal(jet)?;
    let flip = match orientation {
        Orientation::Auto => incident_hint.dot(&raw) > 0.0,
        Orientation::Plus => false,
        Orientation::Minus => true,
    };
    let n = if flip { -raw } else { raw };
    Ok(build_frame(jet, n, flip, incident_hint))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfaceForms {
    pub g11: f64,
    pub g12: f64,
    pub g22: f64,
    pub b11: f64,
    pub b12: f64,
    pub b22: f64,
    /// Mean curvature.
    pub h: f64,
    /// Gaussian curvature.
    pub k: f64,
    pub k1: f64,
    pub k2: f64,
    /// Principal directions in `(u, v)` coordinates, unit length in the
    /// metric `g`. `dir1` belongs to `k1`.
    pub dir1: [f64; 2],
    pub dir2: [f64; 2],
    /// `k1` and `k2` coincide within the umbilic threshold; the directions
    /// are then an arbitrary orthonormal pair.
    pub umbilic: bool,
}

impl SurfaceForms {
    pub fn metric(&self) -> Matrix2<f64> {
        Matrix2::new(self.g11, self.g12, self.g12, self.g22)
    }

    pub fn second(&self) -> Matrix2<f64> {
        Matrix2::new(self.b11, self.b12, self.b12, self.b22)
    }

    pub fn det_g(&self) -> f64 {
        self.g11 * self.g22 - self.g12 * self.g12
    }

    /// The shape operator `g^-1 B` in coordinates.
    pub fn shape_operator(&self) -> Matrix2<f64> {
        let d = self.det_g();
        let inv = Matrix2::new(self.g22, -self.g12, -self.g12, self.g11) / d;
        inv * self.second()
    }

    pub fn g(&self, x: &[f64; 2], y: &[f64; 2]) -> f64 {
        self.g11 * x[0] * y[0] + self.g12 * (x[0] * y[1] + x[1] * y[0]) + self.g22 * x[1] * y[1]
    }

    pub fn b(&self, x: &[f64; 2], y: &[f64; 2]) -> f64 {
        self.b11 * x[0] * y[0] + self.b12 * (x[0] * y[1] + x[1] * y[0]) + self.b22 * x[1] * y[1]
    }
}

/// Eigen-decomposition of a symmetric 2x2 matrix `[[a, b], [b, c]]`:
/// returns `(lo, hi, angle)` where `(cos, sin)(angle)` spans the `hi`
/// eigenspace. The gap is computed as a hypotenuse, so coincident
/// eigenvalues come out accurate to round-off.
pub fn sym_eigen2(a: f64, b: f64, c: f64) -> (f64, f64, f64) {
    let mean = 0.5 * (a + c);
    let rad = (0.5 * (a - c)).hypot(b);
    let angle = 0.5 * (2.0 * b).atan2(a - c);
    (mean - rad, mean + rad, angle)
}

/// Cholesky factor of a 2x2 SPD matrix, as `(l11, l21, l22)`.
pub(crate) fn cholesky2(a11: f64, a12: f64, a22: f64) -> Option<(f64, f64, f64)> {
    let det = a11 * a22 - a12 * a12;
    if !(a11 > 0.0 && det > 0.0) {
        return None;
    }
    let l11 = a11.sqrt();
    Some((l11, a12 / l11, det.sqrt() / l11))
}

pub fn fundamental_forms(frame: &FrameData) -> Result<SurfaceForms, GeometryError> {
    let (ru, rv, n) = (frame.r_u, frame.r_v, frame.n);
    let (g11, g12, g22) = (ru.dot(&ru), ru.dot(&rv), rv.dot(&rv));
    let (b11, b12, b22) = (frame.r_uu.dot(&n), frame.r_uv.dot(&n), frame.r_vv.dot(&n));
    let det_g = g11 * g22 - g12 * g12;
    let (l11, l21, l22) = cholesky2(g11, g12, g22).ok_or(GeometryError::Degenerate)?;

    // Shape operator in the orthonormal tangent basis F = [r_u r_v] L^-T.
    let linv = Matrix2::new(1.0 / l11, 0.0, -l21 / (l11 * l22), 1.0 / l22);
    let m = linv * Matrix2::new(b11, b12, b12, b22) * linv.transpose();
    let (k1, k2, angle) = sym_eigen2(m[(0, 0)], 0.5 * (m[(0, 1)] + m[(1, 0)]), m[(1, 1)]);

    let (s, c) = angle.sin_cos();
    let y2 = Vector2::new(c, s);
    let y1 = Vector2::new(s, -c);
    let lt_inv = linv.transpose();
    let x1 = lt_inv * y1;
    let x2 = lt_inv * y2;

    let h = (g22 * b11 - 2.0 * g12 * b12 + g11 * b22) / (2.0 * det_g);
    let k = (b11 * b22 - b12 * b12) / det_g;
    Ok(SurfaceForms {
        g11,
        g12,
        g22,
        b11,
        b12,
        b22,
        h,
        k,
        k1,
        k2,
        dir1: [x1[0], x1[1]],
        dir2: [x2[0], x2[1]],
        umbilic: (k2 - k1).abs() < 1e-9 * k1.abs().max(1.0),
    })
}

/// Right-handed orthonormal frame `(e1, e2, e3 = n)` with `e1`, `e2` along
/// the principal directions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShapeFrame {
    pub e1: Vec3,
    pub e2: Vec3,
    pub e3: Vec3,
}

impl ShapeFrame {
    /// Components of `x` in this frame.
    pub fn decompose(&self, x: &Vec3) -> [f64; 3] {
        [x.dot(&self.e1), x.dot(&self.e2), x.dot(&self.e3)]
    }
}

pub fn tangent_vector(frame: &FrameData, x: &[f64; 2]) -> Vec3 {
    frame.r_u * x[0] + frame.r_v * x[1]
}

pub fn shape_frame(frame: &FrameData, forms: &SurfaceForms) -> ShapeFrame {
    let e1 = tangent_vector(frame, &forms.dir1);
    let mut e2 = tangent_vector(frame, &forms.dir2);
    if e1.cross(&e2).dot(&frame.n) < 0.0 {
        e2 = -e2;
    }
    ShapeFrame { e1, e2, e3: frame.n }
}

/// `B(X, X) / g(X, X)` for a tangent direction given in `(u, v)` coordinates.
pub fn normal_curvature(forms: &SurfaceForms, x: &[f64; 2]) -> Result<f64, GeometryError> {
    let gxx = forms.g(x, x);
    if !(gxx > 0.0) {
        return Err(GeometryError::ZeroDirection);
    }
    Ok(forms.b(x, x) / gxx)
}

/// Coordinates `(X^u, X^v)` of a 3-vector's tangential part: solves
/// `g X = ((w, r_u), (w, r_v))`.
pub fn tangent_coords(frame: &FrameData, forms: &SurfaceForms, w: &Vec3) -> [f64; 2] {
    let rhs = Vector2::new(w.dot(&frame.r_u), w.dot(&frame.r_v));
    let d = forms.det_g();
    let x = Matrix2::new(forms.g22, -forms.g12, -forms.g12, forms.g11) * rhs / d;
    [x[0], x[1]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::Jet2;
    use std::f64::consts::FRAC_PI_6;

    fn sphere_jet(u: f64, v: f64) -> Jet2Vec3 {
        let (uu, vv) = (Jet2::var_u(u), Jet2::var_v(v));
        Jet2Vec3::new(uu.cos() * vv.cos(), uu.cos() * vv.sin(), uu.sin())
    }

    fn cylinder_jet(u: f64, v: f64) -> Jet2Vec3 {
        let s = Jet2::var_u(u);
        Jet2Vec3::new(s.cos(), s.sin(), Jet2::var_v(v))
    }

    fn plane_jet(u: f64, v: f64) -> Jet2Vec3 {
        Jet2Vec3::new(Jet2::var_u(u), Jet2::var_v(v), Jet2::constant(0.0))
    }

    #[test]
    fn sphere_normal_points_inward_for_axial_light() {
        let j = sphere_jet(FRAC_PI_6, 0.0);
        let a = Vec3::new(0.0, 0.0, 1.0);
        let f = frame_at(&j, &a).unwrap();
        assert!((f.n + f.r).norm() < 1e-15);
        assert!((a.dot(&f.n) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn plane_normal_faces_the_light() {
        let f = frame_at(&plane_jet(0.3, 0.4), &Vec3::new(0.0, 0.0, -1.0)).unwrap();
        assert_eq!(f.n, Vec3::new(0.0, 0.0, 1.0));
        assert!(!f.orientation_flipped);
        let g = frame_at(&plane_jet(0.3, 0.4), &Vec3::new(0.0, 0.0, 1.0)).unwrap();
        assert!(g.orientation_flipped);
        let graze = frame_at(&plane_jet(0.3, 0.4), &Vec3::new(1.0, 0.0, 0.0)).unwrap();
        assert!(graze.grazing);
    }

    #[test]
    fn cylinder_normal_is_frenet_normal_on_concave_side() {
        let s = 0.4;
        let f = frame_at(&cylinder_jet(s, 0.0), &Vec3::new(1.0, 0.0, 0.0)).unwrap();
        let nu = -Vec3::new(s.cos(), s.sin(), 0.0);
        assert!((f.n - nu).norm() < 1e-15);
    }

    #[test]
    fn degenerate_chart() {
        // sphere pole
        let j = sphere_jet(std::f64::consts::FRAC_PI_2, 0.3);
        assert_eq!(frame_at(&j, &Vec3::z()).unwrap_err(), GeometryError::Degenerate);
    }

    #[test]
    fn sphere_forms() {
        let f = frame_at(&sphere_jet(FRAC_PI_6, 0.2), &Vec3::z()).unwrap();
        let s = fundamental_forms(&f).unwrap();
        for x in [s.h, s.k, s.k1, s.k2] {
            assert!((x - 1.0).abs() < 1e-14);
        }
        assert!(s.umbilic);
        let nk = normal_curvature(&s, &[0.3, -1.7]).unwrap();
        assert!((nk - 1.0).abs() < 1e-14);
    }

    #[test]
    fn plane_forms() {
        let f = frame_at(&plane_jet(0.0, 0.0), &-Vec3::z()).unwrap();
        let s = fundamental_forms(&f).unwrap();
        assert_eq!((s.b11, s.b12, s.b22, s.h, s.k), (0.0, 0.0, 0.0, 0.0, 0.0));
        assert_eq!(normal_curvature(&s, &[1.0, 2.0]).unwrap(), 0.0);
    }

    #[test]
    fn cylinder_forms() {
        let f = frame_at(&cylinder_jet(0.4, 0.1), &Vec3::x()).unwrap();
        let s = fundamental_forms(&f).unwrap();
        assert!((s.g11 - 1.0).abs() < 1e-15 && s.g12.abs() < 1e-15 && (s.g22 - 1.0).abs() < 1e-15);
        assert!((s.b11 - 1.0).abs() < 1e-15 && s.b12 == 0.0 && s.b22 == 0.0);
        assert_eq!(s.k, 0.0);
        assert!((2.0 * s.h - 1.0).abs() < 1e-15);
        assert!((normal_curvature(&s, &[1.0, 0.0]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(normal_curvature(&s, &[0.0, 1.0]).unwrap(), 0.0);
        assert_eq!(normal_curvature(&s, &[0.0, 0.0]), Err(GeometryError::ZeroDirection));
    }

    #[test]
    fn sphere_shape_frame_is_orthonormal_and_right_handed() {
        let f = frame_at(&sphere_jet(FRAC_PI_6, 0.0), &Vec3::z()).unwrap();
        let s = fundamental_forms(&f).unwrap();
        let e = shape_frame(&f, &s);
        for (x, y) in [(e.e1, e.e2), (e.e1, e.e3), (e.e2, e.e3)] {
            assert!(x.dot(&y).abs() < 1e-12);
        }
        for x in [e.e1, e.e2, e.e3] {
            assert!((x.norm() - 1.0).abs() < 1e-12);
        }
        assert!((e.e1.cross(&e.e2).dot(&e.e3) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sym_eigen_of_diagonal() {
        let (lo, hi, ang) = sym_eigen2(3.0, 0.0, 1.0);
        assert_eq!((lo, hi, ang), (1.0, 3.0, 0.0));
    }
}
