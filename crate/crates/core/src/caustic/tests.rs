use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_6;

use nalgebra::{Rotation3, Unit};
use proptest::prelude::*;

use super::sheets::track_rows;
use super::*;
use crate::builtins;
use crate::diffgeo::frame_at;
use crate::lang::parse_surface;
use crate::surface::{Domain, Grid, Transformed};

fn sphere() -> crate::lang::SurfaceAst {
    builtins::build("sphere", &BTreeMap::new()).unwrap().0
}

fn torus() -> crate::lang::SurfaceAst {
    builtins::build("revolution", &BTreeMap::new()).unwrap().0
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

#[test]
fn sphere_oblique_flat_front() {
    let field = IncidentField::flat(Vec3::new(0.0, 0.0, 1.0)).unwrap();
    let p = analyze_point(&sphere(), &field, FRAC_PI_6, 0.0, &CausticOptions::default()).unwrap();
    assert!(close(p.roots.k[0], 1.0, 1e-13));
    assert!(close(p.roots.k[1], 4.0, 1e-13));
    let kind = field.kind();
    let xi1 = p.sheet_point(p.roots.k[0], 1, DEFAULT_EPS_INF, kind).xi;
    let xi2 = p.sheet_point(p.roots.k[1], 2, DEFAULT_EPS_INF, kind).xi;
    assert!((xi1 - Vec3::new(0.0, 0.0, 1.0)).norm() < 1e-14);
    let s3 = 3.0f64.sqrt();
    assert!((xi2 - Vec3::new(3.0 * s3 / 8.0, 0.0, 5.0 / 8.0)).norm() < 1e-14);
    assert!(p.roots.consistent());
}

#[test]
fn centered_source_focuses_back() {
    let mut params = BTreeMap::new();
    params.insert("R".to_string(), "2.5".to_string());
    let (s, _) = builtins::build("sphere", &params).unwrap();
    let field = IncidentField::point(Vec3::zeros()).unwrap();
    for (u, v) in [(0.3, 0.1), (1.2, -2.0), (-0.7, 2.9)] {
        let p = analyze_point(&s, &field, u, v, &CausticOptions::default()).unwrap();
        for k in p.roots.k {
            assert!(close(k, 0.4, 1e-13), "{k}");
        }
        let xi = p.sheet_point(p.roots.k[0], 1, DEFAULT_EPS_INF, field.kind()).xi;
        assert!(xi.norm() < 1e-12);
    }
}

#[test]
fn plane_mirror_keeps_flat_front_flat() {
    let plane = parse_surface("[u, v, 0]", &BTreeMap::new()).unwrap();
    let field = IncidentField::flat(Vec3::new(0.3, -0.2, -1.0)).unwrap();
    let p = analyze_point(&plane, &field, 0.4, -0.1, &CausticOptions::default()).unwrap();
    assert_eq!(p.roots.k, [0.0, 0.0]);
    let pt = p.sheet_point(0.0, 1, DEFAULT_EPS_INF, field.kind());
    assert!(pt.flags.contains(Flags::AT_INFINITY));
    assert!(!pt.flags.is_valid());

    // Mirror image of a point source: both curvatures -1/|r - O|.
    let src = Vec3::new(0.1, 0.2, 1.5);
    let field = IncidentField::point(src).unwrap();
    let p = analyze_point(&plane, &field, 0.4, -0.1, &CausticOptions::default()).unwrap();
    let d = (Vec3::new(0.4, -0.1, 0.0) - src).norm();
    for k in p.roots.k {
        assert!(close(k, -1.0 / d, 1e-14));
    }
    let xi = p.sheet_point(p.roots.k[0], 1, DEFAULT_EPS_INF, field.kind()).xi;
    assert!((xi - Vec3::new(0.1, 0.2, -1.5)).norm() < 1e-12);
}

#[test]
fn torus_roots_decouple_in_meridian_plane() {
    let field = IncidentField::flat(Vec3::new(0.0, 0.0, 1.0)).unwrap();
    let s = torus();
    for i in 0..=12 {
        let u = 3.3 + 1.2 * i as f64 / 12.0;
        let v = -2.0 + 0.3 * i as f64;
        let p = analyze_point(&s, &field, u, v, &CausticOptions::default()).unwrap();
        let (su, cu) = u.sin_cos();
        let tangential = 2.0 / su;
        let sagittal = 2.0 * su * cu / (2.0 + cu);
        let mut expect = [tangential, sagittal];
        expect.sort_by(f64::total_cmp);
        assert!(close(p.roots.k[0], expect[0], 1e-12), "{u}: {:?} {expect:?}", p.roots.k);
        assert!(close(p.roots.k[1], expect[1], 1e-12), "{u}: {:?} {expect:?}", p.roots.k);
    }
}

#[test]
fn shadow_and_grazing_are_masked() {
    let s = sphere();
    let field = IncidentField::flat(Vec3::new(0.0, 0.0, 1.0)).unwrap();
    let opts = CausticOptions {
        orientation: Orientation::Minus,
        ..CausticOptions::default()
    };
    // The raw normal of this chart points inward, toward the lit side.
    assert_eq!(analyze_point(&s, &field, 0.5, 0.0, &opts).unwrap_err(), PointError::Shadow);
    let opts = CausticOptions {
        orientation: Orientation::Plus,
        ..opts
    };
    assert!(analyze_point(&s, &field, 0.5, 0.0, &opts).is_ok());
    let equator = analyze_point(&s, &field, 0.0, 0.0, &CausticOptions::default());
    assert_eq!(equator.unwrap_err(), PointError::Grazing);
}

#[test]
fn negative_discriminant_is_an_error() {
    assert!(quadratic_roots(0.0, 1.0, -4.0).is_err());
    assert_eq!(quadratic_roots(-4.0, 4.0, -1e-15).unwrap(), [2.0, 2.0]);
    assert_eq!(quadratic_roots(3.0, 2.0, 1.0).unwrap(), [-2.0, -1.0]);
}

#[test]
fn sheets_over_grid() {
    let s = torus();
    let field = IncidentField::flat(Vec3::new(0.0, 0.0, 1.0)).unwrap();
    let grid = Grid::new(7, 9, Domain::new(3.3, 4.5, -1.0, 1.0));
    let res = compute_caustic_sheets(&s, &field, &grid, &CausticOptions::default()).unwrap();
    assert_eq!(res.stats.lit, 63);
    assert_eq!(res.stats.crosscheck_violations, 0);
    for (k, p) in res.sheets[0].points.iter().enumerate() {
        let (u, _) = grid.param(k);
        assert!(close(p.k_star, 2.0 / u.sin(), 1e-12));
    }
    let text = res.stats.to_string();
    assert!(text.contains("sheet1.valid 63"));
}

#[test]
fn all_shadow_is_reported() {
    let s = sphere();
    let field = IncidentField::flat(Vec3::new(0.0, 0.0, 1.0)).unwrap();
    let opts = CausticOptions {
        orientation: Orientation::Minus,
        ..CausticOptions::default()
    };
    let grid = Grid::new(3, 3, Domain::new(0.3, 1.0, -1.0, 1.0));
    let err = compute_caustic_sheets(&s, &field, &grid, &opts).unwrap_err();
    assert_eq!(err, CausticError::NoLitPoints);
}

#[test]
fn rows_follow_crossing_roots() {
    // Two linear branches 1 + t and 3 - t cross at t = 1.
    let grid = Grid::new(1, 5, Domain::new(0.0, 1.0, 0.0, 1.0));
    let mut roots: Vec<Option<[f64; 2]>> = (0..5)
        .map(|j| {
            let t = 0.5 * j as f64;
            let (x, y) = (1.0 + t, 3.0 - t);
            Some([x.min(y), x.max(y)])
        })
        .collect();
    track_rows(&mut roots, &grid);
    for (j, r) in roots.iter().enumerate() {
        let t = 0.5 * j as f64;
        assert_eq!(r.unwrap(), [1.0 + t, 3.0 - t]);
    }
}

#[test]
fn front_point_travel() {
    let field = IncidentField::flat(Vec3::new(0.0, 0.0, -1.0)).unwrap();
    let r = Vec3::new(0.0, 0.0, -2.0);
    let b = Vec3::new(0.0, 0.0, 1.0);
    let p = reflected_front_point(&field, &r, &b, 3.0);
    assert_eq!(p.lambda, 1.0);
    assert_eq!(p.rho, Vec3::new(0.0, 0.0, -1.0));
    assert!(reflected_front_point(&field, &r, &b, 1.0).flags.contains(Flags::NOT_ARRIVED));
}

fn random_ellipsoid(a: f64, b: f64, c: f64) -> crate::lang::SurfaceAst {
    let mut p = BTreeMap::new();
    for (k, x) in [("a", a), ("b", b), ("c", c)] {
        p.insert(k.to_string(), x.to_string());
    }
    builtins::build("ellipsoid", &p).unwrap().0
}

fn unit(theta: f64, phi: f64) -> Vec3 {
    Vec3::new(theta.cos() * phi.cos(), theta.cos() * phi.sin(), theta.sin())
}

proptest! {
    #[test]
    fn reflection_law(t in -1.5f64..1.5, p in -3.1f64..3.1, nt in -1.5f64..1.5, np in -3.1f64..3.1) {
        let a = unit(t, p);
        let n = unit(nt, np);
        let b = reflect_direction(&a, &n);
        prop_assert!((b.norm() - 1.0).abs() < 1e-14);
        prop_assert!((b.dot(&n) + a.dot(&n)).abs() < 1e-14);
        prop_assert!((b - a).cross(&n).norm() < 1e-14);
    }

    #[test]
    fn modified_metric_determinant(
        a in 0.5f64..2.0, b in 0.5f64..2.0, c in 0.5f64..2.0,
        u in -1.3f64..1.3, v in -3.0f64..3.0,
        t in -1.5f64..1.5, p in -3.1f64..3.1,
    ) {
        let s = random_ellipsoid(a, b, c);
        let dir = unit(t, p);
        let jet = s.jet(u, v).unwrap();
        let frame = frame_at(&jet, &dir).unwrap();
        let forms = fundamental_forms(&frame).unwrap();
        let refl = reflection_data(&frame, &forms, &dir, 0.0);
        prop_assume!(refl.cos_theta.abs() > 1e-3);
        let m = modified_forms(&forms, &frame, &refl, FieldKind::Flat, 1e-6).unwrap();
        let expect = refl.cos_theta.powi(2) * forms.det_g();
        prop_assert!((m.det_g() - expect).abs() <= 1e-12 * forms.g11.max(forms.g22).powi(2));
    }

    #[test]
    fn roots_match_front_weingarten(
        a in 0.5f64..2.0, b in 0.5f64..2.0, c in 0.5f64..2.0,
        u in -1.3f64..1.3, v in -3.0f64..3.0,
        sx in -0.3f64..0.3, sy in -0.3f64..0.3, sz in -0.3f64..0.3,
    ) {
        let s = random_ellipsoid(a, b, c);
        let field = IncidentField::point(Vec3::new(sx, sy, sz)).unwrap();
        let p = analyze_point(&s, &field, u, v, &CausticOptions::default());
        prop_assume!(p.is_ok());
        let p = p.unwrap();
        prop_assume!(p.refl.cos_theta < -0.05);
        prop_assert!(p.roots.consistent(), "{:?}", p.roots);
        // sum and product of k* against the trace and determinant of W*
        let w = p.mods.weingarten;
        let scale = p.roots.k.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        prop_assert!((p.roots.k[0] + p.roots.k[1] - w.trace()).abs() < 1e-8 * scale);
        prop_assert!((p.roots.k[0] * p.roots.k[1] - w.determinant()).abs() < 1e-8 * scale * scale);
    }

    #[test]
    fn sphere_focal_lengths(u in 0.05f64..1.5, v in -3.1f64..3.1, r in 0.2f64..5.0) {
        let mut params = BTreeMap::new();
        params.insert("R".to_string(), r.to_string());
        let (s, _) = builtins::build("sphere", &params).unwrap();
        let field = IncidentField::flat(Vec3::new(0.0, 0.0, 1.0)).unwrap();
        let p = analyze_point(&s, &field, u, v, &CausticOptions::default()).unwrap();
        // sagittal 2 cos/R, tangential 2/(R cos), with cos the incidence cosine
        let cos = u.sin();
        let expect = [2.0 * cos / r, 2.0 / (r * cos)];
        for (k, e) in p.roots.k.iter().zip(expect) {
            prop_assert!(close(*k, e, 1e-11), "{k} vs {e}");
        }
    }

    #[test]
    fn similarity_equivariance(
        ax in -1.0f64..1.0, ay in -1.0f64..1.0, az in -1.0f64..1.0, angle in -3.0f64..3.0,
        scale in 0.3f64..3.0, tx in -2.0f64..2.0, ty in -2.0f64..2.0, tz in -2.0f64..2.0,
        u in 3.4f64..4.4, v in -3.0f64..3.0, point in proptest::bool::ANY,
    ) {
        let axis = Vec3::new(ax, ay, az);
        prop_assume!(axis.norm() > 0.1);
        let map = Similarity {
            rotation: Rotation3::from_axis_angle(&Unit::new_normalize(axis), angle),
            scale,
            shift: Vec3::new(tx, ty, tz),
        };
        let field = if point {
            IncidentField::point(Vec3::new(0.5, -0.3, 0.8)).unwrap()
        } else {
            IncidentField::flat(Vec3::new(0.2, 0.1, 1.0)).unwrap()
        };
        let s = torus();
        let moved = Transformed { inner: torus(), map };
        let opts = CausticOptions::default();
        let p = analyze_point(&s, &field, u, v, &opts);
        let q = analyze_point(&moved, &field.transformed(&map), u, v, &opts);
        prop_assume!(p.is_ok());
        let (p, q) = (p.unwrap(), q.unwrap());
        prop_assume!(p.refl.cos_theta < -0.05);
        for s in 0..2 {
            prop_assert!(close(q.roots.k[s] * scale, p.roots.k[s], 1e-9));
            prop_assume!(p.roots.k[s].abs() > 1e-3);
            let xp = p.sheet_point(p.roots.k[s], 1, DEFAULT_EPS_INF, field.kind()).xi;
            let xq = q.sheet_point(q.roots.k[s], 1, DEFAULT_EPS_INF, field.kind()).xi;
            let tol = 1e-8 * (1.0 + xp.norm()) * scale / p.roots.k[s].abs().min(1.0);
            prop_assert!((map.apply_point(&xp) - xq).norm() < tol);
        }
    }
}
