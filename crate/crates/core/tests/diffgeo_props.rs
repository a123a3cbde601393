use std::collections::BTreeMap;

use catacaustic::builtins;
use catacaustic::diffgeo::{frame_at, fundamental_forms, normal_curvature, SurfaceForms};
use catacaustic::lang::{parse_surface, SurfaceAst};
use catacaustic::surface::{Similarity, Surface, Transformed};
use catacaustic::Vec3;
use nalgebra::{Rotation3, Unit};
use proptest::prelude::*;

fn forms_at<S: Surface>(s: &S, u: f64, v: f64, hint: Vec3) -> SurfaceForms {
    let jet = s.jet(u, v).unwrap();
    fundamental_forms(&frame_at(&jet, &hint).unwrap()).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

fn grid50(range_u: [f64; 2], range_v: [f64; 2]) -> impl Iterator<Item = (f64, f64)> {
    (0..50).flat_map(move |i| {
        (0..50).map(move |j| {
            let u = range_u[0] + (range_u[1] - range_u[0]) * i as f64 / 49.0;
            let v = range_v[0] + (range_v[1] - range_v[0]) * j as f64 / 49.0;
            (u, v)
        })
    })
}

#[test]
fn sphere_of_radius() {
    for r in [0.5, 1.0, 3.0] {
        let mut p = BTreeMap::new();
        p.insert("R".to_string(), r.to_string());
        let (s, _) = builtins::build("sphere", &p).unwrap();
        for (u, v) in grid50([-1.4, 1.4], [-3.1, 3.1]) {
            // outward hint, so the normal points inward
            let f = forms_at(&s, u, v, s.position(u, v).unwrap());
            assert!(close(f.k, 1.0 / (r * r), 1e-12), "{} at {u} {v}", f.k);
            assert!(close(f.h, 1.0 / r, 1e-12));
            assert!(f.umbilic);
        }
    }
}

#[test]
fn torus_closed_forms() {
    let (s, _) = builtins::build("revolution", &BTreeMap::new()).unwrap();
    for (u, v) in grid50([-3.0, 3.0], [-3.1, 3.1]) {
        let out = Vec3::new(u.cos() * v.cos(), u.cos() * v.sin(), u.sin());
        let f = forms_at(&s, u, v, out);
        let c = u.cos();
        assert!(close(f.k, c / (2.0 + c), 1e-12), "K {} at {u}", f.k);
        assert!(close(f.h, (2.0 + 2.0 * c) / (2.0 * (2.0 + c)), 1e-12), "H {} at {u}", f.h);
    }
}

/// Graph `z = f(x, y)` with the normal pointing up:
/// `K = (f_xx f_yy - f_xy^2) / W^4`,
/// `H = ((1 + f_y^2) f_xx - 2 f_x f_y f_xy + (1 + f_x^2) f_yy) / (2 W^3)`,
/// `W = sqrt(1 + f_x^2 + f_y^2)`.
fn monge(fx: f64, fy: f64, fxx: f64, fxy: f64, fyy: f64) -> (f64, f64) {
    let w2 = 1.0 + fx * fx + fy * fy;
    let k = (fxx * fyy - fxy * fxy) / (w2 * w2);
    let h = ((1.0 + fy * fy) * fxx - 2.0 * fx * fy * fxy + (1.0 + fx * fx) * fyy) / (2.0 * w2.powf(1.5));
    (k, h)
}

#[test]
fn paraboloids_closed_forms() {
    let down = Vec3::new(0.0, 0.0, -1.0);
    let (ell, _) = builtins::build("elliptic-paraboloid", &BTreeMap::new()).unwrap();
    let (hyp, _) = builtins::build("hyperbolic-paraboloid", &BTreeMap::new()).unwrap();
    for (x, y) in grid50([-2.0, 2.0], [-2.0, 2.0]) {
        let f = forms_at(&ell, x, y, down);
        let (k, h) = monge(x, y, 1.0, 0.0, 1.0);
        assert!(close(f.k, k, 1e-12) && close(f.h, h, 1e-12), "{x} {y}");
        let f = forms_at(&hyp, x, y, down);
        let (k, h) = monge(x, -y, 1.0, 0.0, -1.0);
        assert!(close(f.k, k, 1e-12) && close(f.h, h, 1e-12), "{x} {y}");
    }
}

fn ellipsoid(a: f64, b: f64, c: f64) -> SurfaceAst {
    let mut p = BTreeMap::new();
    for (k, x) in [("a", a), ("b", b), ("c", c)] {
        p.insert(k.to_string(), x.to_string());
    }
    builtins::build("ellipsoid", &p).unwrap().0
}

proptest! {
    #[test]
    fn euler_formula(a in 0.5f64..2.0, b in 0.5f64..2.0, c in 0.5f64..2.0,
                     u in -1.3f64..1.3, v in -3.0f64..3.0) {
        let s = ellipsoid(a, b, c);
        let f = forms_at(&s, u, v, s.position(u, v).unwrap());
        prop_assert!(f.k1 <= f.k2);
        prop_assert!(close(f.k1 * f.k2, f.k, 1e-10) && close(0.5 * (f.k1 + f.k2), f.h, 1e-10));
        for i in 0..1000 {
            let t = std::f64::consts::TAU * i as f64 / 1000.0;
            let (st, ct) = t.sin_cos();
            let x = [ct * f.dir1[0] + st * f.dir2[0], ct * f.dir1[1] + st * f.dir2[1]];
            let kn = normal_curvature(&f, &x).unwrap();
            let expect = f.k1 * ct * ct + f.k2 * st * st;
            prop_assert!((kn - expect).abs() <= 1e-10 * f.k1.abs().max(f.k2.abs()).max(1.0),
                "{} vs {} at {}", kn, expect, t);
        }
    }

    #[test]
    fn rigid_motion_invariance(ax in -1.0f64..1.0, ay in -1.0f64..1.0, az in -1.0f64..1.0,
                               angle in -3.0f64..3.0, tx in -5.0f64..5.0,
                               u in -1.0f64..1.0, v in -1.0f64..1.0) {
        let axis = Vec3::new(ax, ay, az);
        prop_assume!(axis.norm() > 0.1);
        let map = Similarity {
            rotation: Rotation3::from_axis_angle(&Unit::new_normalize(axis), angle),
            scale: 1.0,
            shift: Vec3::new(tx, -tx, 0.5 * tx),
        };
        let s = parse_surface("[u, v, sin(u)*v + u^3/3 - v^2]", &BTreeMap::new()).unwrap();
        let hint = Vec3::new(0.0, 0.0, -1.0);
        let f = forms_at(&s, u, v, hint);
        let moved = Transformed { inner: s, map };
        let g = forms_at(&moved, u, v, map.apply_direction(&hint));
        prop_assert!(close(g.k, f.k, 1e-11) && close(g.h, f.h, 1e-11));
        prop_assert!(close(g.k1, f.k1, 1e-11) && close(g.k2, f.k2, 1e-11));
    }
}
