//! Masked parameter grids and their OBJ, CSV and ASCII PLY encodings.
//!
//! Numbers are written in fixed notation with nine decimals and `\n` line
//! ends, so identical input gives identical bytes. Faces are the grid quads
//! `(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)` whose four corners are
//! all valid; invalid vertices are dropped rather than written as NaN.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::caustic::{CausticSheet, FrontGrid};
use crate::flags::Flags;
use crate::jet::Vec3;
use crate::surface::Grid;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("unknown output format `{0}` (expected obj, csv or ply)")]
    UnknownFormat(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Obj,
    Csv,
    Ply,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Obj => "obj",
            Format::Csv => "csv",
            Format::Ply => "ply",
        }
    }
}

impl FromStr for Format {
    type Err = MeshError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "obj" => Ok(Format::Obj),
            "csv" => Ok(Format::Csv),
            "ply" => Ok(Format::Ply),
            _ => Err(MeshError::UnknownFormat(s.to_string())),
        }
    }
}

/// Per-vertex positions with validity flags over a parameter grid.
#[derive(Clone, Debug, PartialEq)]
pub struct MaskedGrid {
    pub grid: Grid,
    pub points: Vec<Option<Vec3>>,
    pub flags: Vec<Flags>,
}

impl MaskedGrid {
    /// Positions are kept only where the flags say valid.
    pub fn new(grid: Grid, points: Vec<Vec3>, flags: Vec<Flags>) -> Self {
        assert_eq!(points.len(), grid.len());
        assert_eq!(flags.len(), grid.len());
        let points = points
            .into_iter()
            .zip(&flags)
            .map(|(p, f)| f.is_valid().then_some(p))
            .collect();
        MaskedGrid { grid, points, flags }
    }

    pub fn from_front(front: &FrontGrid) -> Self {
        MaskedGrid::new(
            front.grid,
            front.points.iter().map(|p| p.rho).collect(),
            front.points.iter().map(|p| p.flags).collect(),
        )
    }

    pub fn valid_count(&self) -> usize {
        self.points.iter().filter(|p| p.is_some()).count()
    }

    /// 0-based index of each valid vertex among the valid ones.
    fn vertex_numbers(&self) -> Vec<Option<usize>> {
        let mut next = 0;
        self.points
            .iter()
            .map(|p| {
                p.map(|_| {
                    next += 1;
                    next - 1
                })
            })
            .collect()
    }

    /// Quads with all corners valid, as 0-based vertex numbers.
    pub fn faces(&self) -> Vec<[usize; 4]> {
        let num = self.vertex_numbers();
        let (nu, nv) = (self.grid.nu, self.grid.nv);
        let mut out = Vec::new();
        for i in 0..nu.saturating_sub(1) {
            for j in 0..nv.saturating_sub(1) {
                let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)].map(|(a, b)| num[a * nv + b]);
                if let [Some(a), Some(b), Some(c), Some(d)] = corners {
                    out.push([a, b, c, d]);
                }
            }
        }
        out
    }
}

/// Mask a caustic sheet, clipping points farther than `max_radius` along
/// their ray.
pub fn clip_sheet(sheet: &CausticSheet, grid: &Grid, max_radius: f64) -> MaskedGrid {
    let mut flags = Vec::with_capacity(sheet.points.len());
    let mut points = Vec::with_capacity(sheet.points.len());
    for p in &sheet.points {
        let mut f = p.flags;
        if f.is_valid() && !(p.radius.abs() <= max_radius) {
            f.invalidate(Flags::CLIPPED);
        }
        flags.push(f);
        points.push(p.xi);
    }
    MaskedGrid::new(*grid, points, flags)
}

/// Nine decimals, with negative zero printed as zero.
pub fn fmt_num(x: f64) -> String {
    let s = format!("{x:.9}");
    if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
        s[1..].to_string()
    } else {
        s
    }
}

pub fn render(mesh: &MaskedGrid, format: Format) -> String {
    match format {
        Format::Obj => render_obj(mesh),
        Format::Csv => render_csv(mesh),
        Format::Ply => render_ply(mesh),
    }
}

fn xyz(p: &Vec3) -> String {
    format!("{} {} {}", fmt_num(p.x), fmt_num(p.y), fmt_num(p.z))
}

fn render_obj(mesh: &MaskedGrid) -> String {
    let mut out = String::new();
    for p in mesh.points.iter().flatten() {
        writeln!(out, "v {}", xyz(p)).unwrap();
    }
    for [a, b, c, d] in mesh.faces() {
        writeln!(out, "f {} {} {} {}", a + 1, b + 1, c + 1, d + 1).unwrap();
    }
    out
}

fn render_csv(mesh: &MaskedGrid) -> String {
    let mut out = String::from("u,v,x,y,z,flags\n");
    for (k, (p, f)) in mesh.points.iter().zip(&mesh.flags).enumerate() {
        let (u, v) = mesh.grid.param(k);
        let coords = match p {
            Some(p) => format!("{},{},{}", fmt_num(p.x), fmt_num(p.y), fmt_num(p.z)),
            None => ",,".to_string(),
        };
        writeln!(out, "{},{},{},{}", fmt_num(u), fmt_num(v), coords, f.bits()).unwrap();
    }
    out
}

fn render_ply(mesh: &MaskedGrid) -> String {
    let faces = mesh.faces();
    let mut out = String::new();
    out.push_str("ply\nformat ascii 1.0\n");
    writeln!(out, "element vertex {}", mesh.valid_count()).unwrap();
    out.push_str("property double x\nproperty double y\nproperty double z\n");
    writeln!(out, "element face {}", faces.len()).unwrap();
    out.push_str("property list uchar int vertex_indices\nend_header\n");
    for p in mesh.points.iter().flatten() {
        writeln!(out, "{}", xyz(p)).unwrap();
    }
    for [a, b, c, d] in faces {
        writeln!(out, "4 {a} {b} {c} {d}").unwrap();
    }
    out
}

/// Write `mesh` to `path`, returning the number of bytes written.
pub fn export_mesh(mesh: &MaskedGrid, format: Format, path: &Path) -> Result<usize, MeshError> {
    let text = render(mesh, format);
    std::fs::write(path, text.as_bytes()).map_err(|source| MeshError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(text.len())
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use proptest::prelude::*;

    use super::*;
    use crate::builtins;
    use crate::caustic::{compute_caustic_sheets, CausticOptions, IncidentField};
    use crate::surface::Domain;

    fn square(valid: [bool; 4]) -> MaskedGrid {
        let grid = Grid::new(2, 2, Domain::new(0.0, 1.0, 0.0, 1.0));
        let pts = (0..4).map(|k| Vec3::new(k as f64, 0.5, -0.0)).collect();
        let flags = valid
            .iter()
            .map(|v| if *v { Flags::valid() } else { Flags::only(Flags::SHADOW) })
            .collect();
        MaskedGrid::new(grid, pts, flags)
    }

    #[test]
    fn smallest_quad() {
        let obj = render(&square([true; 4]), Format::Obj);
        assert_eq!(
            obj,
            "v 0.000000000 0.500000000 0.000000000\n\
             v 1.000000000 0.500000000 0.000000000\n\
             v 2.000000000 0.500000000 0.000000000\n\
             v 3.000000000 0.500000000 0.000000000\n\
             f 1 3 4 2\n"
        );
        let obj = render(&square([true, false, true, true]), Format::Obj);
        assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 3);
        assert_eq!(obj.lines().filter(|l| l.starts_with("f ")).count(), 0);
    }

    #[test]
    fn ply_and_csv_layout() {
        let m = square([true, true, true, false]);
        let ply = render(&m, Format::Ply);
        assert!(ply.starts_with("ply\nformat ascii 1.0\nelement vertex 3\n"));
        assert!(ply.contains("element face 0\n"));
        let csv = render(&m, Format::Csv);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "u,v,x,y,z,flags");
        assert_eq!(lines[2], "0.000000000,1.000000000,1.000000000,0.500000000,0.000000000,1");
        assert_eq!(lines[4], "1.000000000,1.000000000,,,,2");
    }

    #[test]
    fn negative_zero_and_rounding() {
        assert_eq!(fmt_num(-0.0), "0.000000000");
        assert_eq!(fmt_num(-1e-12), "0.000000000");
        assert_eq!(fmt_num(-1.5), "-1.500000000");
        assert_eq!("obj".parse::<Format>().unwrap(), Format::Obj);
        assert!("stl".parse::<Format>().is_err());
    }

    #[test]
    fn elliptic_paraboloid_focus() {
        let (s, dom) = builtins::build("elliptic-paraboloid", &BTreeMap::new()).unwrap();
        let grid = Grid::new(9, 9, dom);
        let field = IncidentField::flat(Vec3::new(0.0, 0.0, -1.0)).unwrap();
        let res = compute_caustic_sheets(&s, &field, &grid, &CausticOptions::default()).unwrap();
        for sheet in &res.sheets {
            let obj = render(&clip_sheet(sheet, &grid, 100.0), Format::Obj);
            let verts: Vec<&str> = obj.lines().filter(|l| l.starts_with("v ")).collect();
            assert_eq!(verts.len(), 81);
            assert!(verts.iter().all(|l| *l == "v 0.000000000 0.000000000 0.500000000"));
        }
    }

    #[test]
    fn clipping_and_infinity() {
        let (s, dom) = builtins::build("cylinder", &BTreeMap::new()).unwrap();
        let grid = Grid::new(6, 4, dom);
        let field = IncidentField::flat(Vec3::new(1.0, 0.0, 0.0)).unwrap();
        let res = compute_caustic_sheets(&s, &field, &grid, &CausticOptions::default()).unwrap();
        let zero = if res.sheets[0].points[0].k_star.abs() < 1e-9 { 0 } else { 1 };
        let m = clip_sheet(&res.sheets[zero], &grid, f64::INFINITY);
        assert_eq!(m.valid_count(), 0);
        assert!(m.flags.iter().all(|f| f.contains(Flags::AT_INFINITY)));
        assert_eq!(render(&m, Format::Obj), "");

        let other = clip_sheet(&res.sheets[1 - zero], &grid, f64::INFINITY);
        assert_eq!(other.valid_count(), 24);
        let tight = clip_sheet(&res.sheets[1 - zero], &grid, 1e-3);
        assert!(tight.flags.iter().all(|f| f.contains(Flags::CLIPPED) && !f.is_valid()));
    }

    fn parse_csv(text: &str) -> Vec<(f64, f64, Option<[f64; 3]>, u8)> {
        text.lines()
            .skip(1)
            .map(|l| {
                let c: Vec<&str> = l.split(',').collect();
                let p = if c[2].is_empty() {
                    None
                } else {
                    Some([c[2].parse().unwrap(), c[3].parse().unwrap(), c[4].parse().unwrap()])
                };
                (c[0].parse().unwrap(), c[1].parse().unwrap(), p, c[5].parse().unwrap())
            })
            .collect()
    }

    fn arb_mesh() -> impl Strategy<Value = MaskedGrid> {
        (2usize..6, 2usize..6).prop_flat_map(|(nu, nv)| {
            let n = nu * nv;
            (
                proptest::collection::vec((-1e3f64..1e3, -1e3f64..1e3, -1e3f64..1e3), n),
                proptest::collection::vec(proptest::bool::weighted(0.8), n),
            )
                .prop_map(move |(pts, ok)| {
                    let grid = Grid::new(nu, nv, Domain::new(-1.0, 2.0, 0.5, 3.0));
                    let pts = pts.into_iter().map(|(x, y, z)| Vec3::new(x, y, z)).collect();
                    let flags = ok
                        .into_iter()
                        .map(|v| if v { Flags::valid() } else { Flags::only(Flags::GRAZING) })
                        .collect();
                    MaskedGrid::new(grid, pts, flags)
                })
        })
    }

    proptest! {
        #[test]
        fn csv_round_trip(m in arb_mesh()) {
            let rows = parse_csv(&render(&m, Format::Csv));
            prop_assert_eq!(rows.len(), m.grid.len());
            for (k, (u, v, p, f)) in rows.into_iter().enumerate() {
                let (gu, gv) = m.grid.param(k);
                prop_assert!((u - gu).abs() <= 5e-10 && (v - gv).abs() <= 5e-10);
                prop_assert_eq!(f, m.flags[k].bits());
                match (p, m.points[k]) {
                    (Some(p), Some(q)) => {
                        for i in 0..3 {
                            prop_assert!((p[i] - q[i]).abs() <= 5e-10 * q[i].abs().max(1.0));
                        }
                    }
                    (None, None) => {}
                    _ => prop_assert!(false, "validity changed at {}", k),
                }
            }
        }

        #[test]
        fn faces_use_valid_vertices(m in arb_mesh()) {
            let obj = render(&m, Format::Obj);
            let nverts = obj.lines().filter(|l| l.starts_with("v ")).count();
            prop_assert_eq!(nverts, m.valid_count());
            for l in obj.lines().filter(|l| l.starts_with("f ")) {
                for idx in l[2..].split(' ') {
                    let i: usize = idx.parse().unwrap();
                    prop_assert!(i >= 1 && i <= nverts);
                }
            }
            prop_assert_eq!(render(&m, Format::Obj), obj);
        }
    }
}
