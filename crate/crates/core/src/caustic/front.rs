use rayon::prelude::*;

use super::{check_lit, incident_direction, reflect_direction, CausticError, CausticOptions, IncidentField, PointError};
use crate::diffgeo::frame_oriented;
use crate::flags::Flags;
use crate::jet::Vec3;
use crate::surface::{Grid, Surface};

/// A point of the reflected front `rho = r + lambda b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrontPoint {
    pub rho: Vec3,
    pub lambda: f64,
    pub flags: Flags,
}

/// The reflected front reached after total travel `travel`, measured from
/// the plane `(x, a) = 0` (flat) or from the source (point).
pub fn reflected_front_point(field: &IncidentField, r: &Vec3, b: &Vec3, travel: f64) -> FrontPoint {
    let arrived = match field {
        IncidentField::Flat { a } => r.dot(a),
        IncidentField::Point { source } => (r - source).norm(),
    };
    let lambda = travel - arrived;
    let flags = if lambda < 0.0 {
        Flags::only(Flags::NOT_ARRIVED)
    } else {
        Flags::valid()
    };
    FrontPoint {
        rho: r + b * lambda,
        lambda,
        flags,
    }
}

#[derive(Clone, Debug)]
pub struct FrontGrid {
    pub grid: Grid,
    pub points: Vec<FrontPoint>,
}

impl FrontGrid {
    pub fn valid_count(&self) -> usize {
        self.points.iter().filter(|p| p.flags.is_valid()).count()
    }
}

pub fn reflected_front<S: Surface + ?Sized>(
    surface: &S,
    field: &IncidentField,
    grid: &Grid,
    travel: f64,
    opts: &CausticOptions,
) -> Result<FrontGrid, CausticError> {
    let results: Vec<Result<FrontPoint, PointError>> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let (u, v) = grid.param(k);
            let jet = surface.jet(u, v)?;
            let r = jet.value();
            let (a, _) = incident_direction(field, &r)?;
            let frame = frame_oriented(&jet, &a, opts.orientation)?;
            let cos_theta = a.dot(&frame.n);
            check_lit(cos_theta, opts.eps_grazing)?;
            Ok(reflected_front_point(field, &r, &reflect_direction(&a, &frame.n), travel))
        })
        .collect();

    let mut points = Vec::with_capacity(results.len());
    for (k, res) in results.into_iter().enumerate() {
        match res {
            Ok(p) => points.push(p),
            Err(e) => match e.mask() {
                Some(bit) => points.push(FrontPoint {
                    rho: Vec3::repeat(f64::NAN),
                    lambda: f64::NAN,
                    flags: Flags::only(bit),
                }),
                None => {
                    let (u, v) = grid.param(k);
                    return Err(CausticError::Point { u, v, source: e });
                }
            },
        }
    }
    Ok(FrontGrid { grid: *grid, points })
}
