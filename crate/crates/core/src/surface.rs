//! Parametric mirror surfaces, parameter domains and sampling grids.

use nalgebra::{Matrix3, Rotation3};

use crate::jet::{Jet2Vec3, Vec3};
use crate::lang::{eval_surface, EvalError, SurfaceAst};

/// Parameter rectangle `[u0, u1] x [v0, v1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Domain {
    pub u: [f64; 2],
    pub v: [f64; 2],
}

impl Domain {
    pub fn new(u0: f64, u1: f64, v0: f64, v1: f64) -> Self {
        Domain { u: [u0, u1], v: [v0, v1] }
    }

    pub fn contains(&self, u: f64, v: f64) -> bool {
        u >= self.u[0] && u <= self.u[1] && v >= self.v[0] && v <= self.v[1]
    }
}

/// A regular `nu x nv` sampling of a domain, endpoints included. Vertex
/// `(i, j)` sits at `u_i, v_j` and has row-major index `i * nv + j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub nu: usize,
    pub nv: usize,
    pub domain: Domain,
}

impl Grid {
    pub fn new(nu: usize, nv: usize, domain: Domain) -> Self {
        Grid { nu, nv, domain }
    }

    pub fn len(&self) -> usize {
        self.nu * self.nv
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn u(&self, i: usize) -> f64 {
        lerp(self.domain.u, i, self.nu)
    }

    pub fn v(&self, j: usize) -> f64 {
        lerp(self.domain.v, j, self.nv)
    }

    /// Parameters of the vertex with row-major index `k`.
    pub fn param(&self, k: usize) -> (f64, f64) {
        (self.u(k / self.nv), self.v(k % self.nv))
    }
}

fn lerp(range: [f64; 2], i: usize, n: usize) -> f64 {
    if n < 2 {
        return range[0];
    }
    if i + 1 == n {
        return range[1];
    }
    range[0] + (range[1] - range[0]) * (i as f64) / ((n - 1) as f64)
}

/// Anything that can report its position and first/second partials.
pub trait Surface: Sync {
    fn jet(&self, u: f64, v: f64) -> Result<Jet2Vec3, EvalError>;

    fn position(&self, u: f64, v: f64) -> Result<Vec3, EvalError> {
        self.jet(u, v).map(|j| j.value())
    }
}

impl Surface for SurfaceAst {
    fn jet(&self, u: f64, v: f64) -> Result<Jet2Vec3, EvalError> {
        eval_surface(self, u, v)
    }
}

impl<S: Surface + ?Sized> Surface for &S {
    fn jet(&self, u: f64, v: f64) -> Result<Jet2Vec3, EvalError> {
        (**self).jet(u, v)
    }
}

/// A similarity transform `x -> scale * R x + shift`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Similarity {
    pub rotation: Rotation3<f64>,
    pub scale: f64,
    pub shift: Vec3,
}

impl Similarity {
    pub fn identity() -> Self {
        Similarity {
            rotation: Rotation3::identity(),
            scale: 1.0,
            shift: Vec3::zeros(),
        }
    }

    pub fn linear(&self) -> Matrix3<f64> {
        self.rotation.matrix() * self.scale
    }

    pub fn apply_point(&self, p: &Vec3) -> Vec3 {
        self.rotation * p * self.scale + self.shift
    }

    pub fn apply_direction(&self, d: &Vec3) -> Vec3 {
        self.rotation * d
    }
}

/// A surface moved by a similarity transform.
pub struct Transformed<S> {
    pub inner: S,
    pub map: Similarity,
}

impl<S: Surface> Surface for Transformed<S> {
    fn jet(&self, u: f64, v: f64) -> Result<Jet2Vec3, EvalError> {
        let j = self.inner.jet(u, v)?;
        Ok(j.affine(&self.map.linear(), &self.map.shift))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_hits_endpoints() {
        let g = Grid::new(3, 5, Domain::new(0.2, 1.4, -1.0, 1.0));
        assert_eq!(g.u(0), 0.2);
        assert_eq!(g.u(2), 1.4);
        assert_eq!(g.v(4), 1.0);
        assert_eq!(g.param(7), (g.u(1), g.v(2)));
        assert_eq!(g.len(), 15);
    }
}
