//! Affine reference-to-physical maps and the covariant Piola transform.
//!
//! Two-dimensional cells are embedded in the `z = 0` plane with `A[2][2] = 1`,
//! so the same 3x3 algebra serves both dimensions and the scalar 2D curl is
//! carried in the z component.

use crate::error::{Error, Result};
use crate::topology::{CellKind, Family};
use crate::vec3::{self, Vec3};

pub type Mat3 = [[f64; 3]; 3];

/// `x = A x_hat + b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    pub dim: usize,
    pub a: Mat3,
    pub b: Vec3,
    pub det: f64,
    pub inv: Mat3,
}

fn mat_vec(m: &Mat3, v: &Vec3) -> Vec3 {
    [vec3::dot(&m[0], v), vec3::dot(&m[1], v), vec3::dot(&m[2], v)]
}

fn mat_t_vec(m: &Mat3, v: &Vec3) -> Vec3 {
    let mut out = [0.0; 3];
    for (i, row) in m.iter().enumerate() {
        vec3::axpy(&mut out, v[i], row);
    }
    out
}

fn det3(m: &Mat3) -> f64 {
    vec3::dot(&m[0], &vec3::cross(&m[1], &m[2]))
}

fn inverse(m: &Mat3, det: f64) -> Mat3 {
    // rows of the inverse are cofactor columns over det
    let c0 = vec3::cross(&m[1], &m[2]);
    let c1 = vec3::cross(&m[2], &m[0]);
    let c2 = vec3::cross(&m[0], &m[1]);
    let mut inv = [[0.0; 3]; 3];
    for i in 0..3 {
        inv[i] = [c0[i] / det, c1[i] / det, c2[i] / det];
    }
    inv
}

impl AffineMap {
    /// Map from its Jacobian columns and offset.
    pub fn new(dim: usize, columns: [Vec3; 3], b: Vec3) -> Result<Self> {
        let mut a = [[0.0; 3]; 3];
        for (j, col) in columns.iter().enumerate() {
            for i in 0..3 {
                a[i][j] = col[i];
            }
        }
        if dim == 2 {
            a[2] = [0.0, 0.0, 1.0];
            a[0][2] = 0.0;
            a[1][2] = 0.0;
        }
        let det = det3(&a);
        let scale: f64 = columns[..dim].iter().map(vec3::norm).product();
        if det == 0.0 || !det.is_finite() || det.abs() <= 1e-14 * scale {
            return Err(Error::DegenerateGeometry(format!("singular affine map, det = {det:e}")));
        }
        Ok(AffineMap { dim, a, b, det, inv: inverse(&a, det) })
    }

    pub fn identity(dim: usize) -> Self {
        AffineMap::scaling(dim, 1.0, [0.0; 3])
    }

    /// `x = h x_hat + b`.
    pub fn scaling(dim: usize, h: f64, b: Vec3) -> Self {
        let e = |i: usize| {
            let mut v = [0.0; 3];
            v[i] = h;
            v
        };
        AffineMap::new(dim, [e(0), e(1), e(2)], b).expect("nonzero scaling")
    }

    /// Map sending the reference vertices of `kind` onto `vertices`. Cube
    /// vertices must form a parallelotope.
    pub fn from_vertices(kind: CellKind, vertices: &[Vec3]) -> Result<Self> {
        let nv = kind.num_vertices();
        if vertices.len() != nv {
            return Err(Error::InvalidArgument(format!("{kind} needs {nv} vertices, got {}", vertices.len())));
        }
        let v0 = vertices[0];
        let axis_vertex = |i: usize| match kind.family {
            Family::Cube => 1usize << i,
            Family::Simplex => i + 1,
        };
        let mut cols = [[0.0, 0.0, 1.0]; 3];
        for (i, col) in cols.iter_mut().enumerate().take(kind.dim) {
            *col = vec3::sub(&vertices[axis_vertex(i)], &v0);
        }
        let map = AffineMap::new(kind.dim, cols, v0)?;
        if kind.family == Family::Cube {
            let diam = vec3::norm(&vec3::sub(&vertices[nv - 1], &v0));
            for (v, x) in vertices.iter().enumerate() {
                let expect = map.map_point(&kind.vertex(v));
                if vec3::norm(&vec3::sub(&expect, x)) > 1e-12 * diam.max(1.0) {
                    return Err(Error::DegenerateGeometry(format!(
                        "{kind} vertices are not an affine image of the reference cell"
                    )));
                }
            }
        }
        Ok(map)
    }

    pub fn map_point(&self, xh: &Vec3) -> Vec3 {
        vec3::add(&mat_vec(&self.a, xh), &self.b)
    }

    pub fn inverse_point(&self, x: &Vec3) -> Vec3 {
        let mut xh = mat_vec(&self.inv, &vec3::sub(x, &self.b));
        if self.dim == 2 {
            xh[2] = 0.0;
        }
        xh
    }

    /// Measure factor `|det A|`.
    pub fn measure(&self) -> f64 {
        self.det.abs()
    }

    /// Covariant Piola transform of a value: `A^{-T} v_hat`.
    pub fn push_value(&self, vh: &Vec3) -> Vec3 {
        mat_t_vec(&self.inv, vh)
    }

    /// Curl of a pushed field: `A c_hat / det A`.
    pub fn push_curl(&self, ch: &Vec3) -> Vec3 {
        vec3::scale(&mat_vec(&self.a, ch), 1.0 / self.det)
    }

    /// Inverse covariant Piola transform of a physical value at a point:
    /// `A^T u`.
    pub fn pull_value(&self, u: &Vec3) -> Vec3 {
        let mut v = mat_t_vec(&self.a, u);
        if self.dim == 2 {
            v[2] = 0.0;
        }
        v
    }

    /// Reference field `x_hat -> A^T u(Phi(x_hat))`; reference moments of it
    /// equal the physical moments of `u`.
    pub fn pull_field<'a>(&'a self, u: &'a dyn Fn(&Vec3) -> Vec3) -> impl Fn(&Vec3) -> Vec3 + 'a {
        move |xh| self.pull_value(&u(&self.map_point(xh)))
    }
}
