//! Reference polytopes and their sub-entities.
//!
//! Reference domains are the unit d-cube `[0,1]^d` and the unit d-simplex
//! `{x_i >= 0, sum x_i <= 1}`. Cube vertices are numbered lexicographically
//! (vertex `v` has coordinate bit `i` equal to `(v >> i) & 1`), simplex
//! vertices are the origin followed by the unit coordinate points. Edges and
//! faces are the sorted vertex tuples of the polytope, listed in lexicographic
//! order of those tuples. The tuple order is the entity's orientation.

use std::fmt;

use crate::error::{Error, Result};
use crate::vec3::{self, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Cube,
    Simplex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellKind {
    pub family: Family,
    pub dim: usize,
}

impl CellKind {
    pub const QUAD: CellKind = CellKind { family: Family::Cube, dim: 2 };
    pub const HEX: CellKind = CellKind { family: Family::Cube, dim: 3 };
    pub const TRI: CellKind = CellKind { family: Family::Simplex, dim: 2 };
    pub const TET: CellKind = CellKind { family: Family::Simplex, dim: 3 };

    pub const ALL: [CellKind; 4] = [Self::QUAD, Self::HEX, Self::TRI, Self::TET];

    pub fn new(family: Family, dim: usize) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(Error::InvalidArgument(format!("unsupported cell dimension {dim}")));
        }
        Ok(CellKind { family, dim })
    }

    pub fn is_cube(&self) -> bool {
        self.family == Family::Cube
    }

    pub fn num_vertices(&self) -> usize {
        match self.family {
            Family::Cube => 1 << self.dim,
            Family::Simplex => self.dim + 1,
        }
    }

    /// Measure of the reference cell.
    pub fn volume(&self) -> f64 {
        match (self.family, self.dim) {
            (Family::Cube, _) => 1.0,
            (Family::Simplex, 2) => 0.5,
            (Family::Simplex, _) => 1.0 / 6.0,
        }
    }

    pub fn vertices(&self) -> Vec<Vec3> {
        (0..self.num_vertices()).map(|v| self.vertex(v)).collect()
    }

    pub fn vertex(&self, v: usize) -> Vec3 {
        let mut x = [0.0; 3];
        match self.family {
            Family::Cube => {
                for (i, xi) in x.iter_mut().enumerate().take(self.dim) {
                    *xi = ((v >> i) & 1) as f64;
                }
            }
            Family::Simplex => {
                if v > 0 {
                    x[v - 1] = 1.0;
                }
            }
        }
        x
    }

    /// Number of sub-entities of dimension `dim`.
    pub fn num_entities(&self, dim: usize) -> usize {
        entity_tuples(*self, dim).map(|t| t.len()).unwrap_or(0)
    }

    /// Short name used in file formats and diagnostics.
    pub fn name(&self) -> &'static str {
        match (self.family, self.dim) {
            (Family::Cube, 2) => "quad",
            (Family::Cube, _) => "hex",
            (Family::Simplex, 2) => "tri",
            (Family::Simplex, _) => "tet",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "quad" => Ok(Self::QUAD),
            "hex" => Ok(Self::HEX),
            "tri" => Ok(Self::TRI),
            "tet" => Ok(Self::TET),
            _ => Err(Error::InvalidArgument(format!("unknown cell kind '{name}'"))),
        }
    }

    /// Whether `x` lies in the closed reference cell (up to `tol`).
    pub fn contains(&self, x: &Vec3, tol: f64) -> bool {
        let coords = &x[..self.dim];
        match self.family {
            Family::Cube => coords.iter().all(|&c| c >= -tol && c <= 1.0 + tol),
            Family::Simplex => {
                coords.iter().all(|&c| c >= -tol) && coords.iter().sum::<f64>() <= 1.0 + tol
            }
        }
    }
}

impl fmt::Display for CellKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

/// A sub-entity of a reference cell.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EntityRef {
    pub dim: usize,
    pub local_index: usize,
    /// Strictly increasing cell-local vertex indices.
    pub vertices: Vec<usize>,
}

fn entity_tuples(kind: CellKind, dim: usize) -> Result<Vec<Vec<usize>>> {
    if dim > kind.dim {
        return Err(Error::InvalidArgument(format!(
            "entity dimension {dim} exceeds cell dimension {}",
            kind.dim
        )));
    }
    let nv = kind.num_vertices();
    if dim == kind.dim {
        return Ok(vec![(0..nv).collect()]);
    }
    if dim == 0 {
        return Ok((0..nv).map(|v| vec![v]).collect());
    }
    let tuples = match kind.family {
        Family::Simplex => combinations(nv, dim + 1),
        Family::Cube => {
            // a d'-face of the cube: fix (d - d') coordinate bits
            combinations(nv, 1 << dim)
                .into_iter()
                .filter(|t| {
                    let and = t.iter().fold(usize::MAX, |a, &v| a & v);
                    let or = t.iter().fold(0, |a, &v| a | v);
                    let free = (and ^ or).count_ones() as usize;
                    free == dim
                })
                .collect()
        }
    };
    Ok(tuples)
}

fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(r);
    fn rec(start: usize, n: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for v in start..n {
            cur.push(v);
            rec(v + 1, n, r, cur, out);
            cur.pop();
        }
    }
    rec(0, n, r, &mut cur, &mut out);
    out
}

/// All sub-entities of dimension `dim`, in the fixed local order.
pub fn entities(kind: CellKind, dim: usize) -> Result<Vec<EntityRef>> {
    Ok(entity_tuples(kind, dim)?
        .into_iter()
        .enumerate()
        .map(|(i, vertices)| EntityRef { dim, local_index: i, vertices })
        .collect())
}

/// Unit tangent from the first to the second vertex of an edge.
pub fn edge_tangent(kind: CellKind, edge: &EntityRef) -> Vec3 {
    debug_assert_eq!(edge.dim, 1);
    vec3::normalize(&edge_vector(kind, edge))
}

/// Unnormalised edge vector `v1 - v0`.
pub fn edge_vector(kind: CellKind, edge: &EntityRef) -> Vec3 {
    vec3::sub(&kind.vertex(edge.vertices[1]), &kind.vertex(edge.vertices[0]))
}

/// Frame of a face of a 3D reference cell.
#[derive(Debug, Clone, Copy)]
pub struct FaceFrame {
    /// Outward unit normal.
    pub normal: Vec3,
    /// `v1 - v0` and `v2 - v0` of the oriented vertex tuple.
    pub tangents: [Vec3; 2],
    /// First vertex of the tuple; the face is `origin + s t0 + t t1`.
    pub origin: Vec3,
}

impl FaceFrame {
    /// Unit normal induced by the tuple orientation, `t0 x t1 / |t0 x t1|`.
    pub fn oriented_normal(&self) -> Vec3 {
        vec3::normalize(&vec3::cross(&self.tangents[0], &self.tangents[1]))
    }

    /// Face area.
    pub fn area(&self, family: Family) -> f64 {
        let a = vec3::norm(&vec3::cross(&self.tangents[0], &self.tangents[1]));
        match family {
            Family::Cube => a,
            Family::Simplex => 0.5 * a,
        }
    }
}

pub fn face_frame(kind: CellKind, face: &EntityRef) -> Result<FaceFrame> {
    if kind.dim != 3 || face.dim != 2 {
        return Err(Error::InvalidArgument("face_frame needs a face of a 3D cell".into()));
    }
    let v: Vec<Vec3> = face.vertices.iter().map(|&i| kind.vertex(i)).collect();
    let t0 = vec3::sub(&v[1], &v[0]);
    let t1 = vec3::sub(&v[2], &v[0]);
    let mut n = vec3::normalize(&vec3::cross(&t0, &t1));
    let centroid = kind
        .vertices()
        .iter()
        .fold([0.0; 3], |acc, x| vec3::add(&acc, x));
    let centroid = vec3::scale(&centroid, 1.0 / kind.num_vertices() as f64);
    if vec3::dot(&n, &vec3::sub(&centroid, &v[0])) > 0.0 {
        n = vec3::scale(&n, -1.0);
    }
    Ok(FaceFrame { normal: n, tangents: [t0, t1], origin: v[0] })
}
