//! Conforming meshes, global entities and the global DOF map.
//!
//! A cell lists its global vertex ids in reference-vertex order. The mesh is
//! oriented when every reference entity tuple maps to increasing global ids;
//! shared edges and faces then carry one orientation, and two local DOFs are
//! the same global DOF exactly when they sit on the same global entity with the
//! same entity-local index.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::element::ReferenceElement;
use crate::error::{Error, Result};
use crate::geometry::AffineMap;
use crate::topology::{self, CellKind, Family};
use crate::vec3::{self, Vec3};

#[derive(Debug, Clone)]
pub struct Mesh {
    pub kind: CellKind,
    pub vertices: Vec<Vec3>,
    pub cells: Vec<Vec<usize>>,
    pub maps: Vec<AffineMap>,
    /// Refinement level per cell; zero for conforming meshes.
    pub levels: Vec<u8>,
}

impl Mesh {
    pub fn new(kind: CellKind, vertices: Vec<Vec3>, cells: Vec<Vec<usize>>) -> Result<Self> {
        let levels = vec![0; cells.len()];
        Mesh::with_levels(kind, vertices, cells, levels)
    }

    pub fn with_levels(kind: CellKind, vertices: Vec<Vec3>, cells: Vec<Vec<usize>>, levels: Vec<u8>) -> Result<Self> {
        let mut maps = Vec::with_capacity(cells.len());
        for (c, cell) in cells.iter().enumerate() {
            if let Some(&v) = cell.iter().find(|&&v| v >= vertices.len()) {
                return Err(Error::InvalidArgument(format!("cell {c} references missing vertex {v}")));
            }
            let xs: Vec<Vec3> = cell.iter().map(|&v| vertices[v]).collect();
            let map = AffineMap::from_vertices(kind, &xs)
                .map_err(|e| Error::DegenerateGeometry(format!("cell {c}: {e}")))?;
            maps.push(map);
        }
        Ok(Mesh { kind, vertices, cells, maps, levels })
    }

    pub fn dim(&self) -> usize {
        self.kind.dim
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cell_vertices(&self, c: usize) -> Vec<Vec3> {
        self.cells[c].iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn centroid(&self, c: usize) -> Vec3 {
        let xs = self.cell_vertices(c);
        let s = xs.iter().fold([0.0; 3], |a, x| vec3::add(&a, x));
        vec3::scale(&s, 1.0 / xs.len() as f64)
    }

    pub fn cell_volume(&self, c: usize) -> f64 {
        self.maps[c].measure() * self.kind.volume()
    }

    /// Every local entity tuple maps to increasing global ids.
    pub fn is_oriented(&self) -> bool {
        let tuples: Vec<Vec<usize>> = (1..=self.dim())
            .flat_map(|d| topology::entities(self.kind, d).unwrap())
            .map(|e| e.vertices)
            .collect();
        self.cells
            .iter()
            .all(|cell| tuples.iter().all(|t| t.windows(2).all(|w| cell[w[0]] < cell[w[1]])))
    }

    /// Oriented copy: simplices get their vertices sorted by global id;
    /// cube meshes must already be oriented.
    pub fn oriented(&self) -> Result<Mesh> {
        if self.is_oriented() {
            return Ok(self.clone());
        }
        if self.kind.family == Family::Cube {
            return Err(Error::NotOriented("cube mesh cannot be oriented by vertex sorting".into()));
        }
        let mut cells = self.cells.clone();
        for cell in &mut cells {
            cell.sort_unstable();
        }
        Mesh::with_levels(self.kind, self.vertices.clone(), cells, self.levels.clone())
    }
}

/// Structured grid of `n[i]` cells per axis on the box `[lo, hi]`.
pub fn structured_hex_mesh(n: &[usize], lo: Vec3, hi: Vec3) -> Result<Mesh> {
    structured_hex_mesh_filtered(n, lo, hi, &|_| true)
}

/// Structured grid keeping only cells whose center satisfies `keep`; unused
/// vertices are dropped and the remaining ones keep their relative order.
pub fn structured_hex_mesh_filtered(n: &[usize], lo: Vec3, hi: Vec3, keep: &dyn Fn(&Vec3) -> bool) -> Result<Mesh> {
    let dim = n.len();
    if !(2..=3).contains(&dim) || n.contains(&0) {
        return Err(Error::InvalidArgument(format!("need 2 or 3 positive cell counts, got {n:?}")));
    }
    let kind = CellKind::new(Family::Cube, dim)?;
    let nz = if dim == 3 { n[2] } else { 1 };
    let np = [n[0] + 1, n[1] + 1, if dim == 3 { n[2] + 1 } else { 1 }];
    let coord = |i: usize, a: usize| lo[a] + (hi[a] - lo[a]) * i as f64 / n[a] as f64;
    let vid = |i: usize, j: usize, k: usize| i + np[0] * (j + np[1] * k);
    let mut cells = Vec::new();
    for k in 0..nz {
        for j in 0..n[1] {
            for i in 0..n[0] {
                let mut center = [coord(i, 0) + 0.5 * (hi[0] - lo[0]) / n[0] as f64, coord(j, 1) + 0.5 * (hi[1] - lo[1]) / n[1] as f64, 0.0];
                if dim == 3 {
                    center[2] = coord(k, 2) + 0.5 * (hi[2] - lo[2]) / n[2] as f64;
                }
                if !keep(&center) {
                    continue;
                }
                let cell: Vec<usize> = (0..kind.num_vertices())
                    .map(|v| vid(i + (v & 1), j + ((v >> 1) & 1), k + ((v >> 2) & 1)))
                    .collect();
                cells.push(cell);
            }
        }
    }
    let mut used = vec![false; np[0] * np[1] * np[2]];
    for c in &cells {
        for &v in c {
            used[v] = true;
        }
    }
    let mut renumber = vec![usize::MAX; used.len()];
    let mut vertices = Vec::new();
    for k in 0..np[2] {
        for j in 0..np[1] {
            for i in 0..np[0] {
                let id = vid(i, j, k);
                if used[id] {
                    renumber[id] = vertices.len();
                    vertices.push([coord(i, 0), coord(j, 1), if dim == 3 { coord(k, 2) } else { 0.0 }]);
                }
            }
        }
    }
    for c in &mut cells {
        for v in c.iter_mut() {
            *v = renumber[*v];
        }
    }
    Mesh::new(kind, vertices, cells)
}

/// Split every quad into two triangles and every hex into six tetrahedra
/// along the diagonal through local vertices 0 and `2^d - 1`, then sort the
/// vertices of each simplex by global id.
pub fn tetrahedralize(mesh: &Mesh) -> Result<Mesh> {
    if mesh.kind.family != Family::Cube {
        return Err(Error::InvalidArgument("tetrahedralize expects a cube mesh".into()));
    }
    let templates: Vec<Vec<usize>> = if mesh.dim() == 2 {
        vec![vec![0, 1, 3], vec![0, 2, 3]]
    } else {
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        perms
            .iter()
            .map(|p| vec![0, 1 << p[0], (1 << p[0]) | (1 << p[1]), 7])
            .collect()
    };
    let kind = CellKind::new(Family::Simplex, mesh.dim())?;
    let mut cells = Vec::new();
    let mut levels = Vec::new();
    for (c, cell) in mesh.cells.iter().enumerate() {
        for t in &templates {
            let mut s: Vec<usize> = t.iter().map(|&l| cell[l]).collect();
            s.sort_unstable();
            cells.push(s);
            levels.push(mesh.levels[c]);
        }
    }
    Mesh::with_levels(kind, mesh.vertices.clone(), cells, levels)
}

/// How boundary facets are recognized.
pub enum Boundary<'a> {
    /// Facets with a single incident cell.
    Incidence,
    /// Facets whose outside neighborhood is not in the domain; used on
    /// non-conforming meshes where coarse faces also have one incident cell.
    Domain(&'a dyn Fn(&Vec3) -> bool),
}

#[derive(Debug, Clone)]
pub struct GlobalEntity {
    /// Sorted global vertex ids.
    pub vertices: Vec<usize>,
    /// Incident `(cell, local entity index)` pairs.
    pub cells: Vec<(usize, usize)>,
    pub boundary: bool,
}

/// Global edges and faces with their cell incidences.
#[derive(Debug, Clone)]
pub struct Topology {
    pub dim: usize,
    /// `entities[d]` for `d = 1..dim-1`; index 0 and `dim` are empty.
    pub entities: Vec<Vec<GlobalEntity>>,
    /// `cell_entities[c][d][local]` is the global index of a local entity.
    pub cell_entities: Vec<Vec<Vec<usize>>>,
    pub lookup: Vec<HashMap<Vec<usize>, usize>>,
}

impl Topology {
    pub fn build(mesh: &Mesh, boundary: Boundary<'_>) -> Result<Self> {
        if !mesh.is_oriented() {
            return Err(Error::NotOriented("local and global entity orientations differ".into()));
        }
        let d = mesh.dim();
        let mut entities: Vec<Vec<GlobalEntity>> = vec![Vec::new(); d + 1];
        let mut lookup: Vec<HashMap<Vec<usize>, usize>> = vec![HashMap::new(); d + 1];
        let mut cell_entities = vec![vec![Vec::new(); d + 1]; mesh.n_cells()];
        let local: Vec<Vec<Vec<usize>>> = (0..=d)
            .map(|k| {
                if (1..d).contains(&k) {
                    topology::entities(mesh.kind, k).unwrap().into_iter().map(|e| e.vertices).collect()
                } else {
                    Vec::new()
                }
            })
            .collect();
        for (c, cell) in mesh.cells.iter().enumerate() {
            for k in 1..d {
                for (l, tuple) in local[k].iter().enumerate() {
                    let key: Vec<usize> = tuple.iter().map(|&v| cell[v]).collect();
                    let id = *lookup[k].entry(key.clone()).or_insert_with(|| {
                        entities[k].push(GlobalEntity { vertices: key, cells: Vec::new(), boundary: false });
                        entities[k].len() - 1
                    });
                    entities[k][id].cells.push((c, l));
                    cell_entities[c][k].push(id);
                }
            }
        }
        // facets
        for f in 0..entities[d - 1].len() {
            let ent = &entities[d - 1][f];
            let on_boundary = match (&boundary, ent.cells.len()) {
                (_, n) if n >= 2 => false,
                (Boundary::Incidence, _) => true,
                (Boundary::Domain(inside), _) => {
                    let (c, _) = ent.cells[0];
                    let xs: Vec<Vec3> = ent.vertices.iter().map(|&v| mesh.vertices[v]).collect();
                    let center = vec3::scale(&xs.iter().fold([0.0; 3], |a, x| vec3::add(&a, x)), 1.0 / xs.len() as f64);
                    let out = vec3::sub(&center, &mesh.centroid(c));
                    let probe = vec3::add(&center, &vec3::scale(&out, 1e-6));
                    !inside(&probe)
                }
            };
            entities[d - 1][f].boundary = on_boundary;
        }
        if d == 3 {
            let mut edge_flags = vec![false; entities[1].len()];
            for f in &entities[2] {
                if f.boundary {
                    let (c, l) = f.cells[0];
                    let face_tuple = &local[2][l];
                    for (le, tuple) in local[1].iter().enumerate() {
                        if tuple.iter().all(|v| face_tuple.contains(v)) {
                            edge_flags[cell_entities[c][1][le]] = true;
                        }
                    }
                }
            }
            for (e, flag) in edge_flags.into_iter().enumerate() {
                entities[1][e].boundary = flag;
            }
        }
        Ok(Topology { dim: d, entities, cell_entities, lookup })
    }

    pub fn n_entities(&self, dim: usize) -> usize {
        self.entities[dim].len()
    }

    pub fn find(&self, dim: usize, sorted_vertices: &[usize]) -> Option<usize> {
        self.lookup[dim].get(sorted_vertices).copied()
    }
}

/// Local-to-global DOF numbering.
#[derive(Debug, Clone)]
pub struct DofMap {
    pub n_dofs: usize,
    pub cell_dofs: Vec<Vec<usize>>,
    /// `entity_dofs[d][global entity]`, entity-local order; `d = dim` holds
    /// the interior DOFs of each cell.
    pub entity_dofs: Vec<Vec<Vec<usize>>>,
    pub dirichlet: Vec<bool>,
}

impl DofMap {
    /// Numbers DOFs entity by entity in first-visit order over the cells.
    pub fn build(mesh: &Mesh, topo: &Topology, element: &ReferenceElement, dirichlet: bool) -> Result<Self> {
        if element.kind != mesh.kind {
            return Err(Error::InvalidArgument(format!("element on {} used with a {} mesh", element.kind, mesh.kind)));
        }
        let d = mesh.dim();
        let mut entity_dofs: Vec<Vec<Vec<usize>>> = (0..=d)
            .map(|k| {
                let n = if k == d { mesh.n_cells() } else { topo.n_entities(k) };
                vec![Vec::new(); n]
            })
            .collect();
        let mut n_dofs = 0;
        let mut cell_dofs = vec![vec![usize::MAX; element.n_dofs()]; mesh.n_cells()];
        for c in 0..mesh.n_cells() {
            for k in 1..=d {
                for l in 0..element.kind.num_entities(k) {
                    let g = if k == d { c } else { topo.cell_entities[c][k][l] };
                    let local = element.entity_dofs(k, l);
                    if entity_dofs[k][g].is_empty() && !local.is_empty() {
                        entity_dofs[k][g] = (n_dofs..n_dofs + local.len()).collect();
                        n_dofs += local.len();
                    }
                    for (j, &a) in local.iter().enumerate() {
                        cell_dofs[c][a] = entity_dofs[k][g][j];
                    }
                }
            }
        }
        let mut mask = vec![false; n_dofs];
        if dirichlet {
            for k in 1..d {
                for (g, ent) in topo.entities[k].iter().enumerate() {
                    if ent.boundary {
                        for &dof in &entity_dofs[k][g] {
                            mask[dof] = true;
                        }
                    }
                }
            }
        }
        Ok(DofMap { n_dofs, cell_dofs, entity_dofs, dirichlet: mask })
    }

    pub fn n_dirichlet(&self) -> usize {
        self.dirichlet.iter().filter(|&&b| b).count()
    }
}

/// Writes the ASCII mesh format:
///
/// ```text
/// kind hex
/// vertices N
/// x y z            (N lines)
/// cells M
/// level v0 v1 ...  (M lines)
/// ```
pub fn write_ascii(mesh: &Mesh, out: &mut dyn Write) -> Result<()> {
    let mut s = String::new();
    let _ = writeln!(s, "kind {}", mesh.kind.name());
    let _ = writeln!(s, "vertices {}", mesh.vertices.len());
    for x in &mesh.vertices {
        let _ = writeln!(s, "{:.17e} {:.17e} {:.17e}", x[0], x[1], x[2]);
    }
    let _ = writeln!(s, "cells {}", mesh.n_cells());
    for (c, cell) in mesh.cells.iter().enumerate() {
        let ids: Vec<String> = cell.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "{} {}", mesh.levels[c], ids.join(" "));
    }
    out.write_all(s.as_bytes())?;
    Ok(())
}

pub fn read_ascii(input: &mut dyn BufRead) -> Result<Mesh> {
    let mut lines = input
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| l.as_ref().map(|s| !s.trim().is_empty() && !s.starts_with('#')).unwrap_or(true));
    let mut next = |what: &str| -> Result<(usize, String)> {
        match lines.next() {
            Some((n, Ok(l))) => Ok((n, l)),
            Some((_, Err(e))) => Err(e.into()),
            None => Err(Error::Parse { line: 0, msg: format!("unexpected end of input, expected {what}") }),
        }
    };
    let header = |line: (usize, String), key: &str| -> Result<String> {
        let (n, l) = line;
        let mut it = l.split_whitespace();
        if it.next() != Some(key) {
            return Err(Error::Parse { line: n, msg: format!("expected '{key}'") });
        }
        it.next().map(str::to_string).ok_or(Error::Parse { line: n, msg: format!("missing value after '{key}'") })
    };
    let kind = CellKind::from_name(&header(next("kind")?, "kind")?)?;
    let count = |line: (usize, String), key: &str| -> Result<usize> {
        let n = line.0;
        header(line, key)?.parse().map_err(|_| Error::Parse { line: n, msg: "bad count".into() })
    };
    let nv = count(next("vertices")?, "vertices")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (n, l) = next("vertex")?;
        let v: Vec<f64> = l
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::Parse { line: n, msg: format!("bad coordinate '{t}'") }))
            .collect::<Result<_>>()?;
        if v.len() != 3 {
            return Err(Error::Parse { line: n, msg: "expected 3 coordinates".into() });
        }
        vertices.push([v[0], v[1], v[2]]);
    }
    let nc = count(next("cells")?, "cells")?;
    let mut cells = Vec::with_capacity(nc);
    let mut levels = Vec::with_capacity(nc);
    for _ in 0..nc {
        let (n, l) = next("cell")?;
        let v: Vec<usize> = l
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::Parse { line: n, msg: format!("bad index '{t}'") }))
            .collect::<Result<_>>()?;
        if v.len() != kind.num_vertices() + 1 {
            return Err(Error::Parse { line: n, msg: format!("expected level and {} vertices", kind.num_vertices()) });
        }
        levels.push(v[0] as u8);
        cells.push(v[1..].to_vec());
    }
    Mesh::with_levels(kind, vertices, cells, levels)
}

/// Legacy VTK unstructured grid with the cell level and optional per-cell
/// vector data.
pub fn write_vtk(mesh: &Mesh, cell_vectors: Option<(&str, &[Vec3])>, out: &mut dyn Write) -> Result<()> {
    let (vtk_type, order): (u8, Vec<usize>) = match (mesh.kind.family, mesh.dim()) {
        (Family::Cube, 2) => (9, vec![0, 1, 3, 2]),
        (Family::Cube, _) => (12, vec![0, 1, 3, 2, 4, 5, 7, 6]),
        (Family::Simplex, 2) => (5, vec![0, 1, 2]),
        (Family::Simplex, _) => (10, vec![0, 1, 2, 3]),
    };
    let mut s = String::from("# vtk DataFile Version 3.0\nnedelec mesh\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(s, "POINTS {} double", mesh.vertices.len());
    for x in &mesh.vertices {
        let _ = writeln!(s, "{} {} {}", x[0], x[1], x[2]);
    }
    let nv = order.len();
    let _ = writeln!(s, "CELLS {} {}", mesh.n_cells(), mesh.n_cells() * (nv + 1));
    for cell in &mesh.cells {
        let ids: Vec<String> = order.iter().map(|&l| cell[l].to_string()).collect();
        let _ = writeln!(s, "{nv} {}", ids.join(" "));
    }
    let _ = writeln!(s, "CELL_TYPES {}", mesh.n_cells());
    for _ in 0..mesh.n_cells() {
        let _ = writeln!(s, "{vtk_type}");
    }
    let _ = writeln!(s, "CELL_DATA {}\nSCALARS level int 1\nLOOKUP_TABLE default", mesh.n_cells());
    for l in &mesh.levels {
        let _ = writeln!(s, "{l}");
    }
    if let Some((name, data)) = cell_vectors {
        let _ = writeln!(s, "VECTORS {name} double");
        for v in data {
            let _ = writeln!(s, "{} {} {}", v[0], v[1], v[2]);
        }
    }
    out.write_all(s.as_bytes())?;
    Ok(())
}
