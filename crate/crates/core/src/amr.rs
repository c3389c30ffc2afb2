//! Quadtree/octree refinement of structured hex meshes with hanging-entity
//! constraints.
//!
//! Leaves are keyed by level and integer position at that level. Children of
//! a cell are numbered lexicographically, `s = o_x + 2 o_y + 4 o_z` with
//! `o_i in {0, 1}`. The active mesh numbers vertices by ascending `(z, y, x)`,
//! so every leaf is oriented by construction.
//!
//! A hanging edge or face `g` of a fine leaf lies strictly inside an entity
//! `G` of a leaf one level coarser. Its DOFs are constrained by the DOFs of
//! the coarse cell `K(G)` through the restriction operator of the child
//! `s(g)` of `K(G)` that has `g` as an entity.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::{Arc, OnceLock, RwLock};

use nalgebra::DMatrix;

use crate::element::{cube_component_orders, ReferenceElement};
use crate::error::{Error, Result};
use crate::mesh::{DofMap, Mesh, Topology};
use crate::poly;
use crate::topology::{self, CellKind, Family};
use crate::vec3::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellKey {
    pub level: u8,
    /// Position in units of the cell size at `level`.
    pub coords: [u32; 3],
}

impl CellKey {
    pub fn child(&self, s: usize) -> CellKey {
        let mut coords = [0; 3];
        for (a, c) in coords.iter_mut().enumerate() {
            *c = 2 * self.coords[a] + ((s >> a) & 1) as u32;
        }
        CellKey { level: self.level + 1, coords }
    }

    pub fn parent(&self) -> Option<CellKey> {
        (self.level > 0).then(|| CellKey { level: self.level - 1, coords: self.coords.map(|c| c / 2) })
    }

    /// Child index of this cell inside its parent.
    pub fn child_index(&self) -> usize {
        (0..3).map(|a| ((self.coords[a] & 1) as usize) << a).sum()
    }
}

/// Hierarchically refined structured grid of unit-aspect cells.
#[derive(Debug, Clone)]
pub struct Forest {
    pub dim: usize,
    /// Root cells per axis (`1` for z in 2D).
    pub root_n: [usize; 3],
    pub lo: Vec3,
    pub hi: Vec3,
    root_keep: Vec<bool>,
    leaves: HashSet<CellKey>,
}

impl Forest {
    /// Root grid of `n[i]` cells per axis over `[lo, hi]`, keeping the root
    /// cells whose center satisfies `keep`.
    pub fn new(n: &[usize], lo: Vec3, hi: Vec3, keep: &dyn Fn(&Vec3) -> bool) -> Result<Self> {
        let dim = n.len();
        if !(2..=3).contains(&dim) || n.contains(&0) {
            return Err(Error::InvalidArgument(format!("need 2 or 3 positive root counts, got {n:?}")));
        }
        let root_n = [n[0], n[1], if dim == 3 { n[2] } else { 1 }];
        let mut root_keep = Vec::with_capacity(root_n.iter().product());
        let mut leaves = HashSet::new();
        for k in 0..root_n[2] {
            for j in 0..root_n[1] {
                for i in 0..root_n[0] {
                    let idx = [i, j, k];
                    let mut center = [0.0; 3];
                    for a in 0..dim {
                        center[a] = lo[a] + (hi[a] - lo[a]) * (idx[a] as f64 + 0.5) / root_n[a] as f64;
                    }
                    let kept = keep(&center);
                    root_keep.push(kept);
                    if kept {
                        leaves.insert(CellKey { level: 0, coords: [i as u32, j as u32, k as u32] });
                    }
                }
            }
        }
        if leaves.is_empty() {
            return Err(Error::InvalidArgument("forest has no root cells".into()));
        }
        Ok(Forest { dim, root_n, lo, hi, root_keep, leaves })
    }

    pub fn unit(n: &[usize]) -> Result<Self> {
        Forest::new(n, [0.0; 3], [1.0; 3], &|_| true)
    }

    pub fn kind(&self) -> CellKind {
        CellKind { family: Family::Cube, dim: self.dim }
    }

    pub fn n_leaves(&self) -> usize {
        self.leaves.len()
    }

    pub fn is_leaf(&self, key: &CellKey) -> bool {
        self.leaves.contains(key)
    }

    pub fn max_level(&self) -> u8 {
        self.leaves.iter().map(|k| k.level).max().unwrap_or(0)
    }

    /// Leaves ordered by anchor position `(z, y, x)` on the finest grid.
    pub fn leaves(&self) -> Vec<CellKey> {
        let top = self.max_level();
        let mut v: Vec<CellKey> = self.leaves.iter().copied().collect();
        v.sort_by_key(|k| {
            let s = top - k.level;
            (k.coords[2] << s, k.coords[1] << s, k.coords[0] << s)
        });
        v
    }

    fn root_kept(&self, root: [i64; 3]) -> bool {
        if (0..3).any(|a| root[a] < 0 || root[a] >= self.root_n[a] as i64) {
            return false;
        }
        let [i, j, k] = root.map(|v| v as usize);
        self.root_keep[i + self.root_n[0] * (j + self.root_n[1] * k)]
    }

    /// Whether a physical point lies in the closure-free interior union of
    /// the kept root cells.
    pub fn contains_point(&self, x: &Vec3) -> bool {
        let mut root = [0i64; 3];
        for a in 0..self.dim {
            let t = (x[a] - self.lo[a]) / (self.hi[a] - self.lo[a]) * self.root_n[a] as f64;
            if !(0.0..self.root_n[a] as f64).contains(&t) {
                return false;
            }
            root[a] = t.floor() as i64;
        }
        self.root_kept(root)
    }

    /// Leaf covering the level-`level` cell at `coords`, if one exists at
    /// that level or coarser.
    pub fn find_leaf(&self, level: u8, coords: [i64; 3]) -> Option<CellKey> {
        let limit = |a: usize| (self.root_n[a] as i64) << level;
        if (0..3).any(|a| coords[a] < 0 || coords[a] >= limit(a)) {
            return None;
        }
        if !self.root_kept(coords.map(|c| c >> level)) {
            return None;
        }
        (0..=level).rev().find_map(|m| {
            let key = CellKey { level: m, coords: coords.map(|c| (c >> (level - m)) as u32) };
            self.leaves.contains(&key).then_some(key)
        })
    }

    fn neighbor_offsets(&self) -> Vec<[i64; 3]> {
        let zr: &[i64] = if self.dim == 3 { &[-1, 0, 1] } else { &[0] };
        let mut out = Vec::new();
        for &dz in zr {
            for dy in -1..=1 {
                for dx in -1..=1 {
                    if (dx, dy, dz) != (0, 0, 0) {
                        out.push([dx, dy, dz]);
                    }
                }
            }
        }
        out
    }

    /// Leaves touching a finer leaf more than one level below them.
    fn balance_violations(&self) -> Vec<CellKey> {
        let offsets = self.neighbor_offsets();
        let mut bad = HashSet::new();
        for leaf in &self.leaves {
            if leaf.level < 2 {
                continue;
            }
            for off in &offsets {
                let c = [0, 1, 2].map(|a| leaf.coords[a] as i64 + off[a]);
                if let Some(n) = self.find_leaf(leaf.level, c) {
                    if n.level + 1 < leaf.level {
                        bad.insert(n);
                    }
                }
            }
        }
        let mut v: Vec<CellKey> = bad.into_iter().collect();
        v.sort();
        v
    }

    /// 2:1 balance across vertices, edges and faces.
    pub fn is_balanced(&self) -> bool {
        self.balance_violations().is_empty()
    }

    fn split(&mut self, key: &CellKey) {
        if self.leaves.remove(key) {
            for s in 0..(1 << self.dim) {
                self.leaves.insert(key.child(s));
            }
        }
    }

    /// Refine the marked leaves, then refine further until balanced.
    pub fn refine(&mut self, marked: &[CellKey]) -> Result<()> {
        if let Some(k) = marked.iter().find(|k| !self.leaves.contains(k)) {
            return Err(Error::InvalidArgument(format!("cell {k:?} is not a leaf")));
        }
        for k in marked {
            self.split(k);
        }
        loop {
            let bad = self.balance_violations();
            if bad.is_empty() {
                return Ok(());
            }
            for k in &bad {
                self.split(k);
            }
        }
    }

    pub fn refine_all(&mut self) {
        let all: Vec<CellKey> = self.leaves.iter().copied().collect();
        for k in &all {
            self.split(k);
        }
    }

    /// Active mesh of the leaves.
    pub fn to_mesh(&self) -> Result<ForestMesh> {
        let top = self.max_level();
        let leaves = self.leaves();
        let kind = self.kind();
        let mut corner_ids: BTreeMap<(i64, i64, i64), usize> = BTreeMap::new();
        let corners = |k: &CellKey| -> Vec<[i64; 3]> {
            let h = 1i64 << (top - k.level);
            (0..kind.num_vertices())
                .map(|v| [0, 1, 2].map(|a| (k.coords[a] as i64 + ((v >> a) & 1) as i64) * h))
                .map(|mut p| {
                    if self.dim == 2 {
                        p[2] = 0;
                    }
                    p
                })
                .collect()
        };
        for k in &leaves {
            for p in corners(k) {
                corner_ids.insert((p[2], p[1], p[0]), 0);
            }
        }
        let mut vertex_ints = Vec::with_capacity(corner_ids.len());
        for (id, (key, slot)) in corner_ids.iter_mut().enumerate() {
            *slot = id;
            vertex_ints.push([key.2, key.1, key.0]);
        }
        let scale = [0, 1, 2].map(|a| (self.hi[a] - self.lo[a]) / ((self.root_n[a] as f64) * (1u64 << top) as f64));
        let vertices: Vec<Vec3> = vertex_ints
            .iter()
            .map(|p| {
                let mut x = [0.0; 3];
                for a in 0..self.dim {
                    x[a] = self.lo[a] + scale[a] * p[a] as f64;
                }
                x
            })
            .collect();
        let cells: Vec<Vec<usize>> = leaves
            .iter()
            .map(|k| corners(k).iter().map(|p| corner_ids[&(p[2], p[1], p[0])]).collect())
            .collect();
        let levels = leaves.iter().map(|k| k.level).collect();
        let mesh = Mesh::with_levels(kind, vertices, cells, levels)?;
        Ok(ForestMesh { mesh, leaves, vertex_ints, finest: top })
    }
}

/// Active mesh of a forest with the integer geometry needed for hanging
/// detection.
#[derive(Debug, Clone)]
pub struct ForestMesh {
    pub mesh: Mesh,
    pub leaves: Vec<CellKey>,
    /// Vertex positions in units of the finest cell size.
    pub vertex_ints: Vec<[i64; 3]>,
    pub finest: u8,
}

impl ForestMesh {
    pub fn cell_of(&self) -> HashMap<CellKey, usize> {
        self.leaves.iter().enumerate().map(|(i, k)| (*k, i)).collect()
    }

    fn entity_box(&self, vertices: &[usize]) -> ([i64; 3], [i64; 3]) {
        let mut lo = [i64::MAX; 3];
        let mut hi = [i64::MIN; 3];
        for &v in vertices {
            for a in 0..3 {
                lo[a] = lo[a].min(self.vertex_ints[v][a]);
                hi[a] = hi[a].max(self.vertex_ints[v][a]);
            }
        }
        (lo, hi)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HangingEntity {
    pub dim: usize,
    /// Global index of the hanging entity `g`.
    pub entity: usize,
    pub container_dim: usize,
    /// Global index of `G(g)`.
    pub container: usize,
    pub fine_cell: usize,
    pub coarse_cell: usize,
    /// Subcell index `s(g)` of `g` inside the coarse cell.
    pub child: usize,
    /// Local index of `g` among the entities of that child.
    pub child_entity: usize,
}

/// All hanging edges and faces of the active mesh.
pub fn find_hanging(forest: &Forest, fm: &ForestMesh, topo: &Topology) -> Result<Vec<HangingEntity>> {
    if !forest.is_balanced() {
        return Err(Error::Unbalanced("hanging entities require a 2:1 balanced forest".into()));
    }
    let d = forest.dim;
    let kind = forest.kind();
    let mut by_box: HashMap<([i64; 3], [i64; 3]), (usize, usize)> = HashMap::new();
    for k in 1..d {
        for (g, ent) in topo.entities[k].iter().enumerate() {
            by_box.insert(fm.entity_box(&ent.vertices), (k, g));
        }
    }
    let mut out = Vec::new();
    for k in 1..d {
        let local_tuples: Vec<Vec<usize>> =
            topology::entities(kind, k)?.into_iter().map(|e| e.vertices).collect();
        for (g, ent) in topo.entities[k].iter().enumerate() {
            let (fine_cell, _) = ent.cells[0];
            let leaf = fm.leaves[fine_cell];
            if leaf.level == 0 {
                continue;
            }
            let (lo, hi) = fm.entity_box(&ent.vertices);
            let h = 1i64 << (fm.finest - leaf.level);
            let parent_lo = [0, 1, 2].map(|a| ((leaf.coords[a] / 2) as i64) * 2 * h);
            // smallest parent entity containing g
            let mut glo = lo;
            let mut ghi = hi;
            let mut flat = 0;
            for a in 0..d {
                if hi[a] > lo[a] || lo[a] == parent_lo[a] + h {
                    glo[a] = parent_lo[a];
                    ghi[a] = parent_lo[a] + 2 * h;
                } else {
                    flat += 1;
                }
            }
            if flat == 0 {
                continue;
            }
            let Some(&(cdim, container)) = by_box.get(&(glo, ghi)) else {
                continue;
            };
            let coarse_cell = topo.entities[cdim][container].cells.iter().map(|c| c.0).min().unwrap();
            let anchor = fm.vertex_ints[fm.mesh.cells[coarse_cell][0]];
            let mut child = 0;
            let mut child_lo = anchor;
            for a in 0..d {
                let o = ((lo[a] - anchor[a]) / h).min(1);
                child |= (o as usize) << a;
                child_lo[a] = anchor[a] + o * h;
            }
            let mut tuple: Vec<usize> = ent
                .vertices
                .iter()
                .map(|&v| (0..d).map(|a| (((fm.vertex_ints[v][a] - child_lo[a]) / h) as usize) << a).sum())
                .collect();
            tuple.sort_unstable();
            let child_entity = local_tuples
                .iter()
                .position(|t| *t == tuple)
                .ok_or_else(|| Error::Constraint(format!("entity {g} is not an entity of child {child}")))?;
            out.push(HangingEntity { dim: k, entity: g, container_dim: cdim, container, fine_cell, coarse_cell, child, child_entity });
        }
    }
    Ok(out)
}

/// Lagrange restriction of one tensor block of anisotropic orders.
#[derive(Debug, Clone)]
pub struct LagrangeRestriction {
    pub orders: Vec<usize>,
    /// Coarse basis evaluated at the patch nodes `j / (2 k_i)`.
    pub r: DMatrix<f64>,
    /// `w[s][i]`: patch node coinciding with node `i` of child `s`.
    pub w: Vec<Vec<usize>>,
}

impl LagrangeRestriction {
    pub fn new(orders: &[usize]) -> Self {
        let d = orders.len();
        let basis = poly::tensor_lagrange(orders);
        let patch_n: Vec<usize> = orders.iter().map(|&k| 2 * k + 1).collect();
        let patch_coord = |k: usize, j: usize| if k == 0 { 0.5 } else { j as f64 / (2 * k) as f64 };
        let n_patch: usize = patch_n.iter().product();
        let mut r = DMatrix::zeros(n_patch, basis.len());
        for p in 0..n_patch {
            let mut x = [0.0; 3];
            let mut rem = p;
            for a in 0..d {
                x[a] = patch_coord(orders[a], rem % patch_n[a]);
                rem /= patch_n[a];
            }
            for (j, t) in basis.terms.iter().enumerate() {
                r[(p, j)] = t.eval(&x);
            }
        }
        let nodes_per: Vec<usize> = orders.iter().map(|&k| k + 1).collect();
        let n_child: usize = nodes_per.iter().product();
        let w = (0..1usize << d)
            .map(|s| {
                (0..n_child)
                    .map(|i| {
                        let mut rem = i;
                        let mut p = 0;
                        let mut stride = 1;
                        for a in 0..d {
                            let ia = rem % nodes_per[a];
                            rem /= nodes_per[a];
                            let o = (s >> a) & 1;
                            p += (o * orders[a] + ia) * stride;
                            stride *= patch_n[a];
                        }
                        p
                    })
                    .collect()
            })
            .collect();
        LagrangeRestriction { orders: orders.to_vec(), r, w }
    }

    /// `R^s_ij = R_{w_s(i) j}`.
    pub fn child_matrix(&self, s: usize) -> DMatrix<f64> {
        let w = &self.w[s];
        DMatrix::from_fn(w.len(), self.r.ncols(), |i, j| self.r[(w[i], j)])
    }
}

/// Pre-basis restriction of the hex element to child `s`: block diagonal
/// over the vector components.
pub fn prebasis_restriction(dim: usize, k: usize, s: usize) -> DMatrix<f64> {
    let blocks: Vec<DMatrix<f64>> = cube_component_orders(dim, k)
        .iter()
        .map(|o| LagrangeRestriction::new(o).child_matrix(s))
        .collect();
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut m = DMatrix::zeros(n, n);
    let mut off = 0;
    for b in &blocks {
        m.view_mut((off, off), (b.nrows(), b.ncols())).copy_from(b);
        off += b.nrows();
    }
    m
}

/// Edge-element restriction matrices, one per child: coarse-cell DOFs to
/// the DOFs of the same field on child `s`. The factor one half is the
/// covariant Piola factor of bisection.
pub fn edge_restriction(element: &ReferenceElement) -> Result<Vec<DMatrix<f64>>> {
    if element.kind.family != Family::Cube {
        return Err(Error::InvalidArgument("restriction operators exist for cube elements only".into()));
    }
    let d = element.kind.dim;
    let qt = element.change_of_basis.transpose();
    Ok((0..1usize << d)
        .map(|s| &element.moment_matrix * (prebasis_restriction(d, element.order, s) * 0.5) * &qt)
        .collect())
}

/// Shared restriction matrices for `(kind, k)`.
pub fn edge_restriction_cached(kind: CellKind, k: usize) -> Result<Arc<Vec<DMatrix<f64>>>> {
    static CACHE: OnceLock<RwLock<HashMap<(CellKind, usize), Arc<Vec<DMatrix<f64>>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(r) = cache.read().unwrap().get(&(kind, k)) {
        return Ok(r.clone());
    }
    let r = Arc::new(edge_restriction(&*ReferenceElement::get(kind, k)?)?);
    Ok(cache.write().unwrap().entry((kind, k)).or_insert(r).clone())
}

/// Rows of the constraint matrix: `u_i = sum_j c_ij u_j` for every hanging
/// DOF `i`; masters are never constrained.
#[derive(Debug, Clone, Default)]
pub struct ConstraintSet {
    pub rows: BTreeMap<usize, Vec<(usize, f64)>>,
}

impl ConstraintSet {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn is_constrained(&self, dof: usize) -> bool {
        self.rows.contains_key(&dof)
    }

    /// `dof` written in terms of unconstrained DOFs.
    pub fn expand(&self, dof: usize) -> Vec<(usize, f64)> {
        match self.rows.get(&dof) {
            Some(row) => row.clone(),
            None => vec![(dof, 1.0)],
        }
    }

    /// Overwrite constrained entries of a full DOF vector.
    pub fn distribute(&self, u: &mut [f64]) {
        for (&i, row) in &self.rows {
            u[i] = row.iter().map(|&(j, c)| c * u[j]).sum();
        }
    }
}

const DROP_TOL: f64 = 1e-12;

/// Constraint rows before chains through hanging masters are resolved.
pub fn raw_constraints(
    hanging: &[HangingEntity],
    dofs: &DofMap,
    element: &ReferenceElement,
) -> Result<BTreeMap<usize, Vec<(usize, f64)>>> {
    let restriction = edge_restriction_cached(element.kind, element.order)?;
    let mut rows = BTreeMap::new();
    for h in hanging {
        let r = &restriction[h.child];
        let coarse = &dofs.cell_dofs[h.coarse_cell];
        for (j, &dof) in dofs.entity_dofs[h.dim][h.entity].iter().enumerate() {
            let i = element.entity_dofs(h.dim, h.child_entity)[j];
            let row: Vec<(usize, f64)> = (0..r.ncols())
                .filter(|&b| r[(i, b)].abs() > DROP_TOL)
                .map(|b| (coarse[b], r[(i, b)]))
                .collect();
            rows.insert(dof, row);
        }
    }
    Ok(rows)
}

/// Constraint set of a forest mesh; masters that are themselves hanging are
/// substituted recursively.
pub fn build_constraints(hanging: &[HangingEntity], dofs: &DofMap, element: &ReferenceElement) -> Result<ConstraintSet> {
    let raw = raw_constraints(hanging, dofs, element)?;
    let mut resolved: BTreeMap<usize, Vec<(usize, f64)>> = BTreeMap::new();
    for &dof in raw.keys() {
        resolve(dof, &raw, &mut resolved, &mut Vec::new())?;
    }
    Ok(ConstraintSet { rows: resolved })
}

fn resolve(
    dof: usize,
    raw: &BTreeMap<usize, Vec<(usize, f64)>>,
    done: &mut BTreeMap<usize, Vec<(usize, f64)>>,
    stack: &mut Vec<usize>,
) -> Result<Vec<(usize, f64)>> {
    if let Some(r) = done.get(&dof) {
        return Ok(r.clone());
    }
    let Some(row) = raw.get(&dof) else {
        return Ok(vec![(dof, 1.0)]);
    };
    if stack.contains(&dof) {
        return Err(Error::Constraint(format!("cyclic constraint through DOF {dof}")));
    }
    stack.push(dof);
    let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
    for &(m, c) in row {
        for (mm, cc) in resolve(m, raw, done, stack)? {
            *acc.entry(mm).or_insert(0.0) += c * cc;
        }
    }
    stack.pop();
    let out: Vec<(usize, f64)> = acc.into_iter().filter(|(_, c)| c.abs() > DROP_TOL).collect();
    done.insert(dof, out.clone());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Boundary;

    fn setup(forest: &Forest) -> (ForestMesh, Topology) {
        let fm = forest.to_mesh().unwrap();
        let topo = Topology::build(&fm.mesh, Boundary::Domain(&|x| forest.contains_point(x))).unwrap();
        (fm, topo)
    }

    #[test]
    fn refine_one_of_four() {
        let mut f = Forest::unit(&[2, 2]).unwrap();
        let first = f.leaves()[0];
        f.refine(&[first]).unwrap();
        assert_eq!(f.n_leaves(), 7);
        let (fm, topo) = setup(&f);
        assert!(fm.mesh.is_oriented());
        let h = find_hanging(&f, &fm, &topo).unwrap();
        assert_eq!(h.len(), 4);
        assert!(h.iter().all(|e| e.dim == 1 && e.container_dim == 1));
        // boundary: 8 coarse-level boundary segments split into 4 fine + 6 coarse
        let nb = topo.entities[1].iter().filter(|e| e.boundary).count();
        assert_eq!(nb, 10);
    }

    #[test]
    fn balance_forces_neighbor_refinement() {
        let mut f = Forest::unit(&[2, 2]).unwrap();
        let first = f.leaves()[0];
        f.refine(&[first]).unwrap();
        // refine the child touching the cell center
        let inner = CellKey { level: 1, coords: [1, 1, 0] };
        f.refine(&[inner]).unwrap();
        assert!(f.is_balanced());
        assert_eq!(f.n_leaves(), 3 + 4 + 3 * 4);
    }

    #[test]
    fn uniform_has_no_hanging() {
        let mut f = Forest::unit(&[2, 2, 2]).unwrap();
        f.refine_all();
        let (fm, topo) = setup(&f);
        assert!(find_hanging(&f, &fm, &topo).unwrap().is_empty());
    }

    #[test]
    fn subcell_index_example() {
        // coarse cell on the left, refined cell on the right: the lower half
        // of the shared edge is an entity of child s = 1 of the coarse cell
        let mut f = Forest::unit(&[2, 1]).unwrap();
        f.refine(&[CellKey { level: 0, coords: [1, 0, 0] }]).unwrap();
        let (fm, topo) = setup(&f);
        let h = find_hanging(&f, &fm, &topo).unwrap();
        let mut s: Vec<usize> = h.iter().map(|e| e.child).collect();
        s.sort();
        assert_eq!(s, vec![1, 3]);
        assert!(h.iter().all(|e| e.child_entity == 2));
    }

    #[test]
    fn lagrange_patch() {
        let r = LagrangeRestriction::new(&[1]);
        assert_eq!(r.r.nrows(), 3);
        assert!((r.r[(1, 0)] - 0.5).abs() < 1e-15 && (r.r[(1, 1)] - 0.5).abs() < 1e-15);
        for row in 0..3 {
            assert!((r.r.row(row).sum() - 1.0).abs() < 1e-14);
        }
        let r = LagrangeRestriction::new(&[2, 1, 0]);
        assert_eq!(r.r.nrows(), 5 * 3);
        for s in 0..8 {
            let m = r.child_matrix(s);
            let nodes = poly::tensor_lagrange_nodes(&[2, 1, 0]);
            let basis = poly::tensor_lagrange(&[2, 1, 0]);
            for (i, x) in nodes.iter().enumerate() {
                let xc = [0, 1, 2].map(|a| (x[a] + ((s >> a) & 1) as f64) / 2.0);
                for (j, t) in basis.terms.iter().enumerate() {
                    assert!((m[(i, j)] - t.eval(&xc)).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn edge_restriction_k1_half_weights() {
        let e = ReferenceElement::get(CellKind::QUAD, 1).unwrap();
        let r = edge_restriction(&e).unwrap();
        // child 0 bottom edge is half of the coarse bottom edge
        assert!((r[0][(0, 0)] - 0.5).abs() < 1e-12);
        for b in 1..4 {
            assert!(r[0][(0, b)].abs() < 1e-12);
        }
    }
}
