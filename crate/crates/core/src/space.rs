//! Global curl-conforming spaces on conforming meshes and on forests.

use std::sync::Arc;

use crate::amr::{build_constraints, find_hanging, CellKey, ConstraintSet, Forest, HangingEntity};
use crate::element::ReferenceElement;
use crate::error::Result;
use crate::mesh::{Boundary, DofMap, Mesh, Topology};
use crate::vec3::{self, Vec3};

#[derive(Debug, Clone)]
pub struct FeSpace {
    pub element: Arc<ReferenceElement>,
    pub mesh: Mesh,
    pub topology: Topology,
    pub dofs: DofMap,
    pub constraints: ConstraintSet,
    pub hanging: Vec<HangingEntity>,
    /// Forest leaf of each cell, for spaces built on a forest.
    pub leaves: Option<Vec<CellKey>>,
}

impl FeSpace {
    /// Space on a conforming mesh; simplex meshes are oriented first.
    /// With `dirichlet`, DOFs on boundary edges and faces are fixed.
    pub fn conforming(mesh: &Mesh, k: usize, dirichlet: bool) -> Result<Self> {
        let mesh = mesh.oriented()?;
        let element = ReferenceElement::get(mesh.kind, k)?;
        let topology = Topology::build(&mesh, Boundary::Incidence)?;
        let dofs = DofMap::build(&mesh, &topology, &element, dirichlet)?;
        Ok(FeSpace { element, mesh, topology, dofs, constraints: ConstraintSet::default(), hanging: Vec::new(), leaves: None })
    }

    /// Space on the leaves of a balanced forest with hanging-DOF constraints.
    /// Constrained DOFs on the boundary are left to their constraints.
    pub fn on_forest(forest: &Forest, k: usize, dirichlet: bool) -> Result<Self> {
        let fm = forest.to_mesh()?;
        let element = ReferenceElement::get(fm.mesh.kind, k)?;
        let inside = |x: &Vec3| forest.contains_point(x);
        let topology = Topology::build(&fm.mesh, Boundary::Domain(&inside))?;
        let mut dofs = DofMap::build(&fm.mesh, &topology, &element, dirichlet)?;
        let hanging = find_hanging(forest, &fm, &topology)?;
        let constraints = build_constraints(&hanging, &dofs, &element)?;
        for &i in constraints.rows.keys() {
            dofs.dirichlet[i] = false;
        }
        Ok(FeSpace { element, mesh: fm.mesh, topology, dofs, constraints, hanging, leaves: Some(fm.leaves) })
    }

    pub fn n_dofs(&self) -> usize {
        self.dofs.n_dofs
    }

    pub fn n_cells(&self) -> usize {
        self.mesh.n_cells()
    }

    pub fn order(&self) -> usize {
        self.element.order
    }

    pub fn is_dirichlet(&self, dof: usize) -> bool {
        self.dofs.dirichlet[dof]
    }

    /// Neither Dirichlet nor constrained.
    pub fn is_free(&self, dof: usize) -> bool {
        !self.dofs.dirichlet[dof] && !self.constraints.is_constrained(dof)
    }

    pub fn n_free(&self) -> usize {
        (0..self.n_dofs()).filter(|&i| self.is_free(i)).count()
    }

    /// Physical moments of `u` on cell `c`, in local DOF order.
    pub fn cell_moments(&self, c: usize, u: &dyn Fn(&Vec3) -> Vec3) -> Vec<f64> {
        let map = &self.mesh.maps[c];
        let pulled = map.pull_field(u);
        self.element.apply_moments(&pulled)
    }

    /// Local coefficients of a full DOF vector on cell `c`.
    pub fn local(&self, c: usize, u: &[f64]) -> Vec<f64> {
        self.dofs.cell_dofs[c].iter().map(|&g| u[g]).collect()
    }

    /// Physical value and curl at reference point `xh` of cell `c`.
    pub fn eval(&self, c: usize, u: &[f64], xh: &Vec3) -> (Vec3, Vec3) {
        let (v, curl) = self.element.evaluate(&self.local(c, u), xh);
        let map = &self.mesh.maps[c];
        (map.push_value(&v), map.push_curl(&curl))
    }

    /// Cell containing a physical point, with its reference coordinates.
    pub fn locate(&self, x: &Vec3) -> Option<(usize, Vec3)> {
        (0..self.n_cells()).find_map(|c| {
            let xh = self.mesh.maps[c].inverse_point(x);
            self.mesh.kind.contains(&xh, 1e-12).then_some((c, xh))
        })
    }

    /// Physical value at a physical point.
    pub fn eval_at(&self, u: &[f64], x: &Vec3) -> Option<(Vec3, Vec3)> {
        self.locate(x).map(|(c, xh)| self.eval(c, u, &xh))
    }
}

/// A full DOF vector (free, Dirichlet and constrained entries) bound to a
/// space by the caller.
#[derive(Debug, Clone, PartialEq)]
pub struct FeFunction {
    pub values: Vec<f64>,
}

impl FeFunction {
    pub fn zeros(space: &FeSpace) -> Self {
        FeFunction { values: vec![0.0; space.n_dofs()] }
    }

    pub fn eval(&self, space: &FeSpace, c: usize, xh: &Vec3) -> (Vec3, Vec3) {
        space.eval(c, &self.values, xh)
    }

    /// Largest constraint-row residual; zero up to rounding for a valid
    /// function on a forest.
    pub fn constraint_residual(&self, space: &FeSpace) -> f64 {
        space
            .constraints
            .rows
            .iter()
            .map(|(&i, row)| (self.values[i] - row.iter().map(|&(j, c)| c * self.values[j]).sum::<f64>()).abs())
            .fold(0.0, f64::max)
    }
}

/// Largest tangential jump of `u` across interior facets, sampled at `n`
/// points per facet direction. On forests, fine facets are compared with the
/// coarse cell on the other side.
pub fn max_tangential_jump(space: &FeSpace, u: &[f64], n: usize) -> f64 {
    let d = space.mesh.dim();
    let mut worst: f64 = 0.0;
    for ent in &space.topology.entities[d - 1] {
        let xs: Vec<Vec3> = ent.vertices.iter().map(|&v| space.mesh.vertices[v]).collect();
        let samples = facet_samples(&xs, space.mesh.kind.is_cube(), d, n);
        let (c0, _) = ent.cells[0];
        let normal = facet_normal(&xs, d);
        for x in samples {
            let own = space.mesh.maps[c0].inverse_point(&x);
            let (v0, _) = space.eval(c0, u, &own);
            for c1 in neighbors_across(space, c0, &x, &normal) {
                let (v1, _) = space.eval(c1, u, &space.mesh.maps[c1].inverse_point(&x));
                let jump = vec3::sub(&v0, &v1);
                let t = vec3::cross(&normal, &jump);
                worst = worst.max(vec3::norm(&t));
            }
        }
    }
    worst
}

fn facet_normal(xs: &[Vec3], d: usize) -> Vec3 {
    if d == 2 {
        let t = vec3::sub(&xs[1], &xs[0]);
        vec3::normalize(&[-t[1], t[0], 0.0])
    } else {
        vec3::normalize(&vec3::cross(&vec3::sub(&xs[1], &xs[0]), &vec3::sub(&xs[2], &xs[0])))
    }
}

fn facet_samples(xs: &[Vec3], cube: bool, d: usize, n: usize) -> Vec<Vec3> {
    let mut out = Vec::new();
    let lerp = |t: f64| (t + 0.5) / n as f64;
    if d == 2 {
        for i in 0..n {
            out.push(vec3::add(&xs[0], &vec3::scale(&vec3::sub(&xs[1], &xs[0]), lerp(i as f64))));
        }
        return out;
    }
    let t0 = vec3::sub(&xs[1], &xs[0]);
    let t1 = vec3::sub(&xs[2], &xs[0]);
    for i in 0..n {
        for j in 0..n {
            let (s, t) = (lerp(i as f64), lerp(j as f64));
            if !cube && s + t >= 1.0 {
                continue;
            }
            out.push(vec3::add(&xs[0], &vec3::add(&vec3::scale(&t0, s), &vec3::scale(&t1, t))));
        }
    }
    out
}

fn neighbors_across(space: &FeSpace, c0: usize, x: &Vec3, normal: &Vec3) -> Vec<usize> {
    let side0 = vec3::dot(&vec3::sub(&space.mesh.centroid(c0), x), normal).signum();
    (0..space.n_cells())
        .filter(|&c| c != c0)
        .filter(|&c| {
            let xh = space.mesh.maps[c].inverse_point(x);
            space.mesh.kind.contains(&xh, 1e-10)
                && vec3::dot(&vec3::sub(&space.mesh.centroid(c), x), normal).signum() != side0
        })
        .collect()
}
