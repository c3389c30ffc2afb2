//! Reference Nédélec elements of the first kind.
//!
//! An element is built in three steps: a pre-basis spanning the local space
//! (tensor Lagrange polynomials per component on cubes, monomials of
//! `[P_{k-1}]^d` plus the `S_k` spanning set on simplices), a list of moments
//! (edge, face and interior integrals against test polynomials), and the change
//! of basis `Q = C^{-T}` with `C_ab = sigma_a(pre-basis_b)`. The resulting shape
//! functions satisfy `sigma_a(phi_b) = delta_ab`.
//!
//! Moment conventions:
//! - edge test polynomials live on the arc-length parameter `s in [0,1]`
//!   running from the first to the second vertex of the oriented edge;
//! - face parameters `(s, t)` follow the oriented tuple, `x = v0 + s t0 + t t1`
//!   with `t0 = v1 - v0`, `t1 = v2 - v0`;
//! - the cube face moment uses the normal `t0 x t1 / |t0 x t1|` so that both
//!   cells sharing a face evaluate the same functional;
//! - simplex face moments are scaled by the inverse face measure.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::{Arc, OnceLock, RwLock};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::poly::{self, TensorComponent, VectorBasis, VectorPolynomial};
use crate::quadrature::{rule_for, Domain};
use crate::topology::{self, CellKind, EntityRef, Family};
use crate::vec3::{self, Vec3};

/// A degree of freedom: `sigma(u) = sum_q u(x_q) . w_q`.
#[derive(Debug, Clone)]
pub struct Moment {
    pub owner: EntityRef,
    /// Index of the test function inside the owner entity.
    pub local_index: usize,
    pub points: Vec<Vec3>,
    pub weights: Vec<Vec3>,
}

impl Moment {
    pub fn apply(&self, f: &dyn Fn(&Vec3) -> Vec3) -> f64 {
        self.points.iter().zip(&self.weights).map(|(x, w)| vec3::dot(&f(x), w)).sum()
    }

    pub fn apply_poly(&self, p: &VectorPolynomial) -> f64 {
        self.apply(&|x| p.eval(x))
    }
}

/// Ordered moments plus the entity -> DOF lookup.
#[derive(Debug, Clone)]
pub struct MomentSet {
    pub moments: Vec<Moment>,
    /// `entity_dofs[dim][entity]` lists the DOFs owned by that entity.
    entity_dofs: Vec<Vec<Vec<usize>>>,
}

impl MomentSet {
    pub fn len(&self) -> usize {
        self.moments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moments.is_empty()
    }

    pub fn entity_dofs(&self, dim: usize, entity: usize) -> &[usize] {
        &self.entity_dofs[dim][entity]
    }

    /// Number of DOFs owned by each entity of dimension `dim`.
    pub fn dofs_per_entity(&self, dim: usize) -> usize {
        self.entity_dofs[dim].first().map(|v| v.len()).unwrap_or(0)
    }

    pub fn count_by_dim(&self, dim: usize) -> usize {
        self.entity_dofs[dim].iter().map(|v| v.len()).sum()
    }
}

/// Per-component anisotropic orders of the cube pre-basis: component `c`
/// has order `k - 1` along axis `c` and `k` along the others.
pub fn cube_component_orders(dim: usize, k: usize) -> Vec<Vec<usize>> {
    (0..dim)
        .map(|c| (0..dim).map(|a| if a == c { k - 1 } else { k }).collect())
        .collect()
}

/// Pre-basis spanning the local space `V_k` of the reference cell.
pub fn build_prebasis(kind: CellKind, k: usize) -> Result<VectorBasis> {
    if k < 1 {
        return Err(Error::InvalidArgument(format!("element order must be >= 1, got {k}")));
    }
    let d = kind.dim;
    let mut terms = Vec::new();
    match kind.family {
        Family::Cube => {
            for (c, orders) in cube_component_orders(d, k).iter().enumerate() {
                for p in poly::tensor_lagrange(orders).terms {
                    terms.push(VectorPolynomial::unit(c, p));
                }
            }
        }
        Family::Simplex => {
            let pk = poly::monomial_p(k - 1, d);
            for c in 0..d {
                for p in &pk.terms {
                    terms.push(VectorPolynomial::unit(c, p.clone()));
                }
            }
            terms.extend(poly::sk_basis(k, d)?.terms);
        }
    }
    Ok(VectorBasis { dim: d, terms })
}

/// Expected local dimension for the supported cells.
pub fn expected_dofs(kind: CellKind, k: usize) -> usize {
    match (kind.family, kind.dim) {
        (Family::Cube, 2) => 2 * k * (k + 1),
        (Family::Cube, _) => 3 * k * (k + 1) * (k + 1),
        (Family::Simplex, 2) => k * (k + 2),
        (Family::Simplex, _) => k * (k * k + 5 * k + 6) / 2,
    }
}

fn scalar_test_basis(family: Family, orders: &[usize]) -> Vec<poly::Polynomial> {
    match family {
        Family::Cube => poly::tensor_lagrange(orders).terms,
        Family::Simplex => poly::monomial_p(orders[0], orders.len()).terms,
    }
}

/// Moments of the reference element, numbered entity by entity (edges, then
/// faces, then the cell) and by test function inside each entity.
pub fn build_moments(kind: CellKind, k: usize) -> Result<MomentSet> {
    if k < 1 {
        return Err(Error::InvalidArgument(format!("element order must be >= 1, got {k}")));
    }
    let d = kind.dim;
    let quad_degree = 2 * k + 2;
    let mut moments = Vec::new();
    let mut entity_dofs: Vec<Vec<Vec<usize>>> = vec![Vec::new(); d + 1];
    entity_dofs[0] = vec![Vec::new(); kind.num_vertices()];

    // edges
    let line = rule_for(Domain::Interval, quad_degree)?;
    let edge_test = poly::lagrange_1d(k - 1);
    for edge in topology::entities(kind, 1)? {
        let v0 = kind.vertex(edge.vertices[0]);
        let t = topology::edge_vector(kind, &edge);
        let points: Vec<Vec3> = line.points.iter().map(|s| vec3::add(&v0, &vec3::scale(&t, s[0]))).collect();
        let mut owned = Vec::new();
        for (i, q) in edge_test.polys.iter().enumerate() {
            let weights = line
                .points
                .iter()
                .zip(&line.weights)
                .map(|(s, w)| vec3::scale(&t, w * q.eval(s)))
                .collect();
            owned.push(moments.len());
            moments.push(Moment { owner: edge.clone(), local_index: i, points: points.clone(), weights });
        }
        entity_dofs[1].push(owned);
    }

    // faces of 3D cells
    if d == 3 {
        let face_kind = CellKind { family: kind.family, dim: 2 };
        let face_rule = rule_for(Domain::Cell(face_kind), quad_degree)?;
        for face in topology::entities(kind, 2)? {
            let frame = topology::face_frame(kind, &face)?;
            let [t0, t1] = frame.tangents;
            let points: Vec<Vec3> = face_rule
                .points
                .iter()
                .map(|p| {
                    let x = vec3::add(&frame.origin, &vec3::scale(&t0, p[0]));
                    vec3::add(&x, &vec3::scale(&t1, p[1]))
                })
                .collect();
            let mut owned = Vec::new();
            let mut push = |dir: Vec3, q: &poly::Polynomial, scale: f64, moments: &mut Vec<Moment>| {
                let weights = face_rule
                    .points
                    .iter()
                    .zip(&face_rule.weights)
                    .map(|(p, w)| vec3::scale(&dir, scale * w * q.eval(p)))
                    .collect();
                let local_index = owned.len();
                owned.push(moments.len());
                moments.push(Moment { owner: face.clone(), local_index, points: points.clone(), weights });
            };
            match kind.family {
                Family::Cube if k >= 2 => {
                    // (u x n) . q = u . (n x q), q = q0 t0 + q1 t1
                    let n = frame.oriented_normal();
                    let jac = vec3::norm(&vec3::cross(&t0, &t1));
                    let blocks = [(vec3::cross(&n, &t0), [k - 2, k - 1]), (vec3::cross(&n, &t1), [k - 1, k - 2])];
                    for (dir, orders) in blocks {
                        for q in scalar_test_basis(Family::Cube, &orders) {
                            push(dir, &q, jac, &mut moments);
                        }
                    }
                }
                Family::Simplex if k >= 2 => {
                    // 1/|F| * integral over F = 2 * integral over the parameter triangle
                    let test = poly::monomial_p(k - 2, 2).terms;
                    for dir in [t0, t1] {
                        for q in &test {
                            push(dir, q, 2.0, &mut moments);
                        }
                    }
                }
                _ => {}
            }
            entity_dofs[2].push(owned);
        }
    }

    // cell interior
    let cell = topology::entities(kind, d)?.remove(0);
    let cell_rule = rule_for(Domain::Cell(kind), quad_degree)?;
    let mut owned = Vec::new();
    let mut interior_tests: Vec<(usize, poly::Polynomial)> = Vec::new();
    match kind.family {
        Family::Cube if k >= 2 => {
            for c in 0..d {
                let orders: Vec<usize> = (0..d).map(|a| if a == c { k - 1 } else { k - 2 }).collect();
                for q in scalar_test_basis(Family::Cube, &orders) {
                    interior_tests.push((c, q));
                }
            }
        }
        Family::Simplex if k >= d => {
            let test = poly::monomial_p(k - d, d).terms;
            for c in 0..d {
                for q in &test {
                    interior_tests.push((c, q.clone()));
                }
            }
        }
        _ => {}
    }
    for (i, (c, q)) in interior_tests.iter().enumerate() {
        let mut e = [0.0; 3];
        e[*c] = 1.0;
        let weights = cell_rule
            .points
            .iter()
            .zip(&cell_rule.weights)
            .map(|(x, w)| vec3::scale(&e, w * q.eval(x)))
            .collect();
        owned.push(moments.len());
        moments.push(Moment { owner: cell.clone(), local_index: i, points: cell_rule.points.clone(), weights });
    }
    entity_dofs[d] = vec![owned];
    if d == 2 {
        // the 2D cell is also the only dim-2 entity
    }

    Ok(MomentSet { moments, entity_dofs })
}

/// Pre-basis evaluator: factored tensor Lagrange on cubes, monomials on
/// simplices.
#[derive(Debug, Clone)]
pub enum PrebasisForm {
    Monomial(VectorBasis),
    Tensor(Vec<TensorComponent>),
}

impl PrebasisForm {
    pub fn new(kind: CellKind, k: usize) -> Result<Self> {
        Ok(match kind.family {
            Family::Cube => PrebasisForm::Tensor(
                cube_component_orders(kind.dim, k)
                    .iter()
                    .enumerate()
                    .map(|(c, o)| TensorComponent::new(c, o))
                    .collect(),
            ),
            Family::Simplex => PrebasisForm::Monomial(build_prebasis(kind, k)?),
        })
    }

    /// Values and curls of the pre-basis, in `build_prebasis` order.
    pub fn eval(&self, x: &Vec3) -> (Vec<Vec3>, Vec<Vec3>) {
        match self {
            PrebasisForm::Monomial(b) => b.eval(x),
            PrebasisForm::Tensor(comps) => {
                let mut v = Vec::new();
                let mut c = Vec::new();
                for t in comps {
                    t.eval_into(x, &mut v, &mut c);
                }
                (v, c)
            }
        }
    }
}

/// `C_ab = sigma_a(phi_b)`.
pub fn moment_matrix(prebasis: &PrebasisForm, moments: &MomentSet) -> DMatrix<f64> {
    let n = moments.len();
    let m = prebasis.eval(&[0.0; 3]).0.len();
    let mut c = DMatrix::zeros(n, m);
    for (a, mom) in moments.moments.iter().enumerate() {
        for (x, w) in mom.points.iter().zip(&mom.weights) {
            let (vals, _) = prebasis.eval(x);
            for (b, v) in vals.iter().enumerate() {
                c[(a, b)] += vec3::dot(v, w);
            }
        }
    }
    c
}

/// Shape-function values and curls at a set of points; entry `q * n + a`.
#[derive(Debug, Clone)]
pub struct Tabulation {
    pub n_shapes: usize,
    pub values: Vec<Vec3>,
    pub curls: Vec<Vec3>,
}

impl Tabulation {
    pub fn value(&self, q: usize, a: usize) -> &Vec3 {
        &self.values[q * self.n_shapes + a]
    }

    pub fn curl(&self, q: usize, a: usize) -> &Vec3 {
        &self.curls[q * self.n_shapes + a]
    }
}

#[derive(Debug)]
pub struct ReferenceElement {
    pub kind: CellKind,
    pub order: usize,
    pub prebasis: VectorBasis,
    pub moments: MomentSet,
    /// `C_ab = sigma_a(pre-basis_b)`.
    pub moment_matrix: DMatrix<f64>,
    /// `Q = C^{-T}`; shape `a` is `sum_b Q_ab pre-basis_b`.
    pub change_of_basis: DMatrix<f64>,
    pub shapes: Vec<VectorPolynomial>,
    form: PrebasisForm,
    /// 1-norm condition estimate of `C`.
    pub condition: f64,
}

const MAX_CONDITION: f64 = 1e12;

impl ReferenceElement {
    pub fn new(kind: CellKind, k: usize) -> Result<Self> {
        let prebasis = build_prebasis(kind, k)?;
        let moments = build_moments(kind, k)?;
        let name = format!("ND{k} on {kind}");
        if prebasis.len() != moments.len() {
            return Err(Error::ElementConstruction {
                element: name,
                reason: format!("{} pre-basis functions but {} moments", prebasis.len(), moments.len()),
            });
        }
        let form = PrebasisForm::new(kind, k)?;
        let c = moment_matrix(&form, &moments);
        let c_inv = c.clone().lu().try_inverse().ok_or_else(|| Error::ElementConstruction {
            element: name.clone(),
            reason: "singular moment matrix".into(),
        })?;
        let condition = one_norm(&c) * one_norm(&c_inv);
        if !condition.is_finite() || condition > MAX_CONDITION {
            return Err(Error::ElementConstruction {
                element: name,
                reason: format!("moment matrix condition estimate {condition:e} exceeds {MAX_CONDITION:e}"),
            });
        }
        let q = c_inv.transpose();
        let n = prebasis.len();
        let shapes: Vec<VectorPolynomial> = (0..n)
            .map(|a| {
                (0..n).fold(VectorPolynomial::default(), |acc, b| acc.axpy(q[(a, b)], &prebasis.terms[b]))
            })
            .collect();
        Ok(ReferenceElement {
            kind,
            order: k,
            prebasis,
            moments,
            moment_matrix: c,
            change_of_basis: q,
            shapes,
            form,
            condition,
        })
    }

    /// Shared instance for `(kind, k)`.
    pub fn get(kind: CellKind, k: usize) -> Result<Arc<ReferenceElement>> {
        static REGISTRY: OnceLock<RwLock<HashMap<(CellKind, usize), Arc<ReferenceElement>>>> = OnceLock::new();
        let reg = REGISTRY.get_or_init(|| RwLock::new(HashMap::new()));
        if let Some(e) = reg.read().unwrap().get(&(kind, k)) {
            return Ok(e.clone());
        }
        let e = Arc::new(ReferenceElement::new(kind, k)?);
        Ok(reg.write().unwrap().entry((kind, k)).or_insert(e).clone())
    }

    pub fn n_dofs(&self) -> usize {
        self.shapes.len()
    }

    pub fn dim(&self) -> usize {
        self.kind.dim
    }

    /// Values and curls of every shape function at `x`.
    pub fn eval_shapes(&self, x: &Vec3) -> (Vec<Vec3>, Vec<Vec3>) {
        let (pv, pc) = self.form.eval(x);
        let n = pv.len();
        let q = &self.change_of_basis;
        let mut values = vec![[0.0; 3]; n];
        let mut curls = vec![[0.0; 3]; n];
        for b in 0..n {
            for a in 0..n {
                let s = q[(a, b)];
                if s != 0.0 {
                    vec3::axpy(&mut values[a], s, &pv[b]);
                    vec3::axpy(&mut curls[a], s, &pc[b]);
                }
            }
        }
        (values, curls)
    }

    pub fn tabulate(&self, points: &[Vec3]) -> Tabulation {
        let n = self.n_dofs();
        let mut values = Vec::with_capacity(n * points.len());
        let mut curls = Vec::with_capacity(n * points.len());
        for x in points {
            let (v, c) = self.eval_shapes(x);
            values.extend(v);
            curls.extend(c);
        }
        Tabulation { n_shapes: n, values, curls }
    }

    /// Apply every moment to a reference-cell field.
    pub fn apply_moments(&self, f: &dyn Fn(&Vec3) -> Vec3) -> Vec<f64> {
        // moments of one entity share their points; cache field values per entity
        let mut cache: HashMap<(usize, usize), Vec<Vec3>> = HashMap::new();
        self.moments
            .moments
            .iter()
            .map(|m| {
                let vals = cache
                    .entry((m.owner.dim, m.owner.local_index))
                    .or_insert_with(|| m.points.iter().map(f).collect());
                vals.iter().zip(&m.weights).map(|(v, w)| vec3::dot(v, w)).sum()
            })
            .collect()
    }

    /// Field `sum_a dofs_a phi_a` at `x` with its curl.
    pub fn evaluate(&self, dofs: &[f64], x: &Vec3) -> (Vec3, Vec3) {
        let (vals, curls) = self.eval_shapes(x);
        let mut v = [0.0; 3];
        let mut c = [0.0; 3];
        for a in 0..self.n_dofs() {
            vec3::axpy(&mut v, dofs[a], &vals[a]);
            vec3::axpy(&mut c, dofs[a], &curls[a]);
        }
        (v, c)
    }

    /// `(dim, entity, local index)` owning DOF `a`.
    pub fn dof_owner(&self, a: usize) -> (usize, usize, usize) {
        let m = &self.moments.moments[a];
        (m.owner.dim, m.owner.local_index, m.local_index)
    }

    pub fn entity_dofs(&self, dim: usize, entity: usize) -> &[usize] {
        self.moments.entity_dofs(dim, entity)
    }

    /// CSV dump of every shape function on a lattice with `n` intervals per
    /// axis: `shape,x,y,z,v1,v2,v3,curl1,curl2,curl3`.
    pub fn dump_csv(&self, n: usize) -> String {
        let mut out = String::from("shape,x,y,z,v1,v2,v3,curl1,curl2,curl3\n");
        let d = self.kind.dim;
        let nz = if d == 3 { n } else { 0 };
        for iz in 0..=nz {
            for iy in 0..=n {
                for ix in 0..=n {
                    let x = [ix as f64 / n as f64, iy as f64 / n as f64, if d == 3 { iz as f64 / n as f64 } else { 0.0 }];
                    if !self.kind.contains(&x, 1e-12) {
                        continue;
                    }
                    let (v, c) = self.eval_shapes(&x);
                    for a in 0..self.n_dofs() {
                        let _ = writeln!(
                            out,
                            "{a},{},{},{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
                            x[0], x[1], x[2], v[a][0], v[a][1], v[a][2], c[a][0], c[a][1], c[a][2]
                        );
                    }
                }
            }
        }
        out
    }
}

fn one_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter().map(|c| c.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}
