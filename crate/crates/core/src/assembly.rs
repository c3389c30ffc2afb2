//! Assembly of the curl-curl problem `curl(alpha curl u) + beta u = f` with
//! strong Dirichlet data and hanging-DOF constraints, plus a Jacobi
//! preconditioned conjugate gradient solver.
//!
//! Constraints are applied while inserting element contributions: a
//! constrained local DOF is replaced by its row of masters. Dirichlet columns
//! move to the right-hand side.

use std::collections::HashMap;
use std::io::Write;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::quadrature::{rule_for, Domain, QuadratureRule};
use crate::space::{FeFunction, FeSpace};
use crate::vec3::{self, Vec3};

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    /// Sums duplicate entries.
    pub fn from_triplets(n_rows: usize, n_cols: usize, mut t: Vec<(usize, usize, f64)>) -> Self {
        t.sort_unstable_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0; n_rows + 1];
        let mut col_idx = Vec::with_capacity(t.len());
        let mut values: Vec<f64> = Vec::with_capacity(t.len());
        let mut last = None;
        for (i, j, v) in t {
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n_rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix { n_rows, n_cols, row_ptr, col_idx, values }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |p| (self.col_idx[p], self.values[p]))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map(|(_, v)| v).unwrap_or(0.0)
    }

    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n_rows) {
            *yi = self.row(i).map(|(j, v)| v * x[j]).sum();
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n_rows).map(|i| self.get(i, i)).collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n_rows, self.n_cols);
        for i in 0..self.n_rows {
            for (j, v) in self.row(i) {
                m[(i, j)] += v;
            }
        }
        m
    }

    /// `max |A_ij - A_ji|`.
    pub fn symmetry_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n_rows {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Matrix Market coordinate format.
    pub fn write_matrix_market(&self, out: &mut dyn Write) -> Result<()> {
        writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(out, "{} {} {}", self.n_rows, self.n_cols, self.nnz())?;
        for i in 0..self.n_rows {
            for (j, v) in self.row(i) {
                writeln!(out, "{} {} {:.17e}", i + 1, j + 1, v)?;
            }
        }
        Ok(())
    }
}

pub fn write_vector_market(v: &[f64], out: &mut dyn Write) -> Result<()> {
    writeln!(out, "%%MatrixMarket matrix array real general")?;
    writeln!(out, "{} 1", v.len())?;
    for x in v {
        writeln!(out, "{x:.17e}")?;
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct SolveStats {
    pub iterations: usize,
    pub residual: f64,
    pub history: Vec<f64>,
}

/// Jacobi-preconditioned CG; stops when `|r| <= tol |b|`.
pub fn solve_cg(a: &CsrMatrix, b: &[f64], tol: f64, max_iter: usize) -> Result<(Vec<f64>, SolveStats)> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if bnorm == 0.0 {
        return Ok((x, SolveStats { iterations: 0, residual: 0.0, history: vec![0.0] }));
    }
    let inv_diag: Vec<f64> = a.diagonal().iter().map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 }).collect();
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut history = vec![1.0];
    for it in 1..=max_iter {
        a.mul_vec(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap <= 0.0 {
            return Err(Error::NoConvergence { iterations: it, residual: *history.last().unwrap(), history });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rel = r.iter().map(|v| v * v).sum::<f64>().sqrt() / bnorm;
        history.push(rel);
        if rel <= tol {
            return Ok((x, SolveStats { iterations: it, residual: rel, history }));
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::NoConvergence { iterations: max_iter, residual: *history.last().unwrap(), history })
}

/// Dense Cholesky solve, for small reference computations.
pub fn solve_dense(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let chol = a
        .to_dense()
        .cholesky()
        .ok_or_else(|| Error::InvalidArgument("matrix is not symmetric positive definite".into()))?;
    Ok(chol.solve(&DVector::from_column_slice(b)).iter().copied().collect())
}

/// Material coefficients, constant per cell.
#[derive(Debug, Clone)]
pub enum Coefficients {
    Constant { alpha: f64, beta: f64 },
    PerCell(Vec<(f64, f64)>),
}

impl Coefficients {
    pub fn unit() -> Self {
        Coefficients::Constant { alpha: 1.0, beta: 1.0 }
    }

    fn at(&self, c: usize) -> (f64, f64) {
        match self {
            Coefficients::Constant { alpha, beta } => (*alpha, *beta),
            Coefficients::PerCell(v) => v[c],
        }
    }

    fn validate(&self, n_cells: usize) -> Result<()> {
        let check = |a: f64, b: f64| {
            if a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!("alpha and beta must be positive, got {a}, {b}")))
            }
        };
        match self {
            Coefficients::Constant { alpha, beta } => check(*alpha, *beta),
            Coefficients::PerCell(v) => {
                if v.len() != n_cells {
                    return Err(Error::InvalidArgument(format!("{} coefficients for {n_cells} cells", v.len())));
                }
                v.iter().try_for_each(|&(a, b)| check(a, b))
            }
        }
    }
}

/// Reference quadrature for an element of order `k` with its shape tabulation.
pub struct CellQuadrature {
    pub rule: QuadratureRule,
    pub values: Vec<Vec<Vec3>>,
    pub curls: Vec<Vec<Vec3>>,
}

impl CellQuadrature {
    pub fn new(space: &FeSpace, degree: usize) -> Result<Self> {
        let rule = rule_for(Domain::Cell(space.mesh.kind), degree)?;
        let (values, curls) = rule.points.iter().map(|x| space.element.eval_shapes(x)).unzip();
        Ok(CellQuadrature { rule, values, curls })
    }
}

/// Mass and curl-curl element matrices of cell `c` (unit coefficients).
pub fn element_matrices(space: &FeSpace, quad: &CellQuadrature, c: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let map = &space.mesh.maps[c];
    let n = space.element.n_dofs();
    let mut m = DMatrix::zeros(n, n);
    let mut k = DMatrix::zeros(n, n);
    let jac = map.measure();
    for (q, w) in quad.rule.weights.iter().enumerate() {
        let v: Vec<Vec3> = quad.values[q].iter().map(|x| map.push_value(x)).collect();
        let cu: Vec<Vec3> = quad.curls[q].iter().map(|x| map.push_curl(x)).collect();
        let wq = w * jac;
        for a in 0..n {
            for b in a..n {
                m[(a, b)] += wq * vec3::dot(&v[a], &v[b]);
                k[(a, b)] += wq * vec3::dot(&cu[a], &cu[b]);
            }
        }
    }
    for a in 0..n {
        for b in 0..a {
            m[(a, b)] = m[(b, a)];
            k[(a, b)] = k[(b, a)];
        }
    }
    (m, k)
}

/// `int_K f . phi_a` on cell `c`.
pub fn element_rhs(space: &FeSpace, quad: &CellQuadrature, c: usize, f: &dyn Fn(&Vec3) -> Vec3) -> Vec<f64> {
    let map = &space.mesh.maps[c];
    let n = space.element.n_dofs();
    let mut out = vec![0.0; n];
    for (q, (x, w)) in quad.rule.points.iter().zip(&quad.rule.weights).enumerate() {
        let fx = f(&map.map_point(x));
        let wq = w * map.measure();
        for (a, o) in out.iter_mut().enumerate() {
            *o += wq * vec3::dot(&fx, &map.push_value(&quad.values[q][a]));
        }
    }
    out
}

/// DOF values of the Dirichlet data: physical moments of `g` on boundary
/// entities, zero elsewhere.
pub fn impose_dirichlet(space: &FeSpace, g: &dyn Fn(&Vec3) -> Vec3) -> Vec<f64> {
    let mut out = vec![0.0; space.n_dofs()];
    let mut done = vec![false; space.n_dofs()];
    for c in 0..space.n_cells() {
        let dofs = &space.dofs.cell_dofs[c];
        if !dofs.iter().any(|&i| space.is_dirichlet(i) && !done[i]) {
            continue;
        }
        let moments = space.cell_moments(c, g);
        for (a, &i) in dofs.iter().enumerate() {
            if space.is_dirichlet(i) && !done[i] {
                out[i] = moments[a];
                done[i] = true;
            }
        }
    }
    out
}

/// Linear system over the free DOFs.
#[derive(Debug, Clone)]
pub struct SparseSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// Global DOF of each free row.
    pub free: Vec<usize>,
    /// Free row of each global DOF.
    pub row_of: Vec<Option<usize>>,
    /// Dirichlet values, full length.
    pub dirichlet_values: Vec<f64>,
}

fn cache_key(space: &FeSpace, c: usize) -> [u64; 9] {
    let a = &space.mesh.maps[c].a;
    let mut k = [0u64; 9];
    for i in 0..3 {
        for j in 0..3 {
            k[3 * i + j] = a[i][j].to_bits();
        }
    }
    k
}

/// Assembles the constrained system with source `f` and Dirichlet data `g`
/// (zero when `None`).
pub fn assemble(
    space: &FeSpace,
    coeffs: &Coefficients,
    f: &dyn Fn(&Vec3) -> Vec3,
    g: Option<&dyn Fn(&Vec3) -> Vec3>,
) -> Result<SparseSystem> {
    coeffs.validate(space.n_cells())?;
    let n = space.n_dofs();
    let mut row_of = vec![None; n];
    let mut free = Vec::new();
    for (i, r) in row_of.iter_mut().enumerate() {
        if space.is_free(i) {
            *r = Some(free.len());
            free.push(i);
        }
    }
    let dirichlet_values = match g {
        Some(g) => impose_dirichlet(space, g),
        None => vec![0.0; n],
    };
    let quad = CellQuadrature::new(space, 2 * space.order() + 2)?;
    let mut cache: HashMap<[u64; 9], (DMatrix<f64>, DMatrix<f64>)> = HashMap::new();
    let mut triplets = Vec::new();
    let mut rhs = vec![0.0; free.len()];
    let nl = space.element.n_dofs();
    for c in 0..space.n_cells() {
        let (alpha, beta) = coeffs.at(c);
        let (m, k) = cache.entry(cache_key(space, c)).or_insert_with(|| element_matrices(space, &quad, c));
        let local = k.clone() * alpha + m.clone() * beta;
        let fe = element_rhs(space, &quad, c, f);
        let expanded: Vec<Vec<(usize, f64)>> =
            space.dofs.cell_dofs[c].iter().map(|&i| space.constraints.expand(i)).collect();
        for a in 0..nl {
            for &(p, cp) in &expanded[a] {
                let Some(rp) = row_of[p] else { continue };
                rhs[rp] += cp * fe[a];
                for b in 0..nl {
                    let v = local[(a, b)];
                    if v == 0.0 {
                        continue;
                    }
                    for &(q, cq) in &expanded[b] {
                        match row_of[q] {
                            Some(rq) => triplets.push((rp, rq, cp * cq * v)),
                            None => rhs[rp] -= cp * cq * v * dirichlet_values[q],
                        }
                    }
                }
            }
        }
    }
    let matrix = CsrMatrix::from_triplets(free.len(), free.len(), triplets);
    Ok(SparseSystem { matrix, rhs, free, row_of, dirichlet_values })
}

/// Full DOF vector from the free solution: Dirichlet values inserted and
/// hanging values recovered from their constraint rows.
pub fn finalize(space: &FeSpace, system: &SparseSystem, free_values: &[f64]) -> FeFunction {
    let mut values = system.dirichlet_values.clone();
    for (r, &i) in system.free.iter().enumerate() {
        values[i] = free_values[r];
    }
    space.constraints.distribute(&mut values);
    FeFunction { values }
}

/// Assemble, solve with PCG and finalize.
pub fn solve(
    space: &FeSpace,
    coeffs: &Coefficients,
    f: &dyn Fn(&Vec3) -> Vec3,
    g: Option<&dyn Fn(&Vec3) -> Vec3>,
    tol: f64,
) -> Result<(FeFunction, SolveStats)> {
    let system = assemble(space, coeffs, f, g)?;
    let max_iter = (500 * system.free.len()).max(10_000);
    let (x, stats) = solve_cg(&system.matrix, &system.rhs, tol, max_iter)?;
    Ok((finalize(space, &system, &x), stats))
}

/// Unconstrained operator over all DOFs, for checking constrained assembly
/// against `P^T A P`.
pub fn assemble_unconstrained(space: &FeSpace, coeffs: &Coefficients) -> Result<CsrMatrix> {
    coeffs.validate(space.n_cells())?;
    let quad = CellQuadrature::new(space, 2 * space.order() + 2)?;
    let mut triplets = Vec::new();
    for c in 0..space.n_cells() {
        let (alpha, beta) = coeffs.at(c);
        let (m, k) = element_matrices(space, &quad, c);
        let dofs = &space.dofs.cell_dofs[c];
        for a in 0..dofs.len() {
            for b in 0..dofs.len() {
                triplets.push((dofs[a], dofs[b], alpha * k[(a, b)] + beta * m[(a, b)]));
            }
        }
    }
    Ok(CsrMatrix::from_triplets(space.n_dofs(), space.n_dofs(), triplets))
}

/// Dense prolongation from the free DOFs of `system` to all DOFs (Dirichlet
/// columns dropped).
pub fn prolongation(space: &FeSpace, system: &SparseSystem) -> DMatrix<f64> {
    let mut p = DMatrix::zeros(space.n_dofs(), system.free.len());
    for i in 0..space.n_dofs() {
        for (j, c) in space.constraints.expand(i) {
            if let Some(r) = system.row_of[j] {
                p[(i, r)] += c;
            }
        }
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::structured_hex_mesh;

    #[test]
    fn csr_from_triplets() {
        let a = CsrMatrix::from_triplets(2, 2, vec![(1, 0, 1.0), (0, 0, 2.0), (1, 0, 0.5), (1, 1, 3.0)]);
        assert_eq!(a.row_ptr, vec![0, 1, 3]);
        assert_eq!(a.get(1, 0), 1.5);
        let mut y = vec![0.0; 2];
        a.mul_vec(&[1.0, 1.0], &mut y);
        assert_eq!(y, vec![2.0, 4.5]);
    }

    #[test]
    fn cg_identity_like() {
        let a = CsrMatrix::from_triplets(3, 3, (0..3).map(|i| (i, i, 2.0)).collect());
        let (x, s) = solve_cg(&a, &[2.0, 4.0, 6.0], 1e-12, 10).unwrap();
        assert!(s.iterations <= 2);
        assert!((x[2] - 3.0).abs() < 1e-12);
        let err = solve_cg(&CsrMatrix::from_triplets(2, 2, vec![(0, 0, 1.0), (1, 1, 1e-9), (0, 1, 0.5), (1, 0, 0.5)]), &[1.0, 1.0], 1e-30, 1);
        assert!(matches!(err, Err(Error::NoConvergence { .. })));
    }

    #[test]
    fn reference_quad_element_spd() {
        let mesh = structured_hex_mesh(&[1, 1], [0.0; 3], [1.0; 3]).unwrap();
        let space = FeSpace::conforming(&mesh, 1, false).unwrap();
        let quad = CellQuadrature::new(&space, 4).unwrap();
        let (m, k) = element_matrices(&space, &quad, 0);
        let a = m + k;
        assert_eq!(a.nrows(), 4);
        assert!((&a - a.transpose()).abs().max() < 1e-14);
        assert!(a.symmetric_eigenvalues().min() > 0.0);
    }

    #[test]
    fn element_scaling_2d() {
        // in 2D the mass matrix is scale invariant and the curl-curl block scales by h^-2
        let big = FeSpace::conforming(&structured_hex_mesh(&[1, 1], [0.0; 3], [1.0; 3]).unwrap(), 2, false).unwrap();
        let small = FeSpace::conforming(&structured_hex_mesh(&[1, 1], [0.0; 3], [0.25; 3]).unwrap(), 2, false).unwrap();
        let q = CellQuadrature::new(&big, 6).unwrap();
        let (m1, k1) = element_matrices(&big, &q, 0);
        let (m2, k2) = element_matrices(&small, &q, 0);
        assert!((&m1 - &m2).abs().max() < 1e-12);
        assert!((k1 * 16.0 - k2).abs().max() < 1e-9);
    }

    #[test]
    fn zero_data_zero_solution() {
        let mesh = structured_hex_mesh(&[3, 3], [0.0; 3], [1.0; 3]).unwrap();
        let space = FeSpace::conforming(&mesh, 2, true).unwrap();
        let (u, _) = solve(&space, &Coefficients::unit(), &|_| [0.0; 3], None, 1e-10).unwrap();
        assert!(u.values.iter().all(|&v| v == 0.0));
        let bad = assemble(&space, &Coefficients::Constant { alpha: 1.0, beta: 0.0 }, &|_| [0.0; 3], None);
        assert!(bad.is_err());
    }

    #[test]
    fn dirichlet_constant_field() {
        // k = 1 edge moments of the constant (1, 0) are the x extent of each edge
        let mesh = structured_hex_mesh(&[2, 2], [0.0; 3], [1.0; 3]).unwrap();
        let space = FeSpace::conforming(&mesh, 1, true).unwrap();
        let g = impose_dirichlet(&space, &|_| [1.0, 0.0, 0.0]);
        for (e, ent) in space.topology.entities[1].iter().enumerate() {
            let dof = space.dofs.entity_dofs[1][e][0];
            let t = vec3::sub(&space.mesh.vertices[ent.vertices[1]], &space.mesh.vertices[ent.vertices[0]]);
            let expect = if ent.boundary { t[0] } else { 0.0 };
            assert!((g[dof] - expect).abs() < 1e-14);
        }
    }
}
