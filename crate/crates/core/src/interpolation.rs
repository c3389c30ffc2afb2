//! Nédélec interpolation of analytic fields and error norms.

use crate::assembly::CellQuadrature;
use crate::error::Result;
use crate::space::{FeFunction, FeSpace};
use crate::vec3::{self, Vec3};

type Field = Box<dyn Fn(&Vec3) -> Vec3 + Send + Sync>;

/// A vector field with its curl (the scalar 2D curl in the z slot).
pub struct AnalyticField {
    pub value: Field,
    pub curl: Field,
}

impl AnalyticField {
    pub fn new(
        value: impl Fn(&Vec3) -> Vec3 + Send + Sync + 'static,
        curl: impl Fn(&Vec3) -> Vec3 + Send + Sync + 'static,
    ) -> Self {
        AnalyticField { value: Box::new(value), curl: Box::new(curl) }
    }

    pub fn value(&self, x: &Vec3) -> Vec3 {
        (self.value)(x)
    }

    pub fn curl(&self, x: &Vec3) -> Vec3 {
        (self.curl)(x)
    }

    /// Largest difference between the supplied curl and a central finite
    /// difference curl with step `h` at the given points, relative to
    /// `1 + |curl|`.
    pub fn curl_defect(&self, points: &[Vec3], dim: usize, h: f64) -> f64 {
        points
            .iter()
            .map(|x| {
                let fd = fd_curl(&|y| self.value(y), x, dim, h);
                let c = self.curl(x);
                vec3::norm(&vec3::sub(&fd, &c)) / (1.0 + vec3::norm(&c))
            })
            .fold(0.0, f64::max)
    }
}

/// Central-difference curl; in 2D only the z component is formed.
pub fn fd_curl(u: &dyn Fn(&Vec3) -> Vec3, x: &Vec3, dim: usize, h: f64) -> Vec3 {
    let mut g = [[0.0; 3]; 3];
    for (axis, row) in g.iter_mut().enumerate().take(dim) {
        let mut xp = *x;
        let mut xm = *x;
        xp[axis] += h;
        xm[axis] -= h;
        let (up, um) = (u(&xp), u(&xm));
        for c in 0..3 {
            row[c] = (up[c] - um[c]) / (2.0 * h);
        }
    }
    if dim == 2 {
        [0.0, 0.0, g[0][1] - g[1][0]]
    } else {
        [g[1][2] - g[2][1], g[2][0] - g[0][2], g[0][1] - g[1][0]]
    }
}

/// DOF values from the physical moments of `u`; constrained DOFs follow
/// their constraint rows.
pub fn interpolate(space: &FeSpace, u: &dyn Fn(&Vec3) -> Vec3) -> FeFunction {
    let mut values = vec![0.0; space.n_dofs()];
    let mut done = vec![false; space.n_dofs()];
    for c in 0..space.n_cells() {
        let dofs = &space.dofs.cell_dofs[c];
        if dofs.iter().all(|&i| done[i] || space.constraints.is_constrained(i)) {
            continue;
        }
        let m = space.cell_moments(c, u);
        for (a, &i) in dofs.iter().enumerate() {
            if !done[i] && !space.constraints.is_constrained(i) {
                values[i] = m[a];
                done[i] = true;
            }
        }
    }
    space.constraints.distribute(&mut values);
    FeFunction { values }
}

#[derive(Debug, Clone)]
pub struct ErrorNorms {
    pub l2: f64,
    /// `L2` norm of the curl error.
    pub curl: f64,
    pub hcurl: f64,
    /// Squared `L2` error per cell.
    pub cell_l2_sq: Vec<f64>,
    /// Squared curl error per cell.
    pub cell_curl_sq: Vec<f64>,
}

/// `L2` and `H(curl)` errors of `uh` against `exact`, with quadrature exact
/// to degree `2k + 2 + extra`.
pub fn error_norms(space: &FeSpace, uh: &FeFunction, exact: &AnalyticField, extra: usize) -> Result<ErrorNorms> {
    let quad = CellQuadrature::new(space, 2 * space.order() + 2 + extra)?;
    let n = space.element.n_dofs();
    let mut cell_l2_sq = Vec::with_capacity(space.n_cells());
    let mut cell_curl_sq = Vec::with_capacity(space.n_cells());
    for c in 0..space.n_cells() {
        let map = &space.mesh.maps[c];
        let local = space.local(c, &uh.values);
        let (mut e0, mut e1) = (0.0, 0.0);
        for (q, (xh, w)) in quad.rule.points.iter().zip(&quad.rule.weights).enumerate() {
            let mut v = [0.0; 3];
            let mut cu = [0.0; 3];
            for a in 0..n {
                vec3::axpy(&mut v, local[a], &quad.values[q][a]);
                vec3::axpy(&mut cu, local[a], &quad.curls[q][a]);
            }
            let x = map.map_point(xh);
            let dv = vec3::sub(&map.push_value(&v), &exact.value(&x));
            let dc = vec3::sub(&map.push_curl(&cu), &exact.curl(&x));
            let wq = w * map.measure();
            e0 += wq * vec3::dot(&dv, &dv);
            e1 += wq * vec3::dot(&dc, &dc);
        }
        cell_l2_sq.push(e0);
        cell_curl_sq.push(e1);
    }
    let l2sq: f64 = cell_l2_sq.iter().sum();
    let cusq: f64 = cell_curl_sq.iter().sum();
    Ok(ErrorNorms { l2: l2sq.sqrt(), curl: cusq.sqrt(), hcurl: (l2sq + cusq).sqrt(), cell_l2_sq, cell_curl_sq })
}
