//! Gauss rules on reference intervals, cubes and simplices.
//!
//! Cube rules are tensor products of Gauss-Legendre rules on `[0, 1]`.
//! Simplex rules collapse a tensor rule onto the simplex (Duffy transform),
//! which gives arbitrary-degree exactness without tabulated rules.

use crate::error::{Error, Result};
use crate::topology::{CellKind, Family};
use crate::vec3::Vec3;

/// Reference domain of a quadrature rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    /// The interval `[0, 1]`, points stored in the first coordinate.
    Interval,
    Cell(CellKind),
}

#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub points: Vec<Vec3>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(&Vec3) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(x, w)| w * f(x)).sum()
    }
}

/// Gauss-Legendre points and weights on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Chebyshev-like initial guess, then Newton on P_n
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        dp = if d != 0.0 { d } else { dp };
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        // map [-1,1] -> [0,1]
        x[i] = 0.5 * (1.0 - z);
        x[n - 1 - i] = 0.5 * (1.0 + z);
        w[i] = 0.5 * wi;
        w[n - 1 - i] = 0.5 * wi;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Rule exact for polynomials of degree `degree` (total degree on simplices,
/// per-direction degree on cubes).
pub fn rule_for(domain: Domain, degree: usize) -> Result<QuadratureRule> {
    match domain {
        Domain::Interval => {
            let n = (degree + 2) / 2;
            let (x, w) = gauss_legendre(n);
            Ok(QuadratureRule { points: x.iter().map(|&t| [t, 0.0, 0.0]).collect(), weights: w, degree })
        }
        Domain::Cell(kind) => match (kind.family, kind.dim) {
            (Family::Cube, d @ 2..=3) => Ok(cube_rule(d, degree)),
            (Family::Simplex, 2) => Ok(triangle_rule(degree)),
            (Family::Simplex, 3) => Ok(tet_rule(degree)),
            _ => Err(Error::InvalidArgument(format!("no quadrature for {kind:?}"))),
        },
    }
}

fn cube_rule(d: usize, degree: usize) -> QuadratureRule {
    let n = (degree + 2) / 2;
    let (x, w) = gauss_legendre(n);
    let mut points = Vec::new();
    let mut weights = Vec::new();
    let nz = if d == 3 { n } else { 1 };
    for k in 0..nz {
        for j in 0..n {
            for i in 0..n {
                let z = if d == 3 { x[k] } else { 0.0 };
                let wz = if d == 3 { w[k] } else { 1.0 };
                points.push([x[i], x[j], z]);
                weights.push(w[i] * w[j] * wz);
            }
        }
    }
    QuadratureRule { points, weights, degree }
}

fn triangle_rule(degree: usize) -> QuadratureRule {
    // (u, v) in [0,1]^2 -> (u, (1-u) v), jacobian 1-u
    let n = (degree + 3) / 2;
    let (x, w) = gauss_legendre(n);
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let u = x[i];
            let v = x[j];
            points.push([u, (1.0 - u) * v, 0.0]);
            weights.push(w[i] * w[j] * (1.0 - u));
        }
    }
    QuadratureRule { points, weights, degree }
}

fn tet_rule(degree: usize) -> QuadratureRule {
    // (u, v, s) -> (u, (1-u) v, (1-u)(1-v) s), jacobian (1-u)^2 (1-v)
    let n = (degree + 4) / 2;
    let (x, w) = gauss_legendre(n);
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let (u, v, s) = (x[i], x[j], x[k]);
                points.push([u, (1.0 - u) * v, (1.0 - u) * (1.0 - v) * s]);
                weights.push(w[i] * w[j] * w[k] * (1.0 - u) * (1.0 - u) * (1.0 - v));
            }
        }
    }
    QuadratureRule { points, weights, degree }
}
